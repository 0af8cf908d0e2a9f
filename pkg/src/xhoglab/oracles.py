"""Oracle families and the gate-level reductions between them.

Three oracle families are provided:

* canonical state preparation: the reflection about (|psi> - |bot>)/sqrt(2),
  acting on the (N+1)-dimensional space whose last index is the flag state;
* random state preparation: a unitary fixed to map |0^n> to |psi> and
  Haar-random on the complement of |0^n>;
* Fourier phase: the diagonal +-1 unitary of a Boolean sign function.

Two encodings of the flag state coexist: matrix-level oracles append an
(N+1)-th basis index, while circuit-level constructions use an ancilla qubit
(|psi> encoded as |psi>|1>, the flag as |0^n>|0>).  ``embed_extended_to_ancilla``
is the verified isomorphism between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import PureState, UnitaryOp, born_sample

HALF_SQRT2 = 1.0 / math.sqrt(2)


class OracleSealedError(RuntimeError):
    """A strategy attempted to read the hidden state behind an oracle."""


@dataclass(frozen=True)
class SignFunction:
    """A Boolean function f: {0,1}^n -> {-1,+1} stored as a sign table."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", table)
        if len(table) != 2**self.n:
            raise ValueError("sign table length is not 2^n")
        if not np.all(np.abs(table) == 1):
            raise ValueError("sign table entries must be +-1")

    def to_hex(self) -> str:
        """Serialize as lowercase hex: bit=1 means -1, MSB is x = 0^n."""
        bits = 0
        size = 2**self.n
        for x, s in enumerate(self.table):
            if s == -1:
                bits |= 1 << (size - 1 - x)
        width = max(1, (size + 3) // 4)
        return format(bits, f"0{width}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "SignFunction":
        size = 2**n
        bits = int(text, 16)
        table = [(-1 if (bits >> (size - 1 - x)) & 1 else 1) for x in range(size)]
        return cls(n, np.array(table))

    @classmethod
    def random(cls, n: int, rng) -> "SignFunction":
        return cls(n, 1 - 2 * rng.integers(0, 2, size=2**n))

    @classmethod
    def from_index(cls, n: int, index: int) -> "SignFunction":
        """The index-th function in the enumeration of all 2^(2^n) sign tables."""
        size = 2**n
        table = [(-1 if (index >> (size - 1 - x)) & 1 else 1) for x in range(size)]
        return cls(n, np.array(table))


class OracleHandle:
    """A queryable unitary whose hidden state is sealed from strategies.

    Every forward/adjoint/controlled application increments ``calls`` by one.
    ``apply`` uses a rank-one or diagonal fast path where the oracle structure
    allows it; the dense matrix is materialized lazily.
    """

    def __init__(self, kind, dim, metadata, mat=None, rank1_vec=None, diag=None, sealed=False):
        self.kind = kind
        self.dim = dim
        self.calls = 0
        self.sealed = sealed
        self._metadata = metadata
        self._mat = mat
        self._rank1_vec = rank1_vec
        self._diag = diag

    def peek_metadata(self):
        """Hidden state, for scoring/verification only.  Raises when sealed."""
        if self.sealed:
            raise OracleSealedError("oracle metadata is sealed")
        return self._metadata

    def _apply_mat(self, amps, adjoint):
        if self._rank1_vec is not None:
            # I - 2 v v^dagger: self-adjoint, O(dim) application
            v = self._rank1_vec
            return amps - 2.0 * v * np.vdot(v, amps)
        if self._diag is not None:
            return amps * (self._diag.conj() if adjoint else self._diag)
        m = self._mat
        return (m.conj().T @ amps) if adjoint else (m @ amps)

    def apply(self, state):
        """One oracle query.  Accepts and returns either PureState or ndarray."""
        self.calls += 1
        if isinstance(state, PureState):
            return PureState(self._apply_mat(state.amps, False), has_bot=state.has_bot)
        return self._apply_mat(np.asarray(state, dtype=complex), False)

    def apply_adjoint(self, state):
        self.calls += 1
        if isinstance(state, PureState):
            return PureState(self._apply_mat(state.amps, True), has_bot=state.has_bot)
        return self._apply_mat(np.asarray(state, dtype=complex), True)

    def apply_controlled(self, state_2dim):
        """Block-diagonal controlled form on a doubled space; costs one query."""
        self.calls += 1
        amps = np.asarray(state_2dim, dtype=complex).copy()
        amps[self.dim:] = self._apply_mat(amps[self.dim:], False)
        return amps

    @property
    def unitary(self) -> UnitaryOp:
        if self._mat is None:
            if self._rank1_vec is not None:
                v = self._rank1_vec
                self._mat = np.eye(self.dim, dtype=complex) - 2.0 * np.outer(v, v.conj())
            elif self._diag is not None:
                self._mat = np.diag(self._diag.astype(complex))
        return UnitaryOp(self._mat)


def reflection_about(psi: PureState) -> UnitaryOp:
    """I - 2 |psi><psi|: psi is a -1 eigenvector, its complement is fixed."""
    if psi.has_bot:
        raise ValueError("expected a state without the flag extension")
    v = psi.amps
    return UnitaryOp(np.eye(psi.dim, dtype=complex) - 2.0 * np.outer(v, v.conj()))


def reflection_handle(psi: PureState, sealed=False) -> OracleHandle:
    return OracleHandle("reflection", psi.dim, psi, rank1_vec=psi.amps.copy(), sealed=sealed)


def canonical_oracle(psi: PureState, sealed=False) -> OracleHandle:
    """The reflection about (|psi> - |bot>)/sqrt(2) on the extended space.

    Acts as |bot> -> |psi>, |psi> -> |bot>, and fixes everything orthogonal
    to both.
    """
    if psi.has_bot:
        raise ValueError("expected a state without the flag extension")
    v = np.append(psi.amps, -1.0) * HALF_SQRT2
    return OracleHandle("canonical", psi.dim + 1, psi, rank1_vec=v, sealed=sealed)


def householder_prep(psi_amps: np.ndarray) -> np.ndarray:
    """A deterministic unitary V with V|0> = psi (Householder-style completion)."""
    psi_amps = np.asarray(psi_amps, dtype=complex)
    dim = len(psi_amps)
    phase = psi_amps[0] / abs(psi_amps[0]) if abs(psi_amps[0]) > 1e-14 else 1.0
    u = psi_amps / phase
    u = u - np.eye(dim)[0]
    nrm2 = np.vdot(u, u).real
    if nrm2 < 1e-28:
        return phase * np.eye(dim, dtype=complex)
    return phase * (np.eye(dim, dtype=complex) - 2.0 * np.outer(u, u.conj()) / nrm2)


def gram_schmidt_prep(psi_amps: np.ndarray) -> np.ndarray:
    """Alternative completion: first column psi, rest by Gram-Schmidt on the identity."""
    psi_amps = np.asarray(psi_amps, dtype=complex)
    dim = len(psi_amps)
    cols = [psi_amps]
    for i in range(dim):
        if len(cols) == dim:
            break
        c = np.eye(dim)[i].astype(complex)
        for b in cols:
            c = c - b * np.vdot(b, c)
        nrm = np.linalg.norm(c)
        if nrm > 1e-9:
            cols.append(c / nrm)
    return np.column_stack(cols)


def random_prep_oracle(psi: PureState, seed, completion="householder", sealed=False) -> OracleHandle:
    """A unitary with U|0^n> = |psi>, Haar-random on the complement of |0^n>.

    Built as V W: V is a fixed completion preparing psi, W is Haar on the
    subspace orthogonal to |0^n>.  The distribution is independent of the
    choice of V by Haar invariance.
    """
    from .linalg import haar_unitary_mat, _as_rng

    if psi.has_bot:
        raise ValueError("expected a state without the flag extension")
    dim = psi.dim
    make_v = {"householder": householder_prep, "gram_schmidt": gram_schmidt_prep}[completion]
    v = make_v(psi.amps)
    rng = _as_rng(seed)
    w = np.eye(dim, dtype=complex)
    if dim > 1:
        w[1:, 1:] = haar_unitary_mat(dim - 1, rng)
    else:
        theta = rng.uniform(0, 2 * math.pi)
        w[0, 0] = np.exp(1j * theta)
    return OracleHandle("random_prep", dim, psi, mat=v @ w, sealed=sealed)


def fourier_phase_oracle(f: SignFunction, sealed=False) -> OracleHandle:
    """The phase oracle U_f |x> = f(x) |x>."""
    return OracleHandle("fourier_phase", 2**f.n, f, diag=f.table.astype(complex), sealed=sealed)


def fwht(vec: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (in place on a copy)."""
    a = np.array(vec)
    h = 1
    n = len(a)
    while h < n:
        a = a.reshape(-1, 2 * h)
        x = a[:, :h].copy()
        a[:, :h] = x + a[:, h:]
        a[:, h:] = x - a[:, h:]
        a = a.reshape(n)
        h *= 2
    return a


def fourier_coefficients_float(f: SignFunction) -> np.ndarray:
    return fwht(f.table.astype(float)) / 2**f.n


def fourier_sampling_state(f: SignFunction) -> PureState:
    """The output state of H^(x)n U_f H^(x)n on |0^n>: amplitude f-hat(z) on z."""
    return PureState(fourier_coefficients_float(f).astype(complex))


def refl_from_prep(prep: UnitaryOp, t: int, n_system=None, garbage=None) -> UnitaryOp:
    """Simulate the reflection about psi from a prep unitary with garbage.

    Given prep |0...0> = |psi>|phi>, the operator prep (I - 2|0..0><0..0|)
    prep^dagger acts as R_psi on the system register whenever the garbage
    register holds |phi>.  The ledger records the 2t+1 prep queries needed
    for t reflections (2 per reflection plus one initial garbage preparation).
    """
    dim = prep.dim
    out0 = prep.mat[:, 0]
    if n_system is not None:
        n_sys = 2**n_system
        block = out0.reshape(n_sys, dim // n_sys)
        sv = np.linalg.svd(block, compute_uv=False)
        if sv[0] < 1.0 - 1e-8:
            raise ValueError("prep output on zeros is not a product state")
    mat = np.eye(dim, dtype=complex) - 2.0 * np.outer(out0, out0.conj())
    return UnitaryOp(mat, {"prep": 2 * t + 1})


def embed_extended_to_ancilla(amps_ext: np.ndarray) -> np.ndarray:
    """Isomorphism from the appended-index encoding to the ancilla encoding.

    Index x of the n-qubit basis maps to 2x+1 (|x>|1>); the flag index N maps
    to 0 (|0^n>|0>).
    """
    n_dim = len(amps_ext) - 1
    out = np.zeros(2 * n_dim, dtype=complex)
    out[1::2] = amps_ext[:n_dim]
    out[0] = amps_ext[n_dim]
    return out


def project_ancilla_to_extended(amps_anc: np.ndarray) -> np.ndarray:
    """Inverse of the encoding isomorphism (projects onto the encoded subspace)."""
    n_dim = len(amps_anc) // 2
    out = np.empty(n_dim + 1, dtype=complex)
    out[:n_dim] = amps_anc[1::2]
    out[n_dim] = amps_anc[0]
    return out


def _canonical_prep_circuit(prep: UnitaryOp) -> np.ndarray:
    """The two-query circuit preparing (|psi>|1> - |0^n>|0>)/sqrt(2) from zeros.

    Registers: n-qubit system (index x) tensor one ancilla (index a), basis
    index 2x+a.  Stages: ancilla X, ancilla H, controlled flag prep (identity
    here, since the flag's system part is |0^n>), controlled prep^dagger,
    ancilla X, final prep on the system register.
    """
    n_dim = prep.dim
    dim = 2 * n_dim
    mat = np.zeros((dim, dim), dtype=complex)

    def on_anc(g, m):
        m = m.reshape(n_dim, 2, dim)
        return np.einsum("ab,xbj->xaj", g, m).reshape(dim, dim)

    def on_top(g, m, control=None):
        m = m.reshape(n_dim, 2, dim)
        if control is None:
            return np.einsum("yx,xaj->yaj", g, m).reshape(dim, dim)
        out = m.copy()
        out[:, control, :] = np.einsum("yx,xj->yj", g, m[:, control, :])
        return out.reshape(dim, dim)

    x_gate = np.array([[0, 1], [1, 0]], dtype=complex)
    h_gate = np.array([[1, 1], [1, -1]], dtype=complex) * HALF_SQRT2
    m = np.eye(dim, dtype=complex)
    m = on_anc(x_gate, m)
    m = on_anc(h_gate, m)
    # controlled flag prep: identity (flag system part is |0^n>), zero queries
    m = on_top(prep.mat.conj().T, m, control=1)
    m = on_anc(x_gate, m)
    m = on_top(prep.mat, m)
    return m


def canonical_from_prep(prep: UnitaryOp, t: int) -> UnitaryOp:
    """Simulate the canonical oracle for psi = prep|0^n> in the ancilla encoding.

    Returns the reflection about (|psi>|1> - |0^n>|0>)/sqrt(2), built as
    P (I - 2|0><0|) P^dagger for the two-query prep circuit P.  The ledger
    records 4t+2 prep queries for t simulated oracle queries.
    """
    p = _canonical_prep_circuit(prep)
    target = p[:, 0]
    dim = p.shape[0]
    mat = np.eye(dim, dtype=complex) - 2.0 * np.outer(target, target.conj())
    return UnitaryOp(mat, {"prep": 4 * t + 2})


def canonical_prep_target(prep: UnitaryOp) -> np.ndarray:
    """The state the two-query circuit prepares from |0^n>|0> (for verification)."""
    return _canonical_prep_circuit(prep)[:, 0]


def sample_oracle_output(oracle: OracleHandle, rng) -> int:
    """Prepare one copy of the hidden state via a single query and measure it.

    For the canonical family the start state is the flag; for random prep it
    is |0^n>; for the Fourier family the query sits between Hadamard layers.
    """
    if oracle.kind == "canonical":
        start = np.zeros(oracle.dim, dtype=complex)
        start[-1] = 1.0
        out = oracle.apply(start)
        probs = np.abs(out[:-1]) ** 2
    elif oracle.kind == "random_prep":
        start = np.zeros(oracle.dim, dtype=complex)
        start[0] = 1.0
        out = oracle.apply(start)
        probs = np.abs(out) ** 2
    elif oracle.kind == "fourier_phase":
        start = np.full(oracle.dim, 1.0 / math.sqrt(oracle.dim), dtype=complex)
        out = fwht(oracle.apply(start)) / math.sqrt(oracle.dim)
        probs = np.abs(out) ** 2
    else:
        raise ValueError(f"oracle kind {oracle.kind!r} cannot prepare the hidden state")
    return int(born_sample(probs, rng))
