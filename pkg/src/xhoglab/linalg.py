"""Dense complex state/operator arithmetic, Haar sampling and distance measures.

Everything here is deterministic given a seed.  Seeds for individual trials are
derived from a master seed and a trial counter (see :func:`trial_rng`), so that
parallel experiment runs reproduce bit-for-bit regardless of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

ATOL = 1e-10

MAX_QUBITS = 14
MAX_DIM = 2**MAX_QUBITS


class DimensionError(ValueError):
    """Raised when a dimension is out of range or two operands disagree."""


def trial_rng(master_seed, trial=0):
    """Counter-based RNG derivation: one independent stream per (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed), int(trial))))


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class PureState:
    """A unit complex amplitude vector over a finite computational basis.

    If ``has_bot`` is set, the last index encodes the flag state orthogonal to
    every n-qubit basis state, and indices 0..dim-2 are the computational basis.
    """

    amps: np.ndarray
    has_bot: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        object.__setattr__(self, "amps", amps)
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state norm {norm} is not 1")

    @property
    def dim(self) -> int:
        return len(self.amps)

    @property
    def n_qubits(self) -> int:
        n_dim = self.dim - 1 if self.has_bot else self.dim
        n = n_dim.bit_length() - 1
        if 2**n != n_dim:
            raise ValueError("dimension is not a power of two")
        return n

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def with_bot(self) -> "PureState":
        """Embed into the (N+1)-dimensional space with zero amplitude on the flag."""
        if self.has_bot:
            return self
        return PureState(np.append(self.amps, 0.0), has_bot=True)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amps, other.amps))


def basis_state(dim, index, has_bot=False) -> PureState:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return PureState(v, has_bot=has_bot)


def bot_state(n: int) -> PureState:
    """The flag state on the extended (2^n + 1)-dimensional space."""
    return basis_state(2**n + 1, 2**n, has_bot=True)


@dataclass
class UnitaryOp:
    """A dense unitary with an additive ledger of oracle call counts."""

    mat: np.ndarray
    query_ledger: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        d = self.mat.shape[0]
        if self.mat.shape != (d, d):
            raise DimensionError("matrix is not square")
        err = np.max(np.abs(self.mat.conj().T @ self.mat - np.eye(d)))
        if err > 1e-8:
            raise ValueError(f"matrix is not unitary (deviation {err:.3g})")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def adjoint(self) -> "UnitaryOp":
        return UnitaryOp(self.mat.conj().T, dict(self.query_ledger))

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        if self.dim != other.dim:
            raise DimensionError("dimension mismatch in composition")
        ledger = dict(self.query_ledger)
        for k, v in other.query_ledger.items():
            ledger[k] = ledger.get(k, 0) + v
        return UnitaryOp(self.mat @ other.mat, ledger)

    def apply(self, state: PureState) -> PureState:
        return PureState(self.mat @ state.amps, has_bot=state.has_bot)


@dataclass
class DensityMatrix:
    mat: np.ndarray

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        if np.max(np.abs(self.mat - self.mat.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(self.mat).real
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"trace {tr} is not 1")
        if np.min(np.linalg.eigvalsh(self.mat)) < -ATOL:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def pure_density(state: PureState) -> DensityMatrix:
    return DensityMatrix(np.outer(state.amps, state.amps.conj()))


@dataclass(frozen=True)
class SimplexSample:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < 0):
            raise ValueError("negative simplex coordinate")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("simplex coordinates do not sum to 1")

    @property
    def n_bins(self) -> int:
        return len(self.probs)


def haar_state(n: int, seed) -> PureState:
    """Haar-random n-qubit state: normalized i.i.d. complex Gaussian amplitudes."""
    if not 1 <= n <= MAX_QUBITS:
        raise DimensionError(f"qubit count {n} outside [1, {MAX_QUBITS}]")
    rng = _as_rng(seed)
    dim = 2**n
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def haar_state_amps(dim: int, rng) -> np.ndarray:
    """Bare amplitude vector of a Haar-random state (hot path, no wrapper)."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_unitary(dim: int, seed) -> UnitaryOp:
    """Haar-random unitary via the Ginibre + QR construction.

    The diagonal phase correction makes the distribution exactly Haar, not
    merely unitary.
    """
    if not 1 <= dim <= MAX_DIM:
        raise DimensionError(f"dimension {dim} outside [1, {MAX_DIM}]")
    return UnitaryOp(haar_unitary_mat(dim, _as_rng(seed)))


def haar_unitary_mat(dim: int, rng) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def born_sample(probs: np.ndarray, rng, size=None):
    """Sample basis indices from a probability vector (renormalized exactly)."""
    p = np.asarray(probs, dtype=float)
    return rng.choice(len(p), size=size, p=p / p.sum())


def measure_computational(state: PureState, seed) -> int:
    """Measure in the computational basis; returns the observed index."""
    return int(born_sample(state.probabilities(), _as_rng(seed)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dim != b.dim:
        raise DimensionError("dimension mismatch")
    sv = np.linalg.svd(a.mat - b.mat, compute_uv=False)
    return 0.5 * float(sv.sum())


def distance_to_eigenvalue_hull(eigs: np.ndarray) -> float:
    """Euclidean distance from the origin to the convex hull of unit-circle points.

    Eigenvalues of a unitary lie on the unit circle, so the hull geometry
    reduces to angular gaps: the origin lies inside the hull iff the largest
    gap between consecutive eigenphases is at most pi; otherwise the nearest
    hull point is on the chord closing that gap.
    """
    angles = np.sort(np.angle(eigs))
    gaps = np.diff(angles, append=angles[0] + 2 * math.pi)
    gmax = float(np.max(gaps))
    if gmax <= math.pi:
        return 0.0
    return math.cos((2 * math.pi - gmax) / 2)


def unitary_channel_diamond_distance(v: UnitaryOp, w: UnitaryOp) -> float:
    """Diamond distance between the channels of two unitaries.

    Computed from the eigenvalues of VW^dagger: with d the distance from the
    origin to their convex hull, the distance is 2 sqrt(1 - d^2).
    """
    if v.dim != w.dim:
        raise DimensionError("dimension mismatch")
    eigs = np.linalg.eigvals(v.mat @ w.mat.conj().T)
    return unitary_eigs_to_diamond(eigs)


def unitary_eigs_to_diamond(eigs: np.ndarray) -> float:
    d = distance_to_eigenvalue_hull(eigs)
    return 2 * math.sqrt(max(0.0, 1.0 - d * d))


def sample_uniform_simplex(n_bins: int, seed) -> SimplexSample:
    """Uniform sample from the probability simplex via normalized exponentials."""
    if n_bins < 1:
        raise DimensionError("n_bins must be >= 1")
    rng = _as_rng(seed)
    e = rng.exponential(size=n_bins)
    return SimplexSample(e / e.sum())


def sample_uniform_simplex_batch(n_bins: int, trials: int, rng) -> np.ndarray:
    e = rng.exponential(size=(trials, n_bins))
    return e / e.sum(axis=1, keepdims=True)


def harmonic_number(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def expected_max_simplex(n_bins: int) -> Fraction:
    """Exact E[max coordinate] of the uniform simplex distribution: H_N / N."""
    if n_bins < 1:
        raise DimensionError("n_bins must be >= 1")
    return harmonic_number(n_bins) / n_bins
