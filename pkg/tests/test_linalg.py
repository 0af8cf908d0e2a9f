import math
from fractions import Fraction

import numpy as np
import pytest

from xhoglab import linalg
from xhoglab.linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    UnitaryOp,
    basis_state,
    expected_max_simplex,
    haar_state,
    haar_unitary,
    measure_computational,
    pure_density,
    sample_uniform_simplex,
    trace_distance,
    trial_rng,
    unitary_channel_diamond_distance,
)


def test_haar_state_norm_and_determinism():
    s1 = haar_state(3, 42)
    s2 = haar_state(3, 42)
    assert abs(np.vdot(s1.amps, s1.amps).real - 1.0) < 1e-12
    assert np.array_equal(s1.amps, s2.amps)
    assert not np.array_equal(s1.amps, haar_state(3, 43).amps)


def test_haar_state_range_check():
    with pytest.raises(DimensionError):
        haar_state(0, 1)
    with pytest.raises(DimensionError):
        haar_state(15, 1)


def test_haar_state_first_moment():
    trials = 20000
    rng = trial_rng(7, 0)
    acc = 0.0
    for _ in range(trials):
        acc += abs(linalg.haar_state_amps(4, rng)[0]) ** 2
    mean = acc / trials
    # |<0|psi>|^2 ~ Beta(1, 3): mean 1/4, var 3/80
    se = math.sqrt(3 / 80 / trials)
    assert abs(mean - 0.25) < 3 * se


def test_haar_unitary_is_unitary_and_deterministic():
    for dim in (1, 2, 5, 8):
        u = haar_unitary(dim, 3)
        assert np.max(np.abs(u.mat @ u.mat.conj().T - np.eye(dim))) < 1e-10
        v = haar_unitary(dim, 3)
        assert np.array_equal(u.mat, v.mat)


def test_haar_unitary_dim1_is_phase():
    u = haar_unitary(1, 9)
    assert abs(abs(u.mat[0, 0]) - 1.0) < 1e-12


def test_haar_unitary_entry_moment():
    trials = 20000
    rng = trial_rng(11, 0)
    acc = 0.0
    for _ in range(trials):
        acc += abs(linalg.haar_unitary_mat(4, rng)[0, 0]) ** 2
    se = math.sqrt(3 / 80 / trials)
    assert abs(acc / trials - 0.25) < 3 * se


def test_measure_computational_point_mass():
    assert measure_computational(basis_state(8, 5), 0) == 5


def test_measure_computational_born_rule():
    state = PureState(np.array([math.sqrt(0.09), math.sqrt(0.91)]))
    rng = trial_rng(13, 0)
    hits = sum(int(linalg.born_sample(state.probabilities(), rng)) == 0 for _ in range(100000))
    p = hits / 100000
    assert abs(p - 0.09) < 3 * math.sqrt(0.09 * 0.91 / 100000)


def test_trace_distance_examples():
    rho0 = pure_density(basis_state(2, 0))
    rho1 = pure_density(basis_state(2, 1))
    plus = pure_density(PureState(np.array([1, 1]) / math.sqrt(2)))
    assert trace_distance(rho0, rho0) == 0
    assert abs(trace_distance(rho0, rho1) - 1.0) < 1e-12
    assert abs(trace_distance(rho0, plus) - 1 / math.sqrt(2)) < 1e-12


def test_diamond_distance_examples():
    ident = UnitaryOp(np.eye(2))
    assert unitary_channel_diamond_distance(ident, ident) == 0.0
    assert unitary_channel_diamond_distance(ident, UnitaryOp(-np.eye(2))) == 0.0
    assert abs(unitary_channel_diamond_distance(ident, UnitaryOp(np.diag([1.0, -1.0]))) - 2.0) < 1e-12


def test_diamond_distance_generic_phase_pair():
    # eigenvalues {1, e^(i*pi/2)}: chord geometry gives 2 sin(pi/4)
    u = UnitaryOp(np.diag([1.0, 1j]))
    got = unitary_channel_diamond_distance(u, UnitaryOp(np.eye(2)))
    assert abs(got - 2 * math.sin(math.pi / 4)) < 1e-12


def test_query_ledger_additive():
    a = UnitaryOp(np.eye(2), {"prep": 2})
    b = UnitaryOp(np.eye(2), {"prep": 3, "other": 1})
    assert (a @ b).query_ledger == {"prep": 5, "other": 1}


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.5, 0], [0, -0.5]]))


def test_simplex_sample_basics():
    s = sample_uniform_simplex(1, 0)
    assert s.probs[0] == 1.0
    s = sample_uniform_simplex(4, 5)
    assert abs(s.probs.sum() - 1.0) < 1e-12
    assert np.all(s.probs >= 0)


def test_expected_max_values():
    assert expected_max_simplex(1) == 1
    assert expected_max_simplex(2) == Fraction(3, 4)
    assert expected_max_simplex(8) == Fraction(761, 2240)


def test_simplex_max_monte_carlo():
    for n_bins in (2, 4, 8, 16):
        rng = trial_rng(17, n_bins)
        samples = linalg.sample_uniform_simplex_batch(n_bins, 20000, rng).max(axis=1)
        target = float(expected_max_simplex(n_bins))
        se = samples.std(ddof=1) / math.sqrt(len(samples))
        assert abs(samples.mean() - target) < 3 * se


def test_bot_state_layout():
    b = linalg.bot_state(2)
    assert b.has_bot and b.dim == 5 and b.amps[4] == 1.0
    assert b.n_qubits == 2
