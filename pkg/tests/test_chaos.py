import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamlearn.chaos import (
    ChaosClass, ChaosReport, LyapunovResult, alignment_index, chaos_sweep, classify, jacobian_fd,
    lyapunov_spectrum, sweep_initial_conditions, tangent_dynamics, true_field_factory,
)
from hamlearn.systems import SystemKind, SystemSpec, hamiltonian_field, total_energy, PhaseState


def linear_field(A):
    return lambda x: x @ A.T


def test_linear_saddle_exponents_are_eigenvalues():
    # x' = a x, p' = -a p: the exact spectrum is (a, -a)
    a = 0.3
    res = lyapunov_spectrum(linear_field(np.diag([a, -a])), [0.01, 0.01], dt=0.01, n_steps=2000,
                            max_norm=np.inf)
    np.testing.assert_allclose(res.spectrum, [a, -a], atol=1e-9)


def test_rotation_has_zero_exponents_and_constant_alignment():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    res = lyapunov_spectrum(linear_field(A), [0.1, 0.0], n_steps=3000)
    np.testing.assert_allclose(res.spectrum, 0.0, atol=1e-10)
    al = alignment_index(linear_field(A), [0.1, 0.0], n_steps=3000)
    # a rotation keeps the angle between deviation vectors, so gamma stays sqrt(2)
    np.testing.assert_allclose(al.gamma_series, np.sqrt(2), atol=1e-10)


def test_hh_alpha_zero_jacobian_is_constant():
    f = hamiltonian_field(SystemSpec.henon_heiles(0.0))
    expected = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    for s in ([0, 0, 0, 0], [0.3, -0.2, 0.1, 0.4]):
        np.testing.assert_allclose(jacobian_fd(f, s), expected, atol=1e-10)


def test_hh_jacobian_matches_hessian():
    a = 0.8
    f = hamiltonian_field(SystemSpec.henon_heiles(a))
    x, y = 0.2, -0.1
    J = jacobian_fd(f, [x, y, 0.3, 0.1])
    hess = np.array([[1 + 2 * a * y, 2 * a * x], [2 * a * x, 1 - 2 * a * y]])
    np.testing.assert_allclose(J[2:, :2], -hess, atol=1e-8)
    np.testing.assert_allclose(J[:2, 2:], np.eye(2), atol=1e-10)


def test_jacobian_step_must_be_positive():
    with pytest.raises(ValueError):
        jacobian_fd(linear_field(np.eye(2)), [0.0, 0.0], h=0.0)


def test_hh_exponent_sum_vanishes_short_run():
    f = hamiltonian_field(SystemSpec.henon_heiles(1.0))
    res = lyapunov_spectrum(f, [0.0, 0.0, 6 ** -0.5, 6 ** -0.5], n_steps=5000)
    assert abs(res.spectrum.sum()) < 1e-8
    assert np.all(np.diff(res.spectrum) <= 0)


@settings(max_examples=15)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_alignment_index_bounded(u1, u2):
    u1, u2 = np.array(u1), np.array(u2)
    if np.linalg.norm(u1) < 1e-3 or np.linalg.norm(u2) < 1e-3:
        return
    f = hamiltonian_field(SystemSpec.henon_heiles(0.9))
    al = alignment_index(f, [0.1, 0.1, 0.2, 0.1], n_steps=300, u1=u1, u2=u2)
    assert np.all((al.gamma_series >= 0) & (al.gamma_series <= 2 + 1e-12))


def test_degenerate_deviation_vectors_give_zero_alignment():
    f = hamiltonian_field(SystemSpec.henon_heiles(0.5))
    u = np.array([1.0, 2.0, 0.0, -1.0])
    assert alignment_index(f, [0.1, 0, 0, 0.2], n_steps=50, u1=u, u2=u).gamma_min == pytest.approx(0, abs=1e-15)
    assert alignment_index(f, [0.1, 0, 0, 0.2], n_steps=50, u1=u, u2=-u).gamma_min == pytest.approx(0, abs=1e-15)


def test_classify_examples():
    assert classify(0.05, 1e-12) is ChaosClass.CHAOTIC
    assert classify(0.001, 0.5) is ChaosClass.REGULAR
    assert classify(0.05, 0.5) is ChaosClass.REGULAR
    assert classify(0.001, 1e-12) is ChaosClass.REGULAR
    assert classify(LyapunovResult(np.array([0.01, -0.01]), 10, 0.01), 0.0) is ChaosClass.CHAOTIC


def test_escaping_orbit_marked_invalid():
    f = hamiltonian_field(SystemSpec.henon_heiles(1.0))
    res = tangent_dynamics(f, np.array([[0.0, 1.5, 0.0, 0.0], [0.1, 0.0, 0.0, 0.1]]), 0.01, 2000)
    assert not res["valid"][0] and res["valid"][1]
    assert np.all(np.isfinite(res["exponents"]))


def test_sweep_initial_conditions_on_shell():
    x0 = sweep_initial_conditions(SystemKind.HENON_HEILES, [0.2, 0.9], 4, 1 / 6, seed=3)
    for i, a in enumerate([0.2, 0.9]):
        for j in range(4):
            s = PhaseState(x0[i, j, :2], x0[i, j, 2:])
            assert total_energy(SystemSpec.henon_heiles(a), s) == pytest.approx(1 / 6)
    # adding alphas or ICs leaves the existing streams unchanged
    more = sweep_initial_conditions(SystemKind.HENON_HEILES, [0.2, 0.9, 1.0], 6, 1 / 6, seed=3)
    np.testing.assert_array_equal(more[:2, :4], x0)


def test_integrable_sweep_has_no_chaos():
    r = chaos_sweep(true_field_factory(SystemKind.HENON_HEILES), [0.0], 3, 1 / 6, n_steps=2000, seed=1)
    assert r.f_c[0] == 0.0 and r.n_valid[0] == 3 and r.transition_alpha() is None


def test_sweep_is_deterministic_and_round_trips(tmp_path):
    fac = true_field_factory(SystemKind.HENON_HEILES)
    a = chaos_sweep(fac, [0.5, 1.0], 2, 1 / 6, n_steps=1000, seed=4)
    b = chaos_sweep(fac, [0.5, 1.0], 2, 1 / 6, n_steps=1000, seed=4, chunk=1)
    for name in ("lambda_M", "gamma_m", "f_c", "n_valid"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    a.to_csv(tmp_path / "c.csv")
    back = ChaosReport.from_csv(tmp_path / "c.csv")
    np.testing.assert_array_equal(back.lambda_M, a.lambda_M)
    np.testing.assert_array_equal(back.alphas, a.alphas)
    a.detail_to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().count("\n") == 5


def test_transition_alpha_is_first_crossing():
    r = ChaosReport(np.array([0.0, 0.5, 0.7, 0.9]), np.zeros(4), np.zeros(4),
                    np.array([0.0, 0.06, 0.01, 0.5]), np.full(4, 10), 10, 1 / 6)
    assert r.transition_alpha() == 0.5
    assert r.transition_alpha(0.1) == 0.9
    assert r.n_invalid == 0
