import math

import numpy as np
import pytest
from scipy.integrate import quad

from salz.control import (
    ControlKind,
    cd_eps0_analytic,
    cd_exact,
    cd_exact_grid,
    cd_origin_snapshot,
    cd_two_level_analytic,
    control_field,
    crossover_time,
    long_time_corner_coefficients,
    lz_theta_dot,
    perturbative_long_time,
    perturbative_small_delta,
    pi_pulse_integral,
    separated_matrix,
    separated_single_field,
    theta_sep_dot,
)
from salz.errors import DegenerateSpectrum, SingularPoint, WrongRegime
from salz.linalg import eigh_grid, pauli_operators, spin1_operators
from salz.models import ThreeLevelModel, TwoLevelModel

SQ2 = math.sqrt(2.0)


# ------------------------------------------------------------- exact CD


def test_two_level_central_value():
    m = TwoLevelModel(alpha=1.0, delta=0.5)
    _, sy, _ = pauli_operators()
    assert np.abs(cd_exact(m, 0.0) + sy).max() < 1e-12
    assert lz_theta_dot(m, 0.0) == pytest.approx(-2.0, rel=1e-15)


def test_two_level_analytic_matches_exact(rng):
    m = TwoLevelModel(alpha=1.0, delta=0.5)
    for tau in rng.uniform(-50, 50, size=100):
        diff = np.abs(cd_exact(m, tau) - cd_two_level_analytic(m, tau)).max()
        assert diff < 1e-10


def test_two_level_tail_decay():
    m = TwoLevelModel(alpha=1.0, delta=0.5)
    for tau in (1e3, 1e4):
        val = np.abs(cd_two_level_analytic(m, tau)).max()
        assert val == pytest.approx(0.5 * 0.5 / tau ** 2, rel=1e-5)


def test_merged_crossing_matches_exact(rng):
    m = ThreeLevelModel(epsilon=0.0, alpha=1.0, delta=0.5)
    for tau in rng.uniform(-50, 50, size=100):
        diff = np.abs(cd_exact(m, tau) - cd_eps0_analytic(m, tau)).max()
        assert diff < 1e-10


def test_merged_crossing_structure():
    m = ThreeLevelModel(epsilon=0.0, alpha=1.0, delta=0.5)
    h = cd_eps0_analytic(m, 0.0)
    assert h[0, 2] == 0.0
    # peak rate at the crossing is -alpha/Delta
    _, sy, _ = spin1_operators()
    assert np.abs(h - (-1.0 / 0.5) * sy).max() < 1e-14
    with pytest.raises(WrongRegime):
        cd_eps0_analytic(ThreeLevelModel(epsilon=1.0, alpha=1.0, delta=0.5), 0.0)


def test_origin_snapshot_matches_exact():
    for eps in (1.0, 2.0, 5.0, 15.0):
        m = ThreeLevelModel(epsilon=eps, alpha=1.0, delta=0.5)
        diff = np.abs(cd_exact(m, 0.0) - cd_origin_snapshot(m)).max()
        assert diff < 1e-9


def test_origin_snapshot_corner_scales_linearly():
    for eps in (1.0, 2.0, 5.0):
        m = ThreeLevelModel(epsilon=eps, alpha=1.0, delta=0.5)
        h = cd_origin_snapshot(m)
        assert abs(h[0, 2]) == pytest.approx(1.0 * eps / 0.25, rel=1e-12)
    m0 = ThreeLevelModel(epsilon=0.0, alpha=1.0, delta=0.5)
    assert np.abs(cd_origin_snapshot(m0) - cd_eps0_analytic(m0, 0.0)).max() < 1e-14


def test_gauge_invariance(rng):
    # projector assembly is unchanged under arbitrary eigenvector phases
    m = ThreeLevelModel(epsilon=2.0, alpha=1.0, delta=0.5)
    b0, b1 = m.sweep_matrices()
    for tau in rng.uniform(-20, 20, size=20):
        h0 = b0 + tau * b1
        w, v = np.linalg.eigh(h0)
        v = v * np.exp(1j * rng.uniform(0, 2 * np.pi, 3))[None, :]
        mm = v.conj().T @ b1 @ v
        den = w[None, :] - w[:, None]
        np.fill_diagonal(den, 1.0)
        k = 1j * mm / den
        np.fill_diagonal(k, 0.0)
        rebuilt = v @ k @ v.conj().T
        assert np.abs(rebuilt - cd_exact(m, tau)).max() < 1e-12


def test_hermitian_and_adiabatic_diagonal(rng):
    # 1e4 random (model, tau) samples via grid batches
    total = 0
    for _ in range(20):
        m = ThreeLevelModel(
            epsilon=rng.uniform(0.0, 15.0), alpha=rng.uniform(0.3, 2.0),
            delta=rng.uniform(0.2, 1.5), beta=-rng.uniform(0.3, 2.0),
            delta_delta=rng.uniform(-0.1, 0.1))
        taus = np.ascontiguousarray(rng.uniform(-60, 60, size=500))
        h1 = cd_exact_grid(m, taus)
        total += len(taus)
        assert np.abs(h1 - h1.conj().transpose(0, 2, 1)).max() < 1e-12
        b0, b1 = m.sweep_matrices()
        _, v = eigh_grid(b0[None] + taus[:, None, None] * b1[None])
        in_frame = v.conj().transpose(0, 2, 1) @ h1 @ v
        diag = in_frame[:, np.arange(3), np.arange(3)]
        assert np.abs(diag).max() < 1e-10
    assert total == 10_000


def test_degenerate_spectrum_raises():
    m = TwoLevelModel(alpha=1.0, delta=0.0)  # gap closes exactly at tau=0
    with pytest.raises(DegenerateSpectrum):
        cd_exact(m, 0.0)


# -------------------------------------------------------------- pi pulse


def test_pi_pulse_integral():
    m = TwoLevelModel(alpha=1.0, delta=0.5)
    assert abs(pi_pulse_integral(m) - math.pi) < 1e-12
    # finite window falls short by ~2 Delta/(alpha tau_max)
    val = pi_pulse_integral(m, tau_max=1e4)
    assert math.pi - val == pytest.approx(2 * 0.5 / 1e4, rel=1e-3)
    # quadrature oracle over the same window
    num, err = quad(lambda t: abs(lz_theta_dot(m, t)), -1e4, 1e4, limit=400)
    assert num == pytest.approx(val, abs=1e-9)
    # degenerate coupling: analytic limit
    assert pi_pulse_integral(TwoLevelModel(alpha=1.0, delta=0.0)) == math.pi


# ------------------------------------------------------ separated control


def test_separated_matrix_zero_corner(rng):
    m = ThreeLevelModel(epsilon=7.0, alpha=1.0, delta=0.5)
    for tau in rng.uniform(-40, 40, size=50):
        h = separated_matrix(m, tau)
        assert h[0, 2] == 0.0 and h[2, 0] == 0.0
        assert np.abs(h - h.conj().T).max() < 1e-15


def test_separated_matrix_central_rate():
    m = ThreeLevelModel(epsilon=7.0, alpha=1.0, delta=0.5)
    h = separated_matrix(m, 0.0)
    # theta_L' (0) = -sqrt(2)*0.5/(49+0.5)
    want = -SQ2 * 0.5 / 49.5
    assert h[0, 1] == pytest.approx(-0.5j * want, rel=1e-12)
    assert abs(want) == pytest.approx(0.014285, abs=1e-6)


def test_separated_matrix_against_rotation_derivative(rng):
    # independent oracle: i (dU_L/dtau)^H U_L + i (dU_R/dtau)^H U_R via
    # central differences of the block-rotation matrices
    m = ThreeLevelModel(epsilon=4.0, alpha=1.3, delta=0.6)

    def u_l(tau):
        th = math.atan2(SQ2 * m.delta, m.alpha * tau + m.epsilon)
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[-s, c, 0], [c, s, 0], [0, 0, 1.0]])

    def u_r(tau):
        th = math.atan2(SQ2 * m.delta, -(m.beta * tau + m.epsilon))
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[1.0, 0, 0], [0, -s, c], [0, c, s]])

    eps_fd = 1e-6
    for tau in rng.uniform(-20, 20, size=10):
        want = np.zeros((3, 3), dtype=complex)
        for u in (u_l, u_r):
            du = (u(tau + eps_fd) - u(tau - eps_fd)) / (2 * eps_fd)
            want += 1j * du.T @ u(tau)
        assert np.abs(separated_matrix(m, tau) - want).max() < 1e-6


def test_separated_matrix_reduces_to_isolated_crossing():
    # far-separated crossings: near tau=-eps/alpha the (1,2) block matches
    # the two-level control of a sweep with coupling sqrt(2) Delta
    eps = 1e4
    m = ThreeLevelModel(epsilon=eps, alpha=1.0, delta=0.5)
    iso = TwoLevelModel(alpha=1.0, delta=SQ2 * 0.5)
    for s in (-0.5, 0.0, 1.0):
        h = separated_matrix(m, -eps + s)
        want = cd_two_level_analytic(iso, s)
        assert abs(h[0, 1] - want[0, 1]) <= 1e-3 * abs(want[0, 1])


def test_separated_single_field():
    m = ThreeLevelModel(epsilon=7.0, alpha=1.0, delta=0.5)
    rate0 = theta_sep_dot(m, 0.0)
    assert rate0 == pytest.approx(-2 * SQ2 * 0.5 / 49.5, rel=1e-12)
    assert abs(rate0) == pytest.approx(0.028570, abs=1e-6)
    # even in tau for the symmetric model
    for tau in (0.3, 2.0, 11.0):
        assert theta_sep_dot(m, tau) == pytest.approx(theta_sep_dot(m, -tau),
                                                      rel=1e-14)
    # at tau=-eps/alpha the left Lorentzian dominates
    val = theta_sep_dot(m, -7.0)
    want = -SQ2 * 0.5 / (2 * 0.25) - SQ2 * 0.5 / (4 * 49 + 2 * 0.25)
    assert val == pytest.approx(want, rel=1e-12)
    # field matrix: summed profile on both off-diagonals, zero corner
    h = separated_single_field(m, 0.7)
    assert h[0, 2] == 0.0
    assert h[0, 1] == h[1, 2]


# ------------------------------------------------------ perturbative forms


def test_small_delta_orders():
    eps, alpha, tau = 5.0, 1.0, 15.0
    h1 = perturbative_small_delta(
        ThreeLevelModel(epsilon=eps, alpha=alpha, delta=0.01), tau)
    h2 = perturbative_small_delta(
        ThreeLevelModel(epsilon=eps, alpha=alpha, delta=0.02), tau)
    assert abs(h2[0, 1] / h1[0, 1]) == pytest.approx(2.0, rel=1e-12)
    assert abs(h2[0, 2] / h1[0, 2]) == pytest.approx(4.0, rel=1e-12)


def test_small_delta_cross_check():
    m = ThreeLevelModel(epsilon=5.0, alpha=1.0, delta=0.05)
    tau = 15.0
    exact = cd_exact(m, tau)
    pert = perturbative_small_delta(m, tau)
    for i, j, tol in ((0, 1, 0.05), (1, 2, 0.05), (0, 2, 0.15)):
        rel = abs(exact[i, j] - pert[i, j]) / abs(exact[i, j])
        assert rel < tol


def test_small_delta_corner_vanishes_with_eps():
    m = ThreeLevelModel(epsilon=1e-9, alpha=1.0, delta=0.05)
    assert abs(perturbative_small_delta(m, 15.0)[0, 2]) < 1e-12


def test_small_delta_singular_points():
    m = ThreeLevelModel(epsilon=5.0, alpha=1.0, delta=0.05)
    for tau in (0.0, 5.0, -5.0):
        with pytest.raises(SingularPoint):
            perturbative_small_delta(m, tau)


def test_long_time_symmetric_cancellation():
    m = ThreeLevelModel(epsilon=5.0, alpha=1.0, delta=0.5)
    c3, c4 = long_time_corner_coefficients(m)
    assert c3 == 0.0
    assert c4 == pytest.approx(-5 * 5.0 * 0.25 / 4.0, rel=1e-12)


def test_long_time_small_asymmetry_coefficients():
    da = 1e-3
    m = ThreeLevelModel(epsilon=5.0, alpha=1.0, delta=0.5).with_delta_alpha(da)
    c3, c4 = long_time_corner_coefficients(m)
    # lowest order in delta_alpha, corrections are O(delta_alpha) relative
    assert c3 == pytest.approx(0.25 / 4.0 * da, rel=5e-3)
    assert c4 == pytest.approx(-5 * 5.0 * 0.25 / 4.0, rel=1e-2)
    assert crossover_time(m) == pytest.approx(5 * 5.0 / da, rel=1e-12)
    assert math.isinf(crossover_time(ThreeLevelModel(epsilon=5.0, alpha=1.0,
                                                     delta=0.5)))


def test_long_time_sign_pattern():
    m = ThreeLevelModel(epsilon=5.0, alpha=1.0, delta=0.5)
    h = perturbative_long_time(m, 100.0)
    assert h[0, 1].imag > 0 and h[1, 2].imag > 0
    assert h[0, 2].imag < 0
    assert np.abs(h - h.conj().T).max() == 0.0


def test_long_time_matches_exact_tail():
    m = ThreeLevelModel(epsilon=15.0, alpha=1.0, delta=0.5)
    tau = 2000.0
    exact = cd_exact(m, tau)
    pert = perturbative_long_time(m, tau)
    for i, j in ((0, 1), (1, 2), (0, 2)):
        rel = abs(exact[i, j] - pert[i, j]) / abs(exact[i, j])
        assert rel < 0.05


# ------------------------------------------------------------ ControlField


def test_control_field_kinds(rng):
    m = ThreeLevelModel(epsilon=3.0, alpha=1.0, delta=0.5)
    for kind in ("exact", "separated-matrix", "separated-field", "none"):
        f = control_field(m, kind)
        assert f.kind == ControlKind(kind)
        h = f.evaluate(0.37)
        assert h.shape == (3, 3)
        assert np.abs(h - h.conj().T).max() < 1e-12
    assert np.abs(control_field(m, "none").evaluate(1.0)).max() == 0.0
