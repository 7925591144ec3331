"""Control Hamiltonians for transitionless (counterdiabatic) driving.

The exact construction works for any nondegenerate model: with
instantaneous eigenpairs (E_n, |psi_n>) of H0(tau),

    H1(tau) = i sum_{m != n} |psi_m><psi_m| dH0/dtau |psi_n><psi_n| / (E_n - E_m).

Built from spectral projectors it is gauge independent, Hermitian, and
purely off-diagonal in the adiabatic basis.  The analytic special cases
(two-level Lorentzian pulse, merged-crossing limit, the central-time
snapshot), the separated single-crossing constructions, and the
perturbative tail formulas are provided alongside for cross-checks and
for the tail experiments.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import controlforms, kernels
from .errors import DegenerateSpectrum, SingularPoint, WrongRegime
from .linalg import spin1_operators
from .models import ThreeLevelModel, TwoLevelModel

GAP_TOL = 1e-9  # relative to the spectral range

_SQ2 = math.sqrt(2.0)


class ControlKind(str, Enum):
    EXACT_CD = "exact"
    SEPARATED_MATRIX = "separated-matrix"
    SEPARATED_FIELD = "separated-field"
    PERTURBATIVE_SMALL_DELTA = "perturbative-small-delta"
    PERTURBATIVE_LONG_TIME = "perturbative-long-time"
    NONE = "none"


@dataclass(frozen=True)
class ControlField:
    """A matrix-valued control H1(tau); evaluate returns a Hermitian
    array of the model's dimension."""

    kind: ControlKind
    evaluate: Callable[[float], np.ndarray]


def cd_exact(model, tau: float, gap_tol: float = GAP_TOL) -> np.ndarray:
    """Exact counterdiabatic field at one time."""
    return cd_exact_grid(model, np.array([float(tau)]), gap_tol=gap_tol)[0]


def cd_exact_grid(model, taus, gap_tol: float = GAP_TOL) -> np.ndarray:
    """Exact counterdiabatic field on a grid of times, shape (n, d, d).

    Raises DegenerateSpectrum when the smallest relative gap of the
    instantaneous spectrum falls below gap_tol anywhere on the grid.
    """
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    b0, b1 = model.sweep_matrices()
    out, min_gap = kernels.cd_grid(b0, b1, taus, gap_tol)
    if min_gap <= gap_tol:
        raise DegenerateSpectrum(
            f"instantaneous spectrum nearly degenerate: relative gap "
            f"{min_gap:.3e} <= {gap_tol:.1e}")
    return out


def lz_theta_dot(model: TwoLevelModel, tau):
    """Mixing-angle rate of the two-level sweep; a Lorentzian of width
    Delta/alpha and area -pi (for alpha, Delta > 0)."""
    return controlforms.lz_theta_dot(tau, model.alpha, model.delta)


def cd_two_level_analytic(model: TwoLevelModel, tau: float) -> np.ndarray:
    """(1/2) dtheta/dtau sigma_y for the linear sweep."""
    return controlforms.lz_control_batch(np.array([float(tau)]),
                                         model.alpha, model.delta)[0]


def pi_pulse_integral(model: TwoLevelModel, tau_max: float | None = None) -> float:
    """Magnitude of the integral of dtheta/dtau.

    Over the full real line the Lorentzian pulse integrates to pi (a pi
    pulse); for a finite symmetric window [-tau_max, tau_max] the
    analytic value is 2*arctan(alpha tau_max / Delta), short of pi by
    approximately 2 Delta/(alpha tau_max).
    """
    if tau_max is None or model.delta == 0.0:
        return math.pi
    return 2.0 * math.atan(abs(model.alpha) * tau_max / model.delta)


def _require_symmetric(model: ThreeLevelModel, what: str):
    if not isinstance(model, ThreeLevelModel) or not model.is_symmetric:
        raise WrongRegime(f"{what} requires the symmetric three-level model")


def cd_eps0_analytic(model: ThreeLevelModel, tau: float) -> np.ndarray:
    """Merged-crossing limit (epsilon = 0): H1 = (dphi/dtau) Sy with
    tan(phi) = Delta/(alpha tau)."""
    _require_symmetric(model, "the merged-crossing control")
    if model.epsilon != 0.0:
        raise WrongRegime("the merged-crossing control requires epsilon = 0")
    dphi = -model.delta * model.alpha / ((model.alpha * tau) ** 2 + model.delta ** 2)
    _, sy, _ = spin1_operators()
    return dphi * sy


def cd_origin_snapshot(model: ThreeLevelModel) -> np.ndarray:
    """Exact control at tau = 0 for any separation.  Next to the
    nearest-neighbour elements it carries a corner element whose
    magnitude alpha*epsilon/Delta^2 grows linearly with epsilon."""
    _require_symmetric(model, "the central-time control snapshot")
    dphi0 = -model.alpha / model.delta
    r = _SQ2 * model.epsilon / model.delta
    mat = np.array([
        [0.0, -1.0, -r],
        [1.0, 0.0, -1.0],
        [r, 1.0, 0.0]], dtype=np.complex128)
    return (1j / _SQ2) * dphi0 * mat


def separated_matrix(model: ThreeLevelModel, tau: float) -> np.ndarray:
    """Sum of the two independent single-crossing corrections, each kept
    on its own off-diagonal; the corner elements are zero by
    construction."""
    return controlforms.sep_matrix_batch(
        np.array([float(tau)]), model.epsilon, model.alpha, model.beta,
        model.delta, model.delta_delta)[0]


def separated_single_field(model: ThreeLevelModel, tau: float) -> np.ndarray:
    """Single-field realization: (theta_L' + theta_R') Sy / sqrt(2),
    i.e. one summed profile driving both off-diagonals at once."""
    return controlforms.sep_field_batch(
        np.array([float(tau)]), model.epsilon, model.alpha, model.beta,
        model.delta, model.delta_delta)[0]


def theta_sep_dot(model: ThreeLevelModel, tau):
    """Summed separated profile theta_L' + theta_R'."""
    tau = np.asarray(tau, dtype=float)
    return (controlforms.theta_left_dot(tau, model.epsilon, model.alpha, model.delta)
            + controlforms.theta_right_dot(tau, model.epsilon, model.beta,
                                           model.delta + model.delta_delta))


def perturbative_small_delta(model: ThreeLevelModel, tau: float) -> np.ndarray:
    """Leading small-Delta profiles of the three control elements.

    The nearest-neighbour elements are first order in Delta with poles
    at omega = -eps and omega = +eps; the corner element is second
    order, reflecting that the central crossing is only indirectly
    coupled.  Valid far from the poles; evaluating exactly at
    omega in {0, +eps, -eps} raises SingularPoint.
    """
    _require_symmetric(model, "the small-coupling perturbative control")
    eps, al, de = model.epsilon, model.alpha, model.delta
    om = al * tau
    if om == 0.0 or om == eps or om == -eps:
        raise SingularPoint(
            f"perturbative control has a pole at omega(tau) = {om:g}")
    p12 = al * de / (_SQ2 * (eps + om) ** 2)
    p23 = al * de / (_SQ2 * (eps - om) ** 2)
    p13 = al * eps * (eps ** 2 - 5.0 * om ** 2) * de ** 2 / (
        4.0 * om ** 2 * (om ** 2 - eps ** 2) ** 2)
    h = np.zeros((3, 3), dtype=np.complex128)
    h[0, 1], h[1, 0] = 1j * p12, -1j * p12
    h[1, 2], h[2, 1] = 1j * p23, -1j * p23
    h[0, 2], h[2, 0] = 1j * p13, -1j * p13
    return h


def long_time_corner_coefficients(model: ThreeLevelModel) -> tuple[float, float]:
    """(c3, c4) of the corner element's tail i*(c3/tau^3 + c4/tau^4).

    The tau^-3 coefficient carries the slope asymmetry and vanishes
    identically for beta = -alpha; to lowest order in delta_alpha the
    pair is (Delta^2/(4 alpha^3) * delta_alpha, -5 eps Delta^2/(4 alpha^3)).
    """
    al, be, de, eps = model.alpha, model.beta, model.delta, model.epsilon
    c3 = (al + be) * de ** 2 / (2.0 * al * be * (al - be))
    c4 = -(2.0 * al ** 2 - al * be + 2.0 * be ** 2) * eps * de ** 2 / (
        2.0 * al ** 2 * be ** 2 * (al - be))
    return c3, c4


def perturbative_long_time(model: ThreeLevelModel, tau: float) -> np.ndarray:
    """Leading algebraic tails of the control elements at large |tau|.

    Nearest-neighbour elements decay as Delta/tau^2 (same sign); the
    corner element decays as tau^-4 with the opposite sign, plus a
    tau^-3 term proportional to the slope asymmetry.
    """
    al, be, de = model.alpha, model.beta, model.delta
    d2 = de + model.delta_delta
    t12 = de / (_SQ2 * abs(al) * tau ** 2)
    t23 = d2 / (_SQ2 * abs(be) * tau ** 2)
    c3, c4 = long_time_corner_coefficients(model)
    t13 = c3 / tau ** 3 + c4 / tau ** 4
    h = np.zeros((3, 3), dtype=np.complex128)
    h[0, 1], h[1, 0] = 1j * t12, -1j * t12
    h[1, 2], h[2, 1] = 1j * t23, -1j * t23
    h[0, 2], h[2, 0] = 1j * t13, -1j * t13
    return h


def crossover_time(model: ThreeLevelModel) -> float:
    """Time beyond which the asymmetry-induced tau^-3 corner tail
    overtakes the tau^-4 one: 5*eps/|delta_alpha| (inf when symmetric)."""
    da = abs(model.delta_alpha)
    if da == 0.0:
        return math.inf
    return 5.0 * model.epsilon / da


def control_field(model, kind, gap_tol: float = GAP_TOL) -> ControlField:
    """Build a ControlField of the requested kind for a model.

    Kinds accepted as ControlKind or its string value (the config
    vocabulary: exact | separated-matrix | separated-field | none).
    """
    kind = ControlKind(kind)
    if kind is ControlKind.NONE:
        dim = model.dim
        zero = np.zeros((dim, dim), dtype=np.complex128)
        return ControlField(kind, lambda tau: zero.copy())
    if kind is ControlKind.EXACT_CD:
        return ControlField(kind, lambda tau: cd_exact(model, tau, gap_tol))
    if kind is ControlKind.SEPARATED_MATRIX:
        return ControlField(kind, lambda tau: separated_matrix(model, tau))
    if kind is ControlKind.SEPARATED_FIELD:
        return ControlField(kind, lambda tau: separated_single_field(model, tau))
    if kind is ControlKind.PERTURBATIVE_SMALL_DELTA:
        return ControlField(kind, lambda tau: perturbative_small_delta(model, tau))
    if kind is ControlKind.PERTURBATIVE_LONG_TIME:
        return ControlField(kind, lambda tau: perturbative_long_time(model, tau))
    raise ValueError(f"unhandled control kind {kind}")
