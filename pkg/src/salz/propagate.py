"""Norm-preserving Schrodinger propagation and observable extraction.

The integrator takes one step of size h as two unitary exponentials of
Gauss-node-averaged Hamiltonians (fourth-order commutator-free Magnus;
see _cf4).  Every factor is exactly unitary for Hermitian input, so the
state norm is never renormalized: drift beyond tolerance raises
NormDrift instead of being papered over.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .control import GAP_TOL, ControlField, ControlKind, control_field
from .controlforms import (
    CTRL_EXACT_CD,
    CTRL_LZ_ANALYTIC,
    CTRL_NONE,
    CTRL_SEP_FIELD,
    CTRL_SEP_MATRIX,
    lz_control_batch,
    sep_field_batch,
    sep_matrix_batch,
)
from .errors import DegenerateSpectrum, EmptyWindow, NormDrift, StepTooLarge
from .models import ThreeLevelModel

NORM_TOL = 1e-10
STABILITY_BOUND = 0.1      # required: step * max||H|| <= 0.1
MAX_RECORD_POINTS = 200_000


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of one propagation on a uniform tau grid."""

    taus: np.ndarray           # (n,), strictly increasing, uniform
    states: np.ndarray         # (n, dim) complex
    model: object
    control: str               # ControlKind value used
    step: float                # integrator step actually used

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def to_csv(self, path):
        cols = ["tau"]
        for k in range(self.dim):
            cols += [f"re_c{k + 1}", f"im_c{k + 1}"]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for t, st in zip(self.taus, self.states):
                row = [repr(float(t))]
                for c in st:
                    row += [repr(float(c.real)), repr(float(c.imag))]
                fh.write(",".join(row) + "\n")


@dataclass(frozen=True)
class ObservableSeries:
    """A real observable sampled on the trajectory grid."""

    taus: np.ndarray
    values: np.ndarray
    label: str = ""

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("tau,value\n")
            for t, x in zip(self.taus, self.values):
                fh.write(f"{repr(float(t))},{repr(float(x))}\n")


def default_window(model) -> tuple[float, float]:
    """Symmetric window covering the crossings at +-eps/alpha plus a
    tail long enough that the residual 1/tau transient biases tail
    averages by well under a percent."""
    eps = getattr(model, "epsilon", 0.0)
    a = abs(model.alpha)
    half = eps / a + 50.0 / a * max(1.0, model.delta)
    return -half, half


def _as_field(model, control) -> ControlField | None:
    if control is None or isinstance(control, ControlField):
        return control
    return control_field(model, control)


def _ctrl_code(model, control: ControlField | None):
    if control is None or control.kind is ControlKind.NONE:
        return CTRL_NONE, np.zeros(5)
    kind = control.kind
    if kind is ControlKind.EXACT_CD:
        return CTRL_EXACT_CD, np.zeros(5)
    if kind in (ControlKind.SEPARATED_MATRIX, ControlKind.SEPARATED_FIELD):
        if not isinstance(model, ThreeLevelModel):
            raise ValueError("separated controls apply to the three-level model")
        cp = np.array([model.epsilon, model.alpha, model.beta, model.delta,
                       model.delta_delta])
        code = (CTRL_SEP_MATRIX if kind is ControlKind.SEPARATED_MATRIX
                else CTRL_SEP_FIELD)
        return code, cp
    raise ValueError(
        f"control kind {kind.value!r} is a tail evaluator and is not propagated")


def _control_sample(taus, b0, b1, ctrl_code, cp, gap_tol):
    if ctrl_code == CTRL_NONE:
        return 0.0
    if ctrl_code == CTRL_EXACT_CD:
        out, min_gap = kernels.cd_grid(b0, b1, taus, gap_tol)
        return out if min_gap > gap_tol else 0.0
    if ctrl_code == CTRL_SEP_MATRIX:
        return sep_matrix_batch(taus, *cp[:5])
    if ctrl_code == CTRL_SEP_FIELD:
        return sep_field_batch(taus, *cp[:5])
    if ctrl_code == CTRL_LZ_ANALYTIC:
        return lz_control_batch(taus, cp[0], cp[1])
    return 0.0


def _sample_hmax(b0, b1, cmat, smat, nu, ctrl_code, cp, t0, t1, gap_tol, n=257):
    """max spectral norm of the full Hamiltonian over a sampled window;
    crossing centers are added to the sample so control peaks are seen."""
    taus = np.linspace(t0, t1, n)
    extras = [x for x in (0.0,) if t0 < x < t1]
    if ctrl_code in (CTRL_SEP_MATRIX, CTRL_SEP_FIELD) and cp[1] != 0.0 and cp[2] != 0.0:
        extras += [x for x in (-cp[0] / cp[1], -cp[0] / cp[2]) if t0 < x < t1]
    if extras:
        taus = np.concatenate([taus, extras])
    taus = np.ascontiguousarray(taus)
    hs = b0[None] + taus[:, None, None] * b1[None]
    if nu != 0.0:
        hs = hs + np.cos(nu * taus)[:, None, None] * cmat[None]
        hs = hs + np.sin(nu * taus)[:, None, None] * smat[None]
    hs = hs + _control_sample(taus, b0, b1, ctrl_code, cp, gap_tol)
    w = np.linalg.eigvalsh(hs)
    return float(np.abs(w).max())


def default_step(model, window: tuple[float, float] | None = None,
                 central_gap: bool = True) -> float:
    """Step resolving both the Lorentzian pulse width Delta/alpha and the
    narrow central crossing (effective gap ~ Delta^2/eps), clamped so the
    stability bound step * max||H0|| <= 0.1 holds over the window.

    central_gap=False drops the effective-gap term; appropriate when the
    driven state passes only the direct crossings (the narrow central
    anticrossing sits between the two upper levels)."""
    eps = getattr(model, "epsilon", 0.0)
    a = abs(model.alpha)
    if central_gap:
        step = 0.01 * min(1.0, model.delta / a, model.delta ** 2 / (a * eps + a))
    else:
        step = 0.01 * min(1.0, model.delta / a)
    if window is None:
        window = default_window(model)
    b0, b1 = model.sweep_matrices()
    zero = np.zeros_like(b0)
    hmax = _sample_hmax(b0, b1, zero, zero, 0.0, CTRL_NONE, np.zeros(5),
                        window[0], window[1], GAP_TOL)
    if hmax > 0.0:
        step = min(step, 0.99 * STABILITY_BOUND / hmax)
    return step


def ground_state(model, tau: float, state_index: int = 0) -> np.ndarray:
    """Gauge-fixed instantaneous eigenstate (ground by default)."""
    b0, b1 = model.sweep_matrices()
    _, v = kernels.eigh_grid((b0 + tau * b1)[None])
    return np.ascontiguousarray(v[0][:, state_index])


def evolve_matrices(b0, b1, psi0, tau_start, tau_end, step, *,
                    cmat=None, smat=None, nu=0.0,
                    ctrl_code=CTRL_NONE, ctrl_params=None,
                    record_stride=None, gap_tol=GAP_TOL, check_step=True):
    """Low-level propagation of H(tau) = b0 + tau b1 + cos(nu tau) cmat
    + sin(nu tau) smat + control.  Returns (taus, states, step_used).

    The step count is rounded so the recorded grid stays uniform and
    ends exactly at tau_end.
    """
    b0 = np.ascontiguousarray(b0, dtype=np.complex128)
    b1 = np.ascontiguousarray(b1, dtype=np.complex128)
    d = b0.shape[0]
    zero = np.zeros((d, d), dtype=np.complex128)
    cmat = zero if cmat is None else np.ascontiguousarray(cmat, dtype=np.complex128)
    smat = zero if smat is None else np.ascontiguousarray(smat, dtype=np.complex128)
    cp = np.zeros(5) if ctrl_params is None else np.asarray(ctrl_params, dtype=np.float64)
    if ctrl_code == CTRL_EXACT_CD and nu != 0.0:
        raise ValueError("exact-CD control supports only linear-in-tau Hamiltonians")
    if not tau_end > tau_start:
        raise ValueError("tau_start must be smaller than tau_end")
    if step <= 0.0:
        raise ValueError("step must be positive")
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"initial state norm {nrm!r} is not 1 within 1e-12")
    if check_step:
        hmax = _sample_hmax(b0, b1, cmat, smat, nu, ctrl_code, cp,
                            tau_start, tau_end, gap_tol)
        if step * hmax > STABILITY_BOUND:
            raise StepTooLarge(
                f"step {step:g} * max||H|| {hmax:g} = {step * hmax:g} exceeds "
                f"{STABILITY_BOUND}")
    nsteps = max(1, int(math.ceil((tau_end - tau_start) / step - 1e-12)))
    if record_stride is None:
        record_stride = -(-nsteps // MAX_RECORD_POINTS)
    stride = max(1, min(int(record_stride), nsteps))
    nsteps = stride * (-(-nsteps // stride))  # round up to a stride multiple
    dt = (tau_end - tau_start) / nsteps
    states, max_dev, status = kernels.evolve_kernel(
        b0, b1, cmat, smat, nu, int(ctrl_code), cp, psi0,
        float(tau_start), dt, nsteps, stride, gap_tol)
    if status != 0:
        raise DegenerateSpectrum(
            "exact-CD control hit a nearly degenerate spectrum during propagation")
    if max_dev > NORM_TOL:
        raise NormDrift(
            f"state norm drifted by {max_dev:.3e} (> {NORM_TOL:.1e}); "
            f"no renormalization is applied")
    taus = tau_start + dt * stride * np.arange(states.shape[0])
    return taus, states, dt


def evolve(model, control: ControlField | str | None = None,
           psi0: np.ndarray | None = None,
           tau_start: float | None = None, tau_end: float | None = None,
           step: float | None = None, record_stride: int | None = None,
           gap_tol: float = GAP_TOL) -> Trajectory:
    """Propagate a model (optionally with a control field) and record
    the state on a uniform grid.

    Defaults: window from default_window, step from default_step, the
    initial state is the instantaneous ground state at tau_start.
    """
    control = _as_field(model, control)
    if tau_start is None or tau_end is None:
        lo, hi = default_window(model)
        tau_start = lo if tau_start is None else tau_start
        tau_end = hi if tau_end is None else tau_end
    if step is None:
        step = default_step(model, (tau_start, tau_end))
    if psi0 is None:
        psi0 = ground_state(model, tau_start)
    ctrl_code, cp = _ctrl_code(model, control)
    b0, b1 = model.sweep_matrices()
    taus, states, dt = evolve_matrices(
        b0, b1, psi0, tau_start, tau_end, step,
        ctrl_code=ctrl_code, ctrl_params=cp,
        record_stride=record_stride, gap_tol=gap_tol)
    kind = ControlKind.NONE if control is None else control.kind
    return Trajectory(taus=taus, states=states, model=model,
                      control=kind.value, step=dt)


def propagate_final(model, control, psi0, tau_start, tau_end, step,
                    gap_tol: float = GAP_TOL) -> np.ndarray:
    """Final state only, in either time direction.  A backward run is
    mapped to a forward one via s = -tau, H'(s) = -H(-s)."""
    ctrl_code, cp = _ctrl_code(model, _as_field(model, control))
    b0, b1 = model.sweep_matrices()
    if tau_end > tau_start:
        _, states, _ = evolve_matrices(
            b0, b1, psi0, tau_start, tau_end, step,
            ctrl_code=ctrl_code, ctrl_params=cp,
            record_stride=10 ** 9, gap_tol=gap_tol)
        return states[-1]
    if ctrl_code != CTRL_NONE:
        raise ValueError("backward propagation supports only the bare model")
    _, states, _ = evolve_matrices(
        -b0, b1, psi0, -tau_start, -tau_end, step,
        record_stride=10 ** 9, gap_tol=gap_tol)
    return states[-1]


def nonadiabaticity(traj: Trajectory, state_index: int = 0) -> ObservableSeries:
    """Deviation from one of the overlap with the tracked instantaneous
    eigenstate: P(tau) = 1 - |<Psi(tau)|psi_k(tau)>| (ground state by
    default).  Clamped at zero: rounding can push the overlap a few
    1e-16 past one, and the series is a probability."""
    b0, b1 = traj.model.sweep_matrices()
    taus = np.ascontiguousarray(traj.taus, dtype=np.float64)
    states = np.ascontiguousarray(traj.states, dtype=np.complex128)
    p = kernels.overlap_deficit_kernel(b0, b1, taus, states, int(state_index))
    return ObservableSeries(taus=traj.taus, values=np.maximum(p, 0.0),
                            label="nonadiabaticity")


def diabatic_populations(traj: Trajectory) -> tuple[ObservableSeries, ...]:
    """|<k|Psi(tau)>|^2 for each diabatic basis state k; they sum to one
    pointwise because the propagation is unitary."""
    pops = np.abs(traj.states) ** 2
    return tuple(
        ObservableSeries(taus=traj.taus, values=pops[:, k],
                         label=f"population_{k + 1}")
        for k in range(traj.dim))


def asymptotic_value(series: ObservableSeries, fraction: float = 0.1) -> float:
    """Mean over the final `fraction` of the grid; damps the residual
    Landau-Zener/Stueckelberg oscillations of the transient."""
    n = len(series.values)
    if n == 0:
        raise EmptyWindow("series is empty")
    if not 0.0 < fraction <= 0.5:
        raise EmptyWindow(f"fraction must be in (0, 0.5], got {fraction!r}")
    k = max(1, int(round(n * fraction)))
    return float(np.mean(series.values[-k:]))
