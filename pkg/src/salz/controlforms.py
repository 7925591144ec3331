"""Closed-form control profiles shared by the kernel backends.

Control kinds are encoded as small integers so they can cross the numba
boundary.  The batch evaluators here are the numpy-vectorized versions;
the numba backend re-implements the same scalar formulas inside its
jitted loops.
"""

import math

import numpy as np

CTRL_NONE = 0
CTRL_EXACT_CD = 1
CTRL_SEP_MATRIX = 2
CTRL_SEP_FIELD = 3
CTRL_LZ_ANALYTIC = 4

_SQ2 = math.sqrt(2.0)


def theta_left_dot(taus, eps, alpha, delta):
    """d/dtau of the mixing angle of the upper-left 2x2 block,
    tan(theta_L) = sqrt(2) Delta / (alpha tau + eps)."""
    return -_SQ2 * delta * alpha / ((alpha * taus + eps) ** 2 + 2.0 * delta ** 2)


def theta_right_dot(taus, eps, beta, delta):
    """d/dtau of the mixing angle of the lower-right 2x2 block,
    tan(theta_R) = sqrt(2) Delta' / (-(beta tau + eps))."""
    return _SQ2 * delta * beta / ((beta * taus + eps) ** 2 + 2.0 * delta ** 2)


def sep_matrix_batch(taus, eps, alpha, beta, delta, ddelta):
    """Separated control: sum of the two single-crossing corrections,
    kept on their own off-diagonals (zero corner elements)."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    dl = theta_left_dot(taus, eps, alpha, delta)
    dr = theta_right_dot(taus, eps, beta, delta + ddelta)
    h = np.zeros((taus.size, 3, 3), dtype=np.complex128)
    h[:, 0, 1] = -0.5j * dl
    h[:, 1, 0] = 0.5j * dl
    h[:, 1, 2] = -0.5j * dr
    h[:, 2, 1] = 0.5j * dr
    return h


def sep_field_batch(taus, eps, alpha, beta, delta, ddelta):
    """Separated control realized by a single field with the summed
    profile: (theta_L' + theta_R') Sy / sqrt(2)."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    prof = theta_left_dot(taus, eps, alpha, delta) + theta_right_dot(
        taus, eps, beta, delta + ddelta)
    amp = prof / 2.0  # (prof/sqrt(2)) * the 1/sqrt(2) entries of Sy
    h = np.zeros((taus.size, 3, 3), dtype=np.complex128)
    h[:, 0, 1] = -1j * amp
    h[:, 1, 0] = 1j * amp
    h[:, 1, 2] = -1j * amp
    h[:, 2, 1] = 1j * amp
    return h


def lz_theta_dot(taus, alpha, delta):
    """Lorentzian pulse of the two-level linear sweep,
    d(theta)/dtau = -(Delta/alpha) / (tau^2 + (Delta/alpha)^2)."""
    taus = np.asarray(taus, dtype=float)
    return -delta * alpha / ((alpha * taus) ** 2 + delta ** 2)


def lz_control_batch(taus, alpha, delta):
    """Two-level analytic control (1/2) theta' sigma_y."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    amp = 0.5 * lz_theta_dot(taus, alpha, delta)
    h = np.zeros((taus.size, 2, 2), dtype=np.complex128)
    h[:, 0, 1] = -1j * amp
    h[:, 1, 0] = 1j * amp
    return h
