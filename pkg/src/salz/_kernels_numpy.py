"""Pure-numpy kernel backend.

Same contract as ``_kernels_numba``: see that module for the shared
semantics.  Batched LAPACK calls (``np.linalg.eigh`` on stacked 2x2/3x3
matrices) replace the hand-rolled Jacobi loops; the sequential state
update in ``evolve_kernel`` remains a Python loop, which is why this
path is the slow one.
"""

import numpy as np

from ._cf4 import CF4_A1, CF4_A2, CF4_C1, CF4_C2
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

_TINY = np.finfo(float).tiny


def gauge_fix(v):
    """Rotate each eigenvector column so its largest-magnitude entry is
    real and positive (first index wins ties)."""
    mag = np.abs(v) ** 2
    idx = mag.argmax(axis=-2)
    lead = np.take_along_axis(v, idx[..., None, :], axis=-2)[..., 0, :]
    phase = lead / np.abs(lead)
    return v * phase.conj()[..., None, :]


def eigh_grid(hs):
    """Eigendecompose a stack of Hermitian matrices.

    Returns ascending eigenvalues and gauge-fixed eigenvector columns.
    """
    w, v = np.linalg.eigh(hs)
    return w, gauge_fix(v)


def _rel_gaps(w):
    gaps = np.diff(w, axis=-1).min(axis=-1)
    rng = w[..., -1] - w[..., 0]
    return gaps / np.maximum(rng, _TINY)


def _cd_from_h(hs, dh):
    """Counterdiabatic matrices for a stack of Hamiltonians with a
    common (constant) time derivative ``dh``.  Also returns the smallest
    relative spectral gap encountered."""
    w, v = np.linalg.eigh(hs)
    vh = v.conj().swapaxes(-1, -2)
    m = vh @ dh @ v
    den = w[..., None, :] - w[..., :, None]
    ii = np.arange(hs.shape[-1])
    den[..., ii, ii] = 1.0
    # a degenerate gap divides to inf/nan here; the caller discards the
    # result and raises once it sees the relative gap
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 1j * m / den
    k[..., ii, ii] = 0.0
    out = v @ k @ vh
    return out, float(_rel_gaps(w).min())


def cd_grid(b0, b1, taus, gap_tol):
    """Exact CD control matrices of H0(tau) = b0 + tau*b1 on a grid.

    Returns (matrices, min_relative_gap); the caller decides whether the
    gap violates ``gap_tol``.
    """
    hs = b0[None] + taus[:, None, None] * b1[None]
    return _cd_from_h(hs, b1)


def _control_batch(taus, b0, b1, ctrl_kind, cp):
    if ctrl_kind == CTRL_NONE:
        return 0.0, 1.0
    if ctrl_kind == CTRL_EXACT_CD:
        hs = b0[None] + taus[:, None, None] * b1[None]
        return _cd_from_h(hs, b1)
    if ctrl_kind == CTRL_SEP_MATRIX:
        return sep_matrix_batch(taus, *cp[:5]), 1.0
    if ctrl_kind == CTRL_SEP_FIELD:
        return sep_field_batch(taus, *cp[:5]), 1.0
    if ctrl_kind == CTRL_LZ_ANALYTIC:
        return lz_control_batch(taus, cp[0], cp[1]), 1.0
    raise ValueError(f"unknown control kind {ctrl_kind}")


def _h_batch(taus, b0, b1, cmat, smat, nu, ctrl_kind, cp):
    h = b0[None] + taus[:, None, None] * b1[None]
    if nu != 0.0:
        h = h + np.cos(nu * taus)[:, None, None] * cmat[None]
        h = h + np.sin(nu * taus)[:, None, None] * smat[None]
    ctrl, min_gap = _control_batch(taus, b0, b1, ctrl_kind, cp)
    return h + ctrl, min_gap


def _unitaries(hs, dt):
    w, v = np.linalg.eigh(hs)
    phase = np.exp(-1j * dt * w)
    u = np.einsum("nij,nj,nkj->nik", v, phase, v.conj())
    # Newton polish U <- U(3I - U^H U)/2: rounding leaves U^H U - I
    # biased at ~1e-16, which would otherwise accumulate into secular
    # norm drift over ~1e6 steps
    g = np.einsum("nji,njk->nik", u.conj(), u)
    return u @ (1.5 * np.eye(hs.shape[-1]) - 0.5 * g)


def evolve_kernel(b0, b1, cmat, smat, nu, ctrl_kind, cp, psi0, t0, dt,
                  nsteps, stride, gap_tol, chunk=8192):
    """Propagate i dpsi/dtau = H(tau) psi with the two-exponential
    fourth-order commutator-free Magnus step.

    Records the state every ``stride`` steps (nsteps must be a multiple
    of stride).  Returns (states, max_norm_deviation, status) with
    status 0 on success, 1 if the CD construction hit a degenerate
    spectrum.
    """
    d = b0.shape[0]
    nrec = nsteps // stride + 1
    states = np.empty((nrec, d), dtype=np.complex128)
    psi = psi0.astype(np.complex128).copy()
    max_dev = 0.0
    pos = 0
    while pos < nsteps:
        m = min(chunk, nsteps - pos)
        tn = t0 + (pos + np.arange(m)) * dt
        ha, g1 = _h_batch(tn + CF4_C1 * dt, b0, b1, cmat, smat, nu, ctrl_kind, cp)
        hb, g2 = _h_batch(tn + CF4_C2 * dt, b0, b1, cmat, smat, nu, ctrl_kind, cp)
        if min(g1, g2) <= gap_tol:
            return states, max_dev, 1
        u_first = _unitaries(CF4_A2 * ha + CF4_A1 * hb, dt)
        u_second = _unitaries(CF4_A1 * ha + CF4_A2 * hb, dt)
        u = u_second @ u_first
        for k in range(m):
            j = pos + k
            if j % stride == 0:
                states[j // stride] = psi
            psi = u[k] @ psi
            dev = abs(np.sqrt((psi.real ** 2 + psi.imag ** 2).sum()) - 1.0)
            if dev > max_dev:
                max_dev = dev
        pos += m
    states[nsteps // stride] = psi
    return states, max_dev, 0


def overlap_deficit_kernel(b0, b1, taus, states, state_index):
    """1 - |<state | instantaneous eigenvector state_index>| per grid point."""
    hs = b0[None] + taus[:, None, None] * b1[None]
    w, v = np.linalg.eigh(hs)
    vk = v[:, :, state_index]
    overlap = np.abs(np.einsum("ni,ni->n", states.conj(), vk))
    return 1.0 - overlap
