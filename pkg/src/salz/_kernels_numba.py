"""Numba kernel backend.

Hot loops for the package: small Hermitian eigensolves (cyclic Jacobi
with complex rotations, dim <= 3), exact-CD control assembly on a grid,
the CF4 propagation loop, and instantaneous-eigenstate overlap series.

Shared contract with ``_kernels_numpy``:

- ``eigh_grid(hs)``            -> (w, v): ascending eigenvalues, gauge-fixed columns
- ``cd_grid(b0, b1, taus, gap_tol)`` -> (matrices, min_relative_gap)
- ``evolve_kernel(...)``       -> (recorded states, max_norm_dev, status)
- ``overlap_deficit_kernel(...)`` -> 1 - |<psi|v_k>| per grid point

Eigenvectors are unique up to phase away from degeneracies, so after
gauge fixing both backends agree to rounding.
"""

import math

import numpy as np
from numba import njit

from ._cf4 import CF4_A1, CF4_A2, CF4_C1, CF4_C2
from .controlforms import (
    CTRL_EXACT_CD,
    CTRL_LZ_ANALYTIC,
    CTRL_NONE,
    CTRL_SEP_FIELD,
    CTRL_SEP_MATRIX,
)

_SQ2 = math.sqrt(2.0)
_TINY = np.finfo(np.float64).tiny


@njit(cache=True, nogil=True)
def _jacobi_raw(a, w, v):
    """Diagonalize Hermitian a in place by cyclic complex Jacobi
    rotations; eigenvalues land in w (unsorted), eigenvectors in the
    columns of v.  Deterministic: fixed sweep order, exact float
    thresholds."""
    d = a.shape[0]
    for i in range(d):
        for j in range(d):
            v[i, j] = 1.0 + 0.0j if i == j else 0.0j
    fro2 = 0.0
    for i in range(d):
        for j in range(d):
            x = a[i, j]
            fro2 += x.real * x.real + x.imag * x.imag
    tol2 = 1e-28 * fro2
    for _ in range(60):
        off2 = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                x = a[p, q]
                off2 += 2.0 * (x.real * x.real + x.imag * x.imag)
        if off2 <= tol2:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tv = (aqq - app) / (2.0 * r)
                if tv >= 0.0:
                    t = 1.0 / (tv + math.sqrt(1.0 + tv * tv))
                else:
                    t = -1.0 / (-tv + math.sqrt(1.0 + tv * tv))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                gpp = phase * c
                gpq = phase * s
                # A <- G^H A G with G = I except the (p,q) block
                # [[e^{i phi} c, e^{i phi} s], [-s, c]]
                for i in range(d):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = aip * gpp - aiq * s
                    a[i, q] = aip * gpq + aiq * c
                for j in range(d):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = np.conj(gpp) * apj - s * aqj
                    a[q, j] = np.conj(gpq) * apj + c * aqj
                a[p, q] = 0.0j
                a[q, p] = 0.0j
                for i in range(d):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip * gpp - viq * s
                    v[i, q] = vip * gpq + viq * c
    for i in range(d):
        w[i] = a[i, i].real


@njit(cache=True, nogil=True)
def _sort_ascending(w, v):
    d = w.shape[0]
    for i in range(d - 1):
        k = i
        for j in range(i + 1, d):
            if w[j] < w[k]:
                k = j
        if k != i:
            tmp = w[i]
            w[i] = w[k]
            w[k] = tmp
            for r in range(d):
                tc = v[r, i]
                v[r, i] = v[r, k]
                v[r, k] = tc


@njit(cache=True, nogil=True)
def _gauge_fix(v):
    # largest-magnitude entry of each column made real positive
    d = v.shape[0]
    for k in range(d):
        best = -1.0
        bi = 0
        for i in range(d):
            m = v[i, k].real * v[i, k].real + v[i, k].imag * v[i, k].imag
            if m > best:
                best = m
                bi = i
        lead = v[bi, k]
        ph = np.conj(lead) / abs(lead)
        for i in range(d):
            v[i, k] = v[i, k] * ph


@njit(cache=True, nogil=True)
def _rel_gap(w):
    d = w.shape[0]
    lo = w[0]
    hi = w[0]
    for i in range(1, d):
        if w[i] < lo:
            lo = w[i]
        if w[i] > hi:
            hi = w[i]
    ming = np.inf
    for i in range(d - 1):
        for j in range(i + 1, d):
            g = abs(w[i] - w[j])
            if g < ming:
                ming = g
    rng = hi - lo
    if rng < _TINY:
        rng = _TINY
    return ming / rng


@njit(cache=True, nogil=True)
def _cd_from_frame(w, v, dh, out, tmp):
    # out = i sum_{m != n} |v_m><v_m| dh |v_n><v_n| / (w_n - w_m)
    d = w.shape[0]
    for m in range(d):
        for n in range(d):
            acc = 0.0j
            for i in range(d):
                for j in range(d):
                    acc += np.conj(v[i, m]) * dh[i, j] * v[j, n]
            tmp[m, n] = acc
    for m in range(d):
        for n in range(d):
            if m == n:
                tmp[m, n] = 0.0j
            else:
                tmp[m, n] = 1j * tmp[m, n] / (w[n] - w[m])
    for i in range(d):
        for l in range(d):
            acc = 0.0j
            for m in range(d):
                for n in range(d):
                    acc += v[i, m] * tmp[m, n] * np.conj(v[l, n])
            out[i, l] = acc


@njit(cache=True, nogil=True)
def eigh_grid(hs):
    n, d, _ = hs.shape
    ws = np.empty((n, d), np.float64)
    vs = np.empty((n, d, d), np.complex128)
    a = np.empty((d, d), np.complex128)
    for k in range(n):
        for i in range(d):
            for j in range(d):
                a[i, j] = hs[k, i, j]
        _jacobi_raw(a, ws[k], vs[k])
        _sort_ascending(ws[k], vs[k])
        _gauge_fix(vs[k])
    return ws, vs


@njit(cache=True, nogil=True)
def cd_grid(b0, b1, taus, gap_tol):
    n = taus.shape[0]
    d = b0.shape[0]
    out = np.empty((n, d, d), np.complex128)
    a = np.empty((d, d), np.complex128)
    w = np.empty(d, np.float64)
    v = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    min_gap = np.inf
    for k in range(n):
        for i in range(d):
            for j in range(d):
                a[i, j] = b0[i, j] + taus[k] * b1[i, j]
        _jacobi_raw(a, w, v)
        g = _rel_gap(w)
        if g < min_gap:
            min_gap = g
        if g <= gap_tol:
            return out, min_gap
        _cd_from_frame(w, v, b1, out[k], tmp)
    return out, min_gap


@njit(cache=True, nogil=True)
def _add_h0(t, b0, b1, cmat, smat, nu, out):
    d = b0.shape[0]
    for i in range(d):
        for j in range(d):
            out[i, j] = b0[i, j] + t * b1[i, j]
    if nu != 0.0:
        cc = math.cos(nu * t)
        sn = math.sin(nu * t)
        for i in range(d):
            for j in range(d):
                out[i, j] += cc * cmat[i, j] + sn * smat[i, j]


@njit(cache=True, nogil=True)
def _add_control(t, b0, b1, ctrl_kind, cp, gap_tol, out, a, w, v, tmp, cd):
    """Add the selected control field to out; returns False when an
    exact-CD construction hits a degenerate spectrum."""
    d = b0.shape[0]
    if ctrl_kind == CTRL_NONE:
        return True
    if ctrl_kind == CTRL_EXACT_CD:
        for i in range(d):
            for j in range(d):
                a[i, j] = b0[i, j] + t * b1[i, j]
        _jacobi_raw(a, w, v)
        if _rel_gap(w) <= gap_tol:
            return False
        _cd_from_frame(w, v, b1, cd, tmp)
        for i in range(d):
            for j in range(d):
                out[i, j] += cd[i, j]
        return True
    if ctrl_kind == CTRL_SEP_MATRIX or ctrl_kind == CTRL_SEP_FIELD:
        eps = cp[0]
        al = cp[1]
        be = cp[2]
        de = cp[3]
        d2 = de + cp[4]
        dl = -_SQ2 * de * al / ((al * t + eps) ** 2 + 2.0 * de * de)
        dr = _SQ2 * d2 * be / ((be * t + eps) ** 2 + 2.0 * d2 * d2)
        if ctrl_kind == CTRL_SEP_MATRIX:
            out[0, 1] += -0.5j * dl
            out[1, 0] += 0.5j * dl
            out[1, 2] += -0.5j * dr
            out[2, 1] += 0.5j * dr
        else:
            amp = 0.5 * (dl + dr)
            out[0, 1] += -1j * amp
            out[1, 0] += 1j * amp
            out[1, 2] += -1j * amp
            out[2, 1] += 1j * amp
        return True
    if ctrl_kind == CTRL_LZ_ANALYTIC:
        al = cp[0]
        de = cp[1]
        amp = -0.5 * de * al / ((al * t) ** 2 + de * de)
        out[0, 1] += -1j * amp
        out[1, 0] += 1j * amp
        return True
    return True


@njit(cache=True, nogil=True)
def _apply_exp(h, dt, psi, w, v, y, g, u):
    """psi <- exp(-i dt h) psi; h is destroyed.

    The unitary is materialized and Newton-polished (U <- U(3I-U^H U)/2)
    before application: rounding leaves U^H U - I biased at ~1e-16,
    which would otherwise accumulate into secular norm drift over ~1e6
    steps."""
    d = h.shape[0]
    _jacobi_raw(h, w, v)
    for m in range(d):
        ph = dt * w[m]
        y[m] = complex(math.cos(ph), -math.sin(ph))
    for i in range(d):
        for j in range(d):
            acc = 0.0j
            for m in range(d):
                acc += v[i, m] * y[m] * np.conj(v[j, m])
            u[i, j] = acc
    for i in range(d):
        for j in range(d):
            acc = 0.0j
            for m in range(d):
                acc += np.conj(u[m, i]) * u[m, j]
            g[i, j] = -0.5 * acc
        g[i, i] += 1.5
    for i in range(d):
        for j in range(d):
            acc = 0.0j
            for m in range(d):
                acc += u[i, m] * g[m, j]
            v[i, j] = acc          # v reused as the polished unitary
    for i in range(d):
        acc = 0.0j
        for m in range(d):
            acc += v[i, m] * psi[m]
        y[i] = acc
    for i in range(d):
        psi[i] = y[i]


@njit(cache=True, nogil=True)
def evolve_kernel(b0, b1, cmat, smat, nu, ctrl_kind, cp, psi0, t0, dt,
                  nsteps, stride, gap_tol):
    """CF4 propagation; see _kernels_numpy.evolve_kernel for the
    contract.  The norm deviation is tracked at every step."""
    d = b0.shape[0]
    nrec = nsteps // stride + 1
    states = np.empty((nrec, d), np.complex128)
    psi = psi0.astype(np.complex128).copy()
    ha = np.empty((d, d), np.complex128)
    hb = np.empty((d, d), np.complex128)
    heff = np.empty((d, d), np.complex128)
    a = np.empty((d, d), np.complex128)
    w = np.empty(d, np.float64)
    v = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    cd = np.empty((d, d), np.complex128)
    y = np.empty(d, np.complex128)
    g = np.empty((d, d), np.complex128)
    u = np.empty((d, d), np.complex128)
    max_dev = 0.0
    for step in range(nsteps):
        t = t0 + step * dt
        if step % stride == 0:
            states[step // stride] = psi
        ta = t + CF4_C1 * dt
        tb = t + CF4_C2 * dt
        _add_h0(ta, b0, b1, cmat, smat, nu, ha)
        if not _add_control(ta, b0, b1, ctrl_kind, cp, gap_tol, ha, a, w, v, tmp, cd):
            return states, max_dev, 1
        _add_h0(tb, b0, b1, cmat, smat, nu, hb)
        if not _add_control(tb, b0, b1, ctrl_kind, cp, gap_tol, hb, a, w, v, tmp, cd):
            return states, max_dev, 1
        for i in range(d):
            for j in range(d):
                heff[i, j] = CF4_A2 * ha[i, j] + CF4_A1 * hb[i, j]
        _apply_exp(heff, dt, psi, w, v, y, g, u)
        for i in range(d):
            for j in range(d):
                heff[i, j] = CF4_A1 * ha[i, j] + CF4_A2 * hb[i, j]
        _apply_exp(heff, dt, psi, w, v, y, g, u)
        nrm2 = 0.0
        for i in range(d):
            nrm2 += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
        dev = abs(math.sqrt(nrm2) - 1.0)
        if dev > max_dev:
            max_dev = dev
    states[nsteps // stride] = psi
    return states, max_dev, 0


@njit(cache=True, nogil=True)
def overlap_deficit_kernel(b0, b1, taus, states, state_index):
    n = taus.shape[0]
    d = b0.shape[0]
    out = np.empty(n, np.float64)
    a = np.empty((d, d), np.complex128)
    w = np.empty(d, np.float64)
    v = np.empty((d, d), np.complex128)
    for k in range(n):
        for i in range(d):
            for j in range(d):
                a[i, j] = b0[i, j] + taus[k] * b1[i, j]
        _jacobi_raw(a, w, v)
        _sort_ascending(w, v)
        acc = 0.0j
        for i in range(d):
            acc += np.conj(states[k, i]) * v[i, state_index]
        out[k] = 1.0 - abs(acc)
    return out
