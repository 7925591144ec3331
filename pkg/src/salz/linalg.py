"""Small complex-matrix algebra: operator constructors and a Hermitian
eigensolver with deterministic ordering and gauge fixing.

Matrices are plain ``numpy.ndarray`` of complex128, shape (2,2) or
(3,3), in dimensionless energy units.  Eigenvalues are always ascending
and each eigenvector's largest-magnitude entry is rotated to be real
and positive, so identical inputs give bitwise-identical frames.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotHermitian

HERMITICITY_RTOL = 1e-12


def pauli_operators():
    """The 2x2 Pauli matrices (sigma_x, sigma_y, sigma_z)."""
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return sx, sy, sz


def spin1_operators():
    """Spin-1 operators (Sx, Sy, Sz) in the Sz eigenbasis ordered
    m = +1, 0, -1; they satisfy [Sx, Sy] = i Sz."""
    s = 1.0 / np.sqrt(2.0)
    sx = np.array([[0, s, 0], [s, 0, s], [0, s, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j * s, 0], [1j * s, 0, -1j * s], [0, 1j * s, 0]],
                  dtype=np.complex128)
    sz = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
    return sx, sy, sz


def hermiticity_defect(h) -> float:
    """max|H - H^dagger| relative to max|H| (0 for the zero matrix)."""
    h = np.asarray(h)
    scale = np.abs(h).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(h - h.conj().T).max() / scale)


def require_hermitian(h, rtol: float = HERMITICITY_RTOL):
    defect = hermiticity_defect(h)
    if defect >= rtol:
        raise NotHermitian(
            f"matrix is not Hermitian: relative defect {defect:.3e} >= {rtol:.1e}")


@dataclass(frozen=True)
class EigenFrame:
    """Instantaneous eigensystem at one time.

    eigenvalues: ascending, real.
    eigenvectors: orthonormal columns, gauge fixed (largest-magnitude
    entry real positive).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    tau: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def residual(self, h) -> float:
        """max_n ||H v_n - w_n v_n||."""
        hv = np.asarray(h) @ self.eigenvectors
        wv = self.eigenvectors * self.eigenvalues[None, :]
        return float(np.linalg.norm(hv - wv, axis=0).max())


def hermitian_eigen(h, tau: float = 0.0) -> EigenFrame:
    """Eigendecompose a Hermitian 2x2 or 3x3 matrix.

    Raises NotHermitian when the symmetry defect exceeds the tolerance.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] not in (2, 3):
        raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {h.shape}")
    require_hermitian(h)
    w, v = kernels.eigh_grid(h[None])
    return EigenFrame(eigenvalues=w[0], eigenvectors=v[0], tau=float(tau))


def eigh_grid(hs):
    """Batched version of hermitian_eigen without the symmetry check;
    hs has shape (n, d, d).  Returns (eigenvalues (n, d), eigenvectors
    (n, d, d))."""
    hs = np.ascontiguousarray(hs, dtype=np.complex128)
    return kernels.eigh_grid(hs)
