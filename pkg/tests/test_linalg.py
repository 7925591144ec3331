import numpy as np
import pytest

from salz.errors import NotHermitian
from salz.linalg import (
    EigenFrame,
    eigh_grid,
    hermitian_eigen,
    pauli_operators,
    spin1_operators,
)
from salz.models import ThreeLevelModel

from conftest import random_hermitian


class TestPauli:
    def test_sigma_z_diagonal(self):
        _, _, sz = pauli_operators()
        assert np.array_equal(sz, np.diag([1.0, -1.0]))

    def test_two_level_matrix_form(self):
        sx, _, sz = pauli_operators()
        omega, delta = 1.7, 0.4
        h = 0.5 * omega * sz + 0.5 * delta * sx
        want = 0.5 * np.array([[omega, delta], [delta, -omega]])
        assert np.abs(h - want).max() == 0.0

    def test_algebra(self):
        sx, sy, sz = pauli_operators()
        assert np.abs(sx @ sy - 1j * sz).max() < 1e-15
        for s in (sx, sy, sz):
            assert np.abs(s - s.conj().T).max() == 0.0
            assert abs(np.trace(s)) == 0.0
            assert np.abs(s @ s - np.eye(2)).max() < 1e-15


class TestSpin1:
    def test_matrices(self):
        sx, sy, sz = spin1_operators()
        assert np.array_equal(sz, np.diag([1.0, 0.0, -1.0]))
        s = 1 / np.sqrt(2)
        assert np.abs(sx - np.array([[0, s, 0], [s, 0, s], [0, s, 0]])).max() == 0.0
        assert np.abs(sz @ sz - np.diag([1.0, 0.0, 1.0])).max() == 0.0

    def test_commutator(self):
        sx, sy, sz = spin1_operators()
        assert np.abs(sx @ sy - sy @ sx - 1j * sz).max() < 1e-15

    def test_three_level_hamiltonian_from_spin_operators(self):
        sx, _, sz = spin1_operators()
        eps, alpha, delta, tau = 2.0, 1.0, 0.5, 0.37
        model = ThreeLevelModel(epsilon=eps, alpha=alpha, delta=delta)
        h = eps * sz @ sz + alpha * tau * sz + delta * sx
        assert np.abs(h - model.h0(tau)).max() < 1e-15


class TestHermitianEigen:
    def test_diagonal(self):
        f = hermitian_eigen(np.diag([1.0, 2.0, 3.0]).astype(complex))
        assert np.allclose(f.eigenvalues, [1.0, 2.0, 3.0], atol=1e-14)
        assert np.abs(f.eigenvectors - np.eye(3)).max() < 1e-14

    def test_three_level_central_time_eigenvalues(self):
        # closed form: {eps/2 - r, eps, eps/2 + r}, r = sqrt(eps^2+4 Delta^2)/2
        eps, delta = 2.0, 0.5
        m = ThreeLevelModel(epsilon=eps, alpha=1.0, delta=delta)
        f = hermitian_eigen(m.h0(0.0))
        r = 0.5 * np.sqrt(eps ** 2 + 4 * delta ** 2)
        assert np.allclose(f.eigenvalues, [eps / 2 - r, eps, eps / 2 + r], atol=1e-12)
        # frozen decimals
        assert np.allclose(f.eigenvalues, [-0.1180, 2.0, 2.1180], atol=5e-5)

    def test_not_hermitian_raises(self):
        bad = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        with pytest.raises(NotHermitian):
            hermitian_eigen(bad)

    def test_residual_orthonormality_gauge_large_sample(self, rng):
        # 1e5 random Hermitian 3x3 plus a 2x2 batch
        for d, n in ((3, 100_000), (2, 20_000)):
            hs = random_hermitian(rng, n, d, scale=3.0)
            w, v = eigh_grid(hs)
            assert np.all(np.diff(w, axis=1) >= 0.0)
            resid = np.abs(hs @ v - v * w[:, None, :]).max(axis=(1, 2))
            scale = np.abs(w).max(axis=1)
            assert np.all(resid < 1e-10 * np.maximum(scale, 1e-300))
            gram = v.conj().transpose(0, 2, 1) @ v
            assert np.abs(gram - np.eye(d)).max() < 1e-12
            # gauge: the largest-magnitude entry of each column is real positive
            idx = np.abs(v).argmax(axis=1)
            lead = np.take_along_axis(v, idx[:, None, :], axis=1)[:, 0, :]
            assert lead.real.min() > 0.0
            assert np.abs(lead.imag).max() < 1e-12

    def test_gauge_determinism_bitwise(self, rng):
        hs = random_hermitian(rng, 64, 3)
        w1, v1 = eigh_grid(hs)
        w2, v2 = eigh_grid(hs.copy())
        assert w1.tobytes() == w2.tobytes()
        assert v1.tobytes() == v2.tobytes()

    def test_eigenvalue_continuity(self):
        # branches are Lipschitz with constant <= max||dH/dtau|| when the
        # gap stays open (min gap here ~0.118 >> 1e-3)
        m = ThreeLevelModel(epsilon=2.0, alpha=1.0, delta=0.5)
        taus = np.linspace(-5.0, 5.0, 10001)
        b0, b1 = m.sweep_matrices()
        w, _ = eigh_grid(b0[None] + taus[:, None, None] * b1[None])
        dtau = taus[1] - taus[0]
        lipschitz = np.abs(np.diff(w, axis=0)).max() / dtau
        assert lipschitz <= 1.0 + 1e-6

    def test_frame_residual_helper(self):
        h = np.array([[1.0, 0.3], [0.3, -0.5]], dtype=complex)
        f = hermitian_eigen(h, tau=1.5)
        assert isinstance(f, EigenFrame)
        assert f.tau == 1.5
        assert f.residual(h) < 1e-12
