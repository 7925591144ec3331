"""Hamiltonian families: two-level linear sweep (Landau-Zener) and the
three-level double-crossing model, symmetric or asymmetric.

All quantities are dimensionless: energies are measured in a
characteristic energy E_c of the physical system and time carries the
inverse scale (tau = E_c t / hbar).  For a spin-1 magnetic realization
H = hbar*D*Sz^2 + g*muB*B.S with a linearly swept Bz and constant Bx,
the identification is epsilon = hbar*D/(g muB Bx),
alpha = hbar*dBz/dt/(g muB Bx^2), tau = g muB Bx t / hbar, delta = 1,
with E_c = g muB Bx.  That mapping lives only in documentation; the
computations below never see physical units.
"""

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import ConfigError, DegenerateSeparation

PROFILE_LINEAR_LZ = "linear-lz"

_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TwoLevelModel:
    """Two-level avoided crossing H0 = (omega/2) sigma_z + (Delta/2) sigma_x
    with the linear sweep omega(tau) = alpha * tau."""

    alpha: float
    delta: float
    profile: str = PROFILE_LINEAR_LZ

    dim = 2

    def __post_init__(self):
        if self.profile != PROFILE_LINEAR_LZ:
            raise ConfigError(f"profile: unsupported sweep profile {self.profile!r}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.delta)):
            raise ConfigError("alpha/delta: parameters must be finite")
        if self.alpha == 0.0:
            raise ConfigError("alpha: the linear sweep rate must be nonzero")
        if self.delta < 0.0:
            raise ConfigError("delta: coupling must be >= 0")

    def sweep_matrices(self):
        """(b0, b1) with H0(tau) = b0 + tau * b1."""
        b0 = np.array([[0.0, 0.5 * self.delta], [0.5 * self.delta, 0.0]],
                      dtype=np.complex128)
        b1 = np.array([[0.5 * self.alpha, 0.0], [0.0, -0.5 * self.alpha]],
                      dtype=np.complex128)
        return b0, b1

    def h0(self, tau: float) -> np.ndarray:
        b0, b1 = self.sweep_matrices()
        return b0 + tau * b1

    def dh0_dtau(self, tau: float = 0.0) -> np.ndarray:
        return self.sweep_matrices()[1]

    def lz_probability(self) -> float:
        """Asymptotic diabatic tunneling probability of the uncontrolled
        sweep, exp(-pi Delta^2 / (2 alpha)) with hbar = 1."""
        return math.exp(-math.pi * self.delta ** 2 / (2.0 * abs(self.alpha)))


@dataclass(frozen=True)
class ThreeLevelModel:
    """Three-level double crossing: diabatic levels epsilon + alpha*tau,
    0, and epsilon + beta*tau, nearest-neighbour couplings Delta/sqrt(2)
    and (Delta + delta_delta)/sqrt(2), no direct (1,3) coupling.

    The symmetric configuration is beta = -alpha, delta_delta = 0; the
    slope asymmetry is parametrized by beta = -(alpha + delta_alpha).
    """

    epsilon: float
    alpha: float
    delta: float
    beta: float | None = None  # defaults to -alpha (symmetric spectrum)
    delta_delta: float = 0.0

    dim = 3

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", -self.alpha)
        vals = (self.epsilon, self.alpha, self.delta, self.beta, self.delta_delta)
        if not all(math.isfinite(x) for x in vals):
            raise ConfigError("model parameters must be finite")
        if self.delta <= 0.0:
            raise ConfigError("delta: coupling must be > 0")

    @property
    def delta_alpha(self) -> float:
        """Slope asymmetry, zero for the symmetric model."""
        return -(self.beta + self.alpha)

    @property
    def is_symmetric(self) -> bool:
        return self.beta == -self.alpha and self.delta_delta == 0.0

    def sweep_matrices(self):
        d1 = self.delta / _SQ2
        d2 = (self.delta + self.delta_delta) / _SQ2
        b0 = np.array([
            [self.epsilon, d1, 0.0],
            [d1, 0.0, d2],
            [0.0, d2, self.epsilon]], dtype=np.complex128)
        b1 = np.diag([self.alpha, 0.0, self.beta]).astype(np.complex128)
        return b0, b1

    def h0(self, tau: float) -> np.ndarray:
        b0, b1 = self.sweep_matrices()
        return b0 + tau * b1

    def dh0_dtau(self, tau: float = 0.0) -> np.ndarray:
        return self.sweep_matrices()[1]

    def effective_gap(self) -> float:
        """Minimum distance of the two upper adiabatic levels at the
        central anticrossing: (eps/2)(sqrt(4 Delta^2/eps^2 + 1) - 1).
        For Delta/eps << 1 this tends to Delta^2/eps."""
        if self.epsilon <= 0.0:
            raise DegenerateSeparation(
                "effective gap requires a positive crossing separation epsilon")
        r = 2.0 * self.delta / self.epsilon
        return 0.5 * self.epsilon * (math.sqrt(r * r + 1.0) - 1.0)

    def with_delta_alpha(self, delta_alpha: float) -> "ThreeLevelModel":
        return replace(self, beta=-(self.alpha + delta_alpha))


@dataclass(frozen=True)
class DimensionlessUnits:
    """Informational record of the energy scale behind the
    dimensionless parameters; see the module docstring for the spin-1
    magnetic mapping."""

    characteristic_energy: float = 1.0
    note: str = ("epsilon = hbar D/(g muB Bx), alpha = hbar (dBz/dt)/(g muB Bx^2), "
                 "tau = g muB Bx t/hbar, delta = 1 when E_c = g muB Bx")


def to_config(model) -> dict:
    """Flat key-value form (all values as floats/strings)."""
    if isinstance(model, TwoLevelModel):
        return {"model": "two-level", "epsilon": 0.0, "alpha": model.alpha,
                "delta": model.delta, "delta_delta": 0.0, "delta_alpha": 0.0}
    if isinstance(model, ThreeLevelModel):
        return {"model": "three-level", "epsilon": model.epsilon,
                "alpha": model.alpha, "delta": model.delta,
                "delta_delta": model.delta_delta,
                "delta_alpha": model.delta_alpha}
    raise ConfigError(f"model: unknown model object {type(model).__name__}")


def from_config(cfg: Mapping) -> "TwoLevelModel | ThreeLevelModel":
    name = str(cfg.get("model", "three-level"))

    def num(key, default=0.0):
        raw = cfg.get(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None

    if name == "two-level":
        return TwoLevelModel(alpha=num("alpha", 1.0), delta=num("delta", 0.5))
    if name == "three-level":
        alpha = num("alpha", 1.0)
        return ThreeLevelModel(
            epsilon=num("epsilon", 15.0),
            alpha=alpha,
            delta=num("delta", 0.5),
            beta=-(alpha + num("delta_alpha", 0.0)),
            delta_delta=num("delta_delta", 0.0))
    raise ConfigError(f"model: expected 'two-level' or 'three-level', got {name!r}")
