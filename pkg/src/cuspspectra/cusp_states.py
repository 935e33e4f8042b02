"""Two-particle states with an exact electron-electron cusp.

The family is

    psi(t, x) = s(t, x) * exp(-zeta (|t| + |x|)) * (1 + c |t - x|),

with ``s = 1`` for symmetric states and ``s = |t| - |x|`` for antisymmetric
ones. Every member splits exactly as ``psi = xi + |t - x| eta`` with analytic
``xi = s e^{-zeta(|t|+|x|)}`` and ``eta = c xi``, so the diagonal cusp
strength and the asymptotic coefficient A are available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnderResolvedError
from .homokernel import mu_coefficient
from .quadrature import RadialGrid

__all__ = [
    "Symmetry",
    "CuspState",
    "DiagonalProfile",
    "evaluate_psi",
    "diagonal_profile",
    "coefficient_A",
    "coefficient_A_exact",
    "default_coefficient_grid",
]


class Symmetry(str, Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"


@dataclass(frozen=True)
class CuspState:
    """Parametric two-particle wavefunction carrying an exact cusp.

    Parameters
    ----------
    zeta : float
        Screening rate, > 0.
    c : float
        Cusp coupling; ``c = 0`` gives a separable (rank-one) state.
    symmetry : Symmetry
        Exchange symmetry of the spatial wavefunction.
    """

    zeta: float
    c: float
    symmetry: Symmetry = Symmetry.SYMMETRIC

    def __post_init__(self):
        if not self.zeta > 0:
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        object.__setattr__(self, "zeta", float(self.zeta))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))

    @property
    def symmetric(self) -> bool:
        return self.symmetry is Symmetry.SYMMETRIC

    @property
    def kappa0(self) -> float:
        # exp(-zeta S) (1 + |c| S) S is bounded by C exp(-0.9 zeta S), S = |t| + |x|
        return 0.9 * self.zeta

    def _envelope(self, rho, r):
        env = np.exp(-self.zeta * (rho + r))
        if not self.symmetric:
            env = env * (rho - r)
        return env

    def xi(self, t, x) -> np.ndarray:
        """Analytic regular part of the cusp decomposition."""
        t, x = np.asarray(t, float), np.asarray(x, float)
        return self._envelope(np.linalg.norm(t, axis=-1), np.linalg.norm(x, axis=-1))

    def eta(self, t, x) -> np.ndarray:
        """Analytic coefficient of |t - x| in the cusp decomposition."""
        return self.c * self.xi(t, x)

    def psi_radial(self, rho, r, u) -> np.ndarray:
        """psi with |t| = rho, |x| = r and u the cosine of the angle between t and x."""
        rho, r, u = np.asarray(rho, float), np.asarray(r, float), np.asarray(u, float)
        dist = np.sqrt(np.maximum(rho * rho + r * r - 2.0 * rho * r * u, 0.0))
        return self._envelope(rho, r) * (1.0 + self.c * dist)

    def psi_distance(self, rho, r, dist) -> np.ndarray:
        """psi with |t| = rho, |x| = r and |t - x| = dist."""
        return self._envelope(np.asarray(rho, float), np.asarray(r, float)) * (1.0 + self.c * np.asarray(dist, float))

    def decay_constant(self) -> float:
        """A constant C with |psi| <= C exp(-kappa0 (|t| + |x|)) everywhere."""
        # sup over S >= 0 of (1 + |c| S) * S^m * exp(-(zeta - kappa0) S), m = 0 or 1
        gap = self.zeta - self.kappa0
        s = np.linspace(0.0, 80.0 / gap, 20001)
        poly = 1.0 + abs(self.c) * s
        if not self.symmetric:
            poly = poly * s
        return float(np.max(poly * np.exp(-gap * s))) * (1.0 + 1e-6)


def evaluate_psi(state: CuspState, t, x) -> np.ndarray:
    """psi(t, x) for points t, x in R^3 (broadcast over leading axes)."""
    t, x = np.asarray(t, float), np.asarray(x, float)
    rho = np.linalg.norm(t, axis=-1)
    r = np.linalg.norm(x, axis=-1)
    dist = np.linalg.norm(t - x, axis=-1)
    return state.psi_distance(rho, r, dist)


@dataclass(frozen=True)
class DiagonalProfile:
    """Rotation-invariant diagonal cusp strength H(r) = amplitude * exp(-rate r)."""

    amplitude: float
    rate: float

    def __call__(self, r) -> np.ndarray:
        return self.amplitude * np.exp(-self.rate * np.asarray(r, float))

    @property
    def vanishes(self) -> bool:
        return self.amplitude == 0.0


def diagonal_profile(state: CuspState) -> DiagonalProfile:
    """H(x) = sqrt(2) |eta(x, x)|; identically zero for antisymmetric states."""
    amp = math.sqrt(2.0) * abs(state.c) if state.symmetric else 0.0
    return DiagonalProfile(amplitude=amp, rate=2.0 * state.zeta)


def default_coefficient_grid(state: CuspState, n: int = 96) -> RadialGrid:
    # exp(-1.5 zeta r) r^2 drops below 1e-11 of its integral by r = 25 / zeta
    return RadialGrid.gauss_legendre(n, 25.0 / state.zeta)


def _l34_integral(profile: DiagonalProfile, grid: RadialGrid) -> float:
    r = grid.nodes
    return 4.0 * math.pi * grid.integrate(profile(r) ** 0.75 * r * r)


def coefficient_A(state: CuspState, grid: RadialGrid | None = None, *, rtol: float = 1e-8) -> float:
    """Asymptotic coefficient A = mu_{1,3} * integral of H^(3/4) over R^3.

    The radial integral is done on ``grid`` and repeated with twice the nodes.

    Raises
    ------
    ValueError
        If the grid does not reach r_max * zeta >= 10.
    UnderResolvedError
        If refinement or the truncated tail beyond r_max changes the result
        by more than ``rtol`` (relative).
    """
    if grid is None:
        grid = default_coefficient_grid(state)
    if grid.r_max * state.zeta < 10.0:
        raise ValueError(f"radial grid too short: r_max * zeta = {grid.r_max * state.zeta:.3g} < 10")
    profile = diagonal_profile(state)
    if profile.vanishes:
        return 0.0
    mu = mu_coefficient(1.0, 3)
    value = mu * _l34_integral(profile, grid)
    finer = mu * _l34_integral(profile, grid.refined())
    if abs(finer - value) > rtol * abs(finer):
        raise UnderResolvedError(f"coefficient A moved from {value:.12g} to {finer:.12g} when doubling nodes",
                                 value, finer)
    beta = 0.75 * profile.rate
    big_r = grid.r_max
    tail = mu * 4.0 * math.pi * profile.amplitude**0.75 * math.exp(-beta * big_r) * (
        big_r**2 / beta + 2 * big_r / beta**2 + 2 / beta**3
    )
    if tail > rtol * value:
        raise UnderResolvedError(f"truncation at r_max = {big_r:g} loses {tail / value:.2e} of A", value, value + tail)
    return value


def coefficient_A_exact(state: CuspState) -> float:
    """Closed form (1/3)(2/pi)^(5/4) (sqrt(2)|c|)^(3/4) 64 pi / (27 zeta^3)."""
    if not state.symmetric or state.c == 0.0:
        return 0.0
    return (2.0 / math.pi) ** 1.25 / 3.0 * (math.sqrt(2.0) * abs(state.c)) ** 0.75 * 64.0 * math.pi / (
        27.0 * state.zeta**3
    )
