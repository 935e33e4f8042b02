"""Gauss-Legendre rules and the radial grid shared by all radial integrals."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

__all__ = [
    "RadialGrid",
    "gauss_legendre",
    "composite_gauss_legendre",
    "tensor_gauss_legendre",
]


@lru_cache(maxsize=64)
def _reference_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    x, w = _reference_rule(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(n_panels: int, order: int, a: float, b: float):
    """Equal-width panels on [a, b], each carrying an ``order``-point rule.

    Returns
    -------
    nodes, weights : ndarray
        Flattened panel-major arrays of length ``n_panels * order``.
    edges : ndarray
        The ``n_panels + 1`` panel boundaries.
    """
    edges = np.linspace(a, b, n_panels + 1)
    x, w = _reference_rule(int(order))
    half = 0.5 * np.diff(edges)
    nodes = edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel(), edges


def tensor_gauss_legendre(n: int, lo: float, hi: float, dim: int):
    """Tensor-product rule on the cube [lo, hi]^dim as (points, weights)."""
    x, w = gauss_legendre(n, lo, hi)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.ones(1)
    for _ in range(dim):
        weights = np.multiply.outer(weights, w).ravel()
    return points, weights


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature nodes and weights on (0, r_max].

    The same grid serves as the radial quadrature for scalar integrals and as
    the Nystrom discretisation of radial integral operators.
    """

    nodes: np.ndarray
    weights: np.ndarray
    r_max: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size == 0:
            raise ValueError("empty radial grid")
        if not (nodes[0] > 0.0 and nodes[-1] <= self.r_max):
            raise ValueError("radial nodes must lie in (0, r_max]")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("radial nodes must be strictly increasing")
        if np.any(weights <= 0.0):
            raise ValueError("radial weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "r_max", float(self.r_max))

    @classmethod
    def gauss_legendre(cls, n: int, r_max: float) -> "RadialGrid":
        if r_max <= 0.0:
            raise ValueError(f"r_max must be positive, got {r_max}")
        nodes, weights = gauss_legendre(n, 0.0, r_max)
        return cls(nodes, weights, r_max)

    def __len__(self) -> int:
        return self.nodes.size

    def refined(self, factor: int = 2) -> "RadialGrid":
        """Same interval with ``factor`` times as many nodes."""
        return RadialGrid.gauss_legendre(factor * len(self), self.r_max)

    def coarsened(self) -> "RadialGrid":
        """Same interval with half as many nodes."""
        return RadialGrid.gauss_legendre(max(len(self) // 2, 1), self.r_max)

    def integrate(self, values) -> float:
        """Quadrature of sampled values (no r^2 Jacobian applied)."""
        return float(np.dot(self.weights, values))

    def matches(self, other: "RadialGrid") -> bool:
        return (
            len(self) == len(other)
            and self.r_max == other.r_max
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )
