"""Finite-data surrogates for the asymptotic functionals G_p and g_p.

For a compact operator with singular values s_k,

    G_p = (limsup k^(1/p) s_k)^p,   g_p = (liminf k^(1/p) s_k)^p,

and the weak Schatten quasi-norm is sup_k k^(1/p) s_k. Limits cannot be read
off a finite spectrum, so :func:`plateau_estimate` reports the spread of
k^(1/p) s_k over a rank window instead of pretending to a single number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectrum import SpectrumSeries

__all__ = [
    "PlateauEstimate",
    "IdentityReport",
    "counting_function",
    "plateau_estimate",
    "quasi_norm",
    "triangle_check",
    "factorization_check",
    "finite_matrix_identities",
]


def _values(series) -> np.ndarray:
    if isinstance(series, SpectrumSeries):
        return series.expanded()
    vals = np.sort(np.asarray(series, dtype=float).ravel())[::-1]
    return vals


def _trust(series) -> int:
    return series.trust_k if isinstance(series, SpectrumSeries) else len(_values(series))


def counting_function(series, s: float) -> int:
    """n(s): number of values (with multiplicity) strictly greater than s."""
    if isinstance(series, SpectrumSeries):
        return series.count_above(s)
    return int(np.count_nonzero(_values(series) > s))


def quasi_norm(series, p: float) -> float:
    """sup_k k^(1/p) s_k; zero for an empty series."""
    vals = _values(series)
    if vals.size == 0:
        return 0.0
    k = np.arange(1, vals.size + 1, dtype=float)
    return float(np.max(k ** (1.0 / p) * vals))


@dataclass(frozen=True)
class PlateauEstimate:
    """Window statistics of k^(1/p) s_k and the implied G_p / g_p bounds."""

    p: float
    window: tuple[int, int]
    scaled_median: float
    scaled_min: float
    scaled_max: float
    g_estimate: float
    G_estimate: float
    trusted: bool = True
    scaled: np.ndarray = field(repr=False, compare=False, default=None)

    def brackets(self, limit: float) -> bool:
        """Whether ``limit`` (a candidate for lim k^(1/p) s_k) lies within the window spread."""
        return self.scaled_min <= limit <= self.scaled_max

    @property
    def spread(self) -> float:
        return self.scaled_max / self.scaled_min if self.scaled_min > 0 else float("inf")


def plateau_estimate(series, p: float, window, *, allow_untrusted: bool = False) -> PlateauEstimate:
    """Statistics of k^(1/p) s_k over ranks k_lo..k_hi inclusive.

    With ``allow_untrusted`` a window reaching past the trust index is
    evaluated anyway and the result carries ``trusted=False``.

    Raises
    ------
    ValueError
        For an empty window, k_lo < 1, k_hi beyond the series length, or
        k_hi beyond the trust index when ``allow_untrusted`` is false.
    """
    k_lo, k_hi = (int(w) for w in window)
    if k_lo < 1:
        raise ValueError(f"window must start at k >= 1, got {k_lo}")
    if k_hi < k_lo:
        raise ValueError(f"empty window [{k_lo}, {k_hi}]")
    trust = _trust(series)
    if k_hi > trust and not allow_untrusted:
        raise ValueError(f"window end {k_hi} exceeds trust_k = {trust}")
    vals = _values(series)
    if k_hi > vals.size:
        raise ValueError(f"window end {k_hi} exceeds the {vals.size} available values")
    vals = vals[k_lo - 1:k_hi]
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    scaled = k ** (1.0 / p) * vals
    lo, hi = float(scaled.min()), float(scaled.max())
    return PlateauEstimate(
        p=p,
        window=(k_lo, k_hi),
        scaled_median=float(np.median(scaled)),
        scaled_min=lo,
        scaled_max=hi,
        g_estimate=lo**p,
        G_estimate=hi**p,
        trusted=k_hi <= trust,
        scaled=scaled,
    )


# --------------------------------------------------------------------------
# Operator-ideal identities on finite matrices
# --------------------------------------------------------------------------


def triangle_check(t1, t2, p: float, rtol: float = 1e-12):
    """Quasi-norm triangle inequality with exponent p / (p + 1).

    Returns ``(lhs, rhs, holds)`` for
    ``||T1 + T2||^(p/(p+1)) <= ||T1||^(p/(p+1)) + ||T2||^(p/(p+1))``.
    """
    q = p / (p + 1.0)

    def norm(m):
        return quasi_norm(np.linalg.svd(m, compute_uv=False), p)

    lhs = norm(np.asarray(t1) + np.asarray(t2)) ** q
    rhs = norm(t1) ** q + norm(t2) ** q
    return lhs, rhs, bool(lhs <= rhs * (1.0 + rtol))


def factorization_check(t) -> float:
    """Largest relative gap between eig(T* T) and the squared singular values of T."""
    t = np.asarray(t)
    eig = np.sort(np.linalg.eigvalsh(t.conj().T @ t))[::-1]
    sv2 = np.linalg.svd(t, compute_uv=False) ** 2
    m = min(eig.size, sv2.size)
    scale = max(float(sv2[0]), 1e-300) if sv2.size else 1.0
    return float(np.max(np.abs(eig[:m] - sv2[:m])) / scale) if m else 0.0


@dataclass
class IdentityReport:
    seed: int
    size: int
    p: float
    triangle: list = field(default_factory=list)
    factorization_gaps: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "size": self.size,
            "p": self.p,
            "triangle": [list(t) for t in self.triangle],
            "factorization_gaps": list(self.factorization_gaps),
            "violations": list(self.violations),
            "pass": self.passed,
        }


def finite_matrix_identities(seed: int, size: int, p: float, *, eig_tol: float = 1e-10) -> IdentityReport:
    """Check the quasi-norm triangle inequality and T*T = |T|^2 spectra on random matrices.

    Two pairs are drawn: plain Gaussian matrices, and Gaussian matrices with
    columns scaled by k^(-1/p) so that their singular values decay like a
    member of the weak class of order p.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    rng = np.random.default_rng(seed)
    report = IdentityReport(seed=seed, size=size, p=p)
    decay = np.arange(1, size + 1, dtype=float) ** (-1.0 / p)
    pairs = {
        "gaussian": (rng.standard_normal((size, size)), rng.standard_normal((size, size))),
        "decaying": (rng.standard_normal((size, size)) * decay, rng.standard_normal((size, size)) * decay),
    }
    for name, (t1, t2) in pairs.items():
        lhs, rhs, ok = triangle_check(t1, t2, p)
        report.triangle.append((name, lhs, rhs))
        if not ok:
            report.violations.append(f"triangle[{name}]: {lhs:.6g} > {rhs:.6g}")
        for label, t in (("T1", t1), ("T2", t2), ("T1+T2", t1 + t2)):
            gap = factorization_check(t)
            report.factorization_gaps.append(gap)
            if gap > eig_tol:
                report.violations.append(f"factorization[{name}:{label}]: gap {gap:.3e}")
    return report
