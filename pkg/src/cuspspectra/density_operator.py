"""One-particle density operator of a two-particle cusp state.

For N = 2 the density operator factorises as Gamma = Psi* Psi, where Psi is
the integral operator with kernel sqrt(2) psi(t, x). Because psi depends on
|t|, |x| and the angle between t and x only, Psi commutes with rotations and
splits into angular-momentum channels:

    psi(t, x) = sum_l (2l + 1) / (4 pi) a_l(|t|, |x|) P_l(cos angle),
    a_l(rho, r) = 2 pi int_{-1}^{1} P_l(u) psi(rho, r, u) du.

In channel l the radial operator has kernel sqrt(2) a_l(rho, r) with respect
to rho^2 drho and r^2 dr, its squared singular values are eigenvalues of
Gamma, each with multiplicity 2l + 1.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre

from .cusp_states import CuspState
from .errors import UnderResolvedError
from .quadrature import RadialGrid, gauss_legendre
from .spectrum import SpectrumSeries

__all__ = [
    "DEFAULT_L_MAX",
    "DEFAULT_RADIAL_N",
    "default_u_order",
    "ChannelOperator",
    "default_grid",
    "partial_wave_amplitude",
    "amplitude_tensor",
    "channel_operator",
    "channel_spectrum",
    "assemble_spectrum",
    "trace_sum",
]

log = logging.getLogger(__name__)

DEFAULT_L_MAX = 48
DEFAULT_RADIAL_N = 320
DEFAULT_R_MAX_ZETA = 14.0
U_ORDER_PAD = 16
# The cusp |t - x| has a square-root kink at u = 1 when rho = r, so Gauss-Legendre
# in u converges slowly; never go below the order used at the default l_max.
U_ORDER_MIN = 64
# Eigenvalues below this fraction of lambda_1 are quadrature noise.
EIGEN_FLOOR = 1e-13
TRUNCATION_WARN = 1e-10
REFINEMENT_TOL = 0.05


def default_grid(state: CuspState, n: int = DEFAULT_RADIAL_N, r_max: float | None = None) -> RadialGrid:
    if r_max is None:
        r_max = DEFAULT_R_MAX_ZETA / state.zeta
    return RadialGrid.gauss_legendre(n, r_max)


def default_u_order(ell: int) -> int:
    return max(ell + U_ORDER_PAD, U_ORDER_MIN)


def _check_u_order(ell: int, u_order: int):
    if ell < 0:
        raise ValueError(f"angular momentum must be >= 0, got {ell}")
    if u_order < ell + 1:
        raise ValueError(f"u_order = {u_order} aliases P_{ell}; need u_order >= ell + 1")


def partial_wave_amplitude(state: CuspState, ell: int, rho, r, u_order: int | None = None):
    """a_l(rho, r) = 2 pi int P_l(u) psi(rho, r, u) du by Gauss-Legendre in u.

    The rule is exact for integrands that are polynomials of degree at most
    ``2 * u_order - 1`` in u. ``u_order`` defaults to ``max(ell + 16, 64)``.
    """
    if u_order is None:
        u_order = default_u_order(ell)
    _check_u_order(ell, u_order)
    u, w = gauss_legendre(u_order)
    rho, r = np.broadcast_arrays(np.asarray(rho, float), np.asarray(r, float))
    vals = state.psi_radial(rho[..., None], r[..., None], u)
    out = 2.0 * math.pi * np.sum(vals * (w * eval_legendre(ell, u)), axis=-1)
    return float(out) if out.ndim == 0 else out


def amplitude_tensor(state: CuspState, l_max: int, nodes, u_order: int | None = None,
                     chunk: int = 8) -> np.ndarray:
    """All a_l(rho_i, r_j) for l <= l_max on the node product, shape (l_max+1, n, n)."""
    if u_order is None:
        u_order = default_u_order(l_max)
    _check_u_order(l_max, u_order)
    nodes = np.asarray(nodes, float)
    u, w = gauss_legendre(u_order)
    legendre = np.polynomial.legendre.legvander(u, l_max).T * (2.0 * math.pi * w)
    rho = nodes[:, None, None]
    r = nodes[None, :, None]
    out = np.zeros((l_max + 1, nodes.size, nodes.size))
    for start in range(0, u_order, chunk):
        sl = slice(start, start + chunk)
        vals = state.psi_radial(rho, r, u[None, None, sl])
        out += np.einsum("iju,lu->lij", vals, legendre[:, sl], optimize=True)
    return out


@dataclass(frozen=True, eq=False)
class ChannelOperator:
    """Radial block of Psi in angular-momentum channel ``ell``.

    ``amplitude_matrix[i, j]`` is ``sqrt(2) a_l(rho_i, r_j)``; rows index the
    image variable, columns the input variable, both on ``grid``.
    """

    ell: int
    amplitude_matrix: np.ndarray
    grid: RadialGrid

    def nystrom_matrix(self) -> np.ndarray:
        s = np.sqrt(self.grid.weights) * self.grid.nodes
        return s[:, None] * self.amplitude_matrix * s[None, :]

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.nystrom_matrix(), compute_uv=False)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the channel block of Gamma, nonincreasing."""
        return self.singular_values() ** 2


def _resolve_grids(grid: RadialGrid, rho_grid: RadialGrid | None) -> RadialGrid:
    if rho_grid is not None and not rho_grid.matches(grid):
        raise ValueError("rho- and r-axes must share one radial grid (square symmetric discretisation)")
    return grid


def channel_operator(state: CuspState, ell: int, grid: RadialGrid, u_order: int | None = None, *,
                     rho_grid: RadialGrid | None = None) -> ChannelOperator:
    grid = _resolve_grids(grid, rho_grid)
    rho, r = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    amp = math.sqrt(2.0) * partial_wave_amplitude(state, ell, rho, r, u_order)
    return ChannelOperator(ell, amp, grid)


def channel_spectrum(state: CuspState, ell: int, grid: RadialGrid, u_order: int | None = None, *,
                     rho_grid: RadialGrid | None = None) -> np.ndarray:
    """Eigenvalues of Gamma in channel ``ell`` (each of multiplicity 2 ell + 1)."""
    return channel_operator(state, ell, grid, u_order, rho_grid=rho_grid).eigenvalues()


def _channel_values(state, l_max, grid, u_order, workers):
    amps = math.sqrt(2.0) * amplitude_tensor(state, l_max, grid.nodes, u_order)

    def one(ell):
        return ChannelOperator(ell, amps[ell], grid).eigenvalues()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(l_max + 1)))
    return [one(ell) for ell in range(l_max + 1)]


def _merge(per_channel, metadata) -> SpectrumSeries:
    values = np.concatenate(per_channel)
    ells = np.concatenate([np.full(v.size, ell) for ell, v in enumerate(per_channel)])
    radial = np.concatenate([np.arange(v.size) for v in per_channel])
    return SpectrumSeries.from_entries(values, 2 * ells + 1, ells, radial, metadata=metadata)


def _agreement_rank(fine: np.ndarray, coarse: np.ndarray, tol: float) -> int:
    m = min(fine.size, coarse.size)
    if m == 0:
        return 0
    a, b = fine[:m], coarse[:m]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(a - b) / np.abs(a)
    bad = np.nonzero(~(rel <= tol))[0]
    return int(bad[0]) if bad.size else m


def assemble_spectrum(state: CuspState, l_max: int = DEFAULT_L_MAX, grid: RadialGrid | None = None,
                      u_order: int | None = None, *, refine: bool = True, workers: int = 1) -> SpectrumSeries:
    """Eigenvalues of Gamma from channels 0..l_max, sorted with multiplicity.

    ``trust_k`` is the smallest of: the rank up to which a half-resolution
    re-run agrees within 5%, the number of eigenvalues above the noise floor
    1e-13 * lambda_1, and the number of eigenvalues above the top eigenvalue
    of channel ``l_max`` (below it, channels beyond the cut-off could
    interleave).
    """
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    if grid is None:
        grid = default_grid(state)
    if u_order is None:
        u_order = default_u_order(l_max)
    per_channel = _channel_values(state, l_max, grid, u_order, workers)
    meta = {
        "zeta": state.zeta, "c": state.c, "symmetry": state.symmetry.value,
        "l_max": l_max, "radial_n": len(grid), "r_max": grid.r_max, "u_order": u_order,
    }
    series = _merge(per_channel, meta)
    expanded = series.expanded()
    lam1 = series.largest
    floor = EIGEN_FLOOR * lam1
    top_last = float(per_channel[-1][0]) if per_channel[-1].size else 0.0
    truncation_suspect = l_max > 0 and top_last > TRUNCATION_WARN * lam1
    if truncation_suspect:
        log.warning("channel l = %d still contributes %.3e (> %.0e lambda_1); l_max may be too small",
                    l_max, top_last, TRUNCATION_WARN)
    above_floor = series.count_above(floor)
    truncation_cap = series.count_above(top_last) if l_max > 0 else len(series)
    trust = min(above_floor, truncation_cap)
    radial_trust = None
    if refine:
        coarse_grid = grid.coarsened()
        coarse = _merge(_channel_values(state, l_max, coarse_grid, u_order, workers), {})
        radial_trust = _agreement_rank(expanded, coarse.expanded(), REFINEMENT_TOL)
        trust = min(trust, radial_trust)
    return series.with_trust(
        trust,
        floor=floor,
        above_floor=above_floor,
        truncation_cap=truncation_cap,
        radial_trust=radial_trust,
        top_of_last_channel=top_last,
        truncation_suspect=bool(truncation_suspect),
    )


def _norm_squared(state: CuspState, grid: RadialGrid) -> float:
    # ||psi||^2 = 16 pi^2 int_0^R rho^2 int_0^rho r^2 int_{-1}^{1} psi^2 du dr drho,
    # using the rho <-> r symmetry of psi^2 and u -> d = |t - x| in the angle.
    rho, w_rho = grid.nodes, grid.weights
    x, wx = gauss_legendre(len(grid))
    r = rho[:, None] * 0.5 * (x + 1.0)
    wr = rho[:, None] * 0.5 * wx
    g, wg = gauss_legendre(6)
    lo = (rho[:, None] - r)[..., None]
    hi = (rho[:, None] + r)[..., None]
    d = lo + 0.5 * (hi - lo) * (g + 1.0)
    wd = 0.5 * (hi - lo) * wg
    rr = r[..., None]
    rh = rho[:, None, None]
    psi2 = state.psi_distance(rh, rr, d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        angular = np.sum(psi2 * d * wd, axis=-1) / (rho[:, None] * r)
    angular = np.nan_to_num(angular)
    inner = np.sum(wr * r * r * angular, axis=1)
    return 16.0 * math.pi**2 * float(np.dot(w_rho * rho * rho, inner))


def trace_sum(state: CuspState, grid: RadialGrid | None = None, *, rtol: float = 1e-8) -> float:
    """trace Gamma = 2 ||psi||^2 by direct radial-angular quadrature.

    Independent of the partial-wave pipeline: the angular integral is taken
    in the interparticle distance, where the integrand is polynomial.
    """
    if grid is None:
        grid = default_grid(state)
    value = 2.0 * _norm_squared(state, grid)
    finer = 2.0 * _norm_squared(state, grid.refined())
    if abs(finer - value) > rtol * abs(finer):
        raise UnderResolvedError(f"trace moved from {value:.12g} to {finer:.12g} when doubling nodes", value, finer)
    return value
