r"""Integral operators with homogeneous kernels.

Covers kernels :math:`b(x)\,\Phi(x-y)\,a(y)` on :math:`\mathbb R^d` with
:math:`\Phi(tx) = t^\alpha \Phi(x)`. For such operators the singular values
obey :math:`s_k \sim (C k)^{-1/p}` with :math:`1/p = 1 + \alpha/d` and

.. math::

    C = \frac{1}{d (2\pi)^d} \int_{S^{d-1}} |X_\infty(\omega)|^p d\omega
        \int_{\mathbb R^d} |a(x) b(x)|^p dx,

where :math:`X_\infty` is the Fourier symbol of :math:`\Phi`. Two families are
implemented: the scalar kernel :math:`|x|^\alpha` and the gradient kernel
:math:`\nabla |x|^{\alpha+1}`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import gamma, rgamma, roots_jacobi

from .errors import DomainError, UnderResolvedError
from .quadrature import composite_gauss_legendre, gauss_legendre, tensor_gauss_legendre
from .spectrum import SpectrumSeries

__all__ = [
    "KernelFamily",
    "Weight",
    "HomogeneousKernelSpec",
    "ModelWeightProfile",
    "fourier_symbol",
    "mu_coefficient",
    "nu_coefficient",
    "sphere_area",
    "sphere_factor",
    "model_weight_profile",
    "model_coefficient",
    "nystrom_1d_spectrum",
]

# Values below this fraction of s_1 are treated as floating-point noise.
SPECTRUM_FLOOR = 1e-13
# Relative agreement required between the n and n/2 runs for a rank to be trusted.
REFINEMENT_TOL = 0.05


class KernelFamily(str, Enum):
    SCALAR_ABS = "scalar_abs"
    GRADIENT = "gradient"


def _is_integer(x: float) -> bool:
    return float(x).is_integer()


def _scalar_degenerate(alpha: float) -> bool:
    # |x|^alpha is a polynomial for alpha = 0, 2, 4, ...
    return _is_integer(alpha) and alpha >= 0 and int(alpha) % 2 == 0


def _gradient_degenerate(alpha: float) -> bool:
    return _is_integer(alpha) and alpha >= 1 and int(alpha) % 2 == 1


def _safe_gamma(z: float) -> float:
    if z <= 0 and _is_integer(z):
        raise DomainError(f"Gamma has a pole at {z}")
    return float(gamma(z))


@dataclass(frozen=True)
class Weight:
    """A continuous weight on R^dim: a Gaussian or a compactly supported C^inf bump.

    ``gaussian``: ``amplitude * exp(-scale * |x - center|^2)``.
    ``bump``: ``amplitude * exp(1 - 1 / (1 - (|x - center| / scale)^2))`` inside
    the ball of radius ``scale``, zero outside.

    For ``dim == 1`` every array entry is a coordinate; otherwise the last
    axis holds the ``dim`` coordinates of a point.
    """

    kind: str = "gaussian"
    scale: float = 1.0
    center: tuple | float = 0.0
    amplitude: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("gaussian", "bump"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.scale <= 0:
            raise ValueError("weight scale must be positive")
        center = np.broadcast_to(np.asarray(self.center, dtype=float), (self.dim,))
        object.__setattr__(self, "center", tuple(float(c) for c in center))

    def _distance2(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center)
        if self.dim == 1:
            return (x - c[0]) ** 2
        return np.sum((x - c) ** 2, axis=-1)

    def __call__(self, x) -> np.ndarray:
        r2 = self._distance2(x)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-self.scale * r2)
        s2 = np.atleast_1d(r2 / self.scale**2)
        out = np.zeros_like(s2)
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return self.amplitude * out.reshape(np.shape(r2))

    def effective_radius(self, threshold: float = 1e-17) -> float:
        """Distance from the origin beyond which the weight is below ``threshold``."""
        offset = float(np.linalg.norm(self.center))
        if self.kind == "bump":
            return offset + self.scale
        return offset + math.sqrt(max(math.log(abs(self.amplitude) / threshold), 0.0) / self.scale)


@dataclass(frozen=True)
class HomogeneousKernelSpec:
    """Parameters of the model operator ``b(x) Phi(x - y) a(y)``."""

    alpha: float
    d: int = 1
    family: KernelFamily = KernelFamily.SCALAR_ABS
    a: Weight = field(default_factory=Weight)
    b: Weight = field(default_factory=Weight)

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not self.alpha > -self.d:
            raise ValueError(f"alpha must exceed -d = {-self.d}, got {self.alpha}")
        if self.a.dim != self.d or self.b.dim != self.d:
            raise ValueError("weights a and b must live in the kernel's dimension")

    @property
    def p(self) -> float:
        """Schatten-type exponent with 1/p = 1 + alpha/d."""
        return 1.0 / (1.0 + self.alpha / self.d)

    @property
    def tau(self) -> float:
        """Homogeneity order of the symbol: X(t xi) = t^(-tau) X(xi)."""
        return self.alpha + self.d

    @property
    def degenerate(self) -> bool:
        if self.family is KernelFamily.SCALAR_ABS:
            return _scalar_degenerate(self.alpha)
        return _gradient_degenerate(self.alpha)

    def kernel(self, z) -> np.ndarray:
        """Phi evaluated at 1-D differences ``z`` (the Nystrom use case)."""
        z = np.asarray(z, dtype=float)
        az = np.abs(z)
        if self.family is KernelFamily.SCALAR_ABS:
            return az**self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.alpha + 1.0) * az**self.alpha * np.sign(z)
        return np.where(az == 0.0, 0.0, out)


def fourier_symbol(spec: HomogeneousKernelSpec, xi_norm: float) -> float:
    """Principal symbol X_inf of the kernel at a frequency of length ``xi_norm``.

    The scalar family returns the signed value
    ``2^(d+a) pi^(d/2) Gamma((d+a)/2) / Gamma(-a/2) |xi|^-(d+a)``; the
    gradient family returns the magnitude of its vector-valued symbol.
    Degenerate orders (polynomial kernels) give exactly ``0.0``.
    """
    if not xi_norm > 0:
        raise ValueError("xi_norm must be positive")
    alpha, d = float(spec.alpha), spec.d
    if spec.degenerate:
        return 0.0
    decay = xi_norm ** (-(d + alpha))
    if spec.family is KernelFamily.SCALAR_ABS:
        # 1/Gamma is entire, so poles of the denominator give a clean zero
        ratio = _safe_gamma((d + alpha) / 2) * float(rgamma(-alpha / 2))
        return 2.0 ** (d + alpha) * math.pi ** (d / 2) * ratio * decay
    ratio = _safe_gamma((d + alpha + 1) / 2) * float(rgamma((1 - alpha) / 2))
    return abs((alpha + 1) * 2.0 ** (d + alpha) * math.pi ** (d / 2) * ratio) * decay


def mu_coefficient(alpha: float, d: int) -> float:
    """Asymptotic coefficient of the scalar kernel |x|^alpha."""
    if not alpha > -d:
        raise ValueError(f"alpha must exceed -d = {-d}")
    if _scalar_degenerate(alpha):
        return 0.0
    p = 1.0 / (1.0 + alpha / d)
    base = _safe_gamma((d + alpha) / 2) * abs(float(rgamma(-alpha / 2))) / math.pi ** (alpha / 2)
    return base**p / math.gamma(d / 2 + 1)


def nu_coefficient(alpha: float, d: int) -> float:
    """Asymptotic coefficient of the gradient kernel grad |x|^(alpha+1)."""
    if not alpha > -d:
        raise ValueError(f"alpha must exceed -d = {-d}")
    if _gradient_degenerate(alpha):
        return 0.0
    p = 1.0 / (1.0 + alpha / d)
    base = abs((alpha + 1) * _safe_gamma((d + alpha + 1) / 2) * float(rgamma((1 - alpha) / 2))) / math.pi ** (
        alpha / 2
    )
    return base**p / math.gamma(d / 2 + 1)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def sphere_factor(spec: HomogeneousKernelSpec) -> float:
    """(1 / (d (2 pi)^d)) * integral of |X_inf|^p over the unit sphere.

    Both families have |X_inf| constant on the sphere, so the integral is the
    sphere area times one symbol value.
    """
    d = spec.d
    return sphere_area(d) * abs(fourier_symbol(spec, 1.0)) ** spec.p / (d * (2 * math.pi) ** d)


# --------------------------------------------------------------------------
# Model operator weights
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelWeightProfile:
    """Weight h(t) on R^3 built from the families b_{j,k}, beta_{j,k}.

    ``h`` maps points of shape (..., 3) to nonnegative values. ``radius`` is
    the distance beyond which h stays below 1e-12 (``None`` until computed by
    :meth:`effective_radius`).
    """

    h: Callable[[np.ndarray], np.ndarray]
    radius: float | None = None

    def __call__(self, t) -> np.ndarray:
        return self.h(np.asarray(t, dtype=float))

    def effective_radius(self, threshold: float = 1e-12, r_probe: float = 30.0, n_probe: int = 121) -> float:
        if self.radius is not None:
            return self.radius
        dirs = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1],
                         [1, 1, 1], [-1, -1, -1]], dtype=float)
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = np.linspace(0.0, r_probe, n_probe)
        pts = radii[:, None, None] * dirs[None, :, :]
        vals = np.abs(self(pts)).max(axis=1)
        above = np.nonzero(vals >= threshold)[0]
        return float(radii[min(above[-1] + 1, n_probe - 1)]) if above.size else 0.0


def model_weight_profile(b, beta=None, n_particles: int = 3, *, quad_nodes: int = 48,
                         box: float = 6.0) -> ModelWeightProfile:
    """Weight profile h for the N-particle model operator, N = 2 or 3.

    Parameters
    ----------
    b : nested sequence of callables
        ``b[j][k]`` for j < N, k < N - 1, each mapping points of shape
        (..., 3(N-1)) to values.
    beta : nested sequence of callables, optional
        ``beta[j][k](xhat, x)`` with xhat of shape (..., 3(N-1)) and x of
        shape (..., 3). Defaults to 1.
    quad_nodes, box :
        Tensor Gauss-Legendre order per axis and half-width of the cube used
        for the integral over the spectator particle when N = 3. The
        defaults integrate unit-width Gaussians to about 1e-12; wider or
        rougher weights need larger values.
    """
    n = int(n_particles)
    if n not in (2, 3):
        raise ValueError("model weight profiles are implemented for N = 2 and N = 3")
    if len(b) != n or any(len(row) != n - 1 for row in b):
        raise ValueError(f"b must be an {n} x {n - 1} array of callables")
    if beta is None:
        beta = [[None] * (n - 1) for _ in range(n)]

    if n == 2:
        def h(t):
            t = np.asarray(t, dtype=float)
            acc = np.zeros(t.shape[:-1])
            for j in range(2):
                val = b[j][0](t)
                if beta[j][0] is not None:
                    val = val * beta[j][0](t, t)
                acc = acc + np.abs(val) ** 2
            return np.sqrt(acc)
        return ModelWeightProfile(h)

    ys, wy = tensor_gauss_legendre(quad_nodes, -box, box, 3)

    def h(t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1, 3)
        out = np.empty(flat.shape[0])
        for i, tv in enumerate(flat):
            tt = np.broadcast_to(tv, ys.shape)
            acc = 0.0
            for k in range(2):
                # particle k (0-based) sits at t, the spectator runs over the cube
                xhat = np.concatenate([tt, ys], axis=-1) if k == 0 else np.concatenate([ys, tt], axis=-1)
                for j in range(3):
                    val = b[j][k](xhat)
                    if beta[j][k] is not None:
                        val = val * beta[j][k](xhat, tt)
                    acc += float(np.dot(wy, np.abs(val) ** 2))
            out[i] = math.sqrt(acc)
        return out.reshape(t.shape[:-1])

    return ModelWeightProfile(h)


def _integrate_power(f, d: int, p: float, radius: float, n: int) -> float:
    pts, w = tensor_gauss_legendre(n, -radius, radius, d)
    if d == 1:
        pts = pts[:, 0]
    return float(np.dot(w, np.abs(f(pts)) ** p))


def model_coefficient(spec: HomogeneousKernelSpec, a_profile, h_profile, *, radius: float | None = None,
                      nodes: int = 48, rtol: float = 1e-8) -> float:
    """Asymptotic coefficient G_p = g_p of the model operator with weights a, h.

    Equals ``sphere_factor(spec) * integral |a h|^p dx`` over R^d; for the
    scalar kernel with alpha = 1, d = 3 this is mu_{1,3} * integral |a h|^(3/4).

    Raises
    ------
    UnderResolvedError
        When doubling the per-axis quadrature order moves the integral by
        more than ``rtol`` (relative).
    """
    if radius is None:
        radii = [getattr(prof, "effective_radius", None) for prof in (a_profile, h_profile)]
        radii = [r() for r in radii if r is not None]
        if not radii:
            raise ValueError("radius is required when neither profile reports an effective radius")
        radius = min(radii)
    if radius <= 0:
        return 0.0
    factor = sphere_factor(spec)
    if factor == 0.0:
        return 0.0

    def prod(x):
        return a_profile(x) * h_profile(x)

    coarse = _integrate_power(prod, spec.d, spec.p, radius, nodes)
    fine = _integrate_power(prod, spec.d, spec.p, radius, 2 * nodes)
    if abs(fine - coarse) > rtol * max(abs(fine), 1e-300):
        raise UnderResolvedError(
            f"weight integral moved from {coarse:.12g} to {fine:.12g} under refinement", coarse, fine
        )
    return factor * fine


# --------------------------------------------------------------------------
# 1-D Nystrom check of the homogeneous-kernel law
# --------------------------------------------------------------------------


def _orthonormal_legendre(t: np.ndarray, m: int) -> np.ndarray:
    """Rows are sqrt((2i+1)/2) P_i(t), i < m, on the reference interval."""
    vander = np.polynomial.legendre.legvander(t, m - 1)
    return (vander * np.sqrt((2 * np.arange(m) + 1) / 2.0)).T


def _one_sided(spec, outer_w, inner_w, x0, x1, xs, tj, wj, m, sign_right):
    # G[i, j] = int phi_i(x) outer(x) int Phi(x - y) inner(y) phi_j(y) dy dx,
    # with the inner integral split at y = x so each part is smooth.
    alpha = spec.alpha
    coef = 1.0 if spec.family is KernelFamily.SCALAR_ABS else alpha + 1.0
    half = 0.5 * (x1 - x0)
    hl = 0.5 * (xs - x0)
    hr = 0.5 * (x1 - xs)
    yl = x0 + hl[:, None] * (1.0 + tj[None, :])
    yr = x1 - hr[:, None] * (1.0 + tj[None, :])
    fl = (hl[:, None] ** (alpha + 1)) * wj[None, :] * inner_w(yl)
    fr = sign_right * (hr[:, None] ** (alpha + 1)) * wj[None, :] * inner_w(yr)
    q = xs.size
    basis_l = _orthonormal_legendre(((yl - x0) / half - 1.0).ravel(), m).reshape(m, q, -1)
    basis_r = _orthonormal_legendre(((yr - x0) / half - 1.0).ravel(), m).reshape(m, q, -1)
    inner = (np.einsum("qs,jqs->qj", fl, basis_l) + np.einsum("qs,jqs->qj", fr, basis_r)) / math.sqrt(half)
    return coef * inner


def _diagonal_block(spec: HomogeneousKernelSpec, x0: float, x1: float, m: int, q: int) -> np.ndarray:
    """Galerkin block of one panel against itself in piecewise-Legendre coordinates."""
    xo, wo = gauss_legendre(q)
    tj, wj = roots_jacobi(q, spec.alpha, 0.0)
    half = 0.5 * (x1 - x0)
    xs = x0 + half * (xo + 1.0)
    phi_out = _orthonormal_legendre(xo, m) / math.sqrt(half)
    parity = 1.0 if spec.family is KernelFamily.SCALAR_ABS else -1.0
    g_ba = (phi_out * (half * wo * spec.b(xs))) @ _one_sided(spec, spec.b, spec.a, x0, x1, xs, tj, wj, m, parity)
    g_ab = (phi_out * (half * wo * spec.a(xs))) @ _one_sided(spec, spec.a, spec.b, x0, x1, xs, tj, wj, m, parity)
    # Averaging with the transposed (a <-> b) evaluation keeps the discrete
    # operator exactly (anti)symmetric under exchange of the weights.
    return 0.5 * (g_ba + parity * g_ab.T)


def _nystrom_values(spec, n, L, panel_order, kernel) -> np.ndarray:
    n_panels = n // panel_order
    x, w, edges = composite_gauss_legendre(n_panels, panel_order, -L, L)
    sw = np.sqrt(w)
    phi = spec.kernel if kernel is None else kernel
    with np.errstate(divide="ignore"):
        mat = (sw * spec.b(x))[:, None] * phi(x[:, None] - x[None, :]) * (sw * spec.a(x))[None, :]

    if kernel is None:
        ref_x, ref_w = gauss_legendre(panel_order)
        # columns: orthonormal Legendre coordinates -> sqrt-weighted nodal values
        to_nodes = np.sqrt(ref_w)[:, None] * _orthonormal_legendre(ref_x, panel_order).T
        q = panel_order + 8
        for p in range(n_panels):
            block = _diagonal_block(spec, edges[p], edges[p + 1], panel_order, q)
            sl = slice(p * panel_order, (p + 1) * panel_order)
            mat[sl, sl] = to_nodes @ block @ to_nodes.T

    return np.linalg.svd(mat, compute_uv=False)


def nystrom_1d_spectrum(spec: HomogeneousKernelSpec, n: int = 2000, L: float = 6.0, *,
                        panel_order: int = 20, kernel: Callable | None = None,
                        refine: bool = True) -> SpectrumSeries:
    """Singular values of ``b(x) Phi(x - y) a(y)`` discretised on [-L, L].

    The matrix is ``sqrt(w_i) b(x_i) Phi(x_i - x_j) a(x_j) sqrt(w_j)`` on
    composite Gauss-Legendre panels. Panel-diagonal blocks are replaced by
    their Galerkin values in the panel's Legendre basis, integrated with the
    kink (or singularity) at x = y split out; this restores high-order
    accuracy that plain Nystrom loses across the non-smooth diagonal.

    Passing ``kernel`` (a function of the difference x - y) switches to plain
    Nystrom with that smooth kernel in place of the homogeneous family.

    ``trust_k`` is the rank up to which a run with n/2 nodes agrees within
    5% (skipped when ``refine`` is false or n/2 is not a valid size), capped
    by the count of values above 1e-13 s_1.
    """
    if spec.d != 1:
        raise ValueError("the Nystrom check is one-dimensional")
    if n < 64:
        raise ValueError(f"n = {n} is too small for asymptotic statements (need n >= 64)")
    if n % panel_order:
        raise ValueError(f"n = {n} is not a multiple of the panel order {panel_order}")
    if kernel is None and not spec.alpha > -0.5:
        raise ValueError("the Nystrom check needs alpha > -1/2")
    s = _nystrom_values(spec, n, L, panel_order, kernel)
    floor = SPECTRUM_FLOOR * (s[0] if s.size else 0.0)
    above_floor = int(np.count_nonzero(s > floor))
    trust = above_floor
    resolved = None
    half = n // 2
    if refine and half >= 64 and half % panel_order == 0:
        coarse = _nystrom_values(spec, half, L, panel_order, kernel)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(s[:half] - coarse) / np.abs(s[:half])
        bad = np.nonzero(~(rel <= REFINEMENT_TOL))[0]
        resolved = int(bad[0]) if bad.size else half
        trust = min(trust, resolved)
    meta = {"n": n, "L": L, "panel_order": panel_order, "alpha": spec.alpha, "family": spec.family.value,
            "floor": floor, "above_floor": above_floor, "resolution_trust": resolved}
    return SpectrumSeries.from_values(s, trust_k=trust, metadata=meta)
