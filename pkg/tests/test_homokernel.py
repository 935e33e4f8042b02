import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspspectra.errors import DomainError, UnderResolvedError
from cuspspectra.homokernel import (
    HomogeneousKernelSpec,
    KernelFamily,
    ModelWeightProfile,
    Weight,
    _safe_gamma,
    fourier_symbol,
    model_coefficient,
    model_weight_profile,
    mu_coefficient,
    nu_coefficient,
    nystrom_1d_spectrum,
    sphere_factor,
)
from cuspspectra.spectral_analysis import plateau_estimate

from oracles import gaussian_law_limit


def spec(alpha, d=1, family="scalar_abs", a=None, b=None):
    return HomogeneousKernelSpec(alpha, d, family, a=a or Weight(dim=d), b=b or Weight(dim=d))


# -- constants and symbols --------------------------------------------------


def test_mu_closed_forms():
    assert math.isclose(mu_coefficient(1, 3), (2 / math.pi) ** 1.25 / 3, rel_tol=1e-14)
    assert math.isclose(mu_coefficient(1, 1), math.sqrt(2) / math.pi, rel_tol=1e-14)


def test_nu_for_sign_kernel():
    # b(x) sign(x - y) a(y) on [0, 1] has s_k ~ 2 / (pi k)
    assert math.isclose(nu_coefficient(0, 1), 2 / math.pi, rel_tol=1e-14)


@pytest.mark.parametrize("alpha,d,value", [
    (1.0, 1, -2.0),                # |x|      -> -2 / xi^2
    (-0.5, 1, math.sqrt(2 * math.pi)),  # |x|^-1/2 -> sqrt(2 pi) / xi^1/2
    (-1.0, 3, 4 * math.pi),        # 1/|x|    -> 4 pi / xi^2
    (1.0, 3, -8 * math.pi),        # |x|      -> -8 pi / xi^4
])
def test_scalar_symbols_match_known_transforms(alpha, d, value):
    assert math.isclose(fourier_symbol(spec(alpha, d), 1.0), value, rel_tol=1e-13)


@given(st.floats(-0.9, 3.0), st.sampled_from([1, 2, 3]), st.floats(0.1, 10))
@settings(max_examples=60, deadline=None)
def test_gradient_symbol_is_xi_times_scalar_symbol(alpha, d, xi):
    grad = spec(alpha, d, "gradient")
    scal = spec(alpha + 1, d)
    if grad.degenerate:
        assert fourier_symbol(grad, xi) == 0.0
        return
    assert math.isclose(fourier_symbol(grad, xi), xi * abs(fourier_symbol(scal, xi)), rel_tol=1e-11)


@given(st.floats(-0.95, 4.0), st.sampled_from([1, 2, 3]), st.sampled_from(list(KernelFamily)),
       st.floats(0.2, 5.0), st.floats(0.1, 20.0))
@settings(max_examples=100, deadline=None)
def test_symbol_homogeneity(alpha, d, family, xi, t):
    sp = spec(alpha, d, family)
    lhs = fourier_symbol(sp, t * xi)
    rhs = t ** (-(alpha + d)) * fourier_symbol(sp, xi)
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=0.0)


@given(st.floats(-0.95, 4.0), st.sampled_from([1, 2, 3]))
@settings(max_examples=60, deadline=None)
def test_sphere_identity(alpha, d):
    assert math.isclose(sphere_factor(spec(alpha, d)), mu_coefficient(alpha, d), rel_tol=1e-10, abs_tol=1e-300)
    assert math.isclose(sphere_factor(spec(alpha, d, "gradient")), nu_coefficient(alpha, d), rel_tol=1e-10,
                        abs_tol=1e-300)


def test_degenerate_orders_vanish():
    for alpha in (0.0, 2.0, 4.0):
        assert fourier_symbol(spec(alpha, 3), 2.0) == 0.0
        assert mu_coefficient(alpha, 3) == 0.0
    for alpha in (1.0, 3.0):
        assert fourier_symbol(spec(alpha, 2, "gradient"), 2.0) == 0.0
        assert nu_coefficient(alpha, 2) == 0.0


def test_gamma_poles_raise():
    with pytest.raises(DomainError):
        _safe_gamma(-2.0)
    with pytest.raises(DomainError):
        _safe_gamma(0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(-1.0, 1)
    with pytest.raises(ValueError):
        spec(1.0, 4)
    with pytest.raises(ValueError):
        HomogeneousKernelSpec(1.0, 3, a=Weight(dim=1), b=Weight(dim=3))
    with pytest.raises(ValueError):
        spec(1.0, 1, "laplacian")
    assert spec(1.0, 3).p == 0.75 and spec(1.0, 3).tau == 4.0


# -- weights and coefficients -----------------------------------------------


def test_weights():
    g = Weight("gaussian", 2.0, center=1.0)
    assert math.isclose(g(1.5), math.exp(-0.5))
    bump = Weight("bump", 2.0, dim=2)
    assert bump(np.array([0.0, 0.0])) == 1.0
    assert bump(np.array([2.0, 0.0])) == 0.0
    assert bump(np.array([[3.0, 0.0], [0.0, 1.0]])).shape == (2,)
    assert bump.effective_radius() == 2.0
    with pytest.raises(ValueError):
        Weight("box")


def test_model_coefficient_gaussian_example():
    # a = h = e^{-|x|^2/2}: mu_{1,3} * int e^{-3|x|^2/4} = mu_{1,3} (4 pi / 3)^{3/2}
    g = Weight("gaussian", 0.5, dim=3)
    got = model_coefficient(spec(1.0, 3, a=g, b=g), g, g)
    assert math.isclose(got, mu_coefficient(1, 3) * (4 * math.pi / 3) ** 1.5, rel_tol=1e-9)
    assert math.isclose(got, 1.625032, rel_tol=1e-6)


def test_model_coefficient_detects_under_resolution():
    narrow = Weight("gaussian", 400.0, dim=1)
    with pytest.raises(UnderResolvedError):
        model_coefficient(spec(1.0, 1), narrow, Weight(dim=1), radius=10.0, nodes=8)


def test_model_coefficient_disjoint_supports_vanish():
    a = Weight("bump", 1.0, center=-2.0)
    b = Weight("bump", 1.0, center=2.0)
    assert model_coefficient(spec(1.0, 1, a=a, b=b), a, b, radius=4.0) == 0.0


def test_model_weight_profile_two_particles():
    b = [[lambda x: np.exp(-np.sum(x**2, -1))], [lambda x: 2 * np.exp(-np.sum(x**2, -1))]]
    h = model_weight_profile(b, n_particles=2)
    t = np.array([[0.3, 0.0, 0.4], [0.0, 0.0, 0.0]])
    assert np.allclose(h(t), math.sqrt(5) * np.exp(-np.sum(t**2, -1)))


def test_model_weight_profile_three_particles():
    def gauss(x):
        return np.exp(-np.sum(x**2, -1))

    b = [[gauss, gauss] for _ in range(3)]
    t = np.array([[0.5, -0.2, 0.1], [1.0, 1.0, 0.0]])
    r2 = np.sum(t**2, -1)
    h = model_weight_profile(b, n_particles=3)
    assert np.allclose(h(t), np.sqrt(6 * (math.pi / 2) ** 1.5 * np.exp(-2 * r2)), rtol=1e-9)
    beta = [[lambda xh, x: np.exp(-np.sum(x**2, -1))] * 2 for _ in range(3)]
    hb = model_weight_profile(b, beta, n_particles=3)
    assert np.allclose(hb(t), np.sqrt(6 * (math.pi / 2) ** 1.5 * np.exp(-4 * r2)), rtol=1e-9)
    assert isinstance(hb, ModelWeightProfile)
    # h = 3.43 e^{-|t|^2} drops below 1e-12 near |t| = 5.4
    assert 5.0 < h.effective_radius() < 6.0


def test_model_weight_profile_rejects_bad_shapes():
    with pytest.raises(ValueError):
        model_weight_profile([[None]], n_particles=4)
    with pytest.raises(ValueError):
        model_weight_profile([[None], [None]], n_particles=3)


# -- 1-D Nystrom -------------------------------------------------------------


@pytest.fixture(scope="module")
def gaussian_run():
    g = Weight("gaussian", 1.0)
    return nystrom_1d_spectrum(spec(1.0, a=g, b=g), 1000, 6.0)


def test_law_inside_trusted_window(gaussian_run):
    est = plateau_estimate(gaussian_run, 0.5, (40, gaussian_run.trust_k))
    assert est.trusted
    assert abs(est.scaled_median / gaussian_law_limit() - 1) < 0.03


def test_trust_index_tracks_resolution(gaussian_run):
    assert 40 < gaussian_run.trust_k < 200
    with pytest.raises(ValueError):
        plateau_estimate(gaussian_run, 0.5, (40, 300))
    est = plateau_estimate(gaussian_run, 0.5, (40, 300), allow_untrusted=True)
    assert not est.trusted


def test_diagonal_correction_beats_plain_nystrom(gaussian_run):
    g = Weight("gaussian", 1.0)
    sp = spec(1.0, a=g, b=g)
    plain = nystrom_1d_spectrum(sp, 1000, 6.0, kernel=sp.kernel, refine=False)
    k = np.arange(40, 81)
    target = gaussian_law_limit()
    corrected = np.median(k**2 * gaussian_run.expanded()[39:80])
    raw = np.median(k**2 * plain.expanded()[39:80])
    assert abs(corrected / target - 1) < 0.03 < abs(raw / target - 1)


@pytest.mark.parametrize("alpha,family", [(0.5, "scalar_abs"), (0.0, "gradient"), (1.5, "scalar_abs")])
def test_law_for_other_orders(alpha, family):
    g = Weight("gaussian", 1.0)
    sp = spec(alpha, 1, family, a=g, b=g)
    series = nystrom_1d_spectrum(sp, 2000, 6.0)
    target = model_coefficient(sp, g, g) ** (1 / sp.p)
    k = 60
    assert k <= series.trust_k
    assert abs(k ** (1 / sp.p) * series.expanded()[k - 1] / target - 1) < 0.05


def test_exchange_symmetry_of_weights():
    a = Weight("gaussian", 1.0, center=0.3)
    b = Weight("bump", 2.5, center=-0.2)
    for family in ("scalar_abs", "gradient"):
        s1 = nystrom_1d_spectrum(spec(1.0, 1, family, a=a, b=b), 200, 3.0, refine=False).values
        s2 = nystrom_1d_spectrum(spec(1.0, 1, family, a=b, b=a), 200, 3.0, refine=False).values
        assert np.allclose(s1[:50], s2[:50], rtol=1e-10, atol=1e-14 * s1[0])


def test_disjoint_supports_give_rapid_decay():
    a = Weight("bump", 1.0, center=-2.0)
    b = Weight("bump", 1.0, center=2.0)
    s = nystrom_1d_spectrum(spec(1.0, a=a, b=b), 400, 4.0).expanded()
    assert s[10] < 1e-12 * s[0]


def test_smooth_kernel_collapse():
    g = Weight("gaussian", 1.0)
    s = nystrom_1d_spectrum(spec(1.0, a=g, b=g), 400, 6.0, kernel=lambda z: np.exp(-z * z)).expanded()
    assert s[59] < 1e-12


def test_nystrom_argument_checks():
    g = Weight("gaussian", 1.0)
    with pytest.raises(ValueError):
        nystrom_1d_spectrum(spec(1.0, a=g, b=g), 40)
    with pytest.raises(ValueError):
        nystrom_1d_spectrum(spec(1.0, a=g, b=g), 210)
    with pytest.raises(ValueError):
        nystrom_1d_spectrum(spec(-0.6, a=g, b=g), 200)
    with pytest.raises(ValueError):
        nystrom_1d_spectrum(spec(1.0, 3), 200)
