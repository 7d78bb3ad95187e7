"""Closed-form identities: profile residuals, potential identity, Wronskian,
factorization kernel, and extended-precision pinning of every constant."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ymheat.closed_forms import (
    DEFAULT_CONSTANTS,
    SQRT6,
    DimensionParams,
    blowup_solution,
    factorization_ops,
    nonlinearity_coeffs,
    potential_inf_coeffs,
    potential_taylor_coeffs,
    potential_v,
    potential_v_form,
    second_solution,
    susy_beta,
    susy_potential,
    susy_potential_form,
    symmetry_mode,
    weinkove_profile,
)
from ymheat.grids import RadialField, RadialGrid

mpmath.mp.dps = 50


# ---------------------------------------------------------------------------
# extended-precision reference values (pinned once, frozen below)
# ---------------------------------------------------------------------------

def _mp_constants():
    s6 = mpmath.sqrt(6)
    a1 = mpmath.sqrt(mpmath.mpf(3) / 2) / 2
    a2 = (18 - 7 * s6) / 2
    return s6, a1, a2


def test_constants_against_extended_precision():
    s6, a1, a2 = _mp_constants()
    p = DimensionParams(5)
    # double evaluation of the square-root expressions is exact to a few ulps
    assert abs(p.a1 - float(a1)) < 4 * np.finfo(float).eps
    assert abs(p.a2 - float(a2)) < 16 * np.finfo(float).eps
    # the two printed forms of a1 agree: sqrt(3)/(2 sqrt(2)) = (1/2) sqrt(3/2)
    assert abs(float(mpmath.sqrt(3) / (2 * mpmath.sqrt(2)) - a1)) < 1e-49
    assert abs(DEFAULT_CONSTANTS.c0 - float(6 * s6 - 14)) < 32 * np.finfo(float).eps


def test_pinned_reference_values():
    """Values computed at 50 digits and frozen to double precision."""
    s6, a1, a2 = _mp_constants()
    w0 = float(-1 / a2)               # profile at the origin
    v0 = float(72 / (36 - 14 * s6))   # potential at the origin
    g0 = float(a2**-2)                # symmetry mode at the origin
    assert w0 == pytest.approx(-2.3430952132988163, rel=1e-14)
    assert v0 == pytest.approx(42.175713839378695, rel=1e-15)
    assert g0 == pytest.approx(5.490095178583826, rel=1e-14)
    p = DimensionParams(5)
    W = weinkove_profile(p)
    assert W(0.0) == pytest.approx(w0, rel=1e-14)
    assert potential_v(0.0) == pytest.approx(v0, rel=1e-14)
    assert symmetry_mode()(0.0) == pytest.approx(g0, rel=1e-14)


def test_dimension_params_validation():
    for d in (4, 10, 37):
        with pytest.raises(ValueError):
            DimensionParams(d)
    for d in range(5, 10):
        p = DimensionParams(d)
        assert p.a1 > 0
        assert p.a2 > 0


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------

def _profile_ode_residual(d: int, rho: np.ndarray) -> np.ndarray:
    """lap_rad W - (rho/2) W' - W - 3(d-2) W^2 - (d-2) rho^2 W^3 with the
    d-dimensional equivariant Laplacian u'' + (d+1) u'/rho."""
    p = DimensionParams(d)
    W = weinkove_profile(p)
    w, wp, wpp = W(rho), W.deriv1(rho), W.deriv2(rho)
    return (
        wpp
        + (d + 1) / rho * wp
        - rho / 2 * wp
        - w
        - 3 * (d - 2) * w**2
        - (d - 2) * rho**2 * w**3
    )


@pytest.mark.parametrize("d", range(5, 10))
def test_profile_static_ode_residual(d):
    rho = np.logspace(-2, 2, 100)
    res = _profile_ode_residual(d, rho)
    assert np.max(np.abs(res)) < 1e-10


def test_profile_spot_values():
    p = DimensionParams(5)
    W = weinkove_profile(p)
    assert W(0.0) == pytest.approx(-2.3430952132988163, abs=1e-12)
    # leading asymptotics W rho^2 -> -1/a1 = -2 sqrt(2/3)
    rho = 1e6
    assert W(rho) * rho**2 == pytest.approx(-2 * math.sqrt(2 / 3), rel=1e-10)
    assert rho == 1e6


def test_profile_derivatives_match_finite_differences():
    W = weinkove_profile(DimensionParams(5))
    rho = np.linspace(0.1, 20, 77)
    h = 1e-5
    fd1 = (W(rho + h) - W(rho - h)) / (2 * h)
    fd2 = (W(rho + h) - 2 * W(rho) + W(rho - h)) / h**2
    assert np.max(np.abs(fd1 - W.deriv1(rho))) < 1e-8
    assert np.max(np.abs(fd2 - W.deriv2(rho))) < 1e-5


def test_blowup_solution_values_and_domain():
    p = DimensionParams(5)
    assert blowup_solution(p, 1.0, 0.0, 0.0) == pytest.approx(-2.3430952132988163, abs=1e-12)
    W = weinkove_profile(p)
    assert blowup_solution(p, 2.0, 1.0, 1.0) == pytest.approx(float(W(1.0)), rel=1e-14)
    # approach to blowup: (T-t) w_T(t, 0) = W(0) exactly
    for t in (0.9, 0.99, 0.999999):
        assert (1 - t) * blowup_solution(p, 1.0, t, 0.0) == pytest.approx(float(W(0.0)))
    with pytest.raises(ValueError):
        blowup_solution(p, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        blowup_solution(p, 1.0, 2.0, 0.0)


@settings(max_examples=25, deadline=None)
@given(
    lam=st.sampled_from([0.5, 2.0]),
    t=st.floats(0.0, 0.2),
    r=st.floats(0.0, 5.0),
)
def test_blowup_scaling_covariance(lam, t, r):
    """lam^2 w_1(lam^2 t, lam r) = w_{1/lam^2}(t, r) pointwise."""
    p = DimensionParams(5)
    lhs = lam**2 * blowup_solution(p, 1.0, lam**2 * t, lam * r)
    rhs = blowup_solution(p, lam**-2, t, r)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------

def test_potential_identity_with_profile():
    rho = np.concatenate([[0.0, 1.0, 3.0, 10.0], np.linspace(0, 100, 401)])
    W = weinkove_profile(DimensionParams(5))
    v = potential_v(rho)
    resid = np.abs(v + 18 * W(rho) + 9 * rho**2 * W(rho) ** 2)
    assert np.all(resid < 1e-12 * np.abs(v))


def test_potential_printed_rational_form():
    rho = np.linspace(0.0, 50.0, 301)
    printed = 72 * (36 - 14 * SQRT6 + (SQRT6 - 2) * rho**2) / (36 - 14 * SQRT6 + SQRT6 * rho**2) ** 2
    assert np.max(np.abs(potential_v(rho) - printed) / np.abs(printed)) < 1e-13


def test_potential_asymptotics_and_derivatives():
    assert potential_v(0.0) == pytest.approx(42.175713839378695, rel=1e-13)
    rho = 1e5
    assert potential_v(rho) * rho**2 == pytest.approx(72 * (SQRT6 - 2) / 6, rel=1e-8)
    V = potential_v_form()
    rr = np.linspace(0.1, 20, 55)
    h = 1e-5
    fd1 = (V(rr + h) - V(rr - h)) / (2 * h)
    fd2 = (V(rr + h) - 2 * V(rr) + V(rr - h)) / h**2
    assert np.max(np.abs(fd1 - V.deriv1(rr))) < 2e-7
    assert np.max(np.abs(fd2 - V.deriv2(rr))) < 2e-4
    with pytest.raises(ValueError):
        potential_v(-1.0)


def test_potential_taylor_series_vs_richardson_differences():
    """The exact rational expansion against Richardson-extrapolated central
    differences of the closed form, through order rho^8."""
    v = potential_taylor_coeffs(5)
    V = potential_v_form()

    def dcoef(k):
        # (2k)-th Taylor coefficient via central differences in tau = rho^2
        # of the even function: fit V(sqrt(tau)) by polynomial on tiny taus
        taus = np.array([1e-3 * (j + 1) for j in range(8)])
        vals = V(np.sqrt(taus))
        co = np.polyfit(taus, vals, 6)
        return co[::-1][k]

    for k in range(5):
        assert dcoef(k) == pytest.approx(v[k], rel=5e-5)


def test_potential_inf_expansion():
    v = potential_inf_coeffs(4)
    rho = np.array([30.0, 50.0, 80.0])
    approx = sum(v[j] * rho ** (-2.0 * j) for j in range(1, 5))
    assert np.max(np.abs(approx - potential_v(rho)) / np.abs(potential_v(rho))) < 1e-9


# ---------------------------------------------------------------------------
# symmetry mode, second solution, Wronskian
# ---------------------------------------------------------------------------

def _eigen_residual_lambda1(cf, rho):
    """u'' + 6 u'/rho - (rho/2) u' + V u - 2 u for the eigenvalue-one ODE."""
    u, up, upp = cf(rho), cf.deriv1(rho), cf.deriv2(rho)
    return upp + 6 / rho * up - rho / 2 * up + potential_v(rho) * u - 2 * u


def test_symmetry_mode_eigen_residual():
    g = symmetry_mode()
    rho = np.array([0.25, 1.0, 4.0, 16.0])
    assert np.max(np.abs(_eigen_residual_lambda1(g, rho))) < 1e-10


def test_symmetry_mode_normalization():
    g = symmetry_mode()
    a1, a2 = DEFAULT_CONSTANTS.a1, DEFAULT_CONSTANTS.a2
    rho = np.linspace(0, 30, 97)
    assert np.max(np.abs(g(rho) * (a1 * rho**2 + a2) ** 2 - 1)) < 1e-12
    assert g(0.0) == pytest.approx(5.490095178583826, rel=1e-13)


def test_second_solution_wronskian():
    """g h' - g' h = rho^-6 e^(rho^2/4); the identity fixes h's normalization."""
    g = symmetry_mode()
    h = second_solution()
    rho = np.linspace(0.25, 6.0, 121)
    wr = g(rho) * h.deriv1(rho) - g.deriv1(rho) * h(rho)
    target = rho**-6.0 * np.exp(rho**2 / 4)
    assert np.max(np.abs(wr / target - 1)) < 1e-8


def test_second_solution_eigen_residual():
    h = second_solution()
    rho = np.array([0.5, 2.0])
    res = _eigen_residual_lambda1(h, rho)
    assert np.max(np.abs(res) / np.abs(h(rho))) < 1e-8


def test_second_solution_origin_blowup_rate():
    h = second_solution()
    vals = [rho**5 * h(rho) for rho in (1e-2, 1e-3, 1e-4)]
    # finite nonzero limit; successive values converge
    assert abs(vals[2]) > 1e-3
    assert vals[1] == pytest.approx(vals[2], rel=1e-4)
    with pytest.raises(ValueError):
        h(0.0)


def test_second_solution_derivatives_match_finite_differences():
    h = second_solution()
    rho = np.linspace(0.4, 5.0, 41)
    d = 1e-6
    fd1 = (h(rho + d) - h(rho - d)) / (2 * d)
    assert np.max(np.abs(fd1 - h.deriv1(rho)) / np.abs(h.deriv1(rho))) < 1e-7
    d = 1e-4
    fd2 = (h(rho + d) - 2 * h(rho) + h(rho - d)) / d**2
    assert np.max(np.abs(fd2 - h.deriv2(rho)) / np.abs(h.deriv2(rho))) < 1e-6


def test_interior_integral_quadrature_and_asymptotics():
    """The Dawson-function grouping against direct quadrature (rho <= 8) and
    against the large-rho asymptotic expansion (rho > 8)."""
    from scipy.integrate import quad
    from scipy.special import dawsn

    for rho in (0.5, 2.0, 5.0, 8.0):
        val, err = quad(lambda s: math.exp((s**2 - rho**2) / 4), 0, rho,
                        epsabs=1e-13, limit=200)
        assert 2 * dawsn(rho / 2) == pytest.approx(val, abs=5e-13)
    for rho in (9.0, 12.0, 20.0):
        # e^(-rho^2/4) int_0^rho e^(s^2/4) ds ~ (2/rho)(1 + 2/rho^2 + 12/rho^4)
        asym = (2 / rho) * (1 + 2 / rho**2 + 12 / rho**4)
        assert 2 * dawsn(rho / 2) == pytest.approx(asym, rel=1e-3)


# ---------------------------------------------------------------------------
# supersymmetric factorization
# ---------------------------------------------------------------------------

def test_susy_potential_values_and_inequalities():
    s6, _, _ = _mp_constants()
    # pinned 50-digit evaluation of q(5/2)
    rho = mpmath.mpf(5) / 2
    Q = (384 * s6 - rho**2 * (rho**2 + 24 * s6 - 44) - 956) / (rho**2 + 6 * s6 - 14) ** 2
    q_ref = float(rho**2 / 16 + 12 / rho**2 + mpmath.mpf(3) / 4 + Q)
    assert q_ref == pytest.approx(0.017068422455876735, rel=1e-12)
    assert susy_potential(2.5) == pytest.approx(q_ref, rel=1e-13)
    assert susy_potential(2.5) > 1 / 75
    # monotone growth toward infinity
    assert susy_potential(50.0) > susy_potential(10.0) > susy_potential(2.5)
    with pytest.raises(ValueError):
        susy_potential(0.0)


def test_susy_potential_global_minimum_by_golden_section():
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(susy_potential, bounds=(1e-3, 2.5), method="bounded",
                          options={"xatol": 1e-12})
    rho_min, q_min = res.x, res.fun
    assert 1e-3 < rho_min < 2.5 - 1e-6
    assert (2.5) ** -2 + q_min > susy_potential(2.5)


def test_susy_potential_monotone_beyond_gamma():
    rho = np.linspace(2.5, 50.0, 1000)
    q = susy_potential(rho)
    assert np.all(np.diff(q) > 0)


def test_susy_potential_derivatives():
    q = susy_potential_form()
    rho = np.linspace(0.5, 10, 40)
    d = 1e-6
    fd1 = (q(rho + d) - q(rho - d)) / (2 * d)
    assert np.max(np.abs(fd1 - q.deriv1(rho))) < 1e-6
    d = 1e-4
    fd2 = (q(rho + d) - 2 * q(rho) + q(rho - d)) / d**2
    assert np.max(np.abs(fd2 - q.deriv2(rho))) < 1e-4


def test_factorization_identities():
    """q = beta^2 - beta' - 1 and the normal-form potential identity
    beta' + beta^2 = rho^2/16 + 6/rho^2 + 1/4 - V."""
    beta = susy_beta()
    rho = np.linspace(0.2, 25, 200)
    b, bp = beta(rho), beta.deriv1(rho)
    assert np.max(np.abs(susy_potential(rho) - (b**2 - bp - 1))) < 1e-10
    normal_pot = rho**2 / 16 + 6 / rho**2 + 0.25 - potential_v(rho)
    assert np.max(np.abs(bp + b**2 - normal_pot)) < 1e-10


def test_factorization_annihilates_transformed_symmetry_mode():
    grid = RadialGrid.uniform_positive(N=3000, R_max=10.0)
    g = symmetry_mode()
    rho = grid.nodes
    v = RadialField(grid, rho**3 * np.exp(-(rho**2) / 8) * g(rho))
    Bv, Bpv = factorization_ops(v)
    mask = (rho >= 0.2) & (rho <= 10.0)
    ratio = np.max(np.abs(Bv.values[mask])) / np.max(np.abs(v.values))
    assert ratio < 1e-8
    # B on the zero field is zero
    z = RadialField(grid, np.zeros_like(rho))
    assert np.max(np.abs(factorization_ops(z)[0].values)) == 0.0


def test_factorization_reproduces_normal_form_eigen_residual():
    """(lambda + B+B - 1) v = 0 for v built from the symmetry mode, lambda=1."""
    grid = RadialGrid.uniform_positive(N=4000, R_max=12.0)
    g = symmetry_mode()
    rho = grid.nodes
    v = RadialField(grid, rho**3 * np.exp(-(rho**2) / 8) * g(rho))
    Bv, _ = factorization_ops(v)
    _, BpBv = factorization_ops(Bv)
    res = BpBv.values + (1.0 - 1.0) * v.values
    mask = (rho >= 0.3) & (rho <= 10.0)
    assert np.max(np.abs(res[mask])) / np.max(np.abs(v.values)) < 1e-6


def test_factorization_rejects_origin_grid():
    grid = RadialGrid.uniform(N=64, R_max=8.0)
    v = RadialField(grid, np.exp(-grid.nodes**2))
    with pytest.raises(ValueError):
        factorization_ops(v)


# ---------------------------------------------------------------------------
# nonlinearity coefficients
# ---------------------------------------------------------------------------

def test_nonlinearity_coeffs():
    f1, f2 = nonlinearity_coeffs()
    W = weinkove_profile(DimensionParams(5))
    assert f1(0.0) == pytest.approx(-9.0, abs=1e-13)
    assert f2(2.0) == pytest.approx(-12.0, abs=1e-13)
    for rho in (0.0, 1.0, 10.0):
        assert f1(rho) + 9 * (1 + rho**2 * W(rho)) == pytest.approx(0.0, abs=1e-12)
    rr = np.linspace(0.1, 15, 44)
    d = 1e-5
    assert np.max(np.abs((f1(rr + d) - f1(rr - d)) / (2 * d) - f1.deriv1(rr))) < 1e-7
