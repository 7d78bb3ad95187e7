"""Grids, differentiation, quadrature, norms, weighted seminorms and the
Hardy inequality."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ymheat.closed_forms import DimensionParams, symmetry_mode, weinkove_profile
from ymheat.grids import RadialField, RadialGrid
from ymheat.norms import (
    SURFACE_S6,
    hardy_check,
    norm1,
    norm2,
    norm_H,
    radial_laplacian,
    weighted_seminorms,
)


@pytest.fixture(scope="module")
def ugrid():
    return RadialGrid.uniform(N=2048, R_max=40.0)


@pytest.fixture(scope="module")
def cgrid():
    return RadialGrid.chebyshev(N=192, R_max=40.0)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def test_grid_invariants(ugrid, cgrid):
    for grid in (ugrid, cgrid):
        assert grid.nodes[0] == 0.0
        assert np.all(np.diff(grid.nodes) > 0)
        assert grid.nodes[-1] == pytest.approx(grid.R_max)
        assert np.all(grid.weights > 0)
        assert grid.weights.sum() == pytest.approx(grid.R_max, rel=1e-12)


def test_differentiation_exact_on_even_monomials(ugrid, cgrid):
    # stencil-based grids handle even fields; exactness on rho^0, rho^2, rho^4
    for grid in (ugrid, cgrid):
        r = grid.nodes
        for k in (0, 2, 4):
            f = RadialField(grid, r**float(k))
            expect = k * r ** float(max(k - 1, 0)) if k else np.zeros_like(r)
            scale = max(1.0, np.max(np.abs(expect)))
            assert np.max(np.abs(f.deriv(1) - expect)) / scale < 1e-9


def test_chebyshev_exact_on_all_low_monomials(cgrid):
    r = cgrid.nodes
    for k in (1, 2, 3, 4):
        vals = r**float(k)
        d = cgrid.d1() @ vals
        scale = np.max(np.abs(k * r ** float(k - 1)))
        assert np.max(np.abs(d - k * r ** float(k - 1))) / scale < 1e-9


def test_quadrature_superconvergence(ugrid):
    f = np.exp(-ugrid.nodes**2)
    exact = math.sqrt(math.pi) / 2
    assert ugrid.integrate(f) == pytest.approx(exact, rel=1e-13)


def test_radial_laplacian_basics(ugrid):
    r = ugrid.nodes
    const = RadialField(ugrid, np.ones_like(r))
    assert np.max(np.abs(radial_laplacian(const).values)) < 1e-10
    quad = RadialField(ugrid, r**2)
    assert np.max(np.abs(radial_laplacian(quad).values - 14.0)) < 1e-7


def test_radial_laplacian_on_profile(ugrid):
    W = weinkove_profile(DimensionParams(5))
    f = RadialField.from_function(ugrid, W.eval)
    r = ugrid.nodes
    exact = np.empty_like(r)
    exact[1:] = W.deriv2(r[1:]) + 6 / r[1:] * W.deriv1(r[1:])
    exact[0] = 7 * W.deriv2(np.array([0.0]))[0]
    assert np.max(np.abs(radial_laplacian(f).values - exact)) < 5e-8


def test_odd_derivative_vanishes_at_origin(ugrid):
    f = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)) * (1 + r**2))
    assert abs(f.deriv(1)[0]) < 1e-12
    assert abs(f.deriv(3)[0]) < 1e-8


def test_field_resample_roundtrip(ugrid, cgrid):
    f = RadialField.from_function(cgrid, lambda r: np.exp(-(r**2) / 4))
    g = f.resample(ugrid)
    exact = np.exp(-(ugrid.nodes**2) / 4)
    assert np.max(np.abs(g.values - exact)) < 1e-7


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_norm1_identity_with_laplacian(ugrid):
    u = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)))
    direct = norm1(u) ** 2
    lap = radial_laplacian(u).values
    alt = float(ugrid.integrate(ugrid.nodes**6 * np.abs(lap) ** 2))
    assert direct == pytest.approx(alt, rel=1e-10)


def test_norm2_identity_with_iterated_laplacian(ugrid):
    u = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)))
    direct = norm2(u) ** 2
    lap2 = radial_laplacian(radial_laplacian(u)).values
    alt = float(ugrid.integrate(ugrid.nodes**6 * np.abs(lap2) ** 2))
    assert direct == pytest.approx(alt, rel=1e-8)


def test_norms_of_zero(ugrid):
    z = RadialField(ugrid, np.zeros_like(ugrid.nodes))
    assert norm1(z) == 0.0
    assert norm2(z) == 0.0
    assert norm_H(z) == 0.0


def test_norm_H_composition(ugrid):
    u = RadialField.from_function(ugrid, lambda r: 1.0 / (1 + r**2) ** 2)
    assert norm_H(u) ** 2 == pytest.approx(
        SURFACE_S6 * (norm1(u) ** 2 + norm2(u) ** 2), rel=1e-14
    )


def test_norm_grid_convergence_symmetry_mode():
    """Values of the working norms of g stabilize under N -> 2N."""
    g = symmetry_mode()
    vals = {}
    for N in (1024, 2048, 4096):
        grid = RadialGrid.uniform(N=N, R_max=40.0)
        f = RadialField.from_function(grid, g.eval)
        vals[N] = (norm1(f), norm2(f), norm_H(f))
    for i in range(3):
        assert vals[2048][i] == pytest.approx(vals[4096][i], rel=1e-6)
    # measured convergence slope of a smooth compactly-supported field
    errs = []
    for N in (256, 512, 1024):
        grid = RadialGrid.uniform(N=N, R_max=40.0)
        f = RadialField.from_function(grid, lambda r: np.exp(-((r - 5) ** 2)) + np.exp(-((r + 5) ** 2)))
        errs.append(norm2(f))
    ref = errs[-1]
    e1, e2 = abs(errs[0] - ref), abs(errs[1] - ref)
    slope = math.log2(e1 / e2) if e2 > 0 else 10.0
    assert slope >= 3.5  # stencil order 4 minus safety half-order


def test_profile_norm_finite_and_convergent():
    W = weinkove_profile(DimensionParams(5))
    prev = None
    for N in (2048, 4096):
        grid = RadialGrid.uniform(N=N, R_max=40.0)
        f = RadialField.from_function(grid, W.eval)
        val = norm_H(f)
        assert np.isfinite(val) and val > 0
        if prev is not None:
            assert val == pytest.approx(prev, rel=1e-6)
        prev = val


def test_truncation_warning_recorded(ugrid):
    slow = RadialField.from_function(ugrid, lambda r: 1.0 / (1 + r**2))
    info = norm1(slow, with_info=True)
    assert info.truncation_warning
    assert info.tail_bound > 0
    fast = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)))
    assert not norm1(fast, with_info=True).truncation_warning


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-3.0, 3.0), s=st.floats(0.3, 2.0))
def test_norm_homogeneity(c, s):
    grid = RadialGrid.uniform(N=256, R_max=20.0)
    u = RadialField.from_function(grid, lambda r: np.exp(-(r**2) / s))
    for n in (norm1, norm2, norm_H):
        assert n(RadialField(grid, c * u.values)) == pytest.approx(
            abs(c) * n(u), rel=1e-10, abs=1e-12
        )


def test_norm_triangle_inequality():
    rng = np.random.default_rng(7)
    grid = RadialGrid.uniform(N=512, R_max=30.0)
    r = grid.nodes
    for _ in range(10):
        c = rng.normal(size=4)
        u = RadialField(grid, (c[0] + c[1] * r**2) * np.exp(-(r**2)))
        v = RadialField(grid, (c[2] + c[3] * r**2) * np.exp(-(r**2) / 2))
        for n in (norm1, norm2, norm_H):
            assert n(u + v) <= n(u) + n(v) + 1e-10 * (n(u) + n(v))


def test_tail_decay_of_core_profiles():
    """rho^(3/2)|u| decreasing on the outer tail for the profile and the mode."""
    grid = RadialGrid.uniform(N=2048, R_max=40.0)
    W = weinkove_profile(DimensionParams(5))
    g = symmetry_mode()
    for cf in (W, g):
        r1, r2 = grid.R_max / 2, grid.R_max
        assert r2**1.5 * abs(float(cf(r2))) < r1**1.5 * abs(float(cf(r1)))


# ---------------------------------------------------------------------------
# weighted seminorms
# ---------------------------------------------------------------------------

def test_weighted_seminorms_gaussian_finite(ugrid):
    u = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)))
    table = weighted_seminorms(u)
    assert len(table) >= 16
    assert all(np.isfinite(v) and v >= 0 for v in table.values())


def test_weighted_seminorms_zero(ugrid):
    z = RadialField(ugrid, np.zeros_like(ugrid.nodes))
    assert all(v == 0.0 for v in weighted_seminorms(z).values())


def test_seminorm_to_norm_ratios_bounded():
    """Empirical uniform constant over a seeded 50-function smooth family."""
    rng = np.random.default_rng(2024)
    grid = RadialGrid.uniform(N=1024, R_max=40.0)
    r = grid.nodes
    worst = {}
    for _ in range(50):
        c = rng.normal(size=3)
        s = rng.uniform(0.5, 2.0)
        center = rng.uniform(0.0, 4.0)
        prof = np.exp(-((r - center) ** 2) / s) + np.exp(-((r + center) ** 2) / s)
        u = RadialField(grid, (c[0] + c[1] * r**2 + c[2] * r**4) * prof)
        nH = norm_H(u)
        if nH == 0:
            continue
        for k, v in weighted_seminorms(u).items():
            worst[k] = max(worst.get(k, 0.0), v / nH)
    # a single finite constant bounds every family member on the corpus
    assert max(worst.values()) < 10.0


# ---------------------------------------------------------------------------
# Hardy inequality
# ---------------------------------------------------------------------------

def test_hardy_basic(ugrid):
    f = RadialField.from_function(ugrid, lambda r: r**2 * np.exp(-(r**2)))
    lhs, rhs = hardy_check(f, 1)
    assert lhs <= 2.0 * rhs
    z = RadialField(ugrid, np.zeros_like(ugrid.nodes))
    assert hardy_check(z, 1) == (0.0, 0.0)


def test_hardy_rejects_insufficient_vanishing(ugrid):
    f = RadialField.from_function(ugrid, lambda r: np.exp(-(r**2)))
    with pytest.raises(ValueError):
        hardy_check(f, 2)


def test_hardy_random_corpus_alpha2():
    """50 random even polynomial x gaussian fields vanishing to second order;
    sharp constant 2/(2 alpha - 1) = 2/3 at alpha = 2."""
    rng = np.random.default_rng(11)
    grid = RadialGrid.uniform(N=2048, R_max=30.0)
    r = grid.nodes
    for _ in range(50):
        c = rng.normal(size=3)
        s = rng.uniform(0.5, 2.0)
        f = RadialField(grid, r**2 * (c[0] + c[1] * r**2 + c[2] * r**4) * np.exp(-(r**2) / s))
        lhs, rhs = hardy_check(f, 2)
        assert lhs <= (2.0 / 3.0) * rhs * (1 + 1e-8)
