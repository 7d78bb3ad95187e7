"""Norms and weighted seminorms for even radial fields.

The working topology is the homogeneous pair of radial norms

    n1(u)^2 = int_0^inf |r^3 u'' + 6 r^2 u'|^2 dr      (= int r^6 |lap u|^2)
    n2(u)^2 = int_0^inf |r^3 u'''' + 12 r^2 u''' + 24 r u'' - 24 u'|^2 dr

and the seven-dimensional Sobolev-type norm they induce,

    norm_H(u)^2 = |S^6| (n1^2 + n2^2),   |S^6| = 16 pi^3 / 15,

which equals ||Lap u||_{L2(R^7)}^2 + ||Lap^2 u||_{L2(R^7)}^2 for radial u.
Integrals are truncated at R_max; a crude recorded tail bound (last-node
integrand times one more domain length) makes the truncation auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import RadialField

__all__ = [
    "SURFACE_S6",
    "NormInfo",
    "radial_laplacian",
    "norm1",
    "norm2",
    "norm_H",
    "weighted_seminorms",
    "hardy_check",
]

SURFACE_S6 = 16 * math.pi**3 / 15  # area of the unit 6-sphere


@dataclass
class NormInfo:
    value: float
    tail_bound: float
    truncation_warning: bool


def radial_laplacian(u: RadialField) -> RadialField:
    """lap u = u'' + 6 u'/rho, with the even limit 7 u''(0) at the origin."""
    return RadialField(u.grid, u.lap())


def _tail_info(integrand: np.ndarray, grid) -> tuple[float, bool]:
    peak = float(np.max(np.abs(integrand)))
    last = float(np.abs(integrand[-1]))
    # crude bound: assumes the integrand keeps decaying within one more
    # domain length; recorded, never silently trusted
    tail = last * grid.R_max
    warn = peak > 0 and last > 1e-10 * peak
    return tail, warn


def norm1(u: RadialField, with_info: bool = False):
    """Quadrature of |r^3 u'' + 6 r^2 u'|^2; the integrand is r^6 |lap u|^2."""
    r = u.grid.nodes
    up = u.deriv(1)
    upp = u.deriv(2)
    integrand = np.abs(r**3 * upp + 6 * r**2 * up) ** 2
    val = math.sqrt(float(np.real(u.grid.integrate(integrand))))
    if not with_info:
        return val
    tail, warn = _tail_info(integrand, u.grid)
    return NormInfo(val, tail, warn)


def norm2(u: RadialField, with_info: bool = False):
    """Quadrature of |r^3 u'''' + 12 r^2 u''' + 24 r u'' - 24 u'|^2,
    the integrand of the squared iterated radial Laplacian r^6 |lap^2 u|^2."""
    r = u.grid.nodes
    up = u.deriv(1)
    upp = u.deriv(2)
    u3 = u.deriv(3)
    u4 = u.deriv(4)
    integrand = np.abs(r**3 * u4 + 12 * r**2 * u3 + 24 * r * upp - 24 * up) ** 2
    val = math.sqrt(float(np.real(u.grid.integrate(integrand))))
    if not with_info:
        return val
    tail, warn = _tail_info(integrand, u.grid)
    return NormInfo(val, tail, warn)


def norm_H(u: RadialField, with_info: bool = False):
    """norm_H(u) = sqrt(|S^6| (norm1^2 + norm2^2))."""
    if not with_info:
        return math.sqrt(SURFACE_S6 * (norm1(u) ** 2 + norm2(u) ** 2))
    i1 = norm1(u, with_info=True)
    i2 = norm2(u, with_info=True)
    val = math.sqrt(SURFACE_S6 * (i1.value**2 + i2.value**2))
    return NormInfo(val, SURFACE_S6 * (i1.tail_bound + i2.tail_bound),
                    i1.truncation_warning or i2.truncation_warning)


# weighted-seminorm families: (label, weight exponent alpha, derivative order)
_L2_FAMILY = [
    ("L2_a0_u", 0, 0), ("L2_a1_u", 1, 0),
    ("L2_a0_u1", 0, 1), ("L2_a2_u1", 2, 1),
    ("L2_a1_u2", 1, 2), ("L2_a3_u2", 3, 2),
    ("L2_a2_u3", 2, 3), ("L2_a3_u3", 3, 3),
    ("L2_a3_u4", 3, 4),
]
_LINF_FAMILY = [
    ("Linf_a0_u", 0.0, 0), ("Linf_a1.5_u", 1.5, 0),
    ("Linf_a1_u1", 1.0, 1), ("Linf_a2.5_u1", 2.5, 1),
]


def weighted_seminorms(u: RadialField) -> dict:
    """Every weighted seminorm of the working-norm bound family, evaluated at
    the endpoint exponents of each admissible range.

    L2 entries: ||rho^alpha u^(j)||_{L2} for (alpha, j) at both ends of
    alpha in [0,1]x(j=0), [0,2]x(j=1), [1,3]x(j=2), [2,3]x(j=3), {3}x(j=4).
    Linf entries: ||rho^alpha u^(j)|| for alpha in [0,3/2]x(j=0),
    [1,5/2]x(j=1), [2,3] x (lap u), {3} x ((lap u)').
    """
    r = u.grid.nodes
    out = {}
    derivs = {0: u.values}
    for j in range(1, 5):
        derivs[j] = u.deriv(j)
    for label, alpha, j in _L2_FAMILY:
        integrand = np.abs(r**alpha * derivs[j]) ** 2
        out[label] = math.sqrt(float(np.real(u.grid.integrate(integrand))))
    for label, alpha, j in _LINF_FAMILY:
        out[label] = float(np.max(np.abs(r**alpha * derivs[j])))
    lap = u.lap()
    lapf = RadialField(u.grid, lap)
    lap1 = lapf.deriv(1)
    out["Linf_a2_lap"] = float(np.max(np.abs(r**2 * lap)))
    out["Linf_a3_lap"] = float(np.max(np.abs(r**3 * lap)))
    out["Linf_a3_lap1"] = float(np.max(np.abs(r**3 * lap1)))
    return out


def hardy_check(f: RadialField, alpha: int) -> tuple[float, float]:
    """Both sides of the radial Hardy inequality with weight rho^(-alpha).

    Returns (||rho^-alpha f||_L2, ||rho^(-alpha+1) f'||_L2).  The caller
    asserts lhs <= 2/(2 alpha - 1) * rhs.  Requires enough vanishing of f at
    the origin: rho^(-2 alpha + 1) |f|^2 -> 0.
    """
    if not (isinstance(alpha, (int, np.integer)) and alpha >= 1):
        raise ValueError("alpha must be a positive integer")
    r = f.grid.nodes
    vals = f.values
    if r[0] == 0.0:
        r = r[1:]
        vals = vals[1:]
        fp = f.deriv(1)[1:]
        w = f.grid.weights[1:]
    else:
        fp = f.deriv(1)
        w = f.grid.weights
    if np.max(np.abs(vals)) == 0.0:
        return 0.0, 0.0
    # precondition: the boundary term b = rho^(1-2 alpha) |f|^2 must decay
    # toward the origin; estimate its power from the first nodes
    i2 = min(8, len(r) - 1)
    b1 = abs(vals[0]) ** 2 * r[0] ** (1 - 2 * alpha)
    b2 = abs(vals[i2]) ** 2 * r[i2] ** (1 - 2 * alpha)
    floor = 1e-280
    if b1 > floor and b2 > floor:
        slope = math.log(b2 / b1) / math.log(r[i2] / r[0])
        if slope < 0.2:
            raise ValueError(
                "f does not vanish fast enough at the origin for this alpha "
                f"(boundary-term power {slope:.2f} <= 0)"
            )
    lhs = math.sqrt(float(np.dot(w, np.abs(r ** (-alpha) * vals) ** 2)))
    rhs = math.sqrt(float(np.dot(w, np.abs(r ** (1 - alpha) * fp) ** 2)))
    return lhs, rhs
