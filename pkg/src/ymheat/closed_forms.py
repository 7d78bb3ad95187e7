"""Exact evaluation of the closed-form objects of the equivariant Yang-Mills
heat flow in five dimensions: the self-similar blowup profile, the linearization
potential, the time-translation symmetry mode and its singular partner, the
supersymmetric factorization, and the nonlinearity coefficients.

All constants are built at runtime from integer-and-square-root expressions;
decimal literals are avoided so that transcription errors cannot creep in.
Derivatives are hand-derived analytic expressions (not finite differences),
since they feed residual checks whose tolerances assume exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import dawsn

SQRT6 = math.sqrt(6.0)

__all__ = [
    "SQRT6",
    "DimensionParams",
    "Constants5d",
    "DEFAULT_CONSTANTS",
    "ClosedForm",
    "weinkove_profile",
    "blowup_solution",
    "potential_v",
    "potential_v_form",
    "potential_taylor_coeffs",
    "potential_inf_coeffs",
    "symmetry_mode",
    "second_solution",
    "susy_potential",
    "susy_potential_form",
    "susy_beta",
    "factorization_ops",
    "nonlinearity_coeffs",
]


@dataclass(frozen=True)
class DimensionParams:
    """Profile constants for the equivariant flow in dimension d.

    a1 = sqrt(d-2)/(2 sqrt(2)),  a2 = (6d - 12 - (d+2) sqrt(2d-4))/2.
    Smooth bounded profiles exist only for 5 <= d <= 9 (a2 > 0 there).
    """

    d: int
    a1: float = field(init=False)
    a2: float = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.d, (int, np.integer)) and 5 <= self.d <= 9):
            raise ValueError(f"dimension must be an integer in [5, 9], got {self.d!r}")
        object.__setattr__(self, "a1", math.sqrt(self.d - 2) / (2 * math.sqrt(2)))
        object.__setattr__(
            self,
            "a2",
            0.5 * (6 * self.d - 12 - (self.d + 2) * math.sqrt(2 * self.d - 4)),
        )


@dataclass(frozen=True)
class Constants5d:
    """The d=5 constants used by every five-dimensional closed form.

    ``shift_a2`` exists as a corruption hook for sensitivity smoke tests
    (see the verify command); it must be zero in real use.
    """

    a1: float = 0.5 * math.sqrt(1.5)
    a2: float = 0.5 * (18.0 - 7.0 * SQRT6)

    @property
    def c0(self) -> float:
        """a2/a1 = 6 sqrt(6) - 14, the denominator shift in rational forms."""
        return self.a2 / self.a1

    def corrupted(self, da2: float) -> "Constants5d":
        return Constants5d(a1=self.a1, a2=self.a2 + da2)


DEFAULT_CONSTANTS = Constants5d()


@dataclass(frozen=True)
class ClosedForm:
    """A scalar function of rho with exact first and second derivatives."""

    eval: Callable[[np.ndarray], np.ndarray]
    deriv1: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    domain_note: str = ""

    def __call__(self, rho):
        return self.eval(rho)


# ---------------------------------------------------------------------------
# blowup profile
# ---------------------------------------------------------------------------

def weinkove_profile(params: DimensionParams) -> ClosedForm:
    """The Weinkove blowup profile W(rho) = -1/(a1 rho^2 + a2).

    W is the static solution of the similarity-frame equation
    lap_rad W - (rho/2) W' - W - 3(d-2) W^2 - (d-2) rho^2 W^3 = 0,
    negative, increasing in rho^2, with W(rho) -> 0 like -1/(a1 rho^2).
    """
    a1, a2 = params.a1, params.a2

    def ev(rho):
        return -1.0 / (a1 * np.asarray(rho) ** 2 + a2)

    def d1(rho):
        rho = np.asarray(rho)
        D = a1 * rho**2 + a2
        return 2 * a1 * rho / D**2

    def d2(rho):
        rho = np.asarray(rho)
        D = a1 * rho**2 + a2
        return 2 * a1 / D**2 - 8 * a1**2 * rho**2 / D**3

    return ClosedForm(ev, d1, d2, "smooth and bounded on [0, inf); W ~ -1/(a1 rho^2)")


def blowup_solution(params: DimensionParams, T: float, t: float, r) -> np.ndarray:
    """Self-similar blowup solution w_T(t, r) = W(r/sqrt(T-t)) / (T-t)."""
    if T <= 0:
        raise ValueError("blowup time T must be positive")
    if t >= T:
        raise ValueError(f"t={t} is not below the blowup time T={T}")
    W = weinkove_profile(params)
    s = math.sqrt(T - t)
    return W(np.asarray(r) / s) / (T - t)


# ---------------------------------------------------------------------------
# linearization potential (d = 5)
# ---------------------------------------------------------------------------

def potential_v_form(consts: Constants5d = DEFAULT_CONSTANTS) -> ClosedForm:
    """The linearization potential V = -18 W - 9 rho^2 W^2 with analytic
    derivatives built from the exact derivatives of W."""
    a1, a2 = consts.a1, consts.a2

    def parts(rho):
        rho = np.asarray(rho, dtype=float)
        D = a1 * rho**2 + a2
        w = -1.0 / D
        wp = 2 * a1 * rho / D**2
        wpp = 2 * a1 / D**2 - 8 * a1**2 * rho**2 / D**3
        return rho, w, wp, wpp

    def ev(rho):
        rho, w, _, _ = parts(rho)
        return -18 * w - 9 * rho**2 * w**2

    def d1(rho):
        rho, w, wp, _ = parts(rho)
        return -18 * wp - 18 * rho * w**2 - 18 * rho**2 * w * wp

    def d2(rho):
        rho, w, wp, wpp = parts(rho)
        return (
            -18 * wpp
            - 18 * w**2
            - 72 * rho * w * wp
            - 18 * rho**2 * (wp**2 + w * wpp)
        )

    return ClosedForm(ev, d1, d2, "positive, V(0) = 72/(36 - 14 sqrt(6)), V ~ 12(sqrt(6)-2)/rho^2")


def potential_v(rho, consts: Constants5d = DEFAULT_CONSTANTS):
    """V(rho) in the printed rational form
    72 (36 - 14 sqrt(6) + (sqrt(6)-2) rho^2) / (36 - 14 sqrt(6) + sqrt(6) rho^2)^2.

    Identical (to rounding) with -18 W - 9 rho^2 W^2 for the default constants.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative")
    # expressed through a1, a2 so the corruption hook propagates
    D = consts.a1 * rho**2 + consts.a2
    w = -1.0 / D
    return -18 * w - 9 * rho**2 * w**2


def potential_taylor_coeffs(n_terms: int, consts: Constants5d = DEFAULT_CONSTANTS) -> np.ndarray:
    """Even Taylor coefficients of V at rho = 0: V = sum_k v[k] rho^(2k).

    From the geometric expansion of W = -(1/a2) sum (-a1/a2)^k rho^(2k);
    convergence radius is sqrt(a2/a1).
    """
    a1, a2 = consts.a1, consts.a2
    t = a1 / a2
    w = np.array([-(1.0 / a2) * (-t) ** k for k in range(n_terms)])
    w2 = np.convolve(w, w)[:n_terms]
    v = -18 * w
    v[1:] -= 9 * w2[: n_terms - 1]
    return v


def potential_inf_coeffs(n_terms: int, consts: Constants5d = DEFAULT_CONSTANTS) -> np.ndarray:
    """Coefficients of V = sum_{j>=1} v[j] rho^(-2j) at infinity (v[0] = 0)."""
    a1, a2 = consts.a1, consts.a2
    w = np.zeros(n_terms + 2)
    for j in range(1, n_terms + 2):
        w[j] = -((-a2) ** (j - 1)) / a1**j
    v = np.zeros(n_terms + 1)
    for j in range(1, n_terms + 1):
        v[j] = -18 * w[j] - 9 * sum(w[i] * w[j + 1 - i] for i in range(1, j + 1))
    return v


# ---------------------------------------------------------------------------
# symmetry mode and its singular partner (d = 5)
# ---------------------------------------------------------------------------

def symmetry_mode(consts: Constants5d = DEFAULT_CONSTANTS) -> ClosedForm:
    """g(rho) = (a1 rho^2 + a2)^(-2): the time-translation mode, the unique
    eigenfunction of the linearized similarity operator with eigenvalue 1."""
    a1, a2 = consts.a1, consts.a2

    def ev(rho):
        return (a1 * np.asarray(rho) ** 2 + a2) ** -2.0

    def d1(rho):
        rho = np.asarray(rho)
        return -4 * a1 * rho * (a1 * rho**2 + a2) ** -3.0

    def d2(rho):
        rho = np.asarray(rho)
        D = a1 * rho**2 + a2
        return -4 * a1 / D**3 + 24 * a1**2 * rho**2 / D**4

    return ClosedForm(ev, d1, d2, "positive, decreasing, g ~ rho^-4 / a1^2")


def second_solution(consts: Constants5d = DEFAULT_CONSTANTS) -> ClosedForm:
    """The second solution h of the eigenvalue-one equation, singular like
    rho^(-5) at the origin and growing like e^(rho^2/4) at infinity.

    h = e^(rho^2/4) (h1 + h2 e^(-rho^2/4) int_0^rho e^(s^2/4) ds);  the interior
    integral is evaluated through the Dawson function: the stable grouping is
    e^(-rho^2/4) int_0^rho e^(s^2/4) ds = 2 dawsn(rho/2).
    """
    c0 = consts.c0  # 6 sqrt(6) - 14 for the exact constants
    al0 = 24 * (8652 * SQRT6 - 21193)
    al1 = 4 * (8347 - 3408 * SQRT6)
    al2 = 2 * (372 * SQRT6 - 923)
    al3 = 15.0
    c2 = 2 * (61 - 24 * SQRT6) / 5.0

    def pieces(rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise ValueError("h is singular at rho = 0; rho must be positive")
        C = c0 + rho**2
        P = al0 + al1 * rho**2 + al2 * rho**4 + al3 * rho**6
        Pp = 2 * al1 * rho + 4 * al2 * rho**3 + 6 * al3 * rho**5
        Ppp = 2 * al1 + 12 * al2 * rho**2 + 30 * al3 * rho**4
        Q = 1.0 / (20 * rho**5 * C**2)
        s = 5.0 / rho + 4 * rho / C
        sp = -5.0 / rho**2 + 4.0 / C - 8 * rho**2 / C**2
        h1 = P * Q
        h1p = Q * (Pp - P * s)
        h1pp = Q * (-s * (Pp - P * s) + Ppp - Pp * s - P * sp)
        h2 = c2 / C**2
        h2p = -4 * rho * h2 / C
        h2pp = -4 * h2 / C + 24 * rho**2 * h2 / C**2
        # d/drho dawsn(rho/2) = (1 - rho dawsn(rho/2))/2
        Dw = dawsn(rho / 2)
        G = h1 + 2 * h2 * Dw
        Gp = h1p + 2 * h2p * Dw + h2 * (1 - rho * Dw)
        Gpp = (
            h1pp
            + 2 * h2pp * Dw
            + 2 * h2p * (1 - rho * Dw)
            - h2 * (Dw + (rho / 2) * (1 - rho * Dw))
        )
        E = np.exp(rho**2 / 4)
        return rho, E, G, Gp, Gpp

    def ev(rho):
        _, E, G, _, _ = pieces(rho)
        return E * G

    def d1(rho):
        rho, E, G, Gp, _ = pieces(rho)
        return E * ((rho / 2) * G + Gp)

    def d2(rho):
        rho, E, G, Gp, Gpp = pieces(rho)
        return E * ((rho**2 / 4 + 0.5) * G + rho * Gp + Gpp)

    return ClosedForm(ev, d1, d2, "h ~ rho^-5 at 0; h ~ e^(rho^2/4) at infinity")


# ---------------------------------------------------------------------------
# supersymmetric factorization (d = 5)
# ---------------------------------------------------------------------------

def susy_potential_form(consts: Constants5d = DEFAULT_CONSTANTS) -> ClosedForm:
    """q(rho) = rho^2/16 + 12/rho^2 + 3/4 + Q(rho), the potential of the
    self-adjoint partner operator A = -d^2/drho^2 + q on (0, inf)."""
    c0 = consts.c0
    b = 24 * SQRT6 - 44
    n0 = 384 * SQRT6 - 956

    def split(rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise ValueError("q has a 12/rho^2 barrier; rho must be positive")
        C = c0 + rho**2
        Nq = n0 - rho**4 - b * rho**2
        Nqp = -4 * rho**3 - 2 * b * rho
        Nqpp = -12 * rho**2 - 2 * b
        return rho, C, Nq, Nqp, Nqpp

    def ev(rho):
        rho, C, Nq, _, _ = split(rho)
        return rho**2 / 16 + 12 / rho**2 + 0.75 + Nq / C**2

    def d1(rho):
        rho, C, Nq, Nqp, _ = split(rho)
        return rho / 8 - 24 / rho**3 + Nqp / C**2 - 4 * rho * Nq / C**3

    def d2(rho):
        rho, C, Nq, Nqp, Nqpp = split(rho)
        return (
            0.125
            + 72 / rho**4
            + Nqpp / C**2
            - 8 * rho * Nqp / C**3
            - 4 * Nq / C**3
            + 24 * rho**2 * Nq / C**4
        )

    return ClosedForm(ev, d1, d2, "q -> inf at 0 and at infinity; global min inside (0, 5/2)")


def susy_potential(rho, consts: Constants5d = DEFAULT_CONSTANTS):
    """Pointwise q(rho); rejects rho <= 0."""
    return susy_potential_form(consts).eval(rho)


def susy_beta(consts: Constants5d = DEFAULT_CONSTANTS) -> ClosedForm:
    """beta(rho) = 3/rho - rho/4 - 4 rho/(c0 + rho^2), the superpotential of
    the first-order factorization  B = -d/drho + beta,  B+ = d/drho + beta."""
    c0 = consts.c0

    def ev(rho):
        rho = np.asarray(rho, dtype=float)
        return 3.0 / rho - rho / 4 - 4 * rho / (c0 + rho**2)

    def d1(rho):
        rho = np.asarray(rho, dtype=float)
        C = c0 + rho**2
        return -3.0 / rho**2 - 0.25 - 4.0 / C + 8 * rho**2 / C**2

    def d2(rho):
        rho = np.asarray(rho, dtype=float)
        C = c0 + rho**2
        return 6.0 / rho**3 + 24 * rho / C**2 - 32 * rho**3 / C**3

    return ClosedForm(ev, d1, d2, "singular like 3/rho at 0")


def factorization_ops(v, consts: Constants5d = DEFAULT_CONSTANTS):
    """Apply the factorization pair to a field on a positive grid:
    B v = -v' + beta v  and  B+ v = v' + beta v.

    ``v`` must be a RadialField living on a grid that excludes rho = 0
    (beta is singular there).  Returns (Bv, B+v) as fields on the same grid.
    """
    from .grids import RadialField  # local import to avoid a cycle

    if not isinstance(v, RadialField):
        raise TypeError("factorization_ops expects a RadialField")
    if v.grid.nodes[0] <= 0:
        raise ValueError("grid must exclude rho = 0 (beta ~ 3/rho)")
    beta = susy_beta(consts).eval(v.grid.nodes)
    vp = v.grid.d1() @ v.values
    return (
        RadialField(v.grid, -vp + beta * v.values),
        RadialField(v.grid, vp + beta * v.values),
    )


# ---------------------------------------------------------------------------
# nonlinearity coefficients (d = 5)
# ---------------------------------------------------------------------------

def nonlinearity_coeffs(consts: Constants5d = DEFAULT_CONSTANTS) -> tuple[ClosedForm, ClosedForm]:
    """Coefficients of the perturbation nonlinearity N(phi) = f1 phi^2 + f2 phi^3
    with f1 = -9 (1 + rho^2 W) and f2 = -3 rho^2."""
    a1, a2 = consts.a1, consts.a2

    def wparts(rho):
        rho = np.asarray(rho, dtype=float)
        D = a1 * rho**2 + a2
        w = -1.0 / D
        wp = 2 * a1 * rho / D**2
        wpp = 2 * a1 / D**2 - 8 * a1**2 * rho**2 / D**3
        return rho, w, wp, wpp

    def f1_ev(rho):
        rho, w, _, _ = wparts(rho)
        return -9 * (1 + rho**2 * w)

    def f1_d1(rho):
        rho, w, wp, _ = wparts(rho)
        return -9 * (2 * rho * w + rho**2 * wp)

    def f1_d2(rho):
        rho, w, wp, wpp = wparts(rho)
        return -9 * (2 * w + 4 * rho * wp + rho**2 * wpp)

    f1 = ClosedForm(f1_ev, f1_d1, f1_d2, "f1(0) = -9; f1 -> -9 a2/(a1 rho^2) - ... bounded")
    f2 = ClosedForm(
        lambda rho: -3 * np.asarray(rho, dtype=float) ** 2,
        lambda rho: -6 * np.asarray(rho, dtype=float),
        lambda rho: -6 * np.ones_like(np.asarray(rho, dtype=float)),
        "exact polynomial",
    )
    return f1, f2
