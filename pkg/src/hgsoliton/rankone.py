"""beta-tilde^g along the ray of rescalings of one valuation.

A :class:`Profile` is the DH measure of ``F_v`` together with the log
discrepancy ``A = A_{X,Delta}(v)``. Rescaling ``v`` to ``a v`` dilates the DH
measure by ``a`` and multiplies ``A`` by ``a``, so

    beta(a) = log int g(a (A - t)) dh(dt),

a convex function of ``a > 0`` with ``beta(0+) = log g(0)``.

Profiles are inputs: their scientific meaning rests on whoever computed the DH
measure. Profiles implicitly assert ``mu(F_v) = A``; since ``mu <= lambda_max``
an ``A`` above the support is rejected as inconsistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rational as rq
from .dhm import DHMeasure, pushforward_density
from .errors import InvalidInput, NonConvergence, NonCoercive, ZeroTwist
from .geom import Polytope, support_value
from .quad import integrate_against

GOLDEN = (math.sqrt(5) - 1) / 2
DEFAULT_A_MAX = 1e3


@dataclass(frozen=True)
class Profile:
    dh: DHMeasure
    A: Fraction
    label: str = ""

    def __post_init__(self):
        if self.A < 0:
            raise InvalidInput("log discrepancy must be nonnegative")
        if self.dh.total_mass != 1:
            raise InvalidInput(f"profile DH measure has mass {self.dh.total_mass}, not 1")

    def to_json(self) -> dict:
        return {"A": rq.fmt_rational(self.A), "dh": self.dh.to_json(), "label": self.label}

    @classmethod
    def from_json(cls, data: dict) -> "Profile":
        try:
            return cls(DHMeasure.from_json(data["dh"]), rq.to_fraction(data["A"]), str(data.get("label", "")))
        except (KeyError, TypeError) as exc:
            raise InvalidInput("profile JSON needs 'A' and 'dh'") from exc


def _moment_integral(p: Profile, g, a: float, k: int, order: int):
    """``int (A - t)^k g^(order)(a (A - t)) dh(dt)`` with its error bound."""
    A = p.A
    total, err = 0.0, 0.0
    if p.dh.continuous is not None:
        dens = p.dh.continuous
        if k:
            # (A - t)^k as a global polynomial in t
            coeffs = [Fraction(math.comb(k, i)) * A ** (k - i) * (-1) ** i for i in range(k + 1)]
            dens = dens.mul_poly(coeffs)
        v, e = integrate_against(dens, g.integrand(order, scale=-a, shift=a * float(A)))
        total += v
        err += e
    if p.dh.atoms:
        locs = np.array([float(A - x) for x, _ in p.dh.atoms])
        w = np.array([float(m) for _, m in p.dh.atoms])
        total += float(np.sum(w * locs**k * np.asarray(g(a * locs, order), dtype=float)))
    return total, err


def beta_tilde(p: Profile, g, a) -> float:
    a = float(a)
    if not a > 0:
        raise InvalidInput("rescaling must be positive")
    return math.log(_moment_integral(p, g, a, 0, 0)[0])


def _derivs(p: Profile, g, a: float):
    i0 = _moment_integral(p, g, a, 0, 0)[0]
    i1 = _moment_integral(p, g, a, 1, 1)[0]
    i2 = _moment_integral(p, g, a, 2, 2)[0]
    d1 = i1 / i0
    return d1, i2 / i0 - d1 * d1


@dataclass
class BetaMinimum:
    a_star: float
    value: float
    interior: bool

    def to_json(self) -> dict:
        return {
            "a_star": rq.fmt_float(self.a_star),
            "value": rq.fmt_float(self.value),
            "interior": self.interior,
        }


def minimize_beta(p: Profile, g, a_max: float = DEFAULT_A_MAX, tol: float = 1e-12) -> BetaMinimum:
    """Minimize ``beta(a)`` over ``a >= 0``.

    The right derivative at 0 is ``(A - mean) g'(0)/g(0)``; when it is
    nonnegative convexity puts the minimum at ``a = 0``. Otherwise a golden
    section search brackets the minimizer and Newton polishes it.
    """
    lo_s, hi_s = p.dh.support
    if p.A > hi_s:
        raise NonCoercive(
            f"A = {p.A} exceeds the top of the DH support {hi_s}; inconsistent with mu = A <= lambda_max"
        )
    if p.A <= lo_s:
        raise NonCoercive(f"A = {p.A} is at or below the DH support; beta-tilde decreases forever")
    log_g0 = math.log(g(0.0))
    if p.A - p.dh.mean() >= 0:
        return BetaMinimum(0.0, log_g0, False)

    def f(a):
        return beta_tilde(p, g, a)

    # the minimizer is finite because A > inf(support); grow until beta rises
    hi = 1.0
    while _derivs(p, g, hi)[0] < 0:
        hi *= 2
        if hi > a_max:
            raise NonConvergence(f"no bracket for the minimizer within a <= {a_max}")
    lo = 0.0
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if hi - lo < 1e-4 * max(1.0, hi):
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    # convexity: beta' <= 0 at lo and >= 0 at hi; Newton safeguarded by bisection
    a = 0.5 * (lo + hi)
    for _ in range(100):
        d1, d2 = _derivs(p, g, a)
        if abs(d1) <= tol or hi - lo <= 1e-15 * a:
            break
        if d1 > 0:
            hi = a
        else:
            lo = a
        nxt = a - d1 / d2
        a = nxt if lo < nxt < hi else 0.5 * (lo + hi)
    else:
        raise NonConvergence("Newton polish did not converge")
    return BetaMinimum(a, f(a), True)


def profile_from_toric(P: Polytope, xi) -> Profile:
    """Profile of the toric valuation ``wt_xi``: the twist DH measure shifted
    by ``a(xi)``, with log discrepancy ``A = a(xi)``."""
    xi = rq.to_vector(xi)
    if all(x == 0 for x in xi):
        raise ZeroTwist("the zero coweight has no valuation")
    shift = support_value(P, xi)
    dh = pushforward_density(P, xi).affine(1, shift)
    label = "wt_xi profile, xi=(" + ",".join(rq.fmt_rational(x) for x in xi) + ")"
    return Profile(dh, shift, label)
