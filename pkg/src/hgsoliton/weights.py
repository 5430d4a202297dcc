"""Admissible weight functions.

Built-in weights are finite exponential mixtures ``g(x) = sum c_i exp(a_i x)``
with ``c_i > 0``, ``a_i >= 0`` and some ``a_i > 0``: positive, strictly
increasing and log-convex by construction, and closed under differentiation.
Any other weight enters as a :class:`PluginWeight` and is only trusted on the
interval where :func:`check_admissible` sampled it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import rational as rq
from .errors import EmptyDerivative, InvalidInput, NotAdmissible
from .quad import ExpIntegrand


@dataclass(frozen=True)
class WeightFn:
    terms: tuple[tuple[Fraction, Fraction], ...]
    name: str = field(default="", compare=False)

    def __call__(self, x, order: int = 0):
        """``g^(order)(x)``, vectorized over numpy arrays."""
        x = np.asarray(x, dtype=float)
        c, a = self._arrays(order)
        out = np.exp(np.multiply.outer(x, a)) @ c
        return float(out) if out.ndim == 0 else out

    def _arrays(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        c = np.array([float(ci * ai**order) for ci, ai in self.terms])
        a = np.array([float(ai) for _, ai in self.terms])
        return c, a

    def d1(self, x):
        return self(x, 1)

    def d2(self, x):
        return self(x, 2)

    def exact_terms(self, order: int = 0) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple((c * a**order, a) for c, a in self.terms if c * a**order != 0)

    def integrand(self, order: int = 0, scale=1.0, shift=0.0) -> ExpIntegrand:
        """``t -> g^(order)(scale * t + shift)`` for the compiled quadrature."""
        terms = self.exact_terms(order)
        return ExpIntegrand(
            tuple(float(c) for c, _ in terms),
            tuple(float(a) for _, a in terms),
            float(scale),
            float(shift),
        )

    def rescaled(self, s) -> "WeightFn":
        """``x -> g(s x)`` for ``s > 0``."""
        s = rq.to_fraction(s)
        if s <= 0:
            raise NotAdmissible("rescaling factor must be positive")
        return WeightFn(tuple((c, s * a) for c, a in self.terms), self.name and f"{self.name}@{s}")

    @property
    def min_positive_exponent(self) -> Fraction:
        return min(a for _, a in self.terms if a > 0)

    def to_json(self) -> dict:
        if self.terms == ((Fraction(1), Fraction(1)),):
            return {"type": "exp"}
        return {
            "type": "exp_mix",
            "terms": [{"c": rq.fmt_rational(c), "a": rq.fmt_rational(a)} for c, a in self.terms],
        }

    def __str__(self) -> str:
        if self.name:
            return self.name
        return " + ".join(f"{rq.fmt_rational(c)}*exp({rq.fmt_rational(a)}x)" for c, a in self.terms)


def make_exp_mix(terms: Iterable[Sequence], name: str = "") -> WeightFn:
    """Validated exponential mixture from ``(c, a)`` pairs."""
    parsed = tuple((rq.to_fraction(c), rq.to_fraction(a)) for c, a in terms)
    if not parsed:
        raise NotAdmissible("a weight needs at least one term")
    if any(c <= 0 for c, _ in parsed):
        raise NotAdmissible("mixture coefficients must be positive")
    if any(a < 0 for _, a in parsed):
        raise NotAdmissible("mixture exponents must be nonnegative")
    if all(a == 0 for _, a in parsed):
        raise NotAdmissible("constant weight is not strictly increasing")
    return WeightFn(parsed, name)


EXP = WeightFn(((Fraction(1), Fraction(1)),), "exp")


def derivative_weight(g: WeightFn) -> WeightFn:
    """g' as a mixture: term-wise ``(c a, a)``, zero-exponent terms dropped."""
    terms = g.exact_terms(1)
    if not terms:
        raise EmptyDerivative("derivative of a constant weight")
    return WeightFn(terms, g.name and f"{g.name}'")


def constant_weight(value=1) -> WeightFn:
    """The constant weight (classical, unweighted invariants). Not admissible
    as a ``g``, but a valid ``g'`` argument for S, Ding and delta."""
    return WeightFn(((rq.to_fraction(value), Fraction(0)),), "const")


@dataclass(frozen=True)
class PluginWeight:
    """User-supplied weight given by value and derivative callables."""

    g: Callable
    dg: Callable
    d2g: Callable
    name: str = "plugin"

    def __call__(self, x, order: int = 0):
        fn = (self.g, self.dg, self.d2g)[order]
        x = np.asarray(x, dtype=float)
        out = np.asarray(fn(x), dtype=float)
        return float(out) if out.ndim == 0 else out

    def integrand(self, order: int = 0, scale=1.0, shift=0.0):
        fn = (self.g, self.dg, self.d2g)[order]
        return lambda t: fn(scale * np.asarray(t) + shift)


def derivative(g) -> object:
    if isinstance(g, WeightFn):
        return derivative_weight(g)
    if isinstance(g, PluginWeight):
        zero = lambda x: np.full_like(np.asarray(x, dtype=float), np.nan)  # noqa: E731
        return PluginWeight(g.dg, g.d2g, zero, g.name + "'")
    raise InvalidInput(f"unsupported weight {g!r}")


@dataclass
class AdmissibilityReport:
    passed: bool
    interval: tuple[float, float]
    min_value: float
    min_slope: float
    min_log_convexity: float  # min of (g'' g - g'^2) / g^2
    failures: list[str]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "interval": [rq.fmt_float(x) for x in self.interval],
            "min_value": rq.fmt_float(self.min_value),
            "min_slope": rq.fmt_float(self.min_slope),
            "min_log_convexity": rq.fmt_float(self.min_log_convexity),
            "failures": self.failures,
        }


def check_admissible(g, interval: tuple[float, float], samples: int = 64) -> AdmissibilityReport:
    """Sample ``g > 0``, ``g' > 0`` and ``g'' g - g'^2 >= -1e-12 g^2`` at
    Chebyshev points of ``interval`` plus both endpoints."""
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise InvalidInput("check interval must be finite and ordered")
    k = np.arange(samples)
    cheb = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * samples))
    x = np.concatenate([[lo], np.sort(cheb), [hi]])
    with np.errstate(all="ignore"):
        v, d, dd = (np.asarray(g(x, o), dtype=float) for o in (0, 1, 2))
        lc = (dd * v - d * d) / (v * v)
    failures = []
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        failures.append(f"g not positive (min {np.nanmin(v):.3g})")
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        failures.append(f"g' not positive (min {np.nanmin(d):.3g})")
    if not np.all(np.isfinite(lc)) or np.any(lc < -1e-12):
        failures.append(f"log g not convex (min margin {np.nanmin(lc):.3g})")
    return AdmissibilityReport(
        not failures,
        (lo, hi),
        float(np.nanmin(v)),
        float(np.nanmin(d)),
        float(np.nanmin(lc)),
        failures,
    )


def weight_from_json(data: dict) -> WeightFn:
    if not isinstance(data, dict) or "type" not in data:
        raise InvalidInput("weight JSON needs a 'type' field")
    kind = data["type"]
    name = str(data.get("name", ""))
    if kind == "exp":
        return WeightFn(EXP.terms, name or "exp")
    if kind == "exp_mix":
        try:
            terms = [(t["c"], t["a"]) for t in data["terms"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInput("exp_mix terms need 'c' and 'a'") from exc
        return make_exp_mix(terms, name)
    raise InvalidInput(f"unknown weight type {kind!r}")


@dataclass(frozen=True)
class PolytopeWeight:
    """``g0(alpha) = base(-<alpha, xi0>)`` on the moment polytope."""

    base: object
    xi0: tuple

    def __call__(self, alpha):
        alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
        return self.base(-(alpha @ np.asarray([float(x) for x in self.xi0])))
