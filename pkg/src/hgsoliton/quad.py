"""Exact simplex moments and error-controlled 1-D quadrature.

Densities live in :class:`PiecewisePoly`: exact rational polynomial pieces,
each stored in powers of the local offset ``t - breaks[k]``. Floating point
evaluation uses the scaled local variable ``s = (t - breaks[k]) / width`` in
[0, 1], which keeps evaluation stable on very short pieces.
"""

from __future__ import annotations

import bisect
import heapq
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from . import kernels
from . import rational as rq
from .errors import DegreeOverflow, InvalidInput, ToleranceNotMet
from .geom import Simplex

MAX_DEGREE = 64
DEFAULT_MAX_EVALS = 10**6
EVALS_PER_PANEL = 3 * kernels.GL_ORDER

Poly = tuple[Fraction, ...]


def _trim(c: Sequence[Fraction]) -> Poly:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (Fraction(0),)


def poly_add(p: Sequence[Fraction], q: Sequence[Fraction]) -> Poly:
    n = max(len(p), len(q))
    return _trim(
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)
    )


def poly_mul(p: Sequence[Fraction], q: Sequence[Fraction]) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def poly_shift(p: Sequence[Fraction], x0: Fraction) -> Poly:
    """Coefficients of ``s -> p(x0 + s)``."""
    n = len(p)
    out = list(p)
    # repeated synthetic division (Taylor shift)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += x0 * out[j + 1]
    return _trim(out)


def poly_eval(p: Sequence[Fraction], x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_integral(p: Sequence[Fraction], a: Fraction, b: Fraction) -> Fraction:
    """Exact integral of ``p`` over [a, b]."""
    return sum(
        (c * (b ** (j + 1) - a ** (j + 1)) / (j + 1) for j, c in enumerate(p)), Fraction(0)
    )


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on ``[breaks[0], breaks[-1]]``, zero outside.

    ``polys[k]`` are the coefficients on ``[breaks[k], breaks[k+1]]`` in powers
    of ``t - breaks[k]``. Signed densities are allowed; use
    :meth:`check_nonnegative` for probability densities.
    """

    breaks: tuple[Fraction, ...]
    polys: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.breaks) < 2 or len(self.polys) != len(self.breaks) - 1:
            raise InvalidInput("need k+1 breakpoints for k polynomial pieces")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise InvalidInput("breakpoints must be strictly increasing")

    @classmethod
    def uniform(cls, lo, hi) -> "PiecewisePoly":
        lo, hi = rq.to_fraction(lo), rq.to_fraction(hi)
        return cls((lo, hi), ((1 / (hi - lo),),))

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.breaks[0], self.breaks[-1]

    @property
    def degree(self) -> int:
        return max(len(p) for p in self.polys) - 1

    def widths(self):
        return [b - a for a, b in zip(self.breaks, self.breaks[1:])]

    @cached_property
    def total_mass(self) -> Fraction:
        return sum(
            (poly_integral(p, Fraction(0), w) for p, w in zip(self.polys, self.widths())),
            Fraction(0),
        )

    def moment(self, k: int) -> Fraction:
        """Exact ``int t^k p(t) dt``."""
        if k < 0 or k > MAX_DEGREE:
            raise DegreeOverflow(f"moment order {k} outside [0, {MAX_DEGREE}]")
        tk = (Fraction(0),) * k + (Fraction(1),)
        return self.mul_poly(tk).total_mass

    def __call__(self, t) -> Fraction:
        t = rq.to_fraction(t)
        if t < self.breaks[0] or t > self.breaks[-1]:
            return Fraction(0)
        k = min(max(0, bisect.bisect_right(self.breaks, t) - 1), len(self.polys) - 1)
        return poly_eval(self.polys[k], t - self.breaks[k])

    def mul_poly(self, q: Sequence[Fraction]) -> "PiecewisePoly":
        """Multiply by the global polynomial ``sum_j q[j] t^j``."""
        q = tuple(rq.to_fraction(x) for x in q)
        return PiecewisePoly(
            self.breaks,
            tuple(poly_mul(p, poly_shift(q, b)) for p, b in zip(self.polys, self.breaks)),
        )

    def scaled(self, factor) -> "PiecewisePoly":
        f = rq.to_fraction(factor)
        return PiecewisePoly(self.breaks, tuple(_trim(c * f for c in p) for p in self.polys))

    def affine(self, a, b) -> "PiecewisePoly":
        """Pushforward under ``t -> a*t + b`` (a > 0): ``d((t-b)/a)/a``."""
        a, b = rq.to_fraction(a), rq.to_fraction(b)
        if a <= 0:
            raise InvalidInput("affine pushforward needs a positive scale")
        return PiecewisePoly(
            tuple(a * x + b for x in self.breaks),
            tuple(tuple(c / a ** (j + 1) for j, c in enumerate(p)) for p in self.polys),
        )

    def shifted(self, b) -> "PiecewisePoly":
        return self.affine(1, b)

    def with_break(self, x) -> "PiecewisePoly":
        """Insert an extra breakpoint (no-op if present or outside the support)."""
        x = rq.to_fraction(x)
        if x <= self.breaks[0] or x >= self.breaks[-1] or x in self.breaks:
            return self
        k = bisect.bisect_left(self.breaks, x) - 1
        right = poly_shift(self.polys[k], x - self.breaks[k])
        return PiecewisePoly(
            self.breaks[: k + 1] + (x,) + self.breaks[k + 1 :],
            self.polys[: k + 1] + (right,) + self.polys[k + 1 :],
        )

    def abs_moment(self) -> Fraction:
        """Exact ``int |t| p(t) dt``."""
        pp = self.with_break(0)
        total = Fraction(0)
        for p, a, w in zip(pp.polys, pp.breaks, pp.widths()):
            sign = 1 if a >= 0 else -1
            total += sign * poly_integral(poly_mul(p, (a, Fraction(1))), Fraction(0), w)
        return total

    def check_nonnegative(self, samples: int = 8, tol: float = 1e-12) -> bool:
        """Sample each piece at its endpoints and Chebyshev points (exactly)."""
        scale = max(abs(float(self(b))) for b in self.breaks) or 1.0
        for p, w in zip(self.polys, self.widths()):
            pts = [Fraction(0), w] + [
                w * Fraction((1 - math.cos((2 * i + 1) * math.pi / (2 * samples))) / 2)
                for i in range(samples)
            ]
            if min(float(poly_eval(p, s)) for s in pts) < -tol * scale:
                return False
        return True

    @cached_property
    def float_pieces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(scaled coefficients, left ends, widths) as float arrays."""
        deg = self.degree + 1
        coef = np.zeros((len(self.polys), deg))
        for k, (p, w) in enumerate(zip(self.polys, self.widths())):
            wj = Fraction(1)
            for j, c in enumerate(p):
                coef[k, j] = float(c * wj)
                wj *= w
        lefts = np.array([float(b) for b in self.breaks[:-1]])
        widths = np.array([float(w) for w in self.widths()])
        return coef, lefts, widths

    def to_json(self) -> dict:
        return {
            "breaks": [rq.fmt_rational(b) for b in self.breaks],
            "polys": [[rq.fmt_rational(c) for c in p] for p in self.polys],
            "mass": rq.fmt_rational(self.total_mass),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PiecewisePoly":
        try:
            breaks = tuple(rq.to_fraction(b) for b in data["breaks"])
            polys = tuple(_trim(rq.to_fraction(c) for c in p) for p in data["polys"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput("piecewise polynomial JSON needs 'breaks' and 'polys'") from exc
        pp = cls(breaks, polys)
        if "mass" in data and rq.to_fraction(data["mass"]) != pp.total_mass:
            raise InvalidInput("declared mass does not match the polynomial pieces")
        return pp


def add_piecewise(parts: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """Exact sum of piecewise polynomials (refined onto common breakpoints)."""
    breaks = sorted(set(b for p in parts for b in p.breaks))
    polys = []
    for lo, hi in zip(breaks, breaks[1:]):
        acc: Poly = (Fraction(0),)
        for p in parts:
            if lo >= p.breaks[0] and hi <= p.breaks[-1]:
                k = bisect.bisect_right(p.breaks, lo) - 1
                acc = poly_add(acc, poly_shift(p.polys[k], lo - p.breaks[k]))
        polys.append(acc)
    return PiecewisePoly(tuple(breaks), tuple(polys))


# -- exact simplex moments ---------------------------------------------------


def complete_homogeneous(values: Sequence[Fraction], k: int) -> Fraction:
    """h_k(x_0, ..., x_n) by the recurrence h_k(x, y) = h_k(x) + y h_{k-1}(x, y)."""
    h = [Fraction(1)] + [Fraction(0)] * k
    for x in values:
        for j in range(1, k + 1):
            h[j] += x * h[j - 1]
    return h[k]


def linear_power_moment(simplex: Simplex, form, k: int, max_degree: int = MAX_DEGREE) -> Fraction:
    """Exact ``int_simplex l(alpha)^k d alpha``.

    ``form`` is a coefficient vector or a ``(coefficients, constant)`` pair.
    """
    if k < 0 or k > max_degree:
        raise DegreeOverflow(f"power {k} outside [0, {max_degree}]")
    coeffs, const = _affine_form(form)
    r = simplex.dim
    if len(coeffs) != r:
        raise InvalidInput("linear form has the wrong length")
    vals = [rq.dot(v, coeffs) + const for v in simplex.vertices]
    return (
        simplex.volume
        * Fraction(math.factorial(k) * math.factorial(r), math.factorial(k + r))
        * complete_homogeneous(vals, k)
    )


def _affine_form(form) -> tuple[tuple[Fraction, ...], Fraction]:
    if (
        isinstance(form, tuple)
        and len(form) == 2
        and isinstance(form[0], (tuple, list))
        and not isinstance(form[1], (tuple, list))
    ):
        return rq.to_vector(form[0]), rq.to_fraction(form[1])
    return rq.to_vector(form), Fraction(0)


# -- adaptive quadrature -----------------------------------------------------


@dataclass(frozen=True)
class ExpIntegrand:
    """``f(t) = sum_i c_i exp(a_i (scale*t + shift))``, evaluated by the kernels."""

    c: tuple[float, ...]
    a: tuple[float, ...]
    scale: float = 1.0
    shift: float = 0.0

    def __call__(self, t):
        x = self.scale * np.asarray(t, dtype=float) + self.shift
        return np.exp(np.multiply.outer(x, np.array(self.a))) @ np.array(self.c)


Integrand = Union[ExpIntegrand, Callable[[np.ndarray], np.ndarray]]


def _panels_callable(f, coef, s0, s1, t0, h):
    nodes, weights = kernels.GL_NODES, kernels.GL_WEIGHTS

    def rule(lo, hi):
        width = hi - lo
        s = lo[:, None] + width[:, None] * nodes[None, :]
        q = np.zeros_like(s)
        for j in range(coef.shape[1] - 1, -1, -1):
            q = q * s + coef[:, j : j + 1]
        t = t0[:, None] + h[:, None] * s
        vals = q * np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
        fac = (width * h)[:, None]
        return (vals * weights * fac).sum(axis=1), (np.abs(vals) * weights * fac).sum(axis=1)

    mid = 0.5 * (s0 + s1)
    whole, _ = rule(s0, s1)
    left, la = rule(s0, mid)
    right, ra = rule(mid, s1)
    return whole, left + right, la + ra


def max_evals_default() -> int:
    env = os.environ.get("HGSOLITON_MAX_EVALS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidInput(f"HGSOLITON_MAX_EVALS={env!r} is not an integer") from exc
    return DEFAULT_MAX_EVALS


def integrate_against(
    density: PiecewisePoly,
    f: Integrand,
    rel_tol: float = 1e-13,
    max_evals: int | None = None,
) -> tuple[float, float]:
    """Integrate a smooth ``f`` against a piecewise polynomial density.

    Each piece starts as one panel; the rule on a panel is compared with the
    rule on its two halves and the panel with the largest difference is
    bisected until the summed differences fall below
    ``rel_tol * int |f * density|`` (equal to ``rel_tol * |value|`` for
    one-signed integrands). Returns ``(value, error_bound)``.
    """
    if rel_tol < 1e-14:
        raise InvalidInput("rel_tol must be at least 1e-14")
    budget = max_evals_default() if max_evals is None else max_evals
    coef, lefts, widths = density.float_pieces

    if isinstance(f, ExpIntegrand):
        c, a = np.array(f.c, dtype=float), np.array(f.a, dtype=float)

        def run(idx, s0, s1):
            return kernels.panels_exp(
                coef[idx], s0, s1, lefts[idx], widths[idx], c, a, f.scale, f.shift
            )
    else:

        def run(idx, s0, s1):
            return _panels_callable(f, coef[idx], s0, s1, lefts[idx], widths[idx])

    n = len(widths)
    if n * EVALS_PER_PANEL > budget:
        raise ToleranceNotMet(f"{n} pieces need {n * EVALS_PER_PANEL} evaluations, budget is {budget}")
    idx = np.arange(n)
    s0 = np.zeros(n)
    s1 = np.ones(n)
    whole, halves, habs = run(idx, s0, s1)
    evals = n * EVALS_PER_PANEL
    if not (np.all(np.isfinite(halves)) and np.all(np.isfinite(whole))):
        raise ToleranceNotMet("integrand is not finite on the support")

    # panel state: piece index, s-range, estimate, |estimate|, error
    value = {i: (int(idx[i]), 0.0, 1.0, halves[i], habs[i], abs(whole[i] - halves[i])) for i in range(n)}
    heap = [(-value[i][5], i) for i in range(n)]
    heapq.heapify(heap)
    next_id = n
    err = float(sum(v[5] for v in value.values()))
    scale = float(sum(v[4] for v in value.values()))

    while err > rel_tol * scale and heap:
        if evals + 2 * EVALS_PER_PANEL > budget:
            raise ToleranceNotMet(
                f"error bound {err:.3g} above target {rel_tol * scale:.3g} after {evals} evaluations"
            )
        _, pid = heapq.heappop(heap)
        piece, lo, hi, _, _, e = value.pop(pid)
        mid = 0.5 * (lo + hi)
        w2, h2, a2 = run(np.array([piece, piece]), np.array([lo, mid]), np.array([mid, hi]))
        evals += 2 * EVALS_PER_PANEL
        for j, (clo, chi) in enumerate(((lo, mid), (mid, hi))):
            ce = abs(w2[j] - h2[j])
            value[next_id] = (piece, clo, chi, h2[j], a2[j], ce)
            heapq.heappush(heap, (-ce, next_id))
            next_id += 1
        err = float(sum(v[5] for v in value.values()))
        scale = float(sum(v[4] for v in value.values()))

    total = math.fsum(v[3] for v in value.values())
    return total, err
