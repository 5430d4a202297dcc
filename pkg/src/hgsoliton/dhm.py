"""Duistermaat-Heckman measures of twist filtrations.

For a twist by a coweight ``xi`` the concave transform is the linear function
``alpha -> <alpha, xi>``, so the DH measure is the pushforward of normalized
Lebesgue measure on the polytope along it.

Per simplex with vertex values ``t_0..t_r`` (Hermite-Genocchi)

    int_simplex F(<alpha, xi>) d alpha = r! vol * int_{S_r} F(sum lambda_k t_k) d lambda

and the pushforward of Lebesgue on the standard n-simplex under
``lambda -> sum lambda_k x_k`` has density ``[x_0..x_n](. - t)_+^{n-1} / (n-1)!``
(a B-spline). A barycentric monomial weight ``lambda^beta`` is absorbed by
repeating each knot ``x_k`` ``beta_k`` more times, at the price of a factor
``beta!``. That gives exact densities of ``alpha_i d alpha`` and
``alpha_i alpha_j d alpha`` as well, which the Hessian of H^g needs.

Repeated knots are handled by Hermite divided differences, never perturbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import rational as rq
from .errors import InvalidInput, ZeroTwist
from .geom import Polytope, lattice_points
from .quad import MAX_DEGREE, PiecewisePoly, poly_shift

NORMALIZATIONS = ("probability", "lebesgue")


@dataclass(frozen=True)
class DHMeasure:
    """Measure on the line: optional piecewise-polynomial density plus atoms.

    ``atoms`` holds ``(location, mass)`` pairs with exact rational locations
    sorted increasingly.
    """

    continuous: PiecewisePoly | None = None
    atoms: tuple[tuple[Fraction, Fraction], ...] = ()

    @property
    def kind(self) -> str:
        if self.continuous is not None and not self.atoms:
            return "continuous"
        if self.continuous is None and len(self.atoms) == 1:
            return "atom"
        if self.continuous is None:
            return "discrete"
        return "mixed"

    @classmethod
    def atom(cls, location=0, mass=1) -> "DHMeasure":
        return cls(None, ((rq.to_fraction(location), rq.to_fraction(mass)),))

    @property
    def total_mass(self) -> Fraction:
        m = sum((w for _, w in self.atoms), Fraction(0))
        if self.continuous is not None:
            m += self.continuous.total_mass
        return m

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        ends = [x for x, w in self.atoms if w != 0]
        if self.continuous is not None:
            ends.extend(self.continuous.support)
        return min(ends), max(ends)

    def moment(self, k: int) -> Fraction:
        if k < 0 or k > MAX_DEGREE:
            raise InvalidInput(f"moment order {k} outside [0, {MAX_DEGREE}]")
        out = sum((w * x**k for x, w in self.atoms), Fraction(0))
        if self.continuous is not None:
            out += self.continuous.moment(k)
        return out

    def mean(self) -> Fraction:
        return self.moment(1) / self.total_mass

    def affine(self, a, b) -> "DHMeasure":
        """Pushforward under ``t -> a t + b``, a > 0."""
        a, b = rq.to_fraction(a), rq.to_fraction(b)
        cont = None if self.continuous is None else self.continuous.affine(a, b)
        return DHMeasure(cont, tuple((a * x + b, w) for x, w in self.atoms))

    def to_json(self) -> dict:
        out: dict = {}
        if self.continuous is not None:
            out.update(self.continuous.to_json())
        if self.atoms:
            out["atoms"] = [
                {"t": rq.fmt_rational(x), "m": rq.fmt_rational(w)} for x, w in self.atoms
            ]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "DHMeasure":
        if not isinstance(data, dict):
            raise InvalidInput("DH measure JSON must be an object")
        cont = PiecewisePoly.from_json(data) if "breaks" in data else None
        try:
            atoms = tuple(
                sorted((rq.to_fraction(a["t"]), rq.to_fraction(a["m"])) for a in data.get("atoms", []))
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput("atoms need 't' and 'm' fields") from exc
        if cont is None and not atoms:
            raise InvalidInput("DH measure JSON has neither pieces nor atoms")
        if any(w < 0 for _, w in atoms):
            raise InvalidInput("negative atom mass")
        return cls(cont, atoms)


# -- divided differences of truncated powers ---------------------------------


@lru_cache(maxsize=4096)
def _dd_functional(knots: tuple[Fraction, ...]) -> tuple[tuple[Fraction, int, Fraction], ...]:
    """Weights ``w`` with ``[x_0..x_n] f = sum w * f^(j)(u)`` as ``(u, j, w)``.

    Hermite divided-difference table run on symbolic data; ``knots`` sorted.
    """
    z = knots
    n = len(z) - 1
    col: list[dict] = [{(x, 0): Fraction(1)} for x in z]
    for k in range(1, n + 1):
        new = []
        for i in range(k, n + 1):
            if z[i] == z[i - k]:
                new.append({(z[i], k): Fraction(1, math.factorial(k))})
            else:
                d = z[i] - z[i - k]
                hi, lo = col[i - k + 1], col[i - k]
                entry = {key: v / d for key, v in hi.items()}
                for key, v in lo.items():
                    entry[key] = entry.get(key, Fraction(0)) - v / d
                new.append(entry)
        col = new
    return tuple((u, j, w) for (u, j), w in sorted(col[0].items()) if w != 0)


def _add_spline(acc: dict, knots: Sequence[Fraction], coeff: Fraction) -> None:
    """Accumulate ``coeff * [knots](. - t)_+^d / d!`` as terms ``C[u][e] (u - t)^e``."""
    ks = tuple(sorted(knots))
    if ks[0] == ks[-1]:
        raise ZeroTwist("coweight is constant on a full-dimensional simplex")
    d = len(ks) - 2
    for u, j, w in _dd_functional(ks):
        e = d - j
        row = acc.setdefault(u, {})
        row[e] = row.get(e, Fraction(0)) + coeff * w / math.factorial(e)


def _assemble(acc: dict, breaks: Sequence[Fraction]) -> PiecewisePoly:
    """Turn ``sum_{u > t} C[u][e] (u - t)^e`` into local pieces on ``breaks``."""
    deg = 1 + max((e for row in acc.values() for e in row), default=0)
    glob = [Fraction(0)] * deg  # running polynomial in t
    polys = []
    for k in range(len(breaks) - 2, -1, -1):
        u = breaks[k + 1]
        for e, c in acc.get(u, {}).items():
            # (u - t)^e = sum_i binom(e, i) u^(e-i) (-t)^i
            for i in range(e + 1):
                glob[i] += c * math.comb(e, i) * u ** (e - i) * (-1) ** i
        polys.append(poly_shift(glob, breaks[k]))
    polys.reverse()
    return PiecewisePoly(tuple(breaks), tuple(polys))


def _check_xi(P: Polytope, xi) -> tuple[Fraction, ...]:
    v = rq.to_vector(xi)
    if len(v) != P.dim:
        raise InvalidInput(f"coweight of length {len(v)} for a polytope of dim {P.dim}")
    return v


@lru_cache(maxsize=512)
def _pushforwards(P: Polytope, xi: tuple[Fraction, ...], order: int):
    """Normalized pushforwards of ``alpha^beta dnu_P`` for ``|beta| <= order``.

    Returns ``(mass, first, second)``; ``first[i]`` and ``second[i][j]`` are
    ``None`` when not requested.
    """
    if all(x == 0 for x in xi):
        raise ZeroTwist("pushforward along the zero coweight is an atom")
    r = P.dim
    breaks = sorted(set(rq.dot(v, xi) for v in P.vertices))
    mass_acc: dict = {}
    first_acc = [dict() for _ in range(r)] if order >= 1 else None
    second_acc = [[dict() for _ in range(r)] for _ in range(r)] if order >= 2 else None
    vol = P.volume
    rfact = math.factorial(r)
    for s in P.triangulation:
        t = [rq.dot(v, xi) for v in s.vertices]
        base = rfact * s.volume / vol
        _add_spline(mass_acc, t, base)
        if first_acc is not None:
            for k, vk in enumerate(s.vertices):
                for i in range(r):
                    if vk[i]:
                        _add_spline(first_acc[i], t + [t[k]], base * vk[i])
        if second_acc is not None:
            n = len(t)
            for k in range(n):
                for l in range(k, n):
                    vk, vl = s.vertices[k], s.vertices[l]
                    knots = t + [t[k], t[l]]
                    for i in range(r):
                        for j in range(i, r):
                            if k == l:
                                c = 2 * vk[i] * vk[j]
                            else:
                                c = vk[i] * vl[j] + vl[i] * vk[j]
                            if c:
                                _add_spline(second_acc[i][j], knots, base * c)
    mass = _assemble(mass_acc, breaks)
    first = tuple(_assemble(a, breaks) for a in first_acc) if first_acc is not None else None
    second = None
    if second_acc is not None:
        rows = [[None] * r for _ in range(r)]
        for i in range(r):
            for j in range(i, r):
                rows[i][j] = rows[j][i] = _assemble(second_acc[i][j], breaks)
        second = tuple(tuple(row) for row in rows)
    return mass, first, second


def coordinate_pushforwards(P: Polytope, xi, order: int = 2):
    """Exact pushforward densities of ``dnu_P``, ``alpha_i dnu_P`` and
    ``alpha_i alpha_j dnu_P`` along ``<., xi>`` (rational ``xi != 0``)."""
    return _pushforwards(P, _check_xi(P, xi), order)


def pushforward_density(P: Polytope, xi, normalization: str = "probability") -> DHMeasure:
    """Continuous DH measure of the twist ``F_{triv, xi}``."""
    if normalization not in NORMALIZATIONS:
        raise InvalidInput(f"normalization must be one of {NORMALIZATIONS}")
    xi = _check_xi(P, xi)
    mass, _, _ = _pushforwards(P, xi, 0)
    if mass.total_mass != 1:  # exact rational bookkeeping
        raise AssertionError(f"pushforward mass {mass.total_mass} != 1")
    if normalization == "lebesgue":
        mass = mass.scaled(P.volume)
    return DHMeasure(mass)


def twist_measure(P: Polytope, xi, normalization: str = "probability") -> DHMeasure:
    """Like :func:`pushforward_density` but returns the unit atom at 0 for xi = 0."""
    xi = _check_xi(P, xi)
    if all(x == 0 for x in xi):
        w = P.volume if normalization == "lebesgue" else Fraction(1)
        return DHMeasure.atom(0, w)
    return pushforward_density(P, xi, normalization)


def _lattice_values(P: Polytope, direction: Sequence[Fraction], m: int, pts=None):
    """Integers ``n_alpha`` and denominator ``D`` with ``<alpha, dir> = n_alpha / D``."""
    if pts is None:
        pts = lattice_points(P, m)
    den = 1
    for x in direction:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in direction]
    bound = max((abs(v) for v in ints), default=0) * (int(np.abs(pts).max()) if pts.size else 0) * P.dim
    if bound < 2**62:
        vals = pts @ np.array(ints, dtype=np.int64)
    else:
        vals = pts.astype(object) @ np.array(ints, dtype=object)
    return vals, den, pts


def discrete_dh(P: Polytope, xi, m: int) -> DHMeasure:
    """Level-m DH measure: mass ``1/N`` at ``<alpha, xi>/m`` for each of the
    ``N`` lattice points of ``mP``, equal locations merged."""
    if m < 1:
        raise InvalidInput("level m must be >= 1")
    xi = _check_xi(P, xi)
    vals, den, pts = _lattice_values(P, xi, m)
    n = len(pts)
    uniq, counts = np.unique(vals, return_counts=True)
    atoms = tuple(
        (Fraction(int(u), den * m), Fraction(int(c), n)) for u, c in zip(uniq, counts)
    )
    return DHMeasure(None, atoms)


def moment(nu: DHMeasure, k: int) -> Fraction:
    return nu.moment(k)


def d1(P: Polytope, xi, eta) -> Fraction:
    """L1 distance of two twists: ``int_P |<alpha, xi - eta>| dnu_P`` (exact)."""
    diff = tuple(a - b for a, b in zip(_check_xi(P, xi), _check_xi(P, eta)))
    if all(x == 0 for x in diff):
        return Fraction(0)
    return pushforward_density(P, diff).continuous.abs_moment()
