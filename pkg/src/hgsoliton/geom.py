"""Exact rational convex polytopes in weight space.

A :class:`Polytope` carries both a vertex list and a facet list

    P = {alpha : <alpha, rho_j> >= -c_j  for all j}

with primitive integer inward normals ``rho_j``. For a toric log Fano pair the
offset ``c_j`` is the log discrepancy of the j-th toric boundary divisor, which
is why the support function

    a(rho) = -min_{alpha in P} <alpha, rho>

doubles as the log discrepancy of the monomial valuation ``wt_rho``: on the
normal cone of a vertex ``v`` the minimum is attained at ``v``, so ``a`` is the
piecewise-linear function with ``a(rho_j) = c_j``.

All geometry is done in :class:`fractions.Fraction`; no floating point value is
ever trusted without an exact check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import rational as rq
from .errors import DegeneratePolytope, InvalidInput

Vector = tuple[Fraction, ...]


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: Fraction

    def value(self, alpha: Sequence[Fraction]) -> Fraction:
        """Slack ``<alpha, normal> + offset`` (nonnegative on the polytope)."""
        return rq.dot(alpha, self.normal) + self.offset


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[Vector, ...]
    volume: Fraction

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @classmethod
    def from_vertices(cls, vertices: Iterable[Sequence]) -> "Simplex":
        verts = tuple(rq.to_vector(v) for v in vertices)
        r = len(verts) - 1
        if any(len(v) != r for v in verts):
            raise InvalidInput("a simplex in R^r needs r+1 vertices")
        vol = abs(rq.det([rq.sub(v, verts[0]) for v in verts[1:]])) / math.factorial(r)
        if vol == 0:
            raise DegeneratePolytope("simplex vertices are affinely dependent")
        return cls(verts, vol)

    def centroid(self) -> Vector:
        n = len(self.vertices)
        return tuple(sum(c) / n for c in zip(*self.vertices))


@dataclass(frozen=True)
class Triangulation:
    simplices: tuple[Simplex, ...]
    parent: "Polytope" = field(repr=False, compare=False)

    @property
    def volume(self) -> Fraction:
        return sum((s.volume for s in self.simplices), Fraction(0))

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: tuple[Vector, ...]
    facets: tuple[Facet, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInput("polytope dimension must be positive")

    @cached_property
    def triangulation(self) -> Triangulation:
        return triangulate(self)

    @cached_property
    def volume(self) -> Fraction:
        return self.triangulation.volume

    @cached_property
    def barycenter(self) -> Vector:
        """Centroid, assembled from simplex centroids (exact)."""
        vol = self.volume
        acc = [Fraction(0)] * self.dim
        for s in self.triangulation:
            for i, c in enumerate(s.centroid()):
                acc[i] += s.volume * c
        return tuple(x / vol for x in acc)

    @cached_property
    def second_moments(self) -> tuple[tuple[Fraction, ...], ...]:
        """Normalized matrix of integrals of ``alpha_i * alpha_j`` over P."""
        r = self.dim
        acc = [[Fraction(0)] * r for _ in range(r)]
        for s in self.triangulation:
            sums = [sum(c) for c in zip(*s.vertices)]
            w = s.volume / ((r + 1) * (r + 2))
            for i in range(r):
                for j in range(r):
                    quad = sum(v[i] * v[j] for v in s.vertices)
                    acc[i][j] += w * (quad + sums[i] * sums[j])
        return tuple(tuple(x / self.volume for x in row) for row in acc)

    def contains(self, alpha: Sequence) -> bool:
        a = rq.to_vector(alpha)
        return all(f.value(a) >= 0 for f in self.facets)

    def contains_origin_in_interior(self) -> bool:
        return all(f.offset > 0 for f in self.facets)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": [[rq.fmt_rational(x) for x in v] for v in self.vertices],
        }

    def facets_json(self) -> dict:
        return {
            "facets": [
                {"normal": [str(n) for n in f.normal], "offset": rq.fmt_rational(f.offset)}
                for f in self.facets
            ]
        }

    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, facets={len(self.facets)})"


def _affine_dim(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    return rq.rank([rq.sub(p, points[0]) for p in points[1:]])


def _canonical_facet(normal: Sequence[Fraction], base: Vector) -> Facet:
    ints, _ = rq.primitive_integer(normal)
    return Facet(ints, -rq.dot(base, ints))


def _hyperplane_through(points: Sequence[Vector], r: int) -> Vector | None:
    rows = [rq.sub(p, points[0]) for p in points[1:]]
    ns = rq.nullspace(rows, r)
    if len(ns) != 1:
        return None
    return ns[0]


def _supporting_facet(normal: Vector, base: Vector, points: Sequence[Vector]) -> Facet | None:
    """Orient ``normal`` inward if every point lies on one side, else ``None``."""
    h = rq.dot(base, normal)
    vals = [rq.dot(p, normal) - h for p in points]
    if all(v >= 0 for v in vals):
        return _canonical_facet(normal, base)
    if all(v <= 0 for v in vals):
        return _canonical_facet(tuple(-x for x in normal), base)
    return None


def _facets_bruteforce(points: Sequence[Vector], r: int) -> set[Facet]:
    found: set[Facet] = set()
    for combo in itertools.combinations(points, r):
        normal = _hyperplane_through(combo, r)
        if normal is None:
            continue
        f = _supporting_facet(normal, combo[0], points)
        if f is not None:
            found.add(f)
    return found


def _facets_qhull(points: Sequence[Vector], r: int) -> set[Facet] | None:
    """Candidate facets from Qhull, each re-derived and checked exactly."""
    try:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(np.array([[float(x) for x in p] for p in points]))
    except Exception:
        return None
    found: set[Facet] = set()
    for simplex in hull.simplices:
        combo = [points[i] for i in simplex]
        normal = _hyperplane_through(combo, r)
        if normal is None:
            return None
        f = _supporting_facet(normal, combo[0], points)
        if f is None:
            return None
        found.add(f)
    return found


def _facet_rank_ok(point: Vector, facets: Sequence[Facet], r: int) -> bool:
    tight = [f.normal for f in facets if f.value(point) == 0]
    return len(tight) >= r and rq.rank([[Fraction(x) for x in n] for n in tight]) == r


def vertices_from_facets(facets: Sequence[Facet], r: int) -> tuple[Vector, ...]:
    """Vertex enumeration: feasible intersections of ``r`` facet hyperplanes."""
    out: set[Vector] = set()
    for combo in itertools.combinations(facets, r):
        a = [[Fraction(x) for x in f.normal] for f in combo]
        b = [-f.offset for f in combo]
        sol = rq.solve(a, b)
        if sol is None:
            continue
        if all(f.value(sol) >= 0 for f in facets):
            out.add(sol)
    return tuple(sorted(out))


def build_polytope(vertices: Iterable[Sequence], *, cross_check: bool = True) -> Polytope:
    """Convex hull of rational points with both representations.

    Duplicate and non-extreme input points are dropped. Raises
    :class:`DegeneratePolytope` unless the points span R^r.
    """
    pts = sorted(set(rq.to_vector(v) for v in vertices))
    if not pts:
        raise InvalidInput("empty vertex list")
    r = len(pts[0])
    if r == 0 or any(len(p) != r for p in pts):
        raise InvalidInput("vertices must share a positive dimension")
    if len(pts) < r + 1 or _affine_dim(pts) < r:
        raise DegeneratePolytope(f"points do not span an affine space of dimension {r}")

    if r == 1:
        lo, hi = pts[0][0], pts[-1][0]
        facets = {Facet((1,), -lo), Facet((-1,), hi)}
    else:
        facets = _facets_qhull(pts, r)
        if facets is None:
            facets = _facets_bruteforce(pts, r)
    facet_list = tuple(sorted(facets, key=lambda f: (f.normal, f.offset)))
    verts = tuple(p for p in pts if _facet_rank_ok(p, facet_list, r))

    if r > 1 and len(facet_list) < r + 1:
        raise DegeneratePolytope("hull has too few facets")
    if cross_check and vertices_from_facets(facet_list, r) != verts:
        # Qhull can miss facets on nearly-degenerate input; redo exactly.
        facet_list = tuple(sorted(_facets_bruteforce(pts, r), key=lambda f: (f.normal, f.offset)))
        verts = tuple(p for p in pts if _facet_rank_ok(p, facet_list, r))
        if vertices_from_facets(facet_list, r) != verts:
            raise DegeneratePolytope("V- and H-representations disagree")
    return Polytope(r, verts, facet_list)


def polytope_from_facets(facets: Iterable[tuple[Sequence, object]]) -> Polytope:
    """Build from (normal, offset) pairs meaning ``<alpha, normal> >= -offset``."""
    fs = []
    for normal, offset in facets:
        n = rq.to_vector(normal)
        ints, scale = rq.primitive_integer(n)
        fs.append(Facet(ints, rq.to_fraction(offset) * scale))
    if not fs:
        raise InvalidInput("no facets")
    r = len(fs[0].normal)
    verts = vertices_from_facets(fs, r)
    if not verts:
        raise DegeneratePolytope("empty intersection")
    return build_polytope(verts)


def polytope_from_json(data: dict) -> Polytope:
    try:
        verts = data["vertices"]
    except (KeyError, TypeError) as exc:
        raise InvalidInput("polytope JSON needs a 'vertices' list") from exc
    p = build_polytope(verts)
    if "dim" in data and int(data["dim"]) != p.dim:
        raise InvalidInput(f"declared dim {data['dim']} but vertices have dim {p.dim}")
    return p


def support_value(P: Polytope, rho: Sequence) -> Fraction:
    """``-min_{v in P} <v, rho>``; positively homogeneous and convex in rho."""
    r = rq.to_vector(rho)
    if len(r) != P.dim:
        raise InvalidInput(f"vector of length {len(r)} for a polytope of dim {P.dim}")
    return -min(rq.dot(v, r) for v in P.vertices)


def _face_dim(P: Polytope, vset: frozenset[int], memo: dict) -> int:
    d = memo.get(vset)
    if d is None:
        d = _affine_dim([P.vertices[i] for i in sorted(vset)])
        memo[vset] = d
    return d


def triangulate(P: Polytope) -> Triangulation:
    """Pulling triangulation: cone from the lex-least vertex over the facets
    that avoid it, recursively. Deterministic given the sorted vertex list."""
    facet_sets = [
        frozenset(i for i, v in enumerate(P.vertices) if f.value(v) == 0) for f in P.facets
    ]
    memo: dict = {}

    def subfaces(vset: frozenset[int], d: int) -> list[frozenset[int]]:
        seen = []
        for fs in facet_sets:
            g = vset & fs
            if g and g != vset and g not in seen and _face_dim(P, g, memo) == d - 1:
                seen.append(g)
        return sorted(seen, key=sorted)

    def rec(vset: frozenset[int], d: int) -> list[tuple[int, ...]]:
        if d == 0:
            return [(min(vset),)]
        v0 = min(vset)
        out = []
        for g in subfaces(vset, d):
            if v0 in g:
                continue
            out.extend((v0,) + s for s in rec(g, d - 1))
        return out

    full = frozenset(range(len(P.vertices)))
    simplices = tuple(
        Simplex.from_vertices([P.vertices[i] for i in idx]) for idx in rec(full, P.dim)
    )
    return Triangulation(simplices, P)


def lattice_points(P: Polytope, m: int) -> np.ndarray:
    """Integer points of the dilate ``m*P`` as an ``(N, r)`` int64 array in
    lexicographic order.

    Enumerates the bounding box of the first r-1 coordinates and solves the
    facet inequalities for an integer interval in the last coordinate.
    """
    if m < 1:
        raise InvalidInput("dilation factor must be >= 1")
    r = P.dim
    lo = [math.floor(m * min(v[i] for v in P.vertices)) for i in range(r)]
    hi = [math.ceil(m * max(v[i] for v in P.vertices)) for i in range(r)]
    if r == 1:
        prefixes = np.zeros((1, 0), dtype=np.int64)
    else:
        axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(r - 1)]
        grid = np.meshgrid(*axes, indexing="ij")
        prefixes = np.stack([g.ravel() for g in grid], axis=1)
    n = prefixes.shape[0]
    last_lo = np.full(n, lo[-1], dtype=np.int64)
    last_hi = np.full(n, hi[-1], dtype=np.int64)
    ok = np.ones(n, dtype=bool)
    for f in P.facets:
        # q * <alpha, rho> >= -m * p   with offset p/q
        p, q = f.offset.numerator, f.offset.denominator
        head = prefixes @ np.array([q * x for x in f.normal[:-1]], dtype=np.int64) if r > 1 else 0
        a = q * f.normal[-1]
        b = -m * p - head
        if a > 0:
            last_lo = np.maximum(last_lo, -((-b) // a))
        elif a < 0:
            last_hi = np.minimum(last_hi, (-b) // (-a))
        else:
            ok &= np.asarray(b <= 0)
    ok &= last_lo <= last_hi
    prefixes, last_lo, last_hi = prefixes[ok], last_lo[ok], last_hi[ok]
    counts = last_hi - last_lo + 1
    total = int(counts.sum())
    rows = np.repeat(np.arange(len(counts)), counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    out = np.empty((total, r), dtype=np.int64)
    if r > 1:
        out[:, :-1] = prefixes[rows]
    out[:, -1] = last_lo[rows] + offsets
    return out
