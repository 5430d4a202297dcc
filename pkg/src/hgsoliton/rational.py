"""Exact rational helpers: parsing, formatting, snapping and small linear algebra."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidInput

SNAP_DENOMINATOR = 2**40

Vector = tuple[Fraction, ...]


def to_fraction(x) -> Fraction:
    """Convert ``"p/q"`` strings, ints, Fractions and floats to a Fraction.

    Floats are converted exactly (no snapping); use :func:`snap` for that.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidInput(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidInput(f"non-finite number: {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"cannot parse rational {x!r}") from exc
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"cannot parse rational {x!r}") from exc


def to_vector(xs: Iterable) -> Vector:
    return tuple(to_fraction(x) for x in xs)


def fmt_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def fmt_float(x: float) -> str:
    """Lossless decimal rendering with 17 significant digits."""
    return format(float(x), ".17g")


def snap(x) -> tuple[Fraction, float]:
    """Snap a real number to a rational with denominator at most 2**40.

    Returns the rational and the absolute snapping error. Rationals pass
    through untouched with zero error.
    """
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return Fraction(x), 0.0
    if isinstance(x, str):
        return to_fraction(x), 0.0
    xf = float(x)
    if not math.isfinite(xf):
        raise InvalidInput(f"non-finite coordinate {x!r}")
    q = Fraction(xf).limit_denominator(SNAP_DENOMINATOR)
    return q, abs(float(Fraction(xf) - q))


def snap_vector(xs: Iterable) -> tuple[Vector, float]:
    out = []
    err = 0.0
    for x in xs:
        q, e = snap(x)
        out.append(q)
        err = max(err, e)
    return tuple(out), err


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u: Sequence, v: Sequence) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def primitive_integer(v: Sequence[Fraction]) -> tuple[tuple[int, ...], Fraction]:
    """Scale ``v`` to a primitive integer vector; returns it with the scale used."""
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for n in ints:
        g = math.gcd(g, n)
    if g == 0:
        raise InvalidInput("zero vector has no primitive scaling")
    return tuple(n // g for n in ints), Fraction(den, g)


def row_reduce(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns the matrix and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        m[row] = [x * inv for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
        if row == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_reduce(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[Vector]:
    """Basis of the right nullspace of ``rows`` (exact)."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    red, pivots = row_reduce(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -red[r][f]
        basis.append(tuple(v))
    return basis


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vector | None:
    """Solve a square system exactly; ``None`` when singular."""
    n = len(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = row_reduce(aug)
    if pivots != list(range(n)):
        return None
    return tuple(red[i][n] for i in range(n))


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in a]
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            out = -out
        out *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return out
