from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import POLYTOPES
from hgsoliton.dhm import (
    DHMeasure,
    coordinate_pushforwards,
    d1,
    discrete_dh,
    pushforward_density,
    twist_measure,
)
from hgsoliton.errors import InvalidInput, ZeroTwist
from hgsoliton.geom import lattice_points
from hgsoliton.quad import PiecewisePoly, poly_integral


def _cdf(pp: PiecewisePoly, t0) -> float:
    t0 = F(t0)
    lo, hi = pp.support
    if t0 <= lo:
        return 0.0
    if t0 >= hi:
        return float(pp.total_mass)
    q = pp.with_break(t0)
    out = F(0)
    for k, p in enumerate(q.polys):
        if q.breaks[k + 1] <= t0:
            out += poly_integral(p, F(0), q.breaks[k + 1] - q.breaks[k])
    return float(out)


def test_segment_uniform():
    nu = pushforward_density(POLYTOPES["segment"], (1,))
    assert nu.continuous.support == (-1, 1)
    assert nu.continuous(F(1, 3)) == F(1, 2)


def test_square_tent():
    nu = pushforward_density(POLYTOPES["square"], (1, 1))
    d = nu.continuous
    assert d.support == (-2, 2)
    assert d(0) == F(1, 2)
    assert d(1) == F(1, 4)
    assert d(-F(3, 2)) == F(1, 8)


def test_blp2_linear_density():
    d = pushforward_density(POLYTOPES["blp2"], (1, 1)).continuous
    for s in (F(-1), F(-1, 3), F(1, 2), F(1)):
        assert d(s) == (s + 2) / 4


def test_lebesgue_normalization():
    nu = pushforward_density(POLYTOPES["blp2"], (1, 0), "lebesgue")
    assert nu.total_mass == 4


def test_zero_twist():
    with pytest.raises(ZeroTwist):
        pushforward_density(POLYTOPES["square"], (0, 0))
    nu = twist_measure(POLYTOPES["square"], (0, 0))
    assert nu.kind == "atom" and nu.total_mass == 1


def test_shape_mismatch():
    with pytest.raises(InvalidInput):
        pushforward_density(POLYTOPES["square"], (1, 0, 0))


def test_discrete_examples():
    nu = discrete_dh(POLYTOPES["segment"], (1,), 2)
    assert nu.atoms == tuple((F(k, 2), F(1, 5)) for k in range(-2, 3))
    nu = discrete_dh(POLYTOPES["square"], (1, 0), 1)
    assert nu.atoms == ((F(-1), F(1, 3)), (F(0), F(1, 3)), (F(1), F(1, 3)))
    P = POLYTOPES["blp2"]
    pts = lattice_points(P, 1)
    nu = discrete_dh(P, (1, 1), 1)
    assert nu.moment(1) == F(int(pts.sum()), len(pts))


def test_moments_examples():
    assert pushforward_density(POLYTOPES["segment"], (1,)).moment(2) == F(1, 3)
    assert pushforward_density(POLYTOPES["square"], (1, 1)).moment(1) == 0
    for P in POLYTOPES.values():
        assert pushforward_density(P, (1,) * P.dim).moment(0) == 1


def test_d1_examples():
    assert d1(POLYTOPES["segment"], (1,), (-1,)) == 1
    assert d1(POLYTOPES["square"], (1, 1), (0, 0)) == F(2, 3)
    assert d1(POLYTOPES["square"], (1, 1), (1, 1)) == 0


def test_coordinate_pushforward_masses():
    for P in POLYTOPES.values():
        xi = tuple(F(k + 2, 3) for k in range(P.dim))
        mass, first, second = coordinate_pushforwards(P, xi, 2)
        assert mass.total_mass == 1
        assert tuple(f.total_mass for f in first) == P.barycenter
        assert tuple(tuple(s.total_mass for s in row) for row in second) == P.second_moments


def test_json_round_trip():
    nu = pushforward_density(POLYTOPES["hexagon"], (1, 2))
    assert DHMeasure.from_json(nu.to_json()) == nu
    at = discrete_dh(POLYTOPES["square"], (1, 0), 1)
    assert DHMeasure.from_json(at.to_json()) == at


def test_affine_pushforward():
    nu = pushforward_density(POLYTOPES["square"], (1, 1)).affine(1, 2)
    assert nu.support == (0, 4)
    assert nu.mean() == 2


def _sample(P, n, rng):
    verts = np.array([[float(x) for x in v] for v in P.vertices])
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    pts = rng.uniform(lo, hi, size=(4 * n, P.dim))
    A = np.array([[float(x) for x in f.normal] for f in P.facets])
    c = np.array([float(f.offset) for f in P.facets])
    keep = np.all(pts @ A.T + c >= 0, axis=1)
    return pts[keep][:n]


@pytest.mark.parametrize("name", ["blp2", "hexagon", "triangle_wide", "cube", "blp3"])
def test_cdf_against_monte_carlo(name):
    P = POLYTOPES[name]
    rng = np.random.default_rng(123)
    xi = (F(1), F(-2, 3), F(1, 2))[: P.dim]
    pts = _sample(P, 200_000, rng)
    vals = pts @ np.array([float(x) for x in xi])
    d = pushforward_density(P, xi).continuous
    lo, hi = (float(x) for x in d.support)
    for t in np.linspace(lo, hi, 7)[1:-1]:
        t_q = F(t).limit_denominator(1000)
        emp = float(np.mean(vals <= float(t_q)))
        # binomial standard error at n=2e5 is below 1.2e-3
        assert abs(_cdf(d, t_q) - emp) < 6e-3


coweights = st.lists(st.fractions(-3, 3, max_denominator=5), min_size=2, max_size=2).filter(
    lambda v: any(x != 0 for x in v)
)


@settings(max_examples=40, deadline=None)
@given(coweights)
def test_density_nonnegative_and_normalized(xi):
    for name in ("blp2", "bl2p2", "rational_triangle"):
        nu = pushforward_density(POLYTOPES[name], tuple(xi))
        assert nu.total_mass == 1
        assert nu.continuous.check_nonnegative()


@settings(max_examples=25, deadline=None)
@given(coweights, coweights)
def test_d1_symmetric(xi, eta):
    P = POLYTOPES["hexagon"]
    assert d1(P, xi, eta) == d1(P, eta, xi)
    assert d1(P, xi, eta) >= 0
