import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from corpus import POLYTOPES, WEIGHTS
from hgsoliton.dhm import DHMeasure
from hgsoliton.errors import InvalidInput, NotCoercive
from hgsoliton.invariants import hg
from hgsoliton.quad import PiecewisePoly
from hgsoliton.rankone import Profile, beta_tilde, minimize_beta, profile_from_toric
from hgsoliton.weights import EXP


def _uniform(lo, hi, A, label=""):
    return Profile(DHMeasure(PiecewisePoly.uniform(lo, hi)), F(A), label)


def test_beta_closed_form():
    assert beta_tilde(_uniform(-1, 1, 1), EXP, 1) == pytest.approx(1 + math.log(math.sinh(1)), abs=1e-12)


def test_small_rescaling_limit():
    p = _uniform(-1, 1, 1)
    assert beta_tilde(p, WEIGHTS["mix_half"], 1e-9) == pytest.approx(math.log(3), abs=1e-8)


def test_minimum_at_zero():
    m = minimize_beta(_uniform(-1, 1, 1), EXP)
    assert m.a_star == 0 and not m.interior


def test_interior_minimum_vs_root_oracle():
    def tilted_mean(a):
        num = integrate.quad(lambda t: t * math.exp(-a * t), 0, 4, epsrel=1e-14)[0]
        den = integrate.quad(lambda t: math.exp(-a * t), 0, 4, epsrel=1e-14)[0]
        return num / den - 1

    oracle = optimize.brentq(tilted_mean, 1e-6, 50, xtol=1e-15)
    m = minimize_beta(_uniform(0, 4, 1), EXP)
    assert m.interior
    assert m.a_star == pytest.approx(oracle, abs=1e-10)


def test_not_coercive_cases():
    with pytest.raises(NotCoercive):
        minimize_beta(_uniform(-1, 1, 2), EXP)
    with pytest.raises(NotCoercive):
        minimize_beta(_uniform(1, 3, 1), EXP)


def test_atomic_profile():
    dh = DHMeasure(None, ((F(0), F(1, 2)), (F(2), F(1, 2))))
    p = Profile(dh, F(1))
    assert beta_tilde(p, EXP, 1) == pytest.approx(math.log(math.cosh(1)))


def test_profile_validation():
    with pytest.raises(InvalidInput):
        Profile(DHMeasure(None, ((F(0), F(1, 2)),)), F(1))
    with pytest.raises(InvalidInput):
        Profile.from_json({"dh": {}})


def test_profile_from_toric_examples():
    p = profile_from_toric(POLYTOPES["segment"], (1,))
    assert p.A == 1 and p.dh.support == (0, 2)
    assert beta_tilde(p, EXP, 1) == pytest.approx(math.log(math.sinh(1)), abs=1e-12)
    p = profile_from_toric(POLYTOPES["square"], (1, 1))
    assert p.A == 2 and p.dh.support == (0, 4)
    p = profile_from_toric(POLYTOPES["blp2"], (1, 1))
    assert p.A == 1
    for s in (F(0), F(1, 2), F(2)):
        assert p.dh.continuous(s) == (s + 1) / 4


def test_json_round_trip():
    p = profile_from_toric(POLYTOPES["hexagon"], (1, 2))
    q = Profile.from_json(p.to_json())
    assert q == p


@settings(max_examples=30, deadline=None)
@given(st.fractions(F(1, 8), F(31, 8), max_denominator=8), st.floats(0.05, 20))
def test_beta_convex_in_a(A, a):
    p = _uniform(0, 4, A)
    h = 1e-3 * a
    second = beta_tilde(p, EXP, a + h) - 2 * beta_tilde(p, EXP, a) + beta_tilde(p, EXP, a - h)
    assert second >= -1e-10


@settings(max_examples=20, deadline=None)
@given(st.fractions(F(1, 8), F(15, 8), max_denominator=8))
def test_minimizer_is_stationary(A):
    # inf < A < mean gives an interior minimizer with beta' = 0
    p = _uniform(0, 4, A)
    m = minimize_beta(p, EXP)
    assert m.interior
    h = 1e-5 * max(m.a_star, 1)
    assert beta_tilde(p, EXP, m.a_star) <= beta_tilde(p, EXP, m.a_star + h) + 1e-13
    assert beta_tilde(p, EXP, m.a_star) <= beta_tilde(p, EXP, m.a_star - h) + 1e-13


@settings(max_examples=20, deadline=None)
@given(st.fractions(2, 4, max_denominator=8))
def test_tail_monotone_when_A_above_mean(A):
    # A at or above the mean: beta is nondecreasing in a
    p = _uniform(0, 4, A)
    assert minimize_beta(p, EXP).a_star == 0
    vals = [beta_tilde(p, EXP, a) for a in (0.1, 0.5, 1, 2, 5)]
    assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", ["blp2", "cube", "rational_triangle"])
def test_toric_identity_other_weights(name):
    P = POLYTOPES[name]
    xi = (F(1, 2), F(-1, 3), F(1))[: P.dim]
    for g in WEIGHTS.values():
        assert beta_tilde(profile_from_toric(P, xi), g, 1) == pytest.approx(hg(P, g, xi), abs=1e-10)
