import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hgsoliton.errors import EmptyDerivative, InvalidInput, NotAdmissible
from hgsoliton.weights import (
    EXP,
    PluginWeight,
    check_admissible,
    constant_weight,
    derivative,
    derivative_weight,
    make_exp_mix,
    weight_from_json,
)


def test_exp_identity_family():
    g = make_exp_mix([(1, 1)])
    for order in range(3):
        assert g(0.7, order) == pytest.approx(math.exp(0.7))


def test_mixture_admissible():
    g = make_exp_mix([(1, 1), (2, F(1, 2))])
    assert g(0.0) == 3
    assert check_admissible(g, (-10, 10)).passed


@pytest.mark.parametrize(
    "terms",
    [[(1, 0)], [(-1, 1)], [(1, -1)], []],
)
def test_not_admissible(terms):
    with pytest.raises(NotAdmissible):
        make_exp_mix(terms)


def test_derivative_rules():
    assert derivative_weight(EXP).terms == EXP.terms
    g = make_exp_mix([(1, 1), (2, F(1, 2))])
    assert derivative_weight(g).terms == ((F(1), F(1)), (F(1), F(1, 2)))
    assert derivative_weight(make_exp_mix([(3, 2)])).terms == ((F(6), F(2)),)
    assert derivative_weight(make_exp_mix([(5, 0), (1, 1)])).terms == ((F(1), F(1)),)


def test_derivative_of_constant():
    with pytest.raises(EmptyDerivative):
        derivative_weight(constant_weight())


def test_check_exp_log_linear():
    rep = check_admissible(EXP, (-10, 10))
    assert rep.passed
    assert abs(rep.min_log_convexity) < 1e-12


def test_check_plugin_fails_sign():
    g = PluginWeight(lambda x: x, lambda x: np.ones_like(x), lambda x: np.zeros_like(x), "identity")
    rep = check_admissible(g, (-1, 1))
    assert not rep.passed
    assert any("not positive" in f for f in rep.failures)


def test_check_plugin_not_log_convex():
    # sigmoid-like: positive and increasing but log-concave
    g = PluginWeight(
        lambda x: 1 / (1 + np.exp(-x)),
        lambda x: np.exp(-x) / (1 + np.exp(-x)) ** 2,
        lambda x: np.exp(-x) * (np.exp(-x) - 1) / (1 + np.exp(-x)) ** 3,
    )
    rep = check_admissible(g, (-3, 3))
    assert not rep.passed


def test_check_mixture_wide():
    assert check_admissible(make_exp_mix([(1, 1), (1, 2)]), (-5, 5)).passed


def test_plugin_derivative_chain():
    g = PluginWeight(np.exp, np.exp, np.exp)
    assert derivative(g)(0.0) == 1.0


def test_json_forms():
    assert weight_from_json({"type": "exp"}) == EXP
    g = weight_from_json({"type": "exp_mix", "terms": [{"c": "1", "a": "1"}, {"c": "2", "a": "1/2"}]})
    assert g.terms == ((F(1), F(1)), (F(2), F(1, 2)))
    assert weight_from_json(g.to_json()) == g
    with pytest.raises(InvalidInput):
        weight_from_json({"type": "poly"})
    with pytest.raises(InvalidInput):
        weight_from_json({"terms": []})


def test_rescaled():
    g = make_exp_mix([(1, 1), (2, F(1, 2))])
    h = g.rescaled(2)
    assert h(0.3) == pytest.approx(g(0.6))
    with pytest.raises(NotAdmissible):
        g.rescaled(0)


mix = st.lists(
    st.tuples(st.fractions(F(1, 8), 5, max_denominator=8), st.fractions(0, 3, max_denominator=8)),
    min_size=1,
    max_size=4,
).filter(lambda ts: any(a > 0 for _, a in ts))


@settings(max_examples=60, deadline=None)
@given(mix)
def test_mixtures_structurally_admissible(terms):
    g = make_exp_mix(terms)
    rep = check_admissible(g, (-4, 4))
    assert rep.passed, rep.failures
    # derivative by finite differences
    x, h = 0.3, 1e-6
    assert g(x, 1) == pytest.approx((g(x + h) - g(x - h)) / (2 * h), rel=1e-6)
