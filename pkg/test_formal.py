#!/usr/bin/env python3
"""
Tests for coefficient rings, truncated series and formal group laws
"""

import os
import sys

import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from flaglh.exceptions import FormalGroupLawError  # noqa: E402
from flaglh.formal import (  # noqa: E402
    CoeffRing,
    law_coeff_ring,
    make_fgl,
    nary_sum,
    serialize_series,
    truncate,
    weight_parts,
)


def test_additive_law():
    fgl = make_fgl("additive", "rational", trunc=4)
    t, u = fgl.ring2.gens[:2]
    assert fgl.F == t + u
    assert fgl.G == 0
    assert fgl.inverse == -fgl.ring1.gens[0]
    assert all(passed for passed, _ in fgl.check_axioms())


def test_multiplicative_formal_law():
    fgl = make_fgl("multiplicative:formal", "rational", trunc=6)
    t, u, kappa = fgl.ring2.gens
    assert fgl.F == t + u - kappa * t * u
    assert fgl.G == kappa
    t1, k1 = fgl.ring1.gens
    expected = sum(-(k1 ** k) * t1 ** (k + 1) for k in range(7))
    assert fgl.inverse == expected


def test_m_series():
    fgl = make_fgl("multiplicative:formal", "rational", trunc=6)
    t, kappa = fgl.ring1.gens
    assert fgl.m_series(2) == 2 * t - kappa * t ** 2
    assert fgl.m_series(-1) == fgl.inverse
    assert fgl.m_series(0) == 0


def test_specialized_kappa_serializes_numerically():
    coeff = law_coeff_ring("multiplicative:1", "rational")
    assert coeff.specialization == {"kappa": 1}
    fgl = make_fgl("multiplicative:1", coeff, trunc=6)
    assert serialize_series(fgl.m_series(2), 1, coeff) == [[[1], "2"], [[2], "-1"]]
    assert coeff.describe() == "rational,kappa=1"
    assert serialize_series(fgl.m_series(2), 1, coeff, specialize=False) == [[[1], "2"], [[2], "-kappa"]]


def test_generic_law_depth_one():
    fgl = make_fgl("generic:1", "rational", trunc=4)
    t, u, m1 = fgl.ring2.gens
    assert fgl.F.coeff(t) == 1
    assert fgl.F.coeff(u) == 1
    assert fgl.F.coeff(t * u * m1) == -2
    assert fgl.F.coeff(t ** 2 * m1) == 0
    assert all(passed for passed, _ in fgl.check_axioms())


def test_generic_law_depth_two_axioms():
    fgl = make_fgl("generic:2", "rational", trunc=4)
    assert fgl.coeff.params == ("m1", "m2")
    assert fgl.coeff.weights == (1, 2)
    assert all(passed for passed, _ in fgl.check_axioms())


def test_law_errors():
    with pytest.raises(FormalGroupLawError):
        make_fgl("generic:2", "integer", trunc=4)
    with pytest.raises(FormalGroupLawError):
        make_fgl("elliptic", "rational")
    with pytest.raises(FormalGroupLawError):
        law_coeff_ring("multiplicative:1/2", "integer")
    with pytest.raises(FormalGroupLawError):
        make_fgl("additive", "rational", trunc=0)
    with pytest.raises(FormalGroupLawError):
        CoeffRing("complex")


def test_truncation_by_parameter_weight():
    coeff = CoeffRing("rational", ("kappa",), (1,))
    R = coeff.series_ring(("t",))
    t, kappa = R.gens
    p = t + kappa * t ** 2 + kappa ** 3 * t ** 4
    assert truncate(p, 1, (1,), 2) == t + kappa * t ** 2
    parts = weight_parts(p, 1, (1,))
    assert sorted(parts) == [0, 1, 3]
    assert parts[3] == kappa ** 3 * t ** 4


def test_nary_sum_rejects_constant_terms():
    fgl = make_fgl("multiplicative:formal", "rational", trunc=3)
    R = fgl.ring2
    t, u, kappa = R.gens
    assert nary_sum(fgl, [t, u], R, 2) == fgl.F
    with pytest.raises(FormalGroupLawError):
        nary_sum(fgl, [t, 1 + u], R, 2)


def test_integer_coefficients():
    coeff = law_coeff_ring("multiplicative:formal", "integer")
    assert not coeff.has_rationals
    fgl = make_fgl("multiplicative:formal", coeff, trunc=3)
    assert all(passed for passed, _ in fgl.check_axioms())


LAWS = [("additive", 4), ("multiplicative:formal", 5), ("generic:2", 4)]


@pytest.mark.parametrize("law,trunc", LAWS)
def test_inverse_is_an_involution(law, trunc):
    fgl = make_fgl(law, "rational", trunc=trunc)
    t = fgl.ring1.gens[0]
    twice = fgl.compose1(fgl.inverse, fgl.inverse)
    assert truncate(twice, 1, fgl.weights, fgl.trunc) == t


@pytest.mark.parametrize("law,trunc", LAWS)
def test_m_series_is_additive(law, trunc):
    fgl = make_fgl(law, "rational", trunc=trunc)
    for m in range(-3, 4):
        for m2 in range(-3, 4):
            lhs = fgl.add(fgl.m_series(m), fgl.m_series(m2), 1)
            rhs = fgl.m_series(m + m2)
            assert truncate(lhs, 1, fgl.weights, fgl.trunc) == truncate(rhs, 1, fgl.weights, fgl.trunc), (m, m2)
