#!/usr/bin/env python3
"""
Tests for the fixed-point model of D*, dual bases, pairings and characters
"""

import os
import random
import sys

import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from flaglh.config import RunConfig, build_context  # noqa: E402
from flaglh.exceptions import NotInDualError, VerificationError  # noqa: E402


@pytest.fixture(scope="module")
def a1():
    return build_context(RunConfig(family="A", rank=1, trunc=6))


@pytest.fixture(scope="module")
def a2():
    return build_context(RunConfig(family="A", rank=2, parabolic=(1,), trunc=6))


def sample(A, rng):
    value = A.const(rng.randint(-3, 3))
    for _ in range(2):
        value = value + rng.choice([-1, 1, 2]) * A.gen(rng.randrange(A.nvars)) * A.gen(rng.randrange(A.nvars))
    return value


def test_a1_classes_and_duals(a1):
    model, A, loc = a1.model, a1.algebra, a1.loc
    e, s = a1.rs.elements
    alpha = a1.rs.simple_root(0)
    assert model.y_times(s, check=True) == model.one()
    assert model.y_times(e, check=True) == model.from_values({e: A.x_full()})
    Y = model.dual_basis("Y")
    assert Y[e] == model.from_values({e: 1, s: -A.u(alpha)})
    assert Y[s] == model.from_values({s: A.x_root(alpha)})
    X = model.dual_basis("X")
    assert X[e] == model.one()
    assert X[s] == model.from_values({s: A.x_root(alpha)})
    assert model.pairing(model.y_times(e), Y[e]) == 1
    assert model.pairing(model.y_times(s), Y[e]) == 0
    assert loc.to_S(model.evaluate(Y[s], a1.tga.y_elem(s))) == 1


def test_dual_bases_pair_to_delta(a1, a2):
    for ctx in (a1, a2):
        for family in ("Y", "X"):
            passed, message = ctx.model.check_dual_bases(family)
            assert passed, message


def test_closed_form_matches_bullet_route(a2):
    for z in a2.rs.elements:
        a2.model.y_times(z, check=True)
        a2.model.x_times(z, check=True)


def test_expand_and_rebuild(a2):
    model = a2.model
    rng = random.Random(11)
    coeffs = {x: sample(a2.algebra, rng) for x in rng.sample(model.domain, 3)}
    f = model.rebuild(coeffs, "Y")
    back = model.expand_in(f, "Y")
    assert set(back) == {x for x, c in coeffs.items() if c}
    assert all(back[x] == c for x, c in coeffs.items() if c)


def test_bullet_is_an_action(a2):
    model, tga = a2.model, a2.tga
    Y = model.dual_basis("Y")
    rs = a2.rs
    f = Y[rs.parse("st")] + Y[rs.parse("t")] * a2.algebra.gen(0)
    pairs = [
        (tga.y_of(0), tga.x_of(1)),
        (tga.delta(rs.parse("ts")), tga.y_of(1)),
        (tga.y_gl(), tga.y_parab()),
    ]
    for h, h2 in pairs:
        assert model.bullet(h * h2, f) == model.bullet(h, model.bullet(h2, f))


def test_point_class_is_not_in_dual(a1):
    with pytest.raises(NotInDualError):
        a1.model.expand_in(a1.model.f_point(a1.rs.identity), "Y")


def test_pairing_image_is_constant(a2):
    model = a2.model
    Y = model.dual_basis("Y")
    z = a2.rs.parse("ts")
    assert model.pairing(model.y_times(z), Y[z], check=True) == 1


def test_parabolic_pairing_needs_invariants(a2):
    model = a2.model
    f = model.dual_basis("Y")[a2.rs.parse("s")]
    with pytest.raises(VerificationError):
        model.pairing_parab(f, model.one())
    g = model.project_parab(f)
    assert model.is_WL_invariant(g)
    assert model.pairing_parab(g, model.one()) == model.pairing_parab(g, model.one(), check=False)


def test_projection_is_self_adjoint(a2):
    model = a2.model
    Y = model.dual_basis("Y")
    f, g = Y[a2.rs.parse("st")], Y[a2.rs.parse("s")] + Y[a2.rs.parse("t")]
    assert model.pairing(model.project_parab(f), g) == model.pairing(f, model.project_parab(g))


def test_z_star_is_dual_to_projected_classes(a2):
    model = a2.model
    for w in a2.rs.min_reps:
        for w2 in a2.rs.min_reps:
            projected = model.project_parab(model.y_times(w2))
            value = model.pairing_parab(model.z_star(w), projected, check=False)
            assert value == (1 if w == w2 else 0)


def test_levi_model(a2):
    model = a2.model
    levi = model.levi_model
    assert levi.domain == a2.rs.levi
    passed, message = levi.check_dual_bases("Y")
    assert passed, message
    for v, g in model.levi_duals("Y").items():
        lifted = model.section_j_a(g)
        assert lifted == model.dual_basis("Y")[v]
        assert model.restrict_L(lifted) == g
    g = levi.dual_basis("Y")[a2.rs.simple[0]]
    assert model.pairing_L(levi.y_times(a2.rs.simple[0]), g) == 1


def test_characteristic_map(a2):
    model, A = a2.model, a2.algebra
    rng = random.Random(5)
    for _ in range(5):
        p = sample(A, rng)
        ch = model.char_map(p)
        assert ch == model.char_map_by_bullet(p)
        z = rng.choice(a2.rs.elements)
        assert model.char_map(A.weyl_act(z, p)) == model.bullet(a2.tga.delta(z), ch)
        assert model.char_map_L(p) == model.restrict_L(ch)
    assert model.borel_rho(A.one, A.one) == model.one()


def test_rho_surjectivity(a1, a2):
    report = a1.model.rho_surjectivity_check(3)
    assert report["passed"], report
    assert [d[2] for d in report["degrees"]] == [1, 2, 2, 2]
    report = a2.model.rho_surjectivity_check(2)
    assert report["passed"], report
    assert report["first_failing_degree"] is None


def test_characters(a1, a2):
    e, s = a1.rs.elements
    assert a1.model.trace_of_delta(s) == 0
    assert a1.model.trace_of_delta(e) == 2
    assert a1.model.trace_of_delta(s, "X") == 0
    index = len(a2.rs.min_reps)
    for v in a2.rs.levi:
        full, levi = a2.model.character_trace(v)
        assert full == index * levi
