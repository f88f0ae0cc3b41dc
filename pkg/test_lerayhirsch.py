#!/usr/bin/env python3
"""
Tests for structure constants, the Leray-Hirsch matrices and their certification
"""

import json
import os
import random
import sys

import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from flaglh.config import RunConfig, build_context  # noqa: E402
from flaglh.exceptions import VerificationError  # noqa: E402
from flaglh.lerayhirsch import (  # noqa: E402
    SymbolicNamer,
    assemble_C,
    check_e_coeffs,
    e_coeffs,
    expected_diagonal,
    free_module_check,
    gz_B_factor,
    gz_structure_const,
    lh_expand,
    matrix_from_json,
    matrix_to_frame,
    matrix_to_json,
    matrix_to_latex,
    multqs_expand,
    nonequivariant_duals,
    nonequivariant_specialize,
    oracle_structure_const,
    rebuild,
    root_label,
    structure_constants,
    verify_report,
    z_star_expansion,
)
from flaglh.rootdata import PositionedSubseq  # noqa: E402


@pytest.fixture(scope="module")
def a1():
    return build_context(RunConfig(family="A", rank=1, trunc=6))


@pytest.fixture(scope="module")
def a2():
    return build_context(RunConfig(family="A", rank=2, parabolic=(1,), trunc=6))


@pytest.fixture(scope="module")
def a2_tables(a2):
    return {tag: assemble_C(a2.model, tag) for tag in ("geometric", "algebraic")}


LAWS = [("multiplicative:formal", 6), ("additive", 6), ("multiplicative:1", 6), ("generic:4", 4)]


@pytest.fixture(scope="module", params=LAWS, ids=[law for law, _ in LAWS])
def a2_law(request):
    law, trunc = request.param
    ctx = build_context(RunConfig(family="A", rank=2, parabolic=(1,), fgl=law, trunc=trunc))
    return ctx, {tag: assemble_C(ctx.model, tag) for tag in ("geometric", "algebraic")}


def simple_roots(ctx):
    rs = ctx.rs
    return rs.simple_root(0), rs.simple_root(1), (1, 1)


def test_a1_structure_constants(a1):
    tga, A = a1.tga, a1.algebra
    e, s = a1.rs.elements
    alpha = a1.rs.simple_root(0)
    u, x, kappa = A.u(alpha), A.x_root(alpha), A.kappa(alpha)
    assert gz_structure_const(tga, e, e, s, "Y") == u * kappa
    assert gz_structure_const(tga, s, s, s, "Y") == x
    assert gz_structure_const(tga, e, s, s, "Y") == -u
    assert gz_structure_const(tga, e, e, e, "Y") == 1
    assert gz_structure_const(tga, s, s, s, "X") == x
    assert gz_structure_const(tga, e, s, s, "X") == 1
    assert gz_structure_const(tga, e, e, s, "X") == 0
    for family in ("Y", "X"):
        for u_ in (e, s):
            for v in (e, s):
                for w in (e, s):
                    assert gz_structure_const(tga, u_, v, w, family) == oracle_structure_const(
                        tga, u_, v, w, family
                    )


def test_a2_product_formula_matches_oracle(a2):
    for family in ("Y", "X"):
        sc = structure_constants(a2.tga, family)
        passed, message = sc.check_against_oracle()
        assert passed, message
        passed, message = sc.check_support()
        assert passed, message


def test_a2_algebraic_structure_constant(a2):
    rs, A = a2.rs, a2.algebra
    alpha = rs.simple_root(0)
    t, s, sts = (rs.parse(n) for n in ("t", "s", "sts"))
    assert gz_structure_const(a2.tga, t, s, sts, "X") == -A.kappa(alpha)


def test_b_factors(a2):
    tga, loc, A = a2.tga, a2.loc, a2.algebra
    word = (0, 1, 0)
    E = PositionedSubseq.of(word, {0})
    F = PositionedSubseq.of(word, {0, 1})
    s = a2.rs.simple[0]
    assert gz_B_factor(tga, 2, E, F, "X") == tga.x_of(0)
    assert gz_B_factor(tga, 1, E, F, "X") == tga.delta(a2.rs.simple[1])
    alpha = a2.rs.simple_root(0)
    assert gz_B_factor(tga, 0, E, F, "X") == tga.scalar(loc.from_S(A.x_root(alpha))) * tga.delta(s)
    assert gz_B_factor(tga, 0, E, F, "Y")[s] == loc.from_S(A.x_root(alpha))
    assert gz_B_factor(tga, 1, E, F, "Y")[a2.rs.simple[1]] == -loc.from_S(A.u(a2.rs.simple_root(1)))


def test_e_coefficients(a2):
    e = e_coeffs(a2.model)
    for passed, message in check_e_coeffs(a2.model, e):
        assert passed, message
    for w in a2.rs.min_reps:
        z_star_expansion(a2.model, w)


def test_multqs_formula(a2):
    rng = random.Random(3)
    A = a2.algebra
    for _ in range(4):
        q = A.gen(rng.randrange(2)) + rng.randint(1, 3)
        z = rng.choice(a2.rs.elements)
        multqs_expand(a2.model, q, z, check=True)


def test_geometric_table(a2_law):
    ctx, tables = a2_law
    C = tables["geometric"]
    A, rs = ctx.algebra, ctx.rs
    alpha, beta, ab = simple_roots(ctx)
    col = {rs.name(z): k for k, z in enumerate(C.cols)}
    row = {(rs.name(w), rs.name(v)): k for k, (w, v) in enumerate(C.rows)}
    assert C.entry(row[("e", "e")], col["e"]) == 1
    assert C.entry(row[("e", "s")], col["s"]) == 1
    assert C.entry(row[("t", "e")], col["t"]) == -A.u(beta)
    assert C.entry(row[("t", "s")], col["ts"]) == -A.u(beta)
    assert C.entry(row[("t", "e")], col["ts"]) == 0
    assert C.entry(row[("st", "e")], col["st"]) == A.u(alpha) * A.u(ab)
    assert C.entry(row[("st", "s")], col["st"]) == -A.x_root(alpha) * A.u(ab)
    assert C.entry(row[("st", "s")], col["sts"]) == -A.u(ab)
    assert C.entry(row[("st", "e")], col["sts"]) == 0
    for r in range(2, 6):
        for c in range(2):
            assert C.entry(r, c) == 0


def test_algebraic_table(a2_law):
    ctx, tables = a2_law
    C = tables["algebraic"]
    A = ctx.algebra
    alpha = ctx.rs.simple_root(0)
    one, zero = A.one, A.zero
    expected = [
        [one, zero, zero, zero, zero, zero],
        [zero, one, zero, zero, zero, zero],
        [zero, zero, one, zero, zero, zero],
        [zero, zero, zero, one, one, -A.kappa(alpha)],
        [zero, zero, zero, zero, one, zero],
        [zero, zero, zero, zero, A.x_root(alpha), -A.u(alpha)],
    ]
    assert C.entries == expected


def test_ts_diagonal_entry(a2_law):
    ctx, tables = a2_law
    C, A, rs = tables["geometric"], ctx.algebra, ctx.rs
    _, beta, ab = simple_roots(ctx)
    r = [(rs.name(w), rs.name(v)) for w, v in C.rows].index(("t", "s"))
    c = [rs.name(z) for z in C.cols].index("ts")
    assert C.entry(r, c) == -A.u(beta)
    # the expanded form differs from -u_b by a multiple of kappa_(a+b) - 1
    kappa = A.kappa(ab)
    lhs = A.u(beta) * A.u(ab) * kappa - A.u(beta) * A.x_root(ab)
    assert lhs + A.u(beta) == -A.u(beta) * (kappa - 1) * (1 - (1 + kappa) * A.x_root(ab))
    assert A.specialized_equal(kappa, A.one) == (ctx.config.fgl == "multiplicative:1")
    if ctx.config.fgl != "multiplicative:1":
        assert lhs != -A.u(beta)


def test_reports_pass(a2_law):
    ctx, tables = a2_law
    for tag, C in tables.items():
        report = verify_report(C, ctx.model)
        assert report.verdict, report.messages
        assert report.det_augmented == 1
        special = nonequivariant_specialize(C, ctx.algebra)
        assert special.is_upper
        assert all(special[i, i] == 1 for i in range(6))
        frame = report.to_frame()
        assert list(frame.columns) == ["row", "length", "diagonal_augmented", "expected_augmented"]
        assert len(frame) == 6


def test_expected_diagonal_sign(a2_law):
    ctx, _ = a2_law
    A = ctx.algebra
    for z in ctx.rs.elements:
        assert A.augment(expected_diagonal(ctx.model, z)) == 1


def test_e_coefficients_are_shared(a2):
    assert e_coeffs(a2.model) is e_coeffs(a2.model)
    zstar = a2.model.z_star(a2.rs.identity)
    assert a2.model.projected_times(a2.rs.identity) is a2.model.projected_times(a2.rs.identity)
    assert zstar is a2.model.z_star(a2.rs.identity)


def test_free_module_and_expansion(a2, a2_tables):
    model = a2.model
    for tag, C in a2_tables.items():
        passed, message = free_module_check(C, model)
        assert passed, message
        duals = model.dual_basis(C.family)
        f = duals[a2.rs.parse("sts")] * a2.algebra.gen(0) + duals[a2.rs.parse("t")]
        coeffs = lh_expand(C, model, f, verify_report(C, model))
        assert rebuild(C, model, coeffs) == f


def test_expansion_refuses_failed_report(a2, a2_tables):
    C = a2_tables["geometric"]
    report = verify_report(C, a2.model)
    report.diagonal_ok = False
    with pytest.raises(VerificationError):
        lh_expand(C, a2.model, a2.model.one(), report)


def test_nonequivariant_duals(a2):
    for family in ("Y", "X"):
        M = nonequivariant_duals(a2.model, family)
        assert M[:, 0].tolist() == [[1]] * 6
        assert all(M[i, j] == 0 for i in range(6) for j in range(1, 6))


def test_json_roundtrip(a2_law):
    ctx, tables = a2_law
    for tag, C in tables.items():
        data = json.loads(json.dumps(matrix_to_json(C, ctx.model), sort_keys=True))
        assert data["order"] == ["e", "s", "t", "ts", "st", "sts"]
        assert data["rows"][3] == ["t", "s"]
        back = matrix_from_json(data, ctx.model)
        assert back.entries == C.entries, tag
        assert back.rows == C.rows and back.cols == C.cols
    expected = {"kappa": "1"} if ctx.config.fgl == "multiplicative:1" else {}
    assert data["specialization"] == expected


def test_symbolic_names(a2, a2_tables):
    A = a2.algebra
    alpha, beta, ab = simple_roots(a2)
    namer = SymbolicNamer(A)
    assert namer.name(-A.u(beta)) == "-u[b]"
    assert namer.name(A.u(alpha) * A.u(ab)) == "u[a]*u[a+b]"
    assert namer.name(-A.kappa(alpha)) == "-k[a]"
    assert namer.name(A.zero) == "0"
    assert root_label(a2.rs, ab) == "a+b"
    assert root_label(a2.rs, a2.rs.negate(alpha), latex=True) == r"-\alpha"
    frame = matrix_to_frame(a2_tables["geometric"], a2.model)
    assert frame.shape == (6, 6)
    assert frame.loc["Z*_t Y*_e", "Y*_t"] == "-u[b]"
    latex = matrix_to_latex(a2_tables["algebraic"], a2.model)
    assert latex.startswith(r"\begin{tabular}")
    assert r"-\kappa_{\alpha}" in latex
