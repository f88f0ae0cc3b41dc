#!/usr/bin/env python3
"""
Command-line front door for the flag Leray-Hirsch toolkit.

    flaglh info --type A --rank 2 --parabolic 1
    flaglh table --type A --rank 2 --parabolic 1 --basis X --format json
    flaglh verify all --type B --rank 2 --parabolic 1
    flaglh structconst t s sts --basis X
    flaglh expand "Z[st]*Y[s]" --parabolic 1 --lh
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys

from flaglh.config import FORMATS, build_context, resolve_config
from flaglh.exceptions import ConfigError, FlagLHError, PrecisionExhaustedError
from flaglh.lerayhirsch import (
    SymbolicNamer,
    assemble_C,
    gz_structure_const,
    lh_expand,
    matrix_to_frame,
    matrix_to_json,
    matrix_to_latex,
    provenance,
    root_label,
    verify_report,
)
from flaglh.suites import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3

FACTOR = re.compile(r"^(Y|X|Z|x)\[([^\]]*)\]$")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flaglh", description="Equivariant oriented cohomology of flag varieties: Leray-Hirsch matrices."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", dest="family", help="Root system family: A, B, C, D or G")
    common.add_argument("--rank", type=int)
    common.add_argument("--parabolic", help="Comma list of 1-based simple reflection indices generating W_L")
    common.add_argument("--fgl", help="additive | multiplicative:<value|formal> | generic:<depth>")
    common.add_argument("--ring", choices=("rational", "integer"))
    common.add_argument("--trunc", type=int, help="Truncation degree N")
    common.add_argument("--workdeg", type=int, help="Extra working precision above N")
    common.add_argument("--basis", choices=("Y", "X"), help="Y: geometric tag, X: algebraic tag")
    common.add_argument("--format", dest="fmt", choices=FORMATS)
    common.add_argument("--out", help="Write the result to this file instead of stdout")
    common.add_argument("--config", help="INI file with a [flaglh] section")
    common.add_argument(
        "--override-word", action="append", default=[], metavar="ELEM=WORD",
        help="Replace the reduced word of ELEM (repeatable)",
    )
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="Root data, the order on W and the word table")
    sub.add_parser("table", parents=[common], help="Emit the Leray-Hirsch matrix C")
    verify = sub.add_parser("verify", parents=[common], help="Run a verification suite")
    verify.add_argument("suite", choices=list(SUITES) + ["all"])
    sc = sub.add_parser("structconst", parents=[common], help="Structure constant p^w_{u,v}")
    sc.add_argument("u")
    sc.add_argument("v")
    sc.add_argument("w")
    expand = sub.add_parser("expand", parents=[common], help="Expand a product of classes")
    expand.add_argument("spec", help="Factors joined by '*': Y[z], X[z], Z[w] or x[i]")
    expand.add_argument("--lh", action="store_true", help="Expand in the Leray-Hirsch basis instead")
    return parser


def _cli_values(args):
    values = {
        key: getattr(args, key)
        for key in ("family", "rank", "parabolic", "fgl", "ring", "trunc", "workdeg", "basis", "fmt", "out")
    }
    if args.override_word:
        overrides = {}
        for item in args.override_word:
            if "=" not in item:
                raise ConfigError(f"Bad word override '{item}', expected ELEM=WORD")
            elem, word = item.split("=", 1)
            overrides[elem.strip()] = word.strip()
        values["overrides"] = overrides
    return values


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as f:
            f.write(text)
        logger.info(f"Wrote {cfg.out}")
    else:
        sys.stdout.write(text)


def _dumps(data):
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


# -- commands ------------------------------------------------------------------------


def cmd_info(ctx):
    cfg, rs = ctx.config, ctx.rs
    data = {
        "type": rs.family,
        "rank": rs.rank,
        "parabolic": [i + 1 for i in rs.parabolic],
        "cartan": rs.cartan.tolist(),
        "positive_roots": [root_label(rs, b) for b in rs.positive_roots],
        "order": [rs.name(z) for z in rs.elements],
        "lengths": [z.length for z in rs.elements],
        "min_reps": [rs.name(w) for w in rs.min_reps],
        "levi": [rs.name(v) for v in rs.levi],
        "words": rs.words.as_strings(),
        "fgl": ctx.fgl.label,
        "coefficients": ctx.fgl.coeff.describe(),
    }
    if cfg.fmt == "json":
        return _dumps(data)
    if cfg.fmt != "text":
        raise ConfigError(f"info supports text and json, not {cfg.fmt}")
    lines = [
        f"{rs.family}{rs.rank}, parabolic {data['parabolic'] or 'none'} (|W| = {len(rs.elements)})",
        f"formal group law: {data['fgl']} over {data['coefficients']}",
        f"positive roots: {', '.join(data['positive_roots'])}",
        "order: " + " < ".join(data["order"]),
        "W^L: " + ", ".join(data["min_reps"]),
        "W_L: " + ", ".join(data["levi"]),
        "reduced words:",
    ]
    lines += [f"  {rs.name(z)}: {rs.letters(rs.words[z])}" for z in rs.elements]
    return "\n".join(lines) + "\n"


def cmd_table(ctx):
    cfg, rs, model = ctx.config, ctx.rs, ctx.model
    prov = provenance(rs, cfg.fgl, cfg.effective_trunc, cfg.workdeg, cfg.ring)
    C = assemble_C(model, cfg.tag, provenance=prov)
    if cfg.fmt == "json":
        return _dumps(matrix_to_json(C, model))
    if cfg.fmt == "latex":
        return matrix_to_latex(C, model)
    frame = matrix_to_frame(C, model)
    if cfg.fmt == "csv":
        return frame.to_csv()
    report = verify_report(C, model)
    lines = [frame.to_string(), "", f"verdict: {'PASS' if report.verdict else 'FAIL'}"]
    lines += [f"  {m}" for m in report.messages]
    return "\n".join(lines) + "\n"


def cmd_verify(ctx, suite):
    results = run_suite(ctx, suite)
    lines = []
    for passed, anchor, message in results:
        if passed:
            lines.append(f"PASS {anchor}")
        else:
            lines.append(f"FAIL {anchor}: {message}")
            logger.error(f"Check failed: {anchor}")
    failed = sum(1 for passed, _, _ in results if not passed)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", failed == 0


def cmd_structconst(ctx, u, v, w):
    cfg, rs, A = ctx.config, ctx.rs, ctx.algebra
    elems = [rs.parse(name) for name in (u, v, w)]
    value = gz_structure_const(ctx.tga, *elems, family=cfg.basis)
    if cfg.fmt == "json":
        return _dumps({
            "family": cfg.basis,
            "u": rs.name(elems[0]),
            "v": rs.name(elems[1]),
            "w": rs.name(elems[2]),
            "value": A.serialize(value),
        })
    namer = SymbolicNamer(A, latex=cfg.fmt == "latex")
    return namer.name(value) + "\n"


def parse_class_spec(model, spec):
    """Product of the factors Y[z], X[z], Z[w] (w in W^L) and x[i] (ch_a of x_omega_i)."""
    rs = model.rs
    value = model.one()
    for factor in spec.replace(" ", "").split("*"):
        match = FACTOR.match(factor)
        if not match:
            raise ConfigError(f"Cannot parse class factor '{factor}'")
        kind, arg = match.groups()
        if kind == "x":
            if not arg.isdigit() or not 1 <= int(arg) <= rs.rank:
                raise ConfigError(f"x[i] needs 1 <= i <= {rs.rank}, got '{arg}'")
            value = value * model.char_map(model.algebra.gen(int(arg) - 1))
            continue
        z = rs.parse(arg)
        if kind == "Z":
            if z not in rs.min_reps:
                raise ConfigError(f"Z[{arg}] needs a minimal coset representative")
            value = value * model.z_star(z)
        else:
            value = value * model.dual_basis(kind)[z]
    return value


def cmd_expand(ctx, spec, lh=False):
    cfg, rs, model, A = ctx.config, ctx.rs, ctx.model, ctx.algebra
    f = parse_class_spec(model, spec)
    if lh:
        C = assemble_C(model, cfg.tag)
        report = verify_report(C, model)
        coeffs = {f"{rs.name(w)},{rs.name(v)}": c for (w, v), c in lh_expand(C, model, f, report).items()}
    else:
        coeffs = {rs.name(x): c for x, c in sorted(model.expand_in(f, cfg.basis).items())}
    if cfg.fmt == "json":
        return _dumps({"spec": spec, "basis": cfg.basis, "lh": lh,
                       "coefficients": {k: A.serialize(c) for k, c in coeffs.items()}})
    namer = SymbolicNamer(A, latex=cfg.fmt == "latex")
    return "".join(f"{k}: {namer.name(c)}\n" for k, c in coeffs.items()) or "0\n"


# -- entry point -------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s")

    try:
        cfg = resolve_config(_cli_values(args), args.config)
        ctx = build_context(cfg)
        if args.command == "info":
            _emit(cmd_info(ctx), cfg)
        elif args.command == "table":
            _emit(cmd_table(ctx), cfg)
        elif args.command == "verify":
            text, passed = cmd_verify(ctx, args.suite)
            _emit(text, cfg)
            return EXIT_OK if passed else EXIT_FAILED
        elif args.command == "structconst":
            _emit(cmd_structconst(ctx, args.u, args.v, args.w), cfg)
        elif args.command == "expand":
            _emit(cmd_expand(ctx, args.spec, args.lh), cfg)
    except ConfigError as exc:
        logger.error(f"Configuration error: {exc}")
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except PrecisionExhaustedError as exc:
        logger.error(f"Precision exhausted: {exc}")
        sys.stderr.write(f"error: {exc}; raise --workdeg\n")
        return EXIT_PRECISION
    except FlagLHError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED
    except OSError as exc:
        logger.error(f"Cannot write output: {exc}")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
