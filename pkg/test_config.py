#!/usr/bin/env python3
"""
Tests for layered run configuration
"""

import os
import sys

import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from flaglh.config import (  # noqa: E402
    ENV_TRUNC,
    RunConfig,
    build_context,
    default_trunc,
    load_config_file,
    resolve_config,
)
from flaglh.exceptions import ConfigError  # noqa: E402


def test_defaults():
    cfg = resolve_config(environ={})
    assert (cfg.family, cfg.rank, cfg.parabolic) == ("A", 2, ())
    assert cfg.fgl == "multiplicative:formal"
    assert cfg.effective_trunc == 6
    assert cfg.tag == "geometric"
    assert default_trunc(3) == 4


def test_environment_sets_truncation():
    cfg = resolve_config(environ={ENV_TRUNC: "3"})
    assert cfg.effective_trunc == 3
    cfg = resolve_config({"trunc": 5}, environ={ENV_TRUNC: "3"})
    assert cfg.effective_trunc == 5
    with pytest.raises(ConfigError):
        resolve_config(environ={ENV_TRUNC: "many"})


def test_config_file_layers(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[flaglh]\ntype = b\nrank = 2\nparabolic = 2\nformat = json\ntrunc = 4\n")
    values = load_config_file(str(path))
    assert values["type"] == "b"
    cfg = resolve_config(config_path=str(path), environ={ENV_TRUNC: "5"})
    assert (cfg.family, cfg.rank, cfg.parabolic, cfg.fmt) == ("B", 2, (2,), "json")
    assert cfg.effective_trunc == 5
    cfg = resolve_config({"parabolic": "1", "basis": "X"}, str(path), environ={})
    assert cfg.parabolic == (1,)
    assert cfg.tag == "algebraic"
    assert cfg.effective_trunc == 4


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "missing.ini"))
    path = tmp_path / "other.ini"
    path.write_text("[other]\nrank = 2\n")
    with pytest.raises(ConfigError):
        load_config_file(str(path))
    path.write_text("[flaglh]\ncolour = blue\n")
    with pytest.raises(ConfigError):
        resolve_config(config_path=str(path), environ={})


@pytest.mark.parametrize(
    "values",
    [
        {"family": "E", "rank": 6},
        {"rank": 7},
        {"parabolic": "3"},
        {"fgl": "elliptic"},
        {"fgl": "generic:2", "ring": "integer"},
        {"trunc": 0},
        {"workdeg": -1},
        {"basis": "Z"},
        {"fmt": "pdf"},
        {"rank": "two"},
        {"parabolic": "1,x"},
    ],
)
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        resolve_config(values, environ={})


def test_parabolic_parsing():
    cfg = resolve_config({"rank": 3, "parabolic": "3, 1,1"}, environ={})
    assert cfg.parabolic == (1, 3)


def test_build_context():
    ctx = build_context(RunConfig(family="A", rank=2, parabolic=(1,), trunc=4, workdeg=2))
    assert ctx.rs.parabolic == (0,)
    assert ctx.fgl.trunc == 6
    assert ctx.algebra.floor == 4
    assert ctx.model.domain == ctx.rs.elements
    assert ctx.tga.words is ctx.rs.words


def test_build_context_with_word_override():
    ctx = build_context(RunConfig(family="A", rank=2, parabolic=(1,), overrides={"sts": "tst"}))
    sts = ctx.rs.parse("tst")
    assert ctx.rs.words[sts] == (1, 0, 1)
    assert ctx.tga.words[sts] == (1, 0, 1)
    assert not all(passed for passed, _ in ctx.rs.words.check())


def test_build_context_rejects_bad_override():
    with pytest.raises(ConfigError):
        build_context(RunConfig(family="A", rank=2, overrides={"sts": "q"}))
