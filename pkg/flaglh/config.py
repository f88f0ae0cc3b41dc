"""
Run configuration: defaults < config file < environment < command line.
"""

from __future__ import annotations

import configparser
import logging
import os
import re
from dataclasses import dataclass, field, fields, replace

from flaglh.dual import DualModel
from flaglh.exceptions import ConfigError, FormalGroupLawError, UnsupportedRootSystemError
from flaglh.fga import FormalGroupAlgebra
from flaglh.formal import law_coeff_ring, make_fgl
from flaglh.qring import Localization
from flaglh.rootdata import SUPPORTED_RANKS, build_root_system
from flaglh.twisted import TwistedGroupAlgebra

logger = logging.getLogger(__name__)

ENV_TRUNC = "FLAGLH_TRUNC"
CONFIG_SECTION = "flaglh"
FGL_PATTERN = re.compile(r"^(additive|multiplicative:(formal|-?\d+(/\d+)?)|generic:\d+)$")
FORMATS = ("text", "json", "csv", "latex")


def default_trunc(rank):
    return 6 if rank <= 2 else 4


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run."""

    family: str = "A"
    rank: int = 2
    parabolic: tuple = ()
    fgl: str = "multiplicative:formal"
    ring: str = "rational"
    trunc: int = None
    workdeg: int = 0
    basis: str = "Y"
    fmt: str = "text"
    out: str = None
    overrides: dict = field(default_factory=dict)

    @property
    def effective_trunc(self):
        return self.trunc if self.trunc is not None else default_trunc(self.rank)

    @property
    def tag(self):
        return "geometric" if self.basis == "Y" else "algebraic"

    def validate(self):
        family = str(self.family).upper()
        if family not in SUPPORTED_RANKS or self.rank not in SUPPORTED_RANKS[family]:
            raise ConfigError(f"Unsupported root system {self.family}{self.rank}")
        if any(i < 1 or i > self.rank for i in self.parabolic):
            raise ConfigError(f"Parabolic indices {self.parabolic} must lie in 1..{self.rank}")
        if not FGL_PATTERN.match(self.fgl):
            raise ConfigError(f"Bad formal group law '{self.fgl}'")
        if self.ring not in ("rational", "integer"):
            raise ConfigError(f"Bad coefficient ring '{self.ring}'")
        if self.ring == "integer" and self.fgl.startswith("generic"):
            raise ConfigError("The generic law needs the rational ring")
        if self.effective_trunc < 1:
            raise ConfigError("Truncation must be at least 1")
        if self.workdeg < 0:
            raise ConfigError("workdeg must be non-negative")
        if self.basis not in ("Y", "X"):
            raise ConfigError(f"Bad basis family '{self.basis}'")
        if self.fmt not in FORMATS:
            raise ConfigError(f"Bad output format '{self.fmt}'")
        return self


def _parse_parabolic(text):
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(sorted({int(p) for p in text.split(",") if p.strip()}))
    except ValueError:
        raise ConfigError(f"Bad parabolic list '{text}'")


def _parse_int(name, text):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got '{text}'")


def load_config_file(path):
    """Key-value pairs from the [flaglh] section of an INI file."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"Cannot read config file {path}")
    if not parser.has_section(CONFIG_SECTION):
        raise ConfigError(f"Config file {path} has no [{CONFIG_SECTION}] section")
    return dict(parser.items(CONFIG_SECTION))


def _apply(values, base):
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, value in values.items():
        if value is None:
            continue
        key = {"type": "family", "format": "fmt"}.get(key, key)
        if key not in known:
            raise ConfigError(f"Unknown configuration key '{key}'")
        if key in ("rank", "trunc", "workdeg"):
            value = _parse_int(key, value)
        elif key == "parabolic" and not isinstance(value, tuple):
            value = _parse_parabolic(value)
        elif key == "family":
            value = str(value).upper()
        updates[key] = value
    return replace(base, **updates)


def resolve_config(cli_values=None, config_path=None, environ=None):
    """Build a validated RunConfig from the layered sources."""
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    if config_path:
        cfg = _apply(load_config_file(config_path), cfg)
    if environ.get(ENV_TRUNC):
        cfg = replace(cfg, trunc=_parse_int(ENV_TRUNC, environ[ENV_TRUNC]))
    cfg = _apply(cli_values or {}, cfg)
    logger.debug(f"Resolved configuration {cfg}")
    return cfg.validate()


@dataclass
class FlagContext:
    """Every algebraic object of one run, built once."""

    config: RunConfig
    rs: object
    fgl: object
    algebra: object
    loc: object
    tga: object
    model: object


def build_context(cfg):
    cfg.validate()
    try:
        rs = build_root_system(
            cfg.family, cfg.rank, tuple(i - 1 for i in cfg.parabolic), cfg.ring == "integer"
        )
    except UnsupportedRootSystemError as exc:
        raise ConfigError(str(exc))
    words = rs.words
    if cfg.overrides:
        words = words.with_overrides({rs.parse(z): rs.parse_word(word) for z, word in cfg.overrides.items()})
        rs.words = words
    try:
        coeff = law_coeff_ring(cfg.fgl, cfg.ring)
        fgl = make_fgl(cfg.fgl, coeff, cfg.effective_trunc + cfg.workdeg)
    except FormalGroupLawError as exc:
        raise ConfigError(str(exc))
    algebra = FormalGroupAlgebra(rs, fgl, floor=cfg.effective_trunc)
    loc = Localization(algebra)
    tga = TwistedGroupAlgebra(loc, words)
    model = DualModel(tga)
    logger.info(
        f"Context {cfg.family}{cfg.rank} P={cfg.parabolic} fgl={cfg.fgl} "
        f"trunc={cfg.effective_trunc}+{cfg.workdeg}"
    )
    return FlagContext(cfg, rs, fgl, algebra, loc, tga, model)
