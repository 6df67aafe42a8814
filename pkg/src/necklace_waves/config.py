"""Flat ``key=value`` run configuration."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError

COMMANDS = ("bands", "spectrum", "continue", "bifurcate", "simulate", "ladder", "varidemo")


@dataclass(frozen=True)
class RunConfig:
    command: str = "bifurcate"
    # graph
    topology: str = "necklace"
    L1: float = math.pi
    L2: float = math.pi
    Ls: float = 1.0
    Lr: float = 1.0
    n_cells: int = 0  # 0 lets simulate pick the cell budget
    pts_per_edge: int = 30
    boundary: str = "dirichlet_ends"
    # bands
    branch: int = 1
    n_branches: int = 4
    n_flat: int = 2
    n_ell: int = 101
    # spatial spectrum
    sigma: float = float("nan")  # nan -> c**2/4 + 0.1
    c: float = 0.5
    k_min: int = -6
    k_max: int = 6
    cont_param: str = "L1"
    cont_start: float = float("nan")
    cont_stop: float = float("nan")
    n_steps: int = 2000
    re_min: float = -1.0
    re_max: float = 1.0
    im_min: float = -3.0
    im_max: float = 3.0
    scan_res: int = 201
    # simulation
    eps: float = 0.01
    dt: float = 0.01
    T: float = 100.0
    variant: str = "symmetric_half"
    n0: int = 0  # 0 -> minimal cell budget
    snapshots: int = 3
    diag_every: int = 100
    # variational demo
    p: float = 3.0
    var_sigma: float = 1.0
    n_list: tuple = (1, 2, 4, 8, 16, 32, 64)
    # output
    out: str = "out"
    plot: bool = False
    seed: int = 0

    @property
    def sigma_value(self) -> float:
        return 0.25 * self.c ** 2 + 0.1 if math.isnan(self.sigma) else self.sigma

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


_FIELDS = {f.name: f for f in fields(RunConfig)}
_PI = re.compile(r"^\s*([+-]?[0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def _float(text: str, key: str) -> float:
    m = _PI.match(text)
    if m:
        num = m.group(1)
        coef = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key) from None


def _coerce(key: str, text: str):
    f = _FIELDS[key]
    kind = f.type
    text = text.strip()
    if kind in ("float", float):
        return _float(text, key)
    if kind in ("int", int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"expected an integer, got {text!r}", key) from None
    if kind in ("bool", bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}", key)
    if kind in ("tuple", tuple):
        try:
            return tuple(int(t) for t in text.replace(";", ",").split(",") if t.strip())
        except ValueError:
            raise ConfigError(f"expected a comma-separated list of integers, got {text!r}",
                              key) from None
    return text


def _pairs_from_text(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        yield k.strip(), v.strip().strip('"').strip("'")


def parse_config(text: str = "", args=()) -> RunConfig:
    """Merge a config file body and command-line tokens (tokens win) into a validated config.

    A token without ``=`` is taken as the command.
    """
    values = {}
    for k, v in _pairs_from_text(text or ""):
        values[k] = v
    for tok in args:
        if "=" in tok:
            k, v = tok.split("=", 1)
            values[k.strip()] = v.strip()
        else:
            values["command"] = tok.strip()
    kw = {}
    for k, v in values.items():
        if k not in _FIELDS:
            raise ConfigError("unknown key", k)
        kw[k] = _coerce(k, v)
    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(msg, key)

    need(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    need(cfg.topology in ("necklace", "ladder"), "topology", "must be necklace or ladder")
    need(cfg.boundary in ("none", "dirichlet_ends"), "boundary", "must be none or dirichlet_ends")
    need(cfg.L1 > 0, "L1", "must be positive")
    need(cfg.L2 >= 0, "L2", "must be non-negative")
    if cfg.topology == "necklace":
        need(abs(cfg.L1 + cfg.L2 - 2 * math.pi) <= 1e-9, "L1",
             f"L1 + L2 must equal 2*pi, got {cfg.L1 + cfg.L2!r}")
    need(cfg.Ls > 0, "Ls", "must be positive")
    need(cfg.Lr > 0, "Lr", "must be positive")
    need(cfg.n_cells >= 0, "n_cells", "must be non-negative")
    need(cfg.pts_per_edge >= 1, "pts_per_edge", "must be positive")
    need(cfg.branch >= 1, "branch", "must be >= 1")
    need(cfg.n_branches >= 1, "n_branches", "must be >= 1")
    need(cfg.n_flat >= 0, "n_flat", "must be >= 0")
    need(cfg.n_ell >= 2, "n_ell", "must be >= 2")
    need(cfg.c != 0, "c", "must be non-zero")
    need(cfg.k_min <= cfg.k_max, "k_min", "must not exceed k_max")
    need(cfg.cont_param in ("L1", "sigma"), "cont_param", "must be L1 or sigma")
    need(cfg.n_steps >= 1, "n_steps", "must be positive")
    need(cfg.re_min < cfg.re_max, "re_min", "must be below re_max")
    need(cfg.im_min < cfg.im_max, "im_min", "must be below im_max")
    need(cfg.scan_res >= 3, "scan_res", "must be >= 3")
    need(cfg.eps > 0, "eps", "must be positive")
    need(cfg.dt > 0, "dt", "must be positive")
    need(cfg.T >= cfg.dt, "T", "must be at least dt")
    need(cfg.variant in ("symmetric_half", "paper_literal"), "variant",
         "must be symmetric_half or paper_literal")
    need(cfg.n0 >= 0, "n0", "must be non-negative")
    need(cfg.snapshots >= 1, "snapshots", "must be >= 1")
    need(cfg.diag_every >= 1, "diag_every", "must be >= 1")
    need(cfg.p > 1, "p", "must exceed 1")
    need(cfg.var_sigma > 0, "var_sigma", "must be positive")
    need(len(cfg.n_list) >= 2 and min(cfg.n_list) >= 1, "n_list",
         "needs at least two positive integers")
    return cfg


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return validate(replace(cfg, **kw))
