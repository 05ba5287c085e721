"""Sweep configuration files.

The format is INI-style: ``[section]`` headers followed by ``key = value``
lines; ``#`` and ``;`` start comments. List values are comma separated, and
``start:stop:step`` expands to an inclusive arithmetic range. Example::

    [model]
    M = 12
    hardcore = true

    [grid]
    t1_over_t2 = 0.2:4.0:0.1
    U_prime = 50

    [output]
    path = scan.csv

Sections and keys (defaults in parentheses):

``[model]``
    M (required); N (M/2 when half_filling); half_filling (true);
    n_max (1 if hardcore else min(N, 5)); boundary (open); hardcore (false);
    t2 (-1).
``[grid]``
    t1_over_t2 (required; t1 = ratio * t2); U_prime (0; U = U' * |t2|).
``[solver]``
    tol (1e-10); max_iter (5000); seed (0).
``[observables]``
    momentum, chiral, dimer_xy, dimer_zz, half_chain_entropy, ggm (all
    true); ggm_scope (all | contiguous+parity, default all);
    ggm_ceiling (16).
``[output]``
    path (results.csv); format (csv | json, default csv); N_q (1000).
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fock import default_n_max, n_states


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ModelConfig:
    M: int
    N: int
    n_max: int
    boundary: str = "open"
    hardcore: bool = False
    t2: float = -1.0
    half_filling: bool = True


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = 0


@dataclass(frozen=True)
class ObservableConfig:
    momentum: bool = True
    chiral: bool = True
    dimer_xy: bool = True
    dimer_zz: bool = True
    half_chain_entropy: bool = True
    ggm: bool = True
    ggm_scope: str = "all"
    ggm_ceiling: int = 16


@dataclass(frozen=True)
class OutputConfig:
    path: Path = Path("results.csv")
    format: str = "csv"
    N_q: int = 1000


@dataclass(frozen=True)
class SweepConfig:
    model: ModelConfig
    ratios: tuple[float, ...]
    U_primes: tuple[float, ...]
    solver: SolverConfig = field(default_factory=SolverConfig)
    observables: ObservableConfig = field(default_factory=ObservableConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def grid(self) -> list[tuple[float, float]]:
        """Planned (t1_over_t2, U_prime) points, ratio-major."""
        return [(r, u) for r in self.ratios for u in self.U_primes]


_SCHEMA = {
    "model": {"M", "N", "n_max", "boundary", "hardcore", "t2", "half_filling"},
    "grid": {"t1_over_t2", "U_prime"},
    "solver": {"tol", "max_iter", "seed"},
    "observables": {
        "momentum", "chiral", "dimer_xy", "dimer_zz", "half_chain_entropy",
        "ggm", "ggm_scope", "ggm_ceiling",
    },
    "output": {"path", "format", "N_q"},
}


class _Lines:
    """Maps (section, key) to the line where it was written."""

    def __init__(self, text: str):
        self.sections: dict[str, int] = {}
        self.keys: dict[tuple[str, str], int] = {}
        section = None
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line[0] in "#;":
                continue
            m = re.match(r"\[(.+)\]$", line)
            if m:
                section = m.group(1).strip()
                self.sections.setdefault(section, no)
                continue
            m = re.match(r"([^=:]+?)\s*[=:]", line)
            if m and section is not None:
                self.keys.setdefault((section, m.group(1).strip().lower()), no)

    def of(self, section: str, key: str | None = None) -> int | None:
        if key is None:
            return self.sections.get(section)
        return self.keys.get((section, key.lower()), self.sections.get(section))


def _parse_float(text: str, where) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", where) from None
    if not math.isfinite(value):
        raise ConfigError(f"value must be finite, got {text!r}", where)
    return value


def _parse_int(text: str, where) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", where) from None


def _parse_bool(text: str, where) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected true/false, got {text!r}", where)


def _parse_list(text: str, where) -> tuple[float, ...]:
    values: list[float] = []
    for item in text.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range must be start:stop:step, got {item!r}", where)
            start, stop, step = (_parse_float(p, where) for p in parts)
            if step <= 0 or stop < start:
                raise ConfigError(f"range {item!r} needs step > 0 and stop >= start", where)
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            # rounding keeps e.g. 0.2 + 3*0.1 printing as 0.5
            values.extend(float(np.round(start + k * step, 12)) for k in range(count))
        else:
            values.append(_parse_float(item, where))
    if not values:
        raise ConfigError("empty list", where)
    return tuple(values)


def parse_config(text: str) -> SweepConfig:
    """Parse and validate configuration text; raises :class:`ConfigError`."""
    lines = _Lines(text)
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None, strict=True
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}", getattr(exc, "lineno", None)) from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.of(section))
        for key in parser[section]:
            if key not in {k.lower() for k in _SCHEMA[section]}:
                raise ConfigError(f"unknown key {key!r} in [{section}]", lines.of(section, key))

    def get(section, key):
        if parser.has_section(section) and parser.has_option(section, key):
            return parser.get(section, key), lines.of(section, key)
        return None, lines.of(section)

    # model
    raw, where = get("model", "M")
    if raw is None:
        raise ConfigError("[model] M is required", where)
    M = _parse_int(raw, where)
    if M < 2:
        raise ConfigError(f"M must be >= 2, got {M}", where)
    raw, where = get("model", "half_filling")
    half = _parse_bool(raw, where) if raw is not None else True
    raw, where = get("model", "hardcore")
    hardcore = _parse_bool(raw, where) if raw is not None else False
    raw, n_where = get("model", "N")
    if half:
        if M % 2:
            raise ConfigError(f"half filling needs even M, got M={M}", lines.of("model", "M"))
        N = M // 2
        if raw is not None and _parse_int(raw, n_where) != N:
            raise ConfigError(f"N must equal M/2 = {N} at half filling", n_where)
    else:
        if raw is None:
            raise ConfigError("N is required when half_filling = false", n_where)
        N = _parse_int(raw, n_where)
    raw, where = get("model", "n_max")
    if raw is None:
        n_max = default_n_max(N, hardcore)
    else:
        n_max = _parse_int(raw, where)
        if hardcore and n_max != 1:
            raise ConfigError(f"hardcore = true requires n_max = 1, got {n_max}", where)
        if n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {n_max}", where)
    if n_states(M, N, n_max) == 0:
        raise ConfigError(f"no states for M={M}, N={N}, n_max={n_max}", lines.of("model"))
    raw, where = get("model", "boundary")
    boundary = (raw or "open").strip().lower()
    if boundary not in ("open", "periodic"):
        raise ConfigError(f"boundary must be open or periodic, got {raw!r}", where)
    if boundary == "periodic" and M < 5:
        raise ConfigError(f"periodic boundary needs M >= 5, got M={M}", where)
    raw, where = get("model", "t2")
    t2 = _parse_float(raw, where) if raw is not None else -1.0
    if t2 == 0:
        raise ConfigError("t2 must be nonzero (it sets the energy unit)", where)
    model = ModelConfig(M, N, n_max, boundary, hardcore, t2, half)

    # grid
    raw, where = get("grid", "t1_over_t2")
    if raw is None:
        raise ConfigError("[grid] t1_over_t2 is required", where)
    ratios = _parse_list(raw, where)
    raw, where = get("grid", "U_prime")
    U_primes = _parse_list(raw, where) if raw is not None else (0.0,)
    if min(U_primes) < 0:
        raise ConfigError("U_prime values must be >= 0", where)

    # solver
    defaults = SolverConfig()
    raw, where = get("solver", "tol")
    tol = _parse_float(raw, where) if raw is not None else defaults.tol
    if tol <= 0:
        raise ConfigError("tol must be positive", where)
    raw, where = get("solver", "max_iter")
    max_iter = _parse_int(raw, where) if raw is not None else defaults.max_iter
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1", where)
    raw, where = get("solver", "seed")
    seed = _parse_int(raw, where) if raw is not None else defaults.seed
    solver = SolverConfig(tol, max_iter, seed)

    # observables
    flags = {}
    for key in ("momentum", "chiral", "dimer_xy", "dimer_zz", "half_chain_entropy", "ggm"):
        raw, where = get("observables", key)
        flags[key] = _parse_bool(raw, where) if raw is not None else True
    raw, where = get("observables", "ggm_scope")
    scope = (raw or "all").strip()
    if scope not in ("all", "contiguous+parity"):
        raise ConfigError(f"ggm_scope must be all or contiguous+parity, got {raw!r}", where)
    raw, where = get("observables", "ggm_ceiling")
    ceiling = _parse_int(raw, where) if raw is not None else 16
    if (flags["dimer_xy"] or flags["dimer_zz"]) and M < 4:
        raise ConfigError("dimer correlators need M >= 4", lines.of("observables"))
    observables = ObservableConfig(**flags, ggm_scope=scope, ggm_ceiling=ceiling)

    # output
    raw, where = get("output", "path")
    path = Path(raw.strip()) if raw else Path("results.csv")
    raw, where = get("output", "format")
    fmt = (raw or "csv").strip().lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {raw!r}", where)
    raw, where = get("output", "N_q")
    N_q = _parse_int(raw, where) if raw is not None else 1000
    if N_q < M:
        raise ConfigError(f"N_q must be >= M = {M}, got {N_q}", where)
    output = OutputConfig(path, fmt, N_q)

    return SweepConfig(model, ratios, U_primes, solver, observables, output)


def load_config(path: str | Path) -> SweepConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
