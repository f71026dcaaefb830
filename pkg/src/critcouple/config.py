"""Flat key=value run configuration shared by the CLI subcommands.

A config file is plain text: one ``key = value`` pair per line, ``#`` starts
a comment, blank lines are skipped.  Keys mirror the CLI flag names with
underscores.  Values given on the command line override file values.
Unknown keys and malformed lines raise :class:`ConfigError` rather than
being ignored, so typos fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = ["RunConfig", "parse_gamma_grid"]


def parse_gamma_grid(text: str) -> tuple[float, ...]:
    """Parse a gamma grid: ``a,b,c`` explicit values, ``lin:a:b:n`` or
    ``geom:a:b:n`` for n points from a to b inclusive.  Values must be
    positive and strictly increasing."""
    text = text.strip()
    try:
        if text.startswith(("lin:", "geom:")):
            kind, a_s, b_s, n_s = text.split(":")
            a, b, n = float(a_s), float(b_s), int(n_s)
            if n < 2:
                raise ValueError("need at least two points")
            if kind == "lin":
                vals = np.linspace(a, b, n)
            else:
                if a <= 0 or b <= 0:
                    raise ValueError("geometric grid endpoints must be positive")
                vals = np.geomspace(a, b, n)
            grid = tuple(float(v) for v in vals)
        else:
            grid = tuple(float(tok) for tok in text.split(","))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse gamma grid {text!r}: {exc}") from exc
    if not grid:
        raise ConfigError("gamma grid is empty")
    if any(not (g > 0.0 and math.isfinite(g)) for g in grid):
        raise ConfigError(f"gamma grid values must be positive and finite: {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"gamma grid must be strictly increasing: {grid}")
    return grid


@dataclass
class RunConfig:
    """Everything a subcommand needs; None means "not supplied"."""

    N: int | None = None
    s: float | None = None
    p: float | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    gamma_grid: str | None = None
    grid_n: int = 128
    half_width: float = 20.0
    mask_radius: float | None = None
    eps_shift: float = 0.0
    tol: float = 1e-10
    max_iter: int = 10000
    scan_n: int = 100000
    seed: int = 0
    out: str | None = None
    filter: str | None = None
    golden: str | None = None
    s_const: float | None = None

    _INT_KEYS = frozenset({"N", "grid_n", "max_iter", "scan_n", "seed"})
    _STR_KEYS = frozenset({"gamma_grid", "out", "filter", "golden"})

    @classmethod
    def key_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if not f.name.startswith("_"))

    @classmethod
    def _coerce(cls, key: str, value: str):
        value = value.strip()
        try:
            if key in cls._INT_KEYS:
                return int(value)
            if key in cls._STR_KEYS:
                return value
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        known = set(cls.key_names())
        updates = {}
        text = Path(path).read_text()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in updates:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            updates[key] = cls._coerce(key, value)
        return cls(**updates)

    def override(self, **kwargs) -> "RunConfig":
        """New config with the non-None entries of kwargs applied."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        bad = set(updates) - set(self.key_names())
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        return replace(self, **updates)

    def to_file(self, path) -> None:
        lines = []
        for name in self.key_names():
            value = getattr(self, name)
            if value is None:
                continue
            lines.append(f"{name} = {value}")
        Path(path).write_text("\n".join(lines) + "\n")

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"missing required settings: {', '.join(missing)}")
