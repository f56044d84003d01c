"""Run configuration: ``key = value`` text files, overridden by CLI flags.

Every default lives here so that a report's config echo is enough to
re-run it.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .lorentz import format_exponent, parse_exponent
from .maximal import Mollifier, default_mollifier

__all__ = ["RunConfig", "ConfigError", "load_config"]


class ConfigError(ValueError):
    pass


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(parse_exponent(v) for v in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    count: int = 100
    length: int = 512
    distribution: str = "uniform"
    p_list: tuple = (1.0, 2.0 / 3.0, 0.5)
    q_list: tuple = (0.5, 1.0, 2.0, math.inf)
    p: float = 1.0
    q: float = 2.0
    q1: float = 1.0
    q2: float = math.inf
    eta: float | None = None
    mollifier: str = "auto"      # "auto" or a B-spline degree
    overlap_bound: int = 8
    kernel: str = "hilbert"
    T: int = 16
    refine: int = 4
    tail_levels: int = 8
    optimize: bool = True
    holmstedt_low: float = 0.25
    holmstedt_high: float = 4.0
    kfunc_tolerance: float = 0.05
    spread_thm21: float = 1e3
    spread_thm25: float = 1e2
    c_max: float = 64.0

    def __post_init__(self):
        if self.mollifier != "auto":
            try:
                degree = int(self.mollifier)
            except ValueError:
                raise ConfigError(f"mollifier must be 'auto' or a degree, got {self.mollifier!r}") from None
            if degree < 0:
                raise ConfigError("mollifier degree must be non-negative")
        if self.count < 0:
            raise ConfigError("count must be non-negative")
        if self.overlap_bound < 1:
            raise ConfigError("overlap_bound must be positive")

    def mollifier_for(self, p: float) -> Mollifier:
        return default_mollifier(p) if self.mollifier == "auto" else Mollifier(int(self.mollifier))

    def eta_for(self, p: float, q: float) -> float:
        return self.eta if self.eta is not None else 0.5 * min(p, q)

    def replace(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [format_exponent(x) for x in v]
            elif isinstance(v, float):
                v = format_exponent(v)
            out[f.name] = v
        return out

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in data.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            default = getattr(cls, name, None)
            if isinstance(raw, (list, tuple)):
                raw = " ".join(str(v) for v in raw)
            text = raw if isinstance(raw, str) else None
            try:
                if text is None:
                    value = raw
                elif name in ("p_list", "q_list"):
                    value = _parse_list(text)
                elif name in ("mollifier", "kernel", "distribution"):
                    value = text.strip()
                elif name == "optimize":
                    value = text.strip().lower() in ("1", "true", "yes", "on")
                elif name == "eta":
                    value = None if text.strip().lower() in ("", "none", "auto") else float(text)
                elif isinstance(default, bool):
                    value = text.strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(default, int):
                    value = int(text)
                else:
                    value = parse_exponent(text.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
            kwargs[name] = value
        return cls(**kwargs)


def load_config(path: str | Path | None) -> RunConfig:
    """Read ``key = value`` lines (``#`` comments allowed). ``None`` gives
    the defaults."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig.from_mapping(dict(parser["run"]))
