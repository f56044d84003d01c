"""Coefficient sequences: l^q norms, dyadic level partitions and mixed norms."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CoefficientFamily",
    "ell_q_norm",
    "level_of",
    "level_partition",
    "mixed_norm",
    "level_masses",
]


@dataclass(frozen=True)
class CoefficientFamily:
    """Pairs (lambda_j, |I_j|). Zero coefficients are allowed but belong to
    no level."""

    lambdas: tuple[float, ...]
    measures: tuple[float, ...]

    def __init__(self, entries: Iterable[tuple[float, float]] = ()):
        entries = [(float(lam), float(meas)) for lam, meas in entries]
        for lam, meas in entries:
            if not meas > 0:
                raise ValueError(f"interval measures must be positive, got {meas}")
            if not math.isfinite(lam):
                raise ValueError("coefficients must be finite")
        object.__setattr__(self, "lambdas", tuple(e[0] for e in entries))
        object.__setattr__(self, "measures", tuple(e[1] for e in entries))

    def __len__(self) -> int:
        return len(self.lambdas)

    @property
    def entries(self) -> list[tuple[float, float]]:
        return list(zip(self.lambdas, self.measures))

    def scaled(self, c: float) -> "CoefficientFamily":
        return CoefficientFamily((c * lam, m) for lam, m in self.entries)

    def to_json(self) -> dict:
        return {"entries": [{"lambda": lam, "measure": m} for lam, m in self.entries]}

    @classmethod
    def from_json(cls, data: dict) -> "CoefficientFamily":
        return cls((e["lambda"], e["measure"]) for e in data["entries"])


def ell_q_norm(mu, q: float) -> float:
    """(sum mu_k^q)^{1/q}, or max mu_k when q is infinite."""
    mu = np.abs(np.asarray(list(mu.values()) if isinstance(mu, Mapping) else mu, dtype=float))
    if mu.size == 0:
        return 0.0
    top = float(mu.max())
    if math.isinf(q):
        return top
    if top == 0.0:
        return 0.0
    return top * float(np.sum((mu / top) ** q)) ** (1.0 / q)


def level_of(ratio: float) -> int:
    """The integer k with 2^k <= ratio < 2^{k+1}, read off the binary
    exponent of the float, so powers of two land exactly on their own level."""
    if not ratio > 0:
        raise ValueError("level_of needs a positive ratio")
    return math.frexp(ratio)[1] - 1


def level_partition(c: CoefficientFamily, p: float) -> dict[int, list[int]]:
    """Map k to the indices j with 2^k <= |lambda_j| / |I_j|^{1/p} < 2^{k+1}."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    levels: dict[int, list[int]] = defaultdict(list)
    for j, (lam, meas) in enumerate(c.entries):
        if lam == 0.0:
            continue
        levels[level_of(abs(lam) / meas ** (1.0 / p))].append(j)
    return dict(sorted(levels.items()))


def mixed_norm(c: CoefficientFamily, p: float, q: float) -> float:
    """``||lambda||_{[p,q]}``: l^p inside each level, then l^q over levels."""
    parts = level_partition(c, p)
    lam = np.abs(np.asarray(c.lambdas, dtype=float))
    per_level = [ell_q_norm(lam[idx], p) for idx in parts.values()]
    return ell_q_norm(per_level, q)


def level_masses(dec, p: float) -> dict[int, float]:
    """mu_k = (sum_j |lambda_{j,k}|^p)^{1/p} for each level of ``dec``.

    ``dec`` is an AtomicDecomposition or a mapping k -> iterable of
    coefficients. Levels absent from ``dec`` have mass zero and are omitted.
    """
    levels = dec.levels if hasattr(dec, "levels") else dec
    out = {}
    for k, terms in sorted(levels.items()):
        lams = [t[0] if isinstance(t, tuple) else getattr(t, "coefficient", t) for t in terms]
        out[int(k)] = ell_q_norm(lams, p)
    return out
