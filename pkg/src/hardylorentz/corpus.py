"""Seeded test corpora of step signals on [0, 1).

Every item is drawn at a base resolution and then refined, so the same
seed and index give the same function at every length and grid-doubling
comparisons see one function on two grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .atomic import remove_global_moments
from .lorentz import Signal, format_exponent, parse_exponent
from .maximal import Atom, Interval, make_atom, project_polynomials, vanishing_moments

__all__ = ["CorpusSpec", "DISTRIBUTIONS", "make_signal", "atom_family", "generate", "write_corpus",
           "load_signal"]

DISTRIBUTIONS = ("uniform", "lognormal", "sparse-atoms")
BASE_CELLS = 512
MAX_LENGTH = 2 ** 14


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 0
    count: int = 100
    signal_length: int = 512
    value_distribution: str = "uniform"
    p_list: tuple = (1.0, 2.0 / 3.0, 0.5)
    q_list: tuple = (0.5, 1.0, 2.0, math.inf)

    def __post_init__(self):
        n = self.signal_length
        if n < 1 or n & (n - 1) or n > MAX_LENGTH:
            raise ValueError(f"signal_length must be a power of two <= {MAX_LENGTH}, got {n}")
        if self.count < 0:
            raise ValueError("count must be non-negative")
        if self.value_distribution not in DISTRIBUTIONS:
            raise ValueError(f"value_distribution must be one of {DISTRIBUTIONS}")
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        object.__setattr__(self, "q_list", tuple(parse_exponent(q) for q in self.q_list))

    def to_json(self) -> dict:
        return {"seed": self.seed, "count": self.count, "signal_length": self.signal_length,
                "value_distribution": self.value_distribution, "p_list": list(self.p_list),
                "q_list": [format_exponent(q) for q in self.q_list]}

    def signals(self, length: int | None = None, moments_for: float | None = None) -> list[Signal]:
        n = length or self.signal_length
        return [make_signal(self.seed, i, n, self.value_distribution, moments_for)
                for i in range(self.count)]


def _blocks(rng: np.random.Generator, base: int, values) -> np.ndarray:
    nb = int(rng.integers(4, 41))
    nb = min(nb, base)
    cuts = np.sort(rng.choice(np.arange(1, base), nb - 1, replace=False)) if nb > 1 else np.array([], int)
    widths = np.diff(np.concatenate(([0], cuts, [base])))
    return np.repeat(values(nb), widths)


def _sparse_atoms(rng: np.random.Generator, base: int) -> np.ndarray:
    out = np.zeros(base)
    order = 2  # moments up to degree 2 vanish, enough for every p > 1/4
    for _ in range(int(rng.integers(1, 7))):
        top = max(int(math.log2(base)) - 3, 0)
        ell = 2 ** int(rng.integers(min(3, top), top + 1))
        ell = min(ell, base)
        i0 = int(rng.integers(0, base - ell + 1))
        raw = rng.normal(size=ell)
        bump = raw - project_polynomials(raw, min(order, ell - 1))
        peak = float(np.max(np.abs(bump)))
        if peak == 0:
            continue
        coef = float(rng.lognormal(0.0, 1.0)) * (base / ell) ** 0.5
        out[i0:i0 + ell] += coef * bump / peak
    return out


def make_signal(seed: int, index: int, length: int, distribution: str = "uniform",
                moments_for: float | None = None) -> Signal:
    """Item ``index`` of the corpus with this seed, on ``length`` cells of [0, 1).

    With ``moments_for = p`` the global moments up to the H^p order are
    removed at the base resolution (before refinement), which makes the
    signal a finite sum of atoms.
    """
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}")
    rng = np.random.default_rng([seed, index])
    base = min(length, BASE_CELLS)
    if distribution == "uniform":
        vals = _blocks(rng, base, lambda n: rng.uniform(-1.0, 1.0, n))
    elif distribution == "lognormal":
        vals = _blocks(rng, base, lambda n: rng.choice([-1.0, 1.0], n) * rng.lognormal(0.0, 1.0, n))
    else:
        vals = _sparse_atoms(rng, base)
    f = Signal(0.0, 1.0 / base, vals)
    if moments_for is not None and base > vanishing_moments(moments_for):
        f = remove_global_moments(f, moments_for)
    if length > base:
        f = f.refine(length // base)
    return f


def atom_family(seed: int, index: int, length: int, p: float,
                heavy: bool = False) -> tuple[list[float], list[Atom], Signal]:
    """A seeded family of atoms on dyadic intervals of [0, 1) with lognormal
    coefficients. ``heavy`` stacks 12 to 24 unit-size atoms on one or two shared
    intervals, so a single level carries a large overlap; otherwise 2 to
    12 atoms are placed freely.
    """
    rng = np.random.default_rng([seed, index, 1 if heavy else 0])
    grid = Signal(0.0, 1.0 / length, np.zeros(length))
    top = int(math.log2(length))
    order = vanishing_moments(p)
    min_exp = max(int(math.ceil(math.log2(order + 2))), 1)
    if heavy:
        anchors = []
        for _ in range(int(rng.integers(1, 3))):
            e = int(rng.integers(min_exp + 1, top - 1))
            anchors.append((e, int(rng.integers(0, length >> e))))
        count = int(rng.integers(12, 25))
    else:
        count = int(rng.integers(2, 13))
    coefficients, atoms = [], []
    for j in range(count):
        if heavy:
            e, slot = anchors[j % len(anchors)]
        else:
            e = int(rng.integers(min_exp, top - 1))
            slot = int(rng.integers(0, length >> e))
        cells = 2 ** e
        iv = Interval(slot * cells / length, (slot + 1) * cells / length)
        raw = np.zeros(length)
        raw[slot * cells:(slot + 1) * cells] = rng.normal(size=cells)
        atom, scale = make_atom(iv, grid.with_values(raw), p)
        if scale == 0.0:
            continue
        atoms.append(atom)
        size = 1.0 if heavy else float(rng.lognormal(0.0, 1.0))
        coefficients.append(float(rng.choice([-1.0, 1.0])) * size)
    return coefficients, atoms, grid


def generate(spec: CorpusSpec, length: int | None = None, moments_for: float | None = None) -> list[Signal]:
    return spec.signals(length, moments_for)


def write_corpus(spec: CorpusSpec, out_dir: str | Path) -> list[Path]:
    """One Signal JSON per item plus a manifest echoing the spec."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, f in enumerate(spec.signals()):
        path = out / f"signal_{i:05d}.json"
        path.write_text(json.dumps(f.to_json()) + "\n")
        paths.append(path)
    manifest = dict(spec.to_json(), files=[p.name for p in paths])
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


def load_signal(path: str | Path) -> Signal:
    return Signal.from_json(json.loads(Path(path).read_text()))
