"""H^p atoms, mollifiers, radial and non-tangential maximal functions, and
the Hardy-Lorentz quasinorm.

Convolutions with dilated mollifiers are exact: a mollifier is a normalized
B-spline on [-1, 1] with a closed-form antiderivative, so integrating it
against a step signal only needs antiderivative differences at cell edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline
from scipy.ndimage import maximum_filter1d
from scipy.signal import convolve

from .lorentz import Signal, _as_index, _dyadic_levels_norm

__all__ = [
    "Interval",
    "Atom",
    "Mollifier",
    "vanishing_moments",
    "default_mollifier",
    "polynomial_basis",
    "project_polynomials",
    "make_atom",
    "scale_exponents",
    "smoothed",
    "radial_maximal",
    "nontangential_maximal",
    "maximal_function",
    "hardy_lorentz_quasinorm",
    "gamma_decay_constant",
]


def vanishing_moments(p: float) -> int:
    """N = floor(1/p - 1) for n = 1."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return int(math.floor(1.0 / p - 1.0 + 1e-12))


@dataclass(frozen=True)
class Interval:
    left: float
    right: float

    def __post_init__(self):
        if not self.right > self.left:
            raise ValueError(f"empty interval [{self.left}, {self.right})")

    @classmethod
    def centered(cls, center: float, length: float) -> "Interval":
        return cls(center - 0.5 * length, center + 0.5 * length)

    @property
    def center(self) -> float:
        return 0.5 * (self.left + self.right)

    @property
    def length(self) -> float:
        return self.right - self.left

    def dilate(self, factor: float) -> "Interval":
        return Interval.centered(self.center, factor * self.length)

    def contains(self, other: "Interval", slack: float = 1e-12) -> bool:
        tol = slack * max(1.0, abs(self.left), abs(self.right))
        return self.left - tol <= other.left and other.right <= self.right + tol


def _cell_range(grid: Signal, interval: Interval) -> tuple[int, int]:
    """Indices [i0, i1) of the grid cells making up ``interval``."""
    a = (interval.left - grid.origin) / grid.cell_width
    b = (interval.right - grid.origin) / grid.cell_width
    i0, i1 = int(round(a)), int(round(b))
    if abs(a - i0) > 1e-9 or abs(b - i1) > 1e-9:
        raise ValueError("interval endpoints are not grid edges")
    return i0, i1


@dataclass(frozen=True, eq=False)
class Atom:
    """A function supported on ``interval`` with |I|^{1/p} sup|a| <= 1 and
    vanishing moments up to order N. ``profile`` lives on the interval's
    own cells."""

    interval: Interval
    profile: Signal
    p: float

    @property
    def order(self) -> int:
        return vanishing_moments(self.p)

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.profile.values)))

    def embed(self, grid: Signal) -> Signal:
        """The atom as a signal on a (larger) grid with the same cell width."""
        if abs(grid.cell_width - self.profile.cell_width) > 1e-12 * grid.cell_width:
            raise ValueError("atom and grid have different cell widths")
        i0, i1 = _cell_range(grid, self.interval)
        if i0 < 0 or i1 > grid.size:
            raise ValueError("atom interval sticks out of the grid")
        vals = np.zeros(grid.size)
        vals[i0:i1] = self.profile.values
        return grid.with_values(vals)

    def moments(self) -> np.ndarray:
        """int (x - c)^alpha a(x) dx for alpha = 0..N, exact per cell."""
        e = self.profile.edges - self.interval.center
        out = []
        for alpha in range(self.order + 1):
            cell = (e[1:] ** (alpha + 1) - e[:-1] ** (alpha + 1)) / (alpha + 1)
            out.append(float(np.dot(cell, self.profile.values)))
        return np.array(out)

    def check(self, tol: float = 1e-10) -> dict:
        """Support, size and moment conditions, each as a flag."""
        i_len = self.interval.length
        support = (self.profile.origin >= self.interval.left - 1e-12 * max(1.0, abs(self.interval.left))
                   and self.profile.end <= self.interval.right + 1e-12 * max(1.0, abs(self.interval.right)))
        size = i_len ** (1.0 / self.p) * self.sup
        mom = self.moments()
        bounds = tol * self.sup * i_len ** (np.arange(mom.size) + 1.0)
        return {
            "support": bool(support),
            "size": bool(size <= 1.0 + 1e-12),
            "size_ratio": size,
            "moments": bool(np.all(np.abs(mom) <= bounds)),
            "valid": bool(support and size <= 1.0 + 1e-12 and np.all(np.abs(mom) <= bounds)),
        }

    def to_json(self) -> dict:
        return {"center": self.interval.center, "length": self.interval.length,
                "p": self.p, "profile": self.profile.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Atom":
        return cls(Interval.centered(float(data["center"]), float(data["length"])),
                   Signal.from_json(data["profile"]), float(data["p"]))


@dataclass(frozen=True)
class Mollifier:
    """Normalized cardinal B-spline of the given degree on [-1, 1].

    Degree 1 is the triangular bump. A degree d spline has a bounded d-th
    derivative, which is what the decay of the maximal function of an atom
    with d - 1 vanishing moments needs.
    """

    degree: int = 1

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("mollifier degree must be non-negative")

    @property
    def name(self) -> str:
        return {0: "box", 1: "triangle"}.get(self.degree, f"bspline{self.degree}")

    @classmethod
    def from_name(cls, name: str) -> "Mollifier":
        name = name.strip().lower()
        if name == "box":
            return cls(0)
        if name == "triangle":
            return cls(1)
        if name.startswith("bspline"):
            return cls(int(name[len("bspline"):]))
        raise ValueError(f"unknown mollifier {name!r}")

    @property
    def integral(self) -> float:
        return 1.0

    def antiderivative(self, u) -> np.ndarray:
        """int_{-1}^{u} phi, rising from 0 to 1."""
        u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
        return _spline_antiderivative(self.degree)(u)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        vals = _spline(self.degree)(np.clip(u, -1.0, 1.0))
        return np.where(np.abs(u) < 1.0, vals, 0.0)

    def profile(self, cells: int = 64) -> Signal:
        """Cell averages of phi on [-1, 1]."""
        edges = np.linspace(-1.0, 1.0, cells + 1)
        mass = np.diff(self.antiderivative(edges))
        return Signal(-1.0, 2.0 / cells, mass * cells / 2.0)

    def weights(self, m: int) -> np.ndarray:
        """Cell weights of phi_t, t = 2^m h, centred on a cell."""
        return _weights(self.degree, m)


@lru_cache(maxsize=None)
def _spline(degree: int) -> BSpline:
    knots = np.linspace(-1.0, 1.0, degree + 2)
    b = BSpline.basis_element(knots, extrapolate=False)
    return BSpline(b.t, b.c * (degree + 1) / 2.0, b.k, extrapolate=True)


@lru_cache(maxsize=None)
def _spline_antiderivative(degree: int) -> BSpline:
    return _spline(degree).antiderivative()


@lru_cache(maxsize=None)
def _weights(degree: int, m: int) -> np.ndarray:
    t = 2.0 ** m  # scale in cells
    half = int(2 ** m) + 1
    j = np.arange(-half, half + 1, dtype=float)
    anti = _spline_antiderivative(degree)
    hi = anti(np.clip((j + 0.5) / t, -1.0, 1.0))
    lo = anti(np.clip((j - 0.5) / t, -1.0, 1.0))
    w = hi - lo
    w.setflags(write=False)
    return w


def default_mollifier(p: float) -> Mollifier:
    """Triangle when only the mean vanishes (p > 1/2), otherwise the B-spline
    of degree 2N + 1, smooth enough for the decay of Ma and sensitive enough
    to the first N moments that the level pieces stay small."""
    n = vanishing_moments(p)
    return Mollifier(1 if n == 0 else 2 * n + 1)


@lru_cache(maxsize=None)
def polynomial_basis(n: int, order: int) -> np.ndarray:
    """Orthonormal basis (n x r) of polynomials of degree <= order in the
    cell index, r = min(n, order + 1).

    Cell averages of x^alpha are polynomials of degree alpha in the cell
    index, so orthogonality to this basis is the same as vanishing
    continuous moments up to ``order``.
    """
    r = min(n, order + 1)
    u = (np.arange(n) - 0.5 * (n - 1)) / max(n, 1)
    vander = np.vander(u, r, increasing=True)
    q, _ = np.linalg.qr(vander)
    q.setflags(write=False)
    return q


def project_polynomials(block: np.ndarray, order: int) -> np.ndarray:
    """Projection of each row of ``block`` onto polynomials of degree <= order."""
    block = np.asarray(block, dtype=float)
    basis = polynomial_basis(block.shape[-1], order)
    return (block @ basis) @ basis.T


def make_atom(interval: Interval, raw: Signal, p: float) -> tuple[Atom, float]:
    """Remove the polynomial part of ``raw`` on ``interval`` and normalize.

    Returns (atom, scale) with scale * atom equal to the moment-corrected
    input; a vanishing remainder gives the zero atom and scale 0.
    """
    order = vanishing_moments(p)
    i0, i1 = _cell_range(raw, interval)
    vals = raw.values
    if i0 < 0 or i1 > raw.size:
        raise ValueError("interval is not inside the grid of raw")
    if np.any(vals[:i0]) or np.any(vals[i1:]):
        raise ValueError("raw is not supported in the interval")
    block = vals[i0:i1]
    resid = block - project_polynomials(block, order)
    top = float(np.max(np.abs(block))) if block.size else 0.0
    peak = float(np.max(np.abs(resid)))
    profile_origin = raw.origin + i0 * raw.cell_width
    if top == 0.0 or peak <= 1e-12 * top:
        zero = Signal(profile_origin, raw.cell_width, np.zeros(i1 - i0))
        return Atom(interval, zero, p), 0.0
    scale = peak * interval.length ** (1.0 / p)
    profile = Signal(profile_origin, raw.cell_width, resid / scale)
    return Atom(interval, profile, p), scale


def scale_exponents(size: int) -> range:
    """Dyadic scales t = h 2^m, from one cell up to the whole domain."""
    return range(0, int(math.floor(math.log2(size))) + 1)


def smoothed(f: Signal, mollifier: Mollifier, m: int) -> np.ndarray:
    """(f * phi_t)(x_i) at the cell centres, t = 2^m h; f vanishes outside
    its interval."""
    w = _weights(mollifier.degree, m)
    return convolve(f.values, w, mode="same")


def radial_maximal(f: Signal, mollifier: Mollifier | None = None) -> Signal:
    """Mf(x) = max_t |f * phi_t(x)| over the dyadic scale set."""
    mollifier = mollifier or Mollifier(1)
    out = np.zeros(f.size)
    for m in scale_exponents(f.size):
        np.maximum(out, np.abs(smoothed(f, mollifier, m)), out=out)
    return f.with_values(out)


def nontangential_maximal(f: Signal, mollifier: Mollifier | None = None) -> Signal:
    """Nf(x) = max |f * psi_t(y)| over grid points y with |x - y| < t."""
    mollifier = mollifier or Mollifier(1)
    out = np.zeros(f.size)
    for m in scale_exponents(f.size):
        g = np.abs(smoothed(f, mollifier, m))
        reach = 2 ** m - 1  # |i - j| < 2^m cells
        if reach > 0:
            g = maximum_filter1d(g, size=2 * reach + 1, mode="nearest")
        np.maximum(out, g, out=out)
    return f.with_values(out)


def maximal_function(f: Signal, mollifier: Mollifier | None = None, kind: str = "radial") -> Signal:
    if kind == "radial":
        return radial_maximal(f, mollifier)
    if kind in ("nontangential", "non-tangential"):
        return nontangential_maximal(f, mollifier)
    raise ValueError(f"unknown maximal function {kind!r}")


def hardy_lorentz_quasinorm(f: Signal, idx, mollifier: Mollifier | None = None,
                            kind: str = "radial") -> float:
    """``||{2^k m(Mf, 2^k)^{1/p}}||_{l^q}`` for the chosen maximal function."""
    idx = _as_index(idx)
    idx.require_hardy()
    mollifier = mollifier or default_mollifier(idx.p)
    mf = maximal_function(f, mollifier, kind)
    return _dyadic_levels_norm(mf.values, f.cell_width, idx.p, idx.q)


def hardy_lorentz_from_maximal(mf: Signal, p: float, q: float) -> float:
    """Same quasinorm when the maximal function is already at hand."""
    return _dyadic_levels_norm(np.abs(mf.values), mf.cell_width, p, q)


def gamma_decay_constant(atom: Atom, grid: Signal, mollifier: Mollifier | None = None) -> float:
    """Smallest c with Ma(x) <= c |I|^{g - 1/p} / (|I| + |x - x_I|)^g on the
    grid, g = N + 2."""
    mollifier = mollifier or default_mollifier(atom.p)
    gamma = atom.order + 2.0
    ma = radial_maximal(atom.embed(grid), mollifier).values
    length = atom.interval.length
    dist = np.abs(grid.centers - atom.interval.center)
    envelope = length ** (gamma - 1.0 / atom.p) / (length + dist) ** gamma
    return float(np.max(ma / envelope))

