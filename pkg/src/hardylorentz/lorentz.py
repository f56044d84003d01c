"""Step signals, distribution functions, rearrangements and Lorentz quasinorms.

Every signal is piecewise constant on a uniform grid, so all the integrals
below are closed-form sums over plateaus; nothing here uses quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Signal",
    "StepCurve",
    "LorentzIndex",
    "parse_exponent",
    "format_exponent",
    "distribution_function",
    "rearrangement",
    "lorentz_quasinorm",
    "lorentz_quasinorm_levels",
    "dyadic_level_range",
    "lp_norm",
]


def parse_exponent(value) -> float:
    """Read an exponent that may be infinite ("inf", "infinity", "∞")."""
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            return math.inf
        if "/" in s:
            num, den = s.split("/")
            return float(num) / float(den)
        return float(s)
    return float(value)


def format_exponent(value: float):
    return "inf" if math.isinf(value) else float(value)


@dataclass(frozen=True)
class LorentzIndex:
    """The pair (p, q) with 0 < p < inf and 0 < q <= inf."""

    p: float
    q: float

    def __post_init__(self):
        p, q = parse_exponent(self.p), parse_exponent(self.q)
        if not (0.0 < p < math.inf):
            raise ValueError(f"p must lie in (0, inf), got {self.p!r}")
        if not (q > 0.0) or math.isnan(q):
            raise ValueError(f"q must lie in (0, inf], got {self.q!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def weak(self) -> bool:
        return math.isinf(self.q)

    def require_hardy(self) -> None:
        if self.p > 1.0:
            raise ValueError(f"Hardy-Lorentz indices need p <= 1, got p={self.p}")


@dataclass(frozen=True, eq=False)
class Signal:
    """A real step function on ``[origin, origin + M*cell_width)``.

    ``values[i]`` is the value on the i-th cell. Outside the interval the
    signal is zero.
    """

    origin: float
    cell_width: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size < 1:
            raise ValueError("a signal needs at least one cell")
        if not (self.cell_width > 0 and math.isfinite(self.cell_width)):
            raise ValueError(f"cell_width must be positive, got {self.cell_width!r}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("signal values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "cell_width", float(self.cell_width))

    @classmethod
    def zeros_like(cls, other: "Signal") -> "Signal":
        return cls(other.origin, other.cell_width, np.zeros(other.size))

    @classmethod
    def indicator(cls, a: float, b: float, cell_width: float, origin: float | None = None,
                  length: float | None = None, height: float = 1.0) -> "Signal":
        """``height`` times the indicator of [a, b); cell edges must hit a and b."""
        origin = a if origin is None else origin
        length = (b - origin) if length is None else length
        m = int(round(length / cell_width))
        edges = origin + cell_width * np.arange(m)
        centers = edges + 0.5 * cell_width
        vals = np.where((centers > a) & (centers < b), height, 0.0)
        return cls(origin, cell_width, vals)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def length(self) -> float:
        return self.size * self.cell_width

    @property
    def end(self) -> float:
        return self.origin + self.length

    @property
    def centers(self) -> np.ndarray:
        return self.origin + self.cell_width * (np.arange(self.size) + 0.5)

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.cell_width * np.arange(self.size + 1)

    def support_measure(self) -> float:
        return self.cell_width * int(np.count_nonzero(self.values))

    def with_values(self, values) -> "Signal":
        return Signal(self.origin, self.cell_width, values)

    def same_grid(self, other: "Signal") -> bool:
        return (self.size == other.size and self.origin == other.origin
                and self.cell_width == other.cell_width)

    def __add__(self, other: "Signal") -> "Signal":
        if not self.same_grid(other):
            raise ValueError("signals live on different grids")
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        if not self.same_grid(other):
            raise ValueError("signals live on different grids")
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "Signal":
        return self.with_values(float(c) * self.values)

    __rmul__ = __mul__

    def dilate(self, s: float) -> "Signal":
        """The same values on cells of width ``s * cell_width``."""
        return Signal(self.origin * s, self.cell_width * s, self.values)

    def refine(self, factor: int) -> "Signal":
        """Represent the same function on a grid ``factor`` times finer."""
        factor = int(factor)
        if factor < 1:
            raise ValueError("refinement factor must be a positive integer")
        return Signal(self.origin, self.cell_width / factor, np.repeat(self.values, factor))

    def integral(self) -> float:
        return float(self.cell_width * self.values.sum())

    def to_json(self) -> dict:
        return {"origin": self.origin, "cell_width": self.cell_width,
                "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, data: dict) -> "Signal":
        try:
            return cls(float(data["origin"]), float(data["cell_width"]),
                       np.asarray(data["values"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed Signal record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Right-continuous non-negative step function on (0, inf).

    The value is ``plateau_values[i]`` on ``[breakpoints[i-1], breakpoints[i])``
    (with ``breakpoints[-1] := 0``) and zero beyond the last breakpoint.
    """

    breakpoints: np.ndarray
    plateau_values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        v = np.asarray(self.plateau_values, dtype=float).reshape(-1)
        if b.shape != v.shape:
            raise ValueError("breakpoints and plateau_values differ in length")
        if b.size and (b[0] <= 0 or np.any(np.diff(b) <= 0)):
            raise ValueError("breakpoints must be positive and increasing")
        if np.any(v < 0):
            raise ValueError("plateau values must be non-negative")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "plateau_values", v)

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breakpoints[:-1])) if self.breakpoints.size else self.breakpoints

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.concatenate((self.plateau_values, [0.0]))
        return padded[idx]

    def distribution(self, lam: float) -> float:
        """Measure of {t > 0 : curve(t) > lam}."""
        above = self.plateau_values > lam
        if not np.any(above):
            return 0.0
        widths = self.breakpoints - self.starts
        return float(widths[above].sum())

    def integral_of_power(self, r: float, a: float = 0.0, b: float = math.inf) -> float:
        """Closed-form integral of curve(s)**r over [a, b)."""
        if self.breakpoints.size == 0 or b <= a:
            return 0.0
        lo = np.clip(self.starts, a, b)
        hi = np.clip(self.breakpoints, a, b)
        return float(np.sum((hi - lo) * self.plateau_values ** r))

    def __eq__(self, other):
        if not isinstance(other, StepCurve):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.plateau_values, other.plateau_values))

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "plateau_values": self.plateau_values.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "StepCurve":
        return cls(np.asarray(data["breakpoints"], float), np.asarray(data["plateau_values"], float))


def _as_index(idx) -> LorentzIndex:
    if isinstance(idx, LorentzIndex):
        return idx
    p, q = idx
    return LorentzIndex(p, q)


def distribution_function(f: Signal, lam: float) -> float:
    """m(f, lam) = |{x : |f(x)| > lam}|, an exact cell count times h."""
    if lam < 0:
        raise ValueError(f"level must be non-negative, got {lam}")
    return f.cell_width * int(np.count_nonzero(np.abs(f.values) > lam))


def rearrangement(f: Signal) -> StepCurve:
    """Non-increasing rearrangement of |f| as a step curve with strictly
    decreasing plateaus."""
    a = np.abs(f.values)
    a = a[a > 0]
    if a.size == 0:
        return StepCurve(np.empty(0), np.empty(0))
    vals, counts = np.unique(a, return_counts=True)
    vals, counts = vals[::-1], counts[::-1]
    return StepCurve(f.cell_width * np.cumsum(counts), vals)


def lorentz_quasinorm(f: Signal, idx) -> float:
    """``||f||_{p,q}`` from the rearrangement.

    On a plateau of height v over [b0, b1) the weighted integral
    (q/p) * int t^{q/p - 1} v^q dt equals v^q (b1^{q/p} - b0^{q/p}); the
    quasinorm is the q-th root of the sum. For q = inf it is the largest
    value of t^{1/p} f*(t), attained at the right ends of the plateaus.
    """
    idx = _as_index(idx)
    curve = rearrangement(f)
    if curve.breakpoints.size == 0:
        return 0.0
    b1, b0, v = curve.breakpoints, curve.starts, curve.plateau_values
    if idx.weak:
        return float(np.max(b1 ** (1.0 / idx.p) * v))
    r = idx.q / idx.p
    # scale out the largest value so small q does not underflow
    vmax = v[0]
    total = np.sum((v / vmax) ** idx.q * (b1 ** r - b0 ** r))
    return float(vmax * total ** (1.0 / idx.q))


def dyadic_level_range(values: np.ndarray) -> tuple[int, int] | None:
    """The k-range where m(f, 2^k) can change: from floor(log2 min|f|) - 1
    up to ceil(log2 max|f|). ``None`` for the zero signal."""
    a = np.abs(np.asarray(values, dtype=float))
    a = a[a > 0]
    if a.size == 0:
        return None
    lo = math.frexp(float(a.min()))[1] - 1  # floor(log2 x) for normal floats
    hi = math.frexp(float(a.max()))[1]      # >= ceil(log2 x)
    return lo - 1, hi


def lorentz_quasinorm_levels(f: Signal, idx) -> float:
    """Dyadic form ``||{2^k m(f, 2^k)^{1/p}}||_{l^q}``.

    Below the smallest nonzero |value| the distribution function is the
    constant support measure, so the remaining terms form a geometric
    series; it is added in closed form and the sum is exact.
    """
    idx = _as_index(idx)
    return _dyadic_levels_norm(np.abs(f.values), f.cell_width, idx.p, idx.q)


def _dyadic_levels_norm(a: np.ndarray, h: float, p: float, q: float) -> float:
    rng = dyadic_level_range(a)
    if rng is None:
        return 0.0
    lo, hi = rng
    ks = np.arange(lo, hi + 1)
    sorted_a = np.sort(a)
    # m(f, 2^k) = h * #{|f| > 2^k}
    counts = a.size - np.searchsorted(sorted_a, np.ldexp(1.0, ks), side="right")
    m = h * counts
    if math.isinf(q):
        return float(np.max(np.ldexp(1.0, ks) * m ** (1.0 / p)))
    support = h * np.count_nonzero(a)
    # terms for k < lo all see the full support: sum_{k<lo} 2^{kq} S^{q/p}
    log_terms = ks * math.log(2.0) * q + np.where(m > 0, (q / p) * np.log(np.where(m > 0, m, 1.0)), -np.inf)
    tail = (lo * math.log(2.0) * q + (q / p) * math.log(support)
            - math.log(2.0 ** q - 1.0))
    all_terms = np.concatenate((log_terms, [tail]))
    top = np.max(all_terms)
    return float(math.exp((top + math.log(np.sum(np.exp(all_terms - top)))) / q))


def lp_norm(f: Signal, p: float) -> float:
    """(int |f|^p)^{1/p}, or the sup norm for p = inf."""
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * (f.cell_width * np.sum((a / top) ** p)) ** (1.0 / p))


def as_signal(values: Sequence[float] | np.ndarray | Signal, cell_width: float = 1.0) -> Signal:
    """Sequences are signals on unit cells (counting measure)."""
    if isinstance(values, Signal):
        return values
    return Signal(0.0, cell_width, np.asarray(values, dtype=float))
