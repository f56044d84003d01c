"""Peetre K-functionals, Holmstedt's formula, real-interpolation quasinorms
and the Hardy-couple interpolation check.

Couples of sequence spaces use counting measure; couples of function
spaces use the signal's cell width. Hardy couples are only bracketed:
constructive splittings give an upper curve, the Lorentz couple applied to
the non-tangential maximal function gives the comparison curve below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .atomic import AtomicDecomposition, decompose, reconstruct
from .lorentz import LorentzIndex, Signal, StepCurve, as_signal, parse_exponent, rearrangement
from .maximal import Mollifier, default_mollifier, hardy_lorentz_quasinorm, nontangential_maximal
from .reports import Report
from .sequences import level_masses

__all__ = [
    "KCurve",
    "CoupleSpec",
    "IntermediateNormError",
    "couple_norm",
    "k_functional_bruteforce",
    "k_curve",
    "holmstedt",
    "dyadic_t_grid",
    "interpolation_quasinorm",
    "interpolation_index",
    "split_by_levels",
    "lorentz_couple_k",
    "verify_theorem_2_5",
]

COUPLE_KINDS = ("sequence", "function", "hardy")


class IntermediateNormError(ValueError):
    """The integrand has not decayed at the ends of the widest t-grid."""


def dyadic_t_grid(T: int) -> np.ndarray:
    return np.ldexp(1.0, np.arange(-T, T + 1))


@dataclass(frozen=True)
class KCurve:
    """Samples of t -> K(t) on a dyadic grid."""

    t: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        k = np.asarray(self.K, dtype=float).reshape(-1)
        if t.shape != k.shape or t.size == 0:
            raise ValueError("t and K must be non-empty and of equal length")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("t must be positive and increasing")
        if np.any(k < 0) or not np.all(np.isfinite(k)):
            raise ValueError("K values must be finite and non-negative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "K", k)

    def is_concave_like(self, tol: float = 1e-9) -> bool:
        """K nondecreasing and K(t)/t nonincreasing, up to relative ``tol``."""
        scale = max(float(self.K.max()), 1e-300)
        ratio = self.K / self.t
        up = np.all(np.diff(self.K) >= -tol * scale)
        down = np.all(np.diff(ratio) <= tol * np.maximum(ratio[:-1], 1e-300))
        return bool(up and down)

    def scaled(self, c: float) -> "KCurve":
        return KCurve(self.t, abs(c) * self.K)

    def to_json(self) -> dict:
        return {"t": self.t.tolist(), "K": self.K.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "KCurve":
        return cls(np.asarray(data["t"], float), np.asarray(data["K"], float))


@dataclass(frozen=True)
class CoupleSpec:
    """(A0, A1) with indices q0 < q1; Hardy couples also carry p."""

    kind: str
    q0: float
    q1: float
    p: float | None = None

    def __post_init__(self):
        if self.kind not in COUPLE_KINDS:
            raise ValueError(f"couple kind must be one of {COUPLE_KINDS}, got {self.kind!r}")
        q0, q1 = parse_exponent(self.q0), parse_exponent(self.q1)
        if not 0 < q0 < q1:
            raise ValueError(f"need 0 < q0 < q1 <= inf, got {q0}, {q1}")
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", q1)
        if self.kind == "hardy":
            if self.p is None or not 0 < self.p <= 1:
                raise ValueError("Hardy couples need 0 < p <= 1")

    @property
    def alpha(self) -> float:
        """1/alpha = 1/q0 - 1/q1."""
        return 1.0 / (1.0 / self.q0 - 1.0 / self.q1)


def _power_norm(a: np.ndarray, weight: float, q: float) -> float:
    a = np.abs(a)
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return 0.0
    if math.isinf(q):
        return top
    return top * (weight * float(np.sum((a / top) ** q))) ** (1.0 / q)


def couple_norm(x, q: float, kind: str = "function") -> float:
    """l^q (counting measure) or L^q (cell width) norm of a step signal."""
    f = as_signal(x)
    weight = 1.0 if kind == "sequence" else f.cell_width
    return _power_norm(f.values, weight, q)


def _threshold_levels(a: np.ndarray, count: int) -> np.ndarray:
    pos = a[a > 0]
    if pos.size == 0:
        return np.zeros(1)
    lo, hi = float(pos.min()), float(pos.max())
    grid = np.geomspace(lo, hi, count) if hi > lo else np.array([hi])
    return np.unique(np.concatenate(([0.0], grid, pos)))


def _threshold_costs(a: np.ndarray, weight: float, q0: float, q1: float,
                     count: int = 200) -> np.ndarray:
    """(||(|x| - tau)_+||_{q0}, ||min(|x|, tau)||_{q1}) for every clip level tau."""
    taus = _threshold_levels(a, count)
    srt = np.sort(a)
    above = srt.size - np.searchsorted(srt, taus, side="right")
    below = srt.size - above
    if math.isinf(q1):
        n1 = np.minimum(taus, srt[-1])
    else:
        pow1 = np.concatenate(([0.0], np.cumsum(srt ** q1)))
        n1 = (weight * (pow1[below] + above * taus ** q1)) ** (1.0 / q1)
    if q0 == 1.0:
        tail = np.concatenate(([0.0], np.cumsum(srt[::-1])))[above]
        n0 = weight * np.maximum(tail - above * taus, 0.0)
    else:
        n0 = np.array([_power_norm(np.maximum(a - tau, 0.0), weight, q0) for tau in taus])
    return np.column_stack((n0, n1))


def _threshold_k(a: np.ndarray, weight: float, t, q0: float, q1: float,
                 count: int = 200):
    """min over tau of ||(|x| - tau)_+||_{q0} + t ||min(|x|, tau)||_{q1}."""
    costs = _threshold_costs(a, weight, q0, q1, count)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.min(costs[:, :1] + ts[None, :] * costs[:, 1:], axis=0)
    return float(out[0]) if np.ndim(t) == 0 else out


def _pareto(points: np.ndarray) -> np.ndarray:
    # keep (A, B) pairs not dominated in both coordinates
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    keep = []
    best_b = math.inf
    for a, b in pts:
        if b < best_b:
            keep.append((a, b))
            best_b = b
    return np.asarray(keep)


def _exhaustive_k(a: np.ndarray, weight: float, t: float, q0: float, q1: float,
                  fractions: int = 21) -> float:
    """Exact minimum over per-coordinate splits x_i = theta_i x_i + (1 - theta_i) x_i
    with theta_i on a uniform grid. The objective is monotone in the two
    aggregates, so a Pareto front replaces the full product search."""
    theta = np.linspace(0.0, 1.0, fractions)
    front = np.zeros((1, 2))
    for v in a:
        part0 = (theta * v) ** q0 * weight
        rest = (1.0 - theta) * v
        part1 = rest if math.isinf(q1) else rest ** q1 * weight
        A = (front[:, :1] + part0[None, :]).reshape(-1)
        if math.isinf(q1):
            B = np.maximum(front[:, 1:], part1[None, :]).reshape(-1)
        else:
            B = (front[:, 1:] + part1[None, :]).reshape(-1)
        front = _pareto(np.column_stack((A, B)))
    A, B = front[:, 0], front[:, 1]
    n0 = A ** (1.0 / q0)
    n1 = B if math.isinf(q1) else B ** (1.0 / q1)
    return float(np.min(n0 + t * n1))


def k_functional_bruteforce(x, t: float, couple: CoupleSpec, levels: int = 200,
                            exhaustive_max: int = 6, fractions: int = 21) -> float:
    """Smallest ||x0||_{A0} + t ||x1||_{A1} found over the clip family and,
    for short inputs, over an exhaustive per-coordinate split grid."""
    if couple.kind == "hardy":
        raise ValueError("the Hardy couple has no brute-force K; use verify_theorem_2_5")
    if not t > 0:
        raise ValueError("t must be positive")
    f = as_signal(x)
    a = np.abs(f.values)
    if not np.any(a):
        return 0.0
    weight = 1.0 if couple.kind == "sequence" else f.cell_width
    best = _threshold_k(a, weight, t, couple.q0, couple.q1, levels)
    if a.size <= exhaustive_max:
        best = min(best, _exhaustive_k(a, weight, t, couple.q0, couple.q1, fractions))
    return best


def holmstedt(f, t: float, q0: float, q1: float, kind: str = "function") -> float:
    """(int_0^{t^a} f*^{q0})^{1/q0} + t (int_{t^a}^inf f*^{q1})^{1/q1},
    1/a = 1/q0 - 1/q1, exact on the step rearrangement. For q1 = inf the
    second term is t f*(t^a)."""
    q0, q1 = parse_exponent(q0), parse_exponent(q1)
    if not 0 < q0 < q1:
        raise ValueError(f"need 0 < q0 < q1 <= inf, got {q0}, {q1}")
    sig = as_signal(f)
    if kind == "sequence":
        sig = Signal(0.0, 1.0, sig.values)
    curve = rearrangement(sig)
    if curve.breakpoints.size == 0:
        return 0.0
    alpha = 1.0 / (1.0 / q0 - 1.0 / q1)
    s = t ** alpha
    first = curve.integral_of_power(q0, 0.0, s) ** (1.0 / q0)
    if math.isinf(q1):
        second = float(curve(s))
    else:
        second = curve.integral_of_power(q1, s) ** (1.0 / q1)
    return first + t * second


def k_curve(x, couple: CoupleSpec, T: int = 16, method: str = "bruteforce") -> KCurve:
    ts = dyadic_t_grid(T)
    if method == "bruteforce":
        f = as_signal(x)
        a = np.abs(f.values)
        if not np.any(a):
            return KCurve(ts, np.zeros_like(ts))
        weight = 1.0 if couple.kind == "sequence" else f.cell_width
        vals = _threshold_k(a, weight, ts, couple.q0, couple.q1)
        if a.size <= 6:
            vals = np.minimum(vals, [_exhaustive_k(a, weight, t, couple.q0, couple.q1) for t in ts])
    elif method == "holmstedt":
        vals = [holmstedt(x, t, couple.q0, couple.q1, couple.kind) for t in ts]
    else:
        raise ValueError(f"unknown K method {method!r}")
    return KCurve(ts, np.asarray(vals))


def interpolation_index(q1: float, q: float, q2: float) -> float:
    """eta with 1/q = (1 - eta)/q1 + eta/q2."""
    q1, q, q2 = (parse_exponent(v) for v in (q1, q, q2))
    if not 0 < q1 < q < q2:
        raise ValueError(f"need 0 < q1 < q < q2 <= inf, got {q1}, {q}, {q2}")
    return (1.0 / q1 - 1.0 / q) / (1.0 / q1 - 1.0 / q2)


def _cell_integrals(t: np.ndarray, k: np.ndarray, eta: float, q: float) -> tuple[np.ndarray, float, float]:
    """Integrals of (t^-eta K)^q dt/t over each grid cell with K a power law
    between samples, plus the two power-law tails beyond the grid."""
    u = np.log(t)
    with np.errstate(divide="ignore"):
        logk = np.log(k)
    # integrand g(u) = exp(q (logK - eta u)), log-linear per cell when K > 0
    lg = q * (logk - eta * u)
    du = np.diff(u)
    a, b = lg[:-1], lg[1:]
    out = np.zeros(du.size)
    both = np.isfinite(a) & np.isfinite(b)
    d = b - a
    small = both & (np.abs(d) < 1e-9)
    big = both & ~small
    out[small] = du[small] * np.exp(a[small] + d[small] / 2)
    out[big] = du[big] * (np.exp(b[big]) - np.exp(a[big])) / d[big]
    one = np.isfinite(a) ^ np.isfinite(b)  # a zero endpoint: trapezoid
    out[one] = du[one] * 0.5 * (np.exp(np.where(np.isfinite(a), a, -np.inf))[one]
                                + np.exp(np.where(np.isfinite(b), b, -np.inf))[one])

    def tail(slope: float, value: float) -> float:
        # int_0^inf exp(value + slope s) ds toward the outside, slope < 0 needed
        if not np.isfinite(value):
            return 0.0
        if slope >= 0:
            return math.inf
        return math.exp(value) / -slope

    left = tail(-(lg[1] - lg[0]) / du[0], lg[0]) if np.all(np.isfinite(lg[:2])) else 0.0
    right = tail((lg[-1] - lg[-2]) / du[-1], lg[-1]) if np.all(np.isfinite(lg[-2:])) else 0.0
    return out, left, right


def interpolation_quasinorm(K: KCurve | Callable[[np.ndarray], np.ndarray], eta: float, q: float,
                            T: int = 16, max_T: int = 40, decay: float = 1e-3) -> float:
    """(int [t^-eta K(t)]^q dt/t)^{1/q}, or sup t^-eta K(t) when q = inf.

    ``K`` is either a KCurve or a vectorised function of t; only the latter
    can be re-sampled on a wider grid when the integrand has not decayed to
    ``decay`` times its maximum at both ends.
    """
    q = parse_exponent(q)
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    curve = K if isinstance(K, KCurve) else None
    while True:
        if curve is None or not isinstance(K, KCurve):
            ts = dyadic_t_grid(T)
            curve = KCurve(ts, np.asarray(K(ts), dtype=float))
        t, k = curve.t, curve.K
        if not np.any(k > 0):
            return 0.0
        g = t ** -eta * k
        top = float(g.max())
        decayed = g[0] <= decay * top and g[-1] <= decay * top
        if decayed or isinstance(K, KCurve) or T >= max_T:
            break
        T = min(max_T, T + 8)
        curve = None
    if not decayed:
        raise IntermediateNormError(
            f"t^-eta K(t) has not decayed at the grid ends (T = {T}); "
            "the intermediate quasinorm is not resolved at this range")
    if math.isinf(q):
        return top
    scale = top
    cells, left, right = _cell_integrals(t, k / scale, eta, q)
    return scale * float(cells.sum() + left + right) ** (1.0 / q)


def split_by_levels(dec: AtomicDecomposition, l0: int, p: float | None = None) -> tuple[Signal, Signal]:
    """f1 = the l0 levels of largest mass mu_k (ties to the smaller k),
    f2 = the remaining levels."""
    if l0 < 0:
        raise ValueError("l0 must be non-negative")
    p = dec.p if p is None else p
    mu = level_masses(dec, p)
    ranked = sorted(mu, key=lambda k: (-mu[k], k))
    chosen = ranked[:l0]
    f1 = reconstruct(dec, chosen)
    f2 = reconstruct(dec, ranked[l0:])
    return f1, f2


def _curve_lorentz(b0: np.ndarray, b1: np.ndarray, v: np.ndarray, p: float, q: float) -> float:
    """Lorentz quasinorm of a non-increasing step curve with plateaus v on [b0, b1)."""
    keep = v > 0
    if not np.any(keep):
        return 0.0
    b0, b1, v = b0[keep], b1[keep], v[keep]
    if math.isinf(q):
        return float(np.max(b1 ** (1.0 / p) * v))
    r = q / p
    top = float(v.max())
    return top * float(np.sum((v / top) ** q * (b1 ** r - b0 ** r))) ** (1.0 / q)


def lorentz_couple_k(g: Signal, ts: np.ndarray, p: float, q0: float, q1: float,
                     levels: int = 400) -> np.ndarray:
    """K(t, g; L^{p,q0}, L^{p,q1}) over clip splits g = (g - clip) + clip.

    The rearrangement of min(|g|, tau) is min(g*, tau) and that of
    (|g| - tau)_+ is (g* - tau)_+, so every split is evaluated in closed form.
    """
    curve: StepCurve = rearrangement(g)
    ts = np.asarray(ts, dtype=float)
    if curve.breakpoints.size == 0:
        return np.zeros_like(ts)
    b0, b1, v = curve.starts, curve.breakpoints, curve.plateau_values
    taus = v if v.size <= levels else np.unique(np.concatenate(
        (np.geomspace(v.min(), v.max(), levels), v[:: max(1, v.size // levels)])))
    taus = np.concatenate(([0.0], taus))
    pairs = np.array([(_curve_lorentz(b0, b1, np.maximum(v - tau, 0.0), p, q0),
                       _curve_lorentz(b0, b1, np.minimum(v, tau), p, q1)) for tau in taus])
    return np.min(pairs[:, :1] + ts[None, :] * pairs[:, 1:], axis=0)


def verify_theorem_2_5(f: Signal, p: float, q1: float, q: float, q2: float,
                       mollifier: Mollifier | None = None, T: int = 16,
                       dec: AtomicDecomposition | None = None) -> Report:
    """Compare the (eta, q) quasinorms of the two bracketing K-curves of the
    Hardy couple (H^{p,q1}, H^{p,q2}) with ||f||_{H^{p,q}}."""
    q1, q, q2 = (parse_exponent(v) for v in (q1, q, q2))
    eta = interpolation_index(q1, q, q2)
    LorentzIndex(p, q).require_hardy()
    mollifier = mollifier or default_mollifier(p)
    values = {"p": p, "q1": q1, "q": q, "q2": q2, "eta": eta}
    if not np.any(f.values):
        values.update(upper=0.0, lower=0.0, hardy_lorentz=0.0, upper_over_hardy=1.0,
                      lower_over_hardy=1.0, upper_over_lower=1.0, spread=1.0)
        return Report("thm25", values, {"finite": True})

    dec = dec or decompose(f, p, mollifier)
    n_levels = len(dec.levels)
    costs = []
    for l0 in range(n_levels + 1):
        f1, f2 = split_by_levels(dec, l0, p)
        costs.append((hardy_lorentz_quasinorm(f1, (p, q1), mollifier),
                      hardy_lorentz_quasinorm(f2, (p, q2), mollifier)))
    costs = np.asarray(costs)

    def upper_k(ts):
        return np.min(costs[:, :1] + np.asarray(ts)[None, :] * costs[:, 1:], axis=0)

    nf = nontangential_maximal(f, mollifier)

    def lower_k(ts):
        return lorentz_couple_k(nf, ts, p, q1, q2)

    upper = interpolation_quasinorm(upper_k, eta, q, T=T)
    lower = interpolation_quasinorm(lower_k, eta, q, T=T)
    hardy = hardy_lorentz_quasinorm(f, (p, q), mollifier)
    trio = [upper, lower, hardy]
    values.update(upper=upper, lower=lower, hardy_lorentz=hardy,
                  upper_over_hardy=upper / hardy, lower_over_hardy=lower / hardy,
                  upper_over_lower=upper / lower, spread=max(trio) / min(trio),
                  splits=n_levels + 1)
    ts = dyadic_t_grid(T)
    up_ts, low_ts = upper_k(ts), lower_k(ts)
    values["max_lower_over_upper_k"] = float(np.max(low_ts / np.maximum(up_ts, 1e-300)))
    flags = {"finite": all(math.isfinite(v) and v > 0 for v in trio),
             "upper_curve_valid": KCurve(ts, up_ts).is_concave_like(),
             "lower_curve_valid": KCurve(ts, low_ts).is_concave_like()}
    return Report("thm25", values, flags)
