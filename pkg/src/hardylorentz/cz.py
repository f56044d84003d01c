"""A model Calderon-Zygmund operator (the truncated Hilbert kernel), the
modulus omega_p of its Taylor remainders, the Dini constant A_{p,q}, atom
tail estimates and the H^{p,q} -> L^{p,inf} check.

Operators act on step signals through exact per-cell integrals of the
kernel. Images are evaluated on the signal's grid padded by one domain
length on each side, so the slowly decaying part of Tf off the support
is still counted in distribution functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import convolve

from .atomic import AtomicDecomposition, decompose, reconstruct
from .lorentz import LorentzIndex, Signal, distribution_function, lorentz_quasinorm, parse_exponent
from .maximal import Atom, Interval, Mollifier, default_mollifier, hardy_lorentz_quasinorm, vanishing_moments
from .reports import Report

__all__ = [
    "Kernel",
    "HilbertKernel",
    "kernel_by_name",
    "DiniReport",
    "apply_cz",
    "cz_at",
    "padded",
    "weak_norm_of_image",
    "taylor_remainder",
    "default_family",
    "omega_p",
    "dini_integral",
    "dini_constant",
    "atom_tail_check",
    "verify_theorem_2_2",
]


class Kernel:
    """Interface for kernels k(x, y) singular on the diagonal."""

    name = "kernel"

    def __call__(self, x, y):
        raise NotImplementedError

    def derivative(self, alpha: int, x, y):
        """D_y^alpha k(x, y)."""
        raise NotImplementedError

    def coefficient(self, alpha: int, x, y):
        """k_alpha(x, y) = D_y^alpha k(x, y) / alpha!."""
        return self.derivative(alpha, x, y) / math.factorial(alpha)

    def cell_integral(self, x, a, b, eps: float):
        """int over y in [a, b) with |x - y| > eps of k(x, y) dy."""
        raise NotImplementedError

    def remainder(self, x, y, center: float, order: int):
        x, y = np.asarray(x, float), np.asarray(y, float)
        total = self(x, y)
        for alpha in range(order + 1):
            total = total - (y - center) ** alpha * self.coefficient(alpha, x, center)
        return total


@dataclass(frozen=True)
class HilbertKernel(Kernel):
    """k(x, y) = 1 / (x - y)."""

    name = "hilbert"

    def __call__(self, x, y):
        return 1.0 / (np.asarray(x, float) - np.asarray(y, float))

    def derivative(self, alpha: int, x, y):
        d = np.asarray(x, float) - np.asarray(y, float)
        return math.factorial(alpha) / d ** (alpha + 1)

    def coefficient(self, alpha: int, x, y):
        return 1.0 / (np.asarray(x, float) - np.asarray(y, float)) ** (alpha + 1)

    def cell_integral(self, x, a, b, eps: float):
        # with u = x - y the cell is u in (x - b, x - a]; int du / u off (-eps, eps)
        lo = np.asarray(x, float) - np.asarray(b, float)
        hi = np.asarray(x, float) - np.asarray(a, float)
        return _log_part(lo, hi, eps) - _log_part(-hi, -lo, eps)

    def remainder(self, x, y, center: float, order: int):
        """Closed form ((y - c)/(x - c))^{N+1} / (x - y) of the geometric series."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        return ((y - center) / (x - center)) ** (order + 1) / (x - y)


def _log_part(lo, hi, eps):
    """int du/u over [lo, hi] intersected with [eps, inf)."""
    lo = np.maximum(lo, eps)
    ok = hi > lo
    safe_lo = np.where(ok, lo, 1.0)
    out = np.log1p((np.where(ok, hi, 1.0) - safe_lo) / safe_lo)
    return np.where(ok, out, 0.0)


KERNELS = {"hilbert": HilbertKernel}


def kernel_by_name(name: str) -> Kernel:
    try:
        return KERNELS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; available: {sorted(KERNELS)}") from None


@lru_cache(maxsize=64)
def _cell_weights(size: int, eps_cells: float, name: str) -> np.ndarray:
    kernel = kernel_by_name(name)
    d = np.arange(-(size - 1), size, dtype=float)
    # target at offset d cells from the source cell centre, unit cells
    w = kernel.cell_integral(d, -0.5, 0.5, eps_cells)
    w.setflags(write=False)
    return w


def apply_cz(f: Signal, kernel: Kernel | None = None, eps: float | None = None) -> Signal:
    """Tf at the cell centres of f's grid, with the kernel integrated exactly
    over each cell outside |x - y| <= eps (default half a cell, which drops
    exactly the target's own cell)."""
    kernel = kernel or HilbertKernel()
    h = f.cell_width
    eps = h / 2 if eps is None else eps
    if eps < h / 2 * (1 - 1e-12):
        raise ValueError("truncation must be at least half a cell")
    if not isinstance(kernel, HilbertKernel):
        return f.with_values(cz_at(f, f.centers, kernel, eps))
    # 1/(x - y) is scale invariant, so unit-cell weights serve every h
    w = _cell_weights(f.size, round(eps / h, 12), kernel.name)
    out = convolve(f.values, w, mode="full", method="direct")[f.size - 1: 2 * f.size - 1]
    return f.with_values(out)


def cz_at(f: Signal, x, kernel: Kernel | None = None, eps: float | None = None,
          chunk: int = 4096) -> np.ndarray:
    """Tf at arbitrary points x by direct summation of the cell integrals."""
    kernel = kernel or HilbertKernel()
    eps = f.cell_width / 2 if eps is None else eps
    x = np.asarray(x, dtype=float).reshape(-1)
    nz = np.flatnonzero(f.values)
    if nz.size == 0:
        return np.zeros_like(x)
    a = f.edges[:-1][nz]
    b = f.edges[1:][nz]
    v = f.values[nz]
    out = np.empty_like(x)
    for s in range(0, x.size, chunk):
        xs = x[s:s + chunk, None]
        out[s:s + chunk] = kernel.cell_integral(xs, a[None, :], b[None, :], eps) @ v
    return out


def padded(f: Signal, pad: int | None = None) -> Signal:
    """f on a grid extended by ``pad`` zero cells on both sides (default: one
    domain length)."""
    pad = f.size if pad is None else pad
    vals = np.concatenate((np.zeros(pad), f.values, np.zeros(pad)))
    return Signal(f.origin - pad * f.cell_width, f.cell_width, vals)


def weak_norm_of_image(f: Signal, p: float, kernel: Kernel | None = None) -> float:
    """||Tf||_{p,inf} with Tf evaluated on the padded grid."""
    return lorentz_quasinorm(apply_cz(padded(f), kernel), (p, math.inf))


def taylor_remainder(kernel: Kernel, interval: Interval, order: int, x, y):
    """k(x, y) - sum_{a <= N} (y - y_I)^a k_a(x, y_I) for x outside 2I."""
    x = np.asarray(x, dtype=float)
    c = interval.center
    if np.any(np.abs(x - c) <= interval.length):
        raise ValueError("x must lie outside the doubled interval")
    y = np.asarray(y, dtype=float)
    if np.any(y < interval.left) or np.any(y > interval.right):
        raise ValueError("y must lie in the interval")
    return kernel.remainder(x, y, c, order)


def default_family(grid: Signal, positions: int = 3) -> list[Interval]:
    """Dyadic intervals of every length 4h .. domain/4 at ``positions`` spots."""
    h, n = grid.cell_width, grid.size
    family = []
    ell = 4
    while ell <= n // 4:
        for frac in np.linspace(0.25, 0.75, positions):
            i0 = int(round(frac * n / ell)) * ell
            i0 = min(max(i0, 0), n - ell)
            family.append(Interval(grid.origin + i0 * h, grid.origin + (i0 + ell) * h))
        ell *= 2
    if not family:
        family.append(Interval(grid.origin, grid.end))
    return family


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_FAR_NODES, _FAR_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _inner_remainder_mass(kernel: Kernel, interval: Interval, order: int, x: np.ndarray) -> np.ndarray:
    """int_I |remainder(x, y)| dy by Gauss-Legendre on each half of I (the
    remainder changes sign only at the centre)."""
    c, half = interval.center, interval.length / 2
    total = np.zeros_like(x)
    for lo in (c - half, c):
        y = lo + (half / 2) * (_GL_NODES + 1.0)
        vals = np.abs(kernel.remainder(x[:, None], y[None, :], c, order))
        total += (half / 2) * vals @ _GL_WEIGHTS
    return total


def _outer_nodes(grid: Signal, refine: int, far_panels: int = 48) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights for an integral over the whole line:
    midpoints of a ``refine``-times finer grid on the domain, and
    Gauss-Legendre panels of geometrically growing width on either side."""
    w = grid.cell_width / refine
    mid = grid.origin + (np.arange(grid.size * refine) + 0.5) * w
    edges = np.concatenate(([0.0], grid.cell_width * np.ldexp(1.0, np.arange(far_panels))))
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo)[:, None] / 2
    d = (lo[:, None] + half * (_FAR_NODES[None, :] + 1.0)).reshape(-1)
    dw = (half * _FAR_WEIGHTS[None, :]).reshape(-1)
    x = np.concatenate((grid.origin - d[::-1], mid, grid.end + d))
    weights = np.concatenate((dw[::-1], np.full(mid.size, w), dw))
    return x, weights


def _omega_terms(kernel: Kernel, p: float, order: int, delta: float, family, grid: Signal,
                 refine: int) -> np.ndarray:
    x, w = _outer_nodes(grid, refine)
    out = []
    for iv in family:
        keep = np.abs(x - iv.center) > iv.length / delta
        if not np.any(keep):
            out.append(0.0)
            continue
        inner = _inner_remainder_mass(kernel, iv, order, x[keep])
        out.append(float(np.sum(w[keep] * inner ** p)) / iv.length)
    return np.asarray(out)


def omega_p(kernel: Kernel, p: float, order: int, delta: float, family=None,
            grid: Signal | None = None, refine: int = 4) -> float:
    """max over I in the family of (1/|I|) int_{off (2/delta) I} [int_I |rem|]^p dx.

    The outer integral runs over the whole line: midpoint rule on a
    ``refine``-times finer grid inside the domain, Gauss panels outside.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    grid = grid if grid is not None else Signal(0.0, 1.0 / 512, np.zeros(512))
    family = family or default_family(grid)
    return float(np.max(_omega_terms(kernel, p, order, delta, family, grid, refine)))


@dataclass
class DiniReport:
    delta_grid: np.ndarray
    omega_values: np.ndarray
    A_pq: float
    exponent: float
    divergent: bool = False
    family: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"delta_grid": np.asarray(self.delta_grid).tolist(),
                "omega_values": np.asarray(self.omega_values).tolist(),
                "A_pq": self.A_pq if math.isfinite(self.A_pq) else "inf",
                "exponent": self.exponent, "divergent": self.divergent,
                "family": [[iv.left, iv.right] for iv in self.family]}


def dini_integral(deltas, omegas, r: float) -> tuple[float, bool]:
    """(int_0^1 omega^r d delta / delta)^{1/r} with omega a power law between
    samples and continued as a power law below the smallest delta.
    Returns the value and a divergence indicator."""
    d = np.asarray(deltas, dtype=float)
    w = np.asarray(omegas, dtype=float)
    order = np.argsort(d)
    d, w = d[order], w[order]
    if np.all(w == 0):
        return 0.0, False
    total = 0.0
    for i in range(d.size - 1):
        a, b = w[i] ** r, w[i + 1] ** r
        span = math.log(d[i + 1] / d[i])
        if a == 0 or b == 0:
            total += span * (a + b) / 2
        elif abs(math.log(b / a)) < 1e-12:
            total += span * a
        else:
            total += span * (b - a) / math.log(b / a)
    # tail below the grid: omega^r ~ w0^r (delta / d0)^s
    if d.size >= 2 and w[0] > 0 and w[1] > 0:
        s = r * math.log(w[1] / w[0]) / math.log(d[1] / d[0])
        if s <= 0:
            return math.inf, True
        total += w[0] ** r / s
    elif w[0] > 0:
        return math.inf, True
    return total ** (1.0 / r), False


def _dini_exponent(p: float, q: float) -> float:
    return 1.0 if math.isinf(q) else q / (q - p)


def dini_constant(kernel: Kernel, p: float, q: float, order: int | None = None, delta_grid=None,
                  family=None, grid: Signal | None = None, refine: int = 4) -> DiniReport:
    """A_{p,q} from omega_p sampled on a dyadic delta grid (default 2^-12 .. 1)."""
    q = parse_exponent(q)
    if not p < q:
        raise ValueError("need p < q")
    order = vanishing_moments(p) if order is None else order
    deltas = np.ldexp(1.0, -np.arange(12, -1, -1)) if delta_grid is None else np.asarray(delta_grid, float)
    grid = grid if grid is not None else Signal(0.0, 1.0 / 512, np.zeros(512))
    family = family or default_family(grid)
    terms = np.array([_omega_terms(kernel, p, order, float(dl), family, grid, refine) for dl in deltas])
    omegas = terms.max(axis=1)
    r = _dini_exponent(p, q)
    value, divergent = dini_integral(deltas, omegas, r)
    return DiniReport(deltas, omegas, value, r, divergent, list(family))


def atom_tail_check(atom: Atom, kernel: Kernel | None, delta: float, family=None,
                    grid: Signal | None = None, refine: int = 4) -> Report:
    """int_{off (2/delta) I} |Ta|^p <= omega_p(delta), both sides on the same
    refined midpoint nodes."""
    kernel = kernel or HilbertKernel()
    if grid is None:
        # enough room for the excluded region and a long tail beyond it
        h = atom.profile.cell_width
        n = int(math.ceil(8 * atom.interval.length / (delta * h)))
        grid = Signal(atom.interval.center - n * h, h, np.zeros(2 * n))
    family = list(family or default_family(grid))
    if not any(abs(iv.left - atom.interval.left) < 1e-12 and abs(iv.right - atom.interval.right) < 1e-12
               for iv in family):
        family.append(atom.interval)
    p, order = atom.p, atom.order
    x, w = _outer_nodes(grid, refine)
    keep = np.abs(x - atom.interval.center) > atom.interval.length / delta
    ta = cz_at(atom.profile, x[keep], kernel)
    lhs = float(np.sum(w[keep] * np.abs(ta) ** p))
    terms = _omega_terms(kernel, p, order, delta, family, grid, refine)
    own = float(_omega_terms(kernel, p, order, delta, [atom.interval], grid, refine)[0])
    rhs = float(terms.max())
    return Report("atom_tail", {"delta": delta, "lhs": lhs, "omega": rhs, "own_interval_term": own},
                  {"tail_bound": lhs <= rhs + 1e-9})


def _union_measure(intervals: list[tuple[float, float]]) -> float:
    if not intervals:
        return 0.0
    ivs = sorted(intervals)
    total, cur_l, cur_r = 0.0, ivs[0][0], ivs[0][1]
    for l, r in ivs[1:]:
        if l > cur_r:
            total += cur_r - cur_l
            cur_l, cur_r = l, r
        else:
            cur_r = max(cur_r, r)
    return total + cur_r - cur_l


def verify_theorem_2_2(f: Signal, p: float, q: float, mollifier: Mollifier | None = None,
                       kernel: Kernel | None = None, dini: DiniReport | None = None,
                       k0s=None, dec: AtomicDecomposition | None = None) -> Report:
    """Weak-type estimate ||Tf||_{p,inf} <= C A_{p,q}^{1/p} ||f||_{H^{p,q}},
    with the three inequalities of the level-splitting argument logged for
    every k0."""
    q = parse_exponent(q)
    LorentzIndex(p, q).require_hardy()
    if not p < q:
        raise ValueError("need p < q")
    kernel = kernel or HilbertKernel()
    mollifier = mollifier or default_mollifier(p)
    if not np.any(f.values):
        return Report("thm22", {"p": p, "q": q, "weak_norm": 0.0, "hardy_lorentz": 0.0, "C": 0.0},
                      {"finite": True})
    dini = dini or dini_constant(kernel, p, q, grid=f)
    A = dini.A_pq
    h_q = hardy_lorentz_quasinorm(f, (p, q), mollifier)
    h_inf = hardy_lorentz_quasinorm(f, (p, math.inf), mollifier)
    big = padded(f)
    tf = apply_cz(big, kernel)
    weak = lorentz_quasinorm(tf, (p, math.inf))
    C = weak / (A ** (1.0 / p) * h_q) if A > 0 and math.isfinite(A) else math.inf

    dec = dec or decompose(f, p, mollifier)
    levels = sorted(dec.levels)
    if k0s is None:
        k0s = range(levels[0] - 2, levels[-1] + 2) if levels else []
    centers = big.centers
    c_omega, c_tail, c_weak = [], [], []
    for k0 in k0s:
        upper = [k for k in levels if k > k0]
        f2 = padded(reconstruct(dec, upper))
        tf2 = apply_cz(f2, kernel)
        stars = []
        for k in upper:
            factor = 2.0 * 1.5 ** (p * (k - k0))
            for _, atom in dec.levels[k]:
                iv = atom.interval.dilate(factor)
                stars.append((iv.left, iv.right))
        omega_measure = _union_measure(stars)
        outside = np.ones(big.size, dtype=bool)
        for l, r in stars:
            outside &= ~((centers > l) & (centers < r))
        tail = float(big.cell_width * np.sum(np.abs(tf2.values[outside]) ** p))
        scale = 2.0 ** (k0 * p)
        c_omega.append(scale * omega_measure / h_inf ** p)
        c_tail.append(tail / (A * h_q ** p) if A > 0 else math.inf)
        c_weak.append(scale * distribution_function(tf, 2.0 ** k0) / h_q ** p)
    values = {"p": p, "q": q, "A_pq": A, "weak_norm": weak, "hardy_lorentz": h_q,
              "hardy_lorentz_weak": h_inf, "C": C,
              "c_exceptional_set": max(c_omega, default=0.0),
              "c_tail": max(c_tail, default=0.0),
              "c_level": max(c_weak, default=0.0), "k0_count": len(list(k0s))}
    flags = {"finite": math.isfinite(C), "dini_finite": not dini.divergent}
    return Report("thm22", values, flags)
