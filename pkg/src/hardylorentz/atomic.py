"""Whitney covers, the level-set atomic decomposition, reconstruction, the
two Lorentz membership criteria and the harnesses for the converse
(coefficient-to-function) estimates.

The decomposition is a discrete Calderon-Zygmund telescoping. For each
level k let O_k = {Nf > 2^k} and let g_k equal f off O_k and, on every
Whitney interval Q of O_k, the projection of f onto polynomials of degree
<= N over Q. Whitney intervals of O_{k+1} sit inside those of O_k, so
f_k = g_{k+1} - g_k restricted to a Whitney interval Q of O_k has vanishing
moments on Q. When O_k is the whole domain g_k is the global polynomial
part of f, which is zero for admissible f, and the telescoping sum
f = sum_k f_k is finite and exact.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .lorentz import Signal, lorentz_quasinorm, distribution_function
from .maximal import (
    Atom,
    Interval,
    Mollifier,
    default_mollifier,
    hardy_lorentz_from_maximal,
    nontangential_maximal,
    polynomial_basis,
    project_polynomials,
    radial_maximal,
    vanishing_moments,
)
from .reports import Report
from .sequences import CoefficientFamily, ell_q_norm, level_masses, level_partition, mixed_norm

__all__ = [
    "WhitneyCover",
    "AtomicDecomposition",
    "DecompositionError",
    "whitney_cover",
    "admissible",
    "is_admissible",
    "remove_global_moments",
    "decompose",
    "reconstruct",
    "level_pieces",
    "overlap_counts",
    "verify_theorem_2_1",
    "lemma_1_1_check",
    "lemma_1_2_check",
    "atomic_splits",
    "verify_theorem_2_3",
    "verify_theorem_2_4",
    "synthesize",
]


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WhitneyCover:
    """Maximal admissible dyadic intervals of an open set of cells.

    ``intervals`` holds cell index pairs [i0, i1). A dyadic interval is
    admissible when it lies in the set and either its 3-fold dilate
    (clipped to the domain) does too, or it is a single cell: the grid
    cannot resolve finer Whitney intervals at the edge of the set.
    """

    level: int
    intervals: list[tuple[int, int]]
    grid: Signal

    def __len__(self) -> int:
        return len(self.intervals)

    def as_intervals(self) -> list[Interval]:
        h, x0 = self.grid.cell_width, self.grid.origin
        return [Interval(x0 + i0 * h, x0 + i1 * h) for i0, i1 in self.intervals]

    def mask(self) -> np.ndarray:
        out = np.zeros(self.grid.size, dtype=bool)
        for i0, i1 in self.intervals:
            out[i0:i1] = True
        return out


def _counter(mask: np.ndarray):
    prefix = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
    size = mask.size

    def count(a, b):
        a = np.clip(a, 0, size)
        b = np.clip(b, 0, size)
        return prefix[b] - prefix[a]

    return count


def _admissible_at(count, size: int, s: int, starts: np.ndarray) -> np.ndarray:
    ell = 1 << s
    inside = (starts + ell <= size) & (count(starts, starts + ell) == ell)
    if s == 0:
        return inside
    a = np.maximum(starts - ell, 0)
    b = np.minimum(starts + 2 * ell, size)
    return inside & (count(a, b) == b - a)


def whitney_cover(open_set, k: int = 0, grid: Signal | None = None) -> WhitneyCover:
    """Whitney cover of a union of cells given as a boolean mask."""
    mask = np.asarray(open_set, dtype=bool).reshape(-1)
    if grid is None:
        grid = Signal(0.0, 1.0, np.zeros(mask.size))
    size = mask.size
    if not mask.any():
        return WhitneyCover(k, [], grid)
    count = _counter(mask)
    top = int(math.ceil(math.log2(size))) if size > 1 else 0
    covered = np.zeros(size, dtype=bool)
    chosen: list[tuple[int, int]] = []
    for s in range(top, -1, -1):
        ell = 1 << s
        starts = np.arange(0, size, ell)
        pick = _admissible_at(count, size, s, starts) & ~covered[starts]
        for i0 in starts[pick]:
            i1 = min(int(i0) + ell, size)
            chosen.append((int(i0), i1))
            covered[i0:i1] = True
    chosen.sort()
    return WhitneyCover(k, chosen, grid)


def is_admissible(mask: np.ndarray, i0: int, i1: int) -> bool:
    """Admissibility of the dyadic interval [i0, i1) for the set ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    ell = i1 - i0
    s = int(round(math.log2(ell)))
    count = _counter(mask)
    return bool(_admissible_at(count, mask.size, s, np.array([i0]))[0])


@dataclass(frozen=True)
class Term:
    coefficient: float
    atom: Atom


@dataclass(eq=False)
class AtomicDecomposition:
    """Levels k -> list of (lambda_{j,k}, a_{j,k}) on a common grid."""

    p: float
    grid: Signal
    levels: dict[int, list[tuple[float, Atom]]] = field(default_factory=dict)
    overlap_bound: int = 8
    diagnostics: dict = field(default_factory=dict)

    def terms(self):
        for k, items in sorted(self.levels.items()):
            for lam, atom in items:
                yield k, lam, atom

    def __len__(self) -> int:
        return sum(len(v) for v in self.levels.values())

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "overlap_bound": self.overlap_bound,
            "grid": {"origin": self.grid.origin, "cell_width": self.grid.cell_width,
                     "size": self.grid.size},
            "levels": [
                {"k": int(k), "terms": [{"lambda": float(lam), "atom": atom.to_json()}
                                        for lam, atom in items]}
                for k, items in sorted(self.levels.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AtomicDecomposition":
        g = data["grid"]
        grid = Signal(float(g["origin"]), float(g["cell_width"]), np.zeros(int(g["size"])))
        levels = {int(lv["k"]): [(float(t["lambda"]), Atom.from_json(t["atom"])) for t in lv["terms"]]
                  for lv in data["levels"]}
        return cls(float(data["p"]), grid, levels, int(data.get("overlap_bound", 8)))


def remove_global_moments(f: Signal, p: float) -> Signal:
    """Subtract the projection of f onto polynomials of degree <= N over the
    whole domain, leaving a signal with N vanishing moments."""
    return f.with_values(f.values - project_polynomials(f.values, vanishing_moments(p)))


def admissible(f: Signal, p: float, tol: float = 1e-9) -> bool:
    """Whether the moments of f up to order N vanish (relative to max|f|)."""
    top = float(np.max(np.abs(f.values)))
    if top == 0.0:
        return True
    proj = project_polynomials(f.values, vanishing_moments(p))
    return bool(np.max(np.abs(proj)) <= tol * top)


def _project_on_cover(values: np.ndarray, intervals, order: int) -> np.ndarray:
    """Copy of ``values`` with each interval replaced by its polynomial part."""
    out = values.copy()
    by_len = defaultdict(list)
    for i0, i1 in intervals:
        by_len[i1 - i0].append(i0)
    for n, starts in by_len.items():
        idx = np.asarray(starts)[:, None] + np.arange(n)
        out[idx] = project_polynomials(values[idx], order)
    return out


def _level_sets(nf: np.ndarray, grid: Signal, tail: int):
    """Distinct super-level sets O_k = {Nf > 2^k}, top level first, with their
    Whitney covers. Below the first k where O_k is the whole domain, ``tail``
    further levels use the whole domain as their only interval."""
    k = math.frexp(float(nf.max()))[1]  # 2^k > max Nf, so O_k is empty
    smallest = float(nf[nf > 0].min()) if np.any(nf > 0) else 0.0
    floor = k - 1100
    prev = np.zeros(nf.size, dtype=bool)
    out = []
    while True:
        k -= 1
        if k < floor:
            raise DecompositionError("level sets did not exhaust the domain")
        mask = nf > math.ldexp(1.0, k)
        if np.array_equal(mask, prev):
            if math.ldexp(1.0, k) < smallest:
                raise DecompositionError("the maximal function vanishes on part of the domain")
            continue
        out.append((k, mask, whitney_cover(mask, k, grid).intervals))
        prev = mask
        if mask.all():
            break
    whole = np.ones(nf.size, dtype=bool)
    for j in range(1, tail + 1):
        out.append((k - j, whole, [(0, nf.size)]))
    return out


def _first_whole(levels) -> int:
    return next(i for i, (_, mask, _) in enumerate(levels) if mask.all())


def _tail_budget(levels, w0: int) -> float:
    return sum(math.ldexp(1.0, k) for k, _, _ in levels[w0:])


def _spread_tail(f: np.ndarray, gs: list[np.ndarray], levels) -> None:
    """Fill the whole-domain levels: the remainder G above them is removed in
    shares proportional to 2^k, which minimises the largest piece ratio
    there (any split needs sup|G| <= c * sum 2^k)."""
    w0 = _first_whole(levels)
    rest = gs[w0 - 1] if w0 > 0 else f
    budget = _tail_budget(levels, w0)
    left = budget
    for i in range(w0, len(levels)):
        left -= math.ldexp(1.0, levels[i][0])
        gs[i] = rest * (left / budget) if i < len(levels) - 1 else np.zeros_like(f)


def _greedy_replacements(f: np.ndarray, levels, order: int) -> list[np.ndarray]:
    # g_k: f off O_k, polynomial part of f on each Whitney interval
    gs = [_project_on_cover(f, iv, order) for _, _, iv in levels]
    _spread_tail(f, gs, levels)
    return gs


def _optimal_replacements(f: np.ndarray, levels, order: int) -> list[np.ndarray] | None:
    """Replacements g_k with the moments of f on every Whitney interval that
    minimise max_k sup|g_{k+1} - g_k| / 2^k, as a linear program in the
    scaled unknowns u_k = g_k / 2^k. The whole-domain levels enter as one
    final level of scale sum 2^k (see _spread_tail). Returns None if the
    solver fails."""
    full = levels
    w0 = _first_whole(full)
    if w0 == 0:
        return None
    levels = list(full[:w0]) + [full[w0]]
    scales = [math.ldexp(1.0, k) for k, _, _ in levels[:-1]] + [_tail_budget(full, w0)]
    n_lv = len(levels)
    offsets, cells, n = [], [], 0
    for i, (_, mask, _) in enumerate(levels):
        idx = np.flatnonzero(mask) if i < n_lv - 1 else np.zeros(0, dtype=np.int64)
        offsets.append(n)
        cells.append(idx)
        n += idx.size
    t_col = n
    n += 1

    rows, cols, vals, rhs = [], [], [], []
    r = 0
    for i, (_, mask, _) in enumerate(levels):
        idx = np.flatnonzero(mask)
        scale = scales[i]
        const = f[idx] / scale
        above_cols = np.zeros(0, dtype=np.int64)
        above_rows = np.zeros(0, dtype=np.int64)
        factor = 0.0
        if i > 0:
            up = cells[i - 1]
            pos = np.searchsorted(up, idx)
            hit = pos < up.size
            hit[hit] = up[pos[hit]] == idx[hit]
            above_rows = np.flatnonzero(hit)
            above_cols = offsets[i - 1] + pos[hit]
            const = np.where(hit, 0.0, const)
            factor = scales[i - 1] / scale
        own = cells[i]
        for sgn in (1.0, -1.0):
            base = r + np.arange(idx.size)
            # sgn * (g_up / 2^k - u_k) - t <= 0
            rows += [base[above_rows], base]
            cols += [above_cols, np.full(idx.size, t_col)]
            vals += [np.full(above_rows.size, sgn * factor), np.full(idx.size, -1.0)]
            if own.size:
                rows.append(base)
                cols.append(offsets[i] + np.arange(idx.size))
                vals.append(np.full(idx.size, -sgn))
            rhs.append(-sgn * const)
            r += idx.size
    a_ub = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(r, n))
    b_ub = np.concatenate(rhs)

    er, ec, ev, eb = [], [], [], []
    e = 0
    for i, (_, _, intervals) in enumerate(levels[:-1]):
        scale = scales[i]
        for i0, i1 in intervals:
            basis = polynomial_basis(i1 - i0, order)
            pos = offsets[i] + np.searchsorted(cells[i], np.arange(i0, i1))
            for col in basis.T:
                er.append(np.full(i1 - i0, e))
                ec.append(pos)
                ev.append(col * scale)
                eb.append(float(f[i0:i1] @ col))
                e += 1
    a_eq = sparse.csr_matrix((np.concatenate(ev), (np.concatenate(er), np.concatenate(ec))),
                             shape=(e, n))
    cost = np.zeros(n)
    cost[t_col] = 1.0
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.asarray(eb),
                  bounds=(None, None), method="highs-ipm")
    if res.status != 0:
        return None
    gs = []
    for i in range(n_lv - 1):
        g = f.copy()
        g[cells[i]] = res.x[offsets[i]:offsets[i] + cells[i].size] * scales[i]
        gs.append(g)
    gs += [None] * (len(full) - len(gs))
    _spread_tail(f, gs, full)
    return gs


def _polish(f: np.ndarray, gs: list[np.ndarray], levels, order: int) -> None:
    # restore the moments of f on each Whitney interval to rounding accuracy
    for g, (_, _, intervals) in zip(gs[:-1], levels[:-1]):
        g += _project_on_cover(f - g, intervals, order)


def _piece_ratio(f: np.ndarray, gs, levels) -> float:
    worst, above = 0.0, f
    for g, (k, _, _) in zip(gs, levels):
        worst = max(worst, float(np.max(np.abs(above - g))) / math.ldexp(1.0, k))
        above = g
    return worst


def decompose(f: Signal, p: float, mollifier: Mollifier | None = None,
              overlap_bound: int = 8, optimize: bool = True,
              tail: int = 8) -> AtomicDecomposition:
    """Atomic decomposition of an admissible step signal.

    The replacements g_k start as the polynomial projections; with
    ``optimize`` they are re-chosen by a linear program (same moments on
    every Whitney interval) whenever that lowers the largest piece ratio.
    Each piece f_k on a Whitney interval Q of O_k becomes lambda * a with
    lambda = 2^k |Q|^{1/p}; when sup|piece| exceeds 2^k the piece is split
    into the smallest number of equal copies that keeps every copy a genuine
    atom, which shows up as per-level overlap.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    mollifier = mollifier or default_mollifier(p)
    order = vanishing_moments(p)
    grid = Signal.zeros_like(f)
    dec = AtomicDecomposition(p, grid, {}, overlap_bound)
    if not np.any(f.values):
        dec.diagnostics = {"levels": 0, "max_piece_ratio": 0.0, "whitney": {}, "method": "none"}
        return dec
    if not admissible(f, p):
        raise DecompositionError(
            f"signal has non-vanishing moments up to order {order}; "
            "only signals with vanishing global moments are sums of atoms")

    values = f.values.astype(float)
    nf = nontangential_maximal(f, mollifier).values
    levels = _level_sets(nf, grid, max(1, tail))
    gs = _greedy_replacements(values, levels, order)
    method = "projection"
    greedy_ratio = _piece_ratio(values, gs, levels)
    if optimize and greedy_ratio > 1.0:
        better = _optimal_replacements(values, levels, order)
        if better is not None:
            _polish(values, better, levels, order)
            if _piece_ratio(values, better, levels) < greedy_ratio:
                gs, method = better, "linear-program"

    h, x0 = f.cell_width, f.origin
    piece_ratio: dict[int, float] = {}
    whitney: dict[int, WhitneyCover] = {}
    above = values
    for g_k, (k, _, intervals) in zip(gs, levels):
        whitney[k] = WhitneyCover(k, list(intervals), grid)
        piece = above - g_k
        above = g_k
        level_scale = math.ldexp(1.0, k)
        terms: list[tuple[float, Atom]] = []
        worst = 0.0
        by_len = defaultdict(list)
        for i0, i1 in intervals:
            by_len[i1 - i0].append(i0)
        for n, starts in sorted(by_len.items()):
            starts = np.asarray(starts)
            idx = starts[:, None] + np.arange(n)
            block = piece[idx]
            # exact-arithmetic moments vanish; remove the rounding residue
            block = block - project_polynomials(block, order)
            sups = np.max(np.abs(block), axis=1)
            for row, i0 in enumerate(starts):
                s = float(sups[row])
                if s <= 1e-13 * level_scale or s == 0.0:
                    continue
                worst = max(worst, s / level_scale)
                copies = max(1, int(math.ceil(s / level_scale * (1.0 - 1e-12))))
                interval = Interval(x0 + int(i0) * h, x0 + (int(i0) + n) * h)
                lam = level_scale * interval.length ** (1.0 / p)
                profile = Signal(interval.left, h, block[row] / (copies * lam))
                atom = Atom(interval, profile, p)
                terms.extend([(lam, atom)] * copies)
        if terms:
            dec.levels[k] = terms
            piece_ratio[k] = worst

    dec.levels = dict(sorted(dec.levels.items()))
    dec.diagnostics = {
        "levels": len(dec.levels),
        "k_top": max(dec.levels) if dec.levels else None,
        "k_bottom": min(dec.levels) if dec.levels else None,
        "max_piece_ratio": max(piece_ratio.values()) if piece_ratio else 0.0,
        "projection_ratio": greedy_ratio,
        "method": method,
        "piece_ratio": piece_ratio,
        "whitney": whitney,
        "maximal": nf,
    }
    return dec


def reconstruct(dec: AtomicDecomposition, levels=None) -> Signal:
    """Sum of lambda_{j,k} a_{j,k} over the chosen levels (default all)."""
    grid = dec.grid
    vals = np.zeros(grid.size)
    h = grid.cell_width
    wanted = None if levels is None else set(levels)
    for k, lam, atom in dec.terms():
        if wanted is not None and k not in wanted:
            continue
        if abs(atom.profile.cell_width - h) > 1e-12 * h:
            raise ValueError("atom grid does not match the decomposition grid")
        i0 = int(round((atom.profile.origin - grid.origin) / h))
        i1 = i0 + atom.profile.size
        if i0 < 0 or i1 > grid.size:
            raise ValueError("atom lies outside the decomposition grid")
        vals[i0:i1] += lam * atom.profile.values
    return grid.with_values(vals)


def level_pieces(dec: AtomicDecomposition) -> dict[int, Signal]:
    """f_k = sum_j lambda_{j,k} a_{j,k} for every level."""
    return {k: reconstruct(dec, [k]) for k in sorted(dec.levels)}


def overlap_counts(intervals, grid: Signal) -> np.ndarray:
    """How many of the given intervals contain each cell (with multiplicity)."""
    diff = np.zeros(grid.size + 1, dtype=np.int64)
    h = grid.cell_width
    for iv in intervals:
        i0 = max(int(round((iv.left - grid.origin) / h)), 0)
        i1 = min(int(round((iv.right - grid.origin) / h)), grid.size)
        if i1 > i0:
            diff[i0] += 1
            diff[i1] -= 1
    return np.cumsum(diff[:-1])


def verify_theorem_2_1(f: Signal, p: float, q: float, mollifier: Mollifier | None = None,
                       overlap_bound: int = 8, dec: AtomicDecomposition | None = None) -> Report:
    """Decompose f, check the five construction properties and compare the
    coefficient aggregate with ||f||_{H^{p,q}}."""
    mollifier = mollifier or default_mollifier(p)
    dec = dec or decompose(f, p, mollifier, overlap_bound)
    rec = reconstruct(dec)
    fnorm = float(np.linalg.norm(f.values))
    rel_err = float(np.linalg.norm(rec.values - f.values)) / fnorm if fnorm else 0.0

    atoms_valid = True
    inside_whitney = True
    lambda_err = 0.0
    max_overlap = 0
    whitney = dec.diagnostics.get("whitney", {})
    for k, items in dec.levels.items():
        cover = whitney.get(k)
        dilated = [iv.dilate(3.0) for iv in cover.as_intervals()] if cover is not None else []
        for lam, atom in items:
            atoms_valid &= atom.check()["valid"]
            expected = math.ldexp(1.0, k) * atom.interval.length ** (1.0 / p)
            lambda_err = max(lambda_err, abs(lam - expected) / expected)
            if cover is not None:
                inside_whitney &= any(d.contains(atom.interval) for d in dilated)
        counts = overlap_counts([a.interval for _, a in items], dec.grid)
        max_overlap = max(max_overlap, int(counts.max()) if counts.size else 0)

    pieces = level_pieces(dec)
    sup_ratio = max((float(np.max(np.abs(v.values))) / math.ldexp(1.0, k)
                     for k, v in pieces.items()), default=0.0)
    mu = level_masses(dec, p)
    agg = ell_q_norm(list(mu.values()), q)
    mf = radial_maximal(f, mollifier)
    hnorm = hardy_lorentz_from_maximal(mf, p, q)
    ratio = agg / hnorm if hnorm > 0 else (0.0 if agg == 0 else math.inf)
    return Report(
        "thm21",
        values={"p": p, "q": q, "levels": len(dec.levels), "atoms": len(dec),
                "reconstruction_error": rel_err, "max_overlap": max_overlap,
                "sup_constant": sup_ratio, "lambda_rel_error": lambda_err,
                "coefficient_norm": agg, "hardy_lorentz_norm": hnorm, "ratio": ratio},
        flags={"reconstruction": rel_err <= 1e-6, "atoms_valid": bool(atoms_valid),
               "whitney_containment": bool(inside_whitney),
               "overlap": max_overlap <= overlap_bound, "lambda_rule": lambda_err <= 1e-10},
    )


def _lorentz_ratio(phi: Signal, mu: dict, p: float, q: float):
    ks = sorted(mu)
    seq = [math.ldexp(mu[k], k) for k in ks]
    rhs = ell_q_norm(seq, q)
    lhs = lorentz_quasinorm(phi, (p, q))
    if lhs == 0.0:
        return lhs, rhs, 0.0
    return lhs, rhs, (lhs / rhs if rhs > 0 else math.inf)


def _safe_ratio(num: float, den: float) -> float:
    if num == 0.0:
        return 0.0
    return num / den if den > 0 else math.inf


def lemma_1_1_check(phi: Signal, splits: dict, mu: dict, eps: float, p: float, q: float,
                    c_max: float = 64.0, tol: float = 1e-12) -> Report:
    """Check the hypotheses of the first membership criterion for each
    supplied k0 and report the smallest admissible constant and the ratio
    ||phi||_{p,q} / ||{2^k mu_k}||_{l^q}.

    ``splits`` maps k0 to (psi, eta) with phi <= psi + eta. A k0 is flagged
    when the domination fails or one of its constants exceeds ``c_max``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    flagged = []
    consts = {}
    scale = float(np.max(np.abs(phi.values))) if phi.size else 0.0
    for k0, (psi, eta) in sorted(splits.items()):
        dominated = bool(np.all(np.abs(phi.values) <= psi.values + eta.values + tol * max(scale, 1.0)))
        c_psi = float(np.max(np.abs(psi.values))) / math.ldexp(1.0, k0)
        tail = sum((math.ldexp(1.0, k) ** eps * mu[k]) ** p for k in mu if k >= k0)
        c_eta = _safe_ratio(2.0 ** (k0 * eps * p) * distribution_function(eta, math.ldexp(1.0, k0)), tail)
        consts[k0] = (c_psi, c_eta)
        if not dominated or c_psi > c_max or c_eta > c_max:
            flagged.append(k0)
    c = max((max(v) for v in consts.values()), default=0.0)
    lhs, rhs, big_c = _lorentz_ratio(phi, mu, p, q)
    return Report(
        "lemma11",
        values={"p": p, "q": q, "eps": eps, "c": c, "C": big_c, "norm_phi": lhs,
                "norm_mu": rhs, "C_over_c": _safe_ratio(big_c, c), "flagged_k0": flagged,
                "constants": {int(k): list(v) for k, v in consts.items()}},
        flags={"hypotheses": not flagged, "conclusion_finite": math.isfinite(big_c)},
    )


def lemma_1_2_check(phi: Signal, splits: dict, mu: dict, eps: float, p: float, q: float,
                    c_max: float = 64.0, tol: float = 1e-12) -> Report:
    """Second membership criterion: lower-half condition on psi_{k0},
    upper-half condition on eta_{k0}, with 0 < eps < min(1, q/p)."""
    if not 0 < eps < min(1.0, q / p):
        raise ValueError(f"eps must lie in (0, min(1, q/p)), got {eps}")
    flagged = []
    consts = {}
    scale = float(np.max(np.abs(phi.values))) if phi.size else 0.0
    for k0, (psi, eta) in sorted(splits.items()):
        dominated = bool(np.all(np.abs(phi.values) <= psi.values + eta.values + tol * max(scale, 1.0)))
        lam = math.ldexp(1.0, k0)
        low = sum((math.ldexp(1.0, k) * mu[k] ** eps) ** p for k in mu if k <= k0)
        high = sum((math.ldexp(1.0, k) ** eps * mu[k]) ** p for k in mu if k >= k0)
        c_psi = _safe_ratio(lam ** p * distribution_function(psi, lam) ** eps, low)
        c_eta = _safe_ratio(lam ** eps * distribution_function(eta, lam), high)
        consts[k0] = (c_psi, c_eta)
        if not dominated or c_psi > c_max or c_eta > c_max:
            flagged.append(k0)
    c = max((max(v) for v in consts.values()), default=0.0)
    lhs, rhs, big_c = _lorentz_ratio(phi, mu, p, q)
    return Report(
        "lemma12",
        values={"p": p, "q": q, "eps": eps, "c": c, "C": big_c, "norm_phi": lhs,
                "norm_mu": rhs, "C_over_c": _safe_ratio(big_c, c), "flagged_k0": flagged,
                "constants": {int(k): list(v) for k, v in consts.items()}},
        flags={"hypotheses": not flagged, "conclusion_finite": math.isfinite(big_c)},
    )


def synthesize(coefficients, atoms, grid: Signal) -> Signal:
    """sum_j lambda_j a_j on ``grid``."""
    vals = np.zeros(grid.size)
    for lam, atom in zip(coefficients, atoms):
        vals += lam * atom.embed(grid).values
    return grid.with_values(vals)


def atomic_splits(coefficients, atoms, grid: Signal, p: float, k0s=None,
                  mollifier: Mollifier | None = None):
    """Inputs for the membership criteria built from f = sum lambda_j a_j.

    phi = Mf; for each k0, psi = M(sum over levels k < k0) and
    eta = M(sum over levels k >= k0); mu_k = (sum_{j in level k} |I_j|)^{1/p}.
    Returns (phi, splits, mu).
    """
    mollifier = mollifier or default_mollifier(p)
    family = CoefficientFamily((lam, a.interval.length) for lam, a in zip(coefficients, atoms))
    parts = level_partition(family, p)
    mu = {k: sum(atoms[j].interval.length for j in idx) ** (1.0 / p) for k, idx in parts.items()}
    f = synthesize(coefficients, atoms, grid)
    phi = radial_maximal(f, mollifier)
    if k0s is None:
        lo, hi = (min(parts), max(parts)) if parts else (0, 0)
        k0s = range(lo - 6, hi + 3)
    splits = {}
    for k0 in k0s:
        low_idx = [j for k, idx in parts.items() if k < k0 for j in idx]
        g = synthesize([coefficients[j] for j in low_idx], [atoms[j] for j in low_idx], grid)
        splits[int(k0)] = (radial_maximal(g, mollifier), radial_maximal(f - g, mollifier))
    return phi, splits, mu


def _family_report(name: str, coefficients, atoms, p: float, q: float, index: float,
                   grid: Signal, mollifier: Mollifier | None, overlap_bound: int) -> Report:
    mollifier = mollifier or default_mollifier(p)
    family = CoefficientFamily((lam, a.interval.length) for lam, a in zip(coefficients, atoms))
    parts = level_partition(family, index)
    max_overlap = 0
    for idx in parts.values():
        counts = overlap_counts([atoms[j].interval for j in idx], grid)
        max_overlap = max(max_overlap, int(counts.max()) if counts.size else 0)
    f = synthesize(coefficients, atoms, grid)
    hnorm = hardy_lorentz_from_maximal(radial_maximal(f, mollifier), p, q)
    mnorm = mixed_norm(family, index, q)
    return Report(
        name,
        values={"p": p, "q": q, "index": index, "hardy_lorentz_norm": hnorm,
                "mixed_norm": mnorm, "C": _safe_ratio(hnorm, mnorm),
                "max_level_overlap": max_overlap, "levels": len(parts)},
        flags={"bounded": math.isfinite(_safe_ratio(hnorm, mnorm))},
    ), max_overlap


def verify_theorem_2_3(coefficients, atoms, p: float, q: float, grid: Signal,
                       mollifier: Mollifier | None = None, overlap_bound: int = 8) -> Report:
    """||sum lambda_j a_j||_{H^{p,q}} against ||lambda||_{[p,q]} for a family
    with bounded overlap at each level. An overlap violation is reported,
    and the comparison is still made."""
    report, overlap = _family_report("thm23", coefficients, atoms, p, q, p, grid, mollifier,
                                     overlap_bound)
    report.flags["level_overlap"] = overlap <= overlap_bound
    if overlap > overlap_bound:
        report.notes.append(
            f"per-level overlap {overlap} exceeds {overlap_bound}; the arbitrary-family "
            "estimate with a smaller mixed-norm index is the applicable one")
    return report


def verify_theorem_2_4(coefficients, atoms, p: float, q: float, eta: float, grid: Signal,
                       mollifier: Mollifier | None = None) -> Report:
    """||sum lambda_j a_j||_{H^{p,q}} against ||lambda||_{[eta,q]},
    0 < eta < min(p, q), with no overlap assumption."""
    if not 0 < eta < min(p, q):
        raise ValueError(f"eta must lie in (0, min(p, q)) = (0, {min(p, q)}), got {eta}")
    report, _ = _family_report("thm24", coefficients, atoms, p, q, eta, grid, mollifier, 0)
    return report
