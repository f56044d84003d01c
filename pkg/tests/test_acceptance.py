"""Acceptance criteria at their stated tolerances. Each criterion records a
pass/fail line that the terminal summary prints at the end of the run."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from hardylorentz import (HilbertKernel, RunConfig, Signal, atom_family, atom_tail_check,
                          default_family, dini_constant, distribution_function, lorentz_quasinorm,
                          make_signal, omega_p, rearrangement, run_verify, weak_norm_of_image)
from hardylorentz.harness import two_form_bounds

pytestmark = pytest.mark.slow

PS = (1.0, 2.0 / 3.0, 0.5)
QS = (0.5, 1.0, 2.0, math.inf)
CORPUS = 100
PARTS: dict[int, dict[str, tuple[bool, str]]] = {}


def record(n, part, ok, detail):
    PARTS.setdefault(n, {})[part] = (bool(ok), detail)
    parts = PARTS[n]
    status = "PASS" if all(v[0] for v in parts.values()) else "FAIL"
    text = "; ".join(f"{k}: {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in parts.items())
    ACCEPTANCE[n] = (status, text)


def lp_norm(f, p):
    return (f.cell_width * np.sum(np.abs(f.values) ** p)) ** (1 / p)


# 1. exact identities

def test_exact_identities():
    start = time.perf_counter()
    worst_ind = 0.0
    for n in (1, 8, 512):
        one = Signal(0.0, 1.0 / n, np.ones(n))
        for p in PS:
            for q in QS:
                worst_ind = max(worst_ind, abs(lorentz_quasinorm(one, (p, q)) - 1.0))
    worst_lp = 0.0
    for i in range(CORPUS):
        f = make_signal(0, i, 512, "lognormal")
        for p in PS:
            worst_lp = max(worst_lp, abs(lorentz_quasinorm(f, (p, p)) / lp_norm(f, p) - 1))
    elapsed = time.perf_counter() - start
    ok = worst_ind <= 1e-12 and worst_lp <= 1e-10 and elapsed < 5
    record(1, "identities", ok, f"indicator err {worst_ind:.1e}, L^pp vs L^p rel {worst_lp:.1e}, {elapsed:.2f}s")
    assert ok


# 2. equimeasurability

def test_equimeasurability():
    mismatches = 0
    for dist in ("uniform", "lognormal", "sparse-atoms"):
        for i in range(CORPUS):
            f = make_signal(1, i, 512, dist)
            curve = rearrangement(f)
            mags = np.sort(np.abs(f.values))
            top = float(mags[-1])
            # 47 evenly spaced levels, 14 equal to data values, 0, the max and above it
            levels = np.concatenate(([0.0], np.linspace(0, top, 49)[1:-1], mags[:: f.size // 14][:14],
                                     [top, 1.5 * top]))
            assert levels.size == 64
            for s in levels:
                direct = int(np.count_nonzero(np.abs(f.values) > s))
                via_dist = distribution_function(f, s) / f.cell_width
                via_curve = float(curve.breakpoints[curve.plateau_values > s].max(initial=0.0)) / f.cell_width
                if not (round(via_dist) == direct == round(via_curve)
                        and abs(via_curve - direct) < 1e-6 and abs(via_dist - direct) < 1e-6):
                    mismatches += 1
    record(2, "equimeasurability", mismatches == 0, f"{3 * CORPUS} signals x 64 levels, {mismatches} mismatches")
    assert mismatches == 0


# 3. two-form equivalence

def _lorentz_report():
    if not hasattr(_lorentz_report, "cache"):
        _lorentz_report.cache = run_verify("lorentz-equiv", RunConfig(count=CORPUS, length=512,
                                                                      distribution="lognormal"))
    return _lorentz_report.cache


def _bracket_summary(rows):
    ratios = [r["ratio"] for r in rows]
    bad = sum(not r["in_bracket"] for r in rows)
    return bad, f"ratio in [{min(ratios):.3g}, {max(ratios):.3g}], {bad}/{len(rows)} outside"


def test_two_form_equivalence_q_at_least_one():
    rep = _lorentz_report()
    rows = [r for r in rep.rows if r["q"] != 0.5]
    bad, text = _bracket_summary(rows)
    record(3, "q in {1,2,inf}", bad == 0, text)
    assert bad == 0 and rep.checks["sharp_bounds"]


@pytest.mark.xfail(strict=True, reason="at q = 1/2 the sharp two-form bounds are "
                   "[0.0858, 0.1716], outside the required bracket for p >= 2/3")
def test_two_form_equivalence_q_half():
    rep = _lorentz_report()
    rows = [r for r in rep.rows if r["q"] == 0.5]
    bad, text = _bracket_summary(rows)
    lo, hi = two_form_bounds(0.5)
    record(3, "q = 1/2", bad == 0, f"{text}; sharp bounds [{lo:.4f}, {hi:.4f}]")
    assert bad == 0


# 4. decomposition round trip

def _decomposition_run(distribution, length):
    cfg = RunConfig(count=CORPUS, length=length, distribution=distribution)
    return run_verify("thm21", cfg)


def test_decomposition_round_trip():
    worst_err, worst_overlap, c = 0.0, 0, 0.0
    ok = True
    for dist, length in (("uniform", 1024), ("lognormal", 512)):
        rep = _decomposition_run(dist, length)
        rows = rep.rows
        ok &= rep.checks["no_errors"] and len(rows) == CORPUS * len(PS)
        worst_err = max(worst_err, max(r["reconstruction_error"] for r in rows))
        worst_overlap = max(worst_overlap, max(r["max_overlap"] for r in rows))
        c = max(c, rep.aggregates["sup_constant"])
        ok &= all(r["atoms_valid"] and r["whitney_containment"] and r["lambda_rule"] for r in rows)
    ok &= worst_err <= 1e-6 and worst_overlap <= 8
    record(4, "uniform@1024 + lognormal@512", ok,
           f"max rel L2 error {worst_err:.1e}, max overlap {worst_overlap}, c = {c:.3g}")
    assert ok


@pytest.mark.xfail(strict=True, reason="white-noise bump corpus: partial atoms on Whitney "
                   "intervals are not controlled by a single-mollifier Nf; overlap exceeds 8")
def test_decomposition_sparse_atoms_stress():
    rep = run_verify("thm21", RunConfig(count=10, length=512, distribution="sparse-atoms",
                                        p_list=(1.0,)))
    overlap = max(r["max_overlap"] for r in rep.rows)
    err = max(r["reconstruction_error"] for r in rep.rows)
    assert err <= 1e-6
    assert overlap <= 8, f"overlap {overlap}, c = {rep.aggregates['sup_constant']:.3g}"


# 5. coefficient/Hardy-Lorentz equivalence

def test_coefficient_norm_equivalence():
    start = time.perf_counter()
    base = run_verify("thm21", RunConfig(count=CORPUS, length=512))
    fine = run_verify("thm21", RunConfig(count=CORPUS, length=4096))
    elapsed = time.perf_counter() - start

    def spread(rows):
        vals = [r["ratio"] for r in rows]
        return max(vals) / min(vals), min(vals), max(vals)

    s_base, lo, hi = spread(base.rows)
    s_fine, flo, fhi = spread(fine.rows)
    growth = s_fine / s_base
    ok = base.passed and fine.passed and s_base <= 1e3 and s_fine <= 1e3 and growth <= 2 and elapsed < 180
    record(5, "ratio bracket", ok,
           f"512 cells [{lo:.3g}, {hi:.3g}] spread {s_base:.3g}; 4096 cells "
           f"[{flo:.3g}, {fhi:.3g}] spread {s_fine:.3g}; growth {growth:.3g}; {elapsed:.0f}s")
    assert ok


# 6. K-functional oracles

def test_k_functional_oracles():
    rep = run_verify("holmstedt", RunConfig(count=CORPUS, length=512, distribution="lognormal"))
    big = run_verify("holmstedt", RunConfig(count=5, length=4096, seed=1))
    agg = rep.aggregates
    ok = rep.passed and big.passed
    lo = min(agg["holmstedt_over_k_min"], big.aggregates["holmstedt_over_k_min"])
    hi = max(agg["holmstedt_over_k_max"], big.aggregates["holmstedt_over_k_max"])
    err = max(agg["k_rel_error_max"], big.aggregates["k_rel_error_max"])
    record(6, "K oracles", ok, f"(L1,Linf) rel error {err:.1e}; Holmstedt/K in [{lo:.3g}, {hi:.3g}]")
    assert ok


# 7. interpolation of Hardy-Lorentz spaces

@pytest.mark.parametrize("p,q1,q,q2", [(1.0, 1.0, 2.0, math.inf), (2 / 3, 1.0, 2.0, 4.0)])
def test_interpolation_brackets(p, q1, q, q2):
    start = time.perf_counter()
    rep = run_verify("thm25", RunConfig(count=CORPUS, length=512, p=p, q1=q1, q=q, q2=q2))
    elapsed = time.perf_counter() - start
    agg = rep.aggregates
    spreads = [agg[f"{k}_spread"] for k in ("upper_over_hardy", "lower_over_hardy", "upper_over_lower")]
    ok = rep.passed and max(spreads) <= 100 and elapsed < 600
    record(7, f"p={p:.3g}", ok, "spreads " + ", ".join(f"{s:.3g}" for s in spreads) + f", {elapsed:.0f}s")
    assert ok


# 8. CZ machinery

DELTAS = [2.0 ** -k for k in range(1, 9)]


def test_omega_linear_bound():
    h = HilbertKernel()
    ratios = [omega_p(h, 1.0, 0, d) / d for d in DELTAS]
    ok = max(ratios) <= 4
    record(8, "omega_1 <= 4 delta", ok, f"max omega/delta {max(ratios):.3g}")
    assert ok


def _atoms(length, count=20):
    atoms = []
    i = 0
    while len(atoms) < count:
        _, fam, grid = atom_family(8, i, length, 1.0)
        atoms.extend(fam)
        i += 1
    return atoms[:count], grid


def test_atom_tail_family():
    atoms, grid = _atoms(256)
    family = default_family(grid) + [a.interval for a in atoms]
    failures = 0
    for atom in atoms:
        for d in DELTAS:
            failures += not atom_tail_check(atom, HilbertKernel(), d, family, grid).passed
    record(8, "atom tails", failures == 0, f"{len(atoms)} atoms x {len(DELTAS)} deltas, {failures} failures")
    assert failures == 0


def test_dini_refinement():
    h = HilbertKernel()
    coarse = dini_constant(h, 1.0, 2.0)
    fine = dini_constant(h, 1.0, 2.0, delta_grid=np.ldexp(1.0, 0) * 2.0 ** (-np.arange(24, -1, -1) / 2))
    rel = abs(fine.A_pq / coarse.A_pq - 1)
    ok = rel <= 0.1 and not coarse.divergent
    record(8, "A_{1,2} refinement", ok, f"A = {coarse.A_pq:.4g} vs {fine.A_pq:.4g}")
    assert ok


def test_weak_norm_of_atoms_stable():
    atoms, grid = _atoms(256)
    coarse = [weak_norm_of_image(a.embed(grid), 1.0) for a in atoms]
    fine = [weak_norm_of_image(a.embed(grid).refine(2), 1.0) for a in atoms]
    c1, c2 = max(coarse), max(fine)
    ok = max(c1 / c2, c2 / c1) <= 2
    record(8, "||Ta||_{1,inf}", ok, f"C = {c1:.3g} at 256 cells, {c2:.3g} at 512")
    assert ok


# 9. determinism

def test_determinism():
    same = True
    for which, cfg in (("thm21", RunConfig(count=5, length=256)),
                       ("thm25", RunConfig(count=3, length=256)),
                       ("lemma12", RunConfig(count=3, length=256))):
        same &= run_verify(which, cfg).csv_text() == run_verify(which, cfg).csv_text()
    record(9, "byte-identical CSV", same, "thm21, thm25, lemma12 re-runs")
    assert same
