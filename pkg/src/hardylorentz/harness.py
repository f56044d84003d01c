"""Corpus runs of the verification routines and their CSV/JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .atomic import (atomic_splits, decompose, lemma_1_1_check, lemma_1_2_check, verify_theorem_2_1,
                     verify_theorem_2_3, verify_theorem_2_4)
from .config import RunConfig
from .corpus import atom_family, make_signal
from .cz import dini_constant, kernel_by_name, verify_theorem_2_2
from .interpolation import (CoupleSpec, dyadic_t_grid, holmstedt, k_curve, verify_theorem_2_5)
from .lorentz import format_exponent, lorentz_quasinorm, lorentz_quasinorm_levels, rearrangement
from .reports import jsonable

__all__ = ["RunReport", "CHECKS", "run_verify", "two_form_bounds"]


@dataclass
class RunReport:
    command: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def errors(self) -> list[dict]:
        return [r for r in self.rows if r.get("error")]

    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def csv_text(self) -> str:
        cols = self.columns()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_cell(row.get(c)) for c in cols])
        return buf.getvalue()

    def to_json(self) -> dict:
        return jsonable({"command": self.command, "config": self.config, "rows": self.rows,
                         "aggregates": self.aggregates, "checks": self.checks,
                         "passed": self.passed, "wall_clock": self.wall_clock})

    def write(self, out: str | Path) -> tuple[Path, Path]:
        """``out`` names the report; ``.csv`` and ``.json`` files are written
        next to each other."""
        base = Path(out)
        if base.suffix in (".csv", ".json"):
            base = base.with_suffix("")
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
        csv_path.write_text(self.csv_text())
        json_path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(jsonable(value), sort_keys=True)
    return str(value)


def two_form_bounds(q: float) -> tuple[float, float]:
    """Sharp bounds for closed-form / level-form of the Lorentz quasinorm.

    Comparing the layer-cake integral over [2^k, 2^{k+1}) with its endpoint
    values gives (1 - 2^-q)^{1/q} <= closed / levels <= (2^q - 1)^{1/q},
    and [1, 2] for q = inf.
    """
    if math.isinf(q):
        return 1.0, 2.0
    return (1.0 - 2.0 ** -q) ** (1.0 / q), (2.0 ** q - 1.0) ** (1.0 / q)


def _signal(cfg: RunConfig, i: int, p: float | None = None):
    return make_signal(cfg.seed, i, cfg.length, cfg.distribution, moments_for=p)


def _lorentz_rows(cfg: RunConfig, i: int) -> list[dict]:
    f = _signal(cfg, i)
    rows = []
    for p in cfg.p_list:
        for q in cfg.q_list:
            closed = lorentz_quasinorm(f, (p, q))
            levels = lorentz_quasinorm_levels(f, (p, q))
            ratio = closed / levels if levels > 0 else 1.0
            bound = 2.0 ** (1.0 / p + 1.0)
            lo, hi = two_form_bounds(q)
            rows.append({"p": p, "q": format_exponent(q), "closed": closed, "levels": levels,
                         "ratio": ratio, "in_bracket": 1.0 / bound <= ratio <= bound,
                         "in_sharp_bounds": lo * (1 - 1e-12) <= ratio <= hi * (1 + 1e-12)})
    return rows


def _lorentz_checks(cfg: RunConfig, rows: list[dict]):
    ratios = [r["ratio"] for r in rows]
    agg = {"ratio_min": min(ratios, default=1.0), "ratio_max": max(ratios, default=1.0)}
    checks = {"two_form_bracket": all(r["in_bracket"] for r in rows),
              "sharp_bounds": all(r["in_sharp_bounds"] for r in rows)}
    return agg, checks


COUPLES = (("function", 1.0, math.inf), ("function", 1.0, 2.0),
           ("sequence", 1.0, math.inf), ("sequence", 1.0, 2.0))


def _holmstedt_rows(cfg: RunConfig, i: int) -> list[dict]:
    f = _signal(cfg, i)
    short = f.values[:: max(1, f.size // 6)][:6]
    rows = []
    ts = dyadic_t_grid(cfg.T)
    for kind, q0, q1 in COUPLES:
        x = short if kind == "sequence" else f
        couple = CoupleSpec(kind, q0, q1)
        brute = k_curve(x, couple, cfg.T).K
        holm = k_curve(x, couple, cfg.T, method="holmstedt").K
        ok = brute > 0
        ratio = holm[ok] / brute[ok]
        row = {"couple": f"{kind}:{format_exponent(q0)},{format_exponent(q1)}",
               "length": int(np.size(x)),
               "holmstedt_over_k_min": float(ratio.min()) if ratio.size else 1.0,
               "holmstedt_over_k_max": float(ratio.max()) if ratio.size else 1.0}
        if kind == "function" and math.isinf(q1):
            curve = rearrangement(f)
            exact = np.array([curve.integral_of_power(1.0, 0.0, t) for t in ts])
            pos = exact > 0
            row["k_rel_error"] = float(np.max(np.abs(brute[pos] - exact[pos]) / exact[pos])) if pos.any() else 0.0
        rows.append(row)
    return rows


def _holmstedt_checks(cfg: RunConfig, rows: list[dict]):
    lo = min((r["holmstedt_over_k_min"] for r in rows), default=1.0)
    hi = max((r["holmstedt_over_k_max"] for r in rows), default=1.0)
    err = max((r.get("k_rel_error", 0.0) for r in rows), default=0.0)
    agg = {"holmstedt_over_k_min": lo, "holmstedt_over_k_max": hi, "k_rel_error_max": err}
    checks = {"holmstedt_factor": cfg.holmstedt_low <= lo and hi <= cfg.holmstedt_high,
              "k_oracle": err <= cfg.kfunc_tolerance}
    return agg, checks


THM21_FLAGS = ("reconstruction", "atoms_valid", "whitney_containment", "overlap", "lambda_rule")


def _thm21_rows(cfg: RunConfig, i: int) -> list[dict]:
    rows = []
    for p in cfg.p_list:
        f = _signal(cfg, i, p)
        mol = cfg.mollifier_for(p)
        dec = decompose(f, p, mol, cfg.overlap_bound, optimize=cfg.optimize, tail=cfg.tail_levels)
        rep = verify_theorem_2_1(f, p, cfg.q, mol, cfg.overlap_bound, dec=dec)
        row = {k: rep.values[k] for k in ("p", "levels", "atoms", "reconstruction_error",
                                          "max_overlap", "sup_constant", "coefficient_norm",
                                          "hardy_lorentz_norm", "ratio")}
        row["method"] = dec.diagnostics.get("method", "none")
        row.update({k: rep.flags[k] for k in THM21_FLAGS})
        rows.append(row)
    return rows


def _spread(values) -> float:
    values = [v for v in values if v > 0 and math.isfinite(v)]
    return max(values) / min(values) if values else 1.0


def _thm21_checks(cfg: RunConfig, rows: list[dict]):
    agg = {}
    for p in cfg.p_list:
        sel = [r for r in rows if r["p"] == p]
        if not sel:
            continue
        tag = f"p={p:.6g}"
        agg[f"sup_constant[{tag}]"] = max(r["sup_constant"] for r in sel)
        agg[f"ratio_min[{tag}]"] = min(r["ratio"] for r in sel)
        agg[f"ratio_max[{tag}]"] = max(r["ratio"] for r in sel)
    agg["sup_constant"] = max((r["sup_constant"] for r in rows), default=0.0)
    agg["max_overlap"] = max((r["max_overlap"] for r in rows), default=0)
    agg["ratio_spread"] = _spread([r["ratio"] for r in rows])
    checks = {k: all(r[k] for r in rows) for k in THM21_FLAGS}
    checks["ratio_spread"] = agg["ratio_spread"] <= cfg.spread_thm21
    return agg, checks


def _dini_cache(cfg: RunConfig):
    cache = {}

    def get(p: float, grid):
        if p not in cache:
            cache[p] = dini_constant(kernel_by_name(cfg.kernel), p, cfg.q, grid=grid,
                                     refine=cfg.refine)
        return cache[p]
    return get


def _thm22_rows(cfg: RunConfig, i: int, dini) -> list[dict]:
    rows = []
    for p in cfg.p_list:
        if not p < cfg.q:
            continue
        f = _signal(cfg, i, p)
        mol = cfg.mollifier_for(p)
        dec = decompose(f, p, mol, cfg.overlap_bound, optimize=cfg.optimize, tail=cfg.tail_levels)
        rep = verify_theorem_2_2(f, p, cfg.q, mol, kernel_by_name(cfg.kernel), dini=dini(p, f),
                                 dec=dec)
        row = {k: rep.values.get(k) for k in ("p", "A_pq", "weak_norm", "hardy_lorentz", "C",
                                              "c_exceptional_set", "c_tail", "c_level")}
        row["finite"] = rep.flags["finite"]
        rows.append(row)
    return rows


def _constant_checks(rows: list[dict], key: str = "C"):
    vals = [r[key] for r in rows if r.get(key) is not None]
    agg = {f"{key}_max": max(vals, default=0.0), f"{key}_min": min(vals, default=0.0)}
    return agg, {"finite": all(math.isfinite(v) for v in vals)}


def _thm22_checks(cfg: RunConfig, rows: list[dict]):
    agg, checks = _constant_checks(rows)
    for key in ("c_exceptional_set", "c_tail", "c_level"):
        agg[f"{key}_max"] = max((r[key] for r in rows), default=0.0)
    return agg, checks


def _family_rows(cfg: RunConfig, i: int, which: str) -> list[dict]:
    rows = []
    for p in cfg.p_list:
        heavy = which == "thm24"
        coeffs, atoms, grid = atom_family(cfg.seed, i, cfg.length, p, heavy=heavy)
        mol = cfg.mollifier_for(p)
        if which == "thm23":
            rep = verify_theorem_2_3(coeffs, atoms, p, cfg.q, grid, mol, cfg.overlap_bound)
        else:
            rep = verify_theorem_2_4(coeffs, atoms, p, cfg.q, cfg.eta_for(p, cfg.q), grid, mol)
        row = {"p": p, "atoms": len(atoms)}
        row.update({k: rep.values[k] for k in ("index", "hardy_lorentz_norm", "mixed_norm", "C",
                                                "max_level_overlap")})
        if which == "thm23":
            row["level_overlap"] = rep.flags["level_overlap"]
        rows.append(row)
    return rows


def _family_checks(cfg: RunConfig, rows: list[dict]):
    agg, checks = _constant_checks(rows)
    agg["max_level_overlap"] = max((r["max_level_overlap"] for r in rows), default=0)
    if rows and "level_overlap" in rows[0]:
        checks["level_overlap"] = all(r["level_overlap"] for r in rows)
    return agg, checks


def _lemma_rows(cfg: RunConfig, i: int, which: str) -> list[dict]:
    rows = []
    for p in cfg.p_list:
        coeffs, atoms, grid = atom_family(cfg.seed, i, cfg.length, p)
        phi, splits, mu = atomic_splits(coeffs, atoms, grid, p, mollifier=cfg.mollifier_for(p))
        if which == "lemma11":
            eps = 0.5
            rep = lemma_1_1_check(phi, splits, mu, eps, p, cfg.q, c_max=cfg.c_max)
        else:
            eps = 0.5 * min(1.0, cfg.q / p)
            rep = lemma_1_2_check(phi, splits, mu, eps, p, cfg.q, c_max=cfg.c_max)
        rows.append({"p": p, "eps": eps, "c": rep.values["c"], "C": rep.values["C"],
                     "flagged_k0": len(rep.values["flagged_k0"]),
                     "hypotheses": rep.flags["hypotheses"]})
    return rows


def _lemma_checks(cfg: RunConfig, rows: list[dict]):
    agg, checks = _constant_checks(rows)
    agg["c_max"] = max((r["c"] for r in rows), default=0.0)
    checks["hypotheses"] = all(r["hypotheses"] for r in rows)
    return agg, checks


THM25_RATIOS = ("upper_over_hardy", "lower_over_hardy", "upper_over_lower")


def _thm25_rows(cfg: RunConfig, i: int) -> list[dict]:
    p = cfg.p
    f = _signal(cfg, i, p)
    mol = cfg.mollifier_for(p)
    dec = decompose(f, p, mol, cfg.overlap_bound, optimize=cfg.optimize, tail=cfg.tail_levels)
    rep = verify_theorem_2_5(f, p, cfg.q1, cfg.q, cfg.q2, mol, T=cfg.T, dec=dec)
    row = {k: rep.values.get(k) for k in ("p", "eta", "upper", "lower", "hardy_lorentz")
           + THM25_RATIOS}
    row["finite"] = rep.flags["finite"]
    return [row]


def _thm25_checks(cfg: RunConfig, rows: list[dict]):
    agg = {}
    checks = {"finite": all(r["finite"] for r in rows)}
    for key in THM25_RATIOS:
        vals = [r[key] for r in rows if r.get(key) is not None]
        agg[f"{key}_min"] = min(vals, default=1.0)
        agg[f"{key}_max"] = max(vals, default=1.0)
        agg[f"{key}_spread"] = _spread(vals)
        checks[f"{key}_spread"] = agg[f"{key}_spread"] <= cfg.spread_thm25
    return agg, checks


CHECKS = ("thm21", "thm22", "thm23", "thm24", "thm25", "lemma11", "lemma12", "lorentz-equiv",
          "holmstedt")


def _runner(which: str, cfg: RunConfig) -> tuple[Callable[[int], list[dict]], Callable]:
    if which == "lorentz-equiv":
        return (lambda i: _lorentz_rows(cfg, i)), _lorentz_checks
    if which == "holmstedt":
        return (lambda i: _holmstedt_rows(cfg, i)), _holmstedt_checks
    if which == "thm21":
        return (lambda i: _thm21_rows(cfg, i)), _thm21_checks
    if which == "thm22":
        dini = _dini_cache(cfg)
        return (lambda i: _thm22_rows(cfg, i, dini)), _thm22_checks
    if which in ("thm23", "thm24"):
        return (lambda i: _family_rows(cfg, i, which)), _family_checks
    if which in ("lemma11", "lemma12"):
        return (lambda i: _lemma_rows(cfg, i, which)), _lemma_checks
    if which == "thm25":
        return (lambda i: _thm25_rows(cfg, i)), _thm25_checks
    raise ValueError(f"unknown check {which!r}; expected one of {', '.join(CHECKS)}")


def run_verify(which: str, cfg: RunConfig | None = None) -> RunReport:
    """Run one check over the seeded corpus described by ``cfg``.

    An exception on an item becomes a row with an ``error`` entry and fails
    the ``no_errors`` check; the other items still run.
    """
    cfg = cfg or RunConfig()
    per_item, summarize = _runner(which, cfg)
    start = time.perf_counter()
    rows, good = [], []
    for i in range(cfg.count):
        try:
            item_rows = per_item(i)
        except Exception as exc:  # reported per item
            rows.append({"item": i, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for row in item_rows:
            row = {"item": i, **row}
            rows.append(row)
            good.append(row)
    agg, checks = summarize(cfg, good)
    checks = {"no_errors": not any("error" in r for r in rows), **checks}
    agg["items"] = cfg.count
    agg["rows"] = len(rows)
    return RunReport(which, cfg.to_json(), rows, agg, checks, time.perf_counter() - start)
