"""Command-line driver: ``hardylorentz <subcommand> ...``.

Exit codes: 0 success or all checks passed, 1 a check failed, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .atomic import AtomicDecomposition, DecompositionError, decompose, reconstruct
from .config import ConfigError, RunConfig, load_config
from .corpus import DISTRIBUTIONS, CorpusSpec, load_signal, write_corpus
from .harness import CHECKS, run_verify
from .interpolation import CoupleSpec, k_curve
from .lorentz import format_exponent, lorentz_quasinorm, lorentz_quasinorm_levels, parse_exponent, rearrangement
from .reports import jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}") from None


def _emit(data, out: str | None) -> None:
    text = json.dumps(jsonable(data), indent=2, sort_keys=True)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
    else:
        print(text)


def _read_signal(path: str):
    try:
        return load_signal(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed signal file {path}: {exc}") from exc


def _config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    return cfg.replace(seed=getattr(args, "seed", None), count=getattr(args, "count", None),
                       length=getattr(args, "length", None),
                       distribution=getattr(args, "distribution", None),
                       p=getattr(args, "p", None), q=getattr(args, "q", None),
                       q1=getattr(args, "q1", None), q2=getattr(args, "q2", None),
                       eta=getattr(args, "eta", None))


def cmd_norm(args) -> int:
    f = _read_signal(args.signal)
    closed = lorentz_quasinorm(f, (args.p, args.q))
    levels = lorentz_quasinorm_levels(f, (args.p, args.q))
    out = {"p": args.p, "q": format_exponent(args.q), "closed": closed, "levels": levels,
           "ratio": closed / levels if levels > 0 else None}
    if args.form != "both":
        out = {"p": args.p, "q": format_exponent(args.q), args.form: out[args.form]}
    _emit(out, args.out)
    return EXIT_OK


def cmd_rearrange(args) -> int:
    f = _read_signal(args.signal)
    _emit(rearrangement(f).to_json(), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    f = _read_signal(args.signal)
    cfg = _config(args)
    p = args.p if args.p is not None else cfg.p
    try:
        dec = decompose(f, p, cfg.mollifier_for(p), cfg.overlap_bound, optimize=cfg.optimize,
                        tail=cfg.tail_levels)
    except DecompositionError as exc:
        raise UsageError(str(exc)) from exc
    _emit(dec.to_json(), args.out)
    back = reconstruct(AtomicDecomposition.from_json(json.loads(json.dumps(dec.to_json()))))
    err = float(sum((back.values - f.values) ** 2) ** 0.5)
    scale = float(sum(f.values ** 2) ** 0.5)
    rel = err / scale if scale else err
    if args.out:
        print(json.dumps({"levels": len(dec.levels), "atoms": len(dec), "reconstruction_error": rel}))
    return EXIT_OK if rel <= 1e-6 else EXIT_FAIL


def cmd_kfunc(args) -> int:
    f = _read_signal(args.signal)
    couple = CoupleSpec(args.kind, args.q1, args.q2)
    curve = k_curve(f.values if args.kind == "sequence" else f, couple, T=args.T, method=args.method)
    _emit(curve.to_json(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    report = run_verify(args.which, cfg)
    if args.out:
        csv_path, json_path = report.write(args.out)
        print(f"wrote {csv_path} and {json_path}")
    else:
        print(report.csv_text(), end="")
    for name, ok in report.checks.items():
        print(f"{args.which} {name}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gen_corpus(args) -> int:
    cfg = _config(args)
    spec = CorpusSpec(seed=cfg.seed, count=cfg.count, signal_length=cfg.length,
                      value_distribution=cfg.distribution, p_list=cfg.p_list, q_list=cfg.q_list)
    if not args.out:
        raise UsageError("gen-corpus needs --out DIR")
    paths = write_corpus(spec, args.out)
    print(f"wrote {len(paths)} signals to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardylorentz",
                                     description="Lorentz and Hardy-Lorentz quasinorms, atomic "
                                                 "decompositions and corpus checks on step signals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(sp, help_text="output file (default: stdout)"):
        sp.add_argument("--out", help=help_text)

    def add_corpus(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--count", type=int)
        sp.add_argument("--length", type=int)
        sp.add_argument("--distribution", choices=DISTRIBUTIONS)

    sp = sub.add_parser("norm", help="Lorentz quasinorm in closed and dyadic-level form")
    sp.add_argument("signal")
    sp.add_argument("--p", type=_exponent, required=True)
    sp.add_argument("--q", type=_exponent, required=True)
    sp.add_argument("--form", choices=("both", "closed", "levels"), default="both")
    add_out(sp)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("rearrange", help="non-increasing rearrangement as a step curve")
    sp.add_argument("signal")
    add_out(sp)
    sp.set_defaults(func=cmd_rearrange)

    sp = sub.add_parser("decompose", help="atomic decomposition of an admissible signal")
    sp.add_argument("signal")
    sp.add_argument("--p", type=_exponent)
    sp.add_argument("--config")
    add_out(sp, "decomposition JSON file (default: stdout)")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("kfunc", help="K-functional curve on the dyadic t-grid")
    sp.add_argument("signal")
    sp.add_argument("--q1", type=_exponent, default=1.0)
    sp.add_argument("--q2", type=_exponent, default=math.inf)
    sp.add_argument("--kind", choices=("function", "sequence"), default="function")
    sp.add_argument("--method", choices=("bruteforce", "holmstedt"), default="bruteforce")
    sp.add_argument("--T", type=int, default=16)
    add_out(sp)
    sp.set_defaults(func=cmd_kfunc)

    sp = sub.add_parser("verify", help="run a check over a seeded corpus")
    sp.add_argument("which", choices=CHECKS)
    add_corpus(sp)
    for name in ("p", "q", "q1", "q2"):
        sp.add_argument(f"--{name}", type=_exponent)
    sp.add_argument("--eta", type=float)
    add_out(sp, "report path; NAME.csv and NAME.json are written")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen-corpus", help="write a seeded corpus as signal JSON files")
    add_corpus(sp)
    add_out(sp, "output directory")
    sp.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
