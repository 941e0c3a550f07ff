"""``semidyn`` command line: render, index, verify.

Exit codes
    0  success
    1  configuration or formula error (or an experiment refused its config)
    2  resource cap exceeded
    3  index verdict is not Exact
    4  oracle rejected (not closed under composition, or empty)
    5  a theorem experiment failed
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import ConfigError, load
from .dynamics import ResourceError, escaping_mask, fatou_julia_masks
from .expr import FormulaError
from .io import write_cube, write_json, write_pgm
from .verification import meets_expectation, run_experiment
from .words import OracleError, cofinite_index, finite_index, rees_index, validate_oracle

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_INEXACT, EXIT_ORACLE, EXIT_THEOREM = range(6)

CLOSURE_BOUND = 6


def _pick(cfg, kind, explicit, sg_name):
    name = explicit or cfg.defaults.get(sg_name, {}).get(kind)
    if name is None:
        pool = getattr(cfg, kind + "s")
        if len(pool) == 1:
            name = next(iter(pool))
        else:
            raise ConfigError(f"no {kind} given and semigroup {sg_name!r} has no default {kind}")
    return name


def cmd_render(args) -> int:
    cfg = load(args.config)
    sg_name = args.semigroup or cfg.default_semigroup()
    sg = cfg.semigroup(sg_name)
    grid_name = _pick(cfg, "grid", args.grid, sg_name)
    budget_name = _pick(cfg, "budget", args.budget, sg_name)
    grid, budget = cfg.grid(grid_name), cfg.budget(budget_name)
    sets = args.set or ["I"]

    t0 = time.perf_counter()
    esc = escaping_mask(sg.generators, grid, budget, alphabet=sg.alphabet, threads=args.threads)
    F, J = fatou_julia_masks(esc.mask)
    runtime_ms = round((time.perf_counter() - t0) * 1000.0, 3)
    masks = {"I": esc.mask, "F": F, "J": J}

    out = Path(args.out)
    for s in dict.fromkeys(sets):
        path = out if len(sets) == 1 else out.with_name(f"{out.stem}_{s}{out.suffix or '.pgm'}")
        write_pgm(path, masks[s].bits)
        write_json(str(path) + ".json", {
            "set": s, "pixels_set": masks[s].count, "semigroup": sg_name,
            "generators": {n: g.formula() for n, g in zip(sg.alphabet.names, sg.generators)},
            "grid": grid.to_json(), "budget": budget.to_json(),
            "words": [sg.alphabet.format(w) for w in esc.words],
            "runtime_ms": runtime_ms})
        print(f"{path}: {s} {masks[s].count} pixels")
    if args.cube:
        write_cube(args.cube, esc.cube, {"grid": grid.to_json(),
                                         "words": [sg.alphabet.format(w) for w in esc.words],
                                         "N": list(esc.steps), "R": esc.radius})
    return EXIT_OK


def cmd_index(args) -> int:
    cfg = load(args.config)
    sg_name, oracle = cfg.oracle(args.oracle)
    if args.semigroup and args.semigroup != sg_name:
        raise ConfigError(f"oracle {args.oracle!r} belongs to semigroup {sg_name!r}")
    ab = cfg.semigroup(sg_name).alphabet
    validate_oracle(oracle, ab, CLOSURE_BOUND)
    if args.kind == "finite":
        v = finite_index(ab, oracle, args.bound, args.max_index)
    elif args.kind == "cofinite":
        v = cofinite_index(ab, oracle, args.bound, args.max_index)
    else:
        v = rees_index(ab, oracle, args.bound)
    sys.stdout.write(json.dumps(v.to_json(ab), ensure_ascii=False) + "\n")
    return EXIT_OK if v.exact else EXIT_INEXACT


def cmd_verify(args) -> int:
    cfg = load(args.config)
    names = list(cfg.experiments) if args.all else cfg.suite(args.suite)
    for n in names:
        e = cfg.experiments[n]
        if e.oracle is not None:
            validate_oracle(e.oracle, e.semigroup.alphabet, CLOSURE_BOUND)
    out = Path(args.out or cfg.output.get("dir") or "semidyn-out")
    dump_masks = cfg.output.get("masks", True) and not args.no_masks

    reports, met, refused, failed = [], 0, 0, 0
    for n in names:
        e = cfg.experiments[n]
        r = run_experiment(e, threads=args.threads)
        ok = meets_expectation(r, e.expect)
        met += ok
        refused += r.verdict == "refused"
        if not ok and r.verdict not in ("indeterminate", "refused"):
            failed += 1
        entry = r.to_json()
        entry["expected"] = e.expect
        reports.append(entry)
        if dump_masks:
            for key, m in r.masks.items():
                write_pgm(out / "masks" / n / f"{key}.pgm", m.bits)
        mark = "ok" if ok else "--"
        print(f"{mark} {n}: {r.verdict}" + (f" (expected {e.expect})" if not ok else ""))
    write_json(out / "reports.json", reports)
    print(f"PASS {met}/{len(names)}")
    if failed:
        return EXIT_THEOREM
    if refused:
        return EXIT_CONFIG
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semidyn", description=(
        "Escaping, Fatou and Julia set approximations and subsemigroup indices "
        "for semigroups of entire maps."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $SEMIDYN_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="write I/J/F masks as PGM")
    r.add_argument("config", help="TOML config path, or @name for a bundled config")
    r.add_argument("--semigroup")
    r.add_argument("--grid")
    r.add_argument("--budget")
    r.add_argument("--set", action="append", choices=("I", "J", "F"))
    r.add_argument("--out", required=True, help="PGM path (suffixed _I/_J/_F for several sets)")
    r.add_argument("--cube", help="also write the raw escape cube here")
    r.set_defaults(func=cmd_render)

    i = sub.add_parser("index", help="finite, cofinite or Rees index as JSON")
    i.add_argument("config")
    i.add_argument("--oracle", required=True)
    i.add_argument("--semigroup")
    i.add_argument("--kind", choices=("finite", "cofinite", "rees"), default="finite")
    i.add_argument("--bound", type=int, default=6)
    i.add_argument("--max-index", type=int, default=6)
    i.set_defaults(func=cmd_index)

    v = sub.add_parser("verify", help="run theorem experiments")
    v.add_argument("config")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--suite")
    g.add_argument("--all", action="store_true")
    v.add_argument("--out")
    v.add_argument("--no-masks", action="store_true", help="skip PGM mask dumps")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, FormulaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
