"""Command-line interface: solve, eval, gen, convert-gsrc, plot, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .decoder import report
from .fileio import (
    DataError,
    parse_gsrc,
    parse_instance,
    parse_placement,
    render_svg,
    write_instance,
    write_placement,
)
from .model import CostWeights, Instance, check_feasible
from .refine import RefineBudgets, refine_pipeline
from .search import CMAConfig, GAConfig, SearchResult, run_cmaes, run_ga
from .syngen import GenParams, compose_copies, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
ALGOS = ("ga", "cmaes")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None


def _load_instance(path: str) -> Instance:
    text = _read(path)
    try:
        return parse_instance(text)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _weights(args, inst: Instance) -> CostWeights:
    w = inst.weights
    return CostWeights(
        w.c_area if args.c_area is None else args.c_area,
        w.c_conn if args.c_conn is None else args.c_conn,
        w.c_prox if args.c_prox is None else args.c_prox,
        w.c_inter if args.c_inter is None else args.c_inter,
    )


def solve(inst: Instance, algo: str, seed: int, time_limit: float | None,
          pop_size: int | None = None, max_generations: int | None = None,
          refine: bool = True) -> tuple[SearchResult, object]:
    """Search and optionally refine; returns ``(search_result, (placement, report))``."""
    if algo == "ga":
        cfg = GAConfig(rng_seed=seed, time_limit=time_limit,
                       pop_size=pop_size or GAConfig.pop_size,
                       max_generations=max_generations or GAConfig.max_generations)
        res = run_ga(inst, cfg)
    elif algo == "cmaes":
        cfg = CMAConfig(rng_seed=seed, time_limit=time_limit,
                        warmstart_pop_size=pop_size or CMAConfig.warmstart_pop_size,
                        max_iterations=max_generations or CMAConfig.max_iterations)
        res = run_cmaes(inst, cfg)
    else:
        raise UsageError(f"unknown algorithm {algo!r}")
    if not refine:
        return res, (res.placement, res.report)
    budget = None if time_limit is None else max(0.5, 0.05 * time_limit)
    budgets = RefineBudgets(budget or 5.0, budget or 5.0, budget or 5.0)
    ref = refine_pipeline(res.chromosome, inst, budgets=budgets)
    return res, (ref.placement, ref.report)


# ---------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    inst = inst.with_weights(_weights(args, inst))
    t0 = time.perf_counter()
    res, (p, rep) = solve(inst, args.algo, args.seed, args.time_limit, args.pop_size,
                          args.max_generations, not args.no_refine)
    ok, why = check_feasible(inst, p)
    if not ok:
        raise RuntimeError(f"solver returned an infeasible placement: {why}")
    meta = {"algorithm": args.algo, "seed": args.seed, "wall_time": time.perf_counter() - t0,
            "evaluations": res.evaluations, "refined": not args.no_refine}
    _write(args.out, write_placement(p, inst, rep, meta))
    print(f"total={rep.total:.6g} W={rep.width} H={rep.height}")
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _load_instance(args.instance)
    p, _ = parse_placement(_read(args.placement), inst)
    ok, why = check_feasible(inst, p)
    out = report(p, inst).as_dict()
    out["feasible"] = ok
    out["violation"] = why
    print(json.dumps(out, indent=1))
    return EXIT_OK if ok else EXIT_DATA


def _nets_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not 0 <= lo <= hi:
        raise argparse.ArgumentTypeError("need 0 <= LO <= HI")
    return lo, hi


def cmd_gen(args) -> int:
    if args.n < 1 or args.blockages < 0:
        raise UsageError("--n must be >= 1 and --blockages >= 0")
    try:
        params = GenParams(n_rects=args.n, n_nets_range=args.nets, n_blockages=args.blockages,
                           with_symmetry=args.symmetry,
                           allow_negative_distances=args.negative_distances, rng_seed=args.seed)
        inst = generate(params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.compose:
        if args.compose < 2:
            raise UsageError("--compose needs K >= 2")
        inst = compose_copies(inst, args.compose)
    _write(args.out, write_instance(inst))
    return EXIT_OK


def cmd_convert_gsrc(args) -> int:
    inst = parse_gsrc(_read(args.blocks), _read(args.nets), args.include_terminals)
    _write(args.out, write_instance(inst))
    print(f"rects={inst.n} nets={len(inst.nets)}")
    return EXIT_OK


def cmd_plot(args) -> int:
    inst = _load_instance(args.instance)
    p, _ = parse_placement(_read(args.placement), inst)
    _write(args.out, render_svg(p, inst))
    return EXIT_OK


def ard_table(totals: dict[str, list[float]]) -> dict[str, tuple[float, int]]:
    """Average relative difference in percent and best-hit count per method.

    ``totals[m][i]`` is method ``m``'s criterion on instance ``i``; the best
    known value of an instance is the minimum over methods.
    """
    methods = list(totals)
    if not methods:
        return {}
    count = len(totals[methods[0]])
    if any(len(v) != count for v in totals.values()):
        raise ValueError("methods cover different instance counts")
    best = [min(totals[m][i] for m in methods) for i in range(count)]
    out = {}
    for m in methods:
        rel = [(totals[m][i] - best[i]) / best[i] * 100.0 if best[i] != 0 else 0.0
               for i in range(count)]
        hits = sum(totals[m][i] == best[i] for i in range(count))
        out[m] = (sum(rel) / count if count else 0.0, hits)
    return out


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    for a in algos:
        if a not in ALGOS:
            raise UsageError(f"unknown algorithm {a!r}")
    files = sorted(Path(args.dir).glob("*.json"))
    if not files:
        raise DataError(f"{args.dir}: no instance files (*.json)")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    insts = [(f.name, _load_instance(str(f))) for f in files]
    totals: dict[str, list[float]] = {a: [] for a in algos}
    for name, inst in insts:
        for a in algos:
            vals = []
            for r in range(args.repeats):
                _, (p, rep) = solve(inst, a, args.seed + r, args.time_limit, args.pop_size,
                                    args.max_generations, not args.no_refine)
                vals.append(rep.total)
            totals[a].append(float(np.mean(vals)))
    summary = ard_table(totals)
    rows = []
    for q, (name, _) in enumerate(insts):
        best = min(totals[a][q] for a in algos)
        for a in algos:
            v = totals[a][q]
            rows.append([name, a, repr(v), repr((v - best) / best * 100.0 if best else 0.0),
                         int(v == best)])
    for a in algos:
        rows.append(["ALL", a, "", repr(summary[a][0]), summary[a][1]])
    try:
        with open(args.out, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["instance", "algo", "total", "rel_diff_pct", "best"])
            wr.writerows(rows)
    except OSError as exc:
        raise DataError(f"{args.out}: {exc.strerror or exc}") from None
    for a in algos:
        print(f"{a}: aRD={summary[a][0]:.4f}% best={summary[a][1]}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _search_args(sp) -> None:
    sp.add_argument("--time-limit", type=float, default=None, help="seconds per run")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--pop-size", type=int, default=None)
    sp.add_argument("--max-generations", type=int, default=None,
                    help="generations (GA) or iterations (CMA-ES) per segment")
    sp.add_argument("--no-refine", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="amsplace", description="Analog IC placement engine")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="place an instance")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--algo", choices=ALGOS, default="ga")
    _search_args(sp)
    for name in ("c-area", "c-conn", "c-prox", "c-inter"):
        sp.add_argument(f"--{name}", type=float, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("eval", help="report the criterion of a placement")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--placement", required=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gen", help="generate a synthetic instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--nets", type=_nets_range, default=(5, 12))
    sp.add_argument("--blockages", type=int, default=0)
    sp.add_argument("--symmetry", action="store_true")
    sp.add_argument("--negative-distances", action="store_true")
    sp.add_argument("--compose", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("convert-gsrc", help="convert GSRC .blocks/.nets to an instance")
    sp.add_argument("--blocks", required=True)
    sp.add_argument("--nets", required=True)
    sp.add_argument("--include-terminals", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_convert_gsrc)

    sp = sub.add_parser("plot", help="render a placement as SVG")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--placement", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("bench", help="run algorithms over a directory of instances")
    sp.add_argument("--dir", required=True)
    sp.add_argument("--algo", default="ga", help="comma-separated list")
    sp.add_argument("--repeats", type=int, default=1)
    _search_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"amsplace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"amsplace: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # last-resort guard so the exit code stays meaningful
        print(f"amsplace: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
