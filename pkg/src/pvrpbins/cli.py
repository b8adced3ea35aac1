"""Command-line interface: ``pvrpbins <command> ...``.

Exit status: 0 on success (feasible best), 2 when the reported solution is
infeasible, 1 on usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import ProblemError
from .exact import (brute_force, build_milp, optimality_gap, read_assignment,
                    schedule_to_assignment, substitute_solution, write_lp)
from .ga import GaConfig, run
from .ga.config import INSTANCE_LAMBDA, ConfigError, read_config_values
from .io import load_instance_dir, make_solution, parse_instance, read_solution, write_solution
from .model import FleetParams, Horizon, Problem, day_name, default_catalog, evaluate
from .stats import BenchReport, RunRecord, fmt2, kruskal_wallis, pct_diff

log = logging.getLogger("pvrpbins")

CONFIG_ENV = "PVRPBINS_CONFIG"
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2

TUNE_LEVELS = {
    "crossover_op": ("PMX", "OX", "CX", "CX2"),
    "crossover_rate": (0.8, 0.85, 0.9),
    "mutation_op": ("EM", "IM", "INM"),
    "mutation_rate": (0.05, 0.10, 0.15),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers

def _problem(args):
    if args.instance:
        inst = load_instance_dir(args.instance)
    elif args.time and args.waste:
        inst = parse_instance(args.time, args.waste)
    else:
        raise UsageError("give --instance DIR or both --time and --waste")
    horizon = Horizon(args.days, frozenset(args.rest))
    fleet = FleetParams.for_instance(inst, horizon, vehicle_capacity=args.capacity,
                                     n_vehicles=args.vehicles, shift_minutes=args.shift)
    return Problem(inst, horizon, default_catalog(), fleet)


def _config(args, instance_name):
    values = {}
    if instance_name in INSTANCE_LAMBDA:
        values["lambda"] = INSTANCE_LAMBDA[instance_name]
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        try:
            values.update(read_config_values(Path(path).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for key in ("generations", "population_size", "rng_seed", "crossover_op", "crossover_rate",
                "mutation_op", "mutation_rate", "elite_count", "lam", "gamma"):
        v = getattr(args, key, None)
        if v is not None:
            values["lambda" if key == "lam" else key] = v
    return GaConfig.from_dict(values)


def _table(headers, rows):
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _write_csv(path, headers, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(headers)
        w.writerows(rows)


def _schedule_rows(schedule):
    rows = []
    for t, day in enumerate(schedule.routes):
        for r, route in enumerate(day):
            rows.append([day_name(t + 1), f"R{r + 1}", " ".join(map(str, route)),
                         " ".join(f"{x:.2f}" for x in schedule.loads[t][r]),
                         f"{schedule.route_times[t][r]:.2f}"])
    return rows


def _report_solution(problem, schedule, out):
    rep = evaluate(schedule, problem.instance, problem.horizon, problem.catalog, problem.fleet)
    print(_table(["day", "route", "points", "cumulative load (m3)", "time (min)"],
                 _schedule_rows(schedule)), file=out)
    print(file=out)
    print(_table(["bin cost", "routing cost", "overall cost", "feasible"],
                 [[fmt2(rep.bin_cost), fmt2(rep.routing_cost), fmt2(rep.overall_cost),
                   rep.feasible]]), file=out)
    if rep.violations:
        print("\nviolations:", file=out)
        print(_table(["constraint", "day", "point", "route", "magnitude"],
                     [[v.constraint, v.day or "-", v.point or "-", v.route or "-",
                       f"{v.magnitude:.4g}"] for v in rep.violations]), file=out)
    return rep


def _plots_ok(args):
    return not getattr(args, "no_plots", False)


def _bench_job(job):
    problem, config = job
    t0 = time.perf_counter()
    res = run(problem, config)
    return RunRecord(config.rng_seed, res.score.overall, time.perf_counter() - t0,
                     res.score.feasible)


def _run_jobs(jobs, n_jobs):
    if n_jobs <= 1:
        return [_bench_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        # map preserves submission order, so output is ordered by seed
        return list(pool.map(_bench_job, jobs))


# ---------------------------------------------------------------- commands

def cmd_solve(args):
    problem = _problem(args)
    config = _config(args, problem.instance.name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res = run(problem, config)
    elapsed = time.perf_counter() - t0
    sol = make_solution(problem, res.schedule, res.best, config.to_dict(), config.rng_seed)
    write_solution(sol, out / "solution.json")
    _write_csv(out / "history.csv", ["generation", "best_fitness", "mean_fitness",
                                     "feasible_fraction"], res.history)
    _write_csv(out / "routes.csv", ["day", "route", "points", "cumulative_load", "time_min"],
               _schedule_rows(res.schedule))
    rep = _report_solution(problem, res.schedule, sys.stdout)
    print(f"\nfitness {res.score.fitness:.4f} after {config.generations} generations "
          f"({elapsed:.1f} s); written to {out}")
    if _plots_ok(args):
        from .plotting import plot_history, write_route_maps
        plot_history(res.history, out / "history.svg", title=problem.instance.name)
        if problem.instance.coords is not None:
            write_route_maps(res.schedule, problem.instance, problem.horizon, out)
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_bench(args):
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    problem = _problem(args)
    config = _config(args, problem.instance.name)
    jobs = [(problem, config.replace(rng_seed=config.rng_seed + k)) for k in range(args.runs)]
    report = BenchReport(_run_jobs(jobs, args.jobs))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_rows = [[r.seed, repr(r.cost), f"{r.runtime:.3f}", r.feasible] for r in report.runs]
    _write_csv(out / "runs.csv", ["seed", "overall_cost", "runtime_s", "feasible"], run_rows)
    agg = report.aggregates()
    _write_csv(out / "summary.csv", list(agg), [[agg[k] for k in agg]])
    print(_table(["seed", "overall cost", "runtime (s)", "feasible"],
                 [[r.seed, fmt2(r.cost), f"{r.runtime:.1f}", r.feasible] for r in report.runs]))
    print()
    print(_table(["runs", "min", "median", "mean", "std", "feasible"],
                 [[agg["runs"], fmt2(agg["min"]), fmt2(agg["median"]), fmt2(agg["mean"]),
                   fmt2(agg["std"]), agg["feasible"]]]))
    if _plots_ok(args):
        from .plotting import plot_bench
        plot_bench(report.costs, out / "bench.svg", title=problem.instance.name)
    return EXIT_OK if report.feasible_count == len(report.runs) else EXIT_INFEASIBLE


def _levels(text, cast):
    return tuple(cast(x.strip()) for x in text.split(",") if x.strip())


def cmd_tune(args):
    if args.runs < 1:
        raise UsageError("--runs must be >= 1 per treatment")
    problem = _problem(args)
    base = _config(args, problem.instance.name)
    grid = {
        "crossover_op": _levels(args.crossover_ops, str.upper),
        "crossover_rate": _levels(args.crossover_rates, float),
        "mutation_op": _levels(args.mutation_ops, str.upper),
        "mutation_rate": _levels(args.mutation_rates, float),
    }
    factors = list(grid)
    treatments = list(itertools.product(*grid.values()))
    jobs, keys = [], []
    for levels in treatments:
        cfg = base.replace(**dict(zip(factors, levels)))
        for k in range(args.runs):
            jobs.append((problem, cfg.replace(rng_seed=base.rng_seed + k)))
            keys.append(levels)
    records = _run_jobs(jobs, args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "runs.csv", factors + ["seed", "overall_cost", "runtime_s", "feasible"],
               [[*lv, r.seed, repr(r.cost), f"{r.runtime:.3f}", r.feasible]
                for lv, r in zip(keys, records)])
    rows = []
    for levels in treatments:
        rs = [r for lv, r in zip(keys, records) if lv == levels]
        costs = [r.cost for r in rs]
        rows.append([*levels, statistics.fmean(costs), statistics.median(costs),
                     statistics.fmean(r.runtime for r in rs)])
    _write_csv(out / "treatments.csv",
               factors + ["mean_cost", "median_cost", "mean_runtime_s"], rows)
    kw_rows, effects = [], {}
    for f_idx, f in enumerate(factors):
        by_level = {}
        for lv, r in zip(keys, records):
            by_level.setdefault(lv[f_idx], []).append(r)
        effects[f] = [(lv, statistics.fmean(r.cost for r in rs)) for lv, rs in by_level.items()]
        if len(by_level) < 2:
            continue
        h_c, p_c = kruskal_wallis([[r.cost for r in rs] for rs in by_level.values()])
        h_t, p_t = kruskal_wallis([[r.runtime for r in rs] for rs in by_level.values()])
        kw_rows.append([f, len(by_level), h_c, p_c, h_t, p_t])
    _write_csv(out / "kruskal.csv", ["factor", "levels", "H_cost", "p_cost", "H_runtime",
                                     "p_runtime"], kw_rows)
    print(f"{len(treatments)} treatments x {args.runs} runs")
    best = sorted(rows, key=lambda r: r[4])[:10]
    print(_table(factors + ["mean cost", "median cost", "runtime (s)"],
                 [[*r[:4], fmt2(r[4]), fmt2(r[5]), f"{r[6]:.2f}"] for r in best]))
    print()
    print(_table(["factor", "levels", "H cost", "p cost", "H runtime", "p runtime"],
                 [[r[0], r[1], f"{r[2]:.3f}", f"{r[3]:.3g}", f"{r[4]:.3f}", f"{r[5]:.3g}"]
                  for r in kw_rows]))
    if _plots_ok(args):
        from .plotting import plot_main_effects
        plot_main_effects(effects, out / "main_effects.svg")
    return EXIT_OK


def cmd_check(args):
    problem = _problem(args)
    if args.assignment:
        model = build_milp(problem)
        bad = substitute_solution(model, read_assignment(args.assignment))
        _print_substitution(bad)
        return EXIT_OK if not bad else EXIT_INFEASIBLE
    if not args.solution:
        raise UsageError("check needs a solution file (or --assignment)")
    sol = read_solution(args.solution, problem)
    rep = _report_solution(problem, sol.schedule, sys.stdout)
    ok = rep.feasible
    if args.milp:
        bad = substitute_solution(build_milp(problem), schedule_to_assignment(sol.schedule, problem))
        print()
        _print_substitution(bad)
        ok = ok and not bad
    return EXIT_OK if ok else EXIT_INFEASIBLE


def _print_substitution(bad):
    if not bad:
        print("MILP substitution: all constraints satisfied")
        return
    print(f"MILP substitution: {len(bad)} violated row(s)")
    print(_table(["row", "lhs", "sense", "rhs", "slack"],
                 [[n, f"{lhs:.6g}", s, f"{rhs:.6g}", f"{sl:.3g}"] for n, lhs, s, rhs, sl in bad[:50]]))


def cmd_compare(args):
    if args.gap:
        value = optimality_gap(args.a, args.b) * 100.0
        label = "optimality gap"
    else:
        value = pct_diff(args.a, args.b)
        label = "% difference"
    print(f"{label}: {fmt2(value)}%")
    return EXIT_OK


def cmd_emit_lp(args):
    problem = _problem(args)
    text = write_lp(build_milp(problem))
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args):
    problem = _problem(args)
    res = brute_force(problem, max_states=args.max_states)
    rep = _report_solution(problem, res.schedule, sys.stdout)
    print(f"\noptimal cost {res.cost:.6f} over {res.states} visit-pattern combinations")
    if args.out:
        write_solution(make_solution(problem, res.schedule), args.out)
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_render(args):
    from .plotting import write_route_maps
    problem = _problem(args)
    if problem.instance.coords is None:
        raise UsageError("instance has no coordinates to plot")
    sol = read_solution(args.solution, problem)
    paths = write_route_maps(sol.schedule, problem.instance, problem.horizon, args.out)
    _write_csv(Path(args.out) / "routes.csv",
               ["day", "route", "points", "cumulative_load", "time_min"],
               _schedule_rows(sol.schedule))
    for p in paths:
        print(p)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _instance_args(p):
    g = p.add_argument_group("instance")
    g.add_argument("--instance", metavar="DIR", help="directory with time.txt and waste.txt")
    g.add_argument("--time", metavar="PATH", help="travel-time matrix file")
    g.add_argument("--waste", metavar="PATH", help="waste/coordinates file")
    g.add_argument("--days", type=int, default=7, help="horizon length (default 7)")
    g.add_argument("--rest", type=int, nargs="*", default=[7], help="rest days, 1-based (default 7)")
    g.add_argument("--capacity", type=float, help="vehicle capacity m3 (default 12, or 21 above 12 points)")
    g.add_argument("--vehicles", type=int, help="fleet size (default ceil(n/10))")
    g.add_argument("--shift", type=float, help="shift length in minutes (default derived)")


def _ga_args(p):
    g = p.add_argument_group("GA")
    g.add_argument("--config", metavar="PATH", help=f"GA config file (or ${CONFIG_ENV})")
    g.add_argument("--generations", type=int)
    g.add_argument("--population", dest="population_size", type=int)
    g.add_argument("--seed", dest="rng_seed", type=int)
    g.add_argument("--crossover", dest="crossover_op")
    g.add_argument("--crossover-rate", type=float)
    g.add_argument("--mutation", dest="mutation_op")
    g.add_argument("--mutation-rate", type=float)
    g.add_argument("--elite", dest="elite_count", type=int)
    g.add_argument("--lambda", dest="lam", type=float, help="route-count penalty weight")
    g.add_argument("--gamma", type=float, help="shift-overrun penalty weight")


def build_parser():
    parser = _Parser(prog="pvrpbins", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the GA once")
    _instance_args(p)
    _ga_args(p)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="independent GA runs with consecutive seeds")
    _instance_args(p)
    _ga_args(p)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", default="bench")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tune", help="factorial design over GA operators and rates")
    _instance_args(p)
    _ga_args(p)
    p.add_argument("--runs", type=int, default=30, help="runs per treatment")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--crossover-ops", default=",".join(TUNE_LEVELS["crossover_op"]))
    p.add_argument("--crossover-rates", default=",".join(map(str, TUNE_LEVELS["crossover_rate"])))
    p.add_argument("--mutation-ops", default=",".join(TUNE_LEVELS["mutation_op"]))
    p.add_argument("--mutation-rates", default=",".join(map(str, TUNE_LEVELS["mutation_rate"])))
    p.add_argument("--out", default="tune")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("check", help="evaluate a solution file")
    _instance_args(p)
    p.add_argument("solution", nargs="?")
    p.add_argument("--milp", action="store_true", help="also substitute into the MILP model")
    p.add_argument("--assignment", metavar="JSON", help="check a MILP variable assignment instead")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="percentage difference or optimality gap")
    p.add_argument("a", type=float, help="GA cost (or overall cost with --gap)")
    p.add_argument("b", type=float, help="reference cost (or lower bound with --gap)")
    p.add_argument("--gap", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("emit-lp", help="write the linearised MILP in LP format")
    _instance_args(p)
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.set_defaults(func=cmd_emit_lp)

    p = sub.add_parser("oracle", help="exhaustive optimum for tiny instances")
    _instance_args(p)
    p.add_argument("--max-states", type=int, default=10 ** 8)
    p.add_argument("--out", help="write the optimum as a solution file")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", help="SVG route maps of a solution")
    _instance_args(p)
    p.add_argument("solution")
    p.add_argument("--out", default="maps")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ProblemError, OSError) as exc:
        print(f"pvrpbins: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
