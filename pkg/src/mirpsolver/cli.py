"""Command line interface.

Subcommands: ``solve`` (staged pipeline + report files + figures),
``sweep`` (parameter sweep table + figure), ``validate`` (independent
model check of a solution file) and ``gen-toy`` (balanced test
instance).  Exit codes: 0 ok, 2 configuration error, 3 validation
violations.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .beam import BeamConfig
from .greedy import GreedyConfig
from .harness import (RunConfig, report, run, sweep, write_sweep_csv)
from .ils import IlsConfig
from .instance import InstanceError, generate_toy, load_instance, save_instance
from .solution import ParityError, load_solution
from .validator import check

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATIONS = 3


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance file")
    p.add_argument("--horizon", type=int, default=None,
                   help="override (shrink) the planning horizon")
    p.add_argument("--stage", choices=["bs", "ls", "ils"], default="ils",
                   help="last pipeline stage to run (cumulative)")
    p.add_argument("--beam-width", type=int, default=10, metavar="N")
    p.add_argument("--max-children", type=int, default=2, metavar="W")
    p.add_argument("--greedy-samples", type=int, default=3, metavar="Q",
                   help="completions per score (1 deterministic + Q-1 randomized)")
    p.add_argument("--sigma-frac", type=float, default=0.25,
                   help="greedy noise stdev as a fraction of the key spread")
    p.add_argument("--no-randomize-port", action="store_true",
                   help="disable noise on port selection")
    p.add_argument("--randomize-vessel", action="store_true",
                   help="enable noise on vessel selection")
    p.add_argument("--ils-iterations", type=int, default=640)
    p.add_argument("--ils-restore-limit", type=int, default=4,
                   help="non-improving iterations before restoring the best")
    p.add_argument("--ils-perturbations", type=int, default=2)
    p.add_argument("--sa-p-initial", type=float, default=0.79)
    p.add_argument("--sa-p-final", type=float, default=0.01)
    p.add_argument("--delta-ref-frac", type=float, default=0.01)
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, default=None, help="single seed")
    seeds.add_argument("--seeds", type=int, default=None, metavar="K",
                       help="run seeds 1..K (default 10)")
    p.add_argument("--time-limit", type=float, default=90_000.0, metavar="SECS")
    p.add_argument("--best-known", type=float, default=None, metavar="V")
    p.add_argument("--workers", type=int, default=1,
                   help="concurrent seed jobs (results are order-independent)")


def _run_config(args) -> RunConfig:
    if args.seed is not None:
        seed_list = [args.seed]
    else:
        seed_list = list(range(1, (args.seeds or 10) + 1))
    return RunConfig(
        instance_path=args.instance,
        horizon=args.horizon,
        beam=BeamConfig(
            beam_width=args.beam_width,
            max_children=args.max_children,
            greedy=GreedyConfig(
                q=args.greedy_samples,
                sigma_frac=args.sigma_frac,
                randomize_port=not args.no_randomize_port,
                randomize_vessel=args.randomize_vessel,
            ),
        ),
        ils=IlsConfig(
            iterations=args.ils_iterations,
            non_improving_limit=args.ils_restore_limit,
            perturbations=args.ils_perturbations,
            sa_p_initial=args.sa_p_initial,
            sa_p_final=args.sa_p_final,
            delta_ref_frac=args.delta_ref_frac,
        ),
        stage=args.stage,
        seeds=seed_list,
        time_limit_seconds=args.time_limit,
        best_known=args.best_known,
        workers=args.workers,
    )


def _cmd_solve(args) -> int:
    cfg = _run_config(args)
    cfg.out_dir = args.out
    cfg.dump_beam = args.dump_beam
    cfg.dump_ils = args.dump_ils
    cfg.trace = args.trace
    try:
        cfg.validate()
        record = run(cfg)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        paths = report([record], args.out)
        from . import plots
        single_seed = len(cfg.seeds) == 1
        if args.dump_ils and single_seed and any(o.ils_rows for o in record.outcomes):
            paths.append(plots.render_ils_convergence(
                args.dump_ils, Path(args.out) / "ils_convergence.png"))
        if args.dump_beam and single_seed:
            paths.append(plots.render_beam_levels(
                args.dump_beam, Path(args.out) / "beam_levels.png"))
        for p in paths:
            print(p)
    for outcome in record.outcomes:
        stage = outcome.final_stage
        if stage is None:
            print(f"seed {outcome.seed}: no stage completed within the time limit")
            continue
        cost = outcome.stages[stage].cost / 100.0
        line = f"seed {outcome.seed}: {stage} cost {cost:.2f}"
        if record.best_known is not None:
            from .evaluator import gap_percent
            line += f" gap {gap_percent(cost, record.best_known):+.2f}%"
        print(line)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _run_config(args)
    try:
        base.validate()
        values = [int(v) for v in args.values.split(",") if v.strip()]
        rows = sweep(args.param, values, base, scale_n=args.scale_n)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_sweep_csv(rows, args.param, out_dir / f"sweep_{args.param}.csv")
    print(csv_path)
    from . import plots
    print(plots.render_sweep_figure(rows, args.param,
                                    out_dir / f"sweep_{args.param}.png"))
    for r in rows:
        print(f"{args.param}={r.value} (N={r.beam_width}): "
              f"average {r.metric} {r.average}, median {r.median_value}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        inst = load_instance(args.instance)
        sol = load_solution(inst, args.solution)
    except (InstanceError, ParityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = check(sol, inst)
    print(rep.summary())
    clean = rep.clean and rep.in_milp_domain
    print("result: " + ("clean" if clean else "violations found"))
    return EXIT_OK if clean else EXIT_VIOLATIONS


def _cmd_gen_toy(args) -> int:
    try:
        inst = generate_toy(args.seed, args.consumers, args.horizon)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    save_instance(inst, args.out)
    print(args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirpsolver",
        description="Beam-search + ILS heuristic for single-product maritime "
                    "inventory routing")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the staged pipeline")
    _add_solver_options(p_solve)
    p_solve.add_argument("--out", default=None, metavar="DIR",
                         help="write report CSVs, figures and best solutions here")
    p_solve.add_argument("--dump-beam", default=None, metavar="PATH",
                         help="per-level CSV: level,node,score,pool_best")
    p_solve.add_argument("--dump-ils", default=None, metavar="PATH",
                         help="per-iteration CSV: iter,current_cost,best_cost,"
                              "accepted,temperature")
    p_solve.add_argument("--trace", action="store_true",
                         help="print the evaluation trace of each best solution")
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="parameter sweep")
    _add_solver_options(p_sweep)
    p_sweep.add_argument("--param", choices=["w", "q", "n"], required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 2,3,4")
    p_sweep.add_argument("--scale-n", action="store_true",
                         help="keep beam_width * q constant across the q sweep")
    p_sweep.add_argument("--out", default=None, metavar="DIR")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="check a solution file")
    p_val.add_argument("instance")
    p_val.add_argument("solution")
    p_val.set_defaults(func=_cmd_validate)

    p_gen = sub.add_parser("gen-toy", help="generate a balanced toy instance")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--consumers", type=int, required=True)
    p_gen.add_argument("--horizon", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_toy)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
