"""Command-line interface.

Subcommands: run (single experiment), suite (dimension ablation across
all model configurations), ablate-consts (constant-scheme ablation),
eval (print a benchmark value). Exit codes: 0 success, 1 invalid
arguments, 2 suite completed with at least one failed run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness, mlp
from .benchmarks import format_float, parse_benchmark_id
from .expansion import ExpansionConfig, parse_scheme
from .harness import (
    DEFAULT_TARGET_MSE,
    SMOKE_FUNCTIONS,
    parse_model_config,
    run_constant_ablation,
    run_dimension_ablation,
    run_experiment,
)
from .lbfgs import LbfgsConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for
    # suites with failed runs, so argument errors map to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"seeds must be comma-separated integers, got {text!r}")
    if not seeds:
        raise ValueError("need at least one seed")
    return seeds


def _optimizer_config(args) -> LbfgsConfig:
    return LbfgsConfig(
        learning_rate=args.lr,
        max_iterations=args.max_iter,
        grad_tolerance=args.grad_tol,
        history_size=args.history,
    )


def _add_optimizer_args(p: argparse.ArgumentParser, max_iter_default=500):
    p.add_argument("--max-iter", type=int, default=max_iter_default,
                   help="outer L-BFGS iteration cap")
    p.add_argument("--lr", type=float, default=1.0,
                   help="initial line-search trial step")
    p.add_argument("--grad-tol", type=float, default=1e-10,
                   help="gradient infinity-norm stopping threshold")
    p.add_argument("--history", type=int, default=100,
                   help="number of stored curvature pairs")
    p.add_argument("--target-mse", type=float, default=DEFAULT_TARGET_MSE,
                   help="train-MSE threshold for iterations-to-target")
    p.add_argument("--precision", choices=["float32", "float64"],
                   default=harness.DEFAULT_PRECISION,
                   help="training arithmetic for the objective")


def _progress_printer(total: int):
    done = [0]

    def _print(res):
        done[0] += 1
        status = res.error or res.stop_reason.value
        print(
            f"[{done[0]}/{total}] {res.function.value} {res.config.name} "
            f"seed={res.seed} iters={res.iterations_to_target} "
            f"test_mse={format_float(res.final_test_mse)} ({status})",
            flush=True,
        )

    return _print


def _cmd_run(args) -> int:
    fn = parse_benchmark_id(args.fn)
    spec = parse_model_config(args.config)
    train_cfg = _optimizer_config(args)
    result = run_experiment(fn, spec, args.seed, train_cfg, args.target_mse,
                            precision=args.precision)
    if args.out:
        Path(args.out).write_text(harness.run_json(result, train_cfg))
    if args.trace_csv:
        result.trace.write_csv(args.trace_csv)
    if args.save_model:
        model = mlp.MlpModel(arch=spec.architecture(), params=result.final_params)
        mlp.save_checkpoint(
            model, args.save_model,
            meta={"seed": args.seed, "scheme": spec.expansion.scheme.value,
                  "expansion_k": spec.expansion.k, "function": fn.value},
        )
    print(
        f"{fn.value} {spec.name} seed={args.seed}: "
        f"iters_to_target={result.iterations_to_target} "
        f"final_train_mse={format_float(result.final_train_mse)} "
        f"final_test_mse={format_float(result.final_test_mse)} "
        f"stop={result.stop_reason.value}"
    )
    return 2 if result.error else 0


def _cmd_suite(args) -> int:
    seeds = _parse_seeds(args.seeds)
    train_cfg = _optimizer_config(args)
    functions = harness.ALL_FUNCTIONS
    if args.smoke:
        functions = SMOKE_FUNCTIONS
        if args.max_iter == 500:
            train_cfg = LbfgsConfig(
                learning_rate=args.lr, max_iterations=150,
                grad_tolerance=args.grad_tol, history_size=args.history,
            )
    if args.functions:
        functions = tuple(parse_benchmark_id(t) for t in args.functions.split(","))
    n_tasks = len(functions) * len(harness.MODEL_CONFIGS) * len(seeds)
    report = run_dimension_ablation(
        seeds, args.out, train_cfg=train_cfg, target_mse=args.target_mse,
        functions=functions, jobs=args.jobs, precision=args.precision,
        clamp_nonnegative=args.clamp_nonnegative, plots=not args.no_plots,
        progress=_progress_printer(n_tasks) if not args.quiet else None,
    )
    failed = report.failed_runs()
    if failed:
        for r in failed:
            print(f"FAILED {r.function.value} {r.config.name} seed={r.seed}: {r.error}",
                  file=sys.stderr)
        return 2
    return 0


def _cmd_ablate_consts(args) -> int:
    seeds = _parse_seeds(args.seeds)
    train_cfg = _optimizer_config(args)
    n_tasks = len(harness.ALL_FUNCTIONS) * 5 * len(seeds)
    report = run_constant_ablation(
        seeds, args.out, k=args.k, train_cfg=train_cfg,
        target_mse=args.target_mse, jobs=args.jobs, precision=args.precision,
        plots=not args.no_plots,
        progress=_progress_printer(n_tasks) if not args.quiet else None,
    )
    failed = report.failed_runs()
    if failed:
        for r in failed:
            print(f"FAILED {r.function.value} {r.config.name} seed={r.seed}: {r.error}",
                  file=sys.stderr)
        return 2
    return 0


def _cmd_eval(args) -> int:
    fn = parse_benchmark_id(args.fn)
    from .benchmarks import evaluate

    print(format_float(evaluate(fn, args.x)))
    return 0


def _cmd_expand(args) -> int:
    cfg = ExpansionConfig(k=args.k, scheme=parse_scheme(args.scheme))
    from .expansion import expand

    print(",".join(format_float(v) for v in expand(args.x, cfg)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fnapprox",
                     description="1-D function approximation experiments with "
                                 "constant-padding input expansion")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train one (function, config, seed) run")
    p_run.add_argument("--fn", required=True, help="benchmark id, F1..F10")
    p_run.add_argument("--config", default="standard",
                       help="standard | exp3 | exp5 | exp7 | adjusted")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", help="write the run summary JSON here")
    p_run.add_argument("--trace-csv", help="write the per-iteration trace here")
    p_run.add_argument("--save-model", help="write a model checkpoint here")
    _add_optimizer_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite",
                             help="all five model configs across the benchmark")
    p_suite.add_argument("--seeds", required=True, help="comma-separated, e.g. 1,2,3")
    p_suite.add_argument("--out", required=True, help="output directory")
    p_suite.add_argument("--smoke", action="store_true",
                         help="150 iterations on F1,F5,F6 only")
    p_suite.add_argument("--functions", help="restrict to these ids, e.g. F1,F5")
    p_suite.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_suite.add_argument("--clamp-nonnegative", action="store_true",
                         help="floor category iteration reductions at 0%%")
    p_suite.add_argument("--no-plots", action="store_true")
    p_suite.add_argument("--quiet", action="store_true")
    _add_optimizer_args(p_suite)
    p_suite.set_defaults(func=_cmd_suite)

    p_ab = sub.add_parser("ablate-consts",
                          help="constant-scheme ablation at fixed expansion")
    p_ab.add_argument("--k", type=int, default=2, help="pad count per side")
    p_ab.add_argument("--seeds", required=True)
    p_ab.add_argument("--out", required=True)
    p_ab.add_argument("--jobs", type=int, default=1)
    p_ab.add_argument("--no-plots", action="store_true")
    p_ab.add_argument("--quiet", action="store_true")
    _add_optimizer_args(p_ab)
    p_ab.set_defaults(func=_cmd_ablate_consts)

    p_eval = sub.add_parser("eval", help="print a benchmark function value")
    p_eval.add_argument("--fn", required=True)
    p_eval.add_argument("--x", type=float, required=True)
    p_eval.set_defaults(func=_cmd_eval)

    p_exp = sub.add_parser("expand", help="print the expanded input vector")
    p_exp.add_argument("--x", type=float, required=True)
    p_exp.add_argument("--k", type=int, default=2)
    p_exp.add_argument("--scheme", default="pi")
    p_exp.set_defaults(func=_cmd_expand)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"fnapprox: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
