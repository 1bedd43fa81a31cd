"""Experiment orchestration: model configurations, runs, metrics, suites.

A run is fully determined by (function, configuration, seed): the seed
is hash-mixed into separate streams for train-set sampling and weight
init, so every configuration sees the same training data for a given
(function, seed) pair and comparisons are paired. Suites iterate a task
grid, optionally across worker processes; results are merged in a fixed
key order, so parallelism never changes output bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import benchmarks, expansion, lbfgs, mlp
from .benchmarks import BenchmarkId, Category, format_float
from .expansion import ConstantScheme, ExpansionConfig
from .lbfgs import LbfgsConfig, StopReason
from .rng import Prng, derive_seed

DEFAULT_TARGET_MSE = 1e-5
DEFAULT_N_TRAIN = 1000
DEFAULT_N_TEST = 100

# training arithmetic for the experiment protocol; inference, gradient
# oracles and optimizer state stay float64 regardless
DEFAULT_PRECISION = "float32"
_PRECISION_DTYPES = {"float32": np.float32, "float64": np.float64}

ALL_FUNCTIONS = tuple(BenchmarkId)
SMOKE_FUNCTIONS = (BenchmarkId.F1, BenchmarkId.F5, BenchmarkId.F6)


@dataclass(frozen=True)
class RunSpec:
    """A trainable configuration: hidden widths plus input treatment."""

    name: str
    hidden_widths: tuple[int, ...]
    expansion: ExpansionConfig

    @property
    def input_dim(self) -> int:
        return self.expansion.output_dim

    def architecture(self) -> mlp.MlpArchitecture:
        return mlp.MlpArchitecture(
            input_dim=self.input_dim, hidden_widths=self.hidden_widths
        )

    def param_count(self) -> int:
        return mlp.param_count(self.architecture())


def _expanded(name: str, k: int) -> RunSpec:
    return RunSpec(name, mlp.DEFAULT_HIDDEN, ExpansionConfig(k=k, scheme=ConstantScheme.PI))


MODEL_CONFIGS: dict[str, RunSpec] = {
    "standard": RunSpec("standard", mlp.DEFAULT_HIDDEN, expansion.IDENTITY),
    "exp3": _expanded("exp3", 1),
    "exp5": _expanded("exp5", 2),
    "exp7": _expanded("exp7", 3),
    "adjusted": RunSpec("adjusted", mlp.ADJUSTED_HIDDEN, expansion.IDENTITY),
}

CONSTANT_ABLATION_K = 2


def scheme_spec(scheme: ConstantScheme, k: int = CONSTANT_ABLATION_K) -> RunSpec:
    """Configuration for the constant-choice ablation (default 5-D)."""
    return RunSpec(
        f"const-{scheme.value}", mlp.DEFAULT_HIDDEN, ExpansionConfig(k=k, scheme=scheme)
    )


def parse_model_config(name: str) -> RunSpec:
    key = name.lower()
    if key not in MODEL_CONFIGS:
        valid = ", ".join(MODEL_CONFIGS)
        raise ValueError(f"unknown model config {name!r}; expected one of {valid}")
    return MODEL_CONFIGS[key]


@dataclass
class RunResult:
    function: BenchmarkId
    config: RunSpec
    seed: int
    target_mse: float
    precision: str
    params: int
    iterations_run: int
    iterations_to_target: int
    initial_train_mse: float
    final_train_mse: float
    final_test_mse: float
    stop_reason: StopReason
    trace: lbfgs.ConvergenceTrace
    final_params: np.ndarray = field(repr=False)
    error: str | None = None

    @property
    def key(self) -> tuple:
        return (self.function.value, self.config.name, self.seed)


def iterations_to_target(losses, target: float, max_iterations: int) -> int:
    """1-based index of the first trace entry at or below target;
    censored at max_iterations when the target is never reached."""
    if len(losses) == 0:
        raise ValueError("trace must contain at least one iteration")
    for i, loss in enumerate(losses, start=1):
        if loss <= target:
            return i
    return max_iterations


def mse_improvement(standard_mse: float, expanded_mse: float) -> float:
    """Percent reduction of the expanded MSE relative to the baseline."""
    if standard_mse <= 0.0:
        raise ValueError("baseline MSE must be positive")
    return (standard_mse - expanded_mse) / standard_mse * 100.0


def convergence_rate(standard_iters: int, model_iters: int) -> float:
    """Baseline-to-model iteration ratio; > 1 means the model was faster."""
    if standard_iters < 1 or model_iters < 1:
        raise ValueError("iteration counts must be at least 1")
    return standard_iters / model_iters


def config_fingerprint(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def run_experiment(
    fn: BenchmarkId,
    spec: RunSpec,
    seed: int,
    train_cfg: LbfgsConfig | None = None,
    target_mse: float = DEFAULT_TARGET_MSE,
    n_train: int = DEFAULT_N_TRAIN,
    n_test: int = DEFAULT_N_TEST,
    precision: str = DEFAULT_PRECISION,
) -> RunResult:
    """Sample, expand, init, train, evaluate: one deterministic run."""
    train_cfg = train_cfg or LbfgsConfig()
    if precision not in _PRECISION_DTYPES:
        raise ValueError(f"precision must be one of {sorted(_PRECISION_DTYPES)}")
    data_prng = Prng(derive_seed(seed, fn.value, "train"))
    train = benchmarks.sample_train(fn, data_prng, n_train)
    test = benchmarks.sample_test(fn, n_test)

    X_train = expansion.expand_dataset(train, spec.expansion)
    X_test = expansion.expand_xs(test.xs, spec.expansion)

    arch = spec.architecture()
    init_prng = Prng(derive_seed(seed, fn.value, "init"))
    model0 = mlp.init_xavier(arch, init_prng)

    raw_objective = mlp.make_objective(arch, X_train, train.ys,
                                       dtype=_PRECISION_DTYPES[precision])

    def objective(params):
        # overflow in an exploratory trial step is handled by the line
        # search (non-finite values reject the step), not raised here
        with np.errstate(over="ignore", invalid="ignore"):
            return raw_objective(params)

    # mixed precision: the objective computes in the requested dtype,
    # optimizer state and evaluation stay float64
    result = lbfgs.minimize(objective, model0.params, train_cfg)

    final_model = mlp.MlpModel(arch=arch, params=result.x)
    test_resid = mlp.forward_batch(final_model, X_test) - test.ys
    final_test_mse = float(np.dot(test_resid, test_resid) / len(test))

    losses = result.trace.losses()
    initial_mse, _ = objective(model0.params)
    return RunResult(
        function=fn,
        config=spec,
        seed=seed,
        target_mse=target_mse,
        precision=precision,
        params=spec.param_count(),
        iterations_run=len(result.trace),
        iterations_to_target=iterations_to_target(
            losses or [initial_mse], target_mse, train_cfg.max_iterations
        ),
        initial_train_mse=initial_mse,
        final_train_mse=result.loss,
        final_test_mse=final_test_mse,
        stop_reason=result.stop_reason,
        trace=result.trace,
        final_params=result.x,
    )


def _run_task(args) -> RunResult:
    fn, spec, seed, train_cfg, target_mse, n_train, n_test, precision = args
    try:
        return run_experiment(fn, spec, seed, train_cfg, target_mse,
                              n_train, n_test, precision)
    except Exception as exc:  # record, never abort the suite
        return RunResult(
            function=fn, config=spec, seed=seed, target_mse=target_mse,
            precision=precision, params=spec.param_count(), iterations_run=0,
            iterations_to_target=train_cfg.max_iterations,
            initial_train_mse=math.nan, final_train_mse=math.nan,
            final_test_mse=math.nan, stop_reason=StopReason.LINE_SEARCH_FAIL,
            trace=lbfgs.ConvergenceTrace(), final_params=np.empty(0),
            error=f"{type(exc).__name__}: {exc}",
        )


def run_grid(
    functions,
    specs,
    seeds,
    train_cfg: LbfgsConfig | None = None,
    target_mse: float = DEFAULT_TARGET_MSE,
    n_train: int = DEFAULT_N_TRAIN,
    n_test: int = DEFAULT_N_TEST,
    jobs: int = 1,
    precision: str = DEFAULT_PRECISION,
    progress=None,
) -> list[RunResult]:
    """Run every (function, spec, seed) combination.

    Results come back sorted by task order regardless of the worker
    count, so the artifacts downstream are byte-stable.
    """
    train_cfg = train_cfg or LbfgsConfig()
    tasks = [
        (fn, spec, seed, train_cfg, target_mse, n_train, n_test, precision)
        for fn in functions
        for spec in specs
        for seed in seeds
    ]
    if jobs <= 1:
        results = []
        for task in tasks:
            results.append(_run_task(task))
            if progress is not None:
                progress(results[-1])
        return results

    import multiprocessing as mp

    with mp.get_context("fork").Pool(processes=jobs) as pool:
        results = []
        for res in pool.imap(_run_task, tasks):
            results.append(res)
            if progress is not None:
                progress(res)
    return results


@dataclass
class SuiteReport:
    """All runs of a suite plus pure re-aggregations over them."""

    runs: list[RunResult]
    baseline: str = "standard"
    seeds: tuple[int, ...] = ()

    def configs(self) -> list[str]:
        seen = dict.fromkeys(r.config.name for r in self.runs)
        return list(seen)

    def functions(self) -> list[BenchmarkId]:
        seen = dict.fromkeys(r.function for r in self.runs)
        return list(seen)

    def select(self, config: str | None = None, fn: BenchmarkId | None = None):
        return [
            r for r in self.runs
            if (config is None or r.config.name == config)
            and (fn is None or r.function is fn)
        ]

    def paired_baseline(self, run: RunResult) -> RunResult | None:
        for r in self.runs:
            if (r.config.name == self.baseline and r.function is run.function
                    and r.seed == run.seed):
                return r
        return None

    def failed_runs(self) -> list[RunResult]:
        return [r for r in self.runs if r.error is not None]


def _mean(xs) -> float:
    return float(np.mean(xs)) if len(xs) else math.nan


def _std(xs) -> float:
    return float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0


def config_summary(report: SuiteReport) -> list[dict]:
    """Per-configuration aggregates across every (function, seed) run.

    Iteration and MSE spreads are reported both across all runs and
    across per-function means (the two variance decompositions).
    convergence_rate is the paired baseline/model iteration ratio.
    """
    rows = []
    for name in report.configs():
        runs = report.select(config=name)
        iters = [r.iterations_to_target for r in runs]
        test_mse = [r.final_test_mse for r in runs]
        train_mse = [r.final_train_mse for r in runs]
        fn_iter_means, fn_mse_means = [], []
        for fn in report.functions():
            fn_runs = [r for r in runs if r.function is fn]
            if fn_runs:
                fn_iter_means.append(_mean([r.iterations_to_target for r in fn_runs]))
                fn_mse_means.append(_mean([r.final_test_mse for r in fn_runs]))
        rates = []
        for r in runs:
            base = report.paired_baseline(r)
            if base is not None:
                rates.append(convergence_rate(base.iterations_to_target,
                                              r.iterations_to_target))
        rows.append({
            "config": name,
            "params": runs[0].params if runs else 0,
            "iters_mean": _mean(iters),
            "iters_std": _std(iters),
            "iters_std_across_functions": _std(fn_iter_means),
            "test_mse_mean": _mean(test_mse),
            "test_mse_std": _std(test_mse),
            "test_mse_std_across_functions": _std(fn_mse_means),
            "train_mse_mean": _mean(train_mse),
            "convergence_rate_mean": _mean(rates),
            "convergence_rate_std": _std(rates),
        })
    return rows


def function_config_summary(report: SuiteReport) -> list[dict]:
    rows = []
    for fn in report.functions():
        for name in report.configs():
            runs = report.select(config=name, fn=fn)
            if not runs:
                continue
            rows.append({
                "function": fn.value,
                "config": name,
                "params": runs[0].params,
                "iters_mean": _mean([r.iterations_to_target for r in runs]),
                "iters_median": float(np.median([r.iterations_to_target for r in runs])),
                "test_mse_mean": _mean([r.final_test_mse for r in runs]),
                "test_mse_median": float(np.median([r.final_test_mse for r in runs])),
                "train_mse_mean": _mean([r.final_train_mse for r in runs]),
            })
    return rows


CATEGORY_ORDER = (
    Category.SMOOTH,
    Category.DISCONTINUOUS,
    Category.NON_DIFFERENTIABLE,
    Category.COMPLEX_SPECTRUM,
)


def aggregate_by_category(
    report: SuiteReport,
    expanded: str = "exp5",
    clamp_nonnegative: bool = False,
) -> list[dict]:
    """Mean MSE improvement and iteration reduction per function category.

    Improvements are computed per (function, seed) pair against the
    baseline and then averaged. Requires full 10-function coverage for
    both configurations. Iteration reductions are signed unless
    clamp_nonnegative floors them at zero.
    """
    covered = {r.function for r in report.select(config=expanded)}
    base_covered = {r.function for r in report.select(config=report.baseline)}
    missing = set(ALL_FUNCTIONS) - (covered & base_covered)
    if missing:
        names = ", ".join(sorted(f.value for f in missing))
        raise ValueError(f"category aggregation needs all 10 functions; missing {names}")

    per_pair: dict[BenchmarkId, list[tuple[float, float]]] = {f: [] for f in ALL_FUNCTIONS}
    for r in report.select(config=expanded):
        base = report.paired_baseline(r)
        if base is None:
            continue
        imp = mse_improvement(base.final_test_mse, r.final_test_mse)
        red = (base.iterations_to_target - r.iterations_to_target) \
            / base.iterations_to_target * 100.0
        per_pair[r.function].append((imp, red))

    def _row(label: str, fns) -> dict:
        imps = [v[0] for f in fns for v in per_pair[f]]
        reds = [v[1] for f in fns for v in per_pair[f]]
        imp, red = _mean(imps), _mean(reds)
        if clamp_nonnegative:
            imp, red = max(imp, 0.0), max(red, 0.0)
        return {
            "category": label,
            "functions": " ".join(f.value for f in fns),
            "mse_improvement_pct": imp,
            "iteration_reduction_pct": red,
        }

    rows = [
        _row(cat.value, [f for f in ALL_FUNCTIONS if f.category is cat])
        for cat in CATEGORY_ORDER
    ]
    rows.append(_row("overall", list(ALL_FUNCTIONS)))
    return rows


def constant_ranking(report: SuiteReport, reference: str = "const-pi") -> list[dict]:
    """Schemes ranked by mean final test MSE relative to the reference.

    convergence_factor is the reference-to-scheme mean-iteration ratio
    (< 1 means the scheme needed more iterations than the reference).
    """
    ref_runs = report.select(config=reference)
    if not ref_runs:
        raise ValueError(f"reference config {reference!r} missing from report")
    ref_mse = _mean([r.final_test_mse for r in ref_runs])
    ref_iters = _mean([r.iterations_to_target for r in ref_runs])
    rows = []
    for name in report.configs():
        runs = report.select(config=name)
        mean_mse = _mean([r.final_test_mse for r in runs])
        mean_iters = _mean([r.iterations_to_target for r in runs])
        rows.append({
            "scheme": name.removeprefix("const-"),
            "mean_test_mse": mean_mse,
            "relative_mse": mean_mse / ref_mse,
            "iters_mean": mean_iters,
            "convergence_factor": ref_iters / mean_iters,
        })
    rows.sort(key=lambda row: row["relative_mse"])
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank
    return rows


def run_dimension_ablation(
    seeds,
    out_dir: str | Path | None = None,
    train_cfg: LbfgsConfig | None = None,
    target_mse: float = DEFAULT_TARGET_MSE,
    functions=ALL_FUNCTIONS,
    jobs: int = 1,
    precision: str = DEFAULT_PRECISION,
    clamp_nonnegative: bool = False,
    plots: bool = True,
    progress=None,
) -> SuiteReport:
    """All five model configurations across the benchmark functions."""
    seeds = tuple(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    specs = list(MODEL_CONFIGS.values())
    runs = run_grid(functions, specs, seeds, train_cfg, target_mse,
                    jobs=jobs, precision=precision, progress=progress)
    report = SuiteReport(runs=runs, baseline="standard", seeds=seeds)
    if out_dir is not None:
        write_suite_outputs(report, out_dir, train_cfg=train_cfg,
                            clamp_nonnegative=clamp_nonnegative, plots=plots)
    return report


def run_constant_ablation(
    seeds,
    out_dir: str | Path | None = None,
    k: int = CONSTANT_ABLATION_K,
    train_cfg: LbfgsConfig | None = None,
    target_mse: float = DEFAULT_TARGET_MSE,
    functions=ALL_FUNCTIONS,
    jobs: int = 1,
    precision: str = DEFAULT_PRECISION,
    plots: bool = True,
    progress=None,
) -> SuiteReport:
    """All five constant schemes at a fixed expansion factor."""
    seeds = tuple(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    specs = [scheme_spec(s, k) for s in ConstantScheme]
    runs = run_grid(functions, specs, seeds, train_cfg, target_mse,
                    jobs=jobs, precision=precision, progress=progress)
    report = SuiteReport(runs=runs, baseline="const-pi", seeds=seeds)
    if out_dir is not None:
        write_suite_outputs(report, out_dir, train_cfg=train_cfg,
                            ranking_reference="const-pi", plots=plots)
    return report


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def _format_json_value(v):
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (int, str, bool)) or v is None:
        return json.dumps(v)
    if isinstance(v, dict):
        inner = ", ".join(
            f"{json.dumps(k)}: {_format_json_value(v[k])}" for k in sorted(v)
        )
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_json_value(item) for item in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def dumps_json(obj: dict) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    return _format_json_value(obj) + "\n"


def run_config_payload(result: RunResult, train_cfg: LbfgsConfig) -> dict:
    spec = result.config
    return {
        "function": result.function.value,
        "config": spec.name,
        "seed": result.seed,
        "input_dim": spec.input_dim,
        "hidden_widths": list(spec.hidden_widths),
        "expansion_k": spec.expansion.k,
        "constant_scheme": spec.expansion.scheme.value,
        "n_train": DEFAULT_N_TRAIN,
        "n_test": DEFAULT_N_TEST,
        "target_mse": result.target_mse,
        "precision": result.precision,
        "optimizer": {
            "learning_rate": train_cfg.learning_rate,
            "max_iterations": train_cfg.max_iterations,
            "grad_tolerance": train_cfg.grad_tolerance,
            "grad_tolerance_relative": train_cfg.grad_tolerance_relative,
            "history_size": train_cfg.history_size,
            "wolfe_c1": train_cfg.wolfe_c1,
            "wolfe_c2": train_cfg.wolfe_c2,
            "max_line_search_evals": train_cfg.max_line_search_evals,
        },
    }


def run_json(result: RunResult, train_cfg: LbfgsConfig) -> str:
    config = run_config_payload(result, train_cfg)
    payload = {
        "config": config,
        "fingerprint": config_fingerprint(config),
        "metrics": {
            "params": result.params,
            "iterations_run": result.iterations_run,
            "iterations_to_target": result.iterations_to_target,
            "initial_train_mse": result.initial_train_mse,
            "final_train_mse": result.final_train_mse,
            "final_test_mse": result.final_test_mse,
        },
        "stop_reason": result.stop_reason.value,
        "error": result.error,
    }
    return dumps_json(payload)


def _run_stem(result: RunResult) -> str:
    return f"{result.function.value}_{result.config.name}_s{result.seed}"


def write_summary_csv(report: SuiteReport, path: Path) -> None:
    lines = ["function,config,seed,params,iters_to_target,final_train_mse,final_test_mse"]
    for r in sorted(report.runs, key=lambda r: (list(BenchmarkId).index(r.function),
                                                r.config.name, r.seed)):
        lines.append(",".join([
            r.function.value, r.config.name, str(r.seed), str(r.params),
            str(r.iterations_to_target), format_float(r.final_train_mse),
            format_float(r.final_test_mse),
        ]))
    path.write_text("\n".join(lines) + "\n")


def _write_table_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            cells.append(format_float(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def write_suite_outputs(
    report: SuiteReport,
    out_dir: str | Path,
    train_cfg: LbfgsConfig | None = None,
    clamp_nonnegative: bool = False,
    ranking_reference: str | None = None,
    plots: bool = True,
) -> None:
    """Write per-run JSON + trace CSVs, aggregate CSVs, and figures."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(exist_ok=True)
    train_cfg = train_cfg or LbfgsConfig()

    for r in report.runs:
        (out / "runs" / f"{_run_stem(r)}.json").write_text(run_json(r, train_cfg))
        r.trace.write_csv(out / "traces" / f"{_run_stem(r)}.csv")

    write_summary_csv(report, out / "summary.csv")
    _write_table_csv(
        out / "config_summary.csv", config_summary(report),
        ["config", "params", "iters_mean", "iters_std", "iters_std_across_functions",
         "test_mse_mean", "test_mse_std", "test_mse_std_across_functions",
         "train_mse_mean", "convergence_rate_mean", "convergence_rate_std"],
    )
    _write_table_csv(
        out / "function_config_summary.csv", function_config_summary(report),
        ["function", "config", "params", "iters_mean", "iters_median",
         "test_mse_mean", "test_mse_median", "train_mse_mean"],
    )

    if ranking_reference is not None:
        _write_table_csv(
            out / "constant_ranking.csv", constant_ranking(report, ranking_reference),
            ["scheme", "rank", "mean_test_mse", "relative_mse", "iters_mean",
             "convergence_factor"],
        )
    elif "exp5" in report.configs():
        covered = {r.function for r in report.runs}
        if covered >= set(ALL_FUNCTIONS):
            _write_table_csv(
                out / "category_summary.csv",
                aggregate_by_category(report, clamp_nonnegative=clamp_nonnegative),
                ["category", "functions", "mse_improvement_pct",
                 "iteration_reduction_pct"],
            )

    if plots:
        from . import report as figures

        figures.render_suite_figures(report, out / "figures")
