"""Acceptance suite: one test per exit criterion, each printing a
PASS/FAIL line (run with -s or -v to see them live).

The heavy end-to-end criteria (5-7) use the same entry points as the
CLI; expect roughly 10-15 minutes total on one core.
"""

import math

import numpy as np
import pytest

from fnapprox.benchmarks import BenchmarkId, evaluate
from fnapprox.expansion import ConstantScheme, ExpansionConfig, expand, expand_xs
from fnapprox.harness import (
    ALL_FUNCTIONS,
    MODEL_CONFIGS,
    SMOKE_FUNCTIONS,
    SuiteReport,
    run_dimension_ablation,
    run_experiment,
    run_grid,
    scheme_spec,
)
from fnapprox.lbfgs import LbfgsConfig, minimize
from fnapprox.mlp import (
    DEFAULT_HIDDEN,
    MlpArchitecture,
    MlpModel,
    forward,
    forward_batch,
    init_xavier,
    loss_and_grad,
    param_count,
    permute_hidden_neurons,
    unpack,
)
from fnapprox.rng import Prng, derive_seed

F = BenchmarkId
SEEDS_5 = (1, 2, 3, 4, 5)
SEEDS_3 = (1, 2, 3)


def report(criterion: int, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status}{' - ' + detail if detail else ''}")
    return passed


def test_criterion_1_parameter_count_exactness():
    expected = {
        (1, DEFAULT_HIDDEN): 17951,
        (3, DEFAULT_HIDDEN): 18151,
        (5, DEFAULT_HIDDEN): 18351,
        (7, DEFAULT_HIDDEN): 18551,
        (1, (102, 102, 52, 52)): 18875,
    }
    results = {
        key: param_count(MlpArchitecture(input_dim=d, hidden_widths=w))
        for key, value in expected.items()
        for d, w in [key]
    }
    ok = all(results[k] == v for k, v in expected.items())
    assert report(1, ok, f"counts={sorted(results.values())}")


def test_criterion_2_gradient_correctness():
    h = 1e-5
    rel_tol, abs_floor = 1e-6, 1e-10
    coords_per_case = 180
    worst = 0.0
    case_prng = Prng(2024)
    for case in range(100):
        d = (1, 3, 5, 7)[case % 4]
        arch = MlpArchitecture(input_dim=d, hidden_widths=DEFAULT_HIDDEN)
        model = init_xavier(arch, Prng(derive_seed(case, "grad-check")))
        X = case_prng.uniform_n(8 * d, 0.0, 2.0 * math.pi).reshape(8, d)
        Y = case_prng.uniform_n(8, -2.0, 2.0)
        _, grad = loss_and_grad(model, X, Y)

        # stratified coordinate sample: every layer's weight and bias
        # blocks are represented in every case
        n = model.params.size
        idx = set()
        offset = 0
        for fi, fo in arch.layer_dims:
            w_n, b_n = fi * fo, fo
            for _ in range(coords_per_case // (2 * len(arch.layer_dims))):
                idx.add(offset + int(case_prng.uniform(0, w_n)))
                idx.add(offset + w_n + int(case_prng.uniform(0, b_n)))
            offset += w_n + b_n
        for i in sorted(idx):
            p = model.params.copy()
            p[i] += h
            fp, _ = loss_and_grad(MlpModel(arch=arch, params=p), X, Y)
            p[i] -= 2 * h
            fm, _ = loss_and_grad(MlpModel(arch=arch, params=p), X, Y)
            fd = (fp - fm) / (2 * h)
            err = abs(grad[i] - fd)
            bound = max(rel_tol * max(abs(grad[i]), abs(fd)), abs_floor)
            worst = max(worst, err / bound)
            if err > bound:
                assert report(2, False, f"case {case} coord {i}: err {err:.2e}")
    assert report(2, True, f"worst err/bound ratio {worst:.3f}")


def test_criterion_3_symmetry_properties():
    # (a) full hidden-neuron permutation is exact symmetry
    arch = MlpArchitecture(input_dim=5, hidden_widths=DEFAULT_HIDDEN)
    model = init_xavier(arch, Prng(31))
    inputs = expand_xs(Prng(32).uniform_n(100, 0.0, 2.0 * math.pi),
                       ExpansionConfig(k=2, scheme=ConstantScheme.PI))
    base = forward_batch(model, inputs)
    shuffle = Prng(33)
    max_dev = 0.0
    for layer, width in enumerate(arch.hidden_widths):
        perm = np.argsort(shuffle.uniform_n(width, 0.0, 1.0))
        permuted = permute_hidden_neurons(model, layer, perm)
        max_dev = max(max_dev, float(np.max(np.abs(forward_batch(permuted, inputs) - base))))
    ok_a = max_dev <= 1e-12

    # (b) swapping two constant-channel first-layer weights is not a
    # symmetry: the output must move for almost every random model
    changed = 0
    x = expand(1.7, ExpansionConfig(k=2, scheme=ConstantScheme.PI))
    for seed in range(100):
        m = init_xavier(arch, Prng(derive_seed(seed, "partial-swap")))
        before = forward(m, x)
        W1, _ = unpack(m.arch, m.params)[0]
        W1[3, 0], W1[4, 0] = W1[4, 0], W1[3, 0]  # channel 0 is constant
        if abs(forward(m, x) - before) > 1e-9:
            changed += 1
    ok_b = changed >= 99
    assert report(3, ok_a and ok_b,
                  f"permutation dev {max_dev:.2e}; swaps changed {changed}/100")


def test_criterion_4_optimizer_soundness():
    lam = np.linspace(1.0, 10.0, 10)

    def quad(x):
        return float(0.5 * np.dot(lam, x * x)), lam * x

    res_q = minimize(quad, np.ones(10), LbfgsConfig(max_iterations=25))
    ok_quad = (np.max(np.abs(res_q.grad)) <= 1e-10) and len(res_q.trace) <= 25

    def rosen(x):
        a, b = x
        f = 100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2
        g = np.array([-400.0 * a * (b - a * a) - 2.0 * (1.0 - a),
                      200.0 * (b - a * a)])
        return float(f), g

    res_r = minimize(rosen, np.array([-1.2, 1.0]),
                     LbfgsConfig(max_iterations=200, grad_tolerance=1e-12))
    ok_rosen = res_r.loss < 1e-12 and len(res_r.trace) <= 200

    mono = True
    for res in (res_q, res_r):
        losses = res.trace.losses()
        mono &= all(b <= a for a, b in zip(losses, losses[1:]))
    assert report(4, ok_quad and ok_rosen and mono,
                  f"quad iters {len(res_q.trace)}, rosen f {res_r.loss:.2e}")


@pytest.mark.slow
def test_criterion_5_f1_directional_reproduction():
    """F1 case study at the default training settings: the 5-D expansion should
    beat the baseline's median final test MSE by at least 10x.

    Currently red: the baseline's plateau-stall is bimodal across seeds
    in this implementation (it escapes on some), so the median gap lands
    near 4x, not 10x. See the pairwise majority and the mean gap in the
    printed detail; the analysis of every configuration tried lives in
    the project notes.
    """
    mses = {}
    for name in ("standard", "exp5"):
        mses[name] = [
            run_experiment(F.F1, MODEL_CONFIGS[name], seed).final_test_mse
            for seed in SEEDS_5
        ]
    med_std = float(np.median(mses["standard"]))
    med_exp = float(np.median(mses["exp5"]))
    pairwise_wins = sum(e < s for e, s in zip(mses["exp5"], mses["standard"]))
    ok = med_exp <= 0.1 * med_std
    assert report(
        5, ok,
        f"median std {med_std:.3e} vs exp5 {med_exp:.3e} "
        f"(ratio {med_exp / med_std:.3f}, bar 0.1); exp5 wins "
        f"{pairwise_wins}/5 pairwise; means {np.mean(mses['standard']):.3e} "
        f"vs {np.mean(mses['exp5']):.3e}")


@pytest.mark.slow
def test_criterion_6_smoke_table_ordering():
    cfg = LbfgsConfig(max_iterations=150)
    report_suite = run_dimension_ablation(SEEDS_5, None, train_cfg=cfg,
                                          functions=SMOKE_FUNCTIONS, plots=False)
    means = {
        name: float(np.mean([r.final_test_mse
                             for r in report_suite.select(config=name)]))
        for name in ("standard", "exp5", "adjusted")
    }
    ok = means["exp5"] < means["standard"] and means["adjusted"] > means["exp5"]
    assert report(6, ok, f"means std {means['standard']:.3e}, "
                         f"exp5 {means['exp5']:.3e}, adj {means['adjusted']:.3e}")


@pytest.mark.slow
def test_criterion_7_constant_scheme_ordering():
    specs = [scheme_spec(ConstantScheme.PI), scheme_spec(ConstantScheme.ZERO)]
    runs = run_grid(ALL_FUNCTIONS, specs, SEEDS_3)
    rep = SuiteReport(runs=runs, baseline="const-pi", seeds=SEEDS_3)
    wins = 0
    for fn in ALL_FUNCTIONS:
        pi_mean = np.mean([r.final_test_mse for r in rep.select("const-pi", fn)])
        zero_mean = np.mean([r.final_test_mse for r in rep.select("const-zero", fn)])
        wins += pi_mean <= zero_mean
    ok = wins >= 6
    assert report(7, ok, f"all-pi wins {wins}/10 functions")


def test_criterion_8_suite_determinism(tmp_path):
    cfg = LbfgsConfig(max_iterations=8)
    dirs = []
    for label, jobs in (("a", 1), ("b", 2)):
        out = tmp_path / label
        run_dimension_ablation((1, 2), out, train_cfg=cfg,
                               functions=(F.F1, F.F10), jobs=jobs, plots=False)
        dirs.append(out)
    a, b = dirs
    mismatches = []
    files = sorted(p.relative_to(a) for p in a.rglob("*")
                   if p.is_file() and p.suffix in (".csv", ".json"))
    for rel in files:
        if (a / rel).read_bytes() != (b / rel).read_bytes():
            mismatches.append(str(rel))
    ok = not mismatches and len(files) > 0
    assert report(8, ok, f"{len(files)} artifacts compared"
                         + (f"; mismatch {mismatches}" if mismatches else ""))


def test_criterion_9_benchmark_exactness():
    checks = [
        (F.F1, 0.0, 0.0),
        (F.F1, math.pi / 2, 1.0),
        (F.F2, math.pi / 8, 1.0),
        (F.F3, math.pi / 4, 0.5),
        (F.F4, math.pi / 2, 1.0),
        (F.F8, 0.0, 0.0),
        (F.F9, 0.0, 2.0 - 2.0**-19),
        (F.F10, math.pi, 1.0),
        (F.F10, 0.0, 0.0),
    ]
    exact_ok = all(abs(evaluate(fn, x) - want) <= 1e-12 for fn, x, want in checks)

    periodic_ok = True
    xs = Prng(91).uniform_n(100, 0.0, 2.0 * math.pi)
    for fn in (F.F1, F.F2, F.F4, F.F10):
        periodic_ok &= bool(np.all(np.abs(evaluate(fn, xs)
                                          - evaluate(fn, xs + 2.0 * math.pi)) <= 1e-12))
    saw_period = 2.0 * math.pi / 4.0
    periodic_ok &= bool(np.all(np.abs(evaluate(F.F3, xs)
                                      - evaluate(F.F3, xs + saw_period)) <= 1e-12))
    assert report(9, exact_ok and periodic_ok,
                  f"analytic values {'ok' if exact_ok else 'BAD'}, "
                  f"periodicity {'ok' if periodic_ok else 'BAD'}")
