"""Limited-memory BFGS with a strong Wolfe line search.

The inverse-Hessian estimate is applied implicitly through the two-loop
recursion over the last ``history_size`` curvature pairs, scaled by
gamma = s.y / y.y from the most recent pair. Steps are accepted only
when they satisfy both the Armijo sufficient-decrease condition and the
strong curvature condition, so stored pairs always have s.y > 0 and the
objective sequence is strictly decreasing.

The objective oracle returns (value, gradient) in one call; every trial
step in the line search therefore costs exactly one evaluation.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .benchmarks import format_float
from .vecmath import norm_inf


class StopReason(Enum):
    GRAD_TOL = "grad_tol"
    MAX_ITER = "max_iter"
    LINE_SEARCH_FAIL = "line_search_fail"


@dataclass(frozen=True)
class LbfgsConfig:
    learning_rate: float = 1.0          # initial trial step of every line search
    max_iterations: int = 500
    grad_tolerance: float = 1e-10       # infinity-norm threshold on the gradient
    grad_tolerance_relative: bool = False  # scale threshold by the initial grad norm
    history_size: int = 100
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search_evals: int = 25

    def __post_init__(self):
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.history_size < 1:
            raise ValueError("history_size must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.max_line_search_evals < 1:
            raise ValueError("max_line_search_evals must be at least 1")


@dataclass
class TraceRecord:
    iteration: int       # 1-based outer iteration index
    loss: float          # objective value at the accepted iterate
    grad_inf_norm: float
    step_len: float
    fevals: int          # oracle evaluations spent in this iteration


@dataclass
class ConvergenceTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "train_mse", "grad_inf_norm", "step_len", "fevals"])
            for r in self.records:
                writer.writerow(
                    [r.iteration, format_float(r.loss), format_float(r.grad_inf_norm),
                     format_float(r.step_len), r.fevals]
                )


@dataclass
class LbfgsState:
    params: np.ndarray
    grad: np.ndarray
    history: deque  # of (s, y, rho) with s.y > 0, oldest first
    iteration: int = 0
    last_loss: float = math.inf


def two_loop_direction(state: LbfgsState) -> np.ndarray:
    """Search direction -H g from the implicit inverse-Hessian estimate."""
    g = state.grad
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient must be finite")
    q = -g.copy()
    alphas = []
    for s, y, rho in reversed(state.history):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if state.history:
        s, y, _ = state.history[-1]
        gamma = float(np.dot(s, y) / np.dot(y, y))
    else:
        gamma = 1.0
    r = gamma * q
    for (s, y, rho), a in zip(state.history, reversed(alphas)):
        beta = rho * float(np.dot(y, r))
        r += (a - beta) * s
    return r


def _cubic_min(x1, f1, g1, x2, f2, g2, lo, hi):
    """Minimizer of the cubic through two (x, f, f') points, clamped to
    [lo, hi]; midpoint fallback when the fit is degenerate."""
    if not all(map(math.isfinite, (x1, f1, g1, x2, f2, g2))):
        return 0.5 * (lo + hi)
    if x1 == x2:
        return 0.5 * (lo + hi)
    d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2)
    d2_sq = d1 * d1 - g1 * g2
    if d2_sq < 0.0:
        return 0.5 * (lo + hi)
    d2 = math.sqrt(d2_sq)
    if x1 <= x2:
        pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
    else:
        pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
    if not math.isfinite(pos):
        return 0.5 * (lo + hi)
    return min(max(pos, lo), hi)


@dataclass
class LineSearchResult:
    alpha: float
    value: float
    grad: np.ndarray
    evals: int
    converged: bool   # both strong Wolfe conditions hold
    failed: bool      # not even a sufficient-decrease point was found


_GROW = 2.0


def strong_wolfe_search(f, x: np.ndarray, d: np.ndarray, f0: float,
                        g0td: float, cfg: LbfgsConfig) -> LineSearchResult:
    """Bracket-and-zoom search for a strong-Wolfe step along d.

    The first trial is cfg.learning_rate. If the evaluation budget runs
    out, the best point satisfying the Armijo condition is returned with
    converged=False; with no such point the search reports failure.
    """
    if g0td >= 0.0:
        raise ValueError("line search requires a descent direction (g.d < 0)")
    c1, c2 = cfg.wolfe_c1, cfg.wolfe_c2
    budget = cfg.max_line_search_evals
    evals = 0
    best = None  # (alpha, value, grad) of the lowest Armijo-satisfying point

    def trial(alpha):
        nonlocal evals, best
        value, grad = f(x + alpha * d)
        evals += 1
        if not math.isfinite(value):
            return math.inf, grad, math.inf
        # strict decrease required: at machine-precision steps the Armijo
        # bound rounds to f0 and a no-progress point must not be returned
        if value <= f0 + c1 * alpha * g0td and value < f0 \
                and (best is None or value < best[1]):
            best = (alpha, value, grad)
        return value, grad, float(np.dot(grad, d))

    def finish(converged):
        if best is None:
            return LineSearchResult(0.0, f0, np.full_like(d, np.nan), evals, False, True)
        return LineSearchResult(best[0], best[1], best[2], evals, converged, False)

    def zoom(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi):
        # invariant: a_lo satisfies Armijo and has the lowest value seen;
        # the minimizer lies between a_lo and a_hi
        while evals < budget:
            width = abs(a_hi - a_lo)
            lo_b, hi_b = min(a_lo, a_hi), max(a_lo, a_hi)
            if width <= 1e-16 * max(1.0, abs(a_lo)):
                break  # bracket collapsed to machine precision
            a_j = _cubic_min(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi, lo_b, hi_b)
            # keep strictly interior so the bracket always shrinks
            margin = 0.1 * width
            if min(a_j - lo_b, hi_b - a_j) < margin:
                a_j = 0.5 * (lo_b + hi_b)
            f_j, grad_j, g_j = trial(a_j)
            if f_j > f0 + c1 * a_j * g0td or f_j >= f_lo:
                a_hi, f_hi, g_hi = a_j, f_j, g_j
            else:
                if abs(g_j) <= -c2 * g0td:
                    return LineSearchResult(a_j, f_j, grad_j, evals, True, False)
                if g_j * (a_hi - a_lo) >= 0.0:
                    a_hi, f_hi, g_hi = a_lo, f_lo, g_lo
                a_lo, f_lo, g_lo = a_j, f_j, g_j
        return finish(False)

    a_prev, f_prev, g_prev = 0.0, f0, g0td
    alpha = cfg.learning_rate
    first = True
    while evals < budget:
        f_a, grad_a, g_a = trial(alpha)
        if f_a > f0 + c1 * alpha * g0td or (not first and f_a >= f_prev):
            return zoom(a_prev, f_prev, g_prev, alpha, f_a, g_a)
        if abs(g_a) <= -c2 * g0td:
            return LineSearchResult(alpha, f_a, grad_a, evals, True, False)
        if g_a >= 0.0:
            return zoom(alpha, f_a, g_a, a_prev, f_prev, g_prev)
        a_prev, f_prev, g_prev = alpha, f_a, g_a
        alpha *= _GROW
        first = False
    return finish(False)


@dataclass
class MinimizeResult:
    x: np.ndarray
    loss: float
    grad: np.ndarray
    trace: ConvergenceTrace
    stop_reason: StopReason
    total_evals: int


def minimize(f, x0: np.ndarray, cfg: LbfgsConfig | None = None,
             callback=None) -> MinimizeResult:
    """Minimize a (value, gradient) oracle from x0.

    Stops when the gradient infinity-norm drops below the tolerance, the
    iteration cap is reached, or the line search cannot make progress.
    One trace record is appended per accepted outer iteration.

    The dtype of x0 is preserved throughout (iterates, curvature pairs,
    two-loop recursion), so a float32 start reproduces a full
    single-precision training loop.
    """
    cfg = cfg or LbfgsConfig()
    x = np.array(x0)
    if x.dtype not in (np.float64, np.float32):
        x = x.astype(np.float64)
    loss, grad = f(x)
    grad = np.asarray(grad, dtype=x.dtype)
    if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
        raise ValueError("objective must be finite at the starting point")
    total_evals = 1

    threshold = cfg.grad_tolerance
    if cfg.grad_tolerance_relative:
        threshold *= max(norm_inf(grad), 1e-300)

    state = LbfgsState(params=x, grad=grad,
                       history=deque(maxlen=cfg.history_size), last_loss=loss)
    trace = ConvergenceTrace()
    stop = StopReason.MAX_ITER

    if norm_inf(grad) <= threshold:
        return MinimizeResult(x, loss, grad, trace, StopReason.GRAD_TOL, total_evals)

    for iteration in range(1, cfg.max_iterations + 1):
        d = two_loop_direction(state)
        g0td = float(np.dot(grad, d))
        if g0td >= 0.0:
            # numerically degenerate memory: fall back to steepest descent
            state.history.clear()
            d = -grad
            g0td = float(np.dot(grad, d))
            if g0td >= 0.0:
                stop = StopReason.LINE_SEARCH_FAIL
                break

        ls = strong_wolfe_search(f, x, d, loss, g0td, cfg)
        total_evals += ls.evals
        if ls.failed:
            stop = StopReason.LINE_SEARCH_FAIL
            break

        s = ls.alpha * d
        x = x + s
        new_grad = np.asarray(ls.grad, dtype=x.dtype)
        y = new_grad - grad
        sy = float(np.dot(s, y))
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            state.history.append((s, y, 1.0 / sy))
        loss, grad = ls.value, new_grad
        state.params = x
        state.grad = grad
        state.iteration = iteration
        state.last_loss = loss

        record = TraceRecord(iteration, loss, norm_inf(grad), ls.alpha, ls.evals)
        trace.records.append(record)
        if callback is not None:
            callback(record)

        if norm_inf(grad) <= threshold:
            stop = StopReason.GRAD_TOL
            break

    return MinimizeResult(x, loss, grad, trace, stop, total_evals)
