"""Ten 1-D benchmark functions on [0, 2*pi] and their sampling protocol.

Training sets are uniform random draws (sorted ascending, noise-free
targets); test sets are a closed equispaced grid including both
endpoints. Evaluators are total on finite inputs and vectorized.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .rng import Prng

TWO_PI = 2.0 * math.pi
DOMAIN = (0.0, TWO_PI)

WEIERSTRASS_TERMS = 20  # partial sum n = 0..19


class Category(Enum):
    SMOOTH = "smooth"
    DISCONTINUOUS = "discontinuous"
    NON_DIFFERENTIABLE = "non_differentiable"
    COMPLEX_SPECTRUM = "complex_spectrum"


class BenchmarkId(Enum):
    F1 = "F1"   # multi-frequency sine combination
    F2 = "F2"   # square wave
    F3 = "F3"   # sawtooth wave
    F4 = "F4"   # triangle wave
    F5 = "F5"   # amplitude-modulated sine
    F6 = "F6"   # frequency chirp
    F7 = "F7"   # duty-cycle modulated square wave
    F8 = "F8"   # damped multi-frequency oscillation
    F9 = "F9"   # Weierstrass partial sum
    F10 = "F10"  # narrow comb pulse

    @property
    def category(self) -> Category:
        return _CATEGORIES[self]

    @property
    def label(self) -> str:
        return _LABELS[self]


_CATEGORIES = {
    BenchmarkId.F1: Category.SMOOTH,
    BenchmarkId.F2: Category.DISCONTINUOUS,
    BenchmarkId.F3: Category.DISCONTINUOUS,
    BenchmarkId.F4: Category.COMPLEX_SPECTRUM,
    BenchmarkId.F5: Category.SMOOTH,
    BenchmarkId.F6: Category.SMOOTH,
    BenchmarkId.F7: Category.DISCONTINUOUS,
    BenchmarkId.F8: Category.NON_DIFFERENTIABLE,
    BenchmarkId.F9: Category.NON_DIFFERENTIABLE,
    BenchmarkId.F10: Category.COMPLEX_SPECTRUM,
}

_LABELS = {
    BenchmarkId.F1: "multi-frequency sine",
    BenchmarkId.F2: "square wave",
    BenchmarkId.F3: "sawtooth wave",
    BenchmarkId.F4: "triangle wave",
    BenchmarkId.F5: "modulated sine",
    BenchmarkId.F6: "frequency chirp",
    BenchmarkId.F7: "duty-cycle square wave",
    BenchmarkId.F8: "damped oscillation",
    BenchmarkId.F9: "Weierstrass partial sum",
    BenchmarkId.F10: "comb pulse",
}

_SAW_PERIOD = TWO_PI / 4.0


def _f1(x):
    return np.sin(x) + 0.5 * np.sin(4.0 * x) + 0.25 * np.sin(8.0 * x)


def _f2(x):
    return np.sign(np.sin(4.0 * x))


def _f3(x):
    # np.mod keeps the result in [0, period) for any finite x
    return np.mod(x, _SAW_PERIOD) / _SAW_PERIOD


def _f4(x):
    return 2.0 * np.arcsin(np.sin(x)) / math.pi


def _f5(x):
    return (1.0 + 0.5 * np.sin(0.5 * x)) * np.sin(8.0 * x)


def _f6(x):
    return np.sin(x + 0.1 * x * x)


def _f7(x):
    return np.sign(np.sin(4.0 * x) - 0.3 * np.sin(0.5 * x))


def _f8(x):
    decay = np.exp(-0.05 * x)
    return np.sin(x) * decay + 0.2 * np.sin(8.0 * x) * decay


def _f9(x):
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(x)
    for n in range(WEIERSTRASS_TERMS):
        total += np.cos(3.0**n * x) / 2.0**n
    return total


def _f10(x):
    return np.where(np.abs(np.mod(x, TWO_PI) - math.pi) < 0.2, 1.0, 0.0)


_EVALUATORS = {
    BenchmarkId.F1: _f1,
    BenchmarkId.F2: _f2,
    BenchmarkId.F3: _f3,
    BenchmarkId.F4: _f4,
    BenchmarkId.F5: _f5,
    BenchmarkId.F6: _f6,
    BenchmarkId.F7: _f7,
    BenchmarkId.F8: _f8,
    BenchmarkId.F9: _f9,
    BenchmarkId.F10: _f10,
}


def evaluate(fn: BenchmarkId, x):
    """Closed-form value of benchmark ``fn`` at ``x`` (scalar or array)."""
    if fn not in _EVALUATORS:
        raise ValueError(f"unknown benchmark id: {fn!r}")
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("benchmark input must be finite")
    out = _EVALUATORS[fn](arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return np.asarray(out, dtype=np.float64)


def parse_benchmark_id(name: str) -> BenchmarkId:
    try:
        return BenchmarkId(name.upper())
    except ValueError:
        valid = ", ".join(f.value for f in BenchmarkId)
        raise ValueError(f"unknown benchmark {name!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class Dataset:
    """Sampled inputs with exact (noise-free) targets."""

    xs: np.ndarray
    ys: np.ndarray
    kind: str  # "train" or "test"

    def __len__(self) -> int:
        return self.xs.shape[0]


def sample_train(fn: BenchmarkId, prng: Prng, n: int = 1000) -> Dataset:
    """n uniform draws over the domain, sorted ascending."""
    if n < 1:
        raise ValueError("training set needs at least one point")
    xs = np.sort(prng.uniform_n(n, DOMAIN[0], DOMAIN[1]))
    return Dataset(xs=xs, ys=evaluate(fn, xs), kind="train")


def sample_test(fn: BenchmarkId, n: int = 100) -> Dataset:
    """Equispaced grid over the closed domain, both endpoints included."""
    if n < 2:
        raise ValueError("test grid needs at least two points")
    xs = np.linspace(DOMAIN[0], DOMAIN[1], n)
    return Dataset(xs=xs, ys=evaluate(fn, xs), kind="test")


def format_float(v: float) -> str:
    """17-significant-digit decimal rendering (round-trips exactly)."""
    return "%.17g" % v


def write_dataset_csv(ds: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in zip(ds.xs, ds.ys):
            writer.writerow([format_float(x), format_float(y)])


def read_dataset_csv(path: str | Path, kind: str = "train") -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y"]:
            raise ValueError(f"expected header x,y in {path}, got {header}")
        xs, ys = [], []
        for row in reader:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
    return Dataset(xs=np.array(xs), ys=np.array(ys), kind=kind)
