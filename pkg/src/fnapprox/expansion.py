"""Constant-padding input expansion.

A scalar input x becomes [c_1..c_k, x, c_{k+1}..c_2k] of length 2k+1:
the constant channels carry no information about x but give each
first-layer neuron an extra weighted bias term, which removes the exact
interchangeability of hidden neurons. k = 0 is the identity embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .benchmarks import Dataset


class ConstantScheme(Enum):
    PI = "pi"
    ZERO = "zero"
    ONE = "one"
    E = "e"
    MIXED = "mixed"  # (0, 1, e, pi), two channels before x and two after


_UNIFORM_VALUES = {
    ConstantScheme.PI: math.pi,
    ConstantScheme.ZERO: 0.0,
    ConstantScheme.ONE: 1.0,
    ConstantScheme.E: math.e,
}

_MIXED_CONSTANTS = (0.0, 1.0, math.e, math.pi)


def parse_scheme(name: str) -> ConstantScheme:
    try:
        return ConstantScheme(name.lower())
    except ValueError:
        valid = ", ".join(s.value for s in ConstantScheme)
        raise ValueError(f"unknown constant scheme {name!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class ExpansionConfig:
    """Pad count per side (k) and the constants that fill the channels.

    custom_constants overrides the named scheme with an arbitrary
    2k-tuple; the named schemes are the tested surface.
    """

    k: int
    scheme: ConstantScheme = ConstantScheme.PI
    custom_constants: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("expansion factor k must be non-negative")
        if self.custom_constants is not None:
            if len(self.custom_constants) != 2 * self.k:
                raise ValueError(
                    f"custom_constants needs 2k = {2 * self.k} values, "
                    f"got {len(self.custom_constants)}"
                )
        elif self.scheme is ConstantScheme.MIXED and self.k != 2:
            raise ValueError("the mixed scheme defines exactly four constants (k = 2)")

    @property
    def output_dim(self) -> int:
        return 2 * self.k + 1

    def constants(self) -> np.ndarray:
        """The 2k channel constants: first k go before x, last k after."""
        if self.custom_constants is not None:
            return np.asarray(self.custom_constants, dtype=np.float64)
        if self.scheme is ConstantScheme.MIXED:
            return np.asarray(_MIXED_CONSTANTS, dtype=np.float64)
        return np.full(2 * self.k, _UNIFORM_VALUES[self.scheme])


IDENTITY = ExpansionConfig(k=0)


def expand(x: float, cfg: ExpansionConfig) -> np.ndarray:
    """Embed scalar x at the center of the constant-padded vector."""
    if not math.isfinite(x):
        raise ValueError("input to expand must be finite")
    consts = cfg.constants()
    out = np.empty(cfg.output_dim)
    out[: cfg.k] = consts[: cfg.k]
    out[cfg.k] = x
    out[cfg.k + 1 :] = consts[cfg.k :]
    return out


def expand_xs(xs: np.ndarray, cfg: ExpansionConfig) -> np.ndarray:
    """Row-wise expansion of a 1-D input array into an (n, 2k+1) matrix."""
    xs = np.asarray(xs, dtype=np.float64)
    consts = cfg.constants()
    out = np.empty((xs.shape[0], cfg.output_dim))
    out[:, : cfg.k] = consts[: cfg.k]
    out[:, cfg.k] = xs
    out[:, cfg.k + 1 :] = consts[cfg.k :]
    return out


def expand_dataset(ds: Dataset, cfg: ExpansionConfig) -> np.ndarray:
    """Design matrix for a dataset; targets are unchanged by expansion."""
    return expand_xs(ds.xs, cfg)
