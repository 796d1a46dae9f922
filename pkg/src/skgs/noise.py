"""Brownian increments for the three driving noises.

Each sample path carries increments dB0, dB1, dB2 ~ N(0, fine_dt) drawn from
a counter-based Philox stream keyed injectively by (master_seed, sample
index); the step and component indices address positions within that stream,
so regenerating any path is exact and order-independent.

Coarsening sums blocks of fine increments with a canonical dyadic reduction
(split at the largest power of two below the length).  For power-of-two
block sizes the floating-point operation tree of "sum the whole path" and
"sum the coarse increments" is identical, so refinement chains agree
bitwise, which flat left-to-right accumulation cannot guarantee.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

__all__ = [
    "GENERATOR_NAME",
    "NORMAL_METHOD",
    "NoiseIncrement",
    "BrownianPath",
    "sample_path",
    "sample_increments",
    "aggregate",
    "dyadic_sum",
]

GENERATOR_NAME = "philox4x64"
NORMAL_METHOD = "ziggurat"


@dataclass(frozen=True)
class NoiseIncrement:
    """One step's increments of the three Brownian motions."""

    dB0: float
    dB1: float
    dB2: float


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """A discrete Brownian path: increments[i] = (dB0, dB1, dB2) at step i."""

    master_seed: int
    sample_index: int
    fine_dt: float
    increments: np.ndarray  # shape (n_fine, 3)

    @property
    def n_fine(self) -> int:
        return self.increments.shape[0]

    def step(self, i: int) -> NoiseIncrement:
        row = self.increments[i]
        return NoiseIncrement(dB0=float(row[0]), dB1=float(row[1]), dB2=float(row[2]))


def _validate_key(master_seed: int, sample_index: int) -> None:
    if not 0 <= master_seed < 2**64:
        raise UsageError(f"master_seed must fit in uint64, got {master_seed}")
    if not 0 <= sample_index < 2**64:
        raise UsageError(f"sample_index must fit in uint64, got {sample_index}")


def sample_increments(
    master_seed: int, fine_dt: float, n_fine: int, sample_index: int = 0
) -> np.ndarray:
    """Draw the (n_fine, 3) increment array for one keyed sample path."""
    _validate_key(master_seed, sample_index)
    if fine_dt <= 0.0:
        raise UsageError(f"fine_dt must be positive, got {fine_dt}")
    if n_fine < 1:
        raise UsageError(f"n_fine must be >= 1, got {n_fine}")
    bitgen = np.random.Philox(key=np.array([master_seed, sample_index], dtype=np.uint64))
    rng = np.random.Generator(bitgen)
    return rng.standard_normal((n_fine, 3)) * np.sqrt(fine_dt)


def sample_path(
    master_seed: int, fine_dt: float, n_fine: int, sample_index: int = 0
) -> BrownianPath:
    """Generate one Brownian path; bitwise reproducible from its key."""
    inc = sample_increments(master_seed, fine_dt, n_fine, sample_index)
    return BrownianPath(
        master_seed=int(master_seed),
        sample_index=int(sample_index),
        fine_dt=float(fine_dt),
        increments=inc,
    )


def dyadic_sum(arr: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sum along axis with the canonical dyadic (pairwise) reduction."""
    n = arr.shape[axis]
    if n == 1:
        return np.take(arr, 0, axis=axis)
    mid = 1 << ((n - 1).bit_length() - 1)  # largest power of two < n
    lo = dyadic_sum(np.take(arr, range(mid), axis=axis), axis=axis)
    hi = dyadic_sum(np.take(arr, range(mid, n), axis=axis), axis=axis)
    return lo + hi


def aggregate(path: BrownianPath, k: int) -> BrownianPath:
    """Coarsen a path by summing blocks of k consecutive fine increments.

    k must divide n_fine.  k = 1 returns an identical copy; k = n_fine
    produces the single whole-interval increment.
    """
    if k < 1:
        raise UsageError(f"aggregation factor must be >= 1, got {k}")
    n = path.n_fine
    if n % k != 0:
        raise UsageError(f"aggregation factor {k} does not divide n_fine={n}")
    if k == 1:
        coarse = path.increments.copy()
    else:
        blocks = path.increments.reshape(n // k, k, 3)
        coarse = dyadic_sum(blocks, axis=1)
    return BrownianPath(
        master_seed=path.master_seed,
        sample_index=path.sample_index,
        fine_dt=path.fine_dt * k,
        increments=coarse,
    )
