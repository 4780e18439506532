"""Percentile bootstrap with replayable per-replicate randomness.

Replicate r draws from a counter-based generator keyed by (seed, r), so
the stream a replicate sees does not depend on execution order. Serial
and threaded runs, and reruns of a single replicate, agree bit for bit.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import Dataset
from .errors import AllReplicatesFailed, InvariantViolation, MissingBlockLabels

_MASK64 = (1 << 64) - 1


class ResampleUnit(enum.Enum):
    ROW = "row"
    BLOCK = "block"


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 2000
    seed: int = 0
    level: float = 0.95
    resample_unit: ResampleUnit = ResampleUnit.ROW

    def __post_init__(self):
        if self.replicates < 2:
            raise InvariantViolation(f"need at least 2 replicates, got {self.replicates}")
        if not (0.0 < self.level < 1.0):
            raise InvariantViolation(f"level must be in (0, 1), got {self.level}")
        if not (0 <= self.seed <= _MASK64):
            raise InvariantViolation("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile interval plus the raw replicate statistics.

    ``values`` holds one entry per replicate in replicate order, NaN
    where evaluation failed; ``n_failed`` counts those NaNs. Failed
    replicates are excluded from the quantiles, never retried.
    """

    lo: float
    hi: float
    values: np.ndarray
    n_failed: int


def _replicate_rng(seed: int, r: int) -> np.random.Generator:
    key = ((seed & _MASK64) << 64) | (r & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def _block_index(ds: Dataset) -> list[np.ndarray]:
    if ds.block is None:
        raise MissingBlockLabels("block resampling needs a block column")
    if any(b is None for b in ds.block):
        raise MissingBlockLabels("block resampling needs a label on every unit")
    groups: dict[str, list[int]] = {}
    order: list[str] = []
    for i, b in enumerate(ds.block):
        if b not in groups:
            groups[b] = []
            order.append(b)
        groups[b].append(i)
    return [np.asarray(groups[b], dtype=np.intp) for b in order]


def bootstrap_replicates(
    statistic: Callable[[Dataset], object],
    ds: Dataset,
    cfg: BootstrapConfig,
    threads: int = 1,
) -> tuple[np.ndarray, int]:
    """Evaluate ``statistic`` on ``cfg.replicates`` resamples.

    ``statistic`` may return a scalar or a fixed-length vector; it must
    evaluate cleanly on the original dataset (that run determines the
    output width and its failure propagates). Per replicate, rows are
    drawn with replacement (or whole blocks when the config says so)
    and any exception or non-finite result marks the replicate failed.

    Returns ``(values, n_failed)`` where ``values`` has shape
    (replicates, width) with NaN rows for failures.
    """
    base = np.atleast_1d(np.asarray(statistic(ds), dtype=np.float64))
    width = base.shape[0]
    n = ds.n

    block_rows = _block_index(ds) if cfg.resample_unit is ResampleUnit.BLOCK else None

    def run_one(r: int) -> np.ndarray:
        rng = _replicate_rng(cfg.seed, r)
        if block_rows is None:
            idx = rng.integers(0, n, n)
        else:
            nb = len(block_rows)
            picks = rng.integers(0, nb, nb)
            idx = np.concatenate([block_rows[j] for j in picks])
        try:
            out = np.atleast_1d(np.asarray(statistic(ds.take(idx)), dtype=np.float64))
        except Exception:
            return np.full(width, np.nan)
        if out.shape != (width,) or not np.isfinite(out).all():
            return np.full(width, np.nan)
        return out

    if threads <= 1:
        rows = [run_one(r) for r in range(cfg.replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_one, range(cfg.replicates)))

    values = np.vstack(rows)
    n_failed = int(np.isnan(values[:, 0]).sum())
    return values, n_failed


def percentile_ci(
    statistic: Callable[[Dataset], float],
    ds: Dataset,
    cfg: BootstrapConfig,
    threads: int = 1,
) -> BootstrapResult:
    """Equal-tailed percentile interval for a scalar statistic.

    Quantiles interpolate linearly between order statistics of the
    successful replicates. Raises :class:`AllReplicatesFailed` when no
    replicate evaluates.
    """
    values, n_failed = bootstrap_replicates(statistic, ds, cfg, threads=threads)
    flat = values[:, 0]
    good = flat[np.isfinite(flat)]
    if good.size == 0:
        raise AllReplicatesFailed("no bootstrap replicate produced a value")
    tail = (1.0 - cfg.level) / 2.0
    lo, hi = np.quantile(good, [tail, 1.0 - tail], method="linear")
    return BootstrapResult(lo=float(lo), hi=float(hi), values=flat, n_failed=n_failed)
