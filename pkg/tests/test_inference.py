import numpy as np
import pytest

from tracebounds import (
    BootstrapConfig,
    Dataset,
    ResampleUnit,
    bootstrap_replicates,
    estimate_te_dim,
    percentile_ci,
)
from tracebounds.errors import (
    AllReplicatesFailed,
    InvariantViolation,
    MissingBlockLabels,
)


def _te(ds: Dataset) -> float:
    return estimate_te_dim(ds).te_hat


def test_config_validation():
    with pytest.raises(InvariantViolation):
        BootstrapConfig(replicates=1)
    with pytest.raises(InvariantViolation):
        BootstrapConfig(level=1.0)
    with pytest.raises(InvariantViolation):
        BootstrapConfig(seed=-1)
    with pytest.raises(InvariantViolation):
        BootstrapConfig(seed=2**64)


def test_constant_statistic_gives_point_interval(toy):
    res = percentile_ci(lambda ds: 3.25, toy, BootstrapConfig(replicates=50, seed=0))
    assert res.lo == res.hi == 3.25
    assert res.values.shape == (50,)
    # a resample can drop an arm on a 6-row dataset; those count as failed
    assert res.n_failed == int(np.isnan(res.values).sum())
    good = res.values[np.isfinite(res.values)]
    assert (good == 3.25).all()


def test_same_seed_bit_identical(toy):
    cfg = BootstrapConfig(replicates=200, seed=42)
    a = percentile_ci(_te, toy, cfg)
    b = percentile_ci(_te, toy, cfg)
    np.testing.assert_array_equal(a.values, b.values)
    assert (a.lo, a.hi) == (b.lo, b.hi)


def test_different_seeds_differ(toy):
    a = percentile_ci(_te, toy, BootstrapConfig(replicates=200, seed=1))
    b = percentile_ci(_te, toy, BootstrapConfig(replicates=200, seed=2))
    assert not np.array_equal(a.values, b.values)


def test_threads_do_not_change_values(toy):
    cfg = BootstrapConfig(replicates=300, seed=9)
    serial, _ = bootstrap_replicates(_te, toy, cfg, threads=1)
    quad, _ = bootstrap_replicates(_te, toy, cfg, threads=4)
    np.testing.assert_array_equal(serial, quad)


def test_interval_matches_reconstructed_replicate_stream(toy):
    # replay the documented per-replicate stream: Philox keyed by (seed, r),
    # n uniform row draws, linear quantiles over the surviving values
    cfg = BootstrapConfig(replicates=100, seed=13, level=0.9)
    res = percentile_ci(_te, toy, cfg)
    vals = []
    for r in range(cfg.replicates):
        rng = np.random.Generator(np.random.Philox(key=(13 << 64) | r))
        idx = rng.integers(0, toy.n, toy.n)
        try:
            vals.append(_te(toy.take(idx)))
        except Exception:
            continue
    lo, hi = np.quantile(np.asarray(vals), [0.05, 0.95], method="linear")
    assert res.lo == lo
    assert res.hi == hi
    assert res.n_failed == cfg.replicates - len(vals)


def test_failed_replicates_counted_not_retried(toy):
    calls = {"n": 0}

    def flaky(ds):
        calls["n"] += 1
        if calls["n"] == 1:
            return 0.0  # base run must succeed
        if calls["n"] % 3 == 0:
            raise ValueError("boom")
        if calls["n"] % 5 == 0:
            return float("nan")
        return 1.0

    cfg = BootstrapConfig(replicates=60, seed=0)
    values, n_failed = bootstrap_replicates(flaky, toy, cfg)
    # at most one statistic call per replicate plus the base run: no retries
    assert calls["n"] <= cfg.replicates + 1
    assert n_failed == int(np.isnan(values[:, 0]).sum())
    assert n_failed > 0


def test_all_failed_raises(toy):
    def stat(ds):
        if ds is toy:
            return 0.0  # the base run sees the original object
        raise RuntimeError("never works on resamples")

    with pytest.raises(AllReplicatesFailed):
        percentile_ci(stat, toy, BootstrapConfig(replicates=10, seed=0))


def test_base_run_failure_propagates(toy):
    def stat(ds):
        raise KeyError("bad statistic")

    with pytest.raises(KeyError):
        percentile_ci(stat, toy, BootstrapConfig(replicates=10, seed=0))


def test_vector_statistic_width(toy):
    cfg = BootstrapConfig(replicates=25, seed=3)
    values, n_failed = bootstrap_replicates(lambda ds: (1.0, 2.0, 3.0), toy, cfg)
    assert values.shape == (25, 3)
    assert n_failed == 0
    np.testing.assert_array_equal(values, np.tile([1.0, 2.0, 3.0], (25, 1)))


def test_block_resampling_draws_whole_blocks():
    ds = Dataset(
        y=np.arange(8.0),
        d=[1, 1, 0, 0, 1, 1, 0, 0],
        m=[1, 1, 0, 0, 1, 0, 0, 0],
        block=["a", "a", "b", "b", "c", "c", "d", "d"],
    )
    sizes = []

    def stat(sub: Dataset) -> float:
        sizes.append(sub.n)
        # within any resample, each block label appears a multiple of 2 times
        labels, counts = np.unique(sub.block, return_counts=True)
        assert (counts % 2 == 0).all()
        return 0.0

    cfg = BootstrapConfig(replicates=30, seed=5, resample_unit=ResampleUnit.BLOCK)
    bootstrap_replicates(stat, ds, cfg)
    # four blocks of two rows are drawn with replacement, so n is always 8
    assert set(sizes[1:]) == {8}


def test_block_resampling_needs_labels(toy):
    cfg = BootstrapConfig(replicates=10, seed=0, resample_unit=ResampleUnit.BLOCK)
    with pytest.raises(MissingBlockLabels):
        bootstrap_replicates(_te, toy, cfg)


def test_interval_brackets_replicate_range(toy):
    res = percentile_ci(_te, toy, BootstrapConfig(replicates=500, seed=11))
    good = res.values[np.isfinite(res.values)]
    assert res.lo <= res.hi
    assert good.min() <= res.lo
    assert res.hi <= good.max()
