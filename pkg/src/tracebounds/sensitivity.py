"""Sensitivity analysis linking the overall effect to the reactive group.

The overall average effect decomposes exactly as

    te = trace * p + trace0 * (1 - p)

where ``p`` is the probability of reacting under treatment, ``trace``
the average effect among reactors and ``trace0`` among non-reactors.
Fixing a value (or range) for the unidentified ``trace0`` therefore
pins down (or brackets) ``trace``. Everything in this module is that
one linear map, applied carefully.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bounds import BoundKind, Interval, no_assumption_bounds
from .data import Analysis, Dataset, validate_for
from .errors import (
    AllReplicatesFailed,
    DegenerateP,
    DegenerateShare,
    InvariantViolation,
    OutOfSupportWarning,
    SignUndefined,
)
from .estimators import StrataShares, TEMethod, estimate_p_m1, te_point
from .inference import BootstrapConfig, bootstrap_replicates


class AssumptionKind(enum.Enum):
    POINT = "point"
    INTERVAL = "interval"
    GRID = "grid"
    ZERO = "zero"
    SAME_SIGN_SMALLER = "same_sign_smaller"
    OPPOSITE_SIGN = "opposite_sign"
    EQUAL_EFFECTS = "equal_effects"


_GRID_EPS = 1e-9


@dataclass(frozen=True)
class AssumptionSpec:
    """A restriction on the non-reactive effect ``trace0``.

    Construct through the classmethods; positional fields depend on the
    kind (POINT uses ``value``, INTERVAL uses ``lo``/``hi``, GRID adds
    ``step``; named presets carry no numbers).
    """

    kind: AssumptionKind
    value: float | None = None
    lo: float | None = None
    hi: float | None = None
    step: float | None = None

    def __post_init__(self):
        k = self.kind
        if k is AssumptionKind.POINT:
            if self.value is None or not math.isfinite(self.value):
                raise InvariantViolation("POINT assumption needs a finite value")
        elif k in (AssumptionKind.INTERVAL, AssumptionKind.GRID):
            if self.lo is None or self.hi is None:
                raise InvariantViolation(f"{k.name} assumption needs lo and hi")
            if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
                raise InvariantViolation(f"{k.name} endpoints must be finite")
            if self.lo > self.hi:
                raise InvariantViolation(f"{k.name} needs lo <= hi")
            if k is AssumptionKind.GRID:
                if self.step is None or not (self.step > 0):
                    raise InvariantViolation("GRID needs a positive step")

    @classmethod
    def point(cls, value: float) -> "AssumptionSpec":
        return cls(AssumptionKind.POINT, value=value)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "AssumptionSpec":
        return cls(AssumptionKind.INTERVAL, lo=lo, hi=hi)

    @classmethod
    def grid(cls, lo: float, hi: float, step: float) -> "AssumptionSpec":
        return cls(AssumptionKind.GRID, lo=lo, hi=hi, step=step)

    @classmethod
    def zero(cls) -> "AssumptionSpec":
        return cls(AssumptionKind.ZERO)

    @classmethod
    def same_sign_smaller(cls) -> "AssumptionSpec":
        return cls(AssumptionKind.SAME_SIGN_SMALLER)

    @classmethod
    def opposite_sign(cls) -> "AssumptionSpec":
        return cls(AssumptionKind.OPPOSITE_SIGN)

    @classmethod
    def equal_effects(cls) -> "AssumptionSpec":
        return cls(AssumptionKind.EQUAL_EFFECTS)

    def grid_values(self) -> list[float]:
        """Grid points, both endpoints included, final step clamped to hi."""
        if self.kind is not AssumptionKind.GRID:
            raise InvariantViolation("grid_values applies to GRID assumptions only")
        lo, hi, step = self.lo, self.hi, self.step
        span = hi - lo
        n = int(math.floor(span / step + _GRID_EPS))
        vals = [lo + k * step for k in range(n + 1)]
        if vals[-1] < hi - _GRID_EPS * max(1.0, abs(hi)):
            vals.append(hi)
        else:
            vals[-1] = hi
        return vals


# -- the linear map ----------------------------------------------------------


def trace_from_trace0(te: float, p: float, trace0: float) -> float:
    """Reactive-group effect implied by ``trace0``: (te - trace0(1-p)) / p."""
    if not (0.0 < p <= 1.0):
        raise DegenerateP(f"p must be in (0, 1], got {p}")
    return (te - trace0 * (1.0 - p)) / p


def trace0_from_trace(te: float, p: float, trace: float) -> float:
    """Inverse map: the non-reactive effect consistent with ``trace``."""
    if not (0.0 <= p < 1.0):
        raise DegenerateP(f"p must be in [0, 1), got {p}")
    return (te - trace * p) / (1.0 - p)


def threshold_trace0(te: float, p: float, target_trace: float) -> float:
    """How large the non-reactive effect must be for the reactive-group
    effect to sit exactly at ``target_trace``."""
    return trace0_from_trace(te, p, target_trace)


# -- preset intervals --------------------------------------------------------


def preset_interval(te: float, p: float, spec: AssumptionSpec) -> Interval:
    """Interval of reactive-group effects consistent with an assumption.

    The map is linear and decreasing in ``trace0`` (slope -(1-p)/p), so
    interval images flip order. Sign-based presets need te != 0; the
    opposite-sign preset yields a half-line whose infinite end survives
    until intersection with data-driven bounds.
    """
    if not (0.0 < p <= 1.0):
        raise DegenerateP(f"p must be in (0, 1], got {p}")
    kind = BoundKind.PRESET_IMPLIED
    k = spec.kind
    if k is AssumptionKind.ZERO:
        v = te / p
        return Interval(v, v, kind)
    if k is AssumptionKind.EQUAL_EFFECTS:
        return Interval(te, te, kind)
    if k is AssumptionKind.SAME_SIGN_SMALLER:
        if te == 0.0:
            raise SignUndefined("sign-based presets need a nonzero effect estimate")
        a, b = te, te / p
        return Interval(min(a, b), max(a, b), kind)
    if k is AssumptionKind.OPPOSITE_SIGN:
        if te == 0.0:
            raise SignUndefined("sign-based presets need a nonzero effect estimate")
        anchor = te / p
        if te > 0:
            return Interval(anchor, math.inf, kind)
        return Interval(-math.inf, anchor, kind)
    if k is AssumptionKind.POINT:
        v = trace_from_trace0(te, p, spec.value)
        return Interval(v, v, kind)
    # INTERVAL and GRID map their endpoint range through the line
    a = trace_from_trace0(te, p, spec.lo)
    b = trace_from_trace0(te, p, spec.hi)
    return Interval(min(a, b), max(a, b), kind)


def combined_region(a: Interval, b: Interval) -> Interval | None:
    """Intersection of two intervals, or None when they are disjoint.

    None means the assumption is inconsistent with the data-driven
    bounds; callers report it as an infeasible region, not an error.
    Confidence endpoints carry through as the intersection of the two
    bands when both inputs have them.
    """
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        return None
    ci_lo = ci_hi = None
    if a.ci_lo is not None and b.ci_lo is not None:
        ci_lo = max(a.ci_lo, b.ci_lo)
        ci_hi = min(a.ci_hi, b.ci_hi)
    return Interval(lo, hi, BoundKind.COMBINED, ci_lo=ci_lo, ci_hi=ci_hi)


# -- alternative assumption quantities ---------------------------------------


class AltQuantity(enum.Enum):
    Y0_GIVEN_C = "y0_given_c"
    Y0_GIVEN_NT = "y0_given_nt"


@dataclass(frozen=True)
class AltAssumption:
    """An assumed control-arm mean for one latent stratum."""

    quantity: AltQuantity
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InvariantViolation("assumed value must be finite")

    @classmethod
    def y0_given_c(cls, value: float) -> "AltAssumption":
        return cls(AltQuantity.Y0_GIVEN_C, value)

    @classmethod
    def y0_given_nt(cls, value: float) -> "AltAssumption":
        return cls(AltQuantity.Y0_GIVEN_NT, value)


def alt_quantity_to_trace0(
    mean_y1_m0: float,
    mean_y0_d0m0: float,
    shares: StrataShares,
    assumed: AltAssumption,
    y_range: tuple[float, float] | None = None,
) -> float:
    """Translate an assumption about one latent stratum into ``trace0``.

    Under monotone reaction the control m = 0 pool mixes treatment-only
    reactors and never-reactors with weights c : nt. Assuming the mean
    for one component backs out the other; the never-reactor component
    is the non-reactive counterfactual, so

        trace0 = mean_y1_m0 - E[y(0) | never-reactor].

    When ``y_range`` is given and the backed-out mean falls outside the
    observed outcome range, an :class:`OutOfSupportWarning` is issued
    (the algebra still returns; the caller judges plausibility).
    """
    pool = shares.c + shares.nt
    if pool <= 0:
        raise DegenerateShare("no mass on the control m=0 pool")
    w_nt = shares.nt / pool
    if assumed.quantity is AltQuantity.Y0_GIVEN_NT:
        ey0_nt = assumed.value
    else:
        if w_nt == 0:
            raise DegenerateShare("never-reactor share is zero; its mean cannot be backed out")
        ey0_nt = (mean_y0_d0m0 - assumed.value * (1.0 - w_nt)) / w_nt
    if y_range is not None and not (y_range[0] <= ey0_nt <= y_range[1]):
        warnings.warn(
            f"backed-out never-reactor mean {ey0_nt:.6g} falls outside the observed outcome "
            f"range [{y_range[0]:.6g}, {y_range[1]:.6g}]",
            OutOfSupportWarning,
            stacklevel=2,
        )
    return mean_y1_m0 - ey0_nt


# -- the sensitivity curve ---------------------------------------------------


@dataclass(frozen=True)
class CurveRow:
    trace0: float
    trace_hat: float
    ci_lo: float
    ci_hi: float
    within_trim_bounds: bool


@dataclass(frozen=True)
class SensitivityCurve:
    """Implied reactive-group effect across a grid of ``trace0`` values,
    with a pointwise percentile band holding each grid value fixed."""

    rows: tuple[CurveRow, ...]
    te_hat: float
    p_hat: float
    trim_bounds: Interval


def build_curve(
    ds: Dataset,
    spec: AssumptionSpec,
    te_method: TEMethod = TEMethod.DIFF_IN_MEANS,
    boot: BootstrapConfig | None = None,
    threads: int = 1,
) -> SensitivityCurve:
    """Trace out the implied effect over a GRID assumption.

    Each bootstrap replicate re-estimates both the overall effect and
    the reactive share, then every grid row maps that same pair through
    the line, so rows are mutually consistent. Replicates whose
    resample has no reactive treated unit cannot be mapped and count as
    failed.
    """
    if spec.kind is not AssumptionKind.GRID:
        raise InvariantViolation("build_curve needs a GRID assumption")
    validate_for(ds, Analysis.SENSITIVITY)
    if boot is None:
        boot = BootstrapConfig()

    p_hat = estimate_p_m1(ds)
    if p_hat == 0.0:
        raise DegenerateP("no treated unit reacted; the curve is undefined")
    te_hat = te_point(ds, te_method)
    trim = no_assumption_bounds(ds)

    def stat(d: Dataset) -> tuple[float, float]:
        return te_point(d, te_method), estimate_p_m1(d)

    values, _failed = bootstrap_replicates(stat, ds, boot, threads=threads)
    te_r = values[:, 0]
    p_r = values[:, 1]
    good = np.isfinite(te_r) & np.isfinite(p_r) & (p_r > 0)
    if not good.any():
        raise AllReplicatesFailed("no bootstrap replicate produced a usable (te, p) pair")
    te_g = te_r[good]
    p_g = p_r[good]

    tail = (1.0 - boot.level) / 2.0
    rows = []
    for t0 in spec.grid_values():
        point = trace_from_trace0(te_hat, p_hat, t0)
        reps = (te_g - t0 * (1.0 - p_g)) / p_g
        lo, hi = np.quantile(reps, [tail, 1.0 - tail], method="linear")
        rows.append(
            CurveRow(
                trace0=t0,
                trace_hat=point,
                ci_lo=float(lo),
                ci_hi=float(hi),
                within_trim_bounds=trim.contains(point),
            )
        )
    return SensitivityCurve(rows=tuple(rows), te_hat=te_hat, p_hat=p_hat, trim_bounds=trim)
