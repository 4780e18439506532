"""Sample-analog estimators for the identified ingredients.

Everything here is a weighted mean or a ratio of weighted sums; the one
regression (``estimate_te_ols``) exists so the average effect can be
estimated with covariate and block-dummy adjustment while the bounds
machinery stays design-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import (
    EmptyArm,
    EmptyCell,
    InvariantViolation,
    MissingM,
    MonotonicityViolatedEmpirically,
    OutOfRange,
    RankDeficient,
)

_MONO_TOL = 1e-12


class TEMethod(enum.Enum):
    DIFF_IN_MEANS = "diff_in_means"
    OLS_ADJUSTED = "ols_adjusted"


@dataclass(frozen=True)
class TEEstimate:
    """Average-effect estimate. ``se`` is present only for the adjusted
    regression route; the difference in means gets its uncertainty from
    the bootstrap."""

    te_hat: float
    se: float | None
    method: TEMethod


@dataclass(frozen=True)
class StrataShares:
    """Reaction strata shares under monotone reaction (no unit reacts
    under control but not under treatment)."""

    at: float  # reacts under both assignments
    c: float   # reacts only under treatment
    nt: float  # reacts under neither

    def __post_init__(self):
        for name, v in (("at", self.at), ("c", self.c), ("nt", self.nt)):
            if v < 0:
                raise InvariantViolation(f"share {name} must be nonnegative, got {v}")
        total = self.at + self.c + self.nt
        if abs(total - 1.0) > 1e-9:
            raise InvariantViolation(f"shares must sum to 1, got {total}")


def _wmean(y: np.ndarray, w: np.ndarray, mask: np.ndarray) -> float:
    ww = w[mask]
    sw = ww.sum()
    if sw <= 0:
        raise EmptyCell("mean requested over an empty cell")
    return float(y[mask] @ ww / sw)


def estimate_te_dim(ds: Dataset) -> TEEstimate:
    """Weighted difference in mean outcomes, treated minus control."""
    t = ds.d == 1
    w = ds.weight
    wt = w[t]
    wc = w[~t]
    if wt.size == 0 or wc.size == 0:
        raise EmptyArm("both arms are required")
    te = float(ds.y[t] @ wt / wt.sum() - ds.y[~t] @ wc / wc.sum())
    return TEEstimate(te_hat=te, se=None, method=TEMethod.DIFF_IN_MEANS)


def estimate_p_m1(ds: Dataset) -> float:
    """Weighted share of treated units with m = 1.

    Estimates the population probability of reacting under treatment;
    randomization makes the treated arm representative.
    """
    t = ds.d == 1
    w = ds.weight[t]
    return float(ds.m[t] @ w / w.sum())


def conditional_mean(ds: Dataset, d: int, m: int) -> float:
    """Weighted mean outcome in the (d, m) cell.

    Raises :class:`MissingM` when the requested arm has unobserved m,
    :class:`EmptyCell` when no unit falls in the cell.
    """
    if d not in (0, 1) or m not in (0, 1):
        raise InvariantViolation("cell indices must be 0 or 1")
    arm = ds.d == d
    if np.isnan(ds.m[arm]).any():
        raise MissingM(f"m is not observed for every unit with d={d}")
    mask = arm & (ds.m == m)
    if not mask.any():
        raise EmptyCell(f"no units with d={d}, m={m}")
    return _wmean(ds.y, ds.weight, mask)


def strata_shares_monotone(ds: Dataset) -> StrataShares:
    """Strata shares implied by the two arms under monotone reaction.

    The share reacting only under treatment is the first-stage gap
    Pr(m=1|d=1) - Pr(m=1|d=0). A gap below -1e-12 is treated as
    evidence against the model and raises
    :class:`MonotonicityViolatedEmpirically`; a gap within [-1e-12, 0)
    is floating-point noise and clips to zero.
    """
    if not ds.m_observed_in_control:
        raise MissingM("strata shares need m observed in both arms")
    t = ds.d == 1
    w = ds.weight
    p1 = float(ds.m[t] @ w[t] / w[t].sum())
    p0 = float(ds.m[~t] @ w[~t] / w[~t].sum())
    c = p1 - p0
    if c < -_MONO_TOL:
        raise MonotonicityViolatedEmpirically(
            f"Pr(m=1|d=1)={p1:.6g} < Pr(m=1|d=0)={p0:.6g}; monotone reaction is rejected"
        )
    if c < 0:
        c = 0.0
    return StrataShares(at=p0, c=c, nt=1.0 - p1)


# -- adjusted TE regression --------------------------------------------------


def _design(ds: Dataset, use_covariates: bool, use_block_fe: bool):
    cols = [np.ones(ds.n), ds.d.astype(np.float64)]
    names = ["intercept", "d"]
    if use_covariates and ds.x.shape[1]:
        for j in range(ds.x.shape[1]):
            cols.append(ds.x[:, j])
            names.append(ds.covariate_names[j])
    if use_block_fe:
        if ds.block is None:
            raise InvariantViolation("block fixed effects requested but units carry no block label")
        if any(b is None for b in ds.block):
            raise InvariantViolation("block fixed effects requested but some units lack a label")
        levels: list[str] = []
        seen = set()
        for b in ds.block:
            if b not in seen:
                seen.add(b)
                levels.append(b)
        # drop the first level; the intercept absorbs it
        for lev in levels[1:]:
            cols.append((ds.block == lev).astype(np.float64))
            names.append(f"block[{lev}]")
    return np.column_stack(cols), names


def estimate_te_ols(ds: Dataset, use_covariates: bool = True, use_block_fe: bool = False) -> TEEstimate:
    """Weighted least squares of y on assignment, covariates and block
    dummies, with a heteroskedasticity-robust standard error.

    The fit runs on rows scaled by the square root of the weights and
    solves via an orthogonal (QR) decomposition, never the normal
    equations. The reported standard error is the HC2 form: squared
    residuals inflated by one minus leverage.

    With no covariates and no block dummies the coefficient on d equals
    the weighted difference in means up to numerical error.
    """
    t = ds.d == 1
    if not t.any() or t.all():
        raise EmptyArm("both arms are required")
    X, _names = _design(ds, use_covariates, use_block_fe)
    sw = np.sqrt(ds.weight)
    Xs = X * sw[:, None]
    ys = ds.y * sw

    n, p = Xs.shape
    if n < p:
        raise RankDeficient(f"{n} rows cannot identify {p} coefficients")
    Q, R = np.linalg.qr(Xs)
    diag = np.abs(np.diag(R))
    if diag.min() <= max(n, p) * np.finfo(np.float64).eps * max(diag.max(), 1.0):
        raise RankDeficient("design matrix is rank deficient after dropping reference dummies")

    beta = np.linalg.solve(R, Q.T @ ys)
    resid = ys - Xs @ beta
    lev = np.einsum("ij,ij->i", Q, Q)
    denom = np.clip(1.0 - lev, 1e-12, None)
    meat = Q.T @ (Q * (resid**2 / denom)[:, None])
    Rinv = np.linalg.inv(R)
    V = Rinv @ meat @ Rinv.T
    se = float(np.sqrt(V[1, 1]))
    return TEEstimate(te_hat=float(beta[1]), se=se, method=TEMethod.OLS_ADJUSTED)


def te_point(ds: Dataset, method: TEMethod) -> float:
    """Point value of the average effect under the chosen route."""
    if method is TEMethod.DIFF_IN_MEANS:
        return estimate_te_dim(ds).te_hat
    return estimate_te_ols(
        ds,
        use_covariates=bool(ds.x.shape[1]),
        use_block_fe=ds.block is not None,
    ).te_hat


# -- published-moment back-out -----------------------------------------------


def moments_to_te(pr_d1: float, pr_y1: float, pr_d1_given_y1: float) -> tuple[float, float, float]:
    """Recover arm-wise outcome rates and their difference from three
    published marginals of a binary-outcome experiment.

    Bayes' rule gives Pr(y=1|d=1) = Pr(d=1|y=1) Pr(y=1) / Pr(d=1) and
    the complementary expression for the control arm. Raises
    :class:`OutOfRange` when an input is not an interior probability or
    when an implied rate falls outside [0, 1].

    Returns ``(pr_y1_d1, pr_y1_d0, te)``.
    """
    for name, v in (("pr_d1", pr_d1), ("pr_y1", pr_y1), ("pr_d1_given_y1", pr_d1_given_y1)):
        if not (0.0 < v < 1.0):
            raise OutOfRange(f"{name} must lie strictly inside (0, 1), got {v}")
    pr_y1_d1 = pr_d1_given_y1 * pr_y1 / pr_d1
    pr_y1_d0 = (1.0 - pr_d1_given_y1) * pr_y1 / (1.0 - pr_d1)
    tol = 1e-12
    if not (-tol <= pr_y1_d1 <= 1.0 + tol):
        raise OutOfRange(f"implied Pr(y=1|d=1)={pr_y1_d1:.6g} falls outside [0, 1]")
    if not (-tol <= pr_y1_d0 <= 1.0 + tol):
        raise OutOfRange(f"implied Pr(y=1|d=0)={pr_y1_d0:.6g} falls outside [0, 1]")
    pr_y1_d1 = min(max(pr_y1_d1, 0.0), 1.0)
    pr_y1_d0 = min(max(pr_y1_d0, 0.0), 1.0)
    return pr_y1_d1, pr_y1_d0, pr_y1_d1 - pr_y1_d0
