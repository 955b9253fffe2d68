"""Pointwise losses and dataset-level scores for binary risk predictions.

Classification convention: a subject is "treated" iff risk > c. The
cost-weighted loss charges c for a treated control and 1 - c for an
untreated case with risk strictly below c; a risk exactly equal to c is
charged nothing. Net benefits use the same strict inequalities, so the
identity

    L(c) = (1 - c) [pi - NB_in(c)] = c [1 - pi - NB_out(c)]

holds exactly whenever no risk ties with c.

All Brier-type scores carry the 1/2 factor: BS = mean(1/2 (r - y)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import weightfn
from .errors import DegenerateDataError, InvalidCostError


def fmean(x) -> float:
    """Mean with exactly rounded summation (independent of element order)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("mean of empty array")
    return math.fsum(x.tolist()) / x.size


@dataclass(frozen=True)
class ValidationSet:
    """Paired predicted risks and binary outcomes, optionally clustered."""

    risks: np.ndarray
    outcomes: np.ndarray
    cluster_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        risks = np.ascontiguousarray(self.risks, dtype=np.float64).ravel()
        y = np.asarray(self.outcomes).ravel()
        if risks.size == 0:
            raise ValueError("validation set must contain at least one observation")
        if risks.size != y.size:
            raise ValueError(f"risks ({risks.size}) and outcomes ({y.size}) differ in length")
        if np.any(np.isnan(risks)) or np.any((risks < 0) | (risks > 1)):
            raise ValueError("risks must lie in [0, 1]")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("outcomes must be 0 or 1")
        y = y.astype(np.int8)
        clusters = self.cluster_ids
        if clusters is not None:
            clusters = np.asarray(clusters).ravel()
            if clusters.size != risks.size:
                raise ValueError("cluster_ids must match risks in length")
        risks.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "risks", risks)
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "cluster_ids", clusters)

    @property
    def n(self) -> int:
        return self.risks.size

    @property
    def n_cases(self) -> int:
        return int(np.count_nonzero(self.outcomes))

    @property
    def prevalence(self) -> float:
        return self.n_cases / self.n

    @property
    def degenerate(self) -> bool:
        """True when only one outcome class is present."""
        return self.n_cases in (0, self.n)

    def take(self, idx) -> "ValidationSet":
        cl = None if self.cluster_ids is None else self.cluster_ids[idx]
        return ValidationSet(self.risks[idx], self.outcomes[idx], cl)


# -- cutoffs and single-cutoff losses ---------------------------------------

def cutoff_from_costs(c_fp: float, c_tn: float, c_fn: float, c_tp: float) -> float:
    """Optimal treatment cutoff (C_FP - C_TN) / (C_FP - C_TN + C_FN - C_TP)."""
    cost = c_fp - c_tn
    benefit = c_fn - c_tp
    if not (cost > 0 and benefit > 0):
        raise InvalidCostError(
            f"need C_FP > C_TN and C_FN > C_TP (relative cost {cost}, relative benefit {benefit})")
    return cost / (cost + benefit)


def _check_cutoff(c):
    if not (0.0 < c < 1.0):
        raise ValueError(f"cutoff must lie in (0, 1), got {c}")


def loss_cw(risk, outcome, c: float):
    """Cost-weighted misclassification loss at cutoff ``c`` (vectorized)."""
    _check_cutoff(c)
    r = np.asarray(risk, dtype=np.float64)
    y = np.asarray(outcome)
    val = np.where((r > c) & (y == 0), c, 0.0) + np.where((r < c) & (y == 1), 1.0 - c, 0.0)
    return float(val) if val.ndim == 0 else val


def _counts(data: ValidationSet, c: float):
    r, y = data.risks, data.outcomes
    case = y == 1
    tp = int(np.count_nonzero((r > c) & case))
    fn = int(np.count_nonzero((r < c) & case))
    fp = int(np.count_nonzero((r > c) & ~case))
    tn = int(np.count_nonzero((r < c) & ~case))
    return tp, fn, fp, tn


def loss_at(data: ValidationSet, c: float) -> float:
    """Empirical L(c) = c * FP/n + (1 - c) * FN/n."""
    _check_cutoff(c)
    _, fn, fp, _ = _counts(data, c)
    return (c * fp + (1.0 - c) * fn) / data.n


def net_benefit_opt_in(data: ValidationSet, c: float) -> float:
    """TP/n - c/(1-c) * FP/n, i.e. TPR*pi - c/(1-c)*FPR*(1-pi)."""
    _check_cutoff(c)
    tp, _, fp, _ = _counts(data, c)
    return tp / data.n - (c / (1.0 - c)) * fp / data.n


def net_benefit_opt_out(data: ValidationSet, c: float) -> float:
    """TN/n - (1-c)/c * FN/n, i.e. TNR*(1-pi) - (1-c)/c*FNR*pi."""
    _check_cutoff(c)
    _, fn, _, tn = _counts(data, c)
    return tn / data.n - ((1.0 - c) / c) * fn / data.n


# -- weighted Brier ------------------------------------------------------------

def loss_components(risk, w: weightfn.WeightSpec):
    """Return (A(r), B(r)): the loss charged to a case and to a control at risk r.

    A(r) = int_r^1 (1 - c) w(c) dc = 1 - F_w(r) + m_w(r) - mu_w
    B(r) = int_0^r c w(c) dc       = m_w(r)
    """
    r = np.asarray(risk, dtype=np.float64)
    F = np.asarray(w.cdf(r))
    m = np.asarray(w.inc_moment(r))
    A = 1.0 - F + m - w.mean()
    # round-off can leave tiny negatives near r = 1
    A = np.maximum(A, 0.0)
    return A, m


def loss_w_pq(p, q, w: weightfn.WeightSpec):
    """l_w(p, q) = (1 - q) B(p) + q A(p); q may be a probability, not just 0/1."""
    A, B = loss_components(p, w)
    q = np.asarray(q, dtype=np.float64)
    val = (1.0 - q) * B + q * A
    return float(val) if val.ndim == 0 else val


def loss_w(risk, outcome, w: weightfn.WeightSpec):
    """Weighted Brier loss of a single prediction (vectorized)."""
    return loss_w_pq(risk, outcome, w)


def weighted_brier(data: ValidationSet, w: weightfn.WeightSpec) -> float:
    """BS_w = mean over samples of l_w(r_i, Y_i)."""
    return fmean(loss_w_pq(data.risks, data.outcomes, w))


def weighted_brier_calibrated(data: ValidationSet, w: weightfn.WeightSpec) -> float:
    """BS^c_w = mean of l_w(r_i, r_i); an estimator of E[BS_w] valid under
    well-calibration."""
    return fmean(loss_w_pq(data.risks, data.risks, w))


def brier(data: ValidationSet) -> float:
    """Halved Brier score, mean(1/2 (r - y)^2)."""
    return fmean(0.5 * (data.risks - data.outcomes) ** 2)


def uncertainty(prevalence: float, w: weightfn.WeightSpec) -> float:
    """l_w(pi, pi): score of the constant prediction pi; UNC_w and V_max."""
    return float(loss_w_pq(prevalence, prevalence, w))


# -- Spiegelhalter -------------------------------------------------------------

def spiegelhalter_z(data: ValidationSet) -> float:
    """Classic Spiegelhalter Z for calibration."""
    r = data.risks
    y = data.outcomes
    num = math.fsum(((y - r) * (1.0 - 2.0 * r)).tolist())
    den = math.fsum(((1.0 - 2.0 * r) ** 2 * r * (1.0 - r)).tolist())
    if den <= 0:
        raise DegenerateDataError("Spiegelhalter Z undefined: all risks in {0, 0.5, 1}")
    return num / math.sqrt(den)


def _null_terms(data: ValidationSet, w: weightfn.WeightSpec):
    r = data.risks
    diff = 1.0 - np.asarray(w.cdf(r)) - w.mean()  # A(r) - B(r)
    return r, diff


def null_variance(data: ValidationSet, w: weightfn.WeightSpec) -> float:
    """sigma^2_0n = 1/n sum r(1 - r) [A(r) - B(r)]^2."""
    r, diff = _null_terms(data, w)
    return fmean(r * (1.0 - r) * diff * diff)


def spiegelhalter_z_weighted(data: ValidationSet, w: weightfn.WeightSpec) -> float:
    """Weighted Spiegelhalter Z: E_n[(Y - r)(1 - F_w(r) - mu_w)] / (sigma_0n / sqrt(n))."""
    r, diff = _null_terms(data, w)
    num = fmean((data.outcomes - r) * diff)
    var0 = fmean(r * (1.0 - r) * diff * diff)
    if var0 <= 0:
        raise DegenerateDataError("weighted Spiegelhalter Z undefined: null variance is zero")
    return num / math.sqrt(var0 / data.n)


# -- report container ----------------------------------------------------------

@dataclass
class CiRecord:
    estimate: float
    lower: float
    upper: float
    level: float
    method: str  # "asymptotic-normal" | "bootstrap-percentile"
    flagged: bool = False  # estimate outside [lower, upper]

    def as_dict(self):
        return {"estimate": self.estimate, "lower": self.lower, "upper": self.upper,
                "level": self.level, "method": self.method, "flagged": self.flagged}


@dataclass
class ScoreReport:
    """Scalar summaries of one model on one dataset.

    Cutoff-indexed scores are keyed by cutoff, weighted scores by the
    weight spec's text form.
    """

    n: int
    prevalence: float
    auc: Optional[float] = None
    ipa: Optional[float] = None
    z_spiegelhalter: Optional[float] = None
    loss_at: Dict[float, float] = field(default_factory=dict)
    nb_opt_in: Dict[float, float] = field(default_factory=dict)
    nb_opt_out: Dict[float, float] = field(default_factory=dict)
    bs_w: Dict[str, float] = field(default_factory=dict)
    bs_w_calibrated: Dict[str, float] = field(default_factory=dict)
    sbs_w: Dict[str, float] = field(default_factory=dict)
    z_spiegelhalter_weighted: Dict[str, float] = field(default_factory=dict)
    h_measure: Dict[str, float] = field(default_factory=dict)
    intervals: Dict[str, CiRecord] = field(default_factory=dict)
