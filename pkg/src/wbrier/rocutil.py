"""ROC curves, AUC, decision curves and the H measure.

The H measure is computed on the ROC convex hull. For a cost cutoff c,
the cost of operating point (FPR, TPR) is

    Q(c) = c (1 - pi) FPR + (1 - c) pi (1 - TPR),

which is linear in c. The minimum over thresholds is reached on a hull
vertex, and each hull vertex is optimal on a c-interval whose endpoints
are ``dTP / (dTP + dFP)`` of the adjacent hull segments. So
V = int min_t Q w(c) dc is a finite sum of F_w and m_w increments with
no quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import weightfn
from .decompose import DECILES, BinningSpec, Bin, calibration_bins
from .errors import DegenerateDataError
from .metrics import (ValidationSet, loss_at, net_benefit_opt_in, net_benefit_opt_out,
                      uncertainty, weighted_brier)

DEFAULT_GRID = tuple(np.round(np.arange(1, 100) / 100.0, 2).tolist())


@dataclass
class RocCurve:
    """Empirical ROC. Points run from (0, 0) to (1, 1) as the threshold descends.

    ``tp``/``fp`` hold integer counts so hull computations are exact.
    """

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # thresholds[0] is +inf
    tp: np.ndarray
    fp: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


def _scores_outcomes(scores, outcomes=None):
    if isinstance(scores, ValidationSet):
        return scores.risks, scores.outcomes
    z = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(outcomes).ravel()
    if z.size != y.size:
        raise ValueError("scores and outcomes differ in length")
    if np.any(np.isnan(z)):
        raise ValueError("scores contain NaN")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("outcomes must be 0 or 1")
    return z, y


def roc(scores, outcomes=None) -> RocCurve:
    """Empirical ROC of real-valued ``scores`` (or a ValidationSet).

    Tied scores form one step; AUC is the trapezoidal area, which counts
    tied case/control pairs as 1/2.
    """
    z, y = _scores_outcomes(scores, outcomes)
    n1 = int(np.count_nonzero(y))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise DegenerateDataError("ROC needs both cases and controls")
    order = np.argsort(-z, kind="stable")
    zs = z[order]
    ys = y[order]
    last_of_group = np.r_[zs[1:] != zs[:-1], True]
    tp = np.cumsum(ys == 1)[last_of_group]
    fp = np.cumsum(ys == 0)[last_of_group]
    tp = np.r_[0, tp].astype(np.int64)
    fp = np.r_[0, fp].astype(np.int64)
    thr = np.r_[np.inf, zs[last_of_group]]
    # trapezoid in integer units: sum dFP * (TP_prev + TP_cur) / 2
    area2 = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = area2 / (2.0 * n1 * n0)
    return RocCurve(fp / n0, tp / n1, thr, tp, fp, auc)


def auc(scores, outcomes=None) -> float:
    return roc(scores, outcomes).auc


def convex_hull(curve: RocCurve):
    """Upper convex hull of the ROC points as integer (fp, tp) arrays.

    Collinear points are dropped, so consecutive segment slopes strictly
    decrease.
    """
    fp, tp = curve.fp, curve.tp
    hx: List[int] = []
    hy: List[int] = []
    for x, yv in zip(fp.tolist(), tp.tolist()):
        while len(hx) >= 2:
            cross = (hx[-1] - hx[-2]) * (yv - hy[-2]) - (hy[-1] - hy[-2]) * (x - hx[-2])
            if cross >= 0:  # last point on or below chord
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(x)
        hy.append(yv)
    return np.asarray(hx, dtype=np.int64), np.asarray(hy, dtype=np.int64)


def _min_cost_integral(hfp, htp, n1, n, w) -> float:
    """int_0^1 min_j Q_j(c) w(c) dc over hull vertices (counts scaled by n)."""
    dfp = np.diff(hfp)
    dtp = np.diff(htp)
    # segment j joins vertex j and j+1; vertex j wins above cut[j], vertex j+1 below
    cut = dtp / (dtp + dfp)
    upper = np.r_[1.0, cut]  # vertex j optimal on (lower[j], upper[j]]
    lower = np.r_[cut, 0.0]
    fpn = hfp / n          # (1 - pi) FPR
    fnn = (n1 - htp) / n   # pi (1 - TPR)
    slope = fpn - fnn      # Q_j(c) = fnn + c * slope
    dF = np.asarray(w.cdf(upper)) - np.asarray(w.cdf(lower))
    dm = np.asarray(w.inc_moment(upper)) - np.asarray(w.inc_moment(lower))
    return float(np.sum(fnn * dF + slope * dm))


def h_measure(scores, outcomes=None, w: weightfn.WeightSpec = weightfn.Beta(2.0, 2.0),
              optimize: bool = True) -> float:
    """H = 1 - V / V_max with V the cutoff-optimal expected cost.

    With ``optimize=False`` the threshold is fixed at t = c instead of the
    cost-minimizing one, so V becomes BS_w; this needs scores in [0, 1].
    """
    z, y = _scores_outcomes(scores, outcomes)
    n = y.size
    n1 = int(np.count_nonzero(y))
    if n1 == 0 or n1 == n:
        raise DegenerateDataError("H measure needs both cases and controls")
    vmax = uncertainty(n1 / n, w)
    if vmax <= 0:
        raise DegenerateDataError("V_max is zero for this weight and prevalence")
    if optimize:
        hfp, htp = convex_hull(roc(z, y))
        v = _min_cost_integral(hfp, htp, n1, n, w)
    else:
        v = weighted_brier(ValidationSet(z, y), w)
    return 1.0 - v / vmax


@dataclass
class DecisionCurve:
    grid: np.ndarray
    nb_opt_in: np.ndarray
    nb_opt_out: np.ndarray
    loss: np.ndarray


def decision_curve(data: ValidationSet, grid: Optional[Sequence[float]] = None) -> DecisionCurve:
    grid = np.asarray(DEFAULT_GRID if grid is None else grid, dtype=np.float64)
    if np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("decision-curve grid must lie in (0, 1)")
    return DecisionCurve(
        grid=grid,
        nb_opt_in=np.array([net_benefit_opt_in(data, c) for c in grid]),
        nb_opt_out=np.array([net_benefit_opt_out(data, c) for c in grid]),
        loss=np.array([loss_at(data, c) for c in grid]),
    )


@dataclass
class CurveSet:
    roc: RocCurve
    decision: DecisionCurve
    calibration: List[Bin]


def curves(data: ValidationSet, grid=None, bins: BinningSpec = DECILES) -> CurveSet:
    return CurveSet(roc(data), decision_curve(data, grid), calibration_bins(data, bins))
