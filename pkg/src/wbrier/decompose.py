"""Miscalibration / discrimination / uncertainty decomposition of BS_w.

With r~ the recalibrated risk (estimated by the event rate of the bin a
sample falls in):

    BS_w ~= MCB_w - DSC_w + UNC_w
    MCB_w = sum_k n_k/n d(rbar_k, ybar_k)
    DSC_w = sum_k n_k/n d(pi, ybar_k)
    UNC_w = l_w(pi, pi)

with divergence d(p, q) = l_w(p, q) - l_w(q, q). The per-sample form
MCB_w = mean_i d(r_i, ybar_k(i)) is available but absorbs within-bin spread of r into MCB, so even a
perfectly calibrated model shows MCB_w > 0. Both leave a small residual
for continuous risks and are exact when every bin holds a single risk
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from . import weightfn
from .errors import DegenerateDataError, EmptyBinError
from .metrics import ValidationSet, fmean, loss_w_pq, uncertainty, weighted_brier


@dataclass(frozen=True)
class QuantileBins:
    k: int = 10

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 quantile bins")


@dataclass(frozen=True)
class UniqueValues:
    pass


@dataclass(frozen=True)
class FixedEdges:
    """Bin edges on [0, 1]. Samples equal to an interior edge go to the lower bin."""

    edges: Tuple[float, ...]

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.float64)
        if e.size < 2 or np.any(np.diff(e) <= 0) or e[0] < 0 or e[-1] > 1:
            raise ValueError("edges must be strictly increasing within [0, 1]")
        object.__setattr__(self, "edges", tuple(float(v) for v in e))


BinningSpec = Union[QuantileBins, UniqueValues, FixedEdges]

DECILES = QuantileBins(10)


def assign_bins(risks: np.ndarray, spec: BinningSpec) -> np.ndarray:
    """Bin label (0..K-1, ordered by risk) for every sample."""
    risks = np.asarray(risks, dtype=np.float64)
    if isinstance(spec, UniqueValues):
        _, labels = np.unique(risks, return_inverse=True)
        return labels.ravel()
    if isinstance(spec, QuantileBins):
        qs = np.quantile(risks, np.linspace(0.0, 1.0, spec.k + 1))
        interior = np.unique(qs[1:-1])
        raw = np.searchsorted(interior, risks, side="left")
        # drop bins emptied by tied quantiles
        _, labels = np.unique(raw, return_inverse=True)
        return labels.ravel()
    if isinstance(spec, FixedEdges):
        interior = np.asarray(spec.edges[1:-1])
        if np.any(risks < spec.edges[0]) or np.any(risks > spec.edges[-1]):
            raise ValueError("risks fall outside the fixed bin edges")
        labels = np.searchsorted(interior, risks, side="left")
        counts = np.bincount(labels, minlength=len(spec.edges) - 1)
        if np.any(counts == 0):
            empty = np.flatnonzero(counts == 0).tolist()
            raise EmptyBinError(f"bins {empty} are empty")
        return labels
    raise TypeError(f"unknown binning spec {spec!r}")


@dataclass
class Bin:
    n: int
    mean_risk: float
    event_rate: float


def calibration_bins(data: ValidationSet, spec: BinningSpec = DECILES) -> List[Bin]:
    labels = assign_bins(data.risks, spec)
    k = labels.max() + 1
    counts = np.bincount(labels, minlength=k)
    rsum = np.bincount(labels, weights=data.risks, minlength=k)
    ysum = np.bincount(labels, weights=data.outcomes, minlength=k)
    return [Bin(int(counts[j]), float(rsum[j] / counts[j]), float(ysum[j] / counts[j]))
            for j in range(k)]


def divergence(p, q, w: weightfn.WeightSpec):
    """d(p, q) = l_w(p, q) - l_w(q, q) >= 0."""
    val = np.asarray(loss_w_pq(p, q, w)) - np.asarray(loss_w_pq(q, q, w))
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val


@dataclass
class DecompositionReport:
    mcb_w: float
    dsc_w: float
    unc_w: float
    bs_w: float
    residual: float  # bs_w - (mcb_w - dsc_w + unc_w)
    weight: weightfn.WeightSpec
    bins: List[Bin] = field(default_factory=list)


def decompose(data: ValidationSet, w: weightfn.WeightSpec,
              bins: BinningSpec = DECILES, mcb: str = "bin") -> DecompositionReport:
    """Decompose BS_w by binning on predicted risk.

    ``mcb="bin"`` uses d(rbar_k, ybar_k) at the bin means (classic Murphy
    form); ``mcb="sample"`` averages d(r_i, ybar_k) over samples.
    """
    if data.degenerate:
        raise DegenerateDataError("decomposition needs both outcome classes")
    if mcb not in ("sample", "bin"):
        raise ValueError("mcb must be 'sample' or 'bin'")
    labels = assign_bins(data.risks, bins)
    k = labels.max() + 1
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise EmptyBinError("binning produced an empty bin")
    ybar = np.bincount(labels, weights=data.outcomes, minlength=k) / counts
    rbar = np.bincount(labels, weights=data.risks, minlength=k) / counts
    pi = data.prevalence
    frac = counts / data.n

    if mcb == "sample":
        mcb_w = fmean(divergence(data.risks, ybar[labels], w))
    else:
        mcb_w = math.fsum((frac * divergence(rbar, ybar, w)).tolist())
    dsc_w = math.fsum((frac * divergence(np.full(k, pi), ybar, w)).tolist())
    unc_w = uncertainty(pi, w)
    bs = weighted_brier(data, w)
    return DecompositionReport(
        mcb_w=mcb_w, dsc_w=dsc_w, unc_w=unc_w, bs_w=bs,
        residual=bs - (mcb_w - dsc_w + unc_w), weight=w,
        bins=[Bin(int(counts[j]), float(rbar[j]), float(ybar[j])) for j in range(k)])


def scaled_weighted_brier(data: ValidationSet, w: weightfn.WeightSpec,
                          bins: Optional[BinningSpec] = None) -> float:
    """sBS_w = (DSC_w - MCB_w) / UNC_w.

    Without ``bins`` the numerator is taken from the exact identity
    DSC_w - MCB_w = UNC_w - BS_w, i.e. sBS_w = 1 - BS_w / UNC_w. With
    ``bins`` the binned components are used and the grouping residual
    leaks into the result.
    """
    if data.degenerate:
        raise DegenerateDataError("scaled score needs both outcome classes")
    if bins is not None:
        rep = decompose(data, w, bins)
        return (rep.dsc_w - rep.mcb_w) / rep.unc_w
    unc = uncertainty(data.prevalence, w)
    if unc <= 0:
        raise DegenerateDataError("UNC_w is zero; scaled score undefined")
    return 1.0 - weighted_brier(data, w) / unc


def ipa(data: ValidationSet, bins: Optional[BinningSpec] = None) -> float:
    """Index of prediction accuracy: the scaled score with the uniform weight,
    1 - sum (r - y)^2 / (n pi (1 - pi))."""
    return scaled_weighted_brier(data, weightfn.Uniform(), bins)
