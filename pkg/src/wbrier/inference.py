"""Asymptotic variances of BS_w / BS^c_w and a deterministic bootstrap.

Bootstrap RNG streams
---------------------
Replicate ``r`` (attempt ``a``, for redraws after a degenerate resample)
draws from ``Philox4x64(key=seed)`` with its 256-bit counter starting at
``r * 2**192 + a * 2**128``. Each replicate therefore owns a disjoint
stream fixed by its index alone, so results do not depend on how
replicates are spread across threads.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

from . import weightfn
from .errors import DegenerateDataError
from .metrics import (CiRecord, ValidationSet, fmean, loss_components, loss_w_pq,
                      weighted_brier, weighted_brier_calibrated)

log = logging.getLogger(__name__)

MAX_REDRAWS = 10


# -- asymptotic variances --------------------------------------------------------

def _ab(data, w):
    return loss_components(data.risks, w)


def var_bsw(data: ValidationSet, w: weightfn.WeightSpec, of_mean: bool = False) -> float:
    """Plug-in sigma^2 = E_n[Y A^2 + (1 - Y) B^2] - BS_w^2 (divide by n if ``of_mean``)."""
    A, B = _ab(data, w)
    y = data.outcomes
    second = fmean(np.where(y == 1, A * A, B * B))
    v = max(second - weighted_brier(data, w) ** 2, 0.0)
    return v / data.n if of_mean else v


def var_bsw_wellcal(data: ValidationSet, w: weightfn.WeightSpec, of_mean: bool = False) -> float:
    """sigma^2_0: variance of l_w(r, Y) when Y | r ~ Bernoulli(r).

    Plug-in E_n[r A^2 + (1 - r) B^2] - (BS^c_w)^2, the well-calibrated
    expectation of BS_w being estimated by BS^c_w.
    """
    A, B = _ab(data, w)
    r = data.risks
    second = fmean(r * A * A + (1.0 - r) * B * B)
    v = max(second - weighted_brier_calibrated(data, w) ** 2, 0.0)
    return v / data.n if of_mean else v


def var_bsw_null(data: ValidationSet, w: weightfn.WeightSpec) -> float:
    """sigma^2_0n = 1/n sum r(1 - r)[A(r) - B(r)]^2, conditional on the risks."""
    A, B = _ab(data, w)
    r = data.risks
    d = A - B
    return fmean(r * (1.0 - r) * d * d)


def var_bsw_calibrated(data: ValidationSet, w: weightfn.WeightSpec, of_mean: bool = False) -> float:
    """sigma^2_c = var(l_w(r, r)), plug-in with divisor n."""
    vals = np.asarray(loss_w_pq(data.risks, data.risks, w))
    v = max(fmean(vals * vals) - fmean(vals) ** 2, 0.0)
    return v / data.n if of_mean else v


def asymptotic_ci(data: ValidationSet, w: weightfn.WeightSpec, level: float = 0.95,
                  calibrated: bool = False) -> CiRecord:
    """Normal-approximation interval for BS_w (or BS^c_w)."""
    if not (0 < level < 1):
        raise ValueError("level must lie in (0, 1)")
    z = float(ndtri(0.5 + level / 2))
    if calibrated:
        est = weighted_brier_calibrated(data, w)
        se = math.sqrt(var_bsw_calibrated(data, w, of_mean=True))
    else:
        est = weighted_brier(data, w)
        se = math.sqrt(var_bsw(data, w, of_mean=True))
    return CiRecord(est, est - z * se, est + z * se, level, "asymptotic-normal")


# -- bootstrap --------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 2000
    seed: int = 0
    resampling_unit: str = "observation"  # or "cluster"

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.resampling_unit not in ("observation", "cluster"):
            raise ValueError("resampling_unit must be 'observation' or 'cluster'")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")


class SampleMean:
    """Marks a statistic that is the mean of a per-observation array.

    The bootstrap then evaluates ``values(data)`` once and averages the
    resampled entries instead of recomputing the statistic per replicate.
    """

    def __init__(self, values: Callable[[ValidationSet], np.ndarray]):
        self.values = values

    def __call__(self, data: ValidationSet) -> float:
        return fmean(self.values(data))


def bsw_statistic(w: weightfn.WeightSpec, calibrated: bool = False) -> SampleMean:
    if calibrated:
        return SampleMean(lambda d: loss_w_pq(d.risks, d.risks, w))
    return SampleMean(lambda d: loss_w_pq(d.risks, d.outcomes, w))


def replicate_rng(seed: int, replicate: int, attempt: int = 0) -> np.random.Generator:
    counter = (int(replicate) << 192) | (int(attempt) << 128)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


class Resampler:
    """Draws bootstrap index arrays for one dataset layout."""

    def __init__(self, n: int, cfg: BootstrapConfig, cluster_ids=None):
        self.n = n
        self.cfg = cfg
        if cfg.resampling_unit == "cluster":
            if cluster_ids is None:
                raise ValueError("cluster resampling needs cluster_ids")
            codes = np.unique(np.asarray(cluster_ids), return_inverse=True)[1].ravel()
            order = np.argsort(codes, kind="stable")
            sizes = np.bincount(codes)
            self._members = np.split(order, np.cumsum(sizes)[:-1])
        else:
            self._members = None

    def indices(self, replicate: int, attempt: int = 0) -> np.ndarray:
        rng = replicate_rng(self.cfg.seed, replicate, attempt)
        if self._members is None:
            return rng.integers(0, self.n, size=self.n)
        picks = rng.integers(0, len(self._members), size=len(self._members))
        return np.concatenate([self._members[k] for k in picks])


def bootstrap_replicates(data: ValidationSet, statistic, cfg: BootstrapConfig,
                         workers: int = 1) -> np.ndarray:
    """Statistic evaluated on each bootstrap replicate, in replicate order.

    A replicate whose statistic raises DegenerateDataError is redrawn from
    its next attempt stream, at most MAX_REDRAWS times.
    """
    return bootstrap_paired([data], statistic, cfg, workers)[0]


def percentile_ci(estimate: float, stats: np.ndarray, level: float) -> CiRecord:
    if not (0 < level < 1):
        raise ValueError("level must lie in (0, 1)")
    alpha = 1.0 - level
    lo, hi = np.quantile(stats, [alpha / 2, 1 - alpha / 2])
    lo, hi = float(lo), float(hi)
    flagged = not (lo <= estimate <= hi)
    if flagged:
        log.warning("bootstrap estimate %.6g outside percentile interval [%.6g, %.6g]",
                    estimate, lo, hi)
    return CiRecord(estimate, lo, hi, level, "bootstrap-percentile", flagged)


def bootstrap(data: ValidationSet, statistic, cfg: BootstrapConfig, level: float = 0.95,
              workers: int = 1) -> CiRecord:
    """Percentile bootstrap interval for any scalar statistic of a ValidationSet."""
    if cfg.replicates < 100:
        warnings.warn("fewer than 100 bootstrap replicates; percentile interval is crude",
                      stacklevel=2)
    estimate = float(statistic(data))
    stats = bootstrap_replicates(data, statistic, cfg, workers)
    return percentile_ci(estimate, stats, level)


def bootstrap_paired(datasets: Sequence[ValidationSet], statistic, cfg: BootstrapConfig,
                     workers: int = 1) -> np.ndarray:
    """Replicate statistics for row-aligned datasets on shared resamples.

    Returns an array of shape (len(datasets), replicates); column r of
    every row used the same index draw. A draw is redrawn if the
    statistic fails on any of the datasets.
    """
    first = datasets[0]
    for d in datasets[1:]:
        if d.n != first.n:
            raise ValueError("paired bootstrap needs datasets of equal length")
    rs = Resampler(first.n, cfg, first.cluster_ids)
    fast = isinstance(statistic, SampleMean)
    values = [np.asarray(statistic.values(d), dtype=np.float64) for d in datasets] if fast else None

    def one(r: int):
        for attempt in range(MAX_REDRAWS + 1):
            idx = rs.indices(r, attempt)
            try:
                if fast:
                    return [float(np.mean(v[idx])) for v in values]
                return [float(statistic(d.take(idx))) for d in datasets]
            except DegenerateDataError as exc:
                log.info("replicate %d attempt %d degenerate (%s); redrawing", r, attempt, exc)
        raise DegenerateDataError(
            f"replicate {r}: statistic failed on {MAX_REDRAWS + 1} consecutive resamples")

    reps = range(cfg.replicates)
    if workers <= 1:
        rows = [one(r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, reps))
    return np.asarray(rows).T
