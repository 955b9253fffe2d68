"""Assemble scores for one or more models into JSON/CSV-ready reports."""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import decompose as dec
from . import inference as inf
from . import metrics as mt
from . import rocutil
from .errors import AlignmentError, DegenerateDataError
from .weightfn import WeightSpec

SCHEMA_VERSION = 1


def _nan_to_none(v):
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


def statistics(weights: Sequence[WeightSpec], cutoffs: Sequence[float]) -> Dict[str, object]:
    """Named scalar statistics of a ValidationSet, as used for bootstrap intervals."""
    stats: Dict[str, object] = {}
    for c in cutoffs:
        def treated(d, c=c):
            return d.risks > c

        stats[f"loss_at[{c!r}]"] = inf.SampleMean(
            lambda d, c=c: mt.loss_cw(d.risks, d.outcomes, c))
        stats[f"nb_opt_in[{c!r}]"] = inf.SampleMean(
            lambda d, c=c: np.where(treated(d, c), np.where(d.outcomes == 1, 1.0, -c / (1 - c)), 0.0))
        stats[f"nb_opt_out[{c!r}]"] = inf.SampleMean(
            lambda d, c=c: np.where(d.risks < c,
                                    np.where(d.outcomes == 0, 1.0, -(1 - c) / c), 0.0))
    for w in weights:
        stats[f"bs_w[{w}]"] = inf.bsw_statistic(w)
        stats[f"bs_w_calibrated[{w}]"] = inf.bsw_statistic(w, calibrated=True)
        stats[f"sbs_w[{w}]"] = lambda d, w=w: dec.scaled_weighted_brier(d, w)
    stats["auc"] = rocutil.auc
    stats["ipa"] = dec.ipa
    return stats


def _try(fn, *args):
    try:
        return fn(*args)
    except DegenerateDataError:
        return None


def evaluate(data: mt.ValidationSet, weights: Sequence[WeightSpec], cutoffs: Sequence[float],
             bins: dec.BinningSpec = dec.DECILES, boot: Optional[inf.BootstrapConfig] = None,
             level: float = 0.95, workers: int = 1):
    """Score one model. Returns (ScoreReport, {weight text: DecompositionReport}).

    Raises DegenerateDataError when only one outcome class is present and
    scaled scores are requested (any weight given).
    """
    if data.degenerate and weights:
        raise DegenerateDataError("scaled scores need both outcome classes")
    rep = mt.ScoreReport(n=data.n, prevalence=data.prevalence)
    if not data.degenerate:
        rep.auc = rocutil.auc(data)
        rep.ipa = dec.ipa(data)
    rep.z_spiegelhalter = _try(mt.spiegelhalter_z, data)
    for c in cutoffs:
        rep.loss_at[c] = mt.loss_at(data, c)
        rep.nb_opt_in[c] = mt.net_benefit_opt_in(data, c)
        rep.nb_opt_out[c] = mt.net_benefit_opt_out(data, c)
    decomps = {}
    for w in weights:
        key = str(w)
        rep.bs_w[key] = mt.weighted_brier(data, w)
        rep.bs_w_calibrated[key] = mt.weighted_brier_calibrated(data, w)
        rep.sbs_w[key] = dec.scaled_weighted_brier(data, w)
        rep.z_spiegelhalter_weighted[key] = _try(mt.spiegelhalter_z_weighted, data, w)
        rep.h_measure[key] = rocutil.h_measure(data, w=w)
        decomps[key] = dec.decompose(data, w, bins)
        rep.intervals[f"bs_w[{key}]:asymptotic"] = inf.asymptotic_ci(data, w, level)
        rep.intervals[f"bs_w_calibrated[{key}]:asymptotic"] = inf.asymptotic_ci(
            data, w, level, calibrated=True)
    if boot is not None:
        for name, stat in statistics(weights, cutoffs).items():
            if data.degenerate and name in ("auc", "ipa"):
                continue
            rep.intervals[name] = inf.bootstrap(data, stat, boot, level, workers)
    return rep, decomps


def report_dict(rep: mt.ScoreReport, decomps) -> dict:
    out = {
        "n": rep.n,
        "prevalence": rep.prevalence,
        "auc": rep.auc,
        "ipa": rep.ipa,
        "z_spiegelhalter": rep.z_spiegelhalter,
        "cutoffs": [
            {"c": c, "loss": rep.loss_at[c], "nb_opt_in": rep.nb_opt_in[c],
             "nb_opt_out": rep.nb_opt_out[c]}
            for c in rep.loss_at
        ],
        "weights": [],
        "intervals": {k: v.as_dict() for k, v in rep.intervals.items()},
    }
    for key in rep.bs_w:
        d = decomps[key]
        out["weights"].append({
            "weight": key,
            "bs_w": rep.bs_w[key],
            "bs_w_calibrated": rep.bs_w_calibrated[key],
            "sbs_w": rep.sbs_w[key],
            "z_spiegelhalter_weighted": rep.z_spiegelhalter_weighted[key],
            "h_measure": rep.h_measure[key],
            "decomposition": {
                "mcb_w": d.mcb_w, "dsc_w": d.dsc_w, "unc_w": d.unc_w, "residual": d.residual,
                "bins": [{"n": b.n, "mean_risk": b.mean_risk, "event_rate": b.event_rate}
                         for b in d.bins],
            },
        })
    return out


def report_rows(model: str, rep: mt.ScoreReport) -> List[dict]:
    """Long-format rows: one per (metric, weight, cutoff)."""
    rows = []

    def add(metric, value, weight="", cutoff="", ci_key=None):
        ci = rep.intervals.get(ci_key) if ci_key else None
        rows.append({
            "model": model, "metric": metric, "weight": weight, "cutoff": cutoff,
            "estimate": _nan_to_none(value),
            "lower": ci.lower if ci else None, "upper": ci.upper if ci else None,
            "level": ci.level if ci else None, "method": ci.method if ci else None,
        })

    add("n", rep.n)
    add("prevalence", rep.prevalence)
    add("auc", rep.auc, ci_key="auc")
    add("ipa", rep.ipa, ci_key="ipa")
    add("z_spiegelhalter", rep.z_spiegelhalter)
    for c in rep.loss_at:
        add("loss_at", rep.loss_at[c], cutoff=c, ci_key=f"loss_at[{c!r}]")
        add("nb_opt_in", rep.nb_opt_in[c], cutoff=c, ci_key=f"nb_opt_in[{c!r}]")
        add("nb_opt_out", rep.nb_opt_out[c], cutoff=c, ci_key=f"nb_opt_out[{c!r}]")
    for key in rep.bs_w:
        boot_bs = f"bs_w[{key}]"
        add("bs_w", rep.bs_w[key], weight=key,
            ci_key=boot_bs if boot_bs in rep.intervals else f"{boot_bs}:asymptotic")
        boot_bsc = f"bs_w_calibrated[{key}]"
        add("bs_w_calibrated", rep.bs_w_calibrated[key], weight=key,
            ci_key=boot_bsc if boot_bsc in rep.intervals else f"{boot_bsc}:asymptotic")
        add("sbs_w", rep.sbs_w[key], weight=key, ci_key=f"sbs_w[{key}]")
        add("z_spiegelhalter_weighted", rep.z_spiegelhalter_weighted[key], weight=key)
        add("h_measure", rep.h_measure[key], weight=key)
    return rows


def compare(datasets: Dict[str, mt.ValidationSet], weights: Sequence[WeightSpec],
            cutoffs: Sequence[float], boot: Optional[inf.BootstrapConfig] = None,
            level: float = 0.95, workers: int = 1) -> List[dict]:
    """Paired differences (first minus second) for every ordered pair of models.

    Bootstrap replicates use one shared index draw for all models, so the
    interval is for the difference itself.
    """
    names = list(datasets)
    first = datasets[names[0]]
    for nm in names[1:]:
        if not np.array_equal(datasets[nm].outcomes, first.outcomes):
            raise AlignmentError(f"outcomes of {nm!r} are not row-aligned with {names[0]!r}")
    stats = statistics(weights, cutoffs)
    rows = []
    for name, stat in stats.items():
        point = [float(stat(datasets[m])) for m in names]
        reps = (inf.bootstrap_paired([datasets[m] for m in names], stat, boot, workers)
                if boot is not None else None)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                diff = point[i] - point[j]
                row = {"first": names[i], "second": names[j], "statistic": name,
                       "difference": diff, "lower": None, "upper": None,
                       "level": None, "method": None}
                if reps is not None:
                    ci = inf.percentile_ci(diff, reps[i] - reps[j], level)
                    row.update(lower=ci.lower, upper=ci.upper, level=level, method=ci.method)
                rows.append(row)
    return rows
