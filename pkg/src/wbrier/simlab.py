"""Simulation designs with known true risks.

Set A: three models with equal AUC; Model 3 is a miscalibrated monotone
transform of Model 2. Set B: a true model plus two models over-fitted in
the high-risk (OH) or low-risk (OL) region. Misclassification scenario:
clustered visits whose outcomes are observed through a noisy surrogate.

Normal parameters are (mean, standard deviation). All generators take an
integer seed and use numpy's counter-based Philox bit generator, so the
same (n, seed) always gives the same arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.special import expit, logit

from .metrics import ValidationSet


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator; ``stream`` selects an independent counter block."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(stream)]))


@dataclass(frozen=True)
class BinormalDesign:
    prevalence: float
    case_mean: float
    case_sd: float
    control_mean: float
    control_sd: float

    def __post_init__(self):
        if not (0 < self.prevalence < 1):
            raise ValueError("prevalence must lie in (0, 1)")
        if not (self.case_sd > 0 and self.control_sd > 0):
            raise ValueError("standard deviations must be positive")


def _log_normal_pdf(x, mu, sd):
    z = (x - mu) / sd
    return -0.5 * z * z - math.log(sd) - 0.5 * math.log(2 * math.pi)


def bayes_risk(x, design: BinormalDesign):
    """P(Y = 1 | X = x) under the binormal design, evaluated on the logit scale."""
    x = np.asarray(x, dtype=np.float64)
    lo = (math.log(design.prevalence) - math.log1p(-design.prevalence)
          + _log_normal_pdf(x, design.case_mean, design.case_sd)
          - _log_normal_pdf(x, design.control_mean, design.control_sd))
    out = expit(lo)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LogitShift:
    """Add ``shift_above`` on the logit scale where r >= threshold, ``shift_below`` elsewhere."""

    threshold: float
    shift_above: float
    shift_below: float

    def __post_init__(self):
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must lie in (0, 1)")

    def apply(self, r):
        r = np.asarray(r, dtype=np.float64)
        shift = np.where(r >= self.threshold, self.shift_above, self.shift_below)
        out = np.where(shift == 0.0, r, expit(logit(r) + shift))
        return float(out) if out.ndim == 0 else out


SET_A_MODEL1 = BinormalDesign(0.5, 2.0, 2.0, 0.0, 1.0)
SET_A_MODEL2 = BinormalDesign(0.5, 1.0, 0.5, 0.0, 1.0)
SET_A_SHIFT = LogitShift(0.3, 1.0, -1.0)
SET_B_TRUE = BinormalDesign(0.5, 1.0, 1.0, 0.0, 1.0)
SET_B_OH = LogitShift(0.5, 1.0, 0.0)
SET_B_OL = LogitShift(0.5, 0.0, -1.0)


def _binormal_x(y, z, design):
    return np.where(y == 1, design.case_mean + design.case_sd * z,
                    design.control_mean + design.control_sd * z)


def generate_set_a(n: int, seed: int) -> Dict[str, ValidationSet]:
    """Models 1-3 on one shared outcome vector (Bernoulli(0.5))."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed)
    y = (rng.random(n) < 0.5).astype(np.int8)
    z = rng.standard_normal(n)
    r1 = bayes_risk(_binormal_x(y, z, SET_A_MODEL1), SET_A_MODEL1)
    r2 = bayes_risk(_binormal_x(y, z, SET_A_MODEL2), SET_A_MODEL2)
    r3 = SET_A_SHIFT.apply(r2)
    return {"model1": ValidationSet(r1, y), "model2": ValidationSet(r2, y),
            "model3": ValidationSet(r3, y)}


def generate_set_b(n: int, seed: int) -> Dict[str, ValidationSet]:
    """True, OH and OL models on one shared outcome vector."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed)
    y = (rng.random(n) < SET_B_TRUE.prevalence).astype(np.int8)
    x = _binormal_x(y, rng.standard_normal(n), SET_B_TRUE)
    rt = bayes_risk(x, SET_B_TRUE)
    return {"true": ValidationSet(rt, y), "oh": ValidationSet(SET_B_OH.apply(rt), y),
            "ol": ValidationSet(SET_B_OL.apply(rt), y)}


# -- outcome misclassification ---------------------------------------------------

# intercept chosen for an event rate near 0.23
MISCLASS_INTERCEPT = -1.55
MISCLASS_SLOPES = (1.0, 0.6)


@dataclass
class MisclassifiedCohort:
    """Visits nested in patients, with true and surrogate outcomes.

    ``covariates`` columns: patient-level x1, visit-level x2, pure noise x3,
    and the extra marker x4 (N(0.7, 1) in cases, N(0, 1) in controls).
    """

    covariates: np.ndarray
    true_risk: np.ndarray
    outcome: np.ndarray
    surrogate: np.ndarray
    cluster_ids: np.ndarray

    def as_validation(self, use_surrogate: bool = False) -> ValidationSet:
        y = self.surrogate if use_surrogate else self.outcome
        return ValidationSet(self.true_risk, y, self.cluster_ids)


def flip_outcomes(y, flip01: float, flip10: float, rng: np.random.Generator):
    """Surrogate S with P(S=1 | Y=0) = flip01 and P(S=0 | Y=1) = flip10."""
    for v in (flip01, flip10):
        if not (0 <= v < 1):
            raise ValueError("flip rates must lie in [0, 1)")
    u = rng.random(np.size(y))
    y = np.asarray(y)
    flip = np.where(y == 1, u < flip10, u < flip01)
    return np.where(flip, 1 - y, y).astype(np.int8)


def generate_misclassified(n_patients: int, visits_per_patient: int, seed: int,
                           flip01: float, flip10: float) -> MisclassifiedCohort:
    """Synthetic clustered cohort with true risks and a flipped surrogate outcome."""
    if n_patients < 1 or visits_per_patient < 1:
        raise ValueError("need at least one patient and one visit")
    rng = make_rng(seed)
    n = n_patients * visits_per_patient
    cluster = np.repeat(np.arange(n_patients), visits_per_patient)
    x1 = np.repeat(rng.standard_normal(n_patients), visits_per_patient)
    x2 = rng.standard_normal(n)
    x3 = rng.standard_normal(n)
    lin = MISCLASS_INTERCEPT + MISCLASS_SLOPES[0] * x1 + MISCLASS_SLOPES[1] * x2
    risk = expit(lin)
    y = (rng.random(n) < risk).astype(np.int8)
    x4 = rng.standard_normal(n) + 0.7 * y
    s = flip_outcomes(y, flip01, flip10, make_rng(seed, stream=1))
    return MisclassifiedCohort(np.column_stack([x1, x2, x3, x4]), risk, y, s, cluster)


def fit_logistic(X, y, max_iter: int = 50, tol: float = 1e-10) -> np.ndarray:
    """Maximum-likelihood logistic regression by IRLS. Returns [intercept, coefs...]."""
    X = np.column_stack([np.ones(len(X)), np.asarray(X, dtype=np.float64)])
    y = np.asarray(y, dtype=np.float64)
    beta = np.zeros(X.shape[1])
    for _ in range(max_iter):
        p = expit(X @ beta)
        wts = np.clip(p * (1 - p), 1e-12, None)
        grad = X.T @ (y - p)
        hess = X.T @ (X * wts[:, None])
        step = np.linalg.solve(hess, grad)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            return beta
    raise ArithmeticError("IRLS did not converge (separated data?)")


def predict_logistic(beta, X):
    return expit(beta[0] + np.asarray(X, dtype=np.float64) @ beta[1:])


MISCLASS_SCENARIOS = {
    "S1": (0.05, 0.25),
    "S2": (0.15, 0.15),
}


def misclassification_study(seed: int, n_patients: int = 4000, visits_per_patient: int = 2,
                            scenarios: Optional[Dict[str, tuple]] = None) -> Dict[str, ValidationSet]:
    """Fit logistic models on half the patients, score the other half against Y.

    Returns validation sets for Model Y (trained on truth), one model per
    surrogate scenario, and "S2+" (S2 outcome plus the extra marker x4).
    Validation outcomes are always the true Y; cluster ids mark patients.
    """
    scenarios = MISCLASS_SCENARIOS if scenarios is None else scenarios
    base = generate_misclassified(n_patients, visits_per_patient, seed, 0.0, 0.0)
    split = make_rng(seed, stream=2).permutation(n_patients) < n_patients // 2
    train = split[base.cluster_ids]
    test = ~train
    Xb = base.covariates[:, :3]
    Xplus = base.covariates
    y = base.outcome

    out = {}
    beta = fit_logistic(Xb[train], y[train])
    out["Y"] = ValidationSet(predict_logistic(beta, Xb[test]), y[test], base.cluster_ids[test])
    for k, (name, (f01, f10)) in enumerate(sorted(scenarios.items())):
        s = flip_outcomes(y, f01, f10, make_rng(seed, stream=10 + k))
        beta = fit_logistic(Xb[train], s[train])
        out[name] = ValidationSet(predict_logistic(beta, Xb[test]), y[test], base.cluster_ids[test])
        if name == "S2":
            beta = fit_logistic(Xplus[train], s[train])
            out["S2+"] = ValidationSet(predict_logistic(beta, Xplus[test]), y[test],
                                       base.cluster_ids[test])
    return out
