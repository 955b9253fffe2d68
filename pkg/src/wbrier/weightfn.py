"""Weight distributions over risk cutoffs.

A weight spec describes w(c) on (0, 1). Scores never need the density
itself, only three functionals of it:

* ``cdf(r)``        F_w(r) = int_0^r w(c) dc
* ``inc_moment(r)`` m_w(r) = int_0^r c w(c) dc
* ``mean()``        mu_w   = m_w(1)

Specs are immutable and can be written as text (see :func:`parse_weight`)::

    uniform
    beta:2,8
    point:0.125
    mix:0.5*point:0.1+0.5*point:0.3
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ._betainc import betainc
from .errors import WeightSpecError


def _check_unit(r):
    arr = np.asarray(r, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise ValueError("weight functionals are defined on [0, 1] only")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _fmt(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class Uniform:
    """w(c) = 1 on (0, 1); the weight behind the (halved) Brier score."""

    def cdf(self, r):
        arr = _check_unit(r)
        return _out(arr.copy(), r)

    def inc_moment(self, r):
        arr = _check_unit(r)
        return _out(0.5 * arr * arr, r)

    def mean(self) -> float:
        return 0.5

    def density(self, c):
        arr = _check_unit(c)
        return _out(np.ones_like(arr), c)

    def __str__(self):
        return "uniform"


@dataclass(frozen=True)
class Beta:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)
                and self.a > 0 and self.b > 0):
            raise WeightSpecError(f"Beta shapes must be positive, got ({self.a}, {self.b})")

    def cdf(self, r):
        arr = _check_unit(r)
        return _out(betainc(self.a, self.b, arr), r)

    def inc_moment(self, r):
        # m_w(r) = a/(a+b) * I_r(a+1, b)
        arr = _check_unit(r)
        return _out(self.mean() * betainc(self.a + 1.0, self.b, arr), r)

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def density(self, c):
        arr = _check_unit(c)
        a, b = self.a, self.b
        lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = lbeta + (a - 1.0) * np.log(arr) + (b - 1.0) * np.log1p(-arr)
            dens = np.exp(logd)
        return _out(dens, c)

    def __str__(self):
        return f"beta:{_fmt(self.a)},{_fmt(self.b)}"


@dataclass(frozen=True)
class PointMass:
    """All weight at a single cutoff; recovers L(c0).

    The resulting score is proper but not strictly proper. There is no
    density; :meth:`density` raises.
    """

    c0: float

    def __post_init__(self):
        if not (0.0 < self.c0 < 1.0):
            raise WeightSpecError(f"point mass must lie strictly inside (0, 1), got {self.c0}")

    def cdf(self, r):
        arr = _check_unit(r)
        return _out((arr >= self.c0).astype(np.float64), r)

    def inc_moment(self, r):
        arr = _check_unit(r)
        return _out(np.where(arr >= self.c0, self.c0, 0.0), r)

    def mean(self) -> float:
        return self.c0

    def density(self, c):
        raise WeightSpecError("point mass weight has no density")

    def __str__(self):
        return f"point:{_fmt(self.c0)}"


Simple = Union[Uniform, Beta, PointMass]


@dataclass(frozen=True)
class Mixture:
    """Finite mixture of non-mixture specs. Weights are normalized on construction."""

    components: Tuple[Tuple[float, Simple], ...]

    def __post_init__(self):
        comps = tuple((float(wt), spec) for wt, spec in self.components)
        if not comps:
            raise WeightSpecError("mixture needs at least one component")
        for wt, spec in comps:
            if isinstance(spec, Mixture):
                raise WeightSpecError("nested mixtures are not supported")
            if not isinstance(spec, (Uniform, Beta, PointMass)):
                raise WeightSpecError(f"unknown mixture component {spec!r}")
            if not (wt >= 0 and math.isfinite(wt)):
                raise WeightSpecError("mixture weights must be finite and nonnegative")
        total = math.fsum(wt for wt, _ in comps)
        if total <= 0:
            raise WeightSpecError("mixture weights sum to zero")
        object.__setattr__(self, "components",
                           tuple((wt / total, spec) for wt, spec in comps))

    def _combine(self, name, r):
        arr = _check_unit(r)
        acc = np.zeros_like(arr)
        for wt, spec in self.components:
            acc = acc + wt * np.asarray(getattr(spec, name)(arr))
        return _out(acc, r)

    def cdf(self, r):
        return self._combine("cdf", r)

    def inc_moment(self, r):
        return self._combine("inc_moment", r)

    def mean(self) -> float:
        return math.fsum(wt * spec.mean() for wt, spec in self.components)

    def density(self, c):
        return self._combine("density", c)

    def __str__(self):
        return "mix:" + "+".join(f"{_fmt(wt)}*{spec}" for wt, spec in self.components)


WeightSpec = Union[Uniform, Beta, PointMass, Mixture]


def cdf(spec: WeightSpec, r):
    """F_w(r). Raises ValueError for r outside [0, 1]."""
    return spec.cdf(r)


def inc_moment(spec: WeightSpec, r):
    """First incomplete moment m_w(r) = int_0^r c w(c) dc."""
    return spec.inc_moment(r)


def mean(spec: WeightSpec) -> float:
    return spec.mean()


def density(spec: WeightSpec, c):
    return spec.density(c)


def has_density(spec: WeightSpec) -> bool:
    if isinstance(spec, PointMass):
        return False
    if isinstance(spec, Mixture):
        return all(has_density(s) for _, s in spec.components)
    return True


_NUM = r"[+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_SIMPLE_RE = {
    "beta": re.compile(rf"^beta:({_NUM}),({_NUM})$"),
    "point": re.compile(rf"^point:({_NUM})$"),
}


def _parse_simple(text: str) -> Simple:
    if text == "uniform":
        return Uniform()
    m = _SIMPLE_RE["beta"].match(text)
    if m:
        return Beta(float(m.group(1)), float(m.group(2)))
    m = _SIMPLE_RE["point"].match(text)
    if m:
        return PointMass(float(m.group(1)))
    raise WeightSpecError(f"cannot parse weight spec {text!r}")


def parse_weight(text: str) -> WeightSpec:
    """Parse ``uniform``, ``beta:a,b``, ``point:c0`` or ``mix:w1*spec1+w2*spec2``."""
    text = text.strip().replace(" ", "")
    if not text.startswith("mix:"):
        return _parse_simple(text)
    body = text[4:]
    comps = []
    for term in body.split("+"):
        wt, sep, spec = term.partition("*")
        if not sep or not re.fullmatch(_NUM, wt):
            raise WeightSpecError(f"bad mixture term {term!r} in {text!r}")
        if spec.startswith("mix:"):
            raise WeightSpecError("nested mixtures are not supported")
        comps.append((float(wt), _parse_simple(spec)))
    return Mixture(tuple(comps))
