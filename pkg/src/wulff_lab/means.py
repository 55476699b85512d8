"""Sharp stable arithmetic-geometric mean inequalities and their defects.

Three defect functionals strengthen AM >= GM for nonnegative tuples:

  deviation:  mean of (sqrt(x_i) - sqrt(g))^2          (g = geometric mean)
  fraction:   mean of (x_i - g)^2 / (x_i + g), halved  (0/0 := 0)
  pairwise:   mean over pairs of (sqrt(x_i) - sqrt(x_j))^2

Each is a valid lower bound for AM - GM; the deviation and pairwise forms
are sharp (witnessed by tuples with a single nonzero entry).  All three are
1-homogeneous, so inputs are pre-scaled by their maximum before residual
tests and the results scaled back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NegativeEntry, OutOfRangeEntry
from .rng import RngSeed

_REL_TOL = 1e-12
_QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class MeanDefect:
    values: np.ndarray
    geo_mean: float
    arith_mean: float
    defect_deviation: float
    defect_fraction: float
    defect_pairwise: float


@dataclass(frozen=True)
class EqualityCase:
    kind: str  # none | all-equal | some-zero | n-equals-2 | all-but-one-zero
    residual: float


@dataclass(frozen=True)
class SuiteResult:
    count: int
    violations: int
    min_residuals: dict
    worst: tuple | None
    quantiles: dict  # residual quantiles [0, .25, .5, .75, 1] per inequality


@dataclass(frozen=True)
class LimitReport:
    values: np.ndarray
    epsilons: np.ndarray
    root_residuals: np.ndarray
    root_ratios: np.ndarray
    volume_ratios: np.ndarray
    root_ratio_limit: float
    volume_ratio_limit: float
    root_first_order: float
    volume_first_order: float
    inequality_ok: bool


def _validate(values: Sequence[float]) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need a flat tuple of length >= 2")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise NegativeEntry("entries must be finite and nonnegative")
    return x


def geometric_mean(x: np.ndarray) -> float:
    """Log-space geometric mean with a zero short-circuit."""
    if np.any(x == 0):
        return 0.0
    return float(math.exp(np.mean(np.log(x))))


def stable_amgm(values: Sequence[float]) -> MeanDefect:
    x = _validate(values)
    n = len(x)
    scale = float(x.max())
    if scale == 0.0:
        return MeanDefect(x, 0.0, 0.0, 0.0, 0.0, 0.0)
    y = x / scale
    g = geometric_mean(y)
    am = float(y.mean())
    sq = np.sqrt(y)
    d_dev = float(np.mean((sq - math.sqrt(g)) ** 2))
    num = (y - g) ** 2
    den = y + g
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    d_frac = float(np.mean(terms)) / 2.0
    s1 = float(sq.sum())
    d_pair = (n * float(y.sum()) - s1 * s1) / (n * (n - 1))
    return MeanDefect(
        values=x,
        geo_mean=g * scale,
        arith_mean=am * scale,
        defect_deviation=d_dev * scale,
        defect_fraction=d_frac * scale,
        defect_pairwise=d_pair * scale,
    )


def classify_equality(defect: MeanDefect, which: str = "deviation") -> EqualityCase:
    """Structural equality case of the chosen defect inequality.

    which="deviation" classifies the sqrt-deviation bound (equality iff all
    entries are equal or some entry vanishes); which="pairwise" classifies
    the pairwise bound (identity for n = 2, else equality iff all entries
    are equal or all but one vanish).
    """
    x = defect.values
    n = len(x)
    scale = float(x.max()) if x.max() > 0 else 1.0
    tol = _REL_TOL * scale
    all_equal = bool(np.all(np.abs(x - x[0]) <= tol))
    zeros = int(np.count_nonzero(x <= tol))
    if which == "deviation":
        residual = defect.arith_mean - defect.geo_mean - defect.defect_deviation
        if all_equal:
            kind = "all-equal"
        elif zeros >= 1:
            kind = "some-zero"
        else:
            kind = "none"
    elif which == "pairwise":
        residual = defect.arith_mean - defect.geo_mean - defect.defect_pairwise
        if n == 2:
            kind = "n-equals-2"
        elif all_equal:
            kind = "all-equal"
        elif zeros == n - 1:
            kind = "all-but-one-zero"
        else:
            kind = "none"
    else:
        raise ValueError(f"unknown inequality selector {which!r}")
    return EqualityCase(kind, float(residual))


def sqrt_fraction_gm_check(values: Sequence[float]) -> tuple[float, float]:
    """Both sides of: sum of sqrt(x_i/(1+x_i)) >= n sqrt(g/(1+g)), g the
    geometric mean.  Proven only on [0, 1/2]^n; inputs outside are refused
    because the bound can genuinely fail there."""
    x = _validate(values)
    if np.any(x > 0.5):
        raise OutOfRangeEntry("entries must lie in [0, 1/2]")
    n = len(x)
    lhs = float(np.sum(np.sqrt(x / (1.0 + x))))
    g = geometric_mean(x)
    rhs = n * math.sqrt(g / (1.0 + g))
    return lhs, rhs


# -- randomized suites (vectorized; used by acceptance tests and the CLI) ----


def amgm_suite(
    count: int, ns: Sequence[int], seed: RngSeed, rel_tol: float = 1e-10
) -> SuiteResult:
    """Random log-uniform tuples across the given lengths; reports the worst
    relative residual of each defect inequality."""
    mins = {"deviation": np.inf, "fraction": np.inf, "pairwise": np.inf}
    pooled: dict = {key: [] for key in mins}
    worst = None
    worst_val = np.inf
    violations = 0
    total = 0
    per = [count // len(ns)] * len(ns)
    per[0] += count - sum(per)
    for n, m in zip(ns, per):
        if m == 0:
            continue
        g = seed.derive(n).generator()
        x = 10.0 ** g.uniform(-6.0, 6.0, size=(m, n))
        y = x / x.max(axis=1, keepdims=True)
        gm = np.exp(np.mean(np.log(y), axis=1))
        am = y.mean(axis=1)
        sq = np.sqrt(y)
        d_dev = np.mean((sq - np.sqrt(gm)[:, None]) ** 2, axis=1)
        d_frac = 0.5 * np.mean((y - gm[:, None]) ** 2 / (y + gm[:, None]), axis=1)
        s1 = sq.sum(axis=1)
        d_pair = (n * y.sum(axis=1) - s1 * s1) / (n * (n - 1))
        for key, d in (("deviation", d_dev), ("fraction", d_frac), ("pairwise", d_pair)):
            rel = (am - gm - d) / am
            pooled[key].append(rel)
            i = int(np.argmin(rel))
            if rel[i] < mins[key]:
                mins[key] = float(rel[i])
                if rel[i] < worst_val:
                    worst_val = float(rel[i])
                    worst = tuple(x[i])
            violations += int(np.count_nonzero(rel < -rel_tol))
        total += m
    quantiles = {
        key: [float(q) for q in np.quantile(np.concatenate(vals), _QUANTILES)]
        for key, vals in pooled.items()
        if vals
    }
    return SuiteResult(total, violations, mins, worst, quantiles)


def sqrt_fraction_suite(
    count: int, ns: Sequence[int], seed: RngSeed, abs_tol: float = 1e-12
) -> SuiteResult:
    """Random tuples in [0, 1/2]^n; worst absolute residual of the
    sqrt-fraction bound."""
    min_res = np.inf
    worst = None
    violations = 0
    total = 0
    pooled = []
    per = [count // len(ns)] * len(ns)
    per[0] += count - sum(per)
    for n, m in zip(ns, per):
        if m == 0:
            continue
        g = seed.derive(n).generator()
        x = g.uniform(0.0, 0.5, size=(m, n))
        lhs = np.sqrt(x / (1.0 + x)).sum(axis=1)
        gm = np.exp(np.mean(np.log(np.maximum(x, 1e-300)), axis=1))
        gm[np.any(x == 0, axis=1)] = 0.0
        rhs = n * np.sqrt(gm / (1.0 + gm))
        res = lhs - rhs
        pooled.append(res)
        i = int(np.argmin(res))
        if res[i] < min_res:
            min_res = float(res[i])
            worst = tuple(x[i])
        violations += int(np.count_nonzero(res < -abs_tol))
        total += m
    quantiles = {}
    if pooled:
        quantiles["sqrt-fraction"] = [
            float(q) for q in np.quantile(np.concatenate(pooled), _QUANTILES)
        ]
    return SuiteResult(total, violations, {"sqrt-fraction": min_res}, worst, quantiles)


# -- the box-volume route to AM >= GM ----------------------------------------


def _neville_at_zero(xs: np.ndarray, ys: np.ndarray) -> float:
    pts = min(len(xs), 4)
    order = np.argsort(xs)[:pts]
    x = xs[order].astype(float)
    t = ys[order].astype(float).copy()
    for level in range(1, pts):
        for i in range(pts - level):
            t[i] = ((0.0 - x[i + level]) * t[i] - (0.0 - x[i]) * t[i + 1]) / (
                x[i] - x[i + level]
            )
    return float(t[0])


def bm_to_amgm_limit(
    values: Sequence[float], epsilons: Sequence[float], use_geometry: bool | None = None
) -> LimitReport:
    """Degenerate the volume inequality for a cube [0,e]^n against the box
    with sides x_i and watch AM >= GM emerge at first order in e.

    For each e the finite statement  prod(x_i+e)^{1/n} >= GM + e  is checked
    (via actual Minkowski sums and exact volumes in low dimension, closed
    form above the exact cap), and the first-order coefficients of both the
    root and volume residuals are extrapolated and compared with their
    closed forms.
    """
    x = _validate(values)
    if np.any(x <= 0):
        raise OutOfRangeEntry("entries must be strictly positive")
    eps = np.asarray(sorted(set(float(e) for e in epsilons), reverse=True))
    if len(eps) == 0 or eps[-1] <= 0:
        raise OutOfRangeEntry("epsilons must be positive")
    n = len(x)
    gm = geometric_mean(x)
    if use_geometry is None:
        use_geometry = n <= 4

    root_res = np.empty(len(eps))
    vol_ratio = np.empty(len(eps))
    ok = True
    for i, e in enumerate(eps):
        if use_geometry:
            from . import bodies

            k = bodies.box([0.0] * n, [e] * n)
            l = bodies.box([0.0] * n, x)
            total = bodies.minkowski_sum(k, l).volume()
        else:
            total = float(np.prod(x + e))
        root_res[i] = total ** (1.0 / n) - gm - e
        vol_ratio[i] = (total - (gm + e) ** n) / e
        if root_res[i] < -1e-12 * (1.0 + gm + e):
            ok = False

    root_ratio = root_res / eps
    # closed-form leading coefficients of the two residual expansions
    root_first = float(np.mean(gm / x)) - 1.0
    volume_first = float(np.sum(np.prod(x) / x)) - n * gm ** (n - 1)
    return LimitReport(
        values=x,
        epsilons=eps,
        root_residuals=root_res,
        root_ratios=root_ratio,
        volume_ratios=vol_ratio,
        root_ratio_limit=_neville_at_zero(eps, root_ratio),
        volume_ratio_limit=_neville_at_zero(eps, vol_ratio),
        root_first_order=root_first,
        volume_first_order=volume_first,
        inequality_ok=ok,
    )
