"""End-to-end inequality verifiers and experiments.

Ties the geometry kernel and the pair functionals together: quantitative
isoperimetric and Brunn-Minkowski checks with their explicit constants, the
derivation of the latter from the former, the shifted-box family that pins
an empirical lower bound on the optimal constant, and a randomized
worst-case search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import functionals
from .bodies import ConvexBody, box, minkowski_sum, random_body
from .errors import NotCentrallySymmetric, OutOfRangeEntry
from .functionals import BodyPairMetrics
from .rng import RngSeed

REPORT_NAMES = ("iso", "iso-cor", "bm", "wulff", "bm-classic", "dar")
_REL_TOL = 1e-9


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    ratio: float  # defect-usage fraction; must be <= 1 for quantitative forms
    constant_used: float | None
    q_used: float | None
    inputs: dict
    passed: bool


@dataclass(frozen=True)
class BoxRow:
    n: int
    m: int
    epsilon: float
    beta: float
    asymmetry: float
    sigma: float
    c_lower: float


@dataclass(frozen=True)
class ExperimentTable:
    rows: list
    limits: dict
    fitted_exponent: float | None
    exponent_stderr: float | None


def _guarded_ratio(defect_used: float, allowance: float) -> float:
    """allowance/defect with the 0/0 equality case mapped to 0."""
    if allowance <= 1e-13:
        return 0.0 if defect_used <= 1e-13 else float("inf")
    return float(defect_used / allowance)


# -- quantitative verifiers ---------------------------------------------------


def verify_isoperimetric(
    k: ConvexBody,
    l: ConvexBody,
    constant_mode: str = "general",
    metrics: BodyPairMetrics | None = None,
    seed: RngSeed | None = None,
) -> InequalityReport:
    """Weighted perimeter of K against its sharp bound inflated by the
    squared asymmetry over an explicit constant:

      body-specific: C = 100 n^4 q^2 (q the roundness upper bound of K)
      general:       C = 100 n^6
      symmetric:     C = 100 n^5 (requires centrally symmetric K)
    """
    n = k.dimension
    q_used = None
    if constant_mode == "body-specific":
        q_used = functionals.inverse_roundness(k).q_upper
        constant = 100.0 * n**4 * q_used**2
        name = "iso"
    elif constant_mode == "general":
        constant = 100.0 * n**6
        name = "iso-cor"
    elif constant_mode == "symmetric":
        if not k.is_centrally_symmetric():
            raise NotCentrallySymmetric(
                "symmetric constant mode requires a centrally symmetric body"
            )
        constant = 100.0 * n**5
        name = "iso-cor"
    else:
        raise ValueError(f"unknown constant_mode {constant_mode!r}")
    if metrics is None:
        metrics = functionals.relative_asymmetry(k, l, seed)
    asym = metrics.asymmetry
    perimeter = functionals.anisotropic_perimeter(k, l)
    base = n * k.volume() ** ((n - 1) / n) * l.volume() ** (1.0 / n)
    delta = perimeter / base - 1.0
    rhs = base * (1.0 + asym**2 / constant)
    passed = perimeter >= rhs - _REL_TOL * (1.0 + abs(rhs))
    return InequalityReport(
        name=name,
        lhs=perimeter,
        rhs=rhs,
        ratio=_guarded_ratio(asym**2 / constant, delta),
        constant_used=constant,
        q_used=q_used,
        inputs={"k": k.label, "l": l.label, "mode": constant_mode,
                "asymmetry": asym, "deficit": delta},
        passed=bool(passed),
    )


def verify_bm(
    k: ConvexBody,
    l: ConvexBody,
    metrics: BodyPairMetrics | None = None,
    seed: RngSeed | None = None,
    constant: float | None = None,
) -> InequalityReport:
    """Brunn-Minkowski deficit against asymmetry^2 / (C sigma^{1/n}) with
    C = 400 n^6."""
    n = k.dimension
    if metrics is None:
        metrics = functionals.relative_asymmetry(k, l, seed)
    if metrics.bm_deficit is None:
        metrics = functionals.bm_quantities(k, l, base=metrics)
    c_used = 400.0 * n**6 if constant is None else constant
    beta = metrics.bm_deficit
    allowance = metrics.asymmetry**2 / (c_used * metrics.sigma ** (1.0 / n))
    passed = beta >= allowance - _REL_TOL * (1.0 + abs(beta))
    return InequalityReport(
        name="bm",
        lhs=beta,
        rhs=allowance,
        ratio=_guarded_ratio(allowance, beta),
        constant_used=c_used,
        q_used=None,
        inputs={"k": k.label, "l": l.label, "asymmetry": metrics.asymmetry,
                "sigma": metrics.sigma},
        passed=bool(passed),
    )


def verify_wulff(e: ConvexBody, l: ConvexBody) -> InequalityReport:
    """Plain sharp lower bound on the weighted perimeter (no stability term)."""
    n = e.dimension
    perimeter = functionals.anisotropic_perimeter(e, l)
    bound = n * e.volume() ** ((n - 1) / n) * l.volume() ** (1.0 / n)
    passed = perimeter >= bound - _REL_TOL * (1.0 + abs(bound))
    return InequalityReport(
        name="wulff",
        lhs=perimeter,
        rhs=bound,
        ratio=bound / perimeter if perimeter > 0 else float("inf"),
        constant_used=None,
        q_used=None,
        inputs={"k": e.label, "l": l.label},
        passed=bool(passed),
    )


def verify_bm_classic(k: ConvexBody, l: ConvexBody) -> InequalityReport:
    n = k.dimension
    lhs = minkowski_sum(k, l).volume() ** (1.0 / n)
    rhs = k.volume() ** (1.0 / n) + l.volume() ** (1.0 / n)
    passed = lhs >= rhs - _REL_TOL * (1.0 + abs(rhs))
    return InequalityReport(
        name="bm-classic",
        lhs=lhs,
        rhs=rhs,
        ratio=rhs / lhs if lhs > 0 else float("inf"),
        constant_used=None,
        q_used=None,
        inputs={"k": k.label, "l": l.label},
        passed=bool(passed),
    )


def verify_dar(
    k: ConvexBody, l: ConvexBody, seed: RngSeed | None = None,
    tol: float = 1e-6,
) -> InequalityReport:
    """Maximal-overlap strengthening of the volume inequality (proven for
    n = 2): |K+L|^{1/n} >= M^{1/n} + (|K||L|)^{1/n} / M^{1/n}."""
    n = k.dimension
    overlap = functionals.dar_overlap(k, l, seed)
    lhs = minkowski_sum(k, l).volume() ** (1.0 / n)
    root = overlap ** (1.0 / n)
    rhs = root + (k.volume() * l.volume()) ** (1.0 / n) / root
    passed = lhs >= rhs - tol
    return InequalityReport(
        name="dar",
        lhs=lhs,
        rhs=rhs,
        ratio=rhs / lhs if lhs > 0 else float("inf"),
        constant_used=None,
        q_used=None,
        inputs={"k": k.label, "l": l.label, "max_overlap": overlap},
        passed=bool(passed),
    )


def derive_bm_from_iso(
    k: ConvexBody, l: ConvexBody, seed: RngSeed | None = None
) -> InequalityReport:
    """Numerical walk through the reduction of the Brunn-Minkowski bound to
    the isoperimetric one: perimeter additivity with its equality case at
    K+L, the asymmetry triangle inequality through K+L, and the final
    deficit bound whose constant is 4x the general isoperimetric constant.
    """
    n = k.dimension
    total = minkowski_sum(k, l)
    p_sum = functionals.anisotropic_perimeter(total, k) + functionals.anisotropic_perimeter(total, l)
    additivity_residual = float(abs(p_sum - n * total.volume()) / (n * total.volume()))

    a_kl = functionals.relative_asymmetry(k, l, seed).asymmetry
    a_mk = functionals.relative_asymmetry(total, k, seed).asymmetry
    a_ml = functionals.relative_asymmetry(total, l, seed).asymmetry
    triangle_slack = float(a_kl - (a_mk + a_ml))

    report = verify_bm(k, l, seed=seed, constant=4.0 * 100.0 * n**6)
    passed = (
        report.passed
        and additivity_residual < 1e-9
        and triangle_slack <= 2e-4
    )
    inputs = dict(report.inputs)
    inputs.update(
        perimeter_additivity_residual=additivity_residual,
        asymmetry_triangle_slack=triangle_slack,
    )
    return InequalityReport(
        name="bm",
        lhs=report.lhs,
        rhs=report.rhs,
        ratio=report.ratio,
        constant_used=report.constant_used,
        q_used=None,
        inputs=inputs,
        passed=bool(passed),
    )


# -- shifted-box family -------------------------------------------------------


def box_pair(n: int, epsilon: float) -> tuple[ConvexBody, ConvexBody]:
    """Unit cube against the cube stretched by 1+epsilon on the last
    ceil(n/2) axes (the family driving the lower-bound experiment)."""
    m = n // 2
    highs = [1.0] * m + [1.0 + epsilon] * (n - m)
    return (
        box([0.0] * n, [1.0] * n, label=f"cube-{n}d"),
        box([0.0] * n, highs, label=f"stretched-{n}d-eps{epsilon}"),
    )


def box_beta(n: int, epsilon: float) -> float:
    m = n // 2
    alpha = (n - m) / n
    numer = 2.0 * math.expm1(alpha * math.log1p(epsilon / 2.0)) - math.expm1(
        alpha * math.log1p(epsilon)
    )
    return numer / (1.0 + (1.0 + epsilon) ** alpha)


def box_asymmetry(n: int, epsilon: float) -> float:
    m = n // 2
    alpha = (n - m) / n
    return -2.0 * math.expm1(-alpha * m * math.log1p(epsilon))


def box_sigma(n: int, epsilon: float) -> float:
    m = n // 2
    return (1.0 + epsilon) ** (n - m)


def box_c_lower(n: int, epsilon: float) -> float:
    a = box_asymmetry(n, epsilon)
    return a * a / (box_beta(n, epsilon) * box_sigma(n, epsilon) ** (1.0 / n))


def box_limit_exact(n: int) -> float:
    """Closed-form small-epsilon limit of the lower bound: 32 alpha m^2/(1-alpha)."""
    m = n // 2
    alpha = (n - m) / n
    return 32.0 * alpha * m * m / (1.0 - alpha)


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    pts = min(len(xs), 4)
    order = np.argsort(xs)[:pts]
    x = np.asarray(xs, dtype=float)[order]
    t = np.asarray(ys, dtype=float)[order].copy()
    for level in range(1, pts):
        for i in range(pts - level):
            t[i] = (-x[i + level] * t[i] + x[i] * t[i + 1]) / (x[i] - x[i + level])
    return float(t[0])


def box_conjecture_experiment(
    n_range: Sequence[int], epsilon_list: Sequence[float]
) -> ExperimentTable:
    """Closed-form sweep of the box family: per-epsilon rows, extrapolated
    per-n limits, and a log-log exponent fit of the limits against n."""
    ns = sorted(set(int(n) for n in n_range))
    eps = sorted(set(float(e) for e in epsilon_list), reverse=True)
    if not ns or min(ns) < 2 or max(ns) > 12:
        raise OutOfRangeEntry("n_range must lie within 2..12")
    if not eps or min(eps) <= 0 or max(eps) > 0.5:
        raise OutOfRangeEntry("epsilons must lie in (0, 0.5]")
    rows = []
    limits = {}
    for n in ns:
        vals = []
        for e in eps:
            c = box_c_lower(n, e)
            rows.append(
                BoxRow(
                    n=n,
                    m=n // 2,
                    epsilon=e,
                    beta=box_beta(n, e),
                    asymmetry=box_asymmetry(n, e),
                    sigma=box_sigma(n, e),
                    c_lower=c,
                )
            )
            vals.append(c)
        limits[n] = _neville_at_zero(eps, vals) if len(eps) > 1 else vals[0]
    if len(ns) >= 2:
        lx = np.log(np.asarray(ns, dtype=float))
        ly = np.log(np.asarray([limits[n] for n in ns]))
        slope, intercept = np.polyfit(lx, ly, 1)
        resid = ly - (slope * lx + intercept)
        if len(ns) > 2:
            se = math.sqrt(
                float(resid @ resid) / (len(ns) - 2) / float(((lx - lx.mean()) ** 2).sum())
            )
        else:
            se = 0.0
        exponent, stderr = float(slope), se
    else:
        exponent, stderr = None, None
    return ExperimentTable(rows, limits, exponent, stderr)


def experiment_table_to_csv(table: ExperimentTable) -> str:
    lines = ["n,m,epsilon,beta,asymmetry,sigma,c_lower"]
    for r in table.rows:
        lines.append(
            f"{r.n},{r.m},{r.epsilon!r},{r.beta!r},{r.asymmetry!r},"
            f"{r.sigma!r},{r.c_lower!r}"
        )
    return "\n".join(lines) + "\n"


# -- corpora and search ---------------------------------------------------------


def random_pair_corpus(
    n: int, count: int, seed: RngSeed, symmetric_k: bool | None = None
) -> list[tuple[ConvexBody, ConvexBody]]:
    """Deterministic random test pairs.  By default even-indexed pairs get a
    centrally symmetric K so the symmetric constant mode is exercised; pass
    symmetric_k to force one behavior for every pair."""
    pairs = []
    for i in range(count):
        s = seed.derive(i)
        symmetric = (i % 2 == 0) if symmetric_k is None else bool(symmetric_k)
        m_k = n + 2 + (i % 3 if not symmetric else 0)
        m_l = n + 2 + ((i + 1) % 3)
        k = random_body(n, m_k, symmetric, s.derive(1))
        l = random_body(n, m_l, False, s.derive(2))
        pairs.append((k, l))
    return pairs


def worst_case_search(
    n: int, budget: int, seed: RngSeed
) -> list[InequalityReport]:
    """Randomized search for pairs using the largest fraction of the allowed
    Brunn-Minkowski defect.  The prior mixes uniform random pairs,
    near-homothetic jitters (the inequality is tightest near equality), and
    the shifted-box family; returns the top ten reports by usage ratio."""
    if n > 5:
        raise OutOfRangeEntry("search relies on exact volumes; n must be <= 5")
    reports = []
    for i in range(budget):
        s = seed.derive(i)
        kind = i % 5
        g = s.generator()
        if kind == 4:
            eps = 10.0 ** g.uniform(math.log10(0.02), math.log10(0.5))
            k, l = box_pair(n, eps)
        elif kind >= 2:
            k = random_body(n, n + 3, False, s.derive(1))
            scale = math.exp(g.uniform(-0.3, 0.3))
            amp = 10.0 ** g.uniform(-3.0, -1.0) * k.enclosing_ball().radius
            jitter = amp * g.standard_normal(k.vertices.shape)
            from .bodies import convex_hull

            l = convex_hull(
                scale * k.vertices + jitter, label=f"{k.label}-jitter{i}"
            )
        else:
            k = random_body(n, n + 3 + (i % 3), False, s.derive(1))
            l = random_body(n, n + 3 + ((i + 1) % 3), False, s.derive(2))
        metrics = functionals.bm_quantities(
            k, l, base=functionals.relative_asymmetry(k, l, s.derive(3))
        )
        report = verify_bm(k, l, metrics=metrics)
        inputs = dict(report.inputs)
        inputs.update(
            index=i,
            seed=[seed.seed, seed.stream],
            c_lower=report.ratio * report.constant_used,
        )
        reports.append(
            InequalityReport(
                name=report.name,
                lhs=report.lhs,
                rhs=report.rhs,
                ratio=report.ratio,
                constant_used=report.constant_used,
                q_used=None,
                inputs=inputs,
                passed=report.passed,
            )
        )
    reports.sort(key=lambda r: -r.ratio)
    return reports[:10]
