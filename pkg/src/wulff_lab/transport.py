"""Transport diagnostics: discrete optimal maps, Jacobian spectra, the
eigenvalue inequality chain, and a boundary trace inequality in the plane.

The discrete map is an exact squared-distance assignment between equal-size
uniform samples of two bodies; local Jacobians are symmetrized least-squares
affine fits around interior anchors.  The chain evaluator checks every
displayed inequality of the product-of-eigenvalues estimate used to pass
from transport maps to volume bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .bodies import ConvexBody, sample_interior
from .errors import (
    DimensionMismatch,
    NotTwoDimensional,
    OutOfRegime,
    OutOfRangeEntry,
    SampleBudgetExceeded,
)
from .rng import RngSeed

TRACE_CONSTANT = 2.0 * math.sqrt(2.0) / math.log(2.0)
MAX_ASSIGNMENT_SAMPLES = 4096


# -- discrete optimal transport ------------------------------------------------


@dataclass(frozen=True)
class DiscreteMap:
    sources: np.ndarray
    targets: np.ndarray
    assignment: np.ndarray
    source_body: ConvexBody | None = None
    target_body: ConvexBody | None = None

    @property
    def matched_targets(self) -> np.ndarray:
        return self.targets[self.assignment]


def assignment_map(
    sources: np.ndarray,
    targets: np.ndarray,
    source_body: ConvexBody | None = None,
    target_body: ConvexBody | None = None,
) -> DiscreteMap:
    """Exact minimum total squared-distance matching of two point clouds."""
    s = np.asarray(sources, dtype=float)
    t = np.asarray(targets, dtype=float)
    if s.shape != t.shape:
        raise DimensionMismatch("sources and targets must have the same shape")
    if len(s) > MAX_ASSIGNMENT_SAMPLES:
        raise SampleBudgetExceeded(
            f"assignment solver capped at {MAX_ASSIGNMENT_SAMPLES} samples"
        )
    cost = cdist(s, t, metric="sqeuclidean")
    _, cols = linear_sum_assignment(cost)
    return DiscreteMap(s, t, cols, source_body, target_body)


def discrete_brenier(
    k: ConvexBody, l: ConvexBody, n_samples: int, seed: RngSeed
) -> DiscreteMap:
    """Discrete stand-in for the optimal (gradient-of-convex) transport map:
    match uniform samples of K to uniform samples of L at minimal total
    squared distance."""
    if k.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    if n_samples > MAX_ASSIGNMENT_SAMPLES:
        raise SampleBudgetExceeded(
            f"n_samples must be <= {MAX_ASSIGNMENT_SAMPLES}"
        )
    src = sample_interior(k, n_samples, seed.derive(1).generator())
    tgt = sample_interior(l, n_samples, seed.derive(2).generator())
    return assignment_map(src, tgt, k, l)


def global_affine_fit(dmap: DiscreteMap) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares affine fit target ~ M source + c over all matched pairs."""
    s = dmap.sources
    design = np.column_stack([s, np.ones(len(s))])
    sol, *_ = np.linalg.lstsq(design, dmap.matched_targets, rcond=None)
    return sol[:-1].T.copy(), sol[-1].copy()


def swap_violations(dmap: DiscreteMap, tol: float = 1e-9) -> int:
    """Number of pairwise swaps that would lower the total cost (must be 0
    for an optimal assignment); full scan, intended for <= 1024 samples."""
    s = dmap.sources
    t = dmap.matched_targets
    own = ((s - t) ** 2).sum(axis=1)
    cross = cdist(s, t, metric="sqeuclidean")
    gain = own[:, None] + own[None, :] - cross - cross.T
    np.fill_diagonal(gain, 0.0)
    return int(np.count_nonzero(gain > tol) // 2)


def cycle_violations(
    dmap: DiscreteMap, n_triples: int, seed: RngSeed, tol: float = 1e-9
) -> int:
    """Monotonicity spot-check: sampled 3-cycles that would lower the cost."""
    g = seed.generator()
    m = len(dmap.sources)
    idx = g.integers(0, m, size=(n_triples, 3))
    s = dmap.sources
    t = dmap.matched_targets
    bad = 0
    for i, j, k in idx:
        if i == j or j == k or i == k:
            continue
        now = ((s[[i, j, k]] - t[[i, j, k]]) ** 2).sum()
        rolled = ((s[[i, j, k]] - t[[j, k, i]]) ** 2).sum()
        if rolled < now - tol:
            bad += 1
    return bad


# -- local Jacobians ------------------------------------------------------------


@dataclass(frozen=True)
class LocalJacobian:
    anchor: np.ndarray
    matrix: np.ndarray
    eigenvalues: np.ndarray  # real, descending


@dataclass(frozen=True)
class JacobianDiagnostics:
    jacobians: list
    quality_score: float
    skipped: int
    median_det: float


def local_jacobians(
    dmap: DiscreteMap,
    k_neighbors: int | None = None,
    max_anchors: int = 512,
    det_tolerance: float = 0.25,
) -> JacobianDiagnostics:
    """Symmetrized weighted least-squares affine fits of the map around
    interior anchors; anchors closer to the boundary than one neighbor
    radius are excluded (boundary fits are biased).

    The default neighborhood is ~96 points: the assignment's matching noise
    enters the fitted gradient at order sqrt(log m)/k, so k must be large
    enough to average it out, nearly independently of the sample count."""
    s = dmap.sources
    t = dmap.matched_targets
    m, n = s.shape
    k = k_neighbors if k_neighbors is not None else max(2 * n + 2, min(m // 4, 96))
    if k < 2 * n + 1:
        raise OutOfRangeEntry("k_neighbors must be at least 2n+1")
    k = min(k, m)
    tree = cKDTree(s)
    dist, idx = tree.query(s, k=k)
    radius = dist[:, -1]
    if dmap.source_body is not None:
        a, b = dmap.source_body.facets()
        slack = b[None, :] - s @ a.T
        interior = slack.min(axis=1) > radius
    else:
        interior = np.ones(m, dtype=bool)
    anchors = np.flatnonzero(interior)
    if len(anchors) > max_anchors:
        anchors = anchors[
            np.linspace(0, len(anchors) - 1, max_anchors).round().astype(int)
        ]
    vol_ratio = None
    if dmap.source_body is not None and dmap.target_body is not None:
        vol_ratio = dmap.target_body.volume() / dmap.source_body.volume()

    jacobians = []
    skipped = 0
    dets = []
    for i in anchors:
        nb = idx[i]
        x = s[nb] - s[i]
        y = t[nb]
        d = dist[i]
        w = (1.0 - (d / (d[-1] + 1e-30)) ** 3) ** 3
        w[0] = 1.0
        design = np.column_stack([x, np.ones(k)]) * np.sqrt(w)[:, None]
        rhs = y * np.sqrt(w)[:, None]
        sol, _, rank, sv = np.linalg.lstsq(design, rhs, rcond=None)
        if rank < n + 1 or sv[0] / max(sv[-1], 1e-300) > 1e8:
            skipped += 1
            continue
        mat = sol[:-1].T
        sym = 0.5 * (mat + mat.T)
        eig = np.linalg.eigvalsh(sym)[::-1]
        jacobians.append(LocalJacobian(s[i].copy(), sym, eig))
        dets.append(float(np.prod(eig)))
    if vol_ratio and dets:
        good = sum(1 for d in dets if abs(d - vol_ratio) <= det_tolerance * vol_ratio)
        quality = good / len(dets)
    else:
        quality = float("nan")
    med = float(np.median(dets)) if dets else float("nan")
    return JacobianDiagnostics(jacobians, quality, skipped, med)


# -- eigenvalue chain ------------------------------------------------------------


@dataclass(frozen=True)
class ChainSample:
    """One evaluation point (eigenvalue tuple, volume-ratio root, epsilon)
    of the product estimate, with its derived aggregates."""

    eigenvalues: np.ndarray
    mu: float
    epsilon: float

    def __post_init__(self) -> None:
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        if lam.ndim != 1 or len(lam) < 2 or np.any(lam <= 0):
            raise OutOfRangeEntry("eigenvalues must be positive, length >= 2")
        if self.mu <= 0 or self.epsilon <= 0:
            raise OutOfRangeEntry("mu and epsilon must be positive")
        if self.epsilon * lam.max() > 0.5 + 1e-12:
            raise OutOfRegime(
                "epsilon * max(eigenvalue) exceeds 1/2; outside the proven regime"
            )

    @property
    def fractions(self) -> np.ndarray:
        el = self.epsilon * self.eigenvalues
        return el / (1.0 + el)

    @property
    def u(self) -> float:
        return float(np.exp(np.mean(np.log(self.fractions))) ** 0.5)

    @property
    def v(self) -> float:
        em = self.epsilon * self.mu
        return math.sqrt(em / (1.0 + em))

    @property
    def U(self) -> float:
        lam = self.eigenvalues
        return float(
            np.sum(self.epsilon * (lam - self.mu) ** 2 / (lam + self.mu))
        )

    @property
    def V(self) -> float:
        return float(np.sqrt(np.sum((self.eigenvalues - self.mu) ** 2)))

    @property
    def W(self) -> float:
        return float(np.sum(self.eigenvalues + self.mu))

    def product_constraint_ok(self, tol: float = 1e-9) -> bool:
        """Whether the eigenvalue product matches mu^n (the volume identity
        several chain lines depend on)."""
        n = len(self.eigenvalues)
        target = self.mu**n
        return abs(float(np.prod(self.eigenvalues)) - target) <= tol * target


@dataclass(frozen=True)
class ChainLine:
    lhs: float
    rhs: float
    holds: bool
    applicable: bool


@dataclass(frozen=True)
class ChainReport:
    lines: dict
    product_constraint_ok: bool
    all_hold: bool  # over applicable lines


def chain_evaluate(sample: ChainSample, tol: float = 1e-12) -> ChainReport:
    """Evaluate every displayed inequality of the eigenvalue chain.

    Lines that are only derived under the eigenvalue-product identity are
    marked inapplicable when the sample violates it; the two lines carrying
    the 2.1 slack factor are additionally gated on their own sufficient
    smallness condition (they can genuinely fail near the regime edge).
    """
    lam = sample.eigenvalues
    n = len(lam)
    eps = sample.epsilon
    mu = sample.mu
    t = sample.fractions
    sq = np.sqrt(t)
    u = sample.u
    v = sample.v
    gm_t = u * u
    am_t = float(t.mean())
    recip = 1.0 / (1.0 + eps * lam)
    prod_root = float(np.exp(np.mean(np.log1p(eps * lam))))
    constraint = sample.product_constraint_ok()

    def line(lhs, rhs, applicable=True, scale=1.0):
        return ChainLine(
            float(lhs), float(rhs), bool(lhs >= rhs - tol * scale), bool(applicable)
        )

    dev_u = float(np.sum((sq - u) ** 2))
    dev_v = float(np.sum((sq - v) ** 2))

    lines = {}
    lines["am-gm-fractions"] = line(am_t - dev_u / n, gm_t)
    lines["am-gm-reciprocals"] = line(
        float(recip.mean()), float(np.exp(np.mean(np.log(recip))))
    )
    lhs_38 = 1.0 - dev_u / n
    rhs_38 = (1.0 + eps * mu) / prod_root
    lines["normalized-product"] = ChainLine(
        lhs_38,
        rhs_38,
        bool(rhs_38 <= lhs_38 + tol and lhs_38 <= 1.0 + tol),
        constraint,
    )
    lines["v-dominates-u"] = line(v, u, applicable=constraint)
    lines["defect-recentering"] = line(dev_u, dev_v, applicable=constraint)
    lines["sqrt-sum-doubled"] = line(
        2.0 * float(sq.sum()), n * (u + v), applicable=constraint
    )
    lines["sqrt-sum-target"] = line(float(sq.sum()), n * v, applicable=constraint)
    lines["product-defect"] = line(1.0 - dev_v / n, rhs_38, applicable=constraint)

    # per-term slack: (sqrt(t_i) - v)^2 >= eps (lam_i - mu)^2 / (2.1 (lam_i + mu)),
    # valid once 2 (1 + eps lam_i)(1 + eps mu)(lam_i + mu + eps lam_i mu) <= 2.1 (lam_i + mu)
    slack_cond = np.all(
        2.0 * (1.0 + eps * lam) * (1.0 + eps * mu) * (lam + mu + eps * lam * mu)
        <= 2.1 * (lam + mu)
    )
    u_over = sample.U / 2.1
    lines["per-term-slack"] = line(
        dev_v, u_over, applicable=constraint and bool(slack_cond)
    )
    tail_ok = constraint and bool(slack_cond) and u_over / n < 1.0
    lines["bernoulli-tail"] = line(
        float(np.prod(1.0 + eps * lam)),
        (1.0 + eps * mu) ** n * (1.0 + u_over),
        applicable=tail_ok,
        scale=(1.0 + eps * mu) ** n,
    )
    lines["sum-vs-norm"] = line(
        math.sqrt(n) * sample.V + 2.0 * n * mu, sample.W
    )

    all_hold = all(l.holds for l in lines.values() if l.applicable)
    return ChainReport(lines, constraint, all_hold)


@dataclass(frozen=True)
class ChainSuiteResult:
    count: int
    violations: int
    min_residual: float
    worst: dict | None


def chain_suite(count: int, ns: Sequence[int], seed: RngSeed) -> ChainSuiteResult:
    """Random in-regime tuples with the eigenvalue product pinned to mu^n;
    vectorized check of the combined product-defect bound."""
    min_res = np.inf
    worst = None
    violations = 0
    total = 0
    per = [count // len(ns)] * len(ns)
    per[0] += count - sum(per)
    for n, m in zip(ns, per):
        if m == 0:
            continue
        g = seed.derive(n).generator()
        lam = np.exp(g.uniform(math.log(0.2), math.log(5.0), size=(m, n)))
        mu = np.exp(g.uniform(math.log(0.5), math.log(2.0), size=m))
        lam *= (mu / np.exp(np.mean(np.log(lam), axis=1)))[:, None]
        eps = g.uniform(0.05, 1.0, size=m) * (0.5 / lam.max(axis=1))
        el = eps[:, None] * lam
        t = el / (1.0 + el)
        em = eps * mu
        v = np.sqrt(em / (1.0 + em))
        dev_v = ((np.sqrt(t) - v[:, None]) ** 2).sum(axis=1)
        lhs = 1.0 - dev_v / n
        rhs = (1.0 + em) / np.exp(np.mean(np.log1p(el), axis=1))
        res = lhs - rhs
        i = int(np.argmin(res))
        if res[i] < min_res:
            min_res = float(res[i])
            worst = {"eigenvalues": lam[i].tolist(), "mu": float(mu[i]),
                     "epsilon": float(eps[i])}
        violations += int(np.count_nonzero(res < -1e-12))
        total += m
    return ChainSuiteResult(total, violations, float(min_res), worst)


# -- planar trace inequality -----------------------------------------------------


@dataclass(frozen=True)
class TraceResult:
    lhs: float
    rhs: float
    median_value: float
    gradient_integral: float
    max_edge: float
    n_triangles: int

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - 1e-9 * (1.0 + abs(self.rhs))


def fan_triangulation(
    body: ConvexBody, max_edge: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Conforming triangulation of a polygon: fan from the centroid,
    uniformly subdivided so that no edge exceeds `max_edge` (default:
    1/32 of the enclosing radius)."""
    if body.dimension != 2:
        raise NotTwoDimensional("triangulation helper is planar only")
    cap = max_edge if max_edge is not None else body.enclosing_ball().radius / 32.0
    c = body.centroid()
    ring = body.vertices[body.hull().vertices]
    m = len(ring)
    nxt = np.roll(np.arange(m), -1)
    longest = max(
        float(np.linalg.norm(ring - c, axis=1).max()),
        float(np.linalg.norm(ring[nxt] - ring, axis=1).max()),
    )
    k = max(1, int(math.ceil(longest / cap)))
    # barycentric lattice of one subdivided triangle, shared by every fan wedge
    a, b = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = (a + b) <= k
    a = a[keep]
    b = b[keep]
    node_id = -np.ones((k + 1, k + 1), dtype=int)
    node_id[a, b] = np.arange(len(a))
    tris = []
    for i in range(k):
        for j in range(k - i):
            tris.append((node_id[i, j], node_id[i + 1, j], node_id[i, j + 1]))
            if i + j <= k - 2:
                tris.append(
                    (node_id[i + 1, j], node_id[i + 1, j + 1], node_id[i, j + 1])
                )
    tris = np.asarray(tris)
    frac_a = (a / k)[:, None]
    frac_b = (b / k)[:, None]

    pts_list = []
    tri_list = []
    offset = 0
    for w in range(m):
        p = c + frac_a * (ring[w] - c) + frac_b * (ring[nxt[w]] - c)
        pts_list.append(p)
        tri_list.append(tris + offset)
        offset += len(p)
    pts = np.vstack(pts_list)
    tri = np.vstack(tri_list)
    # merge duplicated lattice points along shared wedge edges
    scale = 1.0 + float(np.abs(pts).max())
    keyed = np.round(pts / (1e-9 * scale)).astype(np.int64)
    _, first, inverse = np.unique(
        keyed, axis=0, return_index=True, return_inverse=True
    )
    return pts[first], inverse[tri]


def _boundary_edges(triangles: np.ndarray) -> np.ndarray:
    edges = np.sort(
        triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1
    )
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    return uniq[counts == 1]


def _weighted_median(lengths: np.ndarray, va: np.ndarray, vb: np.ndarray) -> float:
    """Minimizer of the arc-length integral of |f - c| over the boundary
    trace; bisection on the signed-measure balance, exact for PL f."""
    low_v = np.minimum(va, vb)
    high_v = np.maximum(va, vb)
    span = high_v - low_v
    lo = float(low_v.min())
    hi = float(high_v.max())
    if hi - lo <= 0:
        return lo
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        # linear on each edge, so the sub-level fraction depends only on the
        # value range, not the traversal direction
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(
                span > 0,
                np.clip((mid - low_v) / np.where(span > 0, span, 1.0), 0.0, 1.0),
                (low_v < mid).astype(float),
            )
        below = float(np.sum(lengths * frac))
        above = float(np.sum(lengths * (1.0 - frac)))
        if below < above:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trace_inequality_check(
    body: ConvexBody,
    points: np.ndarray,
    triangles: np.ndarray,
    values: np.ndarray,
) -> TraceResult:
    """Check (C0 n R / 2r) * integral of |grad f| over K  >=  minimal
    boundary integral of |f - c|, for piecewise-linear f on a triangulation
    of the polygon K."""
    if body.dimension != 2:
        raise NotTwoDimensional("trace check is planar only")
    pts = np.asarray(points, dtype=float)
    tri = np.asarray(triangles, dtype=int)
    f = np.asarray(values, dtype=float)
    p0, p1, p2 = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    e1 = p1 - p0
    e2 = p2 - p0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    d1 = f[tri[:, 1]] - f[tri[:, 0]]
    d2 = f[tri[:, 2]] - f[tri[:, 0]]
    gx = (e2[:, 1] * d1 - e1[:, 1] * d2) / det
    gy = (-e2[:, 0] * d1 + e1[:, 0] * d2) / det
    grad_int = float(np.sum(np.hypot(gx, gy) * np.abs(det) * 0.5))

    edges = _boundary_edges(tri)
    ea = pts[edges[:, 0]]
    eb = pts[edges[:, 1]]
    lengths = np.linalg.norm(eb - ea, axis=1)
    va = f[edges[:, 0]]
    vb = f[edges[:, 1]]
    c = _weighted_median(lengths, va, vb)
    sa = va - c
    sb = vb - c
    same = sa * sb >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        mixed = (sa**2 + sb**2) / (2.0 * np.abs(va - vb))
    seg = np.where(same, 0.5 * np.abs(sa + sb), mixed)
    rhs = float(np.sum(lengths * seg))

    r = body.chebyshev_ball().radius
    big_r = body.enclosing_ball().radius
    lhs = TRACE_CONSTANT * 2.0 * big_r / (2.0 * r) * grad_int
    all_e = np.sort(tri[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    max_edge = float(
        np.linalg.norm(pts[all_e[:, 1]] - pts[all_e[:, 0]], axis=1).max()
    )
    return TraceResult(lhs, rhs, c, grad_int, max_edge, len(tri))


# -- asymmetry vs gradient bound --------------------------------------------------


@dataclass(frozen=True)
class GradientBoundReport:
    asymmetry: float
    bound: float
    ratio: float
    passed: bool


def asymmetry_gradient_bound_check(
    k: ConvexBody,
    l: ConvexBody,
    dmap: DiscreteMap,
    seed: RngSeed | None = None,
) -> GradientBoundReport:
    """Compare the relative asymmetry of (K, L) against its transport-side
    bound (C0 n q / mu) average of |J - mu I| over interior Jacobians; the
    ratio bound/asymmetry must be at least 1 up to sampling noise."""
    from . import functionals

    n = k.dimension
    mu = (l.volume() / k.volume()) ** (1.0 / n)
    diag = local_jacobians(dmap)
    if not diag.jacobians:
        raise OutOfRangeEntry("no interior anchors; increase the sample count")
    dev = float(
        np.mean(
            [
                np.linalg.norm(j.matrix - mu * np.eye(n))
                for j in diag.jacobians
            ]
        )
    )
    q = functionals.inverse_roundness(k).q_upper
    bound = TRACE_CONSTANT * n * q / mu * dev
    asym = functionals.relative_asymmetry(k, l, seed).asymmetry
    if asym <= 1e-9:
        return GradientBoundReport(asym, bound, float("inf"), True)
    ratio = bound / asym
    return GradientBoundReport(asym, bound, ratio, ratio >= 1.0)
