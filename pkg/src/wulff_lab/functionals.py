"""Scalar functionals on bodies and body pairs.

Covers the weighted (Wulff) perimeter, the isoperimetric deficit, relative
asymmetry, volume-ratio sigma, the Brunn-Minkowski deficit, John-type
roundness bounds, and the maximal-overlap quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from . import _parallel
from .bodies import AffineMap, ConvexBody, apply_affine, minkowski_sum, volume
from .errors import DegenerateInput, DimensionMismatch, EllipsoidNotConverged
from .rng import RngSeed

MC_INTERSECTION_SAMPLES = 200_000


@dataclass(frozen=True)
class BodyPairMetrics:
    """Pair quantities; fields not computed by a given operation are None."""

    sigma: float
    asymmetry: float | None
    bm_deficit: float | None
    optimal_shift: np.ndarray | None
    scale_lambda: float
    converged: bool = True


@dataclass(frozen=True)
class RoundnessEstimate:
    q_upper: float
    normalizing_map: AffineMap
    r: float
    R: float


# -- perimeter and deficit ----------------------------------------------------


def facet_measures(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normals and (n-1)-measures of every facet.

    Each facet's vertex set is projected onto an orthonormal basis of its
    hyperplane and measured there by triangulation (interval length in the
    base case n = 2).
    """
    a, b = body.facets()
    verts = body.vertices
    tol = body.tolerance()
    measures = np.empty(len(a))
    for i in range(len(a)):
        on = np.abs(verts @ a[i] - b[i]) <= tol
        f = verts[on]
        if len(f) < body.dimension:
            raise DegenerateInput("facet supported by too few vertices")
        centered = f - f.mean(axis=0)
        if body.dimension == 2:
            t = centered @ _perp(a[i])
            measures[i] = float(t.max() - t.min())
            continue
        # orthonormal basis of the hyperplane via SVD of the centered verts
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        basis = vt[: body.dimension - 1]
        coords = centered @ basis.T
        if coords.shape[1] == 1:
            measures[i] = float(coords.max() - coords.min())
        else:
            measures[i] = ConvexHull(coords).volume
    return a, measures


def _perp(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


def _centered_for_support(l: ConvexBody) -> ConvexBody:
    """Translate so the origin is interior (no-op when it already is)."""
    a, b = l.facets()
    if np.all(b > l.tolerance()):
        return l
    return l.translated(-l.centroid())


def anisotropic_perimeter(e: ConvexBody, l: ConvexBody) -> float:
    """Surface integral over the boundary of `e` of the support function of
    `l` at the outward normal (the perimeter weighted by the shape of `l`)."""
    if e.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    lc = _centered_for_support(l)
    normals, measures = facet_measures(e)
    supports = (lc.vertices @ normals.T).max(axis=0)
    return float(measures @ supports)


def isoperimetric_deficit(e: ConvexBody, l: ConvexBody) -> float:
    """Relative excess of the weighted perimeter over its sharp lower bound
    n |E|^{(n-1)/n} |L|^{1/n}; zero exactly on homothets of `l`."""
    n = e.dimension
    p = anisotropic_perimeter(e, l)
    bound = n * e.volume() ** ((n - 1) / n) * l.volume() ** (1.0 / n)
    return p / bound - 1.0


# -- intersection volumes -----------------------------------------------------


def _segment_interior_point(
    a: np.ndarray, b: np.ndarray, p0: np.ndarray, p1: np.ndarray
) -> np.ndarray | None:
    """Interior point on the segment p0-p1 if it meets {A x <= b}."""
    d = p1 - p0
    ad = a @ d
    ap = a @ p0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (b - ap) / ad
    neg = ad < 0
    pos = ad > 0
    lo = max(0.0, float(t[neg].max(initial=0.0)))
    hi = min(1.0, float(t[pos].min(initial=1.0)))
    if np.any((ad == 0) & (ap > b)) or lo >= hi - 1e-14:
        return None
    return p0 + 0.5 * (lo + hi) * d


def _chebyshev_interior_point(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    m, n = a.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(
        c, A_ub=np.column_stack([a, np.ones(m)]), b_ub=b,
        bounds=[(None, None)] * n + [(0, None)], method="highs",
    )
    if res.status != 0 or res.x[-1] <= 1e-11:
        return None
    return res.x[:-1]


def _hsi_volume(a: np.ndarray, b: np.ndarray, interior: np.ndarray, joggle: bool) -> float:
    hs = HalfspaceIntersection(np.column_stack([a, -b]), interior)
    pts = np.unique(np.round(hs.intersections, 9), axis=0)
    if len(pts) <= a.shape[1]:
        return 0.0
    opts = "QJ" if joggle else None
    return float(ConvexHull(pts, qhull_options=opts).volume)


def _stacked_intersection_volume(
    a: np.ndarray, b: np.ndarray, p0: np.ndarray, p1: np.ndarray
) -> float:
    """Exact volume of {A x <= b} given interior-point hints p0, p1."""
    ip = _segment_interior_point(a, b, p0, p1)
    if ip is None:
        ip = _chebyshev_interior_point(a, b)
        if ip is None:
            return 0.0
    try:
        return _hsi_volume(a, b, ip, joggle=False)
    except QhullError:
        ip = _chebyshev_interior_point(a, b)
        if ip is None:
            return 0.0
        try:
            return _hsi_volume(a, b, ip, joggle=True)
        except QhullError:
            return 0.0


def _clip_polygon(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray | None:
    """One Sutherland-Hodgman pass: keep the side a . x <= b."""
    d = poly @ a - b
    inside = d <= 0.0
    if inside.all():
        return poly
    if not inside.any():
        return None
    nxt = np.roll(np.arange(len(poly)), -1)
    cross = inside != inside[nxt]
    denom = d - d[nxt]
    t = d / np.where(denom != 0.0, denom, 1.0)  # only crossing lanes are read
    out: list[np.ndarray] = []
    for i in range(len(poly)):
        if inside[i]:
            out.append(poly[i])
        if cross[i]:
            j = nxt[i]
            out.append(poly[i] + t[i] * (poly[j] - poly[i]))
    return np.asarray(out)


def _polygon_clip_area(poly: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    p = poly
    for i in range(len(a)):
        p = _clip_polygon(p, a[i], b[i])
        if p is None or len(p) < 3:
            return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def intersection_volume(k: ConvexBody, l: ConvexBody, shift=None) -> float:
    """Exact volume of K meet (shift + L) for n <= 4 (planar clipping in
    n = 2, halfspace stacking above)."""
    if k.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    t = np.zeros(k.dimension) if shift is None else np.asarray(shift, dtype=float)
    ak, bk = k.facets()
    if k.dimension == 2:
        poly = l.vertices[l.hull().vertices] + t
        return _polygon_clip_area(poly, ak, bk)
    al, bl = l.facets()
    a = np.vstack([ak, al])
    b = np.concatenate([bk, bl + al @ t])
    return _stacked_intersection_volume(a, b, k.centroid(), l.centroid() + t)


# -- overlap maximization -----------------------------------------------------


@dataclass(frozen=True)
class OverlapResult:
    value: float
    shift: np.ndarray
    converged: bool
    evaluations: int


def _overlap_objective(
    k: ConvexBody, l2: ConvexBody, seed: RngSeed | None, samples: int
) -> tuple[Callable[[np.ndarray], float], np.ndarray]:
    """Returns (f, start) where f(t) = |K meet (t + L2)| and start is the
    centroid-matching shift (always a point of positive overlap)."""
    n = k.dimension
    ak, bk = k.facets()
    ck = k.centroid()
    cl = l2.centroid()
    start = ck - cl
    if n == 2:
        poly = l2.vertices[l2.hull().vertices]

        def f(t: np.ndarray) -> float:
            return _polygon_clip_area(poly + t, ak, bk)

    elif n <= 4:
        al, bl = l2.facets()
        a = np.vstack([ak, al])
        rk = k.enclosing_ball()
        rl = l2.enclosing_ball()
        reach = rk.radius + rl.radius

        def f(t: np.ndarray) -> float:
            if np.linalg.norm(rk.center - rl.center - t) > reach:
                return 0.0
            b = np.concatenate([bk, bl + al @ t])
            return _stacked_intersection_volume(a, b, ck, cl + t)

    else:
        g = (seed or RngSeed(0)).generator()
        from .bodies import sample_interior

        pts = sample_interior(k, samples, g)
        vol_k = _body_volume(k, seed)
        al, bl = l2.facets()

        def f(t: np.ndarray) -> float:
            hits = np.all((pts - t) @ al.T <= bl + 1e-12, axis=1)
            return vol_k * float(np.count_nonzero(hits)) / len(pts)

    return f, start


def maximize_overlap(
    k: ConvexBody,
    l2: ConvexBody,
    seed: RngSeed | None = None,
    samples: int = MC_INTERSECTION_SAMPLES,
) -> OverlapResult:
    """max over translations t of |K meet (t + L2)|.

    Multistart Nelder-Mead from the centroid-matching shift plus one
    perturbed start per signed axis; the overlap volume is 1/n-concave on
    its support, so any start inside the support converges to the global
    maximum.  Objective values are memoized on a 1e-9 grid; starts that
    land outside the support are pulled back toward the centroid start.
    """
    n = k.dimension
    raw, start = _overlap_objective(k, l2, seed, samples)
    memo: dict[tuple, float] = {}
    evals = [0]

    def f(t: np.ndarray) -> float:
        key = tuple(np.round(t, 9))
        got = memo.get(key)
        if got is None:
            evals[0] += 1
            got = raw(t)
            memo[key] = got
        return got

    radius = k.enclosing_ball().radius
    step = 0.25 * radius
    starts = [start]
    for i in range(n):
        for sign in (1.0, -1.0):
            starts.append(start + sign * step * np.eye(n)[i])

    vol_scale = max(f(start), 1e-300)

    def run(idx_x0: tuple[int, np.ndarray]):
        _, x0 = idx_x0
        x = x0
        for _ in range(6):
            if f(x) > 0.0:
                break
            x = 0.5 * (x + start)
        # initial simplex sized to the body, not to the coordinates of x;
        # the default 5% coordinate perturbation stalls when a start
        # coordinate is near zero
        simplex = np.vstack([x, x + 0.15 * radius * np.eye(n)])
        res = minimize(
            lambda t: -f(t),
            x,
            method="Nelder-Mead",
            options={
                "xatol": 1e-6 * radius,
                "fatol": 1e-8 * vol_scale,
                "maxiter": 400 * n,
                "maxfev": 600 * n,
                "initial_simplex": simplex,
            },
        )
        return -res.fun, res.x, bool(res.success)

    results = _parallel.map_fn(run, list(enumerate(starts)))
    best_val, best_x, best_ok = results[0]
    for val, x, okflag in results[1:]:
        if val > best_val:
            best_val, best_x, best_ok = val, x, okflag
    best_x = np.asarray(best_x)
    best_x.flags.writeable = False
    return OverlapResult(float(best_val), best_x, best_ok, evals[0])


def _body_volume(body: ConvexBody, seed: RngSeed | None) -> float:
    if body.dimension <= 6:
        return body.volume()
    return volume(
        body, method="monte-carlo", seed=(seed or RngSeed(0)).derive(97)
    ).value


# -- pair metrics -------------------------------------------------------------


def relative_asymmetry(
    k: ConvexBody, l: ConvexBody, seed: RngSeed | None = None
) -> BodyPairMetrics:
    """Minimal normalized symmetric-difference volume between K and an
    optimally translated, volume-matched copy of L."""
    if k.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    n = k.dimension
    vol_k = _body_volume(k, seed)
    vol_l = _body_volume(l, seed)
    lam = (vol_k / vol_l) ** (1.0 / n)
    l2 = l.scaled(lam)
    best = maximize_overlap(k, l2, seed)
    asym = max(0.0, 2.0 - 2.0 * float(best.value) / vol_k)
    return BodyPairMetrics(
        sigma=float(max(vol_k / vol_l, vol_l / vol_k)),
        asymmetry=asym,
        bm_deficit=None,
        optimal_shift=best.shift,
        scale_lambda=float(lam),
        converged=best.converged,
    )


def bm_quantities(
    k: ConvexBody, l: ConvexBody, base: BodyPairMetrics | None = None
) -> BodyPairMetrics:
    """Brunn-Minkowski deficit and volume-ratio sigma; merges onto `base`
    when the translation optimum is already known."""
    if k.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    n = k.dimension
    vol_k = k.volume()
    vol_l = l.volume()
    vol_sum = minkowski_sum(k, l).volume()
    beta = float(vol_sum ** (1.0 / n) / (vol_k ** (1.0 / n) + vol_l ** (1.0 / n)) - 1.0)
    sigma = float(max(vol_k / vol_l, vol_l / vol_k))
    lam = float((vol_k / vol_l) ** (1.0 / n))
    if base is None:
        return BodyPairMetrics(sigma, None, beta, None, lam)
    return replace(base, sigma=sigma, bm_deficit=beta)


def dar_overlap(k: ConvexBody, l: ConvexBody, seed: RngSeed | None = None) -> float:
    """Maximal overlap volume of K with a translate of L (no rescaling)."""
    if k.dimension != l.dimension:
        raise DimensionMismatch("bodies must share a dimension")
    return maximize_overlap(k, l, seed).value


# -- roundness ----------------------------------------------------------------


def _mvee_weights(q: np.ndarray, tol: float, max_updates: int) -> tuple[np.ndarray, bool]:
    """Khachiyan barycentric coordinate ascent with away steps.

    Returns optimal point weights for the minimum-volume enclosing
    ellipsoid of the rows of q (in whatever (lifted) coordinates given).
    """
    m, d = q.shape
    u = np.full(m, 1.0 / m)
    for _ in range(max_updates):
        x = q.T @ (q * u[:, None])
        try:
            inv = np.linalg.inv(x)
        except np.linalg.LinAlgError:
            inv = np.linalg.inv(x + 1e-14 * np.trace(x) * np.eye(d))
        scores = np.einsum("ij,jk,ik->i", q, inv, q)
        j_up = int(np.argmax(scores))
        up = scores[j_up] - d
        masked = np.where(u > 1e-15, scores, np.inf)
        j_dn = int(np.argmin(masked))
        down = d - scores[j_dn]
        if up <= tol * d and down <= tol * d:
            return u, True
        if up >= down:
            step = up / (d * (scores[j_up] - 1.0))
            u *= 1.0 - step
            u[j_up] += step
        else:
            drop_cap = u[j_dn] / (1.0 - u[j_dn]) if u[j_dn] < 1.0 else 1.0
            denom = d * (scores[j_dn] - 1.0)
            step = drop_cap if denom <= 0 else min(down / denom, drop_cap)
            u *= 1.0 + step
            u[j_dn] -= step
    return u, False


def inverse_roundness(
    k: ConvexBody, symmetric_hint: bool = False, tol: float = 1e-7
) -> RoundnessEstimate:
    """Upper bound on the best circumradius-to-inradius ratio over affine
    images, obtained by normalizing with the minimum-volume enclosing
    ellipsoid of the vertices (centered at the centroid when the body is
    centrally symmetric and the hint is set)."""
    verts = k.vertices
    n = k.dimension
    m = len(verts)
    # coordinate ascent is cheap (O(m n^2) per update); thin bodies can need
    # several thousand updates to reach 1e-7, so the floor is generous
    max_updates = max(50_000, int(math.ceil(10.0 * n * math.log(m))) * m)
    centered = symmetric_hint and k.is_centrally_symmetric()
    if centered:
        c = k.centroid()
        u, ok = _mvee_weights(verts - c, tol, max_updates)
        cov = (verts - c).T @ ((verts - c) * u[:, None])
        shape = np.linalg.inv(cov) / n
    else:
        lifted = np.column_stack([verts, np.ones(m)])
        u, ok = _mvee_weights(lifted, tol, max_updates)
        c = u @ verts
        cov = verts.T @ (verts * u[:, None]) - np.outer(c, c)
        shape = np.linalg.inv(cov) / n
    if not ok:
        raise EllipsoidNotConverged(
            f"no convergence to {tol} within {max_updates} updates"
        )
    low = np.linalg.cholesky(shape)
    t = AffineMap(matrix=low.T, shift=-low.T @ c)
    mapped = apply_affine(k, t)
    big = mapped.enclosing_ball().radius
    small = mapped.chebyshev_ball().radius
    return RoundnessEstimate(
        q_upper=big / small, normalizing_map=t, r=small, R=big
    )
