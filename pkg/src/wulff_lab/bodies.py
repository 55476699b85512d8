"""Convex polytope kernel: hulls, sums, volumes, support, radii, sampling.

Bodies are stored in V-representation (minimal vertex list).  The
H-representation and other derived data are computed on demand and cached;
caches are write-once and idempotent, so bodies are safe to share across
workers.  Dimensions n >= 2 throughout.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    DegenerateInput,
    DimensionMismatch,
    MalformedBodyFile,
    MethodUnavailable,
    SingularMatrix,
    ZeroDirection,
)
from .rng import RngSeed

EXACT_VOLUME_DIM_CAP = 6


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + shift."""

    matrix: np.ndarray
    shift: np.ndarray


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    standard_error: float


class ConvexBody:
    """Immutable full-dimensional convex polytope.

    Construct through `convex_hull` (or the shape helpers below); the raw
    constructor trusts that `vertices` is already a minimal vertex list.
    """

    __slots__ = (
        "_vertices",
        "label",
        "_hull",
        "_facets",
        "_volume",
        "_centroid",
        "_cheb",
        "_enc",
    )

    def __init__(self, vertices: np.ndarray, label: str = ""):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or v.shape[1] < 2:
            raise DegenerateInput("vertices must be an m x n array with n >= 2")
        if not np.all(np.isfinite(v)):
            raise DegenerateInput("vertices must be finite")
        v.flags.writeable = False
        self._vertices = v
        self.label = label
        self._hull = None
        self._facets = None
        self._volume = None
        self._centroid = None
        self._cheb = None
        self._enc = None

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def dimension(self) -> int:
        return self._vertices.shape[1]

    def __repr__(self) -> str:
        return (
            f"ConvexBody(n={self.dimension}, vertices={len(self._vertices)},"
            f" label={self.label!r})"
        )

    # -- cached derived data ------------------------------------------------

    def hull(self) -> ConvexHull:
        if self._hull is None:
            try:
                self._hull = ConvexHull(self._vertices)
            except QhullError as exc:
                raise DegenerateInput(f"hull of body failed: {exc}") from exc
        return self._hull

    def facets(self) -> tuple[np.ndarray, np.ndarray]:
        """H-representation (A, b): unit outward normals, K = {x : A x <= b}.

        Triangulated qhull facets sharing a hyperplane are merged; rounding
        is used only to group duplicates, the returned equations keep full
        precision (perimeter-volume identities rely on it).
        """
        if self._facets is None:
            eq = self.hull().equations
            _, first = np.unique(np.round(eq, 9), axis=0, return_index=True)
            eq = eq[np.sort(first)]
            normals = eq[:, :-1]
            offsets = -eq[:, -1]
            norms = np.linalg.norm(normals, axis=1)
            keep = norms > 1e-12
            normals, offsets, norms = normals[keep], offsets[keep], norms[keep]
            self._facets = (normals / norms[:, None], offsets / norms)
        return self._facets

    def tolerance(self) -> float:
        """Scale-aware geometric tolerance for membership tests."""
        return 1e-9 * (1.0 + self.enclosing_ball().radius)

    def volume(self) -> float:
        """Exact volume; see module-level `volume` for the estimator front end."""
        if self._volume is None:
            self._volume = _simplex_fan_volume(self._vertices, self.hull())
        return self._volume

    def centroid(self) -> np.ndarray:
        if self._centroid is None:
            self._centroid = _simplex_fan_centroid(self._vertices, self.hull())
            self._centroid.flags.writeable = False
        return self._centroid

    def chebyshev_ball(self) -> Ball:
        if self._cheb is None:
            self._cheb = _chebyshev_ball(*self.facets())
        return self._cheb

    def enclosing_ball(self) -> Ball:
        if self._enc is None:
            self._enc = _min_enclosing_ball(self._vertices)
        return self._enc

    # -- simple geometry ----------------------------------------------------

    def contains(self, points: np.ndarray, tol: float | None = None) -> np.ndarray:
        """Boolean mask of membership for an m x n array of points."""
        a, b = self.facets()
        if tol is None:
            tol = self.tolerance()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(pts @ a.T <= b + tol, axis=1)

    def translated(self, shift: np.ndarray, label: str | None = None) -> "ConvexBody":
        return ConvexBody(
            self._vertices + np.asarray(shift, dtype=float),
            self.label if label is None else label,
        )

    def scaled(self, factor: float, label: str | None = None) -> "ConvexBody":
        if factor <= 0:
            raise DegenerateInput("scale factor must be positive")
        return ConvexBody(
            self._vertices * float(factor),
            self.label if label is None else label,
        )

    def is_centrally_symmetric(self, tol: float | None = None) -> bool:
        """True when the vertex set equals its reflection through the centroid."""
        if tol is None:
            tol = 1e-7 * (1.0 + self.enclosing_ball().radius)
        reflected = 2.0 * self.centroid() - self._vertices
        d2 = ((reflected[:, None, :] - self._vertices[None, :, :]) ** 2).sum(-1)
        return bool(np.all(d2.min(axis=1) <= tol * tol))


# -- construction -----------------------------------------------------------


def convex_hull(points: Iterable[Sequence[float]], label: str = "") -> ConvexBody:
    """Minimal V-representation of the hull of `points`.

    Raises DegenerateInput when the point set is not full-dimensional.
    """
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                     dtype=float)
    if pts.ndim != 2:
        raise DegenerateInput("points must be an m x n array")
    n = pts.shape[1]
    if n < 2:
        raise DegenerateInput("dimension must be >= 2")
    if pts.shape[0] < n + 1:
        raise DegenerateInput(f"need at least {n + 1} points in dimension {n}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("points must be finite")
    if np.linalg.matrix_rank(pts - pts.mean(axis=0)) < n:
        raise DegenerateInput("point set is not full-dimensional")
    try:
        h = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInput(f"hull construction failed: {exc}") from exc
    return ConvexBody(pts[h.vertices], label)


def minimal_vertices(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Indices of points that are NOT convex combinations of the others.

    Linear-programming redundancy removal; dimension-agnostic and used to
    validate hull output where qhull precision is in doubt.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    keep = []
    for i in range(m):
        others = np.delete(pts, i, axis=0)
        # feasibility of pts[i] = sum w_j others_j, w >= 0, sum w = 1
        a_eq = np.vstack([others.T, np.ones(m - 1)])
        b_eq = np.concatenate([pts[i], [1.0]])
        res = linprog(
            np.zeros(m - 1), A_eq=a_eq, b_eq=b_eq,
            bounds=[(0, None)] * (m - 1), method="highs",
        )
        inside = res.status == 0 and (
            np.max(np.abs(a_eq @ res.x - b_eq)) <= tol * (1 + np.abs(b_eq).max())
        )
        if not inside:
            keep.append(i)
    return np.array(keep, dtype=int)


def box(lows: Sequence[float], highs: Sequence[float], label: str = "") -> ConvexBody:
    lo = np.asarray(lows, dtype=float)
    hi = np.asarray(highs, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise DimensionMismatch("lows/highs must be 1-d arrays of equal length")
    if np.any(hi <= lo):
        raise DegenerateInput("box must have positive side lengths")
    corners = np.array(list(itertools.product(*zip(lo, hi))), dtype=float)
    return ConvexBody(corners, label or f"box{lo.tolist()}-{hi.tolist()}")


def regular_polygon(sides: int, radius: float = 1.0, label: str = "") -> ConvexBody:
    if sides < 3:
        raise DegenerateInput("polygon needs at least 3 sides")
    theta = 2.0 * np.pi * np.arange(sides) / sides
    verts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return ConvexBody(verts, label or f"{sides}-gon")


def standard_simplex(n: int, label: str = "") -> ConvexBody:
    verts = np.vstack([np.zeros(n), np.eye(n)])
    return ConvexBody(verts, label or f"simplex-{n}d")


def random_body(
    dimension: int, n_points: int, symmetric: bool, seed: RngSeed
) -> ConvexBody:
    """Hull of standard-normal samples (united with their negatives when
    symmetric); retries internally on degenerate draws."""
    if n_points < dimension + 1:
        raise DegenerateInput("n_points must be at least dimension + 1")
    last: Exception | None = None
    for attempt in range(8):
        g = seed.derive(attempt).generator() if attempt else seed.generator()
        pts = g.standard_normal((n_points, dimension))
        if symmetric:
            pts = np.vstack([pts, -pts])
        try:
            kind = "sym" if symmetric else "gen"
            return convex_hull(
                pts, label=f"rand-{kind}-{dimension}d-{seed.seed}.{seed.stream}"
            )
        except DegenerateInput as exc:
            last = exc
    raise DegenerateInput(f"random body degenerate after 8 attempts: {last}")


# -- operations -------------------------------------------------------------


def minkowski_sum(k: ConvexBody, l: ConvexBody, label: str = "") -> ConvexBody:
    if k.dimension != l.dimension:
        raise DimensionMismatch(
            f"dimensions differ: {k.dimension} vs {l.dimension}"
        )
    sums = (k.vertices[:, None, :] + l.vertices[None, :, :]).reshape(
        -1, k.dimension
    )
    return convex_hull(sums, label or f"({k.label})+({l.label})")


def volume(
    body: ConvexBody,
    method: str = "exact",
    samples: int = 200_000,
    seed: RngSeed | None = None,
    dimension_cap: int = EXACT_VOLUME_DIM_CAP,
) -> VolumeEstimate:
    """Volume with a standard error (zero for the exact method)."""
    if method == "exact":
        if body.dimension > dimension_cap:
            raise MethodUnavailable(
                f"exact volume capped at n <= {dimension_cap}; use monte-carlo"
            )
        return VolumeEstimate(body.volume(), 0.0)
    if method == "monte-carlo":
        g = (seed or RngSeed(0)).generator()
        ball = body.enclosing_ball()
        ball_vol = _ball_volume(body.dimension, ball.radius)
        pts = _sample_ball(g, ball.center, ball.radius, samples)
        p = float(np.count_nonzero(body.contains(pts))) / samples
        se = ball_vol * math.sqrt(max(p * (1.0 - p), 0.0) / samples)
        return VolumeEstimate(ball_vol * p, se)
    raise MethodUnavailable(f"unknown volume method {method!r}")


def support(body: ConvexBody, direction: Sequence[float]) -> float:
    """sup of x . direction over the body; 1-homogeneous in direction."""
    d = np.asarray(direction, dtype=float)
    if d.shape != (body.dimension,):
        raise DimensionMismatch("direction dimension mismatch")
    if not np.linalg.norm(d) > 0:
        raise ZeroDirection("support direction must be nonzero")
    return float(np.max(body.vertices @ d))


def chebyshev_ball(body: ConvexBody) -> Ball:
    return body.chebyshev_ball()


def enclosing_ball(body: ConvexBody) -> Ball:
    return body.enclosing_ball()


def apply_affine(body: ConvexBody, t: AffineMap, label: str = "") -> ConvexBody:
    a = np.asarray(t.matrix, dtype=float)
    shift = np.asarray(t.shift, dtype=float)
    n = body.dimension
    if a.shape != (n, n) or shift.shape != (n,):
        raise DimensionMismatch("affine map shape mismatch")
    if abs(np.linalg.det(a)) < 1e-12:
        raise SingularMatrix("affine map is numerically singular")
    # nonsingular affine maps preserve extreme points, so no re-hull needed
    return ConvexBody(body.vertices @ a.T + shift, label or f"T({body.label})")


def sample_interior(
    body: ConvexBody,
    count: int,
    g: "np.random.Generator | RngSeed",
    max_batches: int = 10_000,
) -> np.ndarray:
    """`count` uniform samples from the body (rejection from the enclosing ball)."""
    if isinstance(g, RngSeed):
        g = g.generator()
    ball = body.enclosing_ball()
    out = np.empty((count, body.dimension))
    have = 0
    batch = max(count, 256)
    for _ in range(max_batches):
        pts = _sample_ball(g, ball.center, ball.radius, batch)
        pts = pts[body.contains(pts)]
        take = min(len(pts), count - have)
        out[have : have + take] = pts[:take]
        have += take
        if have == count:
            return out
    raise DegenerateInput("rejection sampling failed to fill the request")


# -- serialization ----------------------------------------------------------


def save_body(body: ConvexBody, path: str) -> None:
    doc = {
        "dimension": body.dimension,
        "label": body.label,
        "vertices": [list(map(float, v)) for v in body.vertices],
    }
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_body(path: str) -> ConvexBody:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedBodyFile(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedBodyFile(f"{path}: expected a JSON object")
    try:
        n = int(doc["dimension"])
        label = str(doc.get("label", ""))
        verts = np.asarray(doc["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedBodyFile(f"{path}: bad schema: {exc}") from exc
    if verts.ndim != 2 or verts.shape[1] != n:
        raise MalformedBodyFile(f"{path}: vertices do not match dimension {n}")
    try:
        return convex_hull(verts, label=label)
    except DegenerateInput as exc:
        raise MalformedBodyFile(f"{path}: {exc}") from exc


# -- internals --------------------------------------------------------------


def _simplex_fan_volume(verts: np.ndarray, hull: ConvexHull) -> float:
    n = verts.shape[1]
    apex = verts.mean(axis=0)
    fact = math.factorial(n)
    total = 0.0
    for simplex in hull.simplices:
        total += abs(np.linalg.det(verts[simplex] - apex)) / fact
    return total


def _simplex_fan_centroid(verts: np.ndarray, hull: ConvexHull) -> np.ndarray:
    n = verts.shape[1]
    apex = verts.mean(axis=0)
    fact = math.factorial(n)
    total = 0.0
    acc = np.zeros(n)
    for simplex in hull.simplices:
        vol = abs(np.linalg.det(verts[simplex] - apex)) / fact
        cen = (verts[simplex].sum(axis=0) + apex) / (n + 1)
        total += vol
        acc += vol * cen
    if total <= 0:
        raise DegenerateInput("zero-volume body has no centroid")
    return acc / total


def _chebyshev_ball(a: np.ndarray, b: np.ndarray) -> Ball:
    m, n = a.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.column_stack([a, np.ones(m)])
    res = linprog(
        c, A_ub=a_ub, b_ub=b,
        bounds=[(None, None)] * n + [(0, None)], method="highs",
    )
    if res.status != 0 or res.x[-1] <= 0:
        raise MethodUnavailable(f"inscribed-ball LP failed (status {res.status})")
    center = res.x[:-1].copy()
    center.flags.writeable = False
    return Ball(center, float(res.x[-1]))


def _circumball(points: list[np.ndarray]) -> tuple[np.ndarray, float] | None:
    if not points:
        return None
    p0 = points[0]
    if len(points) == 1:
        return p0.copy(), 0.0
    b = np.asarray(points[1:]) - p0
    g = b @ b.T
    rhs = 0.5 * np.einsum("ij,ij->i", b, b)
    try:
        alpha = np.linalg.solve(g, rhs)
    except np.linalg.LinAlgError:
        alpha, *_ = np.linalg.lstsq(g, rhs, rcond=None)
    center = p0 + alpha @ b
    radius = float(np.linalg.norm(center - p0))
    return center, radius


def _min_enclosing_ball(points: np.ndarray) -> Ball:
    """Welzl's move-to-front algorithm; recursion depth bounded by n + 2."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[1]
    order = np.random.default_rng(0x5EED).permutation(len(pts))
    pts = pts[order]
    scale = 1.0 + float(np.abs(pts).max())
    eps = 1e-12 * scale

    def solve(limit: int, boundary: list[np.ndarray]) -> tuple[np.ndarray, float]:
        ball = _circumball(boundary)
        if len(boundary) == n + 1:
            return ball
        for i in range(limit):
            if ball is None or np.linalg.norm(pts[i] - ball[0]) > ball[1] + eps:
                ball = solve(i, boundary + [pts[i]])
        if ball is None:
            return pts[0].copy(), 0.0
        return ball

    center, radius = solve(len(pts), [])
    # squeeze out accumulated slack: the true radius covers every input point
    radius = max(radius, float(np.linalg.norm(points - center, axis=1).max()))
    center = np.asarray(center)
    center.flags.writeable = False
    return Ball(center, radius)


def _ball_volume(n: int, radius: float) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * radius**n


def _sample_ball(
    g: np.random.Generator, center: np.ndarray, radius: float, count: int
) -> np.ndarray:
    n = center.shape[0]
    d = g.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * g.random(count) ** (1.0 / n)
    return center + d * r[:, None]
