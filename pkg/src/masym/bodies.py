"""Convex bodies containing the origin: gauges, polar duals, volumes, Mahler volumes.

A body is immutable once built; all origin-interiority and convexity checks
happen at construction time, so the geometric operations below never have to
re-validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import BodyError

__all__ = [
    "ConvexBody",
    "Ball",
    "Ellipsoid",
    "Polygon2D",
    "HalfspaceBody",
    "VolumeEstimate",
    "unit_ball_volume",
    "sphere_area",
    "minkowski_functional",
    "polar",
    "volume",
    "volume_detail",
    "mahler",
    "regular_polygon",
    "square",
    "simplex2d",
]

_GEOM_TOL = 1e-12


def unit_ball_volume(d):
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(n):
    """Area of the unit sphere in C^n = R^{2n}, i.e. 2 pi^n / (n-1)!."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


@dataclass(frozen=True)
class VolumeEstimate:
    """Volume value plus provenance: exact branches report std_error 0."""

    value: float
    method: str
    std_error: float = 0.0
    n_samples: int = 0


class ConvexBody:
    """Base class for bounded convex bodies with the origin strictly interior."""

    dim: int

    def gauge(self, x):
        """Minkowski functional inf{t > 0 : x/t in body} at point(s) x."""
        raise NotImplementedError

    def polar(self):
        raise NotImplementedError

    def volume_detail(self, seed=0, n_samples=200_000):
        raise NotImplementedError

    def volume(self, seed=0, n_samples=200_000):
        return self.volume_detail(seed=seed, n_samples=n_samples).value

    def contains(self, x, tol=0.0):
        return self.gauge(x) <= 1.0 + tol

    def mahler(self, seed=0, n_samples=200_000):
        """|body| * |polar body|."""
        return self.volume(seed=seed, n_samples=n_samples) * self.polar().volume(
            seed=seed + 1, n_samples=n_samples
        )

    def scaled(self, factor):
        """Body scaled by a positive factor about the origin."""
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(ConvexBody):
    radius: float
    dim: int = 2

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise BodyError(f"ball radius must be positive, got {self.radius}")

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x, axis=-1) / self.radius

    def polar(self):
        return Ball(1.0 / self.radius, self.dim)

    def volume_detail(self, seed=0, n_samples=0):
        return VolumeEstimate(unit_ball_volume(self.dim) * self.radius**self.dim, "exact-ball")

    def scaled(self, factor):
        return Ball(self.radius * factor, self.dim)


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    """{x : x^T A x <= 1} for symmetric positive-definite A."""

    matrix: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise BodyError("ellipsoid matrix must be square")
        if not np.allclose(A, A.T, atol=1e-10):
            raise BodyError("ellipsoid matrix must be symmetric")
        eigs = np.linalg.eigvalsh(A)
        if eigs.min() <= 0:
            raise BodyError("ellipsoid matrix must be positive definite")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "dim", A.shape[0])

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        q = np.einsum("...i,ij,...j->...", x, self.matrix, x)
        return np.sqrt(np.maximum(q, 0.0))

    def polar(self):
        return Ellipsoid(np.linalg.inv(self.matrix))

    def volume_detail(self, seed=0, n_samples=0):
        det = np.linalg.det(self.matrix)
        return VolumeEstimate(unit_ball_volume(self.dim) / math.sqrt(det), "exact-ellipsoid")

    def scaled(self, factor):
        return Ellipsoid(self.matrix / factor**2)


def _shoelace(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


@dataclass(frozen=True)
class Polygon2D(ConvexBody):
    """Strictly convex, counter-clockwise polygon with the origin strictly inside."""

    vertices: np.ndarray
    dim: int = field(init=False, default=2)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise BodyError("polygon needs >= 3 planar vertices")
        e = np.roll(V, -1, axis=0) - V
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross <= _GEOM_TOL):
            raise BodyError("polygon vertices must be strictly convex and counter-clockwise")
        # origin strictly left of every directed edge
        lhs = V[:, 0] * e[:, 1] - V[:, 1] * e[:, 0]
        if np.any(lhs <= _GEOM_TOL):
            raise BodyError("origin not strictly interior to polygon")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "dim", 2)

    def halfspaces(self):
        """Edge description (normals, offsets) with offsets > 0."""
        V = self.vertices
        e = np.roll(V, -1, axis=0) - V
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
        offsets = np.einsum("ij,ij->i", normals, V)
        return normals, offsets

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        normals, offsets = self.halfspaces()
        vals = np.tensordot(x, normals, axes=([-1], [1])) / offsets
        return np.maximum(vals.max(axis=-1), 0.0)

    def polar(self):
        # each vertex v becomes the constraint v.y <= 1
        return HalfspaceBody(self.vertices, np.ones(len(self.vertices)))

    def volume_detail(self, seed=0, n_samples=0):
        return VolumeEstimate(float(_shoelace(self.vertices)), "exact-shoelace")

    def scaled(self, factor):
        return Polygon2D(self.vertices * factor)

    def recentered_at_centroid(self):
        """Translate so the area centroid sits at the origin."""
        V = self.vertices
        W = np.roll(V, -1, axis=0)
        cross = V[:, 0] * W[:, 1] - W[:, 0] * V[:, 1]
        area = 0.5 * cross.sum()
        cx = np.sum((V[:, 0] + W[:, 0]) * cross) / (6 * area)
        cy = np.sum((V[:, 1] + W[:, 1]) * cross) / (6 * area)
        return Polygon2D(V - np.array([cx, cy]))


def _enumerate_vertices_2d(normals, offsets):
    """All feasible pairwise intersections of the halfspace boundaries, CCW-sorted."""
    m = len(offsets)
    pts = []
    for i in range(m):
        for j in range(i + 1, m):
            A = np.array([normals[i], normals[j]])
            det = np.linalg.det(A)
            if abs(det) < 1e-14:
                continue
            p = np.linalg.solve(A, np.array([offsets[i], offsets[j]]))
            slack = normals @ p - offsets
            if slack.max() <= 1e-9 * max(1.0, np.abs(offsets).max()):
                pts.append(p)
    if len(pts) < 3:
        raise BodyError("halfspace body has no 2-D interior")
    pts = np.array(pts)
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    order = np.argsort(ang)
    pts = pts[order]
    # dedupe nearly-identical corners
    keep = [pts[0]]
    for p in pts[1:]:
        if np.linalg.norm(p - keep[-1]) > 1e-10:
            keep.append(p)
    if np.linalg.norm(keep[-1] - keep[0]) <= 1e-10 and len(keep) > 1:
        keep.pop()
    return np.array(keep)


@dataclass(frozen=True)
class HalfspaceBody(ConvexBody):
    """{x : a_i . x <= b_i for all i}; requires b_i > 0 (origin interior) and boundedness."""

    normals: np.ndarray
    offsets: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        A = np.array(self.normals, dtype=float)
        b = np.array(self.offsets, dtype=float)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
            raise BodyError("normals and offsets must align")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms < _GEOM_TOL):
            raise BodyError("degenerate zero normal")
        if np.any(b <= 0):
            raise BodyError("origin not strictly interior to halfspace body")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "dim", A.shape[1])
        self._check_bounded()

    def _check_bounded(self):
        if self.dim == 2:
            # bounded iff the outward normals do not fit in a closed halfplane
            ang = np.sort(np.arctan2(self.normals[:, 1], self.normals[:, 0]))
            gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
            if gaps.max() >= np.pi - 1e-12:
                raise BodyError("unbounded body")
            return
        # d >= 3: bounded iff every coordinate direction has a finite LP maximum
        d = self.dim
        for k in range(d):
            for sgn in (1.0, -1.0):
                c = np.zeros(d)
                c[k] = -sgn  # linprog minimizes
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * d, method="highs")
                if res.status == 3:
                    raise BodyError("unbounded body")
                if not res.success:
                    raise BodyError(f"halfspace body LP failed: {res.message}")

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        vals = np.tensordot(x, self.normals, axes=([-1], [1])) / self.offsets
        return np.maximum(vals.max(axis=-1), 0.0)

    def polar(self):
        # polar of an H-body is the convex hull of a_i / b_i
        pts = self.normals / self.offsets[:, None]
        if self.dim == 2:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(pts)
            return Polygon2D(pts[hull.vertices])
        raise BodyError("polar of a halfspace body is implemented for d = 2 only")

    def vertices2d(self):
        if self.dim != 2:
            raise BodyError("vertex enumeration implemented for d = 2 only")
        return _enumerate_vertices_2d(self.normals, self.offsets)

    def _bounding_box(self):
        d = self.dim
        lo, hi = np.empty(d), np.empty(d)
        for k in range(d):
            c = np.zeros(d)
            c[k] = 1.0
            res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * d, method="highs")
            lo[k] = res.fun
            res = linprog(-c, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * d, method="highs")
            hi[k] = -res.fun
        return lo, hi

    def volume_detail(self, seed=0, n_samples=200_000):
        if self.dim == 2:
            return VolumeEstimate(float(_shoelace(self.vertices2d())), "exact-vertex-enumeration")
        lo, hi = self._bounding_box()
        rng = np.random.default_rng(seed)
        pts = rng.uniform(lo, hi, size=(n_samples, self.dim))
        inside = self.gauge(pts) <= 1.0
        p = inside.mean()
        box = float(np.prod(hi - lo))
        err = box * math.sqrt(max(p * (1 - p), 0.0) / n_samples)
        return VolumeEstimate(box * p, "monte-carlo", std_error=err, n_samples=n_samples)

    def scaled(self, factor):
        return HalfspaceBody(self.normals, self.offsets * factor)


# -- module-level functional API -------------------------------------------

def minkowski_functional(body, x):
    """Gauge of the body at x; 1 exactly on the boundary, homogeneous of degree 1."""
    return body.gauge(x)


def polar(body):
    """Polar dual {y : y.x <= 1 for all x in body}."""
    return body.polar()


def volume(body, seed=0, n_samples=200_000):
    return body.volume(seed=seed, n_samples=n_samples)


def volume_detail(body, seed=0, n_samples=200_000):
    return body.volume_detail(seed=seed, n_samples=n_samples)


def mahler(body, seed=0, n_samples=200_000):
    """Mahler volume |body| * |polar(body)|."""
    return body.mahler(seed=seed, n_samples=n_samples)


# -- convenience constructors ----------------------------------------------

def square(halfwidth=1.0):
    w = float(halfwidth)
    return Polygon2D([[w, -w], [w, w], [-w, w], [-w, -w]])


def regular_polygon(m, circumradius=1.0, phase=0.0):
    ang = phase + 2 * np.pi * np.arange(m) / m
    return Polygon2D(circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1))


def simplex2d():
    """Triangle with vertices (1,0), (0,1), (-1,-1), recentered at its centroid."""
    return Polygon2D([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]).recentered_at_centroid()
