"""Grid-sampled potentials on masked lattices and their discrete Monge-Ampere
measures and energies, in both the real-convex and complex (psh) cases.

Conventions pinned here and relied on by the rest of the package:

* uniform cell-centered lattice, one spacing h for all axes;
* values at masked-out points are 0 (inputs vanish on the domain boundary);
* all Hessians use central second differences; points without a full interior
  stencil are excluded from energy sums and their measure is attributed by a
  boundary-layer extrapolation recorded in the result;
* complex coordinates read axis pairs as z_j = x_{2j-1} + i x_{2j};
* discrete complex Monge-Ampere density is kappa_n * det(complex Hessian)
  with kappa_n = n!/pi^n, which gives the log gauge a unit-mass normalization
  of 2^{-n} and makes grid energies converge to the closed-form profile
  energies (the calibration tests pin this).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from .bodies import Ball, ConvexBody
from .errors import FieldError
from .profiles import LOG_RADIUS, MINKOWSKI, RadialProfile

__all__ = [
    "GridSpec",
    "GridField",
    "BalancedLog",
    "FieldGeneratorSpec",
    "RadialFieldSpec",
    "GreenSpec",
    "InvariantPshSpec",
    "ConvexPolyhedralSpec",
    "random_field_spec",
    "generate",
    "complex_ma_energy",
    "real_ma_energy",
    "EnergyResult",
    "gradient_image_area",
    "levi_density_variation",
    "write_field",
    "read_field",
]

PSH_TOL_FACTOR = 10.0       # eigenvalue floor is -PSH_TOL_FACTOR * h
MAX_BAD_FRACTION = 0.01

COMPLEX = "complex"
REAL = "real"


# -- lattice ------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered lattice on [-halfwidth, halfwidth]^d.

    The domain mask is the open unit ball unless a convex body is supplied.
    """

    resolution: int
    d: int
    halfwidth: float = 1.0
    body: ConvexBody | None = None

    def __post_init__(self):
        if self.resolution < 8:
            raise FieldError("grid resolution must be at least 8 points per axis")

    @property
    def h(self):
        return 2.0 * self.halfwidth / self.resolution

    @property
    def origin(self):
        return np.full(self.d, -self.halfwidth + self.h / 2.0)

    def axes(self):
        return [self.origin[i] + self.h * np.arange(self.resolution) for i in range(self.d)]

    def points(self):
        """(N, ..., N, d) array of cell centers."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(grids, axis=-1)

    def mask(self):
        pts = self.points()
        if self.body is None:
            g = np.linalg.norm(pts, axis=-1)
        else:
            g = self.body.gauge(pts)
        return g < 1.0

    @property
    def mask_id(self):
        return "ball" if self.body is None else "body"


@dataclass
class GridField:
    """Function sampled on a masked lattice; zero outside the mask."""

    values: np.ndarray
    mask: np.ndarray
    h: float
    origin: np.ndarray
    kind: str
    mask_id: str = "ball"
    body: ConvexBody | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field values must be finite")
        self.values = np.where(self.mask, self.values, 0.0)

    @property
    def d(self):
        return self.values.ndim

    @property
    def n(self):
        if self.kind != COMPLEX:
            raise FieldError("n is defined for complex fields")
        return self.d // 2

    @property
    def cell_volume(self):
        return self.h**self.d

    def masked_values(self):
        return self.values[self.mask]

    def domain_volume(self):
        return float(self.mask.sum()) * self.cell_volume

    def interior_mask(self):
        """Points whose full (diagonal) difference stencil stays inside the mask."""
        return ndimage.binary_erosion(self.mask, structure=np.ones((3,) * self.d))


# -- generators ---------------------------------------------------------------

class FieldGeneratorSpec:
    """Base recipe: an analytic field evaluated on lattice points."""

    kind: str
    name: str

    def evaluate(self, x):
        """Field values at points x of shape (..., d)."""
        raise NotImplementedError

    def describe(self):
        return {"name": self.name, "kind": self.kind}


def _as_complex_pairs(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


class RadialFieldSpec(FieldGeneratorSpec):
    """phi = f(log|x|) (log_radius profile) or u = f(gauge(x)) (minkowski)."""

    def __init__(self, profile, kind, body=None):
        self.profile = profile
        self.kind = kind
        self.body = body
        self.name = "radial"

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile.mode == LOG_RADIUS:
            r = np.linalg.norm(x, axis=-1)
            with np.errstate(divide="ignore"):
                t = np.where(r > 0, np.log(np.maximum(r, 1e-300)), -np.inf)
            out = np.where(np.isfinite(t), self.profile(np.nan_to_num(t, neginf=-1e30)),
                           self.profile.min_value)
            return out
        g = self.body.gauge(x) if self.body is not None else np.linalg.norm(x, axis=-1)
        return self.profile(g)


class GreenSpec(FieldGeneratorSpec):
    """Green kernel log|(z - a)/(1 - conj(a) z)| on the unit disc (d = 2)."""

    kind = COMPLEX

    def __init__(self, a):
        a = complex(a)
        if abs(a) >= 1:
            raise FieldError("green pole must lie inside the unit disc")
        self.a = a
        self.name = "green"

    def evaluate(self, x):
        z = _as_complex_pairs(x)[..., 0]
        num = np.abs(z - self.a)
        den = np.abs(1.0 - np.conj(self.a) * z)
        with np.errstate(divide="ignore"):
            return np.where(num > 0, np.log(np.maximum(num, 1e-300)) - np.log(den), -1e30)


class InvariantPshSpec(FieldGeneratorSpec):
    """S^1-invariant psh field on the C^2 ball, vanishing on the boundary.

    phi = max(g(log q) - c - offset, barrier_slope * log|z|) where
    q = z* H z for a PSD Hermitian form H with lambda_max = 1, g is a convex
    increasing map (max of affine pieces with a floor, plus an optional
    softplus term), and c = g(0) is the max of g(log q) on the sphere.  The
    max with the log barrier keeps the field psh and zero on the boundary.
    """

    kind = COMPLEX

    def __init__(self, hermitian, affine_pieces, floor, offset=0.1, barrier_slope=2.0,
                 softplus_weight=0.0):
        H = np.asarray(hermitian, dtype=complex)
        if H.shape != (2, 2) or not np.allclose(H, H.conj().T, atol=1e-12):
            raise FieldError("hermitian form must be a 2x2 Hermitian matrix")
        eigs = np.linalg.eigvalsh(H)
        if eigs[0] < -1e-12 or eigs[-1] <= 0:
            raise FieldError("hermitian form must be PSD and nonzero")
        self.hermitian = H / eigs[-1]
        pieces = [(float(a), float(b)) for a, b in affine_pieces]
        if any(a < 0 for a, _ in pieces) or not pieces:
            raise FieldError("outer map pieces need nonnegative slopes")
        self.affine_pieces = pieces
        self.floor = float(floor)
        if self.floor >= 0:
            raise FieldError("outer map floor must be negative")
        self.offset = float(offset)
        self.barrier_slope = float(barrier_slope)
        self.softplus_weight = float(softplus_weight)
        if offset <= 0 or barrier_slope <= 0 or softplus_weight < 0:
            raise FieldError("offset and barrier slope must be positive")
        self.name = "invariant-psh"

    def _outer(self, t):
        vals = np.full_like(t, self.floor)
        for a, b in self.affine_pieces:
            vals = np.maximum(vals, a * t + b)
        if self.softplus_weight > 0:
            vals = vals + self.softplus_weight * np.log1p(np.exp(np.minimum(t, 30.0)))
        return vals

    def evaluate(self, x):
        z = _as_complex_pairs(x)
        q = np.real(np.einsum("...i,ij,...j->...", np.conj(z), self.hermitian, z))
        logq = np.where(q > 0, np.log(np.maximum(q, 1e-300)), -1e30)
        body = self._outer(logq) - self._outer(np.zeros(())) - self.offset
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        barrier = self.barrier_slope * np.where(r > 0, np.log(np.maximum(r, 1e-300)), -1e30)
        return np.maximum(body, barrier)


class ConvexPolyhedralSpec(FieldGeneratorSpec):
    """Convex field vanishing on the domain boundary.

    u = max(softmax_eps(a_i . x + b_i) - c - offset, barrier_slope * (gauge - 1)),
    where c is the max of the smoothed max over the boundary, so the affine
    block is strictly negative there and the cone barrier pins u = 0 on the
    boundary.  eps = 0 degenerates to a hard max of affine functions.
    """

    kind = REAL

    def __init__(self, coefficients, intercepts, lse_eps=0.0, offset=0.1,
                 barrier_slope=2.0, body=None):
        A = np.asarray(coefficients, dtype=float)
        b = np.asarray(intercepts, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise FieldError("affine pieces must be (m, d) coefficients with m intercepts")
        self.coefficients = A
        self.intercepts = b
        self.lse_eps = float(lse_eps)
        self.offset = float(offset)
        self.barrier_slope = float(barrier_slope)
        self.body = body
        if self.offset <= 0 or self.barrier_slope <= 0 or self.lse_eps < 0:
            raise FieldError("offset and barrier slope must be positive")
        self.name = "convex-polyhedral"
        self._boundary_max = self._compute_boundary_max()

    @property
    def d(self):
        return self.coefficients.shape[1]

    def _gauge(self, x):
        if self.body is None:
            return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return self.body.gauge(x)

    def _affine_block(self, x):
        vals = np.tensordot(np.asarray(x, dtype=float), self.coefficients,
                            axes=([-1], [1])) + self.intercepts
        if self.lse_eps > 0:
            m = vals.max(axis=-1)
            return m + self.lse_eps * np.log(
                np.sum(np.exp((vals - m[..., None]) / self.lse_eps), axis=-1))
        return vals.max(axis=-1)

    def _compute_boundary_max(self, n_dirs=4096):
        d = self.d
        rng = np.random.default_rng(12345)
        dirs = rng.standard_normal((n_dirs, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = dirs / self._gauge(dirs)[:, None]
        return float(self._affine_block(pts).max())

    def evaluate(self, x):
        body = self._affine_block(x) - self._boundary_max - self.offset
        barrier = self.barrier_slope * (self._gauge(x) - 1.0)
        return np.maximum(body, barrier)


def random_field_spec(kind, seed, smoothness=0.0, n_pieces=None):
    """Seeded random recipe of the appropriate class.

    ``kind='complex'`` draws an S^1-invariant psh recipe on the C^2 ball;
    ``kind='real'`` draws a convex max-of-affine recipe on the disc, with
    ``smoothness`` the log-sum-exp mollification scale (0 keeps hard kinks).
    """
    rng = np.random.default_rng(seed)
    if kind == COMPLEX:
        # random PSD Hermitian 2x2 with lambda_max normalized inside the ctor
        G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        H = G.conj().T @ G + 0.05 * np.eye(2)
        m = n_pieces or rng.integers(1, 4)
        pieces = []
        for _ in range(m):
            slope = rng.uniform(0.2, 1.5)
            shift = rng.uniform(-1.0, 0.5)
            pieces.append((slope, shift))
        floor = -rng.uniform(0.8, 2.5)
        offset = rng.uniform(0.05, 0.3)
        barrier = rng.uniform(1.0, 3.0)
        softplus = smoothness * rng.uniform(0.1, 0.5) if smoothness > 0 else 0.0
        return InvariantPshSpec(H, pieces, floor, offset=offset, barrier_slope=barrier,
                                softplus_weight=softplus)
    if kind == REAL:
        d = 2
        m = n_pieces or rng.integers(3, 8)
        A = rng.uniform(-1.2, 1.2, size=(m, d))
        b = rng.uniform(-0.8, 0.3, size=m)
        offset = rng.uniform(0.05, 0.3)
        barrier = rng.uniform(1.5, 3.5)
        return ConvexPolyhedralSpec(A, b, lse_eps=smoothness, offset=offset,
                                    barrier_slope=barrier)
    raise FieldError(f"unknown field kind {kind!r}")


def generate(spec, grid, validate=False):
    """Sample a generator recipe on a lattice; values are zero off the mask."""
    pts = grid.points()
    mask = grid.mask()
    vals = np.zeros(mask.shape)
    vals[mask] = spec.evaluate(pts[mask])
    if not np.all(np.isfinite(vals)):
        raise FieldError("recipe produced non-finite values")
    field = GridField(vals, mask, grid.h, grid.origin, spec.kind,
                      mask_id=grid.mask_id, body=grid.body)
    if validate:
        if spec.kind == COMPLEX:
            _hessian_checks_complex(field, field.n)
        else:
            _hessian_checks_real(field)
    return field


# -- central difference machinery ----------------------------------------------

def _second_pure(v, axis, h):
    return (np.roll(v, -1, axis) + np.roll(v, 1, axis) - 2.0 * v) / h**2


def _second_mixed(v, ax1, ax2, h):
    return (np.roll(v, (-1, -1), (ax1, ax2)) + np.roll(v, (1, 1), (ax1, ax2))
            - np.roll(v, (-1, 1), (ax1, ax2)) - np.roll(v, (1, -1), (ax1, ax2))) / (4.0 * h**2)


def _gradient(v, axis, h):
    return (np.roll(v, -1, axis) - np.roll(v, 1, axis)) / (2.0 * h)


def _complex_hessian_det_mineig(field, n):
    """det and min eigenvalue of the discrete complex Hessian on the full array."""
    v, h = field.values, field.h
    if n == 1:
        lap = _second_pure(v, 0, h) + _second_pure(v, 1, h)
        H = 0.25 * lap
        return H, H
    if n == 2:
        H11 = 0.25 * (_second_pure(v, 0, h) + _second_pure(v, 1, h))
        H22 = 0.25 * (_second_pure(v, 2, h) + _second_pure(v, 3, h))
        re12 = 0.25 * (_second_mixed(v, 0, 2, h) + _second_mixed(v, 1, 3, h))
        im12 = 0.25 * (_second_mixed(v, 0, 3, h) - _second_mixed(v, 1, 2, h))
        off2 = re12**2 + im12**2
        det = H11 * H22 - off2
        tr = H11 + H22
        mineig = 0.5 * tr - np.sqrt(np.maximum(0.25 * (H11 - H22) ** 2 + off2, 0.0))
        return det, mineig
    raise FieldError("grid computations support n = 1 and n = 2 only")


def _real_hessian_det_mineig(field):
    v, h = field.values, field.h
    d = field.d
    if d == 2:
        a = _second_pure(v, 0, h)
        c = _second_pure(v, 1, h)
        b = _second_mixed(v, 0, 1, h)
        det = a * c - b**2
        mineig = 0.5 * (a + c) - np.sqrt(np.maximum(0.25 * (a - c) ** 2 + b**2, 0.0))
        return det, mineig
    if d == 3:
        interior = field.interior_mask()
        idx = np.where(interior)
        m = idx[0].size
        Hm = np.empty((m, 3, 3))
        for i in range(3):
            Hm[:, i, i] = _second_pure(v, i, h)[idx]
            for j in range(i + 1, 3):
                mij = _second_mixed(v, i, j, h)[idx]
                Hm[:, i, j] = mij
                Hm[:, j, i] = mij
        det = np.zeros(v.shape)
        mineig = np.zeros(v.shape)
        det[idx] = np.linalg.det(Hm)
        mineig[idx] = np.linalg.eigvalsh(Hm)[:, 0]
        return det, mineig
    raise FieldError("real grid computations support d = 2 and d = 3 only")


def _hessian_checks_complex(field, n):
    det, mineig = _complex_hessian_det_mineig(field, n)
    interior = field.interior_mask()
    tau = PSH_TOL_FACTOR * field.h
    bad = float(np.mean(mineig[interior] < -tau)) if interior.any() else 0.0
    if bad > MAX_BAD_FRACTION:
        raise FieldError("input not plurisubharmonic at resolution h")
    return det, mineig, interior, bad


def _hessian_checks_real(field):
    det, mineig = _real_hessian_det_mineig(field)
    interior = field.interior_mask()
    tau = PSH_TOL_FACTOR * field.h
    bad = float(np.mean(mineig[interior] < -tau)) if interior.any() else 0.0
    if bad > MAX_BAD_FRACTION:
        raise FieldError("input not convex at resolution h")
    return det, mineig, interior, bad


@dataclass(frozen=True)
class EnergyResult:
    """Energy value with the discretization bookkeeping behind it."""

    value: float
    core: float
    boundary_attribution: float
    bad_fraction: float
    interior_points: int
    excluded_volume: float


def _energy(field, det, interior, bad, density_const):
    v = field.values
    integrand = density_const * (-v) * det
    core = float(integrand[interior].sum()) * field.cell_volume
    covered = float(interior.sum()) * field.cell_volume
    excluded = max(field.domain_volume() - covered, 0.0)
    outer = interior & ~ndimage.binary_erosion(interior, structure=np.ones((3,) * field.d))
    layer_mean = float(integrand[outer].mean()) if outer.any() else 0.0
    attribution = layer_mean * excluded
    return EnergyResult(core + attribution, core, attribution, bad,
                        int(interior.sum()), excluded)


def complex_ma_energy(field, n=None, detail=False):
    """Discrete pluricomplex energy kappa_n * sum (-phi) det(H_C) h^{2n}.

    kappa_n = n!/pi^n; calibrated so radial fields reproduce the closed-form
    profile energy.  Raises if more than 1% of interior points violate the
    psh eigenvalue floor -10h.
    """
    if field.kind != COMPLEX:
        raise FieldError("complex energy needs a complex-kind field")
    n = field.n if n is None else n
    if 2 * n != field.d:
        raise FieldError("field dimension must be 2n")
    det, _, interior, bad = _hessian_checks_complex(field, n)
    kappa = math.factorial(n) / math.pi**n
    res = _energy(field, det, interior, bad, kappa)
    return res if detail else res.value


def real_ma_energy(field, detail=False):
    """Discrete convex-body energy sum (-u) det(D^2 u) h^d (no extra factor)."""
    if field.kind != REAL:
        raise FieldError("real energy needs a real-kind field")
    det, _, interior, bad = _hessian_checks_real(field)
    res = _energy(field, det, interior, bad, 1.0)
    return res if detail else res.value


# -- gradient image oracle ------------------------------------------------------

def gradient_image_area(field, level):
    """Area of the image of the level curve {u = level} under the gradient map.

    Independent oracle for the real Monge-Ampere sublevel mass: for smooth
    strictly convex u the gradient maps {u < level} diffeomorphically onto a
    region whose area is the MA mass.  d = 2 only.
    """
    from skimage import measure

    if field.kind != REAL or field.d != 2:
        raise FieldError("gradient image area needs a 2-D real field")
    if level >= 0 or level <= field.masked_values().min():
        raise FieldError("level not interior")
    contours = measure.find_contours(field.values, level)
    if not contours:
        raise FieldError("level not interior")
    contour = max(contours, key=len)
    if not np.allclose(contour[0], contour[-1]):
        raise FieldError("level not interior")
    # reject curves entering the boundary layer of the mask
    xy = field.origin + field.h * contour
    if field.body is None:
        g = np.linalg.norm(xy, axis=-1)
    else:
        g = field.body.gauge(xy)
    if g.max() > 1.0 - 2.0 * field.h:
        raise FieldError("level not interior")
    gx = _gradient(field.values, 0, field.h)
    gy = _gradient(field.values, 1, field.h)
    coords = contour.T
    px = ndimage.map_coordinates(gx, coords, order=1)
    py = ndimage.map_coordinates(gy, coords, order=1)
    area = 0.5 * np.abs(np.sum(px[:-1] * py[1:] - px[1:] * py[:-1]))
    return float(area)


# -- balanced logarithmic gauges and the Levi density --------------------------

class BalancedLog:
    """Logarithmically homogeneous gauge potential u on C^n: u(lz) = log|l| + u(z)."""

    def __init__(self, fn, n, name="custom"):
        self.fn = fn
        self.n = n
        self.name = name

    @classmethod
    def from_body(cls, body):
        n = body.dim // 2
        return cls(lambda x: np.log(body.gauge(x)), n, name="body")

    @classmethod
    def from_complex_matrix(cls, A):
        A = np.asarray(A, dtype=complex)
        n = A.shape[0]

        def fn(x):
            z = _as_complex_pairs(x)
            w = np.tensordot(z, A.T, axes=([-1], [0]))
            return np.log(np.linalg.norm(w, axis=-1))

        return cls(fn, n, name="ellipsoid")

    @classmethod
    def quartic(cls):
        """u = (1/4) log(|z1|^4 + |z2|^4), the non-ellipsoid balanced sample."""

        def fn(x):
            z = _as_complex_pairs(x)
            return 0.25 * np.log(np.abs(z[..., 0]) ** 4 + np.abs(z[..., 1]) ** 4)

        return cls(fn, 2, name="quartic")

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def log_homogeneity_defect(self, seed=0, n_samples=128):
        """Max |u(l z) - log l - u(z)| over random points and scalings."""
        rng = np.random.default_rng(seed)
        d = 2 * self.n
        z = rng.standard_normal((n_samples, d))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        lam = rng.uniform(0.2, 2.0, size=n_samples)
        return float(np.abs(self(lam[:, None] * z) - np.log(lam) - self(z)).max())


def levi_density_variation(u, level, n=2, samples=200, step=1e-2, seed=0):
    """Coefficient of variation of the Levi density du ^ d^c u ^ (dd^c u)^{n-1}
    over the level set {u = level}, via finite differences of the analytic gauge.

    Constant density on level sets is the computable signature of ellipsoid
    domains; the returned std/mean is scale-free so normalization constants
    drop out.  n = 2 only; ``step`` is the relative finite-difference step.
    """
    if n != 2 or u.n != 2:
        raise FieldError("levi density variation is implemented for n = 2")
    if samples < 50:
        raise FieldError("insufficient level sampling")
    rng = np.random.default_rng(seed)
    d = 4
    dirs = rng.standard_normal((samples, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = np.exp(level - u(dirs))
    pts = r[:, None] * dirs
    hs = step * np.linalg.norm(pts, axis=1)

    def shift(i, s):
        out = pts.copy()
        out[:, i] += s * hs
        return out

    u0 = u(pts)
    du = np.empty((samples, d))
    d2 = np.empty((samples, d, d))
    for i in range(d):
        up, dn = u(shift(i, +1.0)), u(shift(i, -1.0))
        du[:, i] = (up - dn) / (2.0 * hs)
        d2[:, i, i] = (up + dn - 2.0 * u0) / hs**2
    for i in range(d):
        for j in range(i + 1, d):
            pp = pts.copy(); pp[:, i] += hs; pp[:, j] += hs
            mm = pts.copy(); mm[:, i] -= hs; mm[:, j] -= hs
            pm = pts.copy(); pm[:, i] += hs; pm[:, j] -= hs
            mp = pts.copy(); mp[:, i] -= hs; mp[:, j] += hs
            val = (u(pp) + u(mm) - u(pm) - u(mp)) / (4.0 * hs**2)
            d2[:, i, j] = val
            d2[:, j, i] = val
    # complex gradient and Hessian from the real derivatives (axes 2j, 2j+1)
    g1 = 0.5 * (du[:, 0] - 1j * du[:, 1])
    g2 = 0.5 * (du[:, 2] - 1j * du[:, 3])
    H11 = 0.25 * (d2[:, 0, 0] + d2[:, 1, 1])
    H22 = 0.25 * (d2[:, 2, 2] + d2[:, 3, 3])
    H12 = 0.25 * ((d2[:, 0, 2] + d2[:, 1, 3]) + 1j * (d2[:, 0, 3] - d2[:, 1, 2]))
    dens = (np.abs(g1) ** 2 * H22 + np.abs(g2) ** 2 * H11
            - 2.0 * np.real(np.conj(g1) * g2 * H12))
    mean = float(dens.mean())
    if mean <= 0:
        raise FieldError("nonpositive mean Levi density")
    return float(dens.std() / mean)


# -- field file format ----------------------------------------------------------

_HEADER_RE = re.compile(r"(\w+)=([^\s]+)")


def write_field(field, path):
    """Flat text format: two header lines then whitespace-separated values."""
    path = str(path)
    shape = ",".join(str(s) for s in field.values.shape)
    origin = ",".join(repr(float(v)) for v in field.origin)
    header = (f"kind={field.kind} shape={shape} h={field.h!r} "
              f"origin={origin} mask={field.mask_id}")
    with open(path, "w") as fh:
        fh.write("# masym-field 1\n")
        fh.write(header + "\n")
        np.savetxt(fh, field.values.reshape(-1)[None], fmt="%.17g")


def read_field(path):
    path = str(path)
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != "# masym-field 1":
            raise FieldError(f"not a masym field file: {path}")
        header = dict(_HEADER_RE.findall(fh.readline()))
        data = np.loadtxt(fh).reshape(-1)
    shape = tuple(int(s) for s in header["shape"].split(","))
    h = float(header["h"])
    origin = np.array([float(v) for v in header["origin"].split(",")])
    if header.get("mask", "ball") != "ball":
        raise FieldError("only ball-masked fields round-trip through the text format")
    d = len(shape)
    axes = [origin[i] + h * np.arange(shape[i]) for i in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    mask = np.sqrt(sum(g**2 for g in grids)) < 1.0
    return GridField(data.reshape(shape), mask, h, origin, header["kind"])
