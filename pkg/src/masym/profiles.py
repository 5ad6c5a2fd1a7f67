"""Radial one-variable profiles and their closed-form energies and integrals.

Profiles are piecewise-linear with explicit knots, so every closed form below
is exact arithmetic and kink-type test functions are first class.  Two
parametrizations exist:

* ``log_radius``: f(t) on (t_min, 0] with f(0) = 0, representing the radial
  potential f(log|z|); f extends flat (f = f(t_min)) for t < t_min.
* ``minkowski``: f(s) on [s_min, 1] with f(1) = 0, representing f(mu(x)) for
  a body gauge mu; flat extension on [0, s_min].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .bodies import sphere_area
from .errors import ProfileError

__all__ = [
    "PiecewiseLinear",
    "RadialProfile",
    "Observable",
    "convexity_defect",
    "profile_energy_complex",
    "profile_energy_real",
    "radial_integral",
    "minkowski_integral",
    "ma_mass_below",
    "legendre",
    "kink_profile",
    "log_profile",
]

_SLOPE_TOL = 1e-10
_KNOT_TOL = 1e-12

LOG_RADIUS = "log_radius"
MINKOWSKI = "minkowski"


class PiecewiseLinear:
    """Piecewise-linear function on strictly increasing knots.

    Evaluation clamps outside the knot range (flat extension both sides),
    which matches the plateau conventions used throughout.
    """

    def __init__(self, knots, values):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 1:
            raise ProfileError("knots and values must be matching 1-D arrays")
        if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
            raise ProfileError("knots and values must be finite")
        if knots.size > 1 and np.any(np.diff(knots) <= 0):
            raise ProfileError("knot abscissae must be strictly increasing")
        self.knots = knots
        self.values = values

    def __call__(self, t):
        return np.interp(t, self.knots, self.values)

    def slopes(self):
        if self.knots.size < 2:
            return np.empty(0)
        return np.diff(self.values) / np.diff(self.knots)

    def left_slope_at(self, x):
        """Slope immediately left of x; 0 on the flat extension."""
        k = self.knots
        if x <= k[0] + _KNOT_TOL:
            return 0.0
        i = int(np.searchsorted(k, x - _KNOT_TOL, side="right")) - 1
        i = min(i, k.size - 2)
        s = self.slopes()
        return float(s[i])

    def is_knot(self, x, tol=1e-9):
        return bool(np.any(np.abs(self.knots - x) <= tol))

    @property
    def min_value(self):
        return float(self.values.min())

    def refined(self, extra_knots):
        """Insert knots (values interpolated, so the function is unchanged)."""
        ts = np.unique(np.concatenate([self.knots, np.asarray(extra_knots, dtype=float)]))
        ts = ts[(ts >= self.knots[0]) & (ts <= self.knots[-1])]
        return type(self)._rebuild(self, ts, self(ts))

    @staticmethod
    def _rebuild(template, knots, values):
        if isinstance(template, RadialProfile):
            return RadialProfile(template.mode, knots, values)
        return PiecewiseLinear(knots, values)

    def to_csv(self, path):
        arr = np.stack([self.knots, self.values], axis=1)
        np.savetxt(path, arr, delimiter=",", header="abscissa,value", comments="")


class RadialProfile(PiecewiseLinear):
    """Profile with a parametrization mode and pinned right endpoint.

    Monotonicity and convexity are *not* construction invariants: symmetrized
    outputs of non-psh inputs legitimately violate convexity, and that defect
    is exactly what several experiments measure.
    """

    def __init__(self, mode, knots, values):
        super().__init__(knots, values)
        if mode not in (LOG_RADIUS, MINKOWSKI):
            raise ProfileError(f"unknown profile mode {mode!r}")
        right = 0.0 if mode == LOG_RADIUS else 1.0
        if abs(self.knots[-1] - right) > 1e-9:
            raise ProfileError(f"{mode} profile must end at abscissa {right}")
        if abs(self.values[-1]) > 1e-9:
            raise ProfileError("profile must vanish at its right endpoint")
        if mode == MINKOWSKI and self.knots[0] < -1e-12:
            raise ProfileError("minkowski profile abscissae must lie in [0, 1]")
        self.values = self.values.copy()
        self.values[-1] = 0.0
        self.mode = mode

    @classmethod
    def from_function(cls, mode, fn, knots):
        knots = np.asarray(knots, dtype=float)
        return cls(mode, knots, np.asarray(fn(knots), dtype=float))

    def scaled(self, c):
        """Profile with values scaled by c (abscissae unchanged)."""
        return RadialProfile(self.mode, self.knots, c * self.values)

    def is_nondecreasing(self, tol=_SLOPE_TOL):
        s = self.slopes()
        return s.size == 0 or s.min() >= -tol


def kink_profile(slope=1.0, depth=1.0, mode=LOG_RADIUS):
    """max(slope*(t - right), -depth) + 0 at the right endpoint.

    In log_radius mode this is max(slope*t, -depth); the minkowski variant is
    the same kink translated to end at s = 1.
    """
    if slope <= 0 or depth <= 0:
        raise ProfileError("kink profile needs positive slope and depth")
    right = 0.0 if mode == LOG_RADIUS else 1.0
    t_kink = right - depth / slope
    if mode == MINKOWSKI and t_kink < 0:
        raise ProfileError("kink falls outside [0, 1]")
    return RadialProfile(mode, [t_kink, right], [-depth, 0.0])


def log_profile(t_min=-2.0):
    """The identity profile f(t) = t, i.e. phi = log|z| truncated at t_min."""
    return RadialProfile(LOG_RADIUS, [t_min, 0.0], [t_min, 0.0])


# -- observables -------------------------------------------------------------

@dataclass(frozen=True)
class Observable:
    """One-variable integrand from the fixed catalogue.

    kinds: ``power`` |x|^p, ``exp_neg`` e^{-x}, ``moser`` exp(kappa*(-x)^{(n+1)/n}),
    ``indicator`` 1_{x < threshold}.
    """

    kind: str
    p: float = 0.0
    kappa: float = 1.0
    n: int = 1
    threshold: float = 0.0

    @classmethod
    def power(cls, p):
        return cls("power", p=p)

    @classmethod
    def exp_neg(cls):
        return cls("exp_neg")

    @classmethod
    def moser(cls, kappa, n):
        return cls("moser", kappa=kappa, n=n)

    @classmethod
    def indicator_below(cls, threshold):
        return cls("indicator", threshold=threshold)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return np.abs(x) ** self.p
        if self.kind == "exp_neg":
            return np.exp(-x)
        if self.kind == "moser":
            ex = (self.n + 1) / self.n
            return np.exp(self.kappa * np.maximum(-x, 0.0) ** ex)
        if self.kind == "indicator":
            return (x < self.threshold).astype(float)
        raise ProfileError(f"unknown observable kind {self.kind!r}")


# -- profile operations ------------------------------------------------------

def convexity_defect(f):
    """Max violation of knot convexity: 0 iff the profile is convex.

    Measured as the most negative second divided difference (scaled to
    approximate -f''), clipped at 0.
    """
    s = f.slopes()
    if s.size < 2:
        return 0.0
    k = f.knots
    d2 = 2.0 * np.diff(s) / (k[2:] - k[:-2])
    return float(max(0.0, -d2.min()))


def _require_nondecreasing(f):
    s = f.slopes()
    if s.size and s.min() < -_SLOPE_TOL:
        raise ProfileError("profile not increasing")


def profile_energy_complex(f, n):
    """Monge-Ampere energy 2^{-n} * sum slope^{n+1} * length for f(log|z|).

    Equals the energy of phi = f(u) for the balanced-domain log gauge u, and
    of the Schwarz symmetrization of phi; the flat extension contributes 0.
    """
    if f.mode != LOG_RADIUS:
        raise ProfileError("complex energy needs a log_radius profile")
    _require_nondecreasing(f)
    s = f.slopes()
    if s.size == 0:
        return 0.0
    w = np.diff(f.knots)
    return float(2.0 ** (-n) * np.sum(np.clip(s, 0.0, None) ** (n + 1) * w))


def profile_energy_real(f, polar_volume, n):
    """Energy |polar| * sum slope^{n+1} * length for u = f(mu) on a convex body."""
    if f.mode != MINKOWSKI:
        raise ProfileError("real energy needs a minkowski profile")
    if polar_volume <= 0:
        raise ProfileError("polar volume must be positive")
    _require_nondecreasing(f)
    s = f.slopes()
    if s.size == 0:
        return 0.0
    w = np.diff(f.knots)
    return float(polar_volume * np.sum(np.clip(s, 0.0, None) ** (n + 1) * w))


def _interval_integral(F, f, a, b, ya, yb, n):
    """integral over [a, b] of F(f(t)) e^{2nt} dt for affine f; exact where possible."""
    m = (yb - ya) / (b - a)
    two_n = 2.0 * n
    if F.kind == "exp_neg":
        # e^{-(ya + m (t-a))} e^{2nt}
        c = two_n - m
        pref = math.exp(-ya + two_n * a)
        L = b - a
        if abs(c) < 1e-13:
            return pref * L
        return pref * (math.exp(c * L) - 1.0) / c
    if F.kind == "indicator":
        # f(t) < threshold on a left sub-interval (f nondecreasing on it) or all/none
        th = F.threshold
        if ya >= th and yb >= th:
            lo, hi = a, a
        elif ya < th and yb < th:
            lo, hi = a, b
        elif m > 0:
            lo, hi = a, a + (th - ya) / m
        else:  # decreasing segment: f < th on a right sub-interval
            lo, hi = a + (th - ya) / m, b
        if hi <= lo:
            return 0.0
        return (math.exp(two_n * hi) - math.exp(two_n * lo)) / two_n
    if F.kind == "power" and F.p == 0:
        return (math.exp(two_n * b) - math.exp(two_n * a)) / two_n
    val, _ = quad(lambda t: float(F(ya + m * (t - a))) * math.exp(two_n * t), a, b,
                  epsrel=1e-8, epsabs=1e-14, limit=200)
    return val


def radial_integral(F, f, n):
    """a_n * integral_{-inf}^0 F(f(t)) e^{2nt} dt with a_n the unit-sphere area in C^n.

    This is the ball integral of F(phi) for the radial potential phi = f(log|z|).
    The flat tail below t_min is exact; each knot interval is integrated exactly
    for exponential/indicator/constant observables, adaptively (rel. 1e-8)
    otherwise.
    """
    if f.mode != LOG_RADIUS:
        raise ProfileError("radial integral needs a log_radius profile")
    a_n = sphere_area(n)
    t0 = f.knots[0]
    plateau = float(F(f.values[0]))
    if not math.isfinite(plateau):
        raise ProfileError("integral diverges")
    total = plateau * math.exp(2.0 * n * t0) / (2.0 * n)
    k, v = f.knots, f.values
    for i in range(k.size - 1):
        total += _interval_integral(F, f, k[i], k[i + 1], v[i], v[i + 1], n)
    if not math.isfinite(total):
        raise ProfileError("integral diverges")
    return a_n * total


def minkowski_integral(F, f, N, domain_volume):
    """Body integral of F(f(mu)): domain_volume * N * integral_0^1 F(f(s)) s^{N-1} ds."""
    if f.mode != MINKOWSKI:
        raise ProfileError("minkowski integral needs a minkowski profile")
    s0 = f.knots[0]
    plateau = float(F(f.values[0]))
    if not math.isfinite(plateau):
        raise ProfileError("integral diverges")
    total = plateau * s0**N
    k, v = f.knots, f.values
    for i in range(k.size - 1):
        a, b, ya, yb = k[i], k[i + 1], v[i], v[i + 1]
        m = (yb - ya) / (b - a)
        if F.kind == "indicator":
            th = F.threshold
            if ya >= th and yb >= th:
                lo, hi = a, a
            elif ya < th and yb < th:
                lo, hi = a, b
            elif m > 0:
                lo, hi = a, a + (th - ya) / m
            else:
                lo, hi = a + (th - ya) / m, b
            total += max(hi, lo) ** N - lo**N if hi > lo else 0.0
        elif F.kind == "power" and F.p == 0:
            total += b**N - a**N
        else:
            val, _ = quad(lambda s: float(F(ya + m * (s - a))) * N * s ** (N - 1), a, b,
                          epsrel=1e-8, epsabs=1e-14, limit=200)
            total += val
    if not math.isfinite(total):
        raise ProfileError("integral diverges")
    return domain_volume * total


def ma_mass_below(f, level, n, polar_volume=None):
    """Monge-Ampere mass of the sublevel set {gauge < level}.

    log_radius profiles: 2^{-n} * (left slope at level)^n (complex branch).
    minkowski profiles: (left slope)^n * polar_volume (real branch).
    At a knot the left slope is used; callers can detect the kink via
    ``f.is_knot(level)``.
    """
    right = 0.0 if f.mode == LOG_RADIUS else 1.0
    if level > right + 1e-12:
        raise ProfileError("level outside the profile's range")
    s = max(f.left_slope_at(level), 0.0)
    if f.mode == LOG_RADIUS:
        return float(2.0 ** (-n) * s**n)
    if polar_volume is None:
        raise ProfileError("real-branch mass needs the polar volume")
    return float(s**n * polar_volume)


# -- convex conjugation ------------------------------------------------------

def _dedupe_grid(x, tol=1e-12):
    x = np.sort(np.asarray(x, dtype=float))
    if x.size == 0:
        return x
    keep = [x[0]]
    for v in x[1:]:
        if v - keep[-1] > tol * max(1.0, abs(v)):
            keep.append(v)
    return np.array(keep)


def _conjugate_on_grid(knots, values, grid):
    """sup_k (p * knot_k - value_k) evaluated at each p in grid."""
    return np.max(grid[:, None] * knots[None, :] - values[None, :], axis=1)


def legendre(f):
    """Convex conjugate, piecewise-linear in and out, involutive.

    A ``log_radius`` profile (convex, non-decreasing, flat-left plateau) maps
    to its dual: a non-increasing convex PL function on [0, max slope] that
    vanishes at the right end.  A plain :class:`PiecewiseLinear` in that dual
    form maps back to the primal profile; ``legendre(legendre(f))`` recovers f.
    """
    if isinstance(f, RadialProfile):
        if f.mode != LOG_RADIUS:
            raise ProfileError("conjugate is defined for log_radius profiles")
        if convexity_defect(f) > 1e-10 or not f.is_nondecreasing():
            raise ProfileError("conjugate requires convex profile")
        p_grid = _dedupe_grid(np.concatenate([[0.0], np.clip(f.slopes(), 0.0, None)]))
        vals = _conjugate_on_grid(f.knots, f.values, p_grid)
        return PiecewiseLinear(p_grid, vals)
    # dual -> primal
    s = f.slopes()
    if s.size and np.any(np.diff(s) < -1e-10):
        raise ProfileError("conjugate requires convex profile")
    t_grid = _dedupe_grid(np.concatenate([s, [0.0]]))
    t_grid = t_grid[t_grid <= 1e-12]
    vals = _conjugate_on_grid(f.knots, f.values, t_grid)
    knots = t_grid.copy()
    knots[-1] = 0.0
    vals[-1] = 0.0
    return RadialProfile(LOG_RADIUS, knots, vals)
