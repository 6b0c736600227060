"""Regularized least squares and the confidence regions built around it."""

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, TooManyVertices
from .numeric import as_vec, spd_sqrt
from .tolerances import TOL

POLYGON_SIDES = 16
LINF_MAX_DIM = 12


class Geometry(enum.Enum):
    ELLIPSOID = "ellipsoid"
    BOX_LINF = "linf"
    BOX_L1 = "l1"
    # regular polygon circumscribing the ellipsoid (d <= 2); lets the vertex
    # enumeration policy run against a close stand-in for the ellipsoid
    POLYGON = "ellipsoid-reference"
    KNOWN = "known"


def geometry_scale(geometry, d):
    """Factor turning rho into the bound valid for the given region shape."""
    if geometry in (Geometry.BOX_L1, Geometry.BOX_LINF):
        return math.sqrt(d)
    if geometry is Geometry.POLYGON and d == 2:
        return 1.0 / math.cos(math.pi / POLYGON_SIDES)
    return 1.0


@dataclass(frozen=True)
class RadiusParams:
    delta: float
    U: int
    S: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.U < 0 or self.S <= 0.0 or self.R <= 0.0:
            raise ValueError("U must be nonnegative and S, R positive")


class GramState:
    """V = lam I + sum x x^T with reward and unknown-constraint accumulators.

    Instances are treated as immutable; ``update`` returns a new state.
    """

    __slots__ = ("lam", "V", "xr", "xs", "t", "K", "__dict__")

    def __init__(self, lam, V, xr, xs, t, K):
        self.lam = float(lam)
        self.V = V
        self.xr = xr
        self.xs = xs
        self.t = int(t)
        self.K = int(K)

    @classmethod
    def fresh(cls, d, lam, K, U):
        if lam <= 0.0:
            raise ValueError("lambda must be positive")
        return cls(lam, lam * np.eye(d), np.zeros(d), np.zeros((U, d)), 0, K)

    @property
    def d(self):
        return self.V.shape[0]

    @property
    def U(self):
        return self.xs.shape[0]

    @cached_property
    def factorization(self):
        return spd_sqrt(self.V)

    @cached_property
    def theta_hat(self):
        return self.factorization.solve(self.xr)

    @cached_property
    def a_hat(self):
        """(U, d) array of unknown-constraint estimates."""
        return self.xs @ self.factorization.inv

    @cached_property
    def log_det(self):
        return self.factorization.log_det

    def update(self, x, fb):
        x = as_vec(x, self.d, "action")
        s = np.asarray(fb.safety, dtype=np.float64)
        if s.shape[0] != self.K + self.U:
            raise DimensionMismatch(f"safety feedback has {s.shape[0]} channels, expected {self.K + self.U}")
        V = self.V + np.outer(x, x)
        xr = self.xr + fb.reward * x
        xs = self.xs + np.outer(s[self.K:], x)
        return GramState(self.lam, V, xr, xs, self.t + 1, self.K)


def update(g, x, fb):
    return g.update(x, fb)


def sqrt_beta(g, p):
    log_ratio = 0.5 * (g.log_det - g.d * math.log(g.lam))
    inner = 0.5 * (math.log(p.U + 1.0) + log_ratio - math.log(p.delta))
    return p.R * math.sqrt(max(inner, 0.0)) + p.S * math.sqrt(g.lam)


def beta(g, p):
    return sqrt_beta(g, p) ** 2


@dataclass(frozen=True, eq=False)
class ConfidenceRegion:
    center: np.ndarray
    shape: object
    radius: float
    geometry: Geometry
    known_point: np.ndarray = None

    @classmethod
    def known(cls, a):
        a = as_vec(a, name="known vector")
        return cls(a, None, 0.0, Geometry.KNOWN, a)

    @property
    def d(self):
        return self.center.shape[0]

    def _whitened(self, x):
        x = as_vec(x, self.d, "x")
        return x, self.shape.inv_sqrt @ x

    def _spread(self, x):
        """max over the region of <a - center, x>."""
        g = self.geometry
        if g is Geometry.KNOWN:
            return 0.0
        x, w = self._whitened(x)
        if g is Geometry.ELLIPSOID:
            return self.radius * float(np.linalg.norm(w))
        if g is Geometry.BOX_LINF:
            return self.radius * float(np.sum(np.abs(w)))
        if g is Geometry.BOX_L1:
            return self.radius * float(np.max(np.abs(w)))
        return float(np.max(self._unit_vertices() @ w)) * self.radius

    def support_min(self, x):
        x = as_vec(x, self.d, "x")
        return float(self.center @ x) - self._spread(x)

    def support_max(self, x):
        x = as_vec(x, self.d, "x")
        return float(self.center @ x) + self._spread(x)

    def _unit_vertices(self):
        """Vertices of the unit region in whitened coordinates."""
        d = self.d
        g = self.geometry
        if g is Geometry.BOX_L1:
            out = np.zeros((2 * d, d))
            for j in range(d):
                out[2 * j, j] = 1.0
                out[2 * j + 1, j] = -1.0
            return out
        if g is Geometry.BOX_LINF:
            if d > LINF_MAX_DIM:
                raise TooManyVertices(f"the L-infinity box has 2^{d} vertices; cap is d <= {LINF_MAX_DIM}")
            return np.array(list(itertools.product((1.0, -1.0), repeat=d)))
        if g is Geometry.POLYGON:
            if d == 1:
                return np.array([[1.0], [-1.0]])
            if d == 2:
                ang = 2.0 * math.pi * np.arange(POLYGON_SIDES) / POLYGON_SIDES
                return np.column_stack([np.cos(ang), np.sin(ang)])
            raise TooManyVertices("the polygonal ellipsoid stand-in exists only for d <= 2")
        raise TooManyVertices(f"{g.value} regions have no finite vertex set")

    def vertices(self):
        if self.geometry is Geometry.KNOWN:
            return self.known_point.reshape(1, -1).copy()
        return self.center + self.radius * (self._unit_vertices() @ self.shape.inv_sqrt)

    def contains(self, v, tol=TOL.membership):
        v = as_vec(v, self.d, "v")
        if self.geometry is Geometry.KNOWN:
            return float(np.linalg.norm(v - self.known_point)) <= tol
        z = self.shape.sqrt @ (v - self.center)
        g = self.geometry
        if g is Geometry.ELLIPSOID:
            n = float(np.linalg.norm(z))
        elif g is Geometry.BOX_LINF:
            n = float(np.max(np.abs(z)))
        elif g is Geometry.BOX_L1:
            n = float(np.sum(np.abs(z)))
        elif self.d == 1:
            n = float(abs(z[0]))
        else:
            # facet normals sit halfway between consecutive vertices; inradius r cos(pi/n)
            ang = 2.0 * math.pi * (np.arange(POLYGON_SIDES) + 0.5) / POLYGON_SIDES
            normals = np.column_stack([np.cos(ang), np.sin(ang)])
            n = float(np.max(normals @ z)) / math.cos(math.pi / POLYGON_SIDES)
        return n <= self.radius * (1.0 + tol) + tol


def region(g, target, geometry, p):
    """Confidence region for the reward vector (target="reward") or unknown constraint ``target``."""
    geometry = Geometry(geometry)
    if geometry is Geometry.KNOWN:
        raise ValueError("known regions are built with ConfidenceRegion.known")
    center = g.theta_hat if target == "reward" else g.a_hat[int(target)]
    r = sqrt_beta(g, p)
    if geometry is Geometry.BOX_L1:
        r *= math.sqrt(g.d)
    elif geometry is Geometry.POLYGON and g.d == 2:
        r /= math.cos(math.pi / POLYGON_SIDES)
    return ConfidenceRegion(center, g.factorization, r, geometry)


def support_min(c, x):
    return c.support_min(x)


def support_max(c, x):
    return c.support_max(x)


def vertices(c):
    return c.vertices()


def contains(c, v):
    return c.contains(v)


def rho(g, x, p, geometry=Geometry.ELLIPSOID):
    """2 sqrt(beta) ||x||_{V^-1}, inflated for box or polygon regions."""
    x = as_vec(x, g.d, "x")
    return 2.0 * sqrt_beta(g, p) * g.factorization.inv_norm(x) * geometry_scale(Geometry(geometry), g.d)
