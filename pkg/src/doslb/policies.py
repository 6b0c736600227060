"""Action selection: DOSLB, the Safe-LTS baseline and a clairvoyant oracle.

DOSLB and Safe-LTS only receive an instance's ``PublicView``; the oracle is
the one place that reads the latent parameters.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import lp
from ._backend import kernels
from .errors import EnumerationBudgetExceeded, NoSafeFallback, NumericalFailure, PermissibleEmpty
from .estimation import Geometry, RadiusParams, region, sqrt_beta
from .tolerances import TOL

FALLBACK_FLAG = "permissible_empty_fallback"
LTS_FALLBACK_FLAG = "pessimistic_empty_fallback"


class PolicyKind(enum.Enum):
    DOSLB = "doslb"
    SAFE_LTS = "safelts"
    ORACLE = "oracle"


class FallbackMode(enum.Enum):
    KNOWN_ONLY = "known-only"
    ERROR = "error"


@dataclass(frozen=True, eq=False)
class PolicyConfig:
    kind: PolicyKind
    radius_params: RadiusParams
    geometry: Geometry = Geometry.BOX_L1
    lts_inflation: float = 1.0
    # Safe-LTS perturbation scale is lts_inflation * beta ** lts_beta_power
    lts_beta_power: float = 0.5
    lts_safe_fallback: np.ndarray = None
    fallback_mode: FallbackMode = FallbackMode.KNOWN_ONLY
    max_lps: int = 10 ** 6

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        object.__setattr__(self, "fallback_mode", FallbackMode(self.fallback_mode))
        if self.geometry in (Geometry.KNOWN, Geometry.ELLIPSOID) and self.kind is not PolicyKind.ORACLE:
            raise ValueError("policies need a region geometry with vertices (l1, linf or ellipsoid-reference)")
        if self.lts_inflation <= 0.0:
            raise ValueError("lts_inflation must be positive")


@dataclass(frozen=True, eq=False)
class Decision:
    x: np.ndarray
    optimistic_value: float
    reward_vertex: int = -1
    constraint_vertices: tuple = ()
    n_feasible: int = 0
    n_lps: int = 0
    flags: frozenset = field(default_factory=frozenset)
    lp_lhs: np.ndarray = None
    lp_rhs: np.ndarray = None
    theta_tilde: np.ndarray = None

    @property
    def fallback(self):
        return FALLBACK_FLAG in self.flags or LTS_FALLBACK_FLAG in self.flags

    def tight_count(self, tol=1e-6):
        """Rows of the winning LP that hold with equality at x."""
        if self.lp_lhs is None:
            return 0
        return int(np.sum(np.abs(self.lp_lhs @ self.x - self.lp_rhs) <= tol))


def _best_over_known(view, thetas):
    best = None
    for r, th in enumerate(thetas):
        sol = lp.solve(lp.LpProblem(th, ineq_lhs=view.known_lhs, ineq_rhs=view.known_rhs))
        if sol.optimal and (best is None or sol.value > best[2]):
            best = (r, sol.x, sol.value)
    if best is None:
        raise PermissibleEmpty("the known domain admits no optimal action")
    return best


def doslb_select(view, g, cfg):
    """Maximize <theta, x> jointly over reward-region vertices and permissible x."""
    p = cfg.radius_params
    R = region(g, "reward", cfg.geometry, p).vertices()
    d = view.d
    if view.U:
        W = np.stack([region(g, u, cfg.geometry, p).vertices() for u in range(view.U)])
    else:
        W = np.zeros((0, 1, d))
    nv = W.shape[1]
    total = R.shape[0] * nv ** view.U
    if total > cfg.max_lps:
        raise EnumerationBudgetExceeded(f"{total} LPs exceed the enumeration budget {cfg.max_lps}")
    best_r, combo, x, value, n_feas, n_lps = kernels.doslb_enumerate(
        R, W, view.known_lhs, view.known_rhs, view.unknown_levels,
        TOL.lp_feasibility, TOL.lp_pivot, TOL.lp_optimality,
    )
    if best_r == -2:
        raise NumericalFailure("simplex iteration cap reached during vertex enumeration")
    if best_r == -1:
        if cfg.fallback_mode is FallbackMode.ERROR:
            raise PermissibleEmpty("every vertex-combination LP is infeasible")
        r, x, value = _best_over_known(view, R)
        return Decision(x, float(value), r, (), 0, int(n_lps), frozenset({FALLBACK_FLAG}),
                        view.known_lhs, view.known_rhs, R[r])
    combo = tuple(int(c) for c in combo)
    chosen = np.array([W[u, combo[u]] for u in range(view.U)]).reshape(view.U, d)
    lhs = np.vstack([view.known_lhs, chosen])
    rhs = np.concatenate([view.known_rhs, view.unknown_levels])
    return Decision(np.array(x), float(value), int(best_r), combo, int(n_feas), int(n_lps),
                    frozenset(), lhs, rhs, R[best_r])


def solve_vertex_choice(view, g, cfg, reward_vertex, constraint_vertices):
    """Re-solve the LP for one vertex choice; returns the LpSolution."""
    p = cfg.radius_params
    theta = region(g, "reward", cfg.geometry, p).vertices()[reward_vertex]
    rows = [region(g, u, cfg.geometry, p).vertices()[k] for u, k in enumerate(constraint_vertices)]
    lhs = np.vstack([view.known_lhs] + [r.reshape(1, -1) for r in rows])
    rhs = np.concatenate([view.known_rhs, view.unknown_levels])
    return lp.solve(lp.LpProblem(theta, ineq_lhs=lhs, ineq_rhs=rhs))


def safe_fallback(view, cfg):
    """The configured safe action, or the origin when it satisfies the known rows."""
    if cfg.lts_safe_fallback is not None:
        return np.asarray(cfg.lts_safe_fallback, dtype=np.float64)
    if np.all(view.known_rhs >= -TOL.lp_feasibility):
        return np.zeros(view.d)
    return None


def safelts_select(view, g, cfg, rng):
    """Thompson sample over the pessimistic set. Returns (Decision, advanced rng)."""
    p = cfg.radius_params
    eta, rng = rng.normals(view.d)
    scale = cfg.lts_inflation * sqrt_beta(g, p) ** (2.0 * cfg.lts_beta_power)
    theta = g.theta_hat + scale * (g.factorization.inv_sqrt @ eta)
    blocks = [view.known_lhs]
    levels = [view.known_rhs]
    for u in range(view.U):
        V = region(g, u, cfg.geometry, p).vertices()
        blocks.append(V)
        levels.append(np.full(V.shape[0], view.unknown_levels[u]))
    lhs = np.vstack(blocks)
    rhs = np.concatenate(levels)
    sol = lp.solve(lp.LpProblem(theta, ineq_lhs=lhs, ineq_rhs=rhs))
    if sol.optimal:
        return Decision(sol.x, sol.value, n_feasible=1, n_lps=1, lp_lhs=lhs, lp_rhs=rhs, theta_tilde=theta), rng
    x = safe_fallback(view, cfg)
    if x is None:
        raise NoSafeFallback("pessimistic set is empty and no safe action is configured")
    return Decision(x, float(theta @ x), n_lps=1, flags=frozenset({LTS_FALLBACK_FLAG}), theta_tilde=theta), rng


def oracle_select(instance):
    x = instance.x_star
    return Decision(x.copy(), float(instance.opt_value), n_feasible=1, n_lps=1,
                    lp_lhs=instance.full_lhs, lp_rhs=instance.full_rhs, theta_tilde=instance.theta_star)


def select(cfg, view, g, rng, instance=None):
    """Dispatch on the policy kind. Returns (Decision, rng)."""
    if cfg.kind is PolicyKind.DOSLB:
        return doslb_select(view, g, cfg), rng
    if cfg.kind is PolicyKind.SAFE_LTS:
        return safelts_select(view, g, cfg, rng)
    if instance is None:
        raise ValueError("the oracle policy needs the latent instance")
    return oracle_select(instance), rng
