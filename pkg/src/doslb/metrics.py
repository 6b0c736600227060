"""Per-round accounting, cumulative regret curves and theoretical bound curves.

Metrics read the latent instance; they sit outside the learner boundary.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import gaps
from .errors import NonpositiveGap
from .estimation import Geometry, geometry_scale, region, sqrt_beta


@dataclass(frozen=True, eq=False)
class RoundRecord:
    t: int
    x: np.ndarray
    efficacy_gap: float
    violations: np.ndarray
    rho: float
    associated_bis_count: int
    optimally_associated: bool
    reward: float = float("nan")
    x_norm_sq: float = float("nan")
    covered: bool = True
    tight_count: int = 0
    flags: frozenset = field(default_factory=frozenset)

    @property
    def max_violation(self):
        return float(np.max(self.violations))

    @property
    def regret(self):
        return max(self.efficacy_gap, max(self.max_violation, 0.0))

    def relaxed_regret(self, eps):
        return max(self.efficacy_gap, max(self.max_violation - eps, 0.0))


class RoundRecorder:
    """Caches per-instance data so that recording a round is cheap."""

    def __init__(self, instance, params, geometry=Geometry.BOX_L1):
        self.instance = instance
        self.view = instance.public_view()
        self.params = params
        self.geometry = Geometry(geometry)
        self.optimal = gaps.optimal_bises(instance)

    def record(self, t, decision, g_before, reward=float("nan")):
        inst = self.instance
        x = np.asarray(decision.x, dtype=np.float64)
        eff = float(inst.opt_value - inst.theta_star @ x)
        viol = inst.A @ x - inst.alpha
        sb = sqrt_beta(g_before, self.params)
        f = g_before.factorization
        w = f.inv_sqrt @ x
        nsq = float(w @ w)
        rho = 2.0 * sb * math.sqrt(nsq) * geometry_scale(self.geometry, inst.d)
        regs = gaps.constraint_regions(self.view, g_before, self.geometry, self.params)
        assoc = gaps.noisy_association(self.view, regs, x)
        opt = any(b in self.optimal for b in assoc)
        covered = region(g_before, "reward", Geometry.ELLIPSOID, self.params).contains(inst.theta_star)
        for u in range(inst.U):
            if not covered:
                break
            covered = region(g_before, u, Geometry.ELLIPSOID, self.params).contains(inst.A[inst.K + u])
        return RoundRecord(t, x, eff, viol, rho, len(assoc), opt, float(reward), nsq, covered,
                           decision.tight_count(), decision.flags)


def record_round(instance, decision, g_before, params, geometry=Geometry.BOX_L1, t=None, reward=float("nan")):
    rec = RoundRecorder(instance, params, geometry)
    return rec.record(g_before.t + 1 if t is None else t, decision, g_before, reward)


# -- bounds ---------------------------------------------------------------------------

def _log_term(T, d, lam):
    return math.log(1.0 + T / (lam * d))


def bound_general(T, d, lam, delta, U):
    if T < 1 or lam < 1.0:
        raise ValueError("bound_general needs T >= 1 and lambda >= 1")
    lg = _log_term(T, d, lam)
    return 4.0 * math.sqrt(T * d * lg) * (math.sqrt(lam) + math.sqrt(0.5 * math.log((U + 1) / delta) + 0.25 * d * lg))


def _poly_core(T, d, lam):
    lg = _log_term(T, d, lam)
    return 8.0 * d * d * lg * lg + 16.0 * d * math.sqrt(lam) * lg


def bound_polytope(T, d, lam, xi, eps):
    if xi <= 0.0 or eps <= 0.0:
        raise NonpositiveGap("Xi and eps must be positive")
    return (1.0 / xi + 1.0 / eps) * _poly_core(T, d, lam)


def bound_bis_count(T, d, lam, xi):
    if xi <= 0.0:
        raise NonpositiveGap("Xi must be positive")
    lg = _log_term(T, d, lam)
    return 8.0 / xi ** 2 * (d * d * lg * lg + 2.0 * d * math.sqrt(lam) * lg)


def bound_eps_violations(T, d, lam, eps):
    """Number of rounds with violation above eps."""
    if eps <= 0.0:
        raise NonpositiveGap("eps must be positive")
    return _poly_core(T, d, lam) / eps ** 2


def elliptical_potential_bound(T, d, lam, L):
    return d * math.log(1.0 + T * L * L / (lam * d))


def log_det_ratio(g):
    """log det(V_t) - log det(lam I) for a Gram state."""
    return float(g.log_det - g.d * math.log(g.lam))


# -- trajectories and summaries --------------------------------------------------------

class Trajectory:
    """Column-oriented storage of RoundRecords for one run."""

    FIELDS = ("efficacy_gap", "max_violation", "rho", "associated_bis_count", "optimally_associated",
              "reward", "x_norm_sq", "covered", "tight_count", "fallback")

    def __init__(self, d, M):
        self.d = d
        self.M = M
        self._x = []
        self._viol = []
        self._cols = {k: [] for k in self.FIELDS}

    def append(self, r: RoundRecord):
        self._x.append(r.x)
        self._viol.append(r.violations)
        c = self._cols
        c["efficacy_gap"].append(r.efficacy_gap)
        c["max_violation"].append(r.max_violation)
        c["rho"].append(r.rho)
        c["associated_bis_count"].append(r.associated_bis_count)
        c["optimally_associated"].append(r.optimally_associated)
        c["reward"].append(r.reward)
        c["x_norm_sq"].append(r.x_norm_sq)
        c["covered"].append(r.covered)
        c["tight_count"].append(r.tight_count)
        c["fallback"].append(bool(r.flags))

    @classmethod
    def from_records(cls, records):
        records = list(records)
        tr = cls(records[0].x.shape[0], records[0].violations.shape[0]) if records else cls(0, 0)
        for r in records:
            tr.append(r)
        return tr

    def __len__(self):
        return len(self._x)

    @property
    def x(self):
        return np.array(self._x).reshape(len(self), self.d)

    @property
    def violations(self):
        return np.array(self._viol).reshape(len(self), self.M)

    def __getattr__(self, name):
        cols = self.__dict__.get("_cols")
        if cols is not None and name in cols:
            return np.array(cols[name])
        raise AttributeError(name)

    def instantaneous_regret(self):
        return np.maximum(self.efficacy_gap, np.maximum(self.max_violation, 0.0))

    def relaxed_increment(self, eps):
        return np.maximum(self.efficacy_gap, np.maximum(self.max_violation - eps, 0.0))


@dataclass(frozen=True, eq=False)
class RunSummary:
    regret: np.ndarray
    relaxed_regret: np.ndarray
    efficacy_regret: np.ndarray
    safety_regret: np.ndarray
    nonopt_bis_count: np.ndarray
    eps_violation_count: np.ndarray
    potential: np.ndarray
    bound_general: np.ndarray = None
    bound_polytope: np.ndarray = None
    bound_bis_count: np.ndarray = None
    bound_eps_violations: np.ndarray = None

    @property
    def T(self):
        return self.regret.shape[0]


def summarize(records, eps, d=None, lam=None, delta=None, U=None, xi=None):
    """Cumulative curves; bound curves are added when their parameters are given."""
    tr = records if isinstance(records, Trajectory) else Trajectory.from_records(records)
    viol = tr.max_violation
    eff = tr.efficacy_gap
    T = len(tr)
    ts = np.arange(1, T + 1)
    bg = bp = bb = be = None
    if d is not None and lam is not None:
        if delta is not None and U is not None and lam >= 1.0:
            bg = np.array([bound_general(t, d, lam, delta, U) for t in ts])
        if xi is not None and math.isfinite(xi) and xi > 0.0:
            bp = np.array([bound_polytope(t, d, lam, xi, eps) for t in ts])
            bb = np.array([bound_bis_count(t, d, lam, xi) for t in ts])
        be = np.array([bound_eps_violations(t, d, lam, eps) for t in ts])
    return RunSummary(
        regret=np.cumsum(tr.instantaneous_regret()),
        relaxed_regret=np.cumsum(tr.relaxed_increment(eps)),
        efficacy_regret=np.cumsum(eff),
        safety_regret=np.cumsum(np.maximum(viol, 0.0)),
        nonopt_bis_count=np.cumsum(~tr.optimally_associated.astype(bool)),
        eps_violation_count=np.cumsum(viol > eps),
        potential=np.cumsum(tr.x_norm_sq),
        bound_general=bg,
        bound_polytope=bp,
        bound_bis_count=bb,
        bound_eps_violations=be,
    )


# -- CSV -----------------------------------------------------------------------------------

def fmt(v):
    return format(float(v), ".12g")


def rounds_header(d):
    return (["run_id", "seed", "t"] + [f"x_{j + 1}" for j in range(d)]
            + ["reward", "instantaneous_regret", "relaxed_regret_increment", "efficacy_gap",
               "max_violation", "rho_t", "optimally_associated", "permissible_empty_flag"])


def rounds_rows(run_id, seed, tr, eps):
    X = tr.x
    inst = tr.instantaneous_regret()
    rel = tr.relaxed_increment(eps)
    eff = tr.efficacy_gap
    mv = tr.max_violation
    rho = tr.rho
    opt = tr.optimally_associated
    rew = tr.reward
    fb = tr.fallback
    for i in range(len(tr)):
        yield ([run_id, str(seed), str(i + 1)] + [fmt(v) for v in X[i]]
               + [fmt(rew[i]), fmt(inst[i]), fmt(rel[i]), fmt(eff[i]), fmt(mv[i]), fmt(rho[i]),
                  "1" if opt[i] else "0", "1" if fb[i] else "0"])
