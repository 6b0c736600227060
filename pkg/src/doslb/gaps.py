"""Basic index sets, spreads and the efficiency/feasibility/consistency gaps.

Indices are 0-based throughout; ``Bis.label`` renders them 1-based. The
instance's domain halfspaces are treated as always-known rows: they bound
every program, so they are included wherever the known set appears.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import ExponentialBudgetExceeded, ProgramInfeasible, ProgramUnbounded
from .estimation import ConfidenceRegion, region
from .tolerances import TOL

ZERO = 1e-10
SUBSET_BUDGET = 2 ** 16


@dataclass(frozen=True, order=True)
class Bis:
    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("BIS indices must be distinct")
        object.__setattr__(self, "indices", idx)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    @property
    def label(self):
        return "{" + ",".join(str(i + 1) for i in self.indices) + "}"


class Association(enum.Enum):
    UNIQUE_POINT = "unique-point"
    AFFINE_PIECE = "affine-piece"
    EMPTY = "empty"


@dataclass(frozen=True, eq=False)
class BisClassification:
    consistent: bool
    kind: Association
    point: np.ndarray
    optimal: bool


@dataclass(frozen=True, eq=False)
class SpreadResult:
    value: float
    pi_witness: np.ndarray
    program_value: float


def _known(inst):
    return list(range(inst.K))


def _system(inst, eq_idx, ineq_idx):
    """Rows A[eq_idx] x = alpha, A[ineq_idx] x <= alpha, plus the domain."""
    eq_idx = list(eq_idx)
    ineq_idx = list(ineq_idx)
    A_in = np.vstack([inst.A[ineq_idx].reshape(len(ineq_idx), inst.d), inst.domain_lhs])
    b_in = np.concatenate([inst.alpha[ineq_idx], inst.domain_rhs])
    return inst.A[eq_idx].reshape(len(eq_idx), inst.d), inst.alpha[eq_idx], A_in, b_in


def _lp(inst, c, eq_idx, ineq_idx):
    A_eq, b_eq, A_in, b_in = _system(inst, eq_idx, ineq_idx)
    return lp.solve(lp.LpProblem(c, A_eq, b_eq, A_in, b_in))


def classify(inst, I):
    I = Bis(I)
    ok, w = lp.feasible(lp.LpProblem(np.zeros(inst.d), *_system(inst, I, _known(inst))))
    optimal = bool(np.all(np.abs(inst.A[list(I)] @ inst.x_star - inst.alpha[list(I)]) <= TOL.bis_equality))
    if not ok:
        return BisClassification(False, Association.EMPTY, None, False)
    unique = True
    for j in range(inst.d):
        e = np.zeros(inst.d)
        e[j] = 1.0
        hi = _lp(inst, e, I, _known(inst))
        lo = _lp(inst, -e, I, _known(inst))
        if not (hi.optimal and lo.optimal) or hi.value + lo.value > 1e-7:
            unique = False
            break
    kind = Association.UNIQUE_POINT if unique else Association.AFFINE_PIECE
    return BisClassification(True, kind, w, optimal)


def spread(inst, v, L, Mset):
    """1 + min ||pi||_1 over optimal multipliers of the dual program.

    The program expresses v through the rows in L (free multipliers; pi for
    unknown rows, rho for known ones) and the rows in Mset plus the domain
    (nonnegative multipliers sigma), minimizing the level-weighted total.
    """
    v = np.asarray(v, dtype=np.float64)
    L = sorted(int(i) for i in L)
    Mset = sorted(int(i) for i in Mset)
    if set(L) & set(Mset):
        raise ValueError("L and M must be disjoint")
    if any(i >= inst.K for i in Mset):
        raise ValueError("M may only contain known constraints")
    LU = [i for i in L if i >= inst.K]
    LK = [i for i in L if i < inst.K]
    nu, nk = len(LU), len(LK)
    sig_rows = np.vstack([inst.A[Mset].reshape(len(Mset), inst.d), inst.domain_lhs])
    sig_lvl = np.concatenate([inst.alpha[Mset], inst.domain_rhs])
    ns = sig_rows.shape[0]
    A_u, A_k = inst.A[LU].reshape(nu, inst.d), inst.A[LK].reshape(nk, inst.d)
    a_u, a_k = inst.alpha[LU], inst.alpha[LK]

    n1 = nu + nk + ns
    cols = np.hstack([A_u.T, A_k.T, sig_rows.T]).reshape(inst.d, n1)
    cost = np.concatenate([a_u, a_k, sig_lvl])
    nonneg = np.zeros((ns, n1))
    nonneg[:, nu + nk:] = -np.eye(ns)
    s1 = lp.solve(lp.LpProblem(-cost, cols, v, nonneg, np.zeros(ns)))
    if s1.status is lp.Status.INFEASIBLE:
        raise ProgramInfeasible("spread program has no feasible multipliers")
    if s1.status is lp.Status.UNBOUNDED:
        raise ProgramUnbounded("spread program is unbounded below")
    w = -s1.value
    if nu == 0:
        return SpreadResult(1.0, np.zeros(0), w)

    n2 = 2 * nu + nk + ns
    cols2 = np.hstack([A_u.T, -A_u.T, A_k.T, sig_rows.T]).reshape(inst.d, n2)
    cost2 = np.concatenate([a_u, -a_u, a_k, sig_lvl])
    obj2 = np.concatenate([-np.ones(2 * nu), np.zeros(nk + ns)])
    sign_rows = np.zeros((2 * nu + ns, n2))
    sign_rows[: 2 * nu, : 2 * nu] = -np.eye(2 * nu)
    sign_rows[2 * nu:, 2 * nu + nk:] = -np.eye(ns)
    ineq = np.vstack([sign_rows, cost2.reshape(1, -1)])
    rhs = np.concatenate([np.zeros(2 * nu + ns), [w + TOL.lp_duality_gap * (1.0 + abs(w))]])
    s2 = lp.solve(lp.LpProblem(obj2, cols2, v, ineq, rhs))
    if not s2.optimal:
        raise ProgramInfeasible("second-stage spread program failed")
    pi = s2.x[:nu] - s2.x[nu: 2 * nu]
    return SpreadResult(1.0 + float(np.sum(np.abs(pi))), pi, w)


@dataclass(frozen=True, eq=False)
class EfficiencyResult:
    separation: float
    spread: float
    gap: float
    witness: np.ndarray


def efficiency(inst, I):
    I = Bis(I)
    rest = [k for k in _known(inst) if k not in I]
    sol = _lp(inst, inst.theta_star, I, rest)
    if not sol.optimal:
        return EfficiencyResult(0.0, 1.0, 0.0, None)
    sep = inst.opt_value - sol.value
    if sep <= ZERO:
        return EfficiencyResult(0.0, 1.0, 0.0, sol.x)
    sp = spread(inst, inst.theta_star, I, rest).value
    return EfficiencyResult(sep, sp, sep / sp, sol.x)


def efficiency_gap(inst, I):
    return efficiency(inst, I).gap


@dataclass(frozen=True, eq=False)
class FeasibilityTerm:
    k: int
    separation: float
    spread: float
    gap: float
    witness: np.ndarray


def feasibility_terms(inst, I):
    """gamma(I; k) for each constraint k outside I with a positive separation."""
    I = Bis(I)
    out = []
    for k in range(inst.M):
        if k in I.indices:
            continue
        sol = _lp(inst, -inst.A[k], I, _known(inst))
        if not sol.optimal:
            continue
        g = -sol.value - inst.alpha[k]
        if g <= ZERO:
            continue
        rest = [j for j in _known(inst) if j not in I.indices and j != k]
        sp = spread(inst, -inst.A[k], I, rest).value
        out.append(FeasibilityTerm(k, g, sp, g / sp, sol.x))
    return out


def feasibility_gap(inst, I):
    return max((t.gap for t in feasibility_terms(inst, I)), default=0.0)


@dataclass(frozen=True, eq=False)
class ConsistencyTerm:
    sub: tuple
    known_subset: tuple
    k: int
    side: str  # "outer" (lower bound above the level) or "inner"
    separation: float
    spread: float
    gap: float


def consistency_terms(inst, I, budget=SUBSET_BUDGET):
    I = Bis(I)
    pool = [k for k in _known(inst) if k not in I.indices]
    if 2 ** (len(I) + len(pool)) > budget:
        raise ExponentialBudgetExceeded(f"2^{len(I) + len(pool)} subset pairs exceed the budget {budget}")
    out = []
    for r in range(len(I) + 1):
        for sub in itertools.combinations(I.indices, r):
            for q in range(len(pool) + 1):
                for J in itertools.combinations(pool, q):
                    A_eq, b_eq, A_in, b_in = _system(inst, sub, J)
                    ok, _ = lp.feasible(lp.LpProblem(np.zeros(inst.d), A_eq, b_eq, A_in, b_in))
                    if not ok:
                        continue
                    for k in range(inst.M):
                        if k in sub or k in J:
                            continue
                        lo = lp.solve(lp.LpProblem(-inst.A[k], A_eq, b_eq, A_in, b_in))
                        if lo.optimal:
                            sep = -lo.value - inst.alpha[k]
                            if sep > ZERO:
                                sp = spread(inst, -inst.A[k], sub, J).value
                                out.append(ConsistencyTerm(sub, J, k, "outer", sep, sp, sep / sp))
                        if k in I.indices:
                            hi = lp.solve(lp.LpProblem(inst.A[k], A_eq, b_eq, A_in, b_in))
                            if hi.optimal:
                                sep = inst.alpha[k] - hi.value
                                if sep > ZERO:
                                    sp = spread(inst, inst.A[k], sub, J).value
                                    out.append(ConsistencyTerm(sub, J, k, "inner", sep, sp, sep / sp))
    return out


def consistency_gap(inst, I):
    if classify(inst, I).consistent:
        return 0.0
    return max((t.gap for t in consistency_terms(inst, I)), default=0.0)


@dataclass(frozen=True, eq=False)
class BisRecord:
    bis: Bis
    classification: BisClassification
    efficiency: EfficiencyResult
    feasibility: tuple
    consistency: tuple

    @property
    def delta(self):
        return self.efficiency.gap

    @property
    def gamma(self):
        return max((t.gap for t in self.feasibility), default=0.0)

    @property
    def lam(self):
        return max((t.gap for t in self.consistency), default=0.0)

    @property
    def max_gap(self):
        return max(self.delta, self.gamma, self.lam)


@dataclass(frozen=True, eq=False)
class GapReport:
    records: tuple
    xi: float
    xi_bis: Bis
    notes: tuple = field(default_factory=tuple)
    violations: tuple = field(default_factory=tuple)

    def record(self, I):
        I = Bis(I)
        for r in self.records:
            if r.bis == I:
                return r
        raise KeyError(I.label)


def analyze_bis(inst, I):
    I = Bis(I)
    c = classify(inst, I)
    if c.consistent:
        return BisRecord(I, c, efficiency(inst, I), tuple(feasibility_terms(inst, I)), ())
    return BisRecord(I, c, EfficiencyResult(0.0, 1.0, 0.0, None), (), tuple(consistency_terms(inst, I)))


def xi(inst):
    """Analyze every BIS; Xi is the smallest strictly positive max-gap."""
    records = tuple(analyze_bis(inst, I) for I in itertools.combinations(range(inst.M), inst.d))
    notes = []
    violations = []
    best, best_bis = math.inf, None
    for r in records:
        if r.max_gap > TOL.gap_positive and r.max_gap < best:
            best, best_bis = r.max_gap, r.bis
        c = r.classification
        if c.consistent and not c.optimal and max(r.delta, r.gamma) <= TOL.gap_positive:
            violations.append(f"{r.bis.label}: consistent and suboptimal but Delta = Gamma = 0")
        if not c.consistent and r.lam <= TOL.gap_positive:
            violations.append(f"{r.bis.label}: inconsistent but Lambda = 0")
        e = r.efficiency
        if e.separation > 0.0 and e.spread != 1.0:
            notes.append(f"{r.bis.label}: efficiency separation {e.separation:.6g} / spread {e.spread:.6g}"
                         f" = Delta {e.gap:.6g}")
        for t in r.feasibility:
            if t.spread != 1.0:
                notes.append(f"{r.bis.label}: feasibility separation on {t.k + 1} {t.separation:.6g}"
                             f" / spread {t.spread:.6g}")
    notes.append("Xi is the minimum over BISs with a strictly positive max-gap; optimal BISs are excluded")
    return GapReport(records, best, best_bis, tuple(notes), tuple(violations))


# -- association --------------------------------------------------------------

def constraint_regions(view, g, geometry, p):
    """One region per constraint: singletons for known rows, confidence sets for unknown ones."""
    regs = [ConfidenceRegion.known(view.known_lhs[i]) for i in range(view.K)]
    regs += [region(g, u, geometry, p) for u in range(view.U)]
    return regs


def admitting(view, regions, x, tol=TOL.association):
    levels = np.concatenate([view.known_rhs[: view.K], view.unknown_levels])
    out = []
    for i, (reg, a) in enumerate(zip(regions, levels)):
        lo = reg.support_min(x)
        hi = reg.support_max(x)
        if lo - tol <= a <= hi + tol:
            out.append(i)
    return out


def noisy_association(view, regions, x, tol=TOL.association):
    """All BISs whose constraints can each be met with equality at x by some region member."""
    return [Bis(c) for c in itertools.combinations(admitting(view, regions, x, tol), view.d)]


def optimal_bises(inst, tol=TOL.bis_equality):
    tight = [i for i in range(inst.M) if abs(inst.A[i] @ inst.x_star - inst.alpha[i]) <= tol]
    return {Bis(c) for c in itertools.combinations(tight, inst.d)}


# -- multi-armed bandit view ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ArmGaps:
    best_arm: int
    deltas: np.ndarray
    gammas: np.ndarray

    @property
    def delta(self):
        pos = self.deltas[self.deltas > ZERO]
        return float(pos.min()) if pos.size else 0.0

    @property
    def gamma(self):
        pos = self.gammas[self.gammas > ZERO]
        return float(pos.min()) if pos.size else 0.0


def arm_gaps(inst):
    """Gaps of the arms e_i of a simplex instance with a single unknown constraint."""
    mu = inst.theta_star
    nu = inst.A[inst.K]
    a = inst.alpha[inst.K]
    safe = nu <= a + ZERO
    if not np.any(safe):
        raise ValueError("no arm is safe")
    best = int(np.argmax(np.where(safe, mu, -np.inf)))
    deltas = np.where(safe, mu[best] - mu, 0.0)
    gammas = np.where(safe, 0.0, nu - a)
    return ArmGaps(best, deltas, gammas)


# -- serialization ------------------------------------------------------------------

def _vec(v):
    return None if v is None else [float(t) for t in v]


def report_to_dict(rep):
    rows = []
    for r in rep.records:
        c = r.classification
        rows.append({
            "bis": [i + 1 for i in r.bis.indices],
            "consistent": c.consistent,
            "association": c.kind.value,
            "point": _vec(c.point),
            "optimal": c.optimal,
            "efficiency_separation": float(r.efficiency.separation),
            "efficiency_spread": float(r.efficiency.spread),
            "Delta": float(r.delta),
            "Gamma": float(r.gamma),
            "Lambda": float(r.lam),
            "feasibility_terms": [
                {"k": t.k + 1, "separation": float(t.separation), "spread": float(t.spread), "gap": float(t.gap)}
                for t in r.feasibility
            ],
            "consistency_terms": [
                {"sub": [i + 1 for i in t.sub], "known_subset": [i + 1 for i in t.known_subset], "k": t.k + 1,
                 "side": t.side, "separation": float(t.separation), "spread": float(t.spread),
                 "gap": float(t.gap)}
                for t in r.consistency
            ],
        })
    return {
        "Xi": float(rep.xi),
        "Xi_bis": None if rep.xi_bis is None else [i + 1 for i in rep.xi_bis.indices],
        "records": rows,
        "notes": list(rep.notes),
        "violations": list(rep.violations),
    }
