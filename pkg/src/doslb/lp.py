"""Small dense linear programs over free variables.

    maximize    <c, x>
    subject to  A_eq x  = b_eq
                A_in x <= b_in

Solved by a two-phase tableau simplex with Bland's rule. Dual multipliers are
read off the final tableau.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NumericalFailure
from .tolerances import TOL


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_STATUS = {0: Status.OPTIMAL, 1: Status.INFEASIBLE, 2: Status.UNBOUNDED}


def _rows(a, n, name):
    if a is None:
        return np.zeros((0, n))
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return np.zeros((0, n))
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.shape[1] != n:
        raise DimensionMismatch(f"{name} has {a.shape[1]} columns, expected {n}")
    return a


def _rhs(b, m, name):
    if b is None:
        b = np.zeros(0)
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if b.shape != (m,):
        raise DimensionMismatch(f"{name} has length {b.shape[0]}, expected {m}")
    return b


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: np.ndarray
    eq_lhs: np.ndarray = None
    eq_rhs: np.ndarray = None
    ineq_lhs: np.ndarray = None
    ineq_rhs: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=np.float64))
        if c.ndim != 1 or c.shape[0] == 0:
            raise DimensionMismatch("objective must be a non-empty vector")
        n = c.shape[0]
        A_eq = _rows(self.eq_lhs, n, "eq_lhs")
        A_in = _rows(self.ineq_lhs, n, "ineq_lhs")
        b_eq = _rhs(self.eq_rhs, A_eq.shape[0], "eq_rhs")
        b_in = _rhs(self.ineq_rhs, A_in.shape[0], "ineq_rhs")
        for arr in (c, A_eq, A_in, b_eq, b_in):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_lhs", A_eq)
        object.__setattr__(self, "eq_rhs", b_eq)
        object.__setattr__(self, "ineq_lhs", A_in)
        object.__setattr__(self, "ineq_rhs", b_in)

    @property
    def n(self):
        return self.objective.shape[0]


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    x: np.ndarray = None
    value: float = float("nan")
    dual_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual_ineq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


def solve(p: LpProblem) -> LpSolution:
    status, x, value, y_eq, y_in, iters = kernels.simplex(
        p.objective, p.eq_lhs, p.eq_rhs, p.ineq_lhs, p.ineq_rhs,
        TOL.lp_feasibility, TOL.lp_pivot, TOL.lp_optimality,
    )
    if status == 3:
        raise NumericalFailure(f"simplex hit its iteration cap after {iters} pivots")
    st = _STATUS[status]
    if st is not Status.OPTIMAL:
        return LpSolution(st, iterations=iters)
    return LpSolution(st, x, float(value), y_eq, y_in, iters)


def feasible(p: LpProblem):
    """Return (True, witness) if the constraint system has a solution, else (False, None)."""
    q = LpProblem(np.zeros(p.n), p.eq_lhs, p.eq_rhs, p.ineq_lhs, p.ineq_rhs)
    sol = solve(q)
    if sol.status is Status.OPTIMAL:
        return True, sol.x
    return False, None


def maximize(c, eq=None, ineq=None):
    """Convenience wrapper taking (lhs, rhs) pairs."""
    A_eq, b_eq = eq if eq is not None else (None, None)
    A_in, b_in = ineq if ineq is not None else (None, None)
    return solve(LpProblem(c, A_eq, b_eq, A_in, b_in))


def certificate_violations(p: LpProblem, s: LpSolution):
    """Return the four optimality certificate residuals of an optimal solution.

    Keys: primal (max constraint violation), dual_sign (most negative inequality
    multiplier, as a positive number), duality_gap (relative), slackness (max
    y_j * slack_j), stationarity (max |A^T y - c|).
    """
    x = s.x
    viol = 0.0
    if p.eq_lhs.shape[0]:
        viol = max(viol, float(np.max(np.abs(p.eq_lhs @ x - p.eq_rhs))))
    slack = p.ineq_rhs - p.ineq_lhs @ x if p.ineq_lhs.shape[0] else np.zeros(0)
    if slack.size:
        viol = max(viol, float(np.max(-slack)))
    dual_sign = float(np.max(-s.dual_ineq, initial=0.0))
    dual_obj = float(s.dual_eq @ p.eq_rhs + s.dual_ineq @ p.ineq_rhs)
    gap = abs(s.value - dual_obj) / (1.0 + abs(s.value))
    cs = float(np.max(s.dual_ineq * slack, initial=0.0))
    grad = p.eq_lhs.T @ s.dual_eq + p.ineq_lhs.T @ s.dual_ineq - p.objective
    return {
        "primal": viol,
        "dual_sign": dual_sign,
        "duality_gap": gap,
        "slackness": cs,
        "stationarity": float(np.max(np.abs(grad))),
    }


def certificates_hold(p: LpProblem, s: LpSolution):
    v = certificate_violations(p, s)
    return (
        v["primal"] <= TOL.lp_feasibility
        and v["dual_sign"] <= TOL.lp_dual_sign
        and v["duality_gap"] <= TOL.lp_duality_gap
        and v["slackness"] <= TOL.lp_duality_gap
        and v["stationarity"] <= TOL.lp_duality_gap * (1.0 + float(np.max(np.abs(p.objective))))
    )
