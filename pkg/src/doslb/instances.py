"""Problem instances of the safe linear bandit and their standard constructors."""

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import yaml

from . import lp
from .errors import InstanceError, InvalidEps, OutOfRange, UnboundedDomain
from .numeric import as_vec


class Visibility(enum.Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class Constraint:
    vector: np.ndarray
    level: float
    visibility: Visibility = Visibility.UNKNOWN

    @property
    def known(self):
        return self.visibility is Visibility.KNOWN


@dataclass(frozen=True, eq=False)
class PublicView:
    """What a learner may see: known rows (domain merged in), unknown levels, sizes."""

    d: int
    known_lhs: np.ndarray
    known_rhs: np.ndarray
    unknown_levels: np.ndarray
    K: int
    U: int
    n_domain: int

    @property
    def M(self):
        return self.K + self.U


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """max <theta*, x> s.t. <a^i, x> <= alpha^i for all i, x in the domain.

    Known constraints come first. ``domain`` holds extra known halfspaces that
    describe the enclosing set rather than the problem itself.
    """

    d: int
    theta_star: np.ndarray
    constraints: tuple
    domain: tuple = ()
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        d = int(self.d)
        if d < 1:
            raise InstanceError("dimension must be positive")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "theta_star", as_vec(self.theta_star, d, "theta_star"))
        cons = []
        for c in self.constraints:
            if not isinstance(c, Constraint):
                vec, level, vis = c
                c = Constraint(vec, level, Visibility(vis))
            c = Constraint(as_vec(c.vector, d, "constraint vector"), float(c.level), Visibility(c.visibility))
            cons.append(c)
        if not cons:
            raise InstanceError("an instance needs at least one constraint")
        seen_unknown = False
        for c in cons:
            if c.known and seen_unknown:
                raise InstanceError("known constraints must precede unknown ones")
            seen_unknown |= not c.known
        object.__setattr__(self, "constraints", tuple(cons))
        dom = tuple((as_vec(v, d, "domain vector"), float(b)) for v, b in self.domain)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "metadata", dict(self.metadata))
        ok, _ = lp.feasible(lp.LpProblem(np.zeros(d), ineq_lhs=self.full_lhs, ineq_rhs=self.full_rhs))
        if not ok:
            raise InstanceError("the safe set is empty")

    @property
    def K(self):
        return sum(c.known for c in self.constraints)

    @property
    def U(self):
        return len(self.constraints) - self.K

    @property
    def M(self):
        return len(self.constraints)

    @cached_property
    def A(self):
        return np.array([c.vector for c in self.constraints])

    @cached_property
    def alpha(self):
        return np.array([c.level for c in self.constraints])

    @cached_property
    def domain_lhs(self):
        return np.array([v for v, _ in self.domain]).reshape(len(self.domain), self.d)

    @cached_property
    def domain_rhs(self):
        return np.array([b for _, b in self.domain])

    @cached_property
    def known_lhs(self):
        """Known constraints followed by the domain halfspaces."""
        return np.vstack([self.A[: self.K], self.domain_lhs])

    @cached_property
    def known_rhs(self):
        return np.concatenate([self.alpha[: self.K], self.domain_rhs])

    @cached_property
    def full_lhs(self):
        return np.vstack([self.A, self.domain_lhs])

    @cached_property
    def full_rhs(self):
        return np.concatenate([self.alpha, self.domain_rhs])

    def public_view(self):
        return PublicView(
            d=self.d,
            known_lhs=self.known_lhs,
            known_rhs=self.known_rhs,
            unknown_levels=self.alpha[self.K:],
            K=self.K,
            U=self.U,
            n_domain=len(self.domain),
        )

    @cached_property
    def _optimum(self):
        sol = lp.solve(lp.LpProblem(self.theta_star, ineq_lhs=self.full_lhs, ineq_rhs=self.full_rhs))
        if sol.status is lp.Status.UNBOUNDED:
            raise UnboundedDomain("the instance LP is unbounded")
        if not sol.optimal:
            raise InstanceError("the instance LP is infeasible")
        return sol.x, sol.value

    @property
    def x_star(self):
        return self._optimum[0]

    @property
    def opt_value(self):
        return self._optimum[1]

    def with_level(self, index, level):
        """Copy with constraint ``index`` (0-based) moved to a new level."""
        cons = list(self.constraints)
        c = cons[index]
        cons[index] = Constraint(c.vector, float(level), c.visibility)
        meta = dict(self.metadata)
        meta.setdefault("modified_levels", {})
        meta["modified_levels"] = {**meta["modified_levels"], int(index): float(level)}
        return ProblemInstance(self.d, self.theta_star, tuple(cons), self.domain, self.label, meta)

    def optimum_is_unique(self, scale=1e-7, tol=1e-5):
        """Perturb the objective along 2d sign patterns and check x* does not move."""
        xs = self.x_star
        for j in range(self.d):
            for s in (1.0, -1.0):
                u = np.zeros(self.d)
                u[j] = s
                sol = lp.solve(lp.LpProblem(self.theta_star + scale * u, ineq_lhs=self.full_lhs, ineq_rhs=self.full_rhs))
                if not sol.optimal or np.max(np.abs(sol.x - xs)) > tol:
                    return False
        return True


def same_instance(p, q):
    """Bitwise equality of two instances."""
    if p.d != q.d or p.label != q.label or p.M != q.M or len(p.domain) != len(q.domain):
        return False
    if not np.array_equal(p.theta_star, q.theta_star):
        return False
    for a, b in zip(p.constraints, q.constraints):
        if a.visibility is not b.visibility or a.level != b.level or not np.array_equal(a.vector, b.vector):
            return False
    for (va, ba), (vb, bb) in zip(p.domain, q.domain):
        if ba != bb or not np.array_equal(va, vb):
            return False
    return p.metadata == q.metadata


# -- constructors ------------------------------------------------------------

def running_example():
    """The two-dimensional example with three known and one unknown constraint."""
    r2 = math.sqrt(2.0)
    known = Visibility.KNOWN
    cons = (
        Constraint(np.array([0.0, -1.0]), 0.0, known),
        Constraint(np.array([-1.0, 1.0]) / r2, 0.0, known),
        Constraint(np.array([1.0, 1.0]) / r2, 2.0 * r2, known),
        Constraint(np.array([0.0, 0.5]), 0.55, Visibility.UNKNOWN),
    )
    box = tuple((s * np.eye(2)[j], 8.0) for j in range(2) for s in (1.0, -1.0))
    meta = {"domain": "enclosing box [-8, 8]^2; slack at every constraint intersection"}
    return ProblemInstance(2, np.array([0.1, 1.0]), cons, box, "example1", meta)


def hard_example(level=0.1):
    """The running example with the unknown constraint tightened."""
    p = running_example().with_level(3, level)
    return ProblemInstance(p.d, p.theta_star, p.constraints, p.domain, "example1_hard", p.metadata)


def lower_bound_instance(d, eps, signs, level=None):
    """Coordinate-wise hard instance with unknown coefficients (1 +/- eps)/2.

    ``level`` defaults to 1/4 when d = 1 and 1/2 otherwise.
    """
    d = int(d)
    if not 0.0 < eps <= 1.0 / 9.0:
        raise InvalidEps(f"eps must lie in (0, 1/9], got {eps}")
    signs = np.atleast_1d(np.asarray(signs, dtype=np.float64))
    if signs.shape != (d,) or not np.all(np.abs(signs) == 1.0):
        raise InstanceError("signs must be a vector of +1/-1 of length d")
    if level is None:
        level = 0.25 if d == 1 else 0.5
    known = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        known.append(Constraint(e, 1.0, Visibility.KNOWN))
        known.append(Constraint(-e, 1.0, Visibility.KNOWN))
    unknown = []
    for i in range(d):
        a = np.zeros(d)
        a[i] = (1.0 + signs[i] * eps) / 2.0
        unknown.append(Constraint(a, float(level), Visibility.UNKNOWN))
    meta = {"eps": float(eps), "signs": [int(s) for s in signs], "level": float(level)}
    return ProblemInstance(d, np.ones(d), tuple(known + unknown), (), "lower_bound", meta)


def simplex_mab_instance(mu, nu, alpha):
    """Multi-armed bandit embedded on the probability simplex."""
    mu = as_vec(mu, name="mu")
    d = mu.shape[0]
    nu = as_vec(nu, d, "nu")
    for name, v in (("mu", mu), ("nu", nu)):
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise OutOfRange(f"entries of {name} must lie in [0, 1]")
    known = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = -1.0
        known.append(Constraint(e, 0.0, Visibility.KNOWN))
    known.append(Constraint(np.ones(d), 1.0, Visibility.KNOWN))
    known.append(Constraint(-np.ones(d), -1.0, Visibility.KNOWN))
    cons = tuple(known) + (Constraint(nu, float(alpha), Visibility.UNKNOWN),)
    return ProblemInstance(d, mu, cons, (), "simplex_mab", {"alpha": float(alpha)})


def mab_example():
    return simplex_mab_instance([0.5, math.sqrt(3.0) / 4.0, 0.75], [0.0, 0.0, 1.0], 0.5)


# -- assumptions ---------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    L: float
    S: float
    satisfies_a1: bool
    satisfies_a2: bool
    suggested_lambda: float
    unique_optimum: bool
    n_vertices: int
    warnings: tuple = ()


def known_vertices(p):
    """Vertices of the known polytope, one LP per d-subset of its rows."""
    A, b = p.known_lhs, p.known_rhs
    n = A.shape[0]
    for j in range(p.d):
        for s in (1.0, -1.0):
            sol = lp.solve(lp.LpProblem(s * np.eye(p.d)[j], ineq_lhs=A, ineq_rhs=b))
            if sol.status is lp.Status.UNBOUNDED:
                raise UnboundedDomain(f"known domain is unbounded along {'+' if s > 0 else '-'}e_{j + 1}")
            if sol.status is lp.Status.INFEASIBLE:
                raise InstanceError("known domain is empty")
    verts = []
    for idx in itertools.combinations(range(n), p.d):
        idx = list(idx)
        sub = A[idx]
        if np.linalg.svd(sub, compute_uv=False)[-1] <= 1e-12:
            continue
        rest = [i for i in range(n) if i not in idx]
        ok, x = lp.feasible(lp.LpProblem(np.zeros(p.d), sub, b[idx], A[rest], b[rest]))
        if ok and not any(np.max(np.abs(x - v)) <= 1e-9 for v in verts):
            verts.append(x)
    return verts


def validate(p):
    verts = known_vertices(p)
    L = max(float(np.linalg.norm(v)) for v in verts)
    S = max([float(np.linalg.norm(p.theta_star))] + [float(np.linalg.norm(c.vector)) for c in p.constraints])
    warnings = []
    a1 = L <= 1.0
    a2 = S <= 1.0
    if not a1:
        warnings.append(f"actions reach norm L = {L:.6g} > 1; use lambda >= L^2 and the L-scaled radius")
    if not a2:
        warnings.append(f"parameter norm S = {S:.6g} > 1; the confidence radius is scaled by S")
    unique = p.optimum_is_unique()
    if not unique:
        warnings.append("optimum is not unique under objective perturbation (degenerate instance)")
    return AssumptionReport(L, S, a1, a2, max(1.0, L * L), unique, len(verts), tuple(warnings))


# -- serialization --------------------------------------------------------------

def _floats(v):
    return [float(x) for x in v]


def to_dict(p):
    return {
        "label": p.label,
        "d": p.d,
        "theta_star": _floats(p.theta_star),
        "constraints": [
            {"vector": _floats(c.vector), "level": float(c.level), "visibility": c.visibility.value}
            for c in p.constraints
        ],
        "domain": [{"vector": _floats(v), "level": float(b)} for v, b in p.domain],
        "metadata": p.metadata,
    }


def from_dict(data):
    try:
        d = int(data["d"])
        cons = tuple(
            Constraint(np.array(c["vector"], dtype=float), float(c["level"]), Visibility(c.get("visibility", "unknown")))
            for c in data["constraints"]
        )
        dom = tuple((np.array(h["vector"], dtype=float), float(h["level"])) for h in data.get("domain") or [])
        return ProblemInstance(d, np.array(data["theta_star"], dtype=float), cons, dom,
                               str(data.get("label", "")), dict(data.get("metadata") or {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance document: {exc}") from exc


def dumps(p):
    return yaml.safe_dump(to_dict(p), sort_keys=False)


def loads(text):
    return from_dict(yaml.safe_load(text))


def save(p, path):
    with open(path, "w") as fh:
        fh.write(dumps(p))


def load(path):
    with open(path) as fh:
        return loads(fh.read())


# -- named instances -------------------------------------------------------------

def _parse_params(spec):
    name, *parts = spec.split(":")
    params = {}
    for part in parts:
        if "=" not in part:
            raise InstanceError(f"expected key=value in instance spec, got {part!r}")
        k, v = part.split("=", 1)
        params[k.strip()] = v.strip()
    return name, params


def builtin(spec):
    """Build a named instance.

    Names: ``example1``, ``example1_hard``, ``mab_example`` and
    ``lower_bound:eps=0.1:signs=+1,-1[:level=0.5]``.
    """
    name, params = _parse_params(spec)
    if name == "example1":
        return running_example()
    if name == "example1_hard":
        return hard_example(float(params.get("level", 0.1)))
    if name == "mab_example":
        return mab_example()
    if name == "lower_bound":
        signs = [float(s) for s in params.get("signs", "+1").split(",")]
        level = params.get("level")
        return lower_bound_instance(len(signs), float(params.get("eps", 0.1)), signs,
                                    None if level is None else float(level))
    raise InstanceError(f"unknown builtin instance {name!r}")


BUILTIN_NAMES = ("example1", "example1_hard", "mab_example", "lower_bound")


def resolve(source):
    """A builtin spec or a path to an instance file."""
    name = source.split(":", 1)[0]
    if name in BUILTIN_NAMES:
        return builtin(source)
    return load(source)
