import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doslb import instances, lp
from doslb.errors import DimensionMismatch


def vertex_max(c, A_eq, b_eq, A_in, b_in, tol=1e-9):
    """Brute force: best objective over basic feasible solutions."""
    n = c.size
    best = -np.inf
    k = n - A_eq.shape[0]
    for idx in itertools.combinations(range(A_in.shape[0]), k):
        M = np.vstack([A_eq, A_in[list(idx)]])
        r = np.concatenate([b_eq, b_in[list(idx)]])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, r)
        if np.all(A_in @ x <= b_in + tol) and np.allclose(A_eq @ x, b_eq, atol=tol):
            best = max(best, float(c @ x))
    return best


def random_bounded_lp(rng):
    """Bounded polytope: x_i >= -1, sum x <= s, mapped through a random invertible map."""
    n = int(rng.integers(1, 6))
    extra = int(rng.integers(0, 8 - n))
    base = np.vstack([-np.eye(n), np.ones((1, n))])
    rhs = np.concatenate([np.ones(n), [rng.uniform(0.5, 3.0)]])
    A = np.vstack([base, rng.normal(size=(extra, n))])
    b = np.concatenate([rhs, rng.uniform(0.2, 2.0, size=extra)])
    T = rng.normal(size=(n, n)) + 2 * np.eye(n)
    A = A @ T
    A_eq = np.zeros((0, n))
    b_eq = np.zeros(0)
    if n > 1 and rng.random() < 0.3:
        # an equality through an interior point of the polytope
        x0 = np.linalg.solve(T, np.full(n, -0.5))
        a = rng.normal(size=n)
        A_eq, b_eq = a.reshape(1, n), np.array([a @ x0])
    return rng.normal(size=n), A_eq, b_eq, A, b


def test_box_example():
    p = lp.LpProblem(np.array([1.0, 1.0]), ineq_lhs=np.array([[1, 0], [0, 1], [-1, 0], [0, -1.0]]),
                     ineq_rhs=np.array([1.0, 1.0, 0.0, 0.0]))
    s = lp.solve(p)
    assert s.status is lp.Status.OPTIMAL
    np.testing.assert_allclose(s.x, [1.0, 1.0], atol=1e-12)
    assert abs(s.value - 2.0) <= 1e-12
    np.testing.assert_allclose(s.dual_ineq, [1.0, 1.0, 0.0, 0.0], atol=1e-12)


def test_infeasible_example():
    p = lp.LpProblem(np.array([1.0]), np.array([[1.0]]), np.array([1.0]), np.array([[-1.0]]), np.array([-2.0]))
    assert lp.solve(p).status is lp.Status.INFEASIBLE


def test_unbounded_example():
    p = lp.LpProblem(np.array([1.0, 0.0]), ineq_lhs=np.array([[0.0, 1.0]]), ineq_rhs=np.array([1.0]))
    assert lp.solve(p).status is lp.Status.UNBOUNDED


def test_feasible_examples():
    ok, w = lp.feasible(lp.LpProblem(np.zeros(1), np.array([[1.0]]), np.array([0.0]), np.array([[1.0]]),
                                     np.array([1.0])))
    assert ok and abs(w[0]) <= 1e-12
    ok, w = lp.feasible(lp.LpProblem(np.zeros(1), np.array([[1.0]]), np.array([0.0]), np.array([[-1.0]]),
                                     np.array([-1.0])))
    assert not ok and w is None


def test_example1_bis_14_infeasible():
    inst = instances.running_example()
    idx = [0, 3]
    p = lp.LpProblem(np.zeros(2), inst.A[idx], inst.alpha[idx], inst.known_lhs, inst.known_rhs)
    assert lp.feasible(p) == (False, None)


def test_beale_cycling_example_terminates():
    # classic degenerate LP that cycles under the largest-coefficient rule
    c = -np.array([-0.75, 20.0, -0.5, 6.0])
    A = np.array([[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]])
    A = np.vstack([A, -np.eye(4)])
    b = np.concatenate([[0.0, 0.0, 1.0], np.zeros(4)])
    s = lp.solve(lp.LpProblem(c, ineq_lhs=A, ineq_rhs=b))
    assert s.optimal and abs(s.value - 1.25) <= 1e-12


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        lp.LpProblem(np.ones(2), ineq_lhs=np.ones((1, 3)), ineq_rhs=np.ones(1))
    with pytest.raises(DimensionMismatch):
        lp.LpProblem(np.ones(2), ineq_lhs=np.ones((2, 2)), ineq_rhs=np.ones(3))
    with pytest.raises(ValueError):
        lp.LpProblem(np.array([np.nan, 1.0]))


def test_random_lps_match_vertex_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        c, Ae, be, Ai, bi = random_bounded_lp(rng)
        p = lp.LpProblem(c, Ae, be, Ai, bi)
        s = lp.solve(p)
        assert s.optimal
        assert abs(s.value - vertex_max(c, Ae, be, Ai, bi)) <= 1e-7
        assert lp.certificates_hold(p, s)


def test_deterministic_bytes(rng):
    c, Ae, be, Ai, bi = random_bounded_lp(rng)
    a = lp.solve(lp.LpProblem(c, Ae, be, Ai, bi))
    b = lp.solve(lp.LpProblem(c.copy(), Ae.copy(), be.copy(), Ai.copy(), bi.copy()))
    for f in ("x", "dual_eq", "dual_ineq"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()
    assert a.value == b.value and a.iterations == b.iterations


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.lists(st.floats(-5, 5), min_size=5, max_size=5))
def test_shift_invariance(seed, shift):
    """Substituting x = y + s must move the optimum by exactly <c, s>."""
    c, Ae, be, Ai, bi = random_bounded_lp(np.random.default_rng(seed))
    s = np.array(shift[: c.size])
    base = lp.solve(lp.LpProblem(c, Ae, be, Ai, bi))
    moved = lp.solve(lp.LpProblem(c, Ae, be - Ae @ s, Ai, bi - Ai @ s))
    assert base.optimal and moved.optimal
    assert abs(base.value - (moved.value + c @ s)) <= 1e-7 * (1 + abs(base.value))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_certificates_property(seed):
    c, Ae, be, Ai, bi = random_bounded_lp(np.random.default_rng(seed))
    p = lp.LpProblem(c, Ae, be, Ai, bi)
    s = lp.solve(p)
    v = lp.certificate_violations(p, s)
    assert v["primal"] <= 1e-8
    assert v["dual_sign"] <= 1e-9
    assert v["duality_gap"] <= 1e-7
    assert v["slackness"] <= 1e-7


def test_maximize_wrapper():
    s = lp.maximize(np.array([1.0]), ineq=(np.array([[1.0]]), np.array([3.0])))
    assert s.optimal and s.value == 3.0
