import numpy as np
import pytest

from doslb import harness, instances, lp, policies
from doslb.environment import NoiseModel, RngState, step
from doslb.errors import NoSafeFallback, PermissibleEmpty
from doslb.estimation import ConfidenceRegion, Geometry, GramState, RadiusParams, region
from doslb.policies import FALLBACK_FLAG, LTS_FALLBACK_FLAG, FallbackMode, PolicyConfig, PolicyKind

EX1 = instances.running_example()
VIEW = EX1.public_view()
P = RadiusParams(0.01, 1, 1.005)
K_VERTICES = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 2.0]])


def cfg(kind="doslb", geometry=Geometry.BOX_L1, **kw):
    return PolicyConfig(PolicyKind(kind), P, geometry, **kw)


def truth_regions(monkeypatch, inst):
    """Replace every confidence region by the singleton at the true parameter."""

    def fake(g, target, geometry, p):
        return ConfidenceRegion.known(inst.theta_star if target == "reward" else inst.A[inst.K + int(target)])

    monkeypatch.setattr(policies, "region", fake)


def noisy_states(n=40, seed=0, lam=16.0):
    rng = np.random.default_rng(seed)
    g = GramState.fresh(2, lam, EX1.K, EX1.U)
    env = RngState(seed)
    out = []
    for _ in range(n):
        out.append(g)
        x = rng.uniform([0, 0], [4, 2])
        fb, env = step(EX1, x, NoiseModel.gaussian(0.3), env)
        g = g.update(x, fb)
    return out


def test_fresh_state_picks_known_vertex():
    g = GramState.fresh(2, 1.0, EX1.K, EX1.U)
    d = policies.doslb_select(VIEW, g, cfg())
    assert np.min(np.max(np.abs(K_VERTICES - d.x), axis=1)) <= 1e-9
    assert not d.fallback
    assert d.n_lps == 4 * 4


def test_truth_regions_return_optimum(monkeypatch):
    truth_regions(monkeypatch, EX1)
    d = policies.doslb_select(VIEW, GramState.fresh(2, 1.0, EX1.K, EX1.U), cfg())
    np.testing.assert_allclose(d.x, [2.9, 1.1], atol=1e-9)
    assert abs(d.optimistic_value - 1.39) <= 1e-6


def test_noiseless_convergence():
    # zero noise lets the sub-Gaussian scale go to ~0, so beta is the small
    # regularization term and the regions contract around the truth
    c = PolicyConfig(PolicyKind.DOSLB, RadiusParams(0.01, 1, 1.005, 1e-9), Geometry.BOX_L1)
    r = harness.simulate(EX1, c, 1000, 0, NoiseModel.none(), 1e-4)
    np.testing.assert_allclose(r.trajectory.x[-1], EX1.x_star, atol=1e-3)


@pytest.mark.parametrize("geometry", [Geometry.BOX_L1, Geometry.BOX_LINF, Geometry.POLYGON])
def test_doslb_decision_properties(geometry):
    c = cfg(geometry=geometry)
    for g in noisy_states():
        d = policies.doslb_select(VIEW, g, c)
        assert np.all(VIEW.known_lhs @ d.x <= VIEW.known_rhs + 1e-8)
        reg = region(g, 0, geometry, P)
        if not d.fallback:
            # permissible-set soundness
            assert reg.support_min(d.x) <= VIEW.unknown_levels[0] + 1e-8
            # at least d tight rows in the winning LP
            assert d.tight_count() >= 2
            # re-solving the winning vertex choice reproduces the decision
            s = policies.solve_vertex_choice(VIEW, g, c, d.reward_vertex, d.constraint_vertices)
            assert np.max(np.abs(s.x - d.x)) <= 1e-9 and abs(s.value - d.optimistic_value) <= 1e-9
            # optimism dominance when x* is permissible
            if reg.support_min(EX1.x_star) <= VIEW.unknown_levels[0]:
                best = np.max(region(g, "reward", geometry, P).vertices() @ EX1.x_star)
                assert d.optimistic_value >= best - 1e-9


def test_doslb_is_argmax_over_enumerated_lps():
    c = cfg()
    for g in noisy_states(10, seed=4):
        d = policies.doslb_select(VIEW, g, c)
        R = region(g, "reward", c.geometry, P).vertices()
        W = region(g, 0, c.geometry, P).vertices()
        best = -np.inf
        for r in range(R.shape[0]):
            for k in range(W.shape[0]):
                s = policies.solve_vertex_choice(VIEW, g, c, r, (k,))
                if s.optimal:
                    best = max(best, s.value)
        assert abs(best - d.optimistic_value) <= 1e-9


def test_empty_permissible_set_fallback(monkeypatch):
    # impossible unknown constraint: every vertex demands <a, x> <= -100 on K
    view = instances.PublicView(2, VIEW.known_lhs, VIEW.known_rhs, np.array([-100.0]), 3, 1, 4)
    g = GramState.fresh(2, 16.0, 3, 1)
    d = policies.doslb_select(view, g, cfg())
    assert FALLBACK_FLAG in d.flags and d.fallback
    assert np.min(np.max(np.abs(K_VERTICES - d.x), axis=1)) <= 1e-9
    with pytest.raises(PermissibleEmpty):
        policies.doslb_select(view, g, cfg(fallback_mode=FallbackMode.ERROR))


def test_enumeration_budget():
    from doslb.errors import EnumerationBudgetExceeded

    with pytest.raises(EnumerationBudgetExceeded):
        policies.doslb_select(VIEW, GramState.fresh(2, 1.0, 3, 1), cfg(max_lps=10))


def test_safelts_truth_regions(monkeypatch):
    truth_regions(monkeypatch, EX1)
    g = noisy_states(5)[-1]
    d, _ = policies.safelts_select(VIEW, g, cfg("safelts"), RngState(3))
    s = lp.solve(lp.LpProblem(d.theta_tilde, ineq_lhs=EX1.full_lhs, ineq_rhs=EX1.full_rhs))
    assert abs(d.theta_tilde @ d.x - s.value) <= 1e-9


def test_safelts_fresh_state():
    g = GramState.fresh(2, 16.0, EX1.K, EX1.U)
    ok, _ = lp.feasible(lp.LpProblem(np.zeros(2), ineq_lhs=VIEW.known_lhs, ineq_rhs=VIEW.known_rhs))
    assert ok and np.all(VIEW.known_rhs >= 0)
    d, rng = policies.safelts_select(VIEW, g, cfg("safelts"), RngState(0))
    assert rng.counter > 0
    assert np.all(VIEW.known_lhs @ d.x <= VIEW.known_rhs + 1e-8)


@pytest.mark.parametrize("geometry", [Geometry.BOX_L1, Geometry.BOX_LINF])
def test_safelts_pessimism_soundness(geometry):
    c = cfg("safelts", geometry)
    rng = RngState(1)
    for g in noisy_states(seed=2):
        d, rng = policies.safelts_select(VIEW, g, c, rng)
        if LTS_FALLBACK_FLAG in d.flags:
            continue
        reg = region(g, 0, geometry, P)
        assert reg.support_max(d.x) <= VIEW.unknown_levels[0] + 1e-8
        if reg.contains(EX1.A[3]):
            assert EX1.A[3] @ d.x <= EX1.alpha[3] + 1e-8


def test_safelts_fallback_and_error():
    view = instances.PublicView(2, VIEW.known_lhs, VIEW.known_rhs, np.array([-100.0]), 3, 1, 4)
    g = GramState.fresh(2, 16.0, 3, 1)
    d, _ = policies.safelts_select(view, g, cfg("safelts", lts_safe_fallback=np.array([0.5, 0.1])), RngState(0))
    assert LTS_FALLBACK_FLAG in d.flags
    np.testing.assert_array_equal(d.x, [0.5, 0.1])
    d, _ = policies.safelts_select(view, g, cfg("safelts"), RngState(0))
    np.testing.assert_array_equal(d.x, [0.0, 0.0])
    shifted = instances.PublicView(2, VIEW.known_lhs, VIEW.known_rhs - 1.0, np.array([-100.0]), 3, 1, 4)
    with pytest.raises(NoSafeFallback):
        policies.safelts_select(shifted, g, cfg("safelts"), RngState(0))


def test_safelts_beta_power():
    g = noisy_states(5)[-1]
    a, _ = policies.safelts_select(VIEW, g, cfg("safelts", lts_beta_power=0.5), RngState(9))
    b, _ = policies.safelts_select(VIEW, g, cfg("safelts", lts_beta_power=1.0), RngState(9))
    assert not np.allclose(a.theta_tilde, b.theta_tilde)


def test_oracle_examples():
    d = policies.oracle_select(EX1)
    np.testing.assert_allclose(d.x, [2.9, 1.1], atol=1e-9)
    assert abs(d.optimistic_value - 1.39) <= 1e-12
    for eps in (0.02, 0.1):
        lb = instances.lower_bound_instance(1, eps, [1])
        np.testing.assert_allclose(policies.oracle_select(lb).x, [1 / (2 * (1 + eps))], atol=1e-12)


def test_select_dispatch():
    g = GramState.fresh(2, 16.0, 3, 1)
    d, _ = policies.select(cfg("oracle"), VIEW, g, RngState(0), EX1)
    np.testing.assert_allclose(d.x, EX1.x_star)
    with pytest.raises(ValueError):
        policies.select(cfg("oracle"), VIEW, g, RngState(0))


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(geometry=Geometry.ELLIPSOID)
    with pytest.raises(ValueError):
        cfg("safelts", lts_inflation=0.0)


def test_doslb_ignores_latent_parameters():
    """Two instances with the same public view yield the same decisions."""
    cons = EX1.constraints[:3] + (instances.Constraint(np.array([0.3, -0.2]), 0.55),)
    other = instances.ProblemInstance(2, np.array([-1.0, 0.2]), cons, EX1.domain)
    g = noisy_states(20, seed=6)[-1]
    a = policies.doslb_select(other.public_view(), g, cfg())
    b = policies.doslb_select(VIEW, g, cfg())
    assert a.x.tobytes() == b.x.tobytes()
