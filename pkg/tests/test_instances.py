import math

import numpy as np
import pytest

from doslb import instances
from doslb.errors import InstanceError, InvalidEps, OutOfRange, UnboundedDomain
from doslb.instances import Constraint, ProblemInstance, Visibility


def test_running_example_data():
    p = instances.running_example()
    assert (p.d, p.K, p.U, p.M) == (2, 3, 1, 4)
    r2 = math.sqrt(2)
    np.testing.assert_allclose(p.A, [[0, -1], [-1 / r2, 1 / r2], [1 / r2, 1 / r2], [0, 0.5]], rtol=0, atol=1e-15)
    np.testing.assert_allclose(p.alpha, [0, 0, 2 * r2, 0.55], atol=1e-15)
    np.testing.assert_array_equal(p.theta_star, [0.1, 1.0])


def test_running_example_optimum():
    p = instances.running_example()
    np.testing.assert_allclose(p.x_star, [2.9, 1.1], atol=1e-9)
    assert abs(p.opt_value - (0.1 * 2.9 + 1.1)) <= 1e-12
    assert p.optimum_is_unique()


def test_running_example_validate():
    rep = instances.validate(instances.running_example())
    assert not rep.satisfies_a1
    assert abs(rep.L - 4.0) <= 1e-12
    assert rep.suggested_lambda >= rep.L ** 2 - 1e-9 and abs(rep.suggested_lambda - 16) <= 1e-9
    assert rep.n_vertices == 3
    assert rep.warnings


def test_unit_box_validate():
    # box inscribed in the unit disc, unit-norm parameters
    h = 1 / math.sqrt(2)
    box = tuple(Constraint(s * np.eye(2)[j], h, Visibility.KNOWN) for j in range(2) for s in (1, -1))
    p = ProblemInstance(2, np.array([0.6, 0.8]), box + (Constraint(np.array([0.0, 1.0]), 0.5),))
    rep = instances.validate(p)
    assert rep.satisfies_a1 and rep.satisfies_a2
    assert rep.suggested_lambda == 1.0


def test_unbounded_domain_rejected():
    p = ProblemInstance(1, np.array([-1.0]), (Constraint(np.array([1.0]), 1.0, Visibility.KNOWN),))
    with pytest.raises(UnboundedDomain):
        instances.validate(p)


def test_lower_bound_d1():
    p = instances.lower_bound_instance(1, 0.1, [1])
    assert p.K == 2 and p.U == 1
    np.testing.assert_allclose(p.A[2], [0.55])
    assert p.alpha[2] == 0.25
    rep = instances.validate(p)
    assert rep.L == 1.0 and rep.S == 1.0
    np.testing.assert_allclose(p.x_star, [1 / (2 * 1.1)], atol=1e-12)


def test_lower_bound_basic_point_violation():
    for eps in (0.02, 0.05, 0.1):
        p = instances.lower_bound_instance(1, eps, [1])
        viol = p.A[2] @ np.array([1.0]) - p.alpha[2]
        assert viol >= (1 - 2 * eps) / 4 - 1e-12


def test_lower_bound_levels():
    p = instances.lower_bound_instance(2, 0.05, [1, -1])
    np.testing.assert_allclose(p.alpha[4:], [0.5, 0.5])
    q = instances.lower_bound_instance(2, 0.05, [1, -1], level=0.25)
    np.testing.assert_allclose(q.alpha[4:], [0.25, 0.25])
    np.testing.assert_allclose(p.A[4:], [[0.525, 0.0], [0.0, 0.475]])


@pytest.mark.parametrize("signs", [[1], [-1], [1, -1], [-1, -1, 1]])
def test_lower_bound_contains_origin(signs):
    p = instances.lower_bound_instance(len(signs), 0.1, signs)
    assert np.all(p.full_lhs @ np.zeros(len(signs)) <= p.full_rhs)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.12])
def test_lower_bound_bad_eps(eps):
    with pytest.raises(InvalidEps):
        instances.lower_bound_instance(1, eps, [1])


def test_mab_example():
    p = instances.mab_example()
    assert p.K == 5 and p.U == 1
    for i in range(3):
        e = np.eye(3)[i]
        assert np.all(p.known_lhs @ e <= p.known_rhs + 1e-12)
    # the LP optimum mixes arms 1 and 3; the best single arm is e_1
    np.testing.assert_allclose(p.x_star, [0.5, 0.0, 0.5], atol=1e-12)


def test_mab_zero_means():
    p = instances.simplex_mab_instance([0, 0, 0], [0, 0, 0], 0.5)
    assert p.opt_value == 0.0


def test_mab_elevated_arm():
    p = instances.simplex_mab_instance([0.3, 0.3, 0.7, 0.3], [0, 0, 0, 0], 0.5)
    np.testing.assert_allclose(p.x_star, [0, 0, 1, 0], atol=1e-12)


def test_mab_out_of_range():
    with pytest.raises(OutOfRange):
        instances.simplex_mab_instance([1.2, 0.0], [0, 0], 0.5)
    with pytest.raises(OutOfRange):
        instances.simplex_mab_instance([0.5, 0.0], [0, -0.1], 0.5)


def test_known_after_unknown_rejected():
    with pytest.raises(InstanceError):
        ProblemInstance(1, np.ones(1), (Constraint(np.ones(1), 1.0, Visibility.UNKNOWN),
                                        Constraint(-np.ones(1), 1.0, Visibility.KNOWN)))


def test_empty_safe_set_rejected():
    with pytest.raises(InstanceError):
        ProblemInstance(1, np.ones(1), (Constraint(np.ones(1), -1.0, Visibility.KNOWN),
                                        Constraint(-np.ones(1), -1.0, Visibility.KNOWN)))


def test_public_view_hides_latent():
    v = instances.running_example().public_view()
    assert not hasattr(v, "theta_star")
    assert v.known_lhs.shape == (7, 2) and v.U == 1 and v.n_domain == 4
    np.testing.assert_array_equal(v.unknown_levels, [0.55])


@pytest.mark.parametrize("name", ["example1", "example1_hard", "mab_example", "lower_bound:eps=0.05:signs=+1,-1"])
def test_round_trip_bit_exact(name, tmp_path):
    p = instances.builtin(name)
    q = instances.loads(instances.dumps(p))
    assert instances.same_instance(p, q)
    path = tmp_path / "inst.yaml"
    instances.save(p, path)
    assert instances.same_instance(p, instances.resolve(str(path)))


def test_round_trip_decimal_input():
    text = """
d: 2
theta_star: [0.1, 1.0]
constraints:
  - {vector: [0.0, -1.0], level: 0.0, visibility: known}
  - {vector: [0.0, 0.5], level: 0.55, visibility: unknown}
domain:
  - {vector: [1.0, 0.0], level: 8.0}
  - {vector: [-1.0, 0.0], level: 8.0}
  - {vector: [0.0, 1.0], level: 8.0}
label: custom
"""
    p = instances.loads(text)
    assert instances.same_instance(p, instances.loads(instances.dumps(p)))
    assert p.alpha[1] == 0.55


def test_builtin_specs():
    assert instances.builtin("example1_hard").alpha[3] == 0.1
    assert instances.builtin("example1_hard:level=0.2").alpha[3] == 0.2
    p = instances.builtin("lower_bound:eps=0.1:signs=-1:level=0.5")
    assert p.alpha[2] == 0.5 and abs(p.A[2, 0] - 0.45) <= 1e-15
    with pytest.raises(InstanceError):
        instances.builtin("nope")


def test_malformed_document():
    with pytest.raises(InstanceError):
        instances.loads("d: 2\ntheta_star: [1, 2]\n")


def test_with_level_records_metadata():
    p = instances.running_example().with_level(3, 0.1)
    assert p.alpha[3] == 0.1
    assert p.metadata["modified_levels"] == {3: 0.1}
