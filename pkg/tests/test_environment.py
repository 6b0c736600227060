import numpy as np
import pytest

from doslb import instances
from doslb.environment import Feedback, NoiseKind, NoiseModel, RngState, sample_arm, step
from doslb.errors import BernoulliMeanOutOfRange, DimensionMismatch, NotOnSimplex

EX1 = instances.running_example()


def test_noiseless_at_optimum():
    fb, _ = step(EX1, EX1.x_star, NoiseModel.none(), RngState(0))
    assert abs(fb.reward - 1.39) <= 1e-15
    assert abs(fb.safety[3] - 0.55) <= 1e-15
    assert fb.safety.shape == (4,)


def test_zero_sigma_equals_none():
    x = np.array([1.3, -0.2])
    a, _ = step(EX1, x, NoiseModel.gaussian(0.0), RngState(5))
    b, _ = step(EX1, x, NoiseModel.none(), RngState(5))
    assert a.reward == b.reward and np.array_equal(a.safety, b.safety)


def test_rng_stream_is_positional():
    s = RngState(42)
    a, s1 = s.words(5)
    b, _ = s1.words(3)
    c, _ = RngState(42).words(8)
    assert np.array_equal(np.concatenate([a, b]), c)
    assert s1 == RngState(42, 5)


def test_uniforms_open_interval():
    u, _ = RngState(1).uniforms(100000)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_derived_streams_differ():
    a, _ = RngState(3).derive(1).words(4)
    b, _ = RngState(3).words(4)
    c, _ = RngState(4).derive(1).words(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_gaussian_unbiased_and_independent():
    x = np.array([2.0, 1.0])
    noise = NoiseModel.gaussian(0.1)
    rng = RngState(11)
    n = 100000
    r = np.empty(n)
    s1 = np.empty(n)
    for i in range(n):
        fb, rng = step(EX1, x, noise, rng)
        r[i] = fb.reward
        s1[i] = fb.safety[0]
    mean = EX1.theta_star @ x
    assert abs(r.mean() - mean) <= 3 * 0.1 / np.sqrt(n)
    assert abs(np.corrcoef(r - mean, s1 - EX1.A[0] @ x)[0, 1]) < 0.02
    assert abs(r.std() - 0.1) < 0.002


def test_shared_draw_mode():
    fb, _ = step(EX1, np.zeros(2), NoiseModel.gaussian(1.0, independent=False), RngState(2))
    # all means are zero at the origin, so every channel carries the same draw
    assert np.all(fb.safety == fb.reward)


def test_determinism():
    noise = NoiseModel.gaussian(0.3)
    xs = np.random.default_rng(0).uniform(-1, 3, size=(50, 2))
    outs = []
    for _ in range(2):
        rng = RngState(99)
        stream = []
        for x in xs:
            fb, rng = step(EX1, x, noise, rng)
            stream.append(np.r_[fb.reward, fb.safety])
        outs.append(np.array(stream).tobytes())
    assert outs[0] == outs[1]


def test_bernoulli_on_simplex():
    p = instances.mab_example()
    rng = RngState(8)
    vals = []
    for _ in range(20000):
        fb, rng = step(p, np.eye(3)[1], NoiseModel.bernoulli(), rng)
        vals.append(fb.reward)
        assert fb.reward in (0.0, 1.0) and fb.safety[-1] in (0.0, 1.0)
    assert abs(np.mean(vals) - np.sqrt(3) / 4) < 0.01


def test_bernoulli_out_of_range():
    with pytest.raises(BernoulliMeanOutOfRange):
        step(EX1, np.array([2.9, 1.1]), NoiseModel.bernoulli(), RngState(0))


def test_step_dimension_check():
    with pytest.raises(DimensionMismatch):
        step(EX1, np.zeros(3), NoiseModel.none(), RngState(0))


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel.gaussian(-1.0)
    assert NoiseModel(kind="none").kind is NoiseKind.NONE


def test_sample_arm_vertex():
    rng = RngState(0)
    for _ in range(200):
        k, rng = sample_arm([0.0, 1.0, 0.0], rng)
        assert k == 1


@pytest.mark.parametrize("x", [[0.5, 0.5], [0.2, 0.3, 0.5]])
def test_sample_arm_frequencies(x):
    rng = RngState(17)
    counts = np.zeros(len(x))
    n = 100000
    for _ in range(n):
        k, rng = sample_arm(x, rng)
        counts[k] += 1
    np.testing.assert_allclose(counts / n, x, atol=0.01)


def test_sample_arm_clips_tiny_negatives():
    k, _ = sample_arm([-1e-13, 1.0 + 1e-13], RngState(0))
    assert k == 1


def test_sample_arm_rejects_off_simplex():
    with pytest.raises(NotOnSimplex):
        sample_arm([0.6, 0.6], RngState(0))
    with pytest.raises(NotOnSimplex):
        sample_arm([1.1, -0.1], RngState(0))


def test_feedback_fields():
    fb = Feedback(1.0, np.zeros(4))
    assert fb.safety.shape == (4,)
