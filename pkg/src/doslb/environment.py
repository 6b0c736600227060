"""Noisy reward and safety feedback with a counter-based random stream."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BernoulliMeanOutOfRange, NotOnSimplex
from .numeric import as_vec

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    """SplitMix64 finalizer on a uint64 array."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def _mix_int(v):
    return int(_mix(np.array([v & _MASK], dtype=np.uint64))[0])


@dataclass(frozen=True)
class RngState:
    """Position (seed, counter) in a deterministic stream of 64-bit words.

    Word k of the stream depends only on (seed, k), so a state can be stored,
    copied and resumed anywhere.
    """

    seed: int
    counter: int = 0

    def words(self, n):
        base = np.uint64(_mix_int(self.seed))
        ks = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = base + ks * _GOLDEN
        return _mix(z), RngState(self.seed, self.counter + n)

    def uniforms(self, n):
        """n doubles in the open interval (0, 1)."""
        w, nxt = self.words(n)
        return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53, nxt

    def normals(self, n):
        """n standard normals via Box-Muller."""
        pairs = (n + 1) // 2
        u, nxt = self.uniforms(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        ang = 2.0 * math.pi * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        return z[:n], nxt

    def derive(self, tag):
        """An independent stream keyed by (seed, tag)."""
        return RngState(_mix_int(self.seed ^ _mix_int(int(tag) + 0x5851F42D4C957F2D)), 0)


class NoiseKind(enum.Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind = NoiseKind.GAUSSIAN
    sigma: float = 0.0
    independent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.sigma < 0.0 or not math.isfinite(self.sigma):
            raise ValueError("sigma must be a finite nonnegative number")

    @classmethod
    def none(cls):
        return cls(NoiseKind.NONE)

    @classmethod
    def gaussian(cls, sigma, independent=True):
        return cls(NoiseKind.GAUSSIAN, float(sigma), independent)

    @classmethod
    def bernoulli(cls, independent=True):
        return cls(NoiseKind.BERNOULLI, 0.0, independent)


@dataclass(frozen=True, eq=False)
class Feedback:
    reward: float
    safety: np.ndarray


def step(instance, x, noise, rng):
    """Play x once. Returns (Feedback, advanced RngState)."""
    x = as_vec(x, instance.d, "action")
    means = np.concatenate([[instance.theta_star @ x], instance.A @ x])
    n = means.shape[0]
    k = n if noise.independent else 1
    if noise.kind is NoiseKind.NONE:
        out = means
    elif noise.kind is NoiseKind.GAUSSIAN:
        g, rng = rng.normals(k)
        if not noise.independent:
            g = np.full(n, g[0])
        out = means + noise.sigma * g
    else:
        # known-constraint channels are redundant and their means need not lie
        # in [0, 1] (e.g. -x_i <= 0), so they are emitted exactly
        live = np.r_[0, 1 + np.arange(instance.K, instance.M)]
        m = means[live]
        if np.any(m < -1e-12) or np.any(m > 1.0 + 1e-12):
            raise BernoulliMeanOutOfRange(f"channel means {m} leave [0, 1]")
        u, rng = rng.uniforms(live.shape[0] if noise.independent else 1)
        if not noise.independent:
            u = np.full(live.shape[0], u[0])
        out = means.copy()
        out[live] = (u < np.clip(m, 0.0, 1.0)).astype(np.float64)
    return Feedback(float(out[0]), out[1:].copy()), rng


def sample_arm(x, rng):
    """Draw an arm index k with probability x_k. Returns (k, advanced RngState)."""
    x = as_vec(x, name="x")
    if np.any(x < -1e-12) or abs(float(np.sum(x)) - 1.0) > 1e-9:
        raise NotOnSimplex("x is not a probability vector")
    p = np.clip(x, 0.0, None)
    p = p / p.sum()
    u, rng = rng.uniforms(1)
    cdf = np.cumsum(p)
    k = int(np.searchsorted(cdf, u[0], side="right"))
    # guard against cdf[-1] rounding just below 1
    k = min(k, len(p) - 1)
    while p[k] == 0.0:
        k -= 1
    return k, rng

