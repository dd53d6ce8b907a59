"""Probability distributions over Z_q.

Covers the discrete Gaussian on centered representatives, the polynomial
substitution c(x) -> c(x^a) mod x^q - 1, cyclic convolution, the induced
distribution of e(gamma) and seeded inverse-CDF sampling.

Gaussian kernel: rho(x) = exp(-pi * x**2 / (2 * sigma**2)), so the
effective standard deviation of the discretized Gaussian is roughly
sigma / sqrt(pi) rather than sigma.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .ring import RingParams

SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProbDist:
    """A probability vector p_0..p_{q-1} over Z_q (read-only)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise DimensionError("probs must be a non-empty 1-D vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def q(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.q

    def __getitem__(self, j):
        return self.probs[j]

    def __eq__(self, other):
        return isinstance(other, ProbDist) and np.array_equal(self.probs, other.probs)

    @classmethod
    def normalized(cls, weights: Sequence[float]) -> ProbDist:
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0:
            raise DomainError("weights must have positive total mass")
        return cls(w / total)

    @classmethod
    def uniform(cls, q: int) -> ProbDist:
        return cls(np.full(q, 1.0 / q))

    @classmethod
    def point_mass(cls, q: int, k: int = 0) -> ProbDist:
        p = np.zeros(q)
        p[k % q] = 1.0
        return cls(p)

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.probs - 1.0 / self.q) <= tol))

    def to_json(self) -> str:
        return json.dumps([float(x) for x in self.probs])

    @classmethod
    def from_json(cls, text: str) -> ProbDist:
        data = json.loads(text)
        if not isinstance(data, list):
            raise DomainError("expected a JSON array of floats")
        return cls(np.array(data, dtype=np.float64))

    def total_variation(self, other: ProbDist) -> float:
        if other.q != self.q:
            raise DimensionError("distributions live on different Z_q")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


@dataclass(frozen=True)
class GaussianParams:
    """Width of the coefficient error distribution.

    Give exactly one of ``sigma`` or ``beta``; ``beta`` is relative to the
    modulus, sigma = beta / sqrt(2*pi) * q.
    """

    sigma: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if (self.sigma is None) == (self.beta is None):
            raise DomainError("give exactly one of sigma or beta")
        width = self.sigma if self.sigma is not None else self.beta
        if not width > 0:
            raise DomainError("Gaussian width must be positive")

    def resolve_sigma(self, q: int) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        return self.beta / math.sqrt(2 * math.pi) * q


def centered_lift(j, q: int):
    """Representative of j in (-q/2, q/2]."""
    j = np.asarray(j) % q
    return np.where(2 * j > q, j - q, j)


def discrete_gaussian_zq(q: int, params: GaussianParams) -> ProbDist:
    if q < 1:
        raise DomainError(f"q must be positive, got {q}")
    sigma = params.resolve_sigma(q)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    x = centered_lift(np.arange(q), q).astype(np.float64)
    w = np.exp(-math.pi * x * x / (2.0 * sigma * sigma))
    return ProbDist.normalized(w)


def pow_substitute(c: ProbDist, a: int) -> ProbDist:
    """Coefficients of c(x^a) mod x^q - 1: mass at i moves to a*i mod q."""
    q = c.q
    out = np.zeros(q)
    np.add.at(out, (a * np.arange(q)) % q, c.probs)
    return ProbDist(out)


def cyclic_convolve(c: ProbDist, d: ProbDist) -> ProbDist:
    """Product of c(x) and d(x) mod x^q - 1, renormalized."""
    q = c.q
    if d.q != q:
        raise DimensionError(f"cannot convolve over Z_{q} and Z_{d.q}")
    idx = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q  # idx[j, i] = j - i
    out = d.probs[idx] @ c.probs
    out = np.clip(out, 0.0, None)
    return ProbDist(out / out.sum())


def mapped_error_dist(c: ProbDist, params: RingParams) -> ProbDist:
    """Distribution of e(gamma) when each of the n coefficients of e is drawn from c."""
    if c.q != params.q:
        raise DimensionError(f"coefficient distribution is over Z_{c.q}, ring has q={params.q}")
    q, g = params.q, params.gamma
    out = c
    power = 1
    for _ in range(1, params.n):
        power = power * g % q
        out = cyclic_convolve(out, pow_substitute(c, power))
    return out


def sample(dist: ProbDist, count: int, seed) -> np.ndarray:
    """``count`` iid draws by inverse CDF.  ``seed`` feeds numpy's PCG64 generator."""
    if count < 0:
        raise DomainError("count must be non-negative")
    rng = np.random.default_rng(seed)
    return _draw(dist, count, rng)


def _draw(dist: ProbDist, size, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(dist.probs)
    cdf /= cdf[-1]
    u = rng.random(size)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
