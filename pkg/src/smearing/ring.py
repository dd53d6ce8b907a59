"""Arithmetic in Z_q and in the quotient ring Z_q[x]/(f(x)).

Residues are always kept in the canonical range [0, q).  Polynomials are
stored as ascending power-basis coefficient vectors.  The batch helpers
(`mul_batch`, `eval_batch`) work on 2-D integer arrays of shape
(count, n) and are what the sample generators use.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, PreconditionError


def poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    """Horner evaluation of an ascending coefficient list at x, mod q."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


@dataclass(frozen=True)
class RingParams:
    """A PLWE frame: prime q, monic f of degree n and a root gamma of f mod q."""

    q: int
    f_coeffs: tuple[int, ...]
    gamma: int

    def __post_init__(self):
        if self.q < 2:
            raise DomainError(f"q must be >= 2, got {self.q}")
        f = tuple(int(c) % self.q for c in self.f_coeffs)
        if len(f) < 2:
            raise DomainError("f must have degree >= 1")
        if f[-1] != 1:
            raise DomainError("f must be monic")
        object.__setattr__(self, "f_coeffs", f)
        object.__setattr__(self, "gamma", int(self.gamma) % self.q)
        if poly_eval(f, self.gamma, self.q) != 0:
            roots = find_roots(f, self.q)
            raise PreconditionError(
                f"gamma={self.gamma} is not a root of f mod {self.q}; roots found: {roots}"
            )

    @property
    def n(self) -> int:
        return len(self.f_coeffs) - 1

    @classmethod
    def from_root(cls, q: int, n: int, gamma: int) -> RingParams:
        """Use f(x) = x^n - gamma^n (lifted to a positive constant), which has gamma as a root."""
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        const = (-pow(gamma, n, q)) % q
        return cls(q, (const,) + (0,) * (n - 1) + (1,), gamma)

    @classmethod
    def negacyclic(cls, q: int, n: int, gamma: int | None = None) -> RingParams:
        """The x^n + 1 family.  Picks the smallest root when gamma is omitted."""
        f = (1,) + (0,) * (n - 1) + (1,)
        if gamma is None:
            roots = find_roots(f, q)
            if not roots:
                raise PreconditionError(f"x^{n}+1 has no root mod {q}")
            gamma = roots[0]
        return cls(q, f, gamma)


@dataclass(frozen=True)
class PolyModF:
    """An element of Z_q[x]/(f(x)) as n reduced coefficients."""

    coeffs: tuple[int, ...]

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int], params: RingParams) -> PolyModF:
        """Reduce an arbitrary integer polynomial into P_q (mod f, then mod q)."""
        c = [int(x) % params.q for x in coeffs]
        if len(c) > params.n:
            c = _reduce_mod_f(np.array([c], dtype=np.int64), params)[0].tolist()
        c += [0] * (params.n - len(c))
        return cls(tuple(c))

    @classmethod
    def zero(cls, params: RingParams) -> PolyModF:
        return cls((0,) * params.n)

    @classmethod
    def one(cls, params: RingParams) -> PolyModF:
        return cls((1,) + (0,) * (params.n - 1))

    def __len__(self):
        return len(self.coeffs)


def _check(a: PolyModF, params: RingParams) -> None:
    if len(a.coeffs) != params.n:
        raise DimensionError(f"expected {params.n} coefficients, got {len(a.coeffs)}")


def _reduce_mod_f(prod: np.ndarray, params: RingParams) -> np.ndarray:
    """Reduce rows of a (count, d) coefficient array modulo the monic f and q."""
    q, n = params.q, params.n
    f_low = np.array(params.f_coeffs[:n], dtype=np.int64)
    prod = prod % q
    for d in range(prod.shape[1] - 1, n - 1, -1):
        lead = prod[:, d].copy()
        prod[:, d] = 0
        # x^d = x^(d-n) * x^n and x^n == -(f_0 + ... + f_{n-1} x^{n-1})
        prod[:, d - n : d] = (prod[:, d - n : d] - lead[:, None] * f_low[None, :]) % q
    return prod[:, :n]


def mul_batch(a: np.ndarray, b: np.ndarray, params: RingParams) -> np.ndarray:
    """Row-wise product in P_q.  a has shape (count, n); b is (count, n) or (n,)."""
    n, q = params.n, params.q
    a = np.atleast_2d(np.asarray(a, dtype=np.int64))
    b = np.asarray(b, dtype=np.int64)
    if b.ndim == 1:
        b = b[None, :]
    if a.shape[1] != n or b.shape[1] != n:
        raise DimensionError(f"expected rows of length {n}")
    prod = np.zeros((max(a.shape[0], b.shape[0]), 2 * n - 1), dtype=np.int64)
    for i in range(n):
        prod[:, i : i + n] = (prod[:, i : i + n] + a[:, i : i + 1] * b) % q
    return _reduce_mod_f(prod, params)


def eval_batch(polys: np.ndarray, params: RingParams) -> np.ndarray:
    """Apply the smearing map to every row of a (count, n) array."""
    polys = np.atleast_2d(np.asarray(polys, dtype=np.int64))
    if polys.shape[1] != params.n:
        raise DimensionError(f"expected rows of length {params.n}")
    acc = np.zeros(polys.shape[0], dtype=np.int64)
    for j in range(params.n - 1, -1, -1):
        acc = (acc * params.gamma + polys[:, j]) % params.q
    return acc


def ring_add(a: PolyModF, b: PolyModF, params: RingParams) -> PolyModF:
    _check(a, params)
    _check(b, params)
    return PolyModF(tuple((x + y) % params.q for x, y in zip(a.coeffs, b.coeffs)))


def ring_sub(a: PolyModF, b: PolyModF, params: RingParams) -> PolyModF:
    _check(a, params)
    _check(b, params)
    return PolyModF(tuple((x - y) % params.q for x, y in zip(a.coeffs, b.coeffs)))


def ring_mul(a: PolyModF, b: PolyModF, params: RingParams) -> PolyModF:
    """Schoolbook product followed by division by f, all mod q."""
    _check(a, params)
    _check(b, params)
    out = mul_batch(np.array([a.coeffs]), np.array(b.coeffs), params)[0]
    return PolyModF(tuple(int(c) for c in out))


def smear_map(g: PolyModF, params: RingParams) -> int:
    """Evaluate g at the root gamma: the homomorphism P_q -> Z_q."""
    _check(g, params)
    return poly_eval(g.coeffs, params.gamma, params.q)


def find_roots(f_coeffs: Sequence[int], q: int) -> list[int]:
    """All roots of f in Z_q, ascending, by exhaustive scan."""
    return [x for x in range(q) if poly_eval(f_coeffs, x, q) == 0]


def mult_order(gamma: int, q: int) -> int:
    """Smallest r >= 1 with gamma^r == 1 mod q."""
    gamma %= q
    if gamma == 0:
        raise DomainError("0 has no multiplicative order")
    r, acc = 1, gamma
    while acc != 1:
        acc = acc * gamma % q
        r += 1
        if r > q:
            raise DomainError(f"{gamma} is not a unit mod {q}")
    return r
