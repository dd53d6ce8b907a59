"""Smearing probabilities: the chance that m draws from a distribution on
Z_q hit every residue at least once (a generalized coupon-collector CDF).

Exact engines
    uniform_grid / uniform_table / p_uniform
        recursion in m for the uniform law, O(q * m).
    nonuniform_table / p_nonuniform
        recursion in q (eliminate the last residue, condition on how often
        it was drawn), O(q * m^2) vectorized.
    p_nonuniform_small
        recursion in m over every subset of residues, O(2^q * m).  Only
        used as an independent cross-check.

Plus the Erdos-Renyi approximation, the expected collection time, a Monte
Carlo estimator and the parameter choosers for the smearing decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import ProbDist, _draw
from .errors import CapacityError, DimensionError, DomainError, NotFoundError

SUBSET_Q_LIMIT = 20


@dataclass(frozen=True, eq=False)
class SmearTable:
    """P(i, q) for i = 0..m_max under one distribution."""

    q: int
    m_max: int
    values: np.ndarray

    def __getitem__(self, m: int) -> float:
        return float(self.values[m])

    def rows(self):
        return [(m, float(p)) for m, p in enumerate(self.values)]


def uniform_grid(q_max: int, m_max: int) -> np.ndarray:
    """Array G with G[j, i] = P(i, j) for 0 <= j <= q_max, 0 <= i <= m_max.

    Row j is built from row j-1 by
    P(i, j) = P(i-1, j) + P(i-1, j-1) * ((j-1)/j)**(i-1).
    Row 0 is all ones (nothing to collect), so P(0, 0) = 1.
    """
    if q_max < 0 or m_max < 0:
        raise DomainError("q_max and m_max must be non-negative")
    grid = np.zeros((q_max + 1, m_max + 1))
    grid[0, :] = 1.0
    exps = np.arange(m_max)
    for j in range(1, q_max + 1):
        ratio = (j - 1) / j
        steps = grid[j - 1, :-1] * ratio ** exps
        row = grid[j]
        row[1:] = np.cumsum(steps)
        row[:j] = 0.0  # fewer than j draws cannot cover j residues
        np.clip(row, 0.0, 1.0, out=row)
    return grid


def uniform_table(q: int, m_max: int) -> SmearTable:
    if q < 0:
        raise DomainError("q must be non-negative")
    return SmearTable(q, m_max, uniform_grid(q, m_max)[q].copy())


def p_uniform(m: int, q: int) -> float:
    """Exact P(m draws from U(Z_q) smear)."""
    if m < 0 or q < 0:
        raise DomainError("m and q must be non-negative")
    if m < q:
        return 0.0
    return uniform_table(q, m)[m]


def _log_binom(m_max: int) -> np.ndarray:
    """log C(i, k) for 0 <= k <= i <= m_max via the ratio C(i,k)/C(i,k-1) = (i-k+1)/k."""
    i = np.arange(m_max + 1)[:, None]
    k = np.arange(m_max + 1)[None, :]
    steps = np.log(np.maximum(i - k + 1, 1)) - np.log(np.maximum(k, 1))
    steps[:, 0] = 0.0
    out = np.cumsum(steps, axis=1)
    out[np.broadcast_to(k > i, out.shape)] = -np.inf
    return out


def nonuniform_table(chi: ProbDist, m_max: int) -> SmearTable:
    """P_chi(i, q) for all i <= m_max by recursion in q.

    Residues are eliminated from the highest index down.  With chi_j the
    restriction of chi to residues 0..j-1 (renormalized) and p the
    conditional weight of residue j-1,

        P_j(i) = sum_{k>=1} Binom(i, k; p) * P_{j-1}(i - k).

    Any zero entry in chi makes smearing impossible; the table is then all 0.
    """
    if m_max < 0:
        raise DomainError("m_max must be non-negative")
    q = chi.q
    p = chi.probs
    if np.any(p == 0.0):
        return SmearTable(q, m_max, np.zeros(m_max + 1))

    prev = np.ones(m_max + 1)
    prev[0] = 0.0
    if q == 1:
        return SmearTable(q, m_max, prev)

    logc = _log_binom(m_max)
    i = np.arange(m_max + 1)[:, None]
    k = np.arange(m_max + 1)[None, :]
    lag = i - k
    valid = (k >= 1) & (lag >= 0)
    lag = np.where(valid, lag, 0)
    prefix = np.cumsum(p)

    for j in range(2, q + 1):
        log_s = math.log(prefix[j - 1])
        log_hit = math.log(p[j - 1]) - log_s
        log_miss = math.log(prefix[j - 2]) - log_s
        log_pmf = logc + k * log_hit + lag * log_miss
        weights = np.where(valid, np.exp(log_pmf), 0.0)
        cur = (weights * prev[lag]).sum(axis=1)
        cur[:j] = 0.0
        prev = np.clip(cur, 0.0, 1.0)
    return SmearTable(q, m_max, prev)


def p_nonuniform(m: int, chi: ProbDist) -> float:
    """Exact P_chi(m, q) via the recursion in q."""
    if m < 0:
        raise DomainError("m must be non-negative")
    if m < chi.q:
        return 0.0
    return nonuniform_table(chi, m)[m]


def p_nonuniform_small(m: int, chi: ProbDist) -> float:
    """Exact P_chi(m, q) via the recursion in m over all subsets of Z_q.

    P_S(i) = P_S(i-1) + sum_{k in S} p_k (1 - p_k)^(i-1) P_{S-k}(i-1), with
    p_k renormalized inside S.  Exponential in q; guarded at q <= 20.
    """
    q = chi.q
    if q > SUBSET_Q_LIMIT:
        raise CapacityError(f"subset recursion limited to q <= {SUBSET_Q_LIMIT}, got {q}")
    if m < 0:
        raise DomainError("m must be non-negative")
    if m < q:
        return 0.0
    p = chi.probs
    exps = np.arange(m)
    table: list[np.ndarray] = [np.ones(m + 1)]
    for mask in range(1, 1 << q):
        members = [k for k in range(q) if mask >> k & 1]
        mass = sum(p[k] for k in members)
        row = np.zeros(m + 1)
        if mass > 0:
            steps = np.zeros(m)
            for k in members:
                pk = p[k] / mass
                if pk > 0:
                    steps += pk * (1.0 - pk) ** exps * table[mask & ~(1 << k)][:-1]
            row[1:] = np.cumsum(steps)
            row[: len(members)] = 0.0
        table.append(np.clip(row, 0.0, 1.0))
    return float(table[-1][m])


def er_approx(m: float, q: int) -> float:
    """Erdos-Renyi limit law: P(m, q) ~ exp(-q * exp(-m / q))."""
    if q < 1:
        raise DomainError("q must be >= 1")
    return math.exp(-q * math.exp(-m / q))


def expected_coupons(q: int) -> float:
    """E[draws to collect all q residues] = q * H_q."""
    if q < 1:
        raise DomainError("q must be >= 1")
    return q * math.fsum(1.0 / i for i in range(1, q + 1))


def mc_smear_estimate(chi: ProbDist, m: int, trials: int, seed) -> float:
    """Fraction of ``trials`` batches of m draws from chi that cover Z_q."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    q = chi.q
    if m < q:
        return 0.0
    rng = np.random.default_rng(seed)
    chunk = max(1, 4_000_000 // max(m, q))
    hits = 0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        draws = _draw(chi, (b, m), rng)
        occ = np.zeros((b, q), dtype=bool)
        occ[np.arange(b)[:, None], draws] = True
        hits += int(occ.all(axis=1).sum())
        done += b
    return hits / trials


def simulate_collection_times(q: int, runs: int, seed) -> np.ndarray:
    """Number of uniform draws needed to see every residue, for ``runs`` runs.

    Sums geometric waiting times: with i residues seen, the next new one
    arrives after Geometric((q - i) / q) draws.
    """
    rng = np.random.default_rng(seed)
    total = np.zeros(runs, dtype=np.int64)
    for seen in range(q):
        total += rng.geometric((q - seen) / q, size=runs)
    return total


def choose_m(q: int, chi: ProbDist, m_cap: int) -> int:
    """Smallest m <= m_cap with P_U(m, q) > 1/2 and P_chi(m, q) < 1/2.

    P_chi is non-decreasing in m, so only the first m with P_U > 1/2 needs
    to be checked against chi.
    """
    if chi.q != q:
        raise DimensionError(f"chi is over Z_{chi.q}, expected Z_{q}")
    pu = uniform_table(q, m_cap).values
    above = np.flatnonzero(pu > 0.5)
    if above.size and p_nonuniform(int(above[0]), chi) < 0.5:
        return int(above[0])
    raise NotFoundError(
        f"no m <= {m_cap} has P_U(m,{q}) > 1/2 and P_chi(m,{q}) < 1/2"
    )


def _chebyshev(p: float, n: int) -> float:
    return p * (1.0 - p) / (n * (p - 0.5) ** 2)


def _smallest_n(p: float, err: float) -> int:
    n = max(1, math.ceil(p * (1.0 - p) / (err * (p - 0.5) ** 2)))
    while n > 1 and _chebyshev(p, n - 1) <= err:
        n -= 1
    while _chebyshev(p, n) > err:
        n += 1
    return n


def choose_trials(p_u: float, p_chi: float, alpha_err: float, beta_err: float) -> int:
    """Smallest odd N whose Chebyshev bounds meet both target error rates."""
    if not p_chi < 0.5 < p_u:
        raise DomainError(f"need p_chi < 1/2 < p_u, got p_chi={p_chi}, p_u={p_u}")
    if not (0 < alpha_err < 1 and 0 < beta_err < 1):
        raise DomainError("error rates must lie in (0, 1)")
    n = max(_smallest_n(p_u, alpha_err), _smallest_n(p_chi, beta_err))
    return n if n % 2 else n + 1


def decision_curves(q: int, chi: ProbDist, m_max: int):
    """Rows (m, P_U, P_chi, 1/2 + (P_U - P_chi)/2) for m = 1..m_max.

    The last column is the chance that a single smear/no-smear observation
    classifies correctly when both hypotheses are equally likely.
    """
    pu = uniform_table(q, m_max).values
    pc = nonuniform_table(chi, m_max).values
    return [
        (m, float(pu[m]), float(pc[m]), 0.5 + 0.5 * float(pu[m] - pc[m]))
        for m in range(1, m_max + 1)
    ]
