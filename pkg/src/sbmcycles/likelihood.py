"""Likelihood ratio of G(n, p, q) against G(n, p_hat, p_hat) and its second moment.

Everything is parameterized by ``t = c / (2 (1 - p_hat))``, which covers the
sparse (``t -> c/2``) and dense regimes with one evaluator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .graph_model import Graph, ModelParams, n_pairs

MAX_EXACT_N = 20


def pair_weight(params: ModelParams, same_label: bool, edge: bool) -> float:
    """Per-pair factor of the likelihood ratio given a labeling."""
    p, q, ph = params.p, params.q, params.p_hat
    if edge:
        return (p if same_label else q) / ph
    return (1.0 - (p if same_label else q)) / (1.0 - ph)


@dataclass(frozen=True)
class AgreementProfile:
    """Counts for a pair of labelings that agree on ``m`` of ``n`` nodes."""

    n: int
    m: int

    def __post_init__(self):
        if not (0 <= self.m <= self.n):
            raise ValueError(f"agreement count m={self.m} outside [0, {self.n}]")

    @property
    def rho(self) -> float:
        return (2 * self.m - self.n) / self.n

    @property
    def s_minus(self) -> int:
        return self.m * (self.n - self.m)

    @property
    def s_plus(self) -> int:
        return n_pairs(self.n) - self.s_minus


def _xlogy(count, log_w):
    # 0 * log(0) contributes nothing
    with np.errstate(invalid="ignore"):
        return np.where(count == 0, 0.0, count * log_w)


def _log_weight(w: float) -> float:
    return math.log(w) if w > 0 else -math.inf


def likelihood_ratio_exact(G: Graph, params: ModelParams) -> float:
    """``dP_n/dP'_n (G)`` by summing over all 2**n labelings (oracle, n <= 20)."""
    n = G.n
    if n != params.n:
        raise ValueError(f"graph has n={n} but params have n={params.n}")
    if n > MAX_EXACT_N:
        raise ValueError(f"exact likelihood ratio enumerates 2**n labelings; refusing n={n} > {MAX_EXACT_N}")
    if not (0.0 < params.p_hat < 1.0):
        raise ValueError("p_hat must lie strictly inside (0, 1)")
    if params.is_null:
        return 1.0

    log_w = {
        (s, e): _log_weight(pair_weight(params, s, e))
        for s in (True, False) for e in (True, False)
    }
    A = G.to_dense(np.float64)
    m = G.n_edges
    codes = np.arange(2**n, dtype=np.int64)
    # rows of +-1 labelings, bit b of the code is node b
    sig = 1.0 - 2.0 * ((codes[:, None] >> np.arange(n)) & 1)
    plus = (sig > 0).sum(axis=1)
    same_pairs = plus * (plus - 1) // 2 + (n - plus) * (n - plus - 1) // 2
    diff_pairs = plus * (n - plus)
    # sum_{i<j} A_ij s_i s_j = (same-label edges) - (cross edges)
    signed = np.einsum("si,ij,sj->s", sig, A, sig, optimize=True) / 2.0
    e_same = np.rint((m + signed) / 2.0).astype(np.int64)
    e_diff = m - e_same
    logs = (
        _xlogy(e_same, log_w[True, True])
        + _xlogy(e_diff, log_w[False, True])
        + _xlogy(same_pairs - e_same, log_w[True, False])
        + _xlogy(diff_pairs - e_diff, log_w[False, False])
    )
    return float(np.exp(logsumexp(logs) - n * math.log(2.0)))


def _check_t(n: int, t: float) -> None:
    if n < 1:
        raise ValueError("n must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t >= n:
        raise ValueError(f"t must be below n (1 - t/n must stay positive), got t={t}, n={n}")


def exact_second_moment(n: int, t: float) -> float:
    """Finite-n ``E'[Y_n^2]`` as a single sum over the agreement count.

    ``2**-n sum_m binom(n, m) (1 + t/n)**S_plus(m) (1 - t/n)**S_minus(m)``.
    """
    _check_t(n, t)
    if t == 0:
        return 1.0
    m = np.arange(n + 1, dtype=np.float64)
    s_minus = m * (n - m)
    s_plus = n * (n - 1) / 2.0 - s_minus
    log_binom = gammaln(n + 1.0) - gammaln(m + 1.0) - gammaln(n - m + 1.0)
    logs = log_binom + s_plus * math.log1p(t / n) + s_minus * math.log1p(-t / n)
    return float(np.exp(logsumexp(logs) - n * math.log(2.0)))


def second_moment_double_sum(n: int, t: float) -> float:
    """The ``2**-2n`` double sum over label pairs, term by term (small n only)."""
    _check_t(n, t)
    if n > 10:
        raise ValueError("double sum has 4**n terms; refusing n > 10")
    codes = np.arange(2**n)
    sig = 1 - 2 * ((codes[:, None] >> np.arange(n)) & 1)
    iu, ju = np.triu_indices(n, k=1)
    prod = sig[:, iu] * sig[:, ju]  # sigma_u sigma_v for each labeling and pair
    lp, lm = math.log1p(t / n), math.log1p(-t / n)
    terms = []
    for row in prod:
        s_plus = (row[None, :] * prod == 1).sum(axis=1)
        s_minus = prod.shape[1] - s_plus
        terms.extend(np.exp(s_plus * lp + s_minus * lm).tolist())
    return math.fsum(terms) / 4.0**n


def limit_second_moment(t: float) -> float:
    """``exp(-t/2 - t^2/4) / sqrt(1 - t)`` for ``0 <= t < 1``."""
    if not (0.0 <= t < 1.0):
        raise ValueError(f"limit second moment needs 0 <= t < 1 (diverges at t = 1), got {t}")
    return math.exp(-t / 2.0 - t * t / 4.0) / math.sqrt(1.0 - t)


def default_truncation(t: float, tol: float = 1e-12) -> int:
    """Smallest ``m >= 3`` with ``t**m / (2m) < tol``."""
    if not (0.0 <= t < 1.0):
        raise ValueError("t must lie in [0, 1)")
    m = 3
    while t**m / (2 * m) >= tol:
        m += 1
    return m


def w_second_moment_truncated(t: float, m_trunc: int | None = None) -> float:
    if not (0.0 <= t < 1.0):
        raise ValueError("t must lie in [0, 1)")
    if m_trunc is None:
        m_trunc = default_truncation(t)
    return math.exp(math.fsum(t**i / (2 * i) for i in range(3, m_trunc + 1)))


def w_truncated_sample(t: float, m_trunc: int | None, rng: np.random.Generator,
                       size: int | None = None, chunk: int = 100_000):
    """Draws of ``exp(sum_{i=3}^{m} (2 t^{i/2} Z_i - t^i) / (4i))``, ``Z_i ~ N(0, 2i)``."""
    if not (0.0 <= t < 1.0):
        raise ValueError("t must lie in [0, 1)")
    if m_trunc is None:
        m_trunc = default_truncation(t)
    if m_trunc < 3:
        raise ValueError("m_trunc must be at least 3")
    i = np.arange(3, m_trunc + 1, dtype=np.float64)
    scale = np.sqrt(2.0 * i) * 2.0 * t ** (i / 2.0) / (4.0 * i)
    shift = t**i / (4.0 * i)
    count = 1 if size is None else int(size)
    out = np.empty(count)
    for start in range(0, count, chunk):
        stop = min(start + chunk, count)
        z = rng.standard_normal((stop - start, i.size))
        out[start:stop] = np.exp(z @ scale - shift.sum())
    return float(out[0]) if size is None else out
