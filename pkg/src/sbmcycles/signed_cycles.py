"""Signed-cycle statistics of a graph.

For a centering level ``p_av`` let ``M`` be the matrix with ``M_ij = x_ij - p_av``
off the diagonal and ``M_ii = 0``. The signed cycle of length ``k`` is::

    C_k = (n p_av (1 - p_av)) ** (-k/2) * sum_{i0..i_{k-1} distinct} M[i0,i1] ... M[i_{k-1},i0]

``signed_cycle_bruteforce`` evaluates the sum literally and is the oracle.
``signed_cycle_fast`` starts from ``tr(M^k)`` and subtracts closed walks
that revisit a vertex. The correction terms come from Moebius inversion
over set partitions of the walk positions (see :func:`closed_word_shapes`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .graph_model import Graph, ModelParams, edge_density

DEFAULT_BUDGET = 10**9


class Method(str, Enum):
    BRUTEFORCE = "bruteforce"
    TRACE = "trace"


@dataclass(frozen=True)
class CycleStat:
    k: int
    value: float
    method: Method
    p_av: float

    def as_dict(self) -> dict:
        return {"k": self.k, "value": self.value, "method": self.method.value, "p_av": self.p_av}


def _check_p_av(p_av: float) -> float:
    p_av = float(p_av)
    if not (0.0 < p_av < 1.0):
        raise ValueError(f"p_av must lie strictly inside (0, 1), got {p_av!r}")
    return p_av


def normalizer(n: int, p_av: float, k: int) -> float:
    return (n * p_av * (1.0 - p_av)) ** (-k / 2.0)


def centered_entry(G: Graph, i: int, j: int, p_av: float) -> float:
    if i == j:
        raise ValueError("centered entries are only defined off the diagonal")
    return float(G.has_edge(i, j)) - _check_p_av(p_av)


def centered_matrix(G: Graph, p_av: float) -> np.ndarray:
    M = G.to_dense(np.float64) - p_av
    np.fill_diagonal(M, 0.0)
    return M


def signed_cycle_bruteforce(G: Graph, p_av: float, k: int, budget: int = DEFAULT_BUDGET) -> float:
    """Literal sum over ordered distinct k-tuples. Refuses when ``n**k > budget``."""
    p_av = _check_p_av(p_av)
    n = G.n
    if k < 3 or k > n:
        raise ValueError(f"need 3 <= k <= n, got k={k}, n={n}")
    if n**k > budget:
        raise ValueError(
            f"bruteforce enumeration of n**k = {n**k} tuple-steps exceeds the budget of {budget}"
        )
    total = _kernels.distinct_cycle_sum(centered_matrix(G, p_av), k)
    return float(total) * normalizer(n, p_av, k)


# --- closed-word shapes ----------------------------------------------------

def _set_partitions(k: int):
    """Set partitions of range(k) as restricted growth strings."""
    blocks = [0] * k

    def rec(pos, nblocks):
        if pos == k:
            yield tuple(blocks)
            return
        for b in range(nblocks + 1):
            blocks[pos] = b
            yield from rec(pos + 1, max(nblocks, b + 1))

    yield from rec(0, 0)


def closed_word_shapes(k: int) -> list[tuple[int, int, tuple[tuple[int, int], ...]]]:
    """Moebius expansion of the distinct-vertex constraint on closed k-walks.

    Returns ``(coefficient, n_blocks, quotient_edges)`` for every set
    partition of the k walk positions with no two cyclically adjacent
    positions in one block (those give a diagonal factor and vanish).
    Summing ``coefficient * shape_sum(M, n_blocks, quotient_edges)`` over
    the list reproduces the distinct-tuple sum exactly.
    """
    shapes = []
    for rgs in _set_partitions(k):
        if any(rgs[s] == rgs[(s + 1) % k] for s in range(k)):
            continue
        nb = max(rgs) + 1
        sizes = [rgs.count(b) for b in range(nb)]
        coef = 1
        for size in sizes:
            coef *= (-1) ** (size - 1) * math.factorial(size - 1)
        edges = tuple(tuple(sorted((rgs[s], rgs[(s + 1) % k]))) for s in range(k))
        shapes.append((coef, nb, edges))
    return shapes


def shape_sum(M: np.ndarray, n_blocks: int, edges) -> float:
    """Sum over all assignments of blocks to vertices of the product of M over edges.

    Plain einsum; exponential in ``n_blocks`` so only for small matrices.
    """
    letters = "abcdefghij"[:n_blocks]
    subscripts = ",".join(letters[u] + letters[v] for u, v in edges) + "->"
    return float(np.einsum(subscripts, *([M] * len(edges)), optimize=True))


# --- fast path -------------------------------------------------------------

# Coefficients of the repeated-vertex corrections, grouped by shape:
#   walk_trace            tr(M^k)
#   backtrack_pair        sum_i s_i^2,            s_i = sum_j M_ij^2
#   double_edge           sum_ij M_ij^4
#   triangle_pendant      sum_i s_i (M^3)_ii
#   triple_edge_triangle  sum_ij M_ij^3 (M^2)_ij
FAST_TERMS: dict[int, dict[str, int]] = {
    3: {"walk_trace": 1},
    4: {"walk_trace": 1, "backtrack_pair": -2, "double_edge": 1},
    5: {"walk_trace": 1, "triangle_pendant": -5, "triple_edge_triangle": 5},
}


def _trace_m3_sparse(G: Graph, p_av: float) -> float:
    """tr(M^3) from triangle, degree and edge counts, with M = A - p_av (J - I).

    Expanding (A - pB)^3 with B = J - I and using trace cyclicity:
    tr A^3 = 6T, tr A^2 B = sum deg^2 - 2m, tr A B^2 = 2m (n - 2),
    tr B^3 = (n - 1)^3 - (n - 1).
    """
    n = G.n
    csr = G.to_csr()
    tri = int(_kernels.triangle_count_csr(csr.indptr, csr.indices))
    deg = np.diff(csr.indptr).astype(np.int64)
    m = int(deg.sum()) // 2
    sum_deg2 = int((deg * deg).sum())
    p = p_av
    terms = [
        6.0 * tri,
        -3.0 * p * (sum_deg2 - 2 * m),
        3.0 * p * p * (2 * m * (n - 2)),
        -(p**3) * ((n - 1) ** 3 - (n - 1)),
    ]
    return math.fsum(terms)


def _dense_terms(M: np.ndarray, k: int) -> dict[str, float]:
    M2 = M @ M
    out = {}
    if k == 4:
        sq = M * M
        s = sq.sum(axis=1)
        out["walk_trace"] = float(np.sum(M2 * M2))
        out["backtrack_pair"] = float(np.dot(s, s))
        out["double_edge"] = float(np.sum(sq * sq))
    elif k == 5:
        M3 = M2 @ M
        s = (M * M).sum(axis=1)
        out["walk_trace"] = float(np.sum(M2 * M3))
        out["triangle_pendant"] = float(np.dot(s, np.diagonal(M3)))
        out["triple_edge_triangle"] = float(np.sum(M**3 * M2))
    else:
        out["walk_trace"] = float(np.sum(M2 * M))
    return out


def fast_term_values(G: Graph, p_av: float, k: int) -> dict[str, float]:
    """Raw shape sums used by the fast path, before coefficients and scaling."""
    if k == 3:
        return {"walk_trace": _trace_m3_sparse(G, p_av)}
    return _dense_terms(centered_matrix(G, p_av), k)


def signed_cycle_fast(G: Graph, p_av: float, k: int) -> float:
    """Signed cycle via traces; O(n^3) for k = 4, 5 and near-linear for k = 3."""
    p_av = _check_p_av(p_av)
    if k not in FAST_TERMS:
        raise ValueError(
            f"fast signed cycles support k in {sorted(FAST_TERMS)}; use signed_cycle_bruteforce for k={k}"
        )
    if G.n < k:
        raise ValueError(f"need n >= k, got n={G.n}, k={k}")
    values = fast_term_values(G, p_av, k)
    total = math.fsum(coef * values[name] for name, coef in FAST_TERMS[k].items())
    return total * normalizer(G.n, p_av, k)


def signed_cycle(G: Graph, k: int, p_av: float | None = None, method: str = "trace",
                 budget: int = DEFAULT_BUDGET) -> CycleStat:
    """Evaluate one signed cycle and wrap it in a :class:`CycleStat`.

    ``p_av=None`` centers by the empirical edge density. That plug-in
    mode is off-theory; pass the model's ``p_hat`` for the canonical
    statistic.
    """
    if p_av is None:
        p_av = edge_density(G)
    method = Method(method)
    if method is Method.TRACE:
        value = signed_cycle_fast(G, p_av, k)
    else:
        value = signed_cycle_bruteforce(G, p_av, k, budget=budget)
    return CycleStat(k=k, value=value, method=method, p_av=float(p_av))


def theoretical_mean(params: ModelParams, k: int) -> float:
    """Planted mean shift ``t ** (k/2)``; zero under the null."""
    if params.c == 0:
        return 0.0
    return params.t ** (k / 2.0)


def exact_er_variance(n: int, k: int) -> float:
    """Exact variance of the signed k-cycle under G(n, p, p): 2k n!/((n-k)! n^k)."""
    if k < 3 or k > n:
        raise ValueError(f"need 3 <= k <= n, got k={k}, n={n}")
    falling = 1.0
    for r in range(k):
        falling *= (n - r) / n
    return 2.0 * k * falling

