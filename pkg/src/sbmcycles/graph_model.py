"""Two-block planted partition model: parameters, sampling, basic statistics.

Graphs are stored as a bit-packed upper triangle (pairs ``i < j`` in
row-major order), which keeps an ``n = 10**4`` graph under 7 MB.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class ModelParams:
    """Canonical ``(n, p, q)`` parameters of G(n, p, q).

    ``p`` is the within-community edge probability and ``q`` the
    between-community one. Use :meth:`from_ab` for the ``a/n, b/n`` form.
    """

    n: int
    p: float
    q: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    @classmethod
    def from_ab(cls, n: int, a: float, b: float) -> "ModelParams":
        return cls(n, a / n, b / n)

    @classmethod
    def from_c(cls, n: int, c: float, p_hat: float) -> "ModelParams":
        """Parameters with matched density ``p_hat`` and signal strength ``c``.

        Solves ``n (p - q)**2 / (p + q) = c`` with ``(p + q)/2 = p_hat`` and
        ``p >= q``.
        """
        if c < 0:
            raise ValueError("c must be nonnegative")
        half_gap = math.sqrt(c * p_hat / (2.0 * n))
        return cls(n, p_hat + half_gap, p_hat - half_gap)

    @classmethod
    def er(cls, n: int, p_hat: float) -> "ModelParams":
        return cls(n, p_hat, p_hat)

    @property
    def p_hat(self) -> float:
        return (self.p + self.q) / 2.0

    @property
    def d(self) -> float:
        return (self.p - self.q) / 2.0

    @property
    def a(self) -> float:
        return self.n * self.p

    @property
    def b(self) -> float:
        return self.n * self.q

    @property
    def c(self) -> float:
        if self.p + self.q == 0:
            return 0.0
        return self.n * (self.p - self.q) ** 2 / (self.p + self.q)

    @property
    def t(self) -> float:
        """Second-moment parameter ``c / (2 (1 - p_hat))``."""
        if self.p_hat >= 1.0:
            return math.inf if self.c > 0 else 0.0
        return self.c / (2.0 * (1.0 - self.p_hat))

    @property
    def is_null(self) -> bool:
        return self.p == self.q

    def as_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p, "q": self.q, "a": self.a, "b": self.b,
            "p_hat": self.p_hat, "c": self.c, "t": self.t,
        }


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=8)
def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major ``(i, j)`` arrays of the upper triangle, ``i < j``."""
    dtype = np.int32 if n < 2**15 else np.int64
    i, j = np.triu_indices(n, k=1)
    i = i.astype(dtype)
    j = j.astype(dtype)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def linear_index(n: int, i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


class Graph:
    """Undirected simple graph on ``range(n)``; immutable after construction."""

    __slots__ = ("n", "_bits", "_m", "_csr")

    def __init__(self, n: int, bits: np.ndarray):
        n = int(n)
        if n < 1:
            raise ValueError("n must be positive")
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size != (n_pairs(n) + 7) // 8:
            raise ValueError("packed bit array has the wrong length")
        bits = bits.copy()
        bits.setflags(write=False)
        self.n = n
        self._bits = bits
        self._m = None
        self._csr = None

    @classmethod
    def from_pair_mask(cls, n: int, mask: np.ndarray) -> "Graph":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (n_pairs(n),):
            raise ValueError("pair mask must have length n(n-1)/2")
        return cls(n, np.packbits(mask))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        mask = np.zeros(n_pairs(n), dtype=bool)
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            mask[linear_index(n, i, j)] = True
        return cls.from_pair_mask(n, mask)

    @classmethod
    def from_dense(cls, adj) -> "Graph":
        adj = np.asarray(adj).astype(bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError("adjacency must be square")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency has self-loops")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency is not symmetric")
        i, j = pair_index(n)
        return cls.from_pair_mask(n, adj[i, j])

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls.from_pair_mask(n, np.zeros(n_pairs(n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_pair_mask(n, np.ones(n_pairs(n), dtype=bool))

    @property
    def packed(self) -> np.ndarray:
        return self._bits

    def pair_mask(self) -> np.ndarray:
        return np.unpackbits(self._bits, count=n_pairs(self.n)).astype(bool)

    @property
    def n_edges(self) -> int:
        if self._m is None:
            self._m = int(self.pair_mask().sum())
        return self._m

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints ``(i, j)`` with ``i < j``, in row-major order."""
        i, j = pair_index(self.n)
        sel = self.pair_mask()
        return i[sel], j[sel]

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        k = linear_index(self.n, i, j)
        return bool((self._bits[k >> 3] >> (7 - (k & 7))) & 1)

    def to_dense(self, dtype=bool) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=dtype)
        i, j = self.edges()
        adj[i, j] = 1
        adj[j, i] = 1
        return adj

    def to_csr(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency with sorted column indices (cached)."""
        if self._csr is None:
            i, j = self.edges()
            rows = np.concatenate([i, j])
            cols = np.concatenate([j, i])
            data = np.ones(rows.size, dtype=np.float64)
            a = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
            a.sort_indices()
            self._csr = a
        return self._csr

    def degrees(self) -> np.ndarray:
        return np.diff(self.to_csr().indptr)

    def complement(self) -> "Graph":
        return Graph.from_pair_mask(self.n, ~self.pair_mask())

    def permute(self, perm) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        i, j = self.edges()
        return Graph.from_edges(self.n, zip(perm[i], perm[j]))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash((self.n, self._bits.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.n_edges})"


def sample_labels(n: int, rng: np.random.Generator, balanced: bool = False) -> np.ndarray:
    """iid uniform +-1 labels.

    ``balanced=True`` returns a uniformly random exact bisection (for odd n
    the extra node is +1). That mode is not the model's label law and is
    only offered for experiments that want it.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if balanced:
        sigma = np.where(np.arange(n) < (n + 1) // 2, 1, -1).astype(np.int8)
        return rng.permutation(sigma)
    return np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)


def check_labels(sigma, n: int | None = None) -> np.ndarray:
    sigma = np.asarray(sigma)
    if sigma.ndim != 1 or not np.all(np.abs(sigma) == 1):
        raise ValueError("labels must be a 1-d vector of +1/-1 entries")
    if n is not None and sigma.size != n:
        raise ValueError(f"labels have length {sigma.size}, expected {n}")
    return sigma.astype(np.int8)


def _sample_pairs(n: int, prob, rng: np.random.Generator) -> Graph:
    u = rng.random(n_pairs(n))
    return Graph.from_pair_mask(n, u < prob)


def sample_sbm(params: ModelParams, labels, rng: np.random.Generator) -> Graph:
    """Draw G(n, p, q) given the community labels."""
    sigma = check_labels(labels, params.n)
    i, j = pair_index(params.n)
    same = sigma[i] == sigma[j]
    prob = np.where(same, params.p, params.q)
    return _sample_pairs(params.n, prob, rng)


def sample_er(n: int, p_hat: float, rng: np.random.Generator) -> Graph:
    if not (0.0 <= p_hat <= 1.0):
        raise ValueError(f"p_hat must lie in [0, 1], got {p_hat!r}")
    return _sample_pairs(n, p_hat, rng)


def average_degree(G: Graph) -> float:
    return 2.0 * G.n_edges / G.n


def edge_density(G: Graph) -> float:
    """Empirical density ``|E| / C(n, 2)``."""
    if G.n < 2:
        raise ValueError("edge density needs n >= 2")
    return G.n_edges / n_pairs(G.n)


def overlap(sigma, tau) -> float:
    """Centered overlap of two labelings, in ``[-1, 1]``."""
    sigma = np.asarray(sigma, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if sigma.shape != tau.shape or sigma.ndim != 1:
        raise ValueError("label vectors must be 1-d and of equal length")
    n = sigma.size
    return float((sigma @ tau - sigma.sum() * tau.sum() / n) / n)
