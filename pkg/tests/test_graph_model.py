import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sbmcycles.graph_model import (
    Graph, ModelParams, average_degree, edge_density, linear_index, n_pairs, overlap, pair_index,
    sample_er, sample_labels, sample_sbm,
)
from sbmcycles.io import (
    params_from_text, params_to_text, read_comments, read_edgelist, read_labels, write_edgelist,
    write_labels,
)
from sbmcycles.signed_cycles import _trace_m3_sparse


def labels_st(min_size=1, max_size=30):
    return st.lists(st.sampled_from([-1, 1]), min_size=min_size, max_size=max_size).map(np.array)


# --- parameters --------------------------------------------------------------

def test_params_ab_and_pq_forms_agree():
    a = ModelParams.from_ab(100, 10.0, 2.0)
    b = ModelParams(100, 0.1, 0.02)
    assert a == b
    assert a.a == pytest.approx(10.0) and a.b == pytest.approx(2.0)
    assert a.p_hat == pytest.approx(0.06)
    assert a.c == pytest.approx(64 / 12)


def test_params_from_c_roundtrip():
    params = ModelParams.from_c(2000, 4.0, 0.05)
    assert params.p_hat == pytest.approx(0.05)
    assert params.c == pytest.approx(4.0, rel=1e-12)
    assert params.t == pytest.approx(4.0 / (2 * 0.95), rel=1e-12)
    assert params.p >= params.q


@pytest.mark.parametrize("n,p,q", [(0, 0.1, 0.1), (10, 1.2, 0.1), (10, 0.1, -0.1), (2.5, 0.1, 0.1)])
def test_params_rejects_invalid(n, p, q):
    with pytest.raises(ValueError):
        ModelParams(n, p, q)


def test_params_is_null():
    assert ModelParams.er(10, 0.3).is_null
    assert ModelParams.er(10, 0.3).c == 0
    assert not ModelParams(10, 0.3, 0.2).is_null


# --- graph container ---------------------------------------------------------

def test_pair_index_matches_linear_index():
    n = 7
    i, j = pair_index(n)
    assert i.size == n_pairs(n)
    for k, (a, b) in enumerate(zip(i, j)):
        assert a < b
        assert linear_index(n, a, b) == k
        assert linear_index(n, b, a) == k


def test_graph_roundtrips(rng):
    G = sample_er(25, 0.3, rng)
    adj = G.to_dense()
    assert np.array_equal(adj, adj.T) and not adj.diagonal().any()
    assert Graph.from_dense(adj) == G
    i, j = G.edges()
    assert Graph.from_edges(25, zip(i, j)) == G
    assert G.n_edges == adj.sum() // 2
    assert np.array_equal(G.degrees(), adj.sum(axis=1))
    for a, b in [(0, 1), (3, 17), (24, 5)]:
        assert G.has_edge(a, b) == bool(adj[a, b])
    assert not G.has_edge(4, 4)


def test_graph_packed_size():
    n = 10_000
    assert Graph.empty(n).packed.nbytes == math.ceil(n * (n - 1) / 2 / 8)
    assert Graph.empty(n).packed.nbytes < 7e6


def test_graph_is_immutable(rng):
    G = sample_er(10, 0.5, rng)
    with pytest.raises(ValueError):
        G.packed[0] = 0


def test_graph_rejects_bad_input():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(ValueError):
        Graph.from_dense(np.array([[0, 1], [0, 0]]))


def test_complement_and_permute(rng):
    G = sample_er(12, 0.4, rng)
    H = G.complement()
    assert G.n_edges + H.n_edges == n_pairs(12)
    assert H.complement() == G
    perm = rng.permutation(12)
    P = G.permute(perm)
    adj, padj = G.to_dense(), P.to_dense()
    assert np.array_equal(padj[np.ix_(perm, perm)], adj)


# --- labels ------------------------------------------------------------------

def test_labels_n1(rng):
    sigma = sample_labels(1, rng)
    assert sigma.shape == (1,) and abs(sigma[0]) == 1


def test_labels_balance_large_n():
    frac = [np.mean(sample_labels(10_000, np.random.default_rng(s)) == 1) for s in range(20)]
    assert all(abs(f - 0.5) < 0.02 for f in frac)


def test_labels_deterministic():
    a = sample_labels(500, np.random.default_rng(3))
    b = sample_labels(500, np.random.default_rng(3))
    assert np.array_equal(a, b)


def test_labels_balanced_mode(rng):
    assert sample_labels(100, rng, balanced=True).sum() == 0
    assert sample_labels(101, rng, balanced=True).sum() == 1


# --- sampling ----------------------------------------------------------------

def test_sbm_extremes(rng):
    sigma = sample_labels(30, rng)
    assert sample_sbm(ModelParams(30, 1.0, 1.0), sigma, rng) == Graph.complete(30)
    assert sample_er(30, 0.0, rng) == Graph.empty(30)
    assert sample_er(30, 1.0, rng) == Graph.complete(30)


def test_sbm_p_q_zero_is_empty(rng):
    sigma = sample_labels(20, rng)
    assert sample_sbm(ModelParams(20, 0.0, 0.0), sigma, rng) == Graph.empty(20)


def test_sbm_label_length_checked(rng):
    with pytest.raises(ValueError):
        sample_sbm(ModelParams(10, 0.5, 0.1), np.ones(9), rng)


def test_sbm_within_density():
    rng = np.random.default_rng(11)
    params = ModelParams.from_ab(2000, 10.0, 2.0)
    sigma = sample_labels(params.n, rng)
    G = sample_sbm(params, sigma, rng)
    i, j = pair_index(params.n)
    same = sigma[i] == sigma[j]
    mask = G.pair_mask()
    for sel, prob in ((same, params.p), (~same, params.q)):
        N = int(sel.sum())
        count = int(mask[sel].sum())
        se = math.sqrt(N * prob * (1 - prob))
        assert abs(count - N * prob) < 3 * se


def test_er_edge_count_concentration():
    n, p = 1000, 0.01
    N = n_pairs(n)
    sd = math.sqrt(N * p * (1 - p))
    for s in range(5):
        G = sample_er(n, p, np.random.default_rng(s))
        assert abs(G.n_edges - N * p) < 3 * sd


def test_er_equals_sbm_with_equal_probabilities():
    n, p, T = 60, 0.1, 500
    er_edges, sbm_edges, er_tri, sbm_tri = [], [], [], []
    for s in range(T):
        G = sample_er(n, p, np.random.default_rng([1, s]))
        rng = np.random.default_rng([2, s])
        H = sample_sbm(ModelParams.er(n, p), sample_labels(n, rng), rng)
        er_edges.append(G.n_edges)
        sbm_edges.append(H.n_edges)
        er_tri.append(np.trace(np.linalg.matrix_power(G.to_dense(float), 3)) / 6)
        sbm_tri.append(np.trace(np.linalg.matrix_power(H.to_dense(float), 3)) / 6)
    assert stats.ks_2samp(er_edges, sbm_edges).statistic < 0.1
    assert stats.ks_2samp(er_tri, sbm_tri).statistic < 0.1


def test_sampling_deterministic():
    params = ModelParams.from_ab(300, 8, 3)
    draws = []
    for _ in range(2):
        rng = np.random.default_rng(99)
        draws.append(sample_sbm(params, sample_labels(300, rng), rng))
    assert draws[0] == draws[1]
    assert np.array_equal(draws[0].packed, draws[1].packed)


# --- degree and density ------------------------------------------------------

def test_average_degree_extremes():
    assert average_degree(Graph.empty(9)) == 0
    assert average_degree(Graph.complete(9)) == 8
    assert edge_density(Graph.complete(9)) == 1


def test_average_degree_sbm_mean():
    params = ModelParams.from_ab(2000, 10.0, 2.0)
    degs = []
    for s in range(200):
        rng = np.random.default_rng([5, s])
        degs.append(average_degree(sample_sbm(params, sample_labels(params.n, rng), rng)))
    assert abs(np.mean(degs) - 6.0) < 0.02 * 6.0


# --- overlap -----------------------------------------------------------------

def test_overlap_examples():
    ones = np.ones(6)
    assert overlap(ones, ones) == 0
    assert overlap([1, 1, -1, -1], [1, 1, -1, 1]) == pytest.approx(0.5)
    sigma = np.array([1, -1, 1, -1, 1, -1])
    assert overlap(sigma, sigma) == pytest.approx(1.0)
    assert overlap(sigma, -sigma) == pytest.approx(-1.0)


def test_overlap_length_mismatch():
    with pytest.raises(ValueError):
        overlap([1, 1], [1, 1, 1])


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    labels_st(n, n), labels_st(n, n), st.permutations(list(range(n))))))
@settings(max_examples=100, deadline=None)
def test_overlap_properties(data):
    sigma, tau, perm = data
    perm = np.array(perm)
    ov = overlap(sigma, tau)
    assert -1 - 1e-12 <= ov <= 1 + 1e-12
    assert ov == pytest.approx(overlap(tau, sigma), abs=1e-12)
    assert overlap(sigma, -tau) == pytest.approx(-ov, abs=1e-12)
    assert overlap(sigma[perm], tau[perm]) == pytest.approx(ov, abs=1e-12)


# --- serialization -----------------------------------------------------------

def test_edgelist_roundtrip(tmp_path, rng):
    G = sample_er(40, 0.2, rng)
    path = tmp_path / "g.edges"
    write_edgelist(G, path, {"seed": 5, "version": "x"})
    text = path.read_text().splitlines()
    assert text[0] == "n=40"
    assert read_edgelist(path) == G
    assert read_comments(path) == {"seed": "5", "version": "x"}


def test_edgelist_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n")
    with pytest.raises(ValueError):
        read_edgelist(path)


def test_labels_roundtrip(tmp_path, rng):
    sigma = sample_labels(33, rng)
    path = tmp_path / "g.labels"
    write_labels(sigma, path, {"seed": 1})
    assert np.array_equal(read_labels(path), sigma)


def test_params_text_roundtrip():
    params = ModelParams.from_ab(1234, 7.5, 2.25)
    assert params_from_text(params_to_text(params)) == params
    with pytest.raises(ValueError):
        params_from_text("n=3\np=0.1\n")


def test_sparse_triangle_path_sanity(rng):
    # trace identity on a moderately large graph
    G = sample_er(150, 0.1, rng)
    A = G.to_dense(float)
    M = A - 0.1 * (1 - np.eye(150))
    assert _trace_m3_sparse(G, 0.1) == pytest.approx(np.trace(M @ M @ M), rel=1e-10, abs=1e-8)
