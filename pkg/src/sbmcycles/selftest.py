"""Small-n invariant suite: oracle equivalence and exhaustive enumerations."""
from __future__ import annotations

import contextlib
import copy
import math
from dataclasses import dataclass

import numpy as np

from . import signed_cycles
from .graph_model import Graph, ModelParams, n_pairs, sample_er
from .likelihood import (
    AgreementProfile, exact_second_moment, likelihood_ratio_exact, second_moment_double_sum,
)
from .signed_cycles import (
    centered_matrix, closed_word_shapes, exact_er_variance, normalizer, shape_sum,
    signed_cycle_bruteforce, signed_cycle_fast,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def all_graphs(n: int):
    """Every labeled simple graph on n nodes with its edge count."""
    N = n_pairs(n)
    codes = np.arange(2**N, dtype=np.int64)
    masks = ((codes[:, None] >> np.arange(N)) & 1).astype(bool)
    for mask in masks:
        yield Graph.from_pair_mask(n, mask), int(mask.sum())


def er_weight(m: int, n: int, p: float) -> float:
    return p**m * (1.0 - p) ** (n_pairs(n) - m)


def _rel_close(a, b, rtol, atol=1e-12):
    return abs(a - b) <= rtol * abs(b) + atol


def check_fast_vs_bruteforce(graphs_per_case: int = 20, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (5, 6):
        for p in (0.3, 0.6):
            for _ in range(graphs_per_case):
                G = sample_er(n, p, rng)
                for k in (3, 4, 5):
                    fast = signed_cycle_fast(G, p, k)
                    brute = signed_cycle_bruteforce(G, p, k)
                    worst = max(worst, abs(fast - brute))
                    if not _rel_close(fast, brute, 1e-9):
                        return CheckResult("fast_equals_bruteforce", False,
                                           f"n={n} p={p} k={k}: fast={fast!r} bruteforce={brute!r}")
    return CheckResult("fast_equals_bruteforce", True, f"worst absolute difference {worst:.2e}")


def check_shape_expansion(seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    G = sample_er(6, 0.4, rng)
    M = centered_matrix(G, 0.4)
    for k in (3, 4, 5, 6):
        expanded = math.fsum(c * shape_sum(M, nb, e) for c, nb, e in closed_word_shapes(k))
        brute = signed_cycle_bruteforce(G, 0.4, k) / normalizer(6, 0.4, k)
        if not _rel_close(expanded, brute, 1e-9):
            return CheckResult("shape_expansion", False, f"k={k}: shapes={expanded!r} bruteforce={brute!r}")
    return CheckResult("shape_expansion", True, "Moebius shape sums match enumeration for k=3..6")


def check_exhaustive_null_moments(n: int = 4, p: float = 0.3, k: int = 3) -> list[CheckResult]:
    terms1, terms2 = [], []
    for G, m in all_graphs(n):
        w = er_weight(m, n, p)
        c = signed_cycle_bruteforce(G, p, k)
        terms1.append(w * c)
        terms2.append(w * c * c)
    mean = math.fsum(terms1)
    var = math.fsum(terms2) - mean**2
    target = exact_er_variance(n, k)
    return [
        CheckResult("exact_null_mean", abs(mean) < 1e-12, f"E[C_{n},{k}] = {mean!r}"),
        CheckResult("exact_null_variance", abs(var - target) < 1e-12,
                    f"Var = {var!r}, expected {target!r}"),
    ]


def exhaustive_likelihood_moments(params: ModelParams) -> tuple[float, float]:
    """``(E'[Y], E'[Y^2])`` over every graph on ``params.n`` nodes."""
    n, ph = params.n, params.p_hat
    t1, t2 = [], []
    for G, m in all_graphs(n):
        w = er_weight(m, n, ph)
        y = likelihood_ratio_exact(G, params)
        t1.append(w * y)
        t2.append(w * y * y)
    return math.fsum(t1), math.fsum(t2)


def check_likelihood(params: ModelParams | None = None) -> list[CheckResult]:
    params = params or ModelParams(4, 0.7, 0.2)
    ey, ey2 = exhaustive_likelihood_moments(params)
    target = exact_second_moment(params.n, params.t)
    return [
        CheckResult("likelihood_mean_one", abs(ey - 1.0) < 1e-12, f"E'[Y] = {ey!r}"),
        CheckResult("likelihood_second_moment", abs(ey2 - target) < 1e-10,
                    f"E'[Y^2] = {ey2!r}, closed form {target!r}"),
    ]


def check_second_moment_double_sum(n: int = 6, t: float = 0.5) -> CheckResult:
    single = exact_second_moment(n, t)
    double = second_moment_double_sum(n, t)
    return CheckResult("second_moment_agreement_sum", abs(single - double) < 1e-12,
                       f"single={single!r} double={double!r}")


def check_agreement_identities(n_max: int = 200) -> CheckResult:
    for n in range(1, n_max + 1):
        for m in range(n + 1):
            prof = AgreementProfile(n, m)
            rho = prof.rho
            if prof.s_plus + prof.s_minus != n_pairs(n):
                return CheckResult("agreement_identities", False, f"S+ + S- mismatch at n={n}, m={m}")
            if abs(prof.s_plus - ((1 + rho**2) * n * n / 4 - n / 2)) > 1e-6:
                return CheckResult("agreement_identities", False, f"S+ closed form fails at n={n}, m={m}")
            if abs(prof.s_minus - (1 - rho**2) * n * n / 4) > 1e-6:
                return CheckResult("agreement_identities", False, f"S- closed form fails at n={n}, m={m}")
    return CheckResult("agreement_identities", True, f"checked n <= {n_max}")


def check_complement_symmetry(seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    G = sample_er(6, 0.3, rng)
    H = G.complement()
    for k in (3, 4, 5):
        a = signed_cycle_fast(H, 0.7, k)
        b = (-1) ** k * signed_cycle_fast(G, 0.3, k)
        if not _rel_close(a, b, 1e-9):
            return CheckResult("complement_symmetry", False, f"k={k}: {a!r} vs {b!r}")
    return CheckResult("complement_symmetry", True, "C(complement, 1-p) = (-1)^k C(G, p)")


@contextlib.contextmanager
def patched_fast_terms(terms: dict):
    saved = signed_cycles.FAST_TERMS
    signed_cycles.FAST_TERMS = terms
    try:
        yield
    finally:
        signed_cycles.FAST_TERMS = saved


def corrupted_fast_terms() -> dict:
    """Fast-path table with one correction coefficient off by one."""
    terms = copy.deepcopy(signed_cycles.FAST_TERMS)
    terms[4]["backtrack_pair"] += 1
    return terms


def run_selftest(fast_terms: dict | None = None) -> list[CheckResult]:
    def body():
        results = [check_fast_vs_bruteforce(), check_shape_expansion(), check_complement_symmetry()]
        results += check_exhaustive_null_moments()
        results += check_likelihood()
        results.append(check_second_moment_double_sum())
        results.append(check_agreement_identities())
        return results

    if fast_terms is None:
        return body()
    with patched_fast_terms(fast_terms):
        return body()
