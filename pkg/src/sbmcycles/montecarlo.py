"""Seeded Monte Carlo harness and distributional diagnostics.

Trial ``i`` draws from a stream derived from ``(master_seed, i)`` only, so
records do not depend on execution order or on the number of workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .graph_model import ModelParams, edge_density, overlap, sample_er, sample_labels, sample_sbm
from .inference import estimate_ab, spectral_labels
from .seeds import trial_rng, trial_seed
from .signed_cycles import FAST_TERMS, signed_cycle_fast


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    trials: int
    ks: tuple[int, ...] = (3,)
    master_seed: int = 0
    centering: str = "model"  # or "plugin"
    with_overlap: bool = False
    estimate_k: int | None = None
    stream: int | None = None  # separates otherwise identical seeds, e.g. sweep points

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        bad = [k for k in self.ks if k not in FAST_TERMS]
        if bad:
            raise ValueError(f"cycle lengths {bad} are outside the fast range {sorted(FAST_TERMS)}")
        if self.centering not in ("model", "plugin"):
            raise ValueError("centering must be 'model' or 'plugin'")
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))

    def as_dict(self) -> dict:
        return {
            "model": self.params.as_dict(), "trials": self.trials, "ks": list(self.ks),
            "master_seed": self.master_seed, "centering": self.centering,
            "with_overlap": self.with_overlap, "estimate_k": self.estimate_k,
            "stream": self.stream,
        }


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    n_edges: int
    stats: dict[int, float] = field(default_factory=dict)
    overlap: float | None = None
    a_hat: float | None = None
    b_hat: float | None = None

    def as_dict(self) -> dict:
        d = {"trial": self.trial_index, "seed": self.seed, "n_edges": self.n_edges}
        for k, v in sorted(self.stats.items()):
            d[f"C{k}"] = v
        if self.overlap is not None:
            d["ov_abs"] = self.overlap
        if self.a_hat is not None:
            d["a_hat"] = self.a_hat
            d["b_hat"] = self.b_hat
        return d


def run_trial(config: ExperimentConfig, index: int) -> TrialRecord:
    params = config.params
    rng = trial_rng(config.master_seed, index, config.stream)
    if params.is_null and not config.with_overlap:
        sigma = None
        G = sample_er(params.n, params.p_hat, rng)
    else:
        sigma = sample_labels(params.n, rng)
        G = sample_sbm(params, sigma, rng)
    p_av = params.p_hat if config.centering == "model" else edge_density(G)
    seed = trial_seed(config.master_seed, index, config.stream)
    rec = TrialRecord(trial_index=index, seed=seed, n_edges=G.n_edges)
    for k in config.ks:
        rec.stats[k] = signed_cycle_fast(G, p_av, k)
    if config.with_overlap:
        rec.overlap = abs(overlap(sigma, spectral_labels(G)))
    if config.estimate_k is not None:
        est = estimate_ab(G, config.estimate_k)
        rec.a_hat, rec.b_hat = est.a_hat, est.b_hat
    return rec


def _run_chunk(args):
    config, indices = args
    return [run_trial(config, i) for i in indices]


def run_trials(config: ExperimentConfig, workers: int = 1, indices=None) -> list[TrialRecord]:
    """All trial records, sorted by trial index."""
    if indices is None:
        indices = range(config.trials)
    indices = list(indices)
    if workers is None or workers <= 0:
        workers = os.cpu_count() or 1
    if workers == 1 or len(indices) < 2:
        records = [run_trial(config, i) for i in indices]
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, [(config, c) for c in chunks]) for r in part]
    return sorted(records, key=lambda r: r.trial_index)


# --- aggregation -----------------------------------------------------------

@dataclass
class MomentAccumulator:
    """Exact power sums (rationals), so merging partial runs is associative and commutative."""

    count: int = 0
    s1: Fraction = Fraction(0)
    s2: Fraction = Fraction(0)
    s3: Fraction = Fraction(0)
    s4: Fraction = Fraction(0)

    def add(self, x: float) -> "MomentAccumulator":
        f = Fraction(float(x))
        f2 = f * f
        self.count += 1
        self.s1 += f
        self.s2 += f2
        self.s3 += f2 * f
        self.s4 += f2 * f2
        return self

    @classmethod
    def from_values(cls, values) -> "MomentAccumulator":
        acc = cls()
        for v in values:
            acc.add(v)
        return acc

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        return MomentAccumulator(self.count + other.count, self.s1 + other.s1, self.s2 + other.s2,
                                 self.s3 + other.s3, self.s4 + other.s4)

    def summary(self) -> dict:
        n = self.count
        if n == 0:
            return {"count": 0}
        mean = self.s1 / n
        m2 = self.s2 / n - mean**2
        m3 = self.s3 / n - 3 * mean * self.s2 / n + 2 * mean**3
        m4 = self.s4 / n - 4 * mean * self.s3 / n + 6 * mean**2 * self.s2 / n - 3 * mean**4
        out = {"count": n, "mean": float(mean)}
        out["var"] = float(m2 * n / (n - 1)) if n > 1 else 0.0
        if m2 > 0:
            out["skew"] = float(m3) / float(m2) ** 1.5
            out["kurtosis"] = float(m4 / m2**2)
        return out

    def __eq__(self, other):
        if not isinstance(other, MomentAccumulator):
            return NotImplemented
        return (self.count, self.s1, self.s2, self.s3, self.s4) == (
            other.count, other.s1, other.s2, other.s3, other.s4)


# --- diagnostics -----------------------------------------------------------

@dataclass(frozen=True)
class NormalityReport:
    count: int
    mean: float
    var: float
    ks: float
    skew: float
    kurtosis: float
    mu: float
    sigma2: float

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def normality_check(samples, mu: float, sigma2: float) -> NormalityReport:
    """KS distance to N(mu, sigma2) plus moment summaries."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("need at least one sample")
    if sigma2 <= 0:
        raise ValueError("target variance must be positive")
    ks = float(stats.kstest(x, "norm", args=(mu, math.sqrt(sigma2))).statistic)
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    if x.size > 1 and x.std() > 0:
        skew = float(stats.skew(x))
        kurt = float(stats.kurtosis(x, fisher=False))
    else:
        skew, kurt = 0.0, math.nan
    return NormalityReport(count=int(x.size), mean=float(x.mean()), var=var, ks=ks,
                           skew=skew, kurtosis=kurt, mu=float(mu), sigma2=float(sigma2))


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    se: float

    def within(self, target: float, n_se: float = 4.0) -> bool:
        return abs(self.value - target) < n_se * self.se

    def as_dict(self) -> dict:
        return {"value": self.value, "se": self.se}


def cross_moment_check(x, y) -> MomentEstimate:
    """Empirical covariance of paired samples and its standard error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two paired sample vectors of equal length >= 2")
    prod = (x - x.mean()) * (y - y.mean())
    cov = float(prod.sum() / (x.size - 1))
    se = float(prod.std(ddof=1) / math.sqrt(x.size))
    return MomentEstimate(cov, se)


def wick_fourth_moment_check(samples, k: int | None = None) -> MomentEstimate:
    """``E[(C / sqrt(2k))**4]`` with its standard error; 3 for a standard Gaussian.

    ``k=None`` treats the samples as already standardized.
    """
    x = np.asarray(samples, dtype=np.float64)
    if k is not None:
        x = x / math.sqrt(2.0 * k)
    x4 = x**4
    se = float(x4.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return MomentEstimate(float(x4.mean()), se)
