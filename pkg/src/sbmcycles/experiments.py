"""Named experiment presets.

Each preset takes a dict of resolved options and returns an
:class:`ExperimentResult` holding per-trial records and one summary.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .graph_model import ModelParams
from .inference import (
    asymptotic_power, classify_regime, detection_test, detection_threshold, summarize_overlaps,
)
from .io import dumps, write_csv, write_jsonl
from .likelihood import exact_second_moment, limit_second_moment
from .montecarlo import (
    ExperimentConfig, MomentAccumulator, cross_moment_check, normality_check, run_trials,
    wick_fourth_moment_check,
)
from .signed_cycles import exact_er_variance, theoretical_mean

OPTION_TYPES = {
    "n": int, "p_hat": float, "c": float, "a": float, "b": float, "t": float,
    "ns": "int_list", "cs": "float_list", "ks": "int_list", "k": int,
    "trials": int, "seed": int, "alpha": float, "centering": str,
}

PRESET_DEFAULTS = {
    "clt-null": {"n": 500, "p_hat": 0.1, "ks": [3, 4], "trials": 2000},
    "clt-shift": {"n": 500, "p_hat": 0.1, "c": 1.0, "ks": [3], "trials": 2000},
    "second-moment": {"ns": [100, 500, 2000], "t": 0.5},
    "threshold-sweep": {"n": 2000, "p_hat": 0.05, "cs": [0.5, 1.0, 1.5, 2.5, 4.0, 8.0],
                        "k": 3, "alpha": 0.05, "trials": 200},
    "estimator": {"n": 3000, "a": 24.0, "b": 8.0, "k": 3, "trials": 100},
    "overlap": {"n": 2000, "a": 7.0, "b": 5.0, "trials": 50},
}
PRESETS = tuple(PRESET_DEFAULTS)


class UnknownPreset(ValueError):
    pass


def coerce_option(key: str, value):
    kind = OPTION_TYPES.get(key)
    if kind is None:
        raise ValueError(f"unknown option {key!r}; valid options: {', '.join(sorted(OPTION_TYPES))}")
    if kind == "int_list":
        vals = value if isinstance(value, (list, tuple)) else str(value).split(",")
        return [int(v) for v in vals]
    if kind == "float_list":
        vals = value if isinstance(value, (list, tuple)) else str(value).split(",")
        return [float(v) for v in vals]
    return kind(value)


def resolve_options(preset: str, overrides: dict) -> dict:
    if preset not in PRESET_DEFAULTS:
        raise UnknownPreset(f"unknown preset {preset!r}; valid presets: {', '.join(PRESETS)}")
    opts = dict(PRESET_DEFAULTS[preset])
    opts["seed"] = 0
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "n" and preset == "second-moment":
            opts["ns"] = [int(value)]
            continue
        opts[key] = coerce_option(key, value)
    return opts


@dataclass
class ExperimentResult:
    preset: str
    options: dict
    records: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {"record": "config", "preset": self.preset, "version": __version__,
                "seed": self.options.get("seed"), "options": self.options}

    def jsonl_lines(self) -> list[str]:
        lines = [dumps(self.header())]
        lines += [dumps({"record": "trial", **r}) for r in self.records]
        return lines

    def write(self, out_dir) -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "jsonl": out_dir / f"{self.preset}.jsonl",
            "summary": out_dir / f"{self.preset}.summary.json",
            "csv": out_dir / f"{self.preset}.csv",
        }
        write_jsonl([self.header()] + [{"record": "trial", **r} for r in self.records], paths["jsonl"])
        paths["summary"].write_text(dumps({**self.header(), "record": "summary", "summary": self.summary}) + "\n")
        rows = self.records or self.summary.get("rows", [])
        write_csv(rows, paths["csv"], header_comment=f"preset={self.preset} seed={self.options.get('seed')} version={__version__}")
        return paths


def _null_moments(records, n: int, ks) -> dict:
    out = {}
    samples = {k: np.array([r[f"C{k}"] for r in records]) for k in ks}
    for k in ks:
        out[f"C{k}"] = {
            "normality": normality_check(samples[k], 0.0, 2.0 * k).as_dict(),
            "exact_var": exact_er_variance(n, k),
            "fourth_moment": wick_fourth_moment_check(samples[k], k).as_dict(),
            "moments": MomentAccumulator.from_values(samples[k]).summary(),
        }
    out["cross"] = {
        f"C{k1}xC{k2}": cross_moment_check(samples[k1], samples[k2]).as_dict()
        for k1, k2 in itertools.combinations(ks, 2)
    }
    return out


def run_clt_null(opts: dict, workers: int = 1) -> ExperimentResult:
    params = ModelParams.er(opts["n"], opts["p_hat"])
    cfg = ExperimentConfig(params, trials=opts["trials"], ks=tuple(opts["ks"]), master_seed=opts["seed"])
    recs = [{"n": params.n, **r.as_dict()} for r in run_trials(cfg, workers)]
    return ExperimentResult("clt-null", opts, recs, _null_moments(recs, params.n, cfg.ks))


def run_clt_shift(opts: dict, workers: int = 1) -> ExperimentResult:
    params = ModelParams.from_c(opts["n"], opts["c"], opts["p_hat"])
    cfg = ExperimentConfig(params, trials=opts["trials"], ks=tuple(opts["ks"]), master_seed=opts["seed"])
    recs = [{"n": params.n, "a": params.a, "b": params.b, **r.as_dict()} for r in run_trials(cfg, workers)]
    summary = {"model": params.as_dict()}
    for k in cfg.ks:
        mu = theoretical_mean(params, k)
        x = np.array([r[f"C{k}"] for r in recs])
        rep = normality_check(x, mu, 2.0 * k)
        summary[f"C{k}"] = {
            "mu": mu, "normality": rep.as_dict(),
            "mean_se": math.sqrt(2.0 * k / x.size),
        }
    return ExperimentResult("clt-shift", opts, recs, summary)


def run_second_moment(opts: dict, workers: int = 1) -> ExperimentResult:
    t = opts["t"]
    limit = limit_second_moment(t) if t < 1 else math.inf
    rows = []
    for n in opts["ns"]:
        exact = exact_second_moment(n, t)
        rows.append({"n": n, "t": t, "exact": exact, "limit": limit, "abs_err": abs(exact - limit)})
    return ExperimentResult("second-moment", opts, rows, {"rows": rows})


def _crossing(cs, rates, level=0.5):
    for (c0, r0), (c1, r1) in zip(zip(cs, rates), zip(cs[1:], rates[1:])):
        if r0 < level <= r1:
            return c0 + (level - r0) * (c1 - c0) / (r1 - r0)
    return None


def run_threshold_sweep(opts: dict, workers: int = 1) -> ExperimentResult:
    n, p_hat, k, alpha = opts["n"], opts["p_hat"], opts["k"], opts["alpha"]
    thr = detection_threshold(k, alpha)
    recs, rows = [], []
    for point, c in enumerate(opts["cs"]):
        params = ModelParams.from_c(n, c, p_hat)
        cfg = ExperimentConfig(params, trials=opts["trials"], ks=(k,), master_seed=opts["seed"], stream=point)
        rejections = 0
        for r in run_trials(cfg, workers):
            stat = r.stats[k]
            decision = detection_test(stat, k, alpha)
            rejections += decision.value == "sbm_like"
            recs.append({"c": c, "trial": r.trial_index, "seed": r.seed, "n": n, "a": params.a,
                         "b": params.b, "k": k, "stat": stat, "decision": decision.value})
        rate = rejections / cfg.trials
        mu = theoretical_mean(params, k)
        rows.append({
            "c": c, "t": params.t, **{f"regime_{key}": v for key, v in classify_regime(params).as_dict().items()},
            "rejection_rate": rate, "rate_se": math.sqrt(max(rate * (1 - rate), 1e-12) / cfg.trials),
            "mu": mu, "asymptotic_power": asymptotic_power(mu, k, alpha),
        })
    summary = {
        "k": k, "alpha": alpha, "threshold": thr, "rows": rows,
        "crossing_c": _crossing(opts["cs"], [r["rejection_rate"] for r in rows]),
        "contiguity_c": 2.0 * (1.0 - p_hat),
    }
    return ExperimentResult("threshold-sweep", opts, recs, summary)


def run_estimator(opts: dict, workers: int = 1) -> ExperimentResult:
    params = ModelParams.from_ab(opts["n"], opts["a"], opts["b"])
    k = opts["k"]
    cfg = ExperimentConfig(params, trials=opts["trials"], ks=(), master_seed=opts["seed"], estimate_k=k)
    a, b = params.a, params.b
    recs = []
    for r in run_trials(cfg, workers):
        recs.append({"trial": r.trial_index, "seed": r.seed, "n": params.n, "a": a, "b": b, "k": k,
                     "a_hat": r.a_hat, "b_hat": r.b_hat})
    err_a = np.array([abs(r["a_hat"] - a) / (a - b) for r in recs])
    err_b = np.array([abs(r["b_hat"] - b) / (a - b) for r in recs])
    summary = {
        "median_rel_err_a": float(np.median(err_a)), "median_rel_err_b": float(np.median(err_b)),
        "frac_within_0.15_a": float(np.mean(err_a < 0.15)), "frac_within_0.15_b": float(np.mean(err_b < 0.15)),
        "mean_a_hat": float(np.mean([r["a_hat"] for r in recs])),
        "mean_b_hat": float(np.mean([r["b_hat"] for r in recs])),
    }
    return ExperimentResult("estimator", opts, recs, summary)


def run_overlap(opts: dict, workers: int = 1) -> ExperimentResult:
    params = ModelParams.from_ab(opts["n"], opts["a"], opts["b"])
    cfg = ExperimentConfig(params, trials=opts["trials"], ks=(), master_seed=opts["seed"], with_overlap=True)
    recs = [{"trial": r.trial_index, "seed": r.seed, "n": params.n, "a": params.a, "b": params.b,
             "ov_abs": r.overlap} for r in run_trials(cfg, workers)]
    summary = {"c": params.c, **classify_regime(params).as_dict(),
               **summarize_overlaps([r["ov_abs"] for r in recs])}
    return ExperimentResult("overlap", opts, recs, summary)


RUNNERS = {
    "clt-null": run_clt_null,
    "clt-shift": run_clt_shift,
    "second-moment": run_second_moment,
    "threshold-sweep": run_threshold_sweep,
    "estimator": run_estimator,
    "overlap": run_overlap,
}


def run_preset(preset: str, overrides: dict | None = None, workers: int = 1) -> ExperimentResult:
    opts = resolve_options(preset, overrides or {})
    return RUNNERS[preset](opts, workers)
