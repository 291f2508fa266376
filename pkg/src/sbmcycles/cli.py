"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 selftest/invariant failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import PRESETS, UnknownPreset, run_preset
from .graph_model import (
    ModelParams, edge_density, overlap, sample_labels, sample_sbm,
)
from .inference import detection_test, detection_threshold, estimate_ab, spectral_labels
from .io import dumps, parse_keyvalue, read_comments, read_edgelist, read_labels, write_edgelist, write_labels
from .likelihood import exact_second_moment, limit_second_moment
from .seeds import SEED_ENV, default_seed
from .selftest import corrupted_fast_terms, run_selftest
from .signed_cycles import signed_cycle

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(record: dict, out=None) -> None:
    print(dumps(record), file=out or sys.stdout)


def _config_record(command: str, **resolved) -> dict:
    return {"record": "config", "command": command, "version": __version__, **resolved}


# --- model / graph arguments ----------------------------------------------

def _add_model_args(p: argparse.ArgumentParser, graph_input: bool = True) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--n", type=int, help="number of nodes")
    g.add_argument("--a", type=float, help="within-community expected degree scale (p = a/n)")
    g.add_argument("--p", type=float, help="within-community edge probability")
    g.add_argument("--b", type=float, help="between-community scale (q = b/n)")
    g.add_argument("--q", type=float, help="between-community edge probability")
    g.add_argument("--p-hat", type=float, help="Erdos-Renyi density (null model)")
    g.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")
    if graph_input:
        g.add_argument("--graph", type=Path, help="read the graph from an edge-list file instead")


def _params_from_args(args) -> ModelParams:
    if args.n is None:
        raise UsageError("--n is required")
    if args.p_hat is not None:
        if any(v is not None for v in (args.a, args.p, args.b, args.q)):
            raise UsageError("--p-hat cannot be combined with --a/--p/--b/--q")
        return ModelParams.er(args.n, args.p_hat)
    if args.a is not None and args.p is not None:
        raise UsageError("give either --a or --p, not both")
    if args.b is not None and args.q is not None:
        raise UsageError("give either --b or --q, not both")
    if (args.a is None and args.p is None) or (args.b is None and args.q is None):
        raise UsageError("model needs --a/--p and --b/--q (or --p-hat)")
    p = args.p if args.p is not None else args.a / args.n
    q = args.q if args.q is not None else args.b / args.n
    try:
        return ModelParams(args.n, p, q)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _seed(args) -> int:
    return args.seed if args.seed is not None else default_seed()


def _load_or_sample(args, need_labels: bool = False):
    """Return ``(G, params or None, sigma or None, seed or None)``."""
    if getattr(args, "graph", None) is not None:
        if any(v is not None for v in (args.n, args.a, args.p, args.b, args.q, args.p_hat)):
            raise UsageError("--graph cannot be combined with model flags")
        G = read_edgelist(args.graph)
        seed = read_comments(args.graph).get("seed")
        sigma = None
        if need_labels:
            if args.labels is None:
                raise UsageError("--graph needs --labels here")
            sigma = read_labels(args.labels)
        return G, None, sigma, (int(seed) if seed is not None else None)
    params = _params_from_args(args)
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    sigma = sample_labels(params.n, rng)
    G = sample_sbm(params, sigma, rng)
    return G, params, sigma, seed


def _model_fields(params: ModelParams | None) -> dict:
    if params is None:
        return {"a": None, "b": None}
    return {"a": params.a, "b": params.b}


# --- subcommands -----------------------------------------------------------

def cmd_sample(args) -> int:
    params = _params_from_args(args)
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    sigma = sample_labels(params.n, rng, balanced=args.balanced)
    G = sample_sbm(params, sigma, rng)
    prefix = Path(args.out)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    meta = {"seed": seed, "version": __version__, "p": repr(params.p), "q": repr(params.q)}
    edges_path = prefix.with_name(prefix.name + ".edges")
    labels_path = prefix.with_name(prefix.name + ".labels")
    write_edgelist(G, edges_path, meta)
    write_labels(sigma, labels_path, meta)
    _emit(_config_record("sample", seed=seed, model=params.as_dict(), balanced=args.balanced,
                         edges=str(edges_path), labels=str(labels_path), n_edges=G.n_edges))
    return EXIT_OK


def cmd_stat(args) -> int:
    G, params, _, seed = _load_or_sample(args)
    if args.plugin and args.p_av is not None:
        raise UsageError("--plugin and --p-av are mutually exclusive")
    if args.p_av is not None:
        p_av, centering = args.p_av, "given"
    elif args.plugin or params is None:
        p_av, centering = edge_density(G), "plugin"
    else:
        p_av, centering = params.p_hat, "model"
    _emit(_config_record("stat", seed=seed, n=G.n, ks=args.k, method=args.method,
                         p_av=p_av, centering=centering, model=params.as_dict() if params else None))
    for k in args.k:
        st = signed_cycle(G, k, p_av=p_av, method=args.method)
        _emit({"record": "result", "n": G.n, "k": k, "p_av": p_av, "method": st.method.value,
               "value": st.value, "seed": seed, "centering": centering})
    return EXIT_OK


def cmd_moment(args) -> int:
    _emit(_config_record("moment", n=args.n, t=args.t))
    for n in args.n:
        exact = exact_second_moment(n, args.t)
        limit = limit_second_moment(args.t) if args.t < 1 else None
        _emit({"record": "result", "n": n, "t": args.t, "exact": exact, "limit": limit,
               "abs_err": abs(exact - limit) if limit is not None else None})
    return EXIT_OK


def cmd_detect(args) -> int:
    G, params, _, seed = _load_or_sample(args)
    p_av = params.p_hat if params is not None else edge_density(G)
    _emit(_config_record("detect", seed=seed, k=args.k, alpha=args.alpha,
                         threshold=detection_threshold(args.k, args.alpha),
                         centering="model" if params else "plugin",
                         model=params.as_dict() if params else None))
    stat = signed_cycle(G, args.k, p_av=p_av).value
    decision = detection_test(stat, args.k, args.alpha)
    _emit({"record": "result", "seed": seed, "n": G.n, **_model_fields(params), "k": args.k,
           "stat": stat, "decision": decision.value})
    return EXIT_OK


def cmd_estimate(args) -> int:
    G, params, _, seed = _load_or_sample(args)
    _emit(_config_record("estimate", seed=seed, k=args.k, scale=args.scale,
                         model=params.as_dict() if params else None))
    est = estimate_ab(G, args.k, scale=args.scale)
    _emit({"record": "result", "seed": seed, "n": G.n, **_model_fields(params), "k": args.k,
           "stat": est.stat, "a_hat": est.a_hat, "b_hat": est.b_hat,
           "f_hat": est.f_hat, "d_hat": est.d_hat})
    return EXIT_OK


def cmd_recon(args) -> int:
    G, params, sigma, seed = _load_or_sample(args, need_labels=True)
    _emit(_config_record("recon", seed=seed, model=params.as_dict() if params else None))
    tau = spectral_labels(G)
    _emit({"record": "result", "seed": seed, "n": G.n, **_model_fields(params),
           "ov_abs": abs(overlap(sigma, tau))})
    return EXIT_OK


_OVERRIDE_KEYS = ("n", "t", "trials", "seed", "a", "b", "c", "p_hat", "k", "ks", "cs", "alpha", "ns")


def cmd_experiment(args) -> int:
    overrides = {}
    preset = args.preset
    if args.config is not None:
        try:
            kv = parse_keyvalue(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        file_preset = kv.pop("preset", None)
        if preset is None:
            preset = file_preset
        overrides.update(kv)
    if preset is None:
        raise UsageError(f"--preset or a config with preset=... is required; valid presets: {', '.join(PRESETS)}")
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if "seed" not in overrides:
        overrides["seed"] = default_seed()
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    try:
        result = run_preset(preset, overrides, workers=workers)
    except UnknownPreset as exc:
        raise UsageError(str(exc)) from exc
    if args.out is not None:
        paths = result.write(args.out)
        _emit({"record": "files", **{k: str(v) for k, v in paths.items()}})
    else:
        for line in result.jsonl_lines():
            print(line)
        _emit({"record": "summary", "preset": preset, "summary": result.summary})
    return EXIT_OK


def cmd_selftest(args) -> int:
    terms = corrupted_fast_terms() if args.corrupt_fast_coefficients else None
    results = run_selftest(terms)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"selftest failed: {', '.join(failed)}")
        return EXIT_FAILURE
    print("selftest passed")
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbmcycles", description="Signed cycles and detection in the two-block SBM.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("sample", help="sample labels and a graph, write edge-list and label files")
    _add_model_args(p, graph_input=False)
    p.add_argument("--out", default="graph", help="output prefix; writes PREFIX.edges and PREFIX.labels")
    p.add_argument("--balanced", action="store_true", help="exact bisection labels (non-canonical)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stat", help="signed-cycle statistics of one graph")
    _add_model_args(p)
    p.add_argument("--k", type=_int_list, default=[3], help="cycle lengths, comma separated")
    p.add_argument("--method", choices=["trace", "bruteforce"], default="trace")
    p.add_argument("--p-av", type=float, help="centering level (default: model p_hat)")
    p.add_argument("--plugin", action="store_true", help="center by the empirical density")
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("moment", help="exact and limiting second moment of the likelihood ratio")
    p.add_argument("--n", type=_int_list, required=True, help="node counts, comma separated")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("detect", help="signed-cycle test of Erdos-Renyi against the planted model")
    _add_model_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("estimate", help="estimate (a, b) from average degree and a signed cycle")
    _add_model_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--scale", choices=["fixed_k", "sqrt2k"], default="fixed_k")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("recon", help="spectral reconstruction overlap")
    _add_model_args(p)
    p.add_argument("--labels", type=Path, help="true labels for --graph input")
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("experiment", help="run an experiment preset")
    p.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    p.add_argument("--config", type=Path, help="flat key=value config file")
    p.add_argument("--out", type=Path, help="output directory (default: JSON lines on stdout)")
    p.add_argument("--workers", type=int, help="parallel worker processes (default: all cores)")
    p.add_argument("--n", type=int)
    p.add_argument("--ns", type=str)
    p.add_argument("--t", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--p-hat", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--ks", type=str)
    p.add_argument("--cs", type=str)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", help="run the small-n invariant suite")
    p.add_argument("--corrupt-fast-coefficients", action="store_true",
                   help="perturb the fast-path coefficient table (mutation check)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sbmcycles {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"sbmcycles {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
