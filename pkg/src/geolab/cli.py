"""Command-line front end.

Four subcommands wrap the library pipelines:

* ``geolab lewis``       solve + certify a Lewis-type basis
* ``geolab embed``       build the S_p -> S_q embedding, optional q-sweep
* ``geolab convexity``   Markov/diamond convexity sweeps over graph levels
* ``geolab certificate`` end-to-end dimension lower-bound certificate

Every run writes its data files plus a ``manifest.json`` into ``--out``.
Options may come from a ``key=value`` config file (``--config``); explicit
flags win over the file, the file wins over built-in defaults.  With
``--no-timestamp`` a rerun with the same config and seed is byte-identical.

Exit codes: 0 success, 1 a certified check failed, 2 usage error,
3 resource budget exceeded.  ``GEOLAB_THREADS`` caps sweep parallelism.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .convexity import (
    diamond_convexity_ratio,
    impossibility_certificate,
    laakso_canonical_chain,
    markov_convexity_ratio,
)
from .embedding import build_embedding, theorem_bound
from .errors import GeolabError
from .graphs import EDGE_BUDGET_DEFAULT, diamond, laakso, shortest_path_metric
from .lewis import SolverConfig, SubspaceBasis, certify_lewis, solve_lewis
from .matio import read_matrix_json, read_matrix_text
from .svg import line_plot

DEFAULTS = {
    "seed": 0,
    "tol": 1e-8,
    "out": "geolab_out",
    "format": "json,csv",
    "budget_edges": EDGE_BUDGET_DEFAULT,
    "no_timestamp": False,
    "config": None,
    "p": 1.0,
    "q": 2.0,
    "q_sweep": None,
    "k": 3,
    "m": 4,
    "diag": False,
    "basis": None,
    "mode": "fixed_point",
    "max_iters": 10_000,
    "eps": 0.01,
    "sample_size": 2000,
    "kmax": 3,
    "kind": "both",
    "alpha": 1.0,
}

INT_KEYS = {"seed", "budget_edges", "k", "m", "max_iters", "sample_size", "kmax"}
FLOAT_KEYS = {"tol", "p", "q", "eps", "alpha"}
BOOL_KEYS = {"no_timestamp", "diag"}
FORMATS = {"json", "csv", "svg"}


def _coerce(key, text):
    if key in BOOL_KEYS:
        return text.strip().lower() in ("1", "true", "yes", "on")
    if key in INT_KEYS:
        return int(text)
    if key in FLOAT_KEYS:
        return float(text)
    return text.strip()


def _read_config_file(path):
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise GeolabError(f"cannot read config file {path}: {exc}")
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GeolabError(f"config line is not key=value: {raw!r}")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _resolve(args, keys, overrides=None):
    """Merge CLI flags > config file > defaults for the listed keys."""
    file_values = {}
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
    base = dict(DEFAULTS)
    if overrides:
        base.update(overrides)
    cfg = {}
    for key in keys:
        cli = getattr(args, key, None)
        if cli is not None:
            cfg[key] = cli
        elif key in file_values:
            cfg[key] = _coerce(key, file_values[key])
        else:
            cfg[key] = base[key]
    return cfg


def _formats(cfg, parser):
    tokens = {t.strip() for t in str(cfg["format"]).split(",") if t.strip()}
    bad = tokens - FORMATS
    if bad or not tokens:
        parser.error(f"--format accepts a comma list from {sorted(FORMATS)}")
    return tokens


def _write_atomic(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_manifest(out_dir, command, cfg, files, passed, failed,
                    no_timestamp, t_start):
    manifest = {
        "tool": "geolab",
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items()) if k != "config"},
        "seed": int(cfg.get("seed", 0)),
        "files": sorted(files),
        "checks": {"passed": int(passed), "failed": int(failed)},
    }
    if not no_timestamp:
        manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
        manifest["wall_time_s"] = round(time.monotonic() - t_start, 3)
    _write_atomic(Path(out_dir) / "manifest.json", _dump_json(manifest))


def _max_workers(n_tasks):
    cap = os.environ.get("GEOLAB_THREADS")
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise GeolabError(f"GEOLAB_THREADS must be an integer, got {cap!r}")
        return max(1, min(cap, n_tasks))
    return max(1, min(os.cpu_count() or 1, n_tasks))


def _load_basis(cfg):
    """Basis from files, the diagonal fixture, or a seeded random draw."""
    p = cfg["p"]
    if cfg.get("basis"):
        mats = []
        for path in cfg["basis"]:
            loader = read_matrix_json if str(path).endswith(".json") else read_matrix_text
            mats.append(loader(path))
        return SubspaceBasis(p, np.stack(mats))
    k = int(cfg["k"])
    if cfg.get("diag"):
        elements = np.zeros((k, k, k))
        for i in range(k):
            elements[i, i, i] = 1.0
        return SubspaceBasis(p, elements)
    m = int(cfg["m"])
    rng = np.random.default_rng(int(cfg["seed"]))
    return SubspaceBasis(p, rng.standard_normal((k, m, m)))


def cmd_lewis(args, parser):
    cfg = _resolve(args, ["seed", "tol", "out", "format", "no_timestamp",
                          "config", "p", "k", "m", "diag", "basis", "mode",
                          "max_iters"])
    t0 = time.monotonic()
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    basis = _load_basis(cfg)
    config = SolverConfig(tol=float(cfg["tol"]), max_iters=int(cfg["max_iters"]),
                          mode=str(cfg["mode"]), seed=int(cfg["seed"]))
    cert = solve_lewis(basis, config)
    recheck = certify_lewis(cert)
    doc = cert.to_json_dict()
    doc["recomputed_gram_residual"] = recheck["gram_residual"]
    doc["recomputed_trace_residual"] = recheck["trace_residual"]
    _write_atomic(out_dir / "lewis_certificate.json", _dump_json(doc))
    failed = sum(1 for v in recheck.values() if not v <= float(cfg["tol"]))
    _write_manifest(out_dir, "lewis", cfg, ["lewis_certificate.json"],
                    passed=2 - failed, failed=failed,
                    no_timestamp=cfg["no_timestamp"], t_start=t0)
    print(f"lewis: gram_residual={recheck['gram_residual']:.3e} "
          f"trace_residual={recheck['trace_residual']:.3e} "
          f"iters={cert.n_iter}")
    return 1 if failed else 0


def _parse_q_sweep(text, parser):
    parts = text.split(":")
    if len(parts) != 3:
        parser.error("--q-sweep must be lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        parser.error("--q-sweep must be lo:hi:count with numeric entries")
    if count < 1 or hi < lo:
        parser.error("--q-sweep needs hi >= lo and count >= 1")
    if count == 1:
        return [lo]
    return [lo + i * (hi - lo) / (count - 1) for i in range(count)]


def cmd_embed(args, parser):
    cfg = _resolve(args, ["seed", "tol", "out", "format", "no_timestamp",
                          "config", "p", "q", "q_sweep", "k", "m", "diag",
                          "basis", "mode", "max_iters", "eps", "sample_size"],
                   overrides={"tol": 1e-10})
    formats = _formats(cfg, parser)
    t0 = time.monotonic()
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    basis = _load_basis(cfg)
    qs = (_parse_q_sweep(str(cfg["q_sweep"]), parser)
          if cfg.get("q_sweep") else [float(cfg["q"])])
    solver = SolverConfig(tol=float(cfg["tol"]), max_iters=int(cfg["max_iters"]),
                          mode=str(cfg["mode"]), seed=int(cfg["seed"]))

    def build_one(q):
        return build_embedding(basis, q, solver=solver, eps=float(cfg["eps"]),
                               sample_size=int(cfg["sample_size"]),
                               seed=int(cfg["seed"]))

    workers = _max_workers(len(qs))
    if workers == 1:
        results = [build_one(q) for q in qs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build_one, qs))

    files = []
    rows = []
    violations = 0
    for q, (_, cert) in zip(qs, results):
        rows.append((q, cert.empirical_distortion, theorem_bound(basis.p, q, basis.k)))
        violations += cert.violations
    if "json" in formats:
        _write_atomic(out_dir / "embed_report.json",
                      _dump_json(results[-1][1].to_json_dict()))
        files.append("embed_report.json")
    if "csv" in formats:
        lines = ["q,empirical_distortion,theorem_bound"]
        lines += [f"{q:.12g},{e:.12g},{b:.12g}" for q, e, b in rows]
        _write_atomic(out_dir / "embed_sweep.csv", "\n".join(lines) + "\n")
        files.append("embed_sweep.csv")
    if "svg" in formats:
        xs = [r[0] for r in rows]
        svg = line_plot(
            [("empirical", xs, [r[1] for r in rows]),
             ("certified bound", xs, [r[2] for r in rows])],
            title=f"distortion vs q (p={basis.p:g}, k={basis.k})",
            xlabel="q", ylabel="distortion")
        _write_atomic(out_dir / "embed_sweep.svg", svg)
        files.append("embed_sweep.svg")
    n_checks = sum(cert.sample_size for _, cert in results)
    _write_manifest(out_dir, "embed", cfg, files,
                    passed=n_checks - violations, failed=violations,
                    no_timestamp=cfg["no_timestamp"], t_start=t0)
    for q, e, b in rows:
        print(f"embed: q={q:.4g} empirical={e:.6g} bound={b:.6g}")
    return 1 if violations else 0


def cmd_convexity(args, parser):
    cfg = _resolve(args, ["seed", "tol", "out", "format", "no_timestamp",
                          "config", "kmax", "kind", "budget_edges"])
    formats = _formats(cfg, parser)
    if cfg["kind"] not in ("laakso", "diamond", "both"):
        parser.error(f"invalid kind {cfg['kind']!r}")
    t0 = time.monotonic()
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    kmax = int(cfg["kmax"])
    budget = int(cfg["budget_edges"])

    laakso_rows = []
    if cfg["kind"] in ("laakso", "both"):
        for k in range(2, kmax + 1):
            chain, pmap = laakso_canonical_chain(k, edge_budget=budget)
            metric = shortest_path_metric(laakso(k, edge_budget=budget))
            report = markov_convexity_ratio(chain, pmap, metric)
            laakso_rows.append({
                "k": k, "n": chain.n_states, "lhs": report.lhs,
                "rhs": report.rhs, "pi2_lower": report.pi2_lower,
                "error_bound": report.truncation_error_bound,
            })
    diamond_rows = []
    if cfg["kind"] in ("diamond", "both"):
        for k in range(2, kmax + 1):
            g = diamond(k, edge_budget=budget)
            metric = shortest_path_metric(g)
            res = diamond_convexity_ratio(np.arange(g.n), g, metric)
            diamond_rows.append({"k": k, "lhs": res["lhs"], "rhs": res["rhs"],
                                 "ratio": res["ratio"]})

    files = []
    if "json" in formats:
        _write_atomic(out_dir / "convexity_report.json",
                      _dump_json({"laakso": laakso_rows, "diamond": diamond_rows}))
        files.append("convexity_report.json")
    if "csv" in formats:
        lines = ["k,n,lhs,rhs,pi2_lower,error_bound"]
        lines += [
            f"{r['k']},{r['n']},{r['lhs']:.12g},{r['rhs']:.12g},"
            f"{r['pi2_lower']:.12g},{r['error_bound']:.12g}"
            for r in laakso_rows
        ]
        _write_atomic(out_dir / "convexity_laakso.csv", "\n".join(lines) + "\n")
        files.append("convexity_laakso.csv")
        lines = ["k,lhs,rhs,ratio"]
        lines += [
            f"{r['k']},{r['lhs']:.12g},{r['rhs']:.12g},{r['ratio']:.12g}"
            for r in diamond_rows
        ]
        _write_atomic(out_dir / "convexity_diamond.csv", "\n".join(lines) + "\n")
        files.append("convexity_diamond.csv")
    if "svg" in formats and laakso_rows:
        xs = [math.sqrt(r["k"]) for r in laakso_rows]
        svg = line_plot(
            [("pi2_lower", xs, [r["pi2_lower"] for r in laakso_rows])],
            title="Markov 2-convexity growth", xlabel="sqrt(k)",
            ylabel="pi2_lower")
        _write_atomic(out_dir / "convexity_growth.svg", svg)
        files.append("convexity_growth.svg")
    _write_manifest(out_dir, "convexity", cfg, files,
                    passed=len(laakso_rows) + len(diamond_rows), failed=0,
                    no_timestamp=cfg["no_timestamp"], t_start=t0)
    for r in laakso_rows:
        print(f"convexity: L_{r['k']} pi2_lower={r['pi2_lower']:.6g}")
    for r in diamond_rows:
        print(f"convexity: D_{r['k']} ratio={r['ratio']:.6g}")
    return 0


def cmd_certificate(args, parser):
    cfg = _resolve(args, ["seed", "tol", "out", "format", "no_timestamp",
                          "config", "k", "alpha", "budget_edges"],
                   overrides={"k": None})
    if cfg["k"] is None:
        parser.error("--k is required for the certificate command")
    t0 = time.monotonic()
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    report = impossibility_certificate(int(cfg["k"]), float(cfg["alpha"]),
                                       edge_budget=int(cfg["budget_edges"]))
    _write_atomic(out_dir / "certificate.json", _dump_json(report))
    text = "\n".join([
        "dimension lower-bound certificate",
        "=================================",
        f"witness set: level-{report['k']} Laakso graph under its cut-based"
        f" l1 embedding ({report['n_points']} points)",
        f"measured Markov 2-convexity lower bound: pi = {report['pi2_lower']:.6g}",
        f"  (lhs = {report['lhs']:.6g}, rhs = {report['rhs']:.6g},"
        f" truncation error <= {report['truncation_error_bound']:.3g})",
        f"assumed embedding distortion: alpha = {report['alpha']:g}",
        "",
        report["statement"],
        "",
        f"numeric threshold: dim X >= {report['dim_threshold']:.6g}"
        f"  (log threshold {report['log_dim_threshold']:.6g},"
        f" optimised at q = {report['q_opt']:.4f})",
        f"equivalently {report['bound_form']} with"
        f" c_exponent = {report['c_exponent']:.6g}",
        "",
    ])
    _write_atomic(out_dir / "certificate.txt", text)
    _write_manifest(out_dir, "certificate", cfg,
                    ["certificate.json", "certificate.txt"],
                    passed=1, failed=0,
                    no_timestamp=cfg["no_timestamp"], t_start=t0)
    print(f"certificate: k={report['k']} pi2_lower={report['pi2_lower']:.6g} "
          f"dim_threshold={report['dim_threshold']:.6g}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--format", help="comma list from json,csv,svg")
    sub.add_argument("--no-timestamp", action="store_const", const=True,
                     dest="no_timestamp",
                     help="omit timestamp/wall time for byte-stable reruns")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geolab",
        description="Schatten-norm geometry toolkit: Lewis bases, "
                    "low-distortion embeddings, graph metrics, convexity "
                    "certificates.")
    parser.add_argument("--version", action="version",
                        version=f"geolab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("lewis", help="solve and certify a Lewis-type basis")
    _add_common(sp)
    sp.add_argument("--p", type=float, help="Schatten exponent of the subspace")
    sp.add_argument("--k", type=int, help="subspace dimension (random basis)")
    sp.add_argument("--m", type=int, help="matrix size (random basis)")
    sp.add_argument("--diag", action="store_const", const=True,
                    help="use the diagonal matrix-unit fixture basis")
    sp.add_argument("--basis", nargs="+", metavar="FILE",
                    help="matrix files (text or .json) forming the basis")
    sp.add_argument("--mode", choices=["fixed_point", "gradient_ascent"])
    sp.add_argument("--max-iters", type=int, dest="max_iters")
    sp.set_defaults(func=cmd_lewis)

    sp = subs.add_parser("embed", help="build and certify an S_p -> S_q map")
    _add_common(sp)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float, help="target exponent (single build)")
    sp.add_argument("--q-sweep", dest="q_sweep", metavar="LO:HI:COUNT",
                    help="sweep target exponents, e.g. 1.1:2:10")
    sp.add_argument("--k", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--diag", action="store_const", const=True)
    sp.add_argument("--basis", nargs="+", metavar="FILE")
    sp.add_argument("--mode", choices=["fixed_point", "gradient_ascent"])
    sp.add_argument("--max-iters", type=int, dest="max_iters")
    sp.add_argument("--eps", type=float, help="truncation tolerance")
    sp.add_argument("--sample-size", type=int, dest="sample_size")
    sp.set_defaults(func=cmd_embed)

    sp = subs.add_parser("convexity",
                         help="convexity sweeps over graph levels")
    _add_common(sp)
    sp.add_argument("--kmax", type=int, help="largest level (sweeps start at 2)")
    sp.add_argument("--kind", choices=["laakso", "diamond", "both"])
    sp.add_argument("--budget-edges", type=int, dest="budget_edges")
    sp.set_defaults(func=cmd_convexity)

    sp = subs.add_parser("certificate",
                         help="end-to-end dimension lower-bound certificate")
    _add_common(sp)
    sp.add_argument("--k", type=int, help="Laakso level of the witness set")
    sp.add_argument("--alpha", type=float, help="assumed embedding distortion")
    sp.add_argument("--budget-edges", type=int, dest="budget_edges")
    sp.set_defaults(func=cmd_certificate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except GeolabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
