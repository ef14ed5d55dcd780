"""Command-line interface: ``projuniform <subcommand> [flags]``.

Every JSON output embeds the tool version, the merged run configuration and
the seed.  Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError, ProjUniformError
from .formats import dumps, envelope, read_partition, read_points, rows_to_csv, write_partition, points_to_csv
from .jacobi import eigenvalue, jacobi_at_one, JacobiParams, multiplicity
from .measure import ball_measure, mean_distance, normalizer, surface_area
from .spaces import parse_space
from .streams import stream

COMMANDS = ("table", "measure", "gen", "variance", "discrepancy", "weyl", "classify", "invariance")


@dataclass
class RunConfig:
    command: str = ""
    space: str | None = None
    sampler: str = "iid"
    N: int | None = None
    kernel_N: int | None = None
    r: list | None = None
    n: str = "0..10"
    n_max: int = 20
    N_grid: list | None = None
    seed: int = 0
    reps: int | None = None
    tol: float | None = None
    M: int = 100_000
    method: str = "spectral"
    weight: str = "sin2r"
    restarts: int = 8
    max_iters: int = 3000
    input: str | None = None
    out: str | None = None
    format: str | None = None
    partition: str | None = None
    partition_out: str | None = None
    trace_out: str | None = None
    table_out: str | None = None


class UsageError(ValueError):
    pass


def parse_float_list(text) -> list[float]:
    """``"0.3,0.5"`` or ``"lo..hi:count"`` (evenly spaced, inclusive)."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if ".." in text and ":" in text:
        span, count = text.split(":")
        lo, hi = span.split("..")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(count))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_int_grid(text) -> list[int]:
    """``"16,32,64"`` or ``"16..512"`` (doubling)."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text).strip()
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        out = []
        while lo <= hi:
            out.append(lo)
            lo *= 2
        return out
    return [int(v) for v in text.split(",") if v.strip()]


def parse_range(text) -> range:
    text = str(text).strip()
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        return range(lo, hi + 1)
    return range(int(text), int(text) + 1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="JSON file with RunConfig fields; flags override it")
    a("--space", help="space as <letter><d>, e.g. C3, R4, H3, O3")
    a("--sampler", choices=["iid", "jittered", "harmonic", "maxdist", "degenerate"])
    a("--N", type=int, dest="N")
    a("--kernel-N", type=int, dest="kernel_N", help="spectral cutoff of the harmonic ensemble")
    a("--r", dest="r", help="radius or comma-separated radii")
    a("--r-grid", dest="r", help="radii: comma list or lo..hi:count")
    a("--n", dest="n", help="degree range for table, e.g. 0..5")
    a("--n-max", type=int, dest="n_max")
    a("--N-grid", dest="N_grid", help="sizes: comma list or lo..hi (doubling)")
    a("--seed", type=int)
    a("--reps", type=int)
    a("--tol", type=float)
    a("--M", type=int, dest="M", help="Monte Carlo centers for direct variance")
    a("--method", choices=["spectral", "direct", "both", "pairs"])
    a("--weight", choices=["sin2r", "flat"])
    a("--restarts", type=int)
    a("--max-iters", type=int, dest="max_iters")
    a("--in", dest="input")
    a("--out")
    a("--format", choices=["csv", "json"])
    a("--partition", help="partition JSON to reuse (jittered)")
    a("--partition-out", dest="partition_out")
    a("--trace-out", dest="trace_out")
    a("--table-out", dest="table_out", help="CSV table of (N, r, V, stderr)")
    a("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="projuniform", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"projuniform {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "table": "eigenvalues, multiplicities and P_n(1) by degree",
        "measure": "ball measures and sphere areas",
        "gen": "generate a point set",
        "variance": "number variance of a point file",
        "discrepancy": "L2 discrepancy and sum of distances of a point file",
        "weyl": "Weyl sums of a point file",
        "classify": "hyperuniformity regime classification for a sampler",
        "invariance": "fit the distance/discrepancy invariance constant",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], argument_default=argparse.SUPPRESS)
    return p


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    base = {}
    cfg_path = getattr(ns, "config", None)
    if cfg_path:
        base = json.loads(Path(cfg_path).read_text())
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    names = {f.name for f in fields(RunConfig)}
    merged = {}
    for key, val in base.items():
        key = key.replace("-", "_")
        if key == "in":
            key = "input"
        if key not in names:
            raise UsageError(f"unknown config key {key!r}")
        merged[key] = val
    for key, val in vars(ns).items():
        if key in names and val is not None:
            merged[key] = val
    merged["command"] = ns.command
    cfg = RunConfig(**merged)
    if cfg.r is not None:
        cfg.r = parse_float_list(cfg.r)
    if cfg.N_grid is not None:
        cfg.N_grid = parse_int_grid(cfg.N_grid)
    if not 0 <= cfg.seed < 2 ** 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(cfg: RunConfig, result) -> str:
    return dumps(envelope(asdict(cfg), result, cfg.seed)) + "\n"


def _need(cfg, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for '{cfg.command}'")


def _csv_comment(cfg: RunConfig) -> str:
    return f"projuniform {__version__} seed={cfg.seed} config={json.dumps(asdict(cfg), default=str)}"


# --- subcommands -------------------------------------------------------------

def cmd_table(cfg: RunConfig):
    _need(cfg, "space")
    params = parse_space(cfg.space)
    jp = JacobiParams.of(params)
    rows = [{"n": n, "lambda": str(eigenvalue(params, n)), "m": multiplicity(params, n),
             "p_at_one": float(jacobi_at_one(jp, n))} for n in parse_range(cfg.n)]
    if cfg.format == "json":
        return _json(cfg, {"space": params.name, "alpha": str(params.alpha), "beta": str(params.beta),
                           "D": params.D, "rows": rows})
    return rows_to_csv(rows, ["n", "lambda", "m", "p_at_one"])


def cmd_measure(cfg: RunConfig):
    _need(cfg, "space")
    params = parse_space(cfg.space)
    radii = cfg.r if cfg.r is not None else list(np.linspace(0, math.pi / 2, 17))
    rows = [{"r": float(r), "ball_measure": float(ball_measure(params, r)),
             "surface_area": float(surface_area(params, r))} for r in radii]
    if cfg.format == "json":
        return _json(cfg, {"space": params.name, "normalizer": normalizer(params),
                           "mean_distance": mean_distance(params), "rows": rows})
    return rows_to_csv(rows, ["r", "ball_measure", "surface_area"])


def cmd_gen(cfg: RunConfig):
    from .samplers import KernelSpec, fit_partition, sample_harmonic, sample_iid, sample_jittered
    from .samplers import sample_degenerate
    _need(cfg, "space")
    params = parse_space(cfg.space)
    rng = stream(cfg.seed, "gen", 0)
    extra = None
    if cfg.sampler == "harmonic":
        cutoff = cfg.kernel_N if cfg.kernel_N is not None else cfg.N
        if cutoff is None:
            raise UsageError("--kernel-N (or --N) is required for the harmonic sampler")
        X = sample_harmonic(KernelSpec.of(params, cutoff), rng)
    else:
        _need(cfg, "N")
        if cfg.sampler == "iid":
            X = sample_iid(params, cfg.N, rng)
        elif cfg.sampler == "degenerate":
            X = sample_degenerate(params, cfg.N, rng)
        elif cfg.sampler == "jittered":
            if cfg.partition:
                part = read_partition(cfg.partition, params)
                if part.N != cfg.N:
                    raise UsageError(f"partition has {part.N} cells, --N is {cfg.N}")
            else:
                part = fit_partition(params, cfg.N, None, stream(cfg.seed, "partition", cfg.N))
            if cfg.partition_out:
                write_partition(part, cfg.partition_out)
            X = sample_jittered(part, rng)
        else:
            from .maximize import OptimizerConfig, maximize_sum_distances
            X, trace = maximize_sum_distances(
                params, cfg.N, OptimizerConfig(max_iters=cfg.max_iters, restarts=cfg.restarts), cfg.seed)
            extra = trace
    if extra is not None:
        trace_path = cfg.trace_out or (str(Path(cfg.out).with_suffix(".trace.json")) if cfg.out else None)
        if trace_path:
            Path(trace_path).write_text(_json(cfg, extra.to_dict()))
    if cfg.format == "json":
        return _json(cfg, {"space": params.name, "N": X.N, "provenance": X.provenance,
                           "points": X.coords.reshape(X.N, -1)})
    return points_to_csv(X)


def _load_points(cfg):
    _need(cfg, "input")
    X = read_points(cfg.input)
    if cfg.space is not None and parse_space(cfg.space) != X.params:
        raise UsageError(f"--space {cfg.space} does not match the point file ({X.params.name})")
    return X


def cmd_variance(cfg: RunConfig):
    from .spectral import variance_curve, variance_direct, variance_pairs
    X = _load_points(cfg)
    _need(cfg, "r")
    rows, results = [], []
    spectral = variance_curve(X, cfg.r, cfg.tol) if cfg.method in ("spectral", "both") else [None] * len(cfg.r)
    for i, r in enumerate(cfg.r):
        entry = {"r": r}
        if spectral[i] is not None:
            entry["spectral"] = spectral[i].to_dict()
        if cfg.method in ("direct", "both"):
            entry["direct"] = variance_direct(X, r, cfg.M, stream(cfg.seed, "variance", i)).to_dict()
        if cfg.method == "pairs":
            entry["pairs"] = variance_pairs(X, r, cfg.tol).to_dict()
        if cfg.method == "both":
            diff = abs(entry["spectral"]["value"] - entry["direct"]["value"])
            allowed = 3 * entry["direct"]["error"] + entry["spectral"]["error"] + 1e-6
            entry["agreement"] = {"abs_diff": diff, "allowed": allowed, "agree": bool(diff <= allowed)}
        results.append(entry)
        for key in ("spectral", "direct", "pairs"):
            if key in entry:
                e = entry[key]
                rows.append({"N": X.N, "r": r, "V": e["value"], "stderr": e["error"], "method": e["method"]})
    if cfg.table_out:
        Path(cfg.table_out).write_text(rows_to_csv(rows, comment=_csv_comment(cfg)))
    if cfg.format == "csv":
        return rows_to_csv(rows)
    return _json(cfg, {"space": X.params.name, "N": X.N, "estimates": results})


def cmd_discrepancy(cfg: RunConfig):
    from .spectral import invariance_constant, l2_discrepancy_sq, sum_of_distances
    X = _load_points(cfg)
    est = l2_discrepancy_sq(X, cfg.weight, cfg.tol)
    out = {"space": X.params.name, "N": X.N, "weight": cfg.weight, "D2": est.value,
           "D": math.sqrt(est.value), "error": est.error, "n_terms": est.n_terms,
           "sum_of_distances": sum_of_distances(X), "mean_distance": mean_distance(X.params)}
    if cfg.weight == "sin2r":
        out["invariance_constant"] = invariance_constant(X.params)
    if cfg.format == "csv":
        return rows_to_csv([out])
    return _json(cfg, out)


def cmd_weyl(cfg: RunConfig):
    from .spectral import weyl_sums
    X = _load_points(cfg)
    prof = weyl_sums(X, cfg.n_max)
    rows = [{"n": n, "sum": float(prof.sums[n]), "normalized": float(prof.sums[n] / X.N ** 2)}
            for n in range(1, prof.n_max + 1)]
    if cfg.format == "json":
        return _json(cfg, {"space": X.params.name, "N": X.N, "rows": rows})
    return rows_to_csv(rows, ["n", "sum", "normalized"])


def cmd_classify(cfg: RunConfig):
    from .regimes import classify_regimes
    from .samplers import make_generator
    _need(cfg, "space")
    params = parse_space(cfg.space)
    N_grid = cfg.N_grid or ([2, 3, 4, 5, 6] if cfg.sampler == "harmonic" else [16, 32, 64, 128, 256])
    r_grid = cfg.r or [0.3, 0.5, 0.8]
    gen = make_generator(cfg.sampler, params, cfg.seed)
    rep = classify_regimes(params, gen, N_grid, r_grid, cfg.reps or 8, cfg.seed, name=cfg.sampler,
                           tol=cfg.tol)
    if cfg.table_out:
        Path(cfg.table_out).write_text(rows_to_csv(rep.table, comment=_csv_comment(cfg)))
    if cfg.format == "csv":
        return rows_to_csv(rep.table)
    return _json(cfg, rep.to_dict())


def cmd_invariance(cfg: RunConfig):
    from .samplers import make_generator
    from .spectral import invariance_check
    _need(cfg, "space", "N")
    params = parse_space(cfg.space)
    gen = make_generator(cfg.sampler, params, cfg.seed)
    sets = [gen(cfg.N, stream(cfg.seed, "invariance", cfg.N, i)) for i in range(cfg.reps or 20)]
    rep = invariance_check(params, sets, cfg.tol)
    return _json(cfg, rep.to_dict())


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(ns)
        text = HANDLERS[cfg.command](cfg)
        _emit(cfg, text)
        return 0
    except NumericalError as exc:
        print(f"error: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ProjUniformError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
