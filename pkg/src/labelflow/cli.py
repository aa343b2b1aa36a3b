"""Command-line orchestration.

Subcommands: ``gen`` (synthetic clouds), ``micro`` (consensus dynamics),
``macro`` (grid PDE), ``compare`` (micro vs macro metrics), ``digits``
(transport-weighted multi-label pipeline), ``replay`` (re-run a manifest
and verify output digests).

Every run writes its outputs plus a ``manifest.json`` recording the fully
resolved configuration, seeds, package versions, input/output digests,
wall clock and headline metrics. Configuration precedence: command-line
flags, then ``--config`` file entries (``key = value`` lines), then
defaults. Exit codes: 0 success, 2 validation, 3 I/O, 4 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import warnings
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .compare import compare_micro_macro
from .core import (RunConfig, SolverError, ValidationError, anchor_state, init_labels,
                   load_state_csv, save_state_csv)
from .data import (extremes_anchor_map, gen_two_gaussians, gen_two_moons,
                   hull_anchor_map, load_digits_csv, place_labels)
from .graph import build_weights, gaussian, indicator, save_edges_csv, sigma_eta
from .macro import (MacroField, boundary_from_cloud, grid_1d, grid_2d, kde_density,
                    run_macro, save_field_csv)
from .micro import MicroSystem, classify, run_micro, save_trace_csv
from .transport import ImageMeasure, save_distance_csv, wasserstein_weights
from .core import double_well

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_SOLVER = 4


# ---------------------------------------------------------------------------
# Option tables: (name, type, default, help). ``None`` CLI values fall back
# to the config file and then to these defaults, so precedence is explicit.
# ---------------------------------------------------------------------------

COMMON_OPTS = [
    ("seed", int, 0, "random seed"),
    ("threads", int, None, "thread cap (fallback: LABELFLOW_THREADS); 1 gives bitwise reproducibility"),
    ("out", str, None, "output directory (default: runs/<command>-<timestamp>)"),
    ("config", str, None, "config file with 'key = value' lines"),
]

GEN_OPTS = [
    ("kind", str, None, "dataset kind: two-gaussians | two-moons"),
    ("n", int, 250, "number of points"),
    ("noise", float, 0.1, "two-moons noise standard deviation"),
    ("mu1", float, -0.25, "first component mean"),
    ("sd1", float, 0.125, "first component standard deviation"),
    ("mu2", float, 0.4, "second component mean"),
    ("sd2", float, 0.1, "second component standard deviation"),
]

MICRO_OPTS = [
    ("cloud", str, None, "input cloud CSV"),
    ("placement", str, "extremes", "anchor placement: extremes | hull | anchors"),
    ("anchors", str, None, "explicit anchors 'index:group,...' (placement=anchors)"),
    ("kernel", str, "indicator", "kernel profile: indicator | gaussian"),
    ("radius", float, 0.25, "kernel parameter (indicator radius / gaussian scale)"),
    ("epsilon", float, 1.0, "kernel rescaling length"),
    ("scaling", str, "plain", "interaction scaling: plain | eps2"),
    ("gamma", float, 250.0, "interaction strength"),
    ("kappa", float, 0.25, "double-well strength"),
    ("dt", float, None, "time step (default: half the stability bound)"),
    ("t_end", float, 50.0, "time horizon"),
    ("init", str, "zero", "initialization: zero | uniform | normal"),
    ("sigma", float, 0.1, "normal-init standard deviation"),
    ("stationarity_tol", float, 1e-6, "sup-norm velocity threshold"),
    ("save_edges", int, 0, "also export the weight graph edges CSV"),
]

MACRO_OPTS = [
    ("cloud", str, None, "input cloud CSV"),
    ("placement", str, None, "anchor placement (default: extremes in 1D, hull in 2D)"),
    ("anchors", str, None, "explicit anchors 'index:group,...'"),
    ("grid_nodes", str, "257", "nodes per axis, e.g. '257' or '96,72'"),
    ("bandwidth", float, None, "KDE variance per axis (default: squared Scott rule)"),
    ("floor", float, 1e-3, "density floor"),
    ("radius", float, 0.25, "kernel parameter used to derive the diffusion constant"),
    ("sigma_eta", float, None, "diffusion constant override (default from kernel/radius)"),
    ("gamma", float, 1.0, "interaction strength"),
    ("kappa", float, 10.0, "double-well strength"),
    ("background", float, 0.0, "background diffusivity"),
    ("dt", float, None, "time step (default: half the reaction bound)"),
    ("t_end", float, 200.0, "time horizon"),
    ("stationarity_tol", float, 1e-6, "sup-norm velocity threshold"),
    ("snapshots", int, 1, "number of evenly spaced field snapshots"),
]

COMPARE_OPTS = [
    ("micro_dir", str, None, "micro run directory (or a macro directory for field-vs-field)"),
    ("macro_dir", str, None, "macro run directory"),
]

DIGITS_OPTS = [
    ("csv", str, None, "digits CSV path (64 pixel columns + label)"),
    ("csv_header", int, 0, "set to 1 when the CSV carries a header row"),
    ("n_samples", int, 320, "number of sampled images"),
    ("n_labeled", int, 40, "number of correctly labeled images"),
    ("cutoff_frac", float, 0.1, "edge cutoff as a fraction of the max distance"),
    ("reg", float, None, "entropic regularization (default: 1e-2 * mean cost)"),
    ("gamma", float, 1.0, "interaction strength (unnormalized sum)"),
    ("kappa", float, 10.0, "double-well strength"),
    ("dt", float, None, "time step"),
    ("t_end", float, 20.0, "time horizon"),
    ("save_distances", int, 0, "also export the distance matrix CSV"),
]


def _add_opts(parser, opts):
    for name, typ, _default, help_text in opts:
        flag = "--" + name.replace("_", "-")
        if name == "kind":
            parser.add_argument("kind", nargs="?", help=help_text)
        else:
            parser.add_argument(flag, dest=name, type=typ, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in [("gen", GEN_OPTS), ("micro", MICRO_OPTS), ("macro", MACRO_OPTS),
                      ("compare", COMPARE_OPTS), ("digits", DIGITS_OPTS)]:
        p = sub.add_parser(cmd)
        _add_opts(p, opts + COMMON_OPTS)
    pr = sub.add_parser("replay")
    pr.add_argument("manifest", help="manifest.json of a previous run")
    pr.add_argument("--out", dest="out", default=None)
    return parser


def _parse_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        values[key.strip().replace("-", "_")] = raw.strip()
    return values


def _coerce(raw, typ):
    if typ is str:
        return raw
    return typ(raw)


def resolve_config(args, opts) -> dict:
    file_values = {}
    if getattr(args, "config", None):
        file_values = _parse_config_file(args.config)
    cfg = {}
    for name, typ, default, _ in opts + COMMON_OPTS:
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            cfg[name] = cli_val
        elif name in file_values:
            cfg[name] = _coerce(file_values[name], typ)
        else:
            cfg[name] = default
    if cfg.get("threads") is None:
        env = os.environ.get("LABELFLOW_THREADS")
        cfg["threads"] = int(env) if env else None
    return cfg


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _versions() -> dict:
    import scipy

    return {
        "labelflow": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
    }


def _write_manifest(outdir: Path, command: str, cfg: dict, inputs, metrics, wall, status):
    outputs = {}
    for p in sorted(outdir.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            outputs[str(p.relative_to(outdir))] = sha256_file(p)
    manifest = {
        "command": command,
        "config": {k: v for k, v in cfg.items() if k not in ("out", "config", "threads")},
        "threads": cfg.get("threads"),
        "seed": cfg.get("seed"),
        "versions": _versions(),
        "inputs": {str(k): v for k, v in inputs.items()},
        "outputs": outputs,
        "metrics": metrics,
        "wall_clock_s": wall,
        "exit_status": status,
    }
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Command implementations: cfg dict in, metrics dict out.
# ---------------------------------------------------------------------------

def _load_cloud(path):
    if not Path(path or "").is_file():
        raise FileNotFoundError(f"cloud file not found: {path}")
    return load_state_csv(path)


def _parse_anchor_flag(raw: str) -> dict[int, int]:
    anchors = {}
    for item in raw.split(","):
        idx, _, grp = item.strip().partition(":")
        anchors[int(idx)] = int(grp)
    return anchors


def _place(cfg, points, truth):
    placement = cfg.get("placement")
    if placement is None:
        placement = "extremes" if points.shape[1] == 1 else "hull"
    if placement == "extremes":
        amap = extremes_anchor_map(points)
    elif placement == "hull":
        if truth is None:
            raise ValidationError("hull placement needs a ground-truth column")
        amap = hull_anchor_map(points, truth)
    elif placement == "anchors":
        if not cfg.get("anchors"):
            raise ValidationError("placement=anchors requires --anchors 'index:group,...'")
        amap = _parse_anchor_flag(cfg["anchors"])
    else:
        raise ValidationError(f"unknown placement: {placement!r}")
    cloud, perm = place_labels(points, amap)
    return cloud, (None if truth is None else np.asarray(truth)[perm])


def run_gen(cfg: dict, outdir: Path):
    kind = cfg.get("kind")
    if kind == "two-gaussians":
        points, truth = gen_two_gaussians(cfg["n"], cfg["seed"], cfg["mu1"], cfg["sd1"],
                                          cfg["mu2"], cfg["sd2"])
    elif kind == "two-moons":
        points, truth = gen_two_moons(cfg["n"], cfg["noise"], cfg["seed"])
    else:
        raise ValidationError(f"unknown dataset kind: {kind!r}")
    cloud, _ = place_labels(points, {})
    state = anchor_state(cloud, width=1)
    save_state_csv(outdir / "cloud.csv", cloud, state, truth=truth)
    lo, hi = cloud.box
    return {"rows": cloud.size, "box_lo": lo.tolist(), "box_hi": hi.tolist(),
            "classes": int(len(np.unique(truth)))}, {}


def _micro_accuracy(state, cloud, truth):
    if truth is None:
        return None
    pred = classify(state)
    n = cloud.n_unlabeled
    scored = pred[:n]
    return float(np.mean(scored == np.asarray(truth)[:n]))


def run_cmd_micro(cfg: dict, outdir: Path):
    raw_cloud, _, truth = _load_cloud(cfg["cloud"])
    cloud, truth = _place(cfg, raw_cloud.points, truth)
    kernel = indicator(cfg["radius"]) if cfg["kernel"] == "indicator" else gaussian(cfg["radius"])
    graph = build_weights(cloud, kernel, epsilon=cfg["epsilon"])
    run_cfg = RunConfig(gamma=cfg["gamma"], kappa=cfg["kappa"], dt=cfg["dt"],
                        t_end=cfg["t_end"], epsilon=cfg["epsilon"], seed=cfg["seed"],
                        stationarity_tol=cfg["stationarity_tol"])
    sys_ = MicroSystem(cloud, graph, double_well("symmetric_pm1"), run_cfg, cfg["scaling"])
    sigma = cfg["sigma"] if cfg["init"] == "normal" else None
    u0 = init_labels(cloud, cfg["init"], cfg["seed"], sigma=sigma)
    result = run_micro(sys_, u0)
    save_state_csv(outdir / "state.csv", cloud, result.final, truth=truth)
    save_trace_csv(outdir / "trace.csv", result.trace)
    if cfg.get("save_edges"):
        save_edges_csv(outdir / "edges.csv", graph)
    pred = classify(result.final)
    counts = {str(k): int(v) for k, v in zip(*np.unique(pred, return_counts=True))}
    metrics = {
        "final_energy": result.trace.energies[-1],
        "steps": result.steps,
        "stationary": result.stationary,
        "graph_connected": graph.connected,
        "cluster_counts": counts,
        "accuracy": _micro_accuracy(result.final, cloud, truth),
    }
    return metrics, {Path(cfg["cloud"]): sha256_file(cfg["cloud"])}


def _scott_bandwidth(points: np.ndarray) -> float:
    n, d = points.shape
    sd = float(np.mean(np.std(points, axis=0)))
    return (sd * n ** (-1.0 / (d + 4))) ** 2


def run_cmd_macro(cfg: dict, outdir: Path):
    raw_cloud, _, truth = _load_cloud(cfg["cloud"])
    cloud, truth = _place(cfg, raw_cloud.points, truth)
    if cloud.n_labeled == 0:
        raise ValidationError("macro runs need anchor points")
    d = cloud.dim
    nodes = tuple(int(v) for v in str(cfg["grid_nodes"]).split(","))
    if len(nodes) == 1 and d == 2:
        nodes = (nodes[0], nodes[0])
    if len(nodes) != d:
        raise ValidationError(f"grid_nodes has {len(nodes)} axes for a {d}D cloud")
    lo, hi = cloud.box
    grid = grid_1d(lo[0], hi[0], nodes[0]) if d == 1 else grid_2d(lo, hi, nodes)
    bandwidth = cfg["bandwidth"] if cfg["bandwidth"] is not None else _scott_bandwidth(cloud.points)
    rho = kde_density(cloud, grid, bandwidth, floor=cfg["floor"])
    sev = cfg["sigma_eta"]
    if sev is None:
        sev = sigma_eta(indicator(cfg["radius"]), d)
    state = anchor_state(cloud, width=1)
    bc = boundary_from_cloud(grid, cloud, state.label_codes)
    run_cfg = RunConfig(gamma=cfg["gamma"], kappa=cfg["kappa"], dt=cfg["dt"],
                        t_end=cfg["t_end"], seed=cfg["seed"],
                        stationarity_tol=cfg["stationarity_tol"])
    field0 = MacroField(grid, np.zeros(grid.shape))
    potential = double_well("symmetric_pm1")
    n_snap = max(int(cfg["snapshots"]), 1)
    if n_snap == 1:
        result = run_macro(field0, rho, bc, potential, run_cfg, sev, cfg["background"])
        save_field_csv(outdir / "field_final.csv", result.final, rho)
    else:
        # split the horizon into equal windows, snapshotting after each
        field = field0
        total_steps, stationary = 0, False
        for k in range(n_snap):
            part = RunConfig(gamma=cfg["gamma"], kappa=cfg["kappa"], dt=cfg["dt"],
                             t_end=cfg["t_end"] / n_snap, seed=cfg["seed"],
                             stationarity_tol=cfg["stationarity_tol"])
            result = run_macro(field, rho, bc, potential, part, sev, cfg["background"])
            field = result.final
            total_steps += result.steps
            stationary = result.stationary
            save_field_csv(outdir / f"field_{k + 1:03d}.csv", field, rho)
            if stationary:
                break
        save_field_csv(outdir / "field_final.csv", field, rho)
        result.steps = total_steps
    save_trace_csv(outdir / "trace.csv", result.trace)
    u = result.final.component(0)
    metrics = {
        "final_energy": result.trace.energies[-1],
        "steps": result.steps,
        "stationary": result.stationary,
        "sigma_eta": sev,
        "bandwidth": bandwidth,
        "frac_above_0.9": float(np.mean(np.abs(u) > 0.9)),
    }
    return metrics, {Path(cfg["cloud"]): sha256_file(cfg["cloud"])}


def _load_field_csv(path):
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in r] for r in reader])
    d = sum(1 for c in header if c.startswith("x_"))
    k = sum(1 for c in header if c.startswith("u_"))
    coords = rows[:, :d]
    u = rows[:, len(header) - k:]
    if d == 1:
        axis = coords[:, 0]
        grid = grid_1d(axis.min(), axis.max(), len(axis))
        return MacroField(grid, u.reshape(len(axis), k))
    a0 = np.unique(coords[:, 0])
    a1 = np.unique(coords[:, 1])
    grid = grid_2d([a0.min(), a1.min()], [a0.max(), a1.max()], (len(a0), len(a1)))
    return MacroField(grid, u.reshape(len(a0), len(a1), k))


def run_cmd_compare(cfg: dict, outdir: Path):
    micro_dir = Path(cfg["micro_dir"] or "")
    macro_dir = Path(cfg["macro_dir"] or "")
    macro_field = _load_field_csv(macro_dir / "field_final.csv")
    inputs = {macro_dir / "field_final.csv": sha256_file(macro_dir / "field_final.csv")}
    if (micro_dir / "state.csv").is_file():
        cloud, state, _ = load_state_csv(micro_dir / "state.csv")
        report = compare_micro_macro(cloud, state, macro_field)
        inputs[micro_dir / "state.csv"] = sha256_file(micro_dir / "state.csv")
    elif (micro_dir / "field_final.csv").is_file():
        other = _load_field_csv(micro_dir / "field_final.csv")
        if other.grid.shape != macro_field.grid.shape or np.any(other.grid.lo != macro_field.grid.lo) \
                or np.any(other.grid.hi != macro_field.grid.hi):
            raise ValidationError("fields live on different grids")
        diff = other.values - macro_field.values
        from .compare import CompareReport
        report = CompareReport(float(np.sqrt(np.mean(diff ** 2))), float(np.abs(diff).max()),
                               float(np.mean(np.sign(other.values) == np.sign(macro_field.values))),
                               int(diff.size))
        inputs[micro_dir / "field_final.csv"] = sha256_file(micro_dir / "field_final.csv")
    else:
        raise FileNotFoundError(f"no state.csv or field_final.csv under {micro_dir}")
    with open(outdir / "comparison.json", "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")
    return report.as_dict(), inputs


def run_cmd_digits(cfg: dict, outdir: Path):
    path = cfg["csv"]
    if not Path(path or "").is_file():
        raise FileNotFoundError(f"digits CSV not found: {path}")
    pix, labels, labeled_ids = load_digits_csv(path, cfg["n_samples"], cfg["n_labeled"],
                                               cfg["seed"], has_header=bool(cfg["csv_header"]))
    anchors = {int(i): int(labels[i]) for i in labeled_ids}
    cloud, perm = place_labels(pix, anchors, n_groups=10)
    truth = labels[perm]
    images = [ImageMeasure(cloud.points[i]) for i in range(cloud.size)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        graph, dmat = wasserstein_weights(images, cfg["cutoff_frac"], reg=cfg["reg"])
    disconnected = any("disconnected" in str(w.message) for w in caught)
    if disconnected:
        print("warning: weight graph is disconnected; isolated images keep their "
              "initial labels", file=sys.stderr)
    if cfg.get("save_distances"):
        save_distance_csv(outdir / "distances.csv", dmat)
    run_cfg = RunConfig(gamma=cfg["gamma"], kappa=cfg["kappa"], dt=cfg["dt"],
                        t_end=cfg["t_end"], seed=cfg["seed"])
    sys_ = MicroSystem(cloud, graph, double_well("unit_interval"), run_cfg, scaling="orig")
    u0 = anchor_state(cloud, width=10)
    result = run_micro(sys_, u0)
    pred = classify(result.final)
    n = cloud.n_unlabeled
    accuracy = float(np.mean(pred[:n] == truth[:n]))
    confusion = np.zeros((10, 10), dtype=int)
    for t, p in zip(truth[:n], pred[:n]):
        confusion[int(t), int(p)] += 1
    labeled_counts = {str(g): int(len(ids)) for g, ids in enumerate(cloud.labeled_groups)}
    save_state_csv(outdir / "state.csv", cloud, result.final, truth=truth)
    save_trace_csv(outdir / "trace.csv", result.trace)
    report = {
        "accuracy": accuracy,
        "confusion": confusion.tolist(),
        "labeled_per_class": labeled_counts,
        "graph_connected": graph.connected,
        "n_edges": graph.n_edges,
        "cutoff": float(cfg["cutoff_frac"] * dmat.max()),
        "steps": result.steps,
        "stationary": result.stationary,
    }
    with open(outdir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return report, {Path(path): sha256_file(path)}


COMMANDS = {
    "gen": (run_gen, GEN_OPTS),
    "micro": (run_cmd_micro, MICRO_OPTS),
    "macro": (run_cmd_macro, MACRO_OPTS),
    "compare": (run_cmd_compare, COMPARE_OPTS),
    "digits": (run_cmd_digits, DIGITS_OPTS),
}


def run_replay(manifest_path, out):
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    command = manifest["command"]
    if command not in COMMANDS:
        raise ValidationError(f"manifest command {command!r} cannot be replayed")
    cfg = dict(manifest["config"])
    cfg["threads"] = manifest.get("threads")
    outdir = Path(out) if out else _default_outdir(command)
    outdir.mkdir(parents=True, exist_ok=True)
    func = COMMANDS[command][0]
    start = time.perf_counter()
    metrics, inputs = func(cfg, outdir)
    wall = time.perf_counter() - start
    _write_manifest(outdir, command, cfg, inputs, metrics, wall, 0)
    mismatches = []
    for rel, digest in manifest.get("outputs", {}).items():
        new = outdir / rel
        if not new.is_file() or sha256_file(new) != digest:
            mismatches.append(rel)
    if mismatches:
        raise SolverError("replay outputs differ: " + ", ".join(mismatches))
    print(f"replay ok: {len(manifest.get('outputs', {}))} outputs match")
    return EXIT_OK


def _default_outdir(command: str) -> Path:
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    return Path("runs") / f"{command}-{stamp}"


def _thread_limit(n):
    if n is None:
        import contextlib

        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return run_replay(args.manifest, args.out)
        func, opts = COMMANDS[args.command]
        cfg = resolve_config(args, opts)
        outdir = Path(cfg["out"]) if cfg.get("out") else _default_outdir(args.command)
        outdir.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        status = EXIT_OK
        metrics, inputs = {}, {}
        try:
            with _thread_limit(cfg.get("threads")):
                metrics, inputs = func(cfg, outdir)
        except Exception as exc:
            status = _classify_error(exc)
            metrics = {"error": f"{type(exc).__name__}: {exc}"}
            raise
        finally:
            wall = time.perf_counter() - start
            _write_manifest(outdir, args.command, cfg, inputs, metrics, wall, status)
        for key in ("accuracy", "final_energy", "sign_agreement", "l2", "rows"):
            if metrics.get(key) is not None:
                print(f"{key}: {metrics[key]}")
        print(f"outputs written to {outdir}")
        return EXIT_OK
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def _classify_error(exc) -> int:
    if isinstance(exc, (ValidationError, ValueError)):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    return 1


if __name__ == "__main__":
    sys.exit(main())
