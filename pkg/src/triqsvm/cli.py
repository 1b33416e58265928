"""Command-line surface: data generation, training, evaluation, map export
and multi-size sweeps.

Exit codes: 0 on success, 1 for validation errors (bad flags, missing or
malformed files), 2 for runtime or numeric failures.  Every JSON artifact
carries ``schema_version`` and echoes the flags and seeds that produced it.
The environment variable ``TRIQSVM_THREADS`` caps inner parallelism
(0 or unset means one worker per CPU).
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from .anneal import AnnealSchedule
from .datagen import (
    SplitSpec,
    adhoc_generate,
    column_ranges,
    load_csv,
    read_dataset_csv,
    rescale,
    split,
    split_rest,
    write_dataset_csv,
)
from .optimize import TrainConfig, report_to_dict, train
from .qubo import accuracy, decision_values, load_model, save_model

SCHEMA_VERSION = "1"

# Sweep method names to (kernel kind, solver backend).
SWEEP_METHODS = {
    "classical": ("rbf", "greedy"),
    "qsvm": ("quantum-zz", "greedy"),
    "hqsvm": ("quantum-zz", "anneal"),
}

DEFAULT_SWEEP_SIZES = (50, 100, 200, 300, 500)


def _worker_count() -> int:
    raw = os.environ.get("TRIQSVM_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TRIQSVM_THREADS must be an integer, got {raw!r}") from None
    return value if value > 0 else (os.cpu_count() or 1)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _comma_ints(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(int(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None


@click.group()
def cli():
    """Hybrid support vector classification toolkit: quantum-style kernel,
    annealing-style QUBO solver, classical outer training loop."""


@cli.command("gen-data")
@click.option("--m", "m", type=int, default=60, show_default=True, help="Number of samples.")
@click.option("--delta", type=float, default=0.6, show_default=True, help="Separation gap.")
@click.option("--n", type=int, default=2, show_default=True, help="Feature dimension.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output CSV path.")
@click.option("--from-csv", "from_csv", type=click.Path(dir_okay=False), default=None,
              help="Convert a raw CSV instead of generating data.")
@click.option("--feature-columns", default=None, help="Two raw column names, comma separated.")
@click.option("--label-column", default=None, help="Raw label column name.")
@click.option("--positive-label", default=None, help="Raw value mapped to +1.")
@click.option("--negative-label", default=None, help="Raw value mapped to -1 (default: inferred).")
@click.option("--no-rescale", is_flag=True, help="Skip min-max rescaling onto [0, 2*pi].")
def cmd_gen_data(m, delta, n, seed, out, from_csv, feature_columns, label_column,
                 positive_label, negative_label, no_rescale):
    """Generate a gap-separated dataset, or convert a raw CSV."""
    if from_csv is not None:
        if not (feature_columns and label_column and positive_label is not None):
            raise ValueError(
                "--from-csv needs --feature-columns, --label-column and --positive-label"
            )
        columns = [c.strip() for c in feature_columns.split(",")]
        ds = load_csv(from_csv, columns, label_column, positive_label, negative_label)
        ranges = column_ranges(ds)
        if not no_rescale:
            ds = rescale(ds)
        write_dataset_csv(ds, out)
        # Sidecar carries the flag set; kept timestamp-free so reruns are
        # byte-identical.
        _write_json(str(out) + ".meta.json", {
            "schema_version": SCHEMA_VERSION,
            "command": "gen-data",
            "source": str(from_csv),
            "feature_columns": columns,
            "label_column": label_column,
            "positive_label": positive_label,
            "negative_label": negative_label,
            "rescaled": not no_rescale,
            "column_ranges": ranges,
            "rows": ds.m,
        })
        click.echo(f"wrote {ds.m} rows to {out}")
        return
    if not 0.0 <= delta < 1.0:
        raise ValueError("the separation gap must satisfy 0 <= delta < 1")
    ds = adhoc_generate(m, delta, n=n, seed=seed)
    write_dataset_csv(ds, out)
    _write_json(str(out) + ".meta.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "gen-data",
        "flags": {"m": m, "delta": delta, "n": n, "seed": seed},
        "rows": ds.m,
    })
    click.echo(f"wrote {ds.m} rows to {out}")


def _schedule_from_flags(reads, sweeps, beta_start, beta_end, seed) -> AnnealSchedule:
    return AnnealSchedule(
        num_reads=reads, sweeps=sweeps, beta_start=beta_start, beta_end=beta_end, seed=seed
    )


@cli.command("train")
@click.option("--data", type=click.Path(dir_okay=False), required=True,
              help="Dataset CSV (canonical f1,f2,label format).")
@click.option("--n-train", type=int, required=True, help="Training rows drawn from --data.")
@click.option("--n-test", type=int, default=None,
              help="Validation rows (default: n-train // 5).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--backend", type=click.Choice(["anneal", "exact", "greedy"]), default="anneal",
              show_default=True)
@click.option("--qubo", type=click.Choice(["paper", "dual"]), default="paper", show_default=True)
@click.option("--kernel", type=click.Choice(["quantum-zz", "rbf", "linear"]),
              default="quantum-zz", show_default=True)
@click.option("--max-iters", type=int, default=10, show_default=True)
@click.option("--target-acc", type=float, default=1.0, show_default=True)
@click.option("--reads", type=int, default=50, show_default=True)
@click.option("--sweeps", type=int, default=1000, show_default=True)
@click.option("--beta-start", type=float, default=0.1, show_default=True)
@click.option("--beta-end", type=float, default=10.0, show_default=True)
@click.option("--holdout", is_flag=True,
              help="Carve out a third split: the optimizer sees the validation split, "
                   "and accuracy is also reported on untouched holdout rows.")
def cmd_train(data, n_train, n_test, seed, out, backend, qubo, kernel, max_iters,
              target_acc, reads, sweeps, beta_start, beta_end, holdout):
    """Train a model on a split of the dataset and write model + report."""
    started = time.perf_counter()
    flags = {
        "data": str(data), "n_train": n_train, "n_test": n_test, "seed": seed,
        "backend": backend, "qubo": qubo, "kernel": kernel, "max_iters": max_iters,
        "target_acc": target_acc, "reads": reads, "sweeps": sweeps,
        "beta_start": beta_start, "beta_end": beta_end, "holdout": holdout,
    }
    ds = read_dataset_csv(data)
    spec = SplitSpec(n_train=n_train, n_test=n_test, seed=seed)
    train_set, val_set = split(ds, spec)
    holdout_set = None
    if holdout:
        rest = split_rest(ds, spec)
        holdout_set, _ = split(rest, SplitSpec(n_train=spec.n_test, n_test=0, seed=seed))
    cfg = TrainConfig(
        max_iterations=max_iters,
        target_accuracy=target_acc,
        solver_backend=backend,
        qubo_builder=qubo,
        kernel_kind=kernel,
        seed=seed,
        schedule=_schedule_from_flags(reads, sweeps, beta_start, beta_end, seed),
    )
    report = train(train_set, val_set, cfg)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(report.best_model, out_dir / "model.json")
    per_split = {
        "train": accuracy(report.best_model, train_set),
        "validation": accuracy(report.best_model, val_set),
    }
    if holdout_set is not None and holdout_set.m:
        per_split["holdout"] = accuracy(report.best_model, holdout_set)
    run_report = {
        "schema_version": SCHEMA_VERSION,
        "command": "train",
        "created_utc": _utc_now(),
        "flags": flags,
        "dataset": {"path": str(data), "name": ds.name, "rows": ds.m,
                    "n_train": spec.n_train, "n_test": spec.n_test,
                    "holdout_rows": holdout_set.m if holdout_set is not None else 0},
        "train_report": report_to_dict(report),
        "per_split_accuracy": per_split,
        "wall_time_s": time.perf_counter() - started,
    }
    _write_json(out_dir / "report.json", run_report)
    click.echo(
        f"best validation accuracy {report.best_accuracy:.4f} "
        f"after {report.iterations_used} iteration(s); artifacts in {out_dir}"
    )


@cli.command("evaluate")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.argument("dataset_file", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default="evaluation.json",
              show_default=True, help="JSON result path.")
def cmd_evaluate(model_file, dataset_file, out):
    """Score a stored model against a dataset; prints the accuracy."""
    model = load_model(model_file)
    ds = read_dataset_csv(dataset_file)
    acc = accuracy(model, ds)
    click.echo(f"{acc:.4f}")
    _write_json(out, {
        "schema_version": SCHEMA_VERSION,
        "command": "evaluate",
        "created_utc": _utc_now(),
        "model": str(model_file),
        "dataset": {"path": str(dataset_file), "name": ds.name, "rows": ds.m},
        "accuracy": acc,
    })


def _grid_decisions(model, grid: np.ndarray) -> np.ndarray:
    workers = _worker_count()
    if workers <= 1 or grid.shape[0] < 64:
        return decision_values(grid, model)
    chunks = np.array_split(np.arange(grid.shape[0]), workers)
    values = np.empty(grid.shape[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(decision_values, grid[idx], model): idx for idx in chunks if idx.size}
        for future, idx in futures.items():
            values[idx] = future.result()
    return values


def _svg_map(path, xs, ys, values, labels, resolution, domain, overlays):
    lo1, hi1, lo2, hi2 = domain
    size = 480
    margin = 40
    cell = size / resolution

    def px(x1, x2):
        u = (x1 - lo1) / (hi1 - lo1) if hi1 > lo1 else 0.5
        v = (x2 - lo2) / (hi2 - lo2) if hi2 > lo2 else 0.5
        return margin + u * size, margin + (1.0 - v) * size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{size + 2 * margin}" height="{size + 2 * margin}">',
        f'<rect width="{size + 2 * margin}" height="{size + 2 * margin}" fill="white"/>',
    ]
    for x1, x2, label in zip(xs, ys, labels):
        cx, cy = px(x1, x2)
        color = "#d62728" if label > 0 else "#1f77b4"
        parts.append(
            f'<rect x="{cx - cell / 2:.2f}" y="{cy - cell / 2:.2f}" '
            f'width="{cell:.2f}" height="{cell:.2f}" fill="{color}" fill-opacity="0.55"/>'
        )
    for ds, shape in overlays:
        for row, label in zip(ds.points, ds.labels):
            cx, cy = px(row[0], row[1])
            color = "#d62728" if label > 0 else "#1f77b4"
            if shape == "circle":
                parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{color}" '
                             f'stroke="black" stroke-width="0.7"/>')
            else:
                parts.append(
                    f'<polygon points="{cx:.2f},{cy - 5:.2f} {cx - 4.5:.2f},{cy + 4:.2f} '
                    f'{cx + 4.5:.2f},{cy + 4:.2f}" fill="{color}" '
                    f'stroke="black" stroke-width="0.7"/>'
                )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


@cli.command("map")
@click.argument("model_file", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output CSV path.")
@click.option("--resolution", type=int, default=50, show_default=True, help="Grid cells per axis.")
@click.option("--domain", default=None,
              help="Grid domain as 'x1min,x1max,x2min,x2max' (default 0,2pi,0,2pi).")
@click.option("--svg", type=click.Path(dir_okay=False), default=None,
              help="Also render an SVG heat grid here.")
@click.option("--train-data", type=click.Path(dir_okay=False), default=None,
              help="Overlay these points as circles in the SVG.")
@click.option("--test-data", type=click.Path(dir_okay=False), default=None,
              help="Overlay these points as triangles in the SVG.")
def cmd_map(model_file, out, resolution, domain, svg, train_data, test_data):
    """Export the model's decision values over a grid of the feature plane."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    model = load_model(model_file)
    if domain is None:
        bounds = (0.0, 2.0 * np.pi, 0.0, 2.0 * np.pi)
    else:
        parts = domain.split(",")
        if len(parts) != 4:
            raise ValueError("domain must be 'x1min,x1max,x2min,x2max'")
        bounds = tuple(float(v) for v in parts)
        if not (bounds[0] < bounds[1] and bounds[2] < bounds[3]):
            raise ValueError("domain extents must be increasing")
    g1 = np.linspace(bounds[0], bounds[1], resolution)
    g2 = np.linspace(bounds[2], bounds[3], resolution)
    # Row-major with x2 fastest.
    grid = np.array([(a, b) for a in g1 for b in g2])
    values = _grid_decisions(model, grid)
    labels = np.where(values >= 0.0, 1, -1)
    with Path(out).open("w", newline="\n", encoding="utf-8") as fh:
        fh.write("x1,x2,decision_value,label\n")
        for (x1, x2), value, label in zip(grid, values, labels):
            fh.write(f"{float(x1)!r},{float(x2)!r},{float(value)!r},{int(label)}\n")
    _write_json(str(out) + ".meta.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "map",
        "flags": {"model": str(model_file), "resolution": resolution,
                  "domain": list(bounds), "svg": str(svg) if svg else None},
        "cells": int(grid.shape[0]),
    })
    if svg is not None:
        overlays = []
        if train_data is not None:
            overlays.append((read_dataset_csv(train_data), "circle"))
        if test_data is not None:
            overlays.append((read_dataset_csv(test_data), "triangle"))
        _svg_map(svg, grid[:, 0], grid[:, 1], values, labels, resolution, bounds, overlays)
    click.echo(f"wrote {grid.shape[0]} cells to {out}")


def _read_sweep_rows(path: Path) -> dict:
    rows = {}
    if not path.is_file():
        return rows
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["seed"] == "mean":
                continue
            key = (int(row["train_pts"]), row["method"], int(row["seed"]))
            rows[key] = {
                "train_pts": int(row["train_pts"]),
                "test_pts": int(row["test_pts"]),
                "method": row["method"],
                "seed": int(row["seed"]),
                "accuracy_pct": float(row["accuracy_pct"]),
                "iterations": int(row["iterations"]),
            }
    return rows


def _write_sweep_rows(path: Path, rows: dict) -> None:
    method_order = {name: i for i, name in enumerate(SWEEP_METHODS)}
    ordered = sorted(rows.values(),
                     key=lambda r: (r["train_pts"], method_order[r["method"]], r["seed"]))
    by_group: dict = {}
    for row in ordered:
        by_group.setdefault((row["train_pts"], row["method"]), []).append(row)
    with path.open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["train_pts", "test_pts", "method", "seed", "accuracy_pct", "iterations"])
        for row in ordered:
            writer.writerow([row["train_pts"], row["test_pts"], row["method"], row["seed"],
                             f"{row['accuracy_pct']:.2f}", row["iterations"]])
        for (size, method), group in sorted(by_group.items(),
                                            key=lambda kv: (kv[0][0], method_order[kv[0][1]])):
            mean_acc = sum(r["accuracy_pct"] for r in group) / len(group)
            mean_iters = sum(r["iterations"] for r in group) / len(group)
            writer.writerow([size, group[0]["test_pts"], method, "mean",
                             f"{mean_acc:.2f}", f"{mean_iters:.1f}"])


@cli.command("sweep")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Results CSV path.")
@click.option("--data", type=click.Path(dir_okay=False), default=None,
              help="Dataset CSV to subsample; omit to generate gap-separated data per seed.")
@click.option("--sizes", callback=_comma_ints, default=None,
              help=f"Training sizes (default {','.join(map(str, DEFAULT_SWEEP_SIZES))}).")
@click.option("--seeds", callback=_comma_ints, default="300,600,1000", show_default=True)
@click.option("--methods", default="classical,qsvm,hqsvm", show_default=True)
@click.option("--delta", type=float, default=0.6, show_default=True)
@click.option("--max-iters", type=int, default=10, show_default=True)
@click.option("--target-acc", type=float, default=1.0, show_default=True)
@click.option("--reads", type=int, default=50, show_default=True)
@click.option("--sweeps", type=int, default=1000, show_default=True)
@click.option("--beta-start", type=float, default=0.1, show_default=True)
@click.option("--beta-end", type=float, default=10.0, show_default=True)
@click.option("--include-500-quantum", is_flag=True,
              help="Also run quantum-kernel methods at 500 training points.")
def cmd_sweep(out, data, sizes, seeds, methods, delta, max_iters, target_acc, reads,
              sweeps, beta_start, beta_end, include_500_quantum):
    """Accuracy/iteration table across training sizes, methods and seeds.

    Completed (size, method, seed) rows found in the output file are kept,
    so an interrupted sweep resumes where it stopped.
    """
    sizes = sizes or DEFAULT_SWEEP_SIZES
    method_names = [m.strip() for m in methods.split(",")]
    for name in method_names:
        if name not in SWEEP_METHODS:
            raise ValueError(f"unknown method {name!r}; choose from {sorted(SWEEP_METHODS)}")
    source = read_dataset_csv(data) if data is not None else None
    out_path = Path(out)
    rows = _read_sweep_rows(out_path)
    _write_json(str(out_path) + ".meta.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "flags": {"data": str(data) if data else None, "sizes": list(sizes),
                  "seeds": list(seeds), "methods": method_names, "delta": delta,
                  "max_iters": max_iters, "target_acc": target_acc, "reads": reads,
                  "sweeps": sweeps, "beta_start": beta_start, "beta_end": beta_end,
                  "include_500_quantum": include_500_quantum},
        "method_map": {name: {"kernel": SWEEP_METHODS[name][0],
                              "backend": SWEEP_METHODS[name][1]}
                       for name in method_names},
    })
    for size in sizes:
        n_test = size // 5
        for seed in seeds:
            dataset = source
            if dataset is None:
                dataset = adhoc_generate(size + n_test, delta, n=2, seed=seed)
            for method in method_names:
                kernel_kind, backend = SWEEP_METHODS[method]
                if size >= 500 and kernel_kind == "quantum-zz" and not include_500_quantum:
                    continue
                key = (size, method, seed)
                if key in rows:
                    continue
                train_set, val_set = split(dataset, SplitSpec(size, n_test, seed))
                cfg = TrainConfig(
                    max_iterations=max_iters,
                    target_accuracy=target_acc,
                    solver_backend=backend,
                    qubo_builder="paper",
                    kernel_kind=kernel_kind,
                    seed=seed,
                    schedule=_schedule_from_flags(reads, sweeps, beta_start, beta_end, seed),
                )
                report = train(train_set, val_set, cfg)
                rows[key] = {
                    "train_pts": size,
                    "test_pts": n_test,
                    "method": method,
                    "seed": seed,
                    "accuracy_pct": 100.0 * report.best_accuracy,
                    "iterations": report.iterations_used,
                }
                _write_sweep_rows(out_path, rows)
                click.echo(f"{size:>4} {method:<9} seed {seed}: "
                           f"{rows[key]['accuracy_pct']:.2f}% "
                           f"in {rows[key]['iterations']} iteration(s)")
    _write_sweep_rows(out_path, rows)
    click.echo(f"sweep table written to {out_path}")


def main(argv=None):
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - runtime/numeric failures
        click.echo(f"failure: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
