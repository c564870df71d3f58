"""Command-line interface: optimize, check, verify, transition.

The CLI is the composition root: it reads a JSON run config, owns the
worker-pool settings, and emits artifacts (result JSON, top-k CSV, SVG
heatmap). Deterministic artifacts never contain timing data; wall time and
throughput go to stdout and a run_log.json sidecar.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import oracle
from .config import ConfigError, RunConfig, load_run_config
from .geom import AxisConfig
from .grasp import GraspVerdict
from .optimizer import OptimizationResult, OptimizeOptions, evaluate_one, optimize

WORKERS_ENV = "THUMBOPT_WORKERS"

_DEG = math.pi / 180.0


def _default_workers(cli_value: int | None, cfg_value: int | None) -> int:
    if cli_value is not None:
        return cli_value
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    if cfg_value is not None:
        return cfg_value
    return os.cpu_count() or 1


def _parse_omega(text: str) -> AxisConfig:
    """x,y,z in mm and roll,pitch,yaw in degrees, comma separated."""
    parts = text.split(",")
    if len(parts) != 6:
        raise ValueError(f"--omega needs 6 comma-separated values, got {len(parts)}")
    vals = [float(p) for p in parts]
    return AxisConfig(vals[0], vals[1], vals[2],
                      vals[3] * _DEG, vals[4] * _DEG, vals[5] * _DEG)


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

_AXIS_ORDER = ("x", "y", "z", "roll", "pitch", "yaw")


def _heatmap_values(run: RunConfig, result: OptimizationResult,
                    dims: tuple[str, str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|W| over a 2-D slice of the grid, other axes pinned at the winner."""
    grid = run.grid
    winner = result.omega_opt
    base = {name: getattr(winner, name) for name in _AXIS_ORDER}
    dim_a = getattr(grid, dims[0])
    dim_b = getattr(grid, dims[1])
    vals_a = dim_a.values()
    vals_b = dim_b.values()
    widths = np.zeros((len(vals_a), len(vals_b)))
    dm = run.deformation_mm
    for ia, va in enumerate(vals_a):
        for ib, vb in enumerate(vals_b):
            coords = dict(base)
            coords[dims[0]] = float(va)
            coords[dims[1]] = float(vb)
            cfg = AxisConfig(**coords)
            _, interval = evaluate_one(cfg, run.hand, run.requirements, dm)
            widths[ia, ib] = interval.width
    return vals_a, vals_b, widths


def _write_heatmap_svg(path: str, run: RunConfig, result: OptimizationResult) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "thumbopt"
    dims = run.heatmap_dims
    vals_a, vals_b, widths = _heatmap_values(run, result, dims)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(vals_b, vals_a, widths, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="|W| (mm)")
    unit_a = "mm" if dims[0] in ("x", "y", "z") else "rad"
    unit_b = "mm" if dims[1] in ("x", "y", "z") else "rad"
    ax.set_xlabel(f"{dims[1]} ({unit_b})")
    ax.set_ylabel(f"{dims[0]} ({unit_a})")
    ax.set_title(f"manipulable width over ({dims[0]}, {dims[1]}), others at winner")
    fig.tight_layout()
    fig.savefig(path, format="svg",
                metadata={"Date": None, "Description": _provenance(result)})
    plt.close(fig)


def _provenance(result: OptimizationResult) -> str:
    meta = result.metadata
    disc = meta["discretization"]
    return (f"grid_hash={meta['grid_hash']} inputs_hash={meta['inputs_hash']} "
            f"index_samples={disc['index_samples']} "
            f"middle_samples={disc['middle_samples']} "
            f"thumb_samples={disc['thumb_samples']}")


def _write_topk_csv(path: str, result: OptimizationResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {_provenance(result)}\n")
        writer = csv.writer(fh)
        writer.writerow([
            "rank", "linear_index", "x_mm", "y_mm", "z_mm",
            "roll_deg", "pitch_deg", "yaw_deg",
            "w_lo_mm", "w_hi_mm", "w_width_mm", "w_empty",
        ])
        for rank, entry in enumerate(result.top_k, start=1):
            cfg = entry.config
            iv = entry.interval
            writer.writerow([
                rank, entry.linear_index,
                repr(cfg.x), repr(cfg.y), repr(cfg.z),
                repr(cfg.roll / _DEG), repr(cfg.pitch / _DEG), repr(cfg.yaw / _DEG),
                repr(iv.lo), repr(iv.hi), repr(iv.width), iv.empty,
            ])


def cmd_optimize(args) -> int:
    try:
        run = load_run_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    workers = _default_workers(args.workers, run.workers)
    checkpoint = args.checkpoint or run.checkpoint_path
    options = OptimizeOptions(
        workers=workers,
        top_k=args.top_k if args.top_k is not None else run.top_k,
        checkpoint_path=checkpoint,
        checkpoint_every=run.checkpoint_every,
        limit=args.limit,
    )
    out_dir = args.out or run.output_dir
    os.makedirs(out_dir, exist_ok=True)

    result = optimize(run.hand, run.requirements, run.grid, run.deformation_mm,
                      options)

    result_path = os.path.join(out_dir, "result.json")
    with open(result_path, "w", encoding="utf-8") as fh:
        json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True)
    _write_topk_csv(os.path.join(out_dir, "topk.csv"), result)
    if result.omega_opt is not None:
        _write_heatmap_svg(os.path.join(out_dir, "heatmap.svg"), run, result)

    log = {
        "workers": result.runtime["workers"],
        "wall_time_s": result.runtime["wall_time_s"],
        "configs_per_s": result.runtime["configs_per_s"],
        "processed": result.runtime["processed"],
        "completed": result.completed,
    }
    with open(os.path.join(out_dir, "run_log.json"), "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2)

    print(f"evaluated {result.evaluated_count}/{run.grid.total} configurations "
          f"({result.runtime['configs_per_s']:.0f} configs/s, "
          f"{result.runtime['wall_time_s']:.1f} s, {workers} workers)")
    print(f"valid: {result.valid_count}  stage counts: {result.stage_counts}")
    if result.omega_opt is None:
        print("no valid configuration found")
        return 2
    cfg = result.omega_opt
    print(f"omega_opt: x={cfg.x:.3f} y={cfg.y:.3f} z={cfg.z:.3f} mm, "
          f"roll={cfg.roll / _DEG:.3f} pitch={cfg.pitch / _DEG:.3f} "
          f"yaw={cfg.yaw / _DEG:.3f} deg")
    print(f"W(omega_opt) = [{result.w_interval.lo:.3f}, {result.w_interval.hi:.3f}] mm "
          f"(|W| = {result.w_max:.3f} mm)")
    print(f"artifacts written to {out_dir}/")
    return 0


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def _print_verdict(verdict: GraspVerdict) -> None:
    def fmt_check(name, chk):
        status = "PASS" if chk.ok else "FAIL"
        rmin = "n/a" if chk.r_min is None else f"{chk.r_min:.3f}"
        rmax = "n/a" if chk.r_max is None else f"{chk.r_max:.3f}"
        print(f"  {name:<10} {status}  r_min={rmin} r_max={rmax} mm  "
              f"valid_pairs={chk.valid_pairs}  "
              f"best_alpha={chk.alpha_best / _DEG:.1f} deg  "
              f"best_force={chk.force_best / _DEG:.1f} deg")
        for v in chk.violations:
            print(f"             - {v}")

    fmt_check("precision", verdict.precision)
    fmt_check("lateral", verdict.lateral)
    t = verdict.tripod
    status = "PASS" if t.ok else "FAIL"
    rmin = "n/a" if t.r_min is None else f"{t.r_min:.3f}"
    rmax = "n/a" if t.r_max is None else f"{t.r_max:.3f}"
    print(f"  {'tripod':<10} {status}  r_min={rmin} r_max={rmax} mm  "
          f"valid_triples={t.valid_triples}")
    for v in t.violations:
        print(f"             - {v}")
    print(f"  overall: {'VALID' if verdict.valid else 'INVALID'}")


def cmd_check(args) -> int:
    try:
        run = load_run_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = _parse_omega(args.omega)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2

    verdict, interval = evaluate_one(cfg, run.hand, run.requirements,
                                     run.deformation_mm)
    print(f"configuration: {args.omega}")
    _print_verdict(verdict)

    from .optimizer import evaluate_transition

    analysis = evaluate_transition(cfg, run.hand, run.requirements,
                                   run.deformation_mm)
    print("transition analysis per index sample:")
    for rec in analysis.per_index:
        if rec.j_lateral is None:
            print(f"  i={rec.index_step:<3} no critical points")
        else:
            print(f"  i={rec.index_step:<3} j_L={rec.j_lateral:<3} "
                  f"j_P={rec.j_precision:<3} d=[{rec.d_min:.2f}, {rec.d_max:.2f}] mm  "
                  f"W_i=[{rec.width.lo:.2f}, {rec.width.hi:.2f}]"
                  f"{' (empty)' if rec.width.empty else ''}")
    ov = analysis.overall
    if ov.empty:
        print("W: empty")
    else:
        print(f"W: [{ov.lo:.3f}, {ov.hi:.3f}] mm (|W| = {ov.width:.3f})")
    if verdict.valid and not interval.empty:
        print("grasp-valid with non-empty manipulation range")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    reports = oracle.run_verification(perturb_mm=args.perturb_mm)
    writer = csv.writer(sys.stdout)
    writer.writerow(["case_id", "inputs", "oracle_value", "main_value",
                     "abs_dev", "rel_dev", "tolerance", "pass"])
    failures = 0
    for rep in reports:
        writer.writerow([rep.case_id, rep.inputs, repr(rep.oracle_value),
                         repr(rep.main_value), repr(rep.abs_dev),
                         repr(rep.rel_dev), repr(rep.tolerance),
                         "yes" if rep.passed else "NO"])
        if not rep.passed:
            failures += 1
    if failures:
        print(f"verification FAILED: {failures}/{len(reports)} cases deviate",
              file=sys.stderr)
        return 1
    print(f"verification passed: {len(reports)} cases", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# transition
# ---------------------------------------------------------------------------

def cmd_transition(args) -> int:
    try:
        run = load_run_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = _parse_omega(args.omega)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    width = args.width
    if width < 0:
        print("usage error: --width must be non-negative", file=sys.stderr)
        return 2

    from .optimizer import evaluate_transition

    analysis = evaluate_transition(cfg, run.hand, run.requirements,
                                   run.deformation_mm)
    usable = [rec for rec in analysis.per_index if rec.j_lateral is not None]
    if not usable:
        print("configuration is not lateral/precision-capable at any index "
              "sample", file=sys.stderr)
        return 2

    dm = run.deformation_mm
    tip_sum = run.hand.radii.thumb + run.hand.radii.index
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else None
    writer = csv.writer(out if out else sys.stdout)
    writer.writerow(["index_step", "thumb_step", "distance_mm", "gap_mm",
                     "hold_ok"])
    all_hold = True
    thumb = run.hand.thumb_trajectory(cfg)
    for rec in analysis.per_index:
        if rec.j_lateral is None:
            all_hold = False
            continue
        for j in range(rec.j_lateral, rec.j_precision + 1):
            diff = thumb.positions[j] - run.hand.index.positions[rec.index_step]
            d = float(np.sqrt(np.sum(diff * diff)))
            gap = d - tip_sum
            hold = (width - 2.0 * dm) <= gap <= width
            all_hold = all_hold and hold
            writer.writerow([rec.index_step, j, repr(d), repr(gap),
                             "yes" if hold else "NO"])
    if out:
        out.close()
    covered = len(usable) == len(analysis.per_index)
    verdict = all_hold and covered
    print(f"width {width:g} mm: {'PASS' if verdict else 'FAIL'} "
          f"({len(usable)}/{len(analysis.per_index)} index samples with "
          f"transition ranges)", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thumbopt",
        description="Thumb rotation-axis design optimization for grasping "
                    "and in-hand manipulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run the exhaustive search")
    p_opt.add_argument("config", help="run config JSON path")
    p_opt.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or CPU count)")
    p_opt.add_argument("--checkpoint", default=None,
                       help="checkpoint file path (resume if it exists)")
    p_opt.add_argument("--top-k", type=int, default=None, dest="top_k")
    p_opt.add_argument("--limit", type=int, default=None,
                       help="evaluate at most N configurations then checkpoint")
    p_opt.add_argument("--out", default=None, help="artifact output directory")
    p_opt.set_defaults(func=cmd_optimize)

    p_chk = sub.add_parser("check", help="diagnose a single configuration")
    p_chk.add_argument("config")
    p_chk.add_argument("--omega", required=True,
                       help="x,y,z (mm), roll,pitch,yaw (deg)")
    p_chk.set_defaults(func=cmd_check)

    p_ver = sub.add_parser("verify", help="run oracle agreement fixtures")
    p_ver.add_argument("--perturb-mm", type=float, default=0.0,
                       help="inject a deliberate geometry error (negative control)")
    p_ver.set_defaults(func=cmd_verify)

    p_tr = sub.add_parser("transition", help="per-step hold table for one width")
    p_tr.add_argument("config")
    p_tr.add_argument("--omega", required=True)
    p_tr.add_argument("--width", type=float, required=True, help="object width (mm)")
    p_tr.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_tr.set_defaults(func=cmd_transition)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
