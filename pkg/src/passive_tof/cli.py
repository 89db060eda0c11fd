"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse failure, 2 invalid config,
3 frame/config metadata mismatch, 4 oracle violation.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import geometry
from .config import (
    ConfigInvalid,
    RunConfig,
    boehler_star_scenario,
    dump_config,
    load_config,
    reference_scenario,
)
from .fileio import (
    FrameParseError,
    atomic_write,
    depth_csv,
    read_frame,
    write_frame,
    write_pfm,
    write_pgm,
)
from .pipeline import MetadataMismatch, NoOverlap, depth_rmse, reconstruct, simulate_frame
from .scene import ground_truth_paths

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_MISMATCH, EXIT_ORACLE = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def simulate_from_config(cfg: RunConfig):
    return simulate_frame(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.signal,
                          cfg.noise, cfg.sweep, cfg.calibration)


def reconstruct_from_config(cfg: RunConfig, frame, estimator: str | None = None):
    return reconstruct(frame, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.calibration,
                       estimator or cfg.estimator.name, cfg.estimator.grid_step)


def cmd_simulate(config: str, out: str) -> int:
    try:
        cfg = load_config(config)
    except ConfigInvalid as exc:
        _err(f"invalid config: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    frame = simulate_from_config(cfg)
    try:
        write_frame(out, frame)
    except OSError as exc:
        _err(f"cannot write frame: {exc}")
        return EXIT_IO
    print(f"wrote {out}: {int(frame.valid.sum())} valid pixels x {len(frame.sweep)} delays")
    return EXIT_OK


def _derived(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_reconstruct(config: str, frame_path: str, out: str, intensity: str | None = None,
                    report: str | None = None, estimator: str | None = None) -> int:
    try:
        cfg = load_config(config)
    except ConfigInvalid as exc:
        _err(f"invalid config: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    try:
        frame = read_frame(frame_path)
    except FrameParseError as exc:
        _err(f"cannot parse frame {frame_path}: {exc}")
        return EXIT_IO
    except (OSError, UnicodeDecodeError) as exc:
        _err(f"cannot read frame: {exc}")
        return EXIT_IO
    try:
        depth, amp = reconstruct_from_config(cfg, frame, estimator)
    except MetadataMismatch as exc:
        _err(f"frame does not match config: {exc}")
        return EXIT_MISMATCH

    rows = [("width", depth.width), ("height", depth.height),
            ("frame_valid_pixels", int(frame.valid.sum())), ("depth_valid_pixels", int(depth.valid.sum())),
            ("estimator", estimator or cfg.estimator.name)]
    if cfg.scene.primitives:
        truth = ground_truth_paths(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose)
        try:
            rmse, count = depth_rmse(depth, truth.d_rt)
            rows += [("compared_pixels", count), ("rmse_m", repr(rmse))]
        except NoOverlap:
            rows += [("compared_pixels", 0), ("rmse_m", "")]

    out_path = Path(out)
    intensity_path = Path(intensity) if intensity else _derived(out_path, ".pgm")
    report_path = Path(report) if report else _derived(out_path, "_report.csv")
    try:
        write_pfm(out_path, depth)
        atomic_write(_derived(out_path, ".csv"), depth_csv(depth).encode("ascii"))
        scale = write_pgm(intensity_path, amp)
        rows.append(("intensity_scale", repr(scale)))
        text = "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
        atomic_write(report_path, text.encode("ascii"))
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_IO
    for k, v in rows:
        print(f"{k}: {v}")
    return EXIT_OK


def random_trials(trials: int, seed: int):
    """Random non-degenerate bistatic geometries for the closed-form check.

    Returns (emitter, receiver, direction, total_path) arrays; each trial is
    built from a target point, so the ray always meets its ellipsoid.
    """
    rng = np.random.default_rng(seed)
    e_out, r_out, n_out, d_out = [], [], [], []
    need = trials
    while need > 0:
        m = 2 * need + 16
        e = rng.uniform(-1.0, 1.0, (m, 3))
        r = rng.uniform(-1.0, 1.0, (m, 3))
        n = rng.normal(size=(m, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        t = 10.0 ** rng.uniform(-2.0, 1.0, m)
        target = r + t[:, None] * n
        d = np.linalg.norm(e - target, axis=1) + t
        b = np.linalg.norm(e - r, axis=1)
        g = np.sum((e - r) * n, axis=1)
        keep = (d >= b * (1 + 1e-6)) & (np.abs(2 * g - 2 * d) > 1e-6)
        idx = np.flatnonzero(keep)[:need]
        for arr, out in ((e, e_out), (r, r_out), (n, n_out), (d, d_out)):
            out.append(arr[idx])
        need -= idx.size
    return tuple(np.concatenate(x) for x in (e_out, r_out, n_out, d_out))


def oracle_check(trials: int, seed: int, closed_form=None) -> tuple[float, int]:
    """Max relative disagreement of closed form vs bisection, and its trial index."""
    closed_form = closed_form or geometry.correct_depth_array
    e, r, n, d = random_trials(trials, seed)
    fast = closed_form(e, r, n, d)
    slow = geometry.oracle_depth_bisection_array(e, r, n, d)
    rel = np.abs(fast - slow) / d
    rel = np.where(np.isfinite(rel), rel, np.inf)
    worst = int(np.argmax(rel))
    return float(rel[worst]), worst


def cmd_oracle(trials: int, seed: int, closed_form=None) -> int:
    if trials < 1:
        _err("--trials must be >= 1")
        return EXIT_CONFIG
    worst, idx = oracle_check(trials, seed, closed_form)
    print(f"trials={trials} seed={seed} max_relative_error={worst:.3e}")
    if not worst < 1e-9:
        e, r, n, d = (x[idx] for x in random_trials(trials, seed))
        print(f"violation at trial {idx}: emitter={e.tolist()} receiver={r.tolist()} "
              f"direction={n.tolist()} total_path={d!r}")
        return EXIT_ORACLE
    return EXIT_OK


def run_bench(cfg: RunConfig, estimator: str | None = None) -> tuple[float, float]:
    """Wall time of one simulate + reconstruct pass, and the resulting RMSE."""
    start = time.perf_counter()
    frame = simulate_from_config(cfg)
    depth, _ = reconstruct_from_config(cfg, frame, estimator)
    elapsed = time.perf_counter() - start
    truth = ground_truth_paths(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose)
    rmse, _ = depth_rmse(depth, truth.d_rt)
    return elapsed, rmse


def cmd_bench(config: str | None = None, estimator: str | None = None) -> int:
    try:
        cfg = load_config(config) if config else reference_scenario()
    except ConfigInvalid as exc:
        _err(f"invalid config: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    elapsed, rmse = run_bench(cfg, estimator)
    intr = cfg.intrinsics
    print(f"{intr.width}x{intr.height} pixels, {len(cfg.sweep)} delays, "
          f"estimator={estimator or cfg.estimator.name}: {elapsed:.3f} s, rmse={rmse:.3e} m")
    return EXIT_OK


def cmd_scenario(name: str, out: str) -> int:
    cfg = {"reference": reference_scenario, "boehler_star": boehler_star_scenario}[name]()
    try:
        atomic_write(out, dump_config(cfg).encode("utf-8"))
    except OSError as exc:
        _err(f"cannot write config: {exc}")
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="passive-tof", description="Passive bistatic ToF simulation and reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a correlation frame from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="correlation frame output (.csv)")

    p = sub.add_parser("reconstruct", help="reconstruct depth and intensity from a frame")
    p.add_argument("--config", required=True)
    p.add_argument("--frame", required=True)
    p.add_argument("--out", required=True, help="depth map output (.pfm); companion .csv alongside")
    p.add_argument("--intensity", help="intensity PGM output (default: <out stem>.pgm)")
    p.add_argument("--report", help="summary CSV output (default: <out stem>_report.csv)")
    p.add_argument("--estimator", choices=("least_squares", "matched_filter"))

    p = sub.add_parser("oracle", help="check the closed-form depth against bisection")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("bench", help="time a full-frame simulate + reconstruct")
    p.add_argument("--config")
    p.add_argument("--estimator", choices=("least_squares", "matched_filter"))

    p = sub.add_parser("scenario", help="write a canned scenario config")
    p.add_argument("name", choices=("reference", "boehler_star"))
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out)
    if args.command == "reconstruct":
        return cmd_reconstruct(args.config, args.frame, args.out, args.intensity, args.report, args.estimator)
    if args.command == "oracle":
        return cmd_oracle(args.trials, args.seed)
    if args.command == "bench":
        return cmd_bench(args.config, args.estimator)
    return cmd_scenario(args.name, args.out)


if __name__ == "__main__":
    sys.exit(main())
