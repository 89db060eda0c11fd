"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to see the pass/fail summary.
"""

import math
import time
from pathlib import Path

import numpy as np

from passive_tof.camera import CameraIntrinsics, direction_grid
from passive_tof.cli import oracle_check, run_bench
from passive_tof.config import boehler_star_scenario, reference_scenario
from passive_tof.geometry import BistaticGeometry, correct_depth
from passive_tof.pipeline import depth_rmse, reconstruct, simulate_frame, z_levels
from passive_tof.scene import ground_truth_paths
from passive_tof.signal import (
    CorrelationKind,
    CorrelationModel,
    DelaySweep,
    estimate_shift_least_squares,
    monte_carlo_shift_errors,
    sample_sweep,
)

# least-squares shift RMSE in seconds, recorded on the first green run:
# sigma = 1% of A, seed 42, 200 trials, four-phase sweep at 10 MHz
RECORDED_SHIFT_RMSE = 1.0644772463077793e-10


def _simulate_and_reconstruct(cfg):
    frame = simulate_frame(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.signal,
                           cfg.noise, cfg.sweep, cfg.calibration)
    depth, _ = reconstruct(frame, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.calibration)
    truth = ground_truth_paths(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose)
    return depth, truth


def test_1_oracle_equivalence(criterion):
    start = time.perf_counter()
    worst, _ = oracle_check(10_000, seed=42)
    elapsed = time.perf_counter() - start
    criterion(1, "closed form vs bisection", worst < 1e-9 and elapsed < 1.0,
              f"max rel err {worst:.2e} (< 1e-9), {elapsed:.3f} s (< 1 s)")


def test_2_monostatic_reduction(criterion):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        p = rng.uniform(-1, 1, 3)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        d = 10 ** rng.uniform(-2, 1)
        depth = correct_depth(BistaticGeometry(p, p), n, d)
        worst = max(worst, abs(depth - d / 2) / (d / 2))
    criterion(2, "monostatic reduction", worst < 1e-12, f"max rel err {worst:.2e} (< 1e-12)")


def test_3_reference_scenario_round_trip(criterion):
    cfg = reference_scenario()
    assert cfg.geometry.baseline == 0.1 and cfg.intrinsics.focal_length == 0.025
    assert len(cfg.sweep) == 4
    depth, truth = _simulate_and_reconstruct(cfg)
    rmse, count = depth_rmse(depth, truth.d_rt)
    criterion(3, "reference scenario round trip", rmse < 1e-6 and count == depth.valid.size,
              f"RMSE {rmse:.2e} m (< 1e-6) over {count} pixels")


def test_4_boehler_star(criterion):
    cfg = boehler_star_scenario()
    depth, truth = _simulate_and_reconstruct(cfg)
    star = cfg.scene.primitives[0]
    z_bg = star.center[2]
    z_fg = z_bg - star.depth_step
    threshold = (z_fg + z_bg) / 2
    # true level from the ray cast, estimated level from the reconstruction
    axis_cos = direction_grid(cfg.intrinsics, cfg.pose)[..., 2]
    true_fg = truth.d_rt * axis_cos < threshold
    est_fg = z_levels(depth, cfg.intrinsics, cfg.pose) < threshold
    valid = depth.valid
    correct = (true_fg == est_fg)[valid].mean()
    within = (np.abs(depth.depth - truth.d_rt) < 1e-3)[valid].mean()
    fg_share = true_fg[valid].mean()
    ok = correct >= 0.99 and within >= 0.99 and 0.2 < fg_share < 0.8
    criterion(4, "Boehler star fidelity", ok,
              f"{correct:.2%} classified (>= 99%), {within:.2%} within 1 mm (>= 99%), "
              f"foreground share {fg_share:.2%}")


def test_5_four_phase_exactness(criterion):
    model = CorrelationModel(CorrelationKind.SINUSOIDAL, 10e6, 1.0, 2.0, 5e-9)
    sweep = DelaySweep((0.0, 25e-9, 50e-9, 75e-9))
    y = sample_sweep(model, sweep)
    # four-bucket closed form as the independent reference
    closed = math.atan2(y[1] - y[3], y[0] - y[2]) / (2 * math.pi * 10e6)
    shift, amp, off = estimate_shift_least_squares(y, sweep, 10e6)
    ok = abs(shift - 5e-9) < 1e-12 and abs(closed - 5e-9) < 1e-12 and abs(amp - 1) < 1e-9 and abs(off - 2) / 2 < 1e-9
    criterion(5, "four-phase estimator", ok,
              f"shift err {abs(shift - 5e-9):.1e} s (< 1 ps), A err {abs(amp - 1):.1e}, B rel err {abs(off - 2) / 2:.1e}")


def test_6_noise_regression(criterion):
    model = CorrelationModel(CorrelationKind.SINUSOIDAL, 10e6, 1.0, 2.0, 5e-9)
    sweep = DelaySweep.four_phase(10e6)
    runs = [monte_carlo_shift_errors(model, sweep, 0.01 * model.amplitude, 200, seed=42) for _ in range(2)]
    rmse = [float(np.sqrt(np.mean(e * e))) for e in runs]
    ok = rmse[0] == rmse[1] == RECORDED_SHIFT_RMSE and rmse[0] < 2 * RECORDED_SHIFT_RMSE
    criterion(6, "noise robustness regression", ok,
              f"shift RMSE {rmse[0]!r} s vs recorded {RECORDED_SHIFT_RMSE!r} (bit-exact, < 2x)")


def test_7_performance(criterion):
    cfg = reference_scenario()
    assert (cfg.intrinsics.width, cfg.intrinsics.height, len(cfg.sweep)) == (352, 288, 4)
    run_bench(cfg)  # warm-up
    elapsed, rmse = min(run_bench(cfg) for _ in range(3))
    criterion(7, "full-frame bench", elapsed < 1.0, f"{elapsed:.3f} s (< 1 s), RMSE {rmse:.1e} m")


def test_8_documented_only(criterion):
    readme = (Path(__file__).resolve().parent.parent / "README.md").read_text()
    criterion(8, "power savings / hardware demo", "Not reproduced" in readme,
              "documented in README, not reproducible in software")
