"""Reconstruct the stepped Boehler star and save depth/error images.

    python scripts/boehler_star.py --out-dir results/ [--sigma 0.02] [--png]
"""

import argparse
from pathlib import Path

import numpy as np

from passive_tof.config import boehler_star_scenario
from passive_tof.fileio import write_pfm, write_pgm
from passive_tof.pipeline import reconstruct, simulate_frame, z_levels
from passive_tof.scene import ground_truth_paths
from passive_tof.signal import NoiseModel


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    parser.add_argument("--sigma", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--png", action="store_true", help="also render PNGs with matplotlib")
    args = parser.parse_args()

    noise = NoiseModel("additive_gaussian" if args.sigma > 0 else "none", args.sigma, args.seed)
    cfg = boehler_star_scenario(noise=noise)
    frame = simulate_frame(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.signal, cfg.noise, cfg.sweep)
    depth, amp = reconstruct(frame, cfg.geometry, cfg.intrinsics, cfg.pose)
    truth = ground_truth_paths(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose)

    star = cfg.scene.primitives[0]
    mid = star.center[2] - star.depth_step / 2
    z = z_levels(depth, cfg.intrinsics, cfg.pose)
    err = depth.depth - truth.d_rt
    print(f"valid pixels: {depth.valid.sum()}")
    print(f"foreground share: {(z < mid)[depth.valid].mean():.3f}")
    print(f"|error| < 1 mm: {(np.abs(err) < 1e-3)[depth.valid].mean():.4f}")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_pfm(args.out_dir / "star_depth.pfm", depth)
    write_pgm(args.out_dir / "star_intensity.pgm", amp)
    if args.png:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        im = axes[0].imshow(z * 1e3, cmap="viridis")
        axes[0].set_title("reconstructed z [mm]")
        fig.colorbar(im, ax=axes[0])
        im = axes[1].imshow(err * 1e3, cmap="RdBu")
        axes[1].set_title("depth error [mm]")
        fig.colorbar(im, ax=axes[1])
        fig.tight_layout()
        fig.savefig(args.out_dir / "star.png", dpi=120)


if __name__ == "__main__":
    main()
