"""Shift and depth error of the four-phase least-squares estimator versus noise.

    python scripts/noise_sweep.py [--trials 2000] [--seed 42]
"""

import argparse

import numpy as np

from passive_tof.signal import SPEED_OF_LIGHT, CorrelationKind, CorrelationModel, DelaySweep, monte_carlo_shift_errors


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--samples", type=int, default=4, help="delays per period")
    args = parser.parse_args()

    model = CorrelationModel(CorrelationKind.SINUSOIDAL, 10e6, 1.0, 2.0, 5e-9)
    sweep = DelaySweep.uniform(args.samples, model.period / args.samples)
    omega = 2 * np.pi * model.frequency
    print(f"{'sigma/A':>8} {'shift rmse [ps]':>16} {'predicted [ps]':>15} {'path rmse [mm]':>15}")
    for sigma in (0.001, 0.003, 0.01, 0.03, 0.1):
        err = monte_carlo_shift_errors(model, sweep, sigma, args.trials, args.seed)
        rmse = np.sqrt(np.mean(err**2))
        # small-noise phase std: sigma / (A sqrt(K/2))
        predicted = sigma / np.sqrt(args.samples / 2) / omega
        print(f"{sigma:8.3f} {rmse * 1e12:16.2f} {predicted * 1e12:15.2f} {rmse * SPEED_OF_LIGHT * 1e3:15.2f}")


if __name__ == "__main__":
    main()
