"""Forward simulation of correlation frames and inverse depth reconstruction.

Forward: ray-cast the scene per pixel, convert each hit's excess path over
the baseline into a correlation shift, and sample the pixel's correlation
waveform over the delay sweep.  Inverse: estimate the shift per pixel,
convert it back to a total path, and intersect the pixel ray with the
resulting ellipsoid.

Frames are arrays indexed ``[v, u]`` (row = image line).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, CameraPose, direction_grid
from .geometry import BistaticGeometry, correct_depth_array
from .scene import GroundTruth, Scene, ground_truth_paths
from .signal import (
    SPEED_OF_LIGHT,
    CalibrationParams,
    CorrelationKind,
    CorrelationModel,
    DelaySweep,
    NoiseModel,
    correlation_value,
    fit_sinusoid,
    matched_filter,
    wrap_centered,
)

ESTIMATORS = ("least_squares", "matched_filter")
DEFAULT_GRID_STEP = 10e-12


class MetadataMismatch(ValueError):
    pass


class NoOverlap(ValueError):
    pass


@dataclass
class CorrelationFrame:
    geometry: BistaticGeometry
    intrinsics: CameraIntrinsics
    pose: CameraPose
    signal: CorrelationModel
    sweep: DelaySweep
    samples: np.ndarray  # (height, width, K); zeros on invalid pixels
    valid: np.ndarray  # (height, width) bool
    noise: NoiseModel = field(default_factory=NoiseModel)

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height


@dataclass
class DepthMap:
    depth: np.ndarray  # metres, NaN where invalid
    valid: np.ndarray

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]


@dataclass
class IntensityMap:
    amplitude: np.ndarray
    valid: np.ndarray


def pixel_noise(noise: NoiseModel, height: int, width: int, count: int) -> np.ndarray:
    """Noise draws for every (pixel, sample) slot of a frame.

    The array is a fixed function of the seed and the slot index, so a
    pixel's noise does not depend on which other pixels are valid or on the
    order they are processed in.
    """
    if not noise.active:
        return np.zeros((height, width, count))
    rng = np.random.default_rng(noise.seed)
    return rng.normal(0.0, noise.sigma, size=(height, width, count))


def pixel_amplitude(signal: CorrelationModel, scene: Scene, truth: GroundTruth) -> np.ndarray:
    amp = signal.amplitude * truth.reflectivity
    if scene.falloff:
        amp = amp / truth.d_rt**2
    return amp


def simulate_frame(scene: Scene, geom: BistaticGeometry, intr: CameraIntrinsics, pose: CameraPose,
                   signal: CorrelationModel, noise: NoiseModel, sweep: DelaySweep,
                   calib: CalibrationParams = CalibrationParams()) -> CorrelationFrame:
    truth = ground_truth_paths(scene, geom, intr, pose)
    valid = truth.valid
    excess = np.where(valid, truth.total_path - geom.baseline, 0.0)
    shift = excess / SPEED_OF_LIGHT + calib.delay_offset
    amp = np.where(valid, pixel_amplitude(signal, scene, truth), 0.0)

    delays = sweep.array
    lag = delays[None, None, :] - shift[..., None]
    unit = dataclasses.replace(signal, amplitude=1.0, offset=0.0, shift=0.0)
    clean = amp[..., None] * correlation_value(unit, lag) + signal.offset
    samples = clean + pixel_noise(noise, intr.height, intr.width, len(sweep))
    samples = np.where(valid[..., None], samples, 0.0)
    return CorrelationFrame(geom, intr, pose, signal, sweep, samples, valid.copy(), noise)


def check_frame(frame: CorrelationFrame, geom: BistaticGeometry, intr: CameraIntrinsics,
                pose: CameraPose, tol: float = 1e-12) -> None:
    if (frame.width, frame.height) != (intr.width, intr.height):
        raise MetadataMismatch(
            f"frame is {frame.width}x{frame.height}, camera is {intr.width}x{intr.height}"
        )
    if frame.samples.shape != (intr.height, intr.width, len(frame.sweep)):
        raise MetadataMismatch(f"sample array shape {frame.samples.shape} inconsistent with metadata")
    for name, a, b in (
        ("emitter", frame.geometry.emitter, geom.emitter),
        ("receiver", frame.geometry.receiver, geom.receiver),
        ("principal_point", frame.intrinsics.principal_point, intr.principal_point),
        ("focal_length", (frame.intrinsics.focal_length,), (intr.focal_length,)),
        ("pixel_pitch", (frame.intrinsics.pixel_pitch,), (intr.pixel_pitch,)),
        ("orientation", np.ravel(frame.pose.orientation), np.ravel(pose.orientation)),
    ):
        if not np.allclose(a, b, rtol=tol, atol=tol):
            raise MetadataMismatch(f"{name} differs: frame {a} vs config {b}")


def estimate_shifts(frame: CorrelationFrame, estimator: str = "least_squares",
                    grid_step: float = DEFAULT_GRID_STEP):
    """Per-pixel (shift, amplitude) arrays, NaN on invalid pixels."""
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    delays = frame.sweep.array
    y = frame.samples[frame.valid]
    shift = np.full(frame.valid.shape, np.nan)
    amp = np.full(frame.valid.shape, np.nan)
    if y.shape[0] == 0:
        return shift, amp
    if estimator == "least_squares":
        s, a, _ = fit_sinusoid(y, delays, frame.signal.frequency)
    else:
        template = dataclasses.replace(frame.signal, amplitude=1.0, offset=0.0, shift=0.0)
        s = matched_filter(y, delays, template, grid_step)
        a = _template_amplitude(y, delays, template, s)
    shift[frame.valid] = s
    amp[frame.valid] = a
    return shift, amp


def _template_amplitude(y, delays, template, shifts):
    # linear fit y ~ a * template(delay - shift) + b per pixel
    t = correlation_value(template, delays[None, :] - shifts[:, None])
    tc = t - t.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    den = np.sum(tc * tc, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sum(tc * yc, axis=1) / den
    return np.where(den > 0, np.maximum(a, 0.0), 0.0)


def reconstruct(frame: CorrelationFrame, geom: BistaticGeometry, intr: CameraIntrinsics,
                pose: CameraPose, calib: CalibrationParams = CalibrationParams(),
                estimator: str = "least_squares", grid_step: float = DEFAULT_GRID_STEP):
    """Depth and intensity maps from a correlation frame.

    Pixels whose estimate leaves no valid ellipsoid intersection are marked
    invalid; the rest of the frame is unaffected.
    """
    check_frame(frame, geom, intr, pose)
    shift, amp = estimate_shifts(frame, estimator, grid_step)
    period = frame.signal.period
    # residual delay after calibration, unwrapped into [0, period)
    residual = np.mod(shift - calib.delay_offset, period)
    total = SPEED_OF_LIGHT * residual + geom.baseline - calib.distance_offset
    total = np.where(total > 0, total, np.nan)
    dirs = direction_grid(intr, pose)
    depth = correct_depth_array(geom.emitter_array, geom.receiver_array, dirs, total)
    valid = frame.valid & np.isfinite(depth)
    depth = np.where(valid, depth, np.nan)
    amp_valid = frame.valid & np.isfinite(amp)
    return DepthMap(depth, valid), IntensityMap(np.where(amp_valid, amp, np.nan), amp_valid)


def depth_rmse(depth: DepthMap, truth) -> tuple[float, int]:
    """RMSE over pixels valid in both maps, and how many pixels were compared.

    ``truth`` is a (height, width) array of receiver-target distances with
    NaN where unknown.
    """
    truth = np.asarray(truth, dtype=float)
    if truth.shape != depth.depth.shape:
        raise ValueError(f"shape mismatch: {depth.depth.shape} vs {truth.shape}")
    both = depth.valid & np.isfinite(truth)
    count = int(both.sum())
    if count == 0:
        raise NoOverlap("no pixel is valid in both maps")
    err = depth.depth[both] - truth[both]
    return float(np.sqrt(np.mean(err * err))), count


def calibrate_delay_offset(frame: CorrelationFrame, truth: GroundTruth,
                           estimator: str = "least_squares",
                           grid_step: float = DEFAULT_GRID_STEP) -> float:
    """System delay from a frame of a target with known geometry.

    Mean wrapped residual between estimated shifts and the shifts the known
    paths predict.
    """
    shift, _ = estimate_shifts(frame, estimator, grid_step)
    predicted = (truth.total_path - frame.geometry.baseline) / SPEED_OF_LIGHT
    use = frame.valid & truth.valid
    if not use.any():
        raise NoOverlap("no valid pixel to calibrate against")
    residual = wrap_centered(shift[use] - predicted[use], frame.signal.period)
    return float(np.mod(np.mean(residual), frame.signal.period))


def z_levels(depth: DepthMap, intr: CameraIntrinsics, pose: CameraPose) -> np.ndarray:
    """Distance of each reconstructed point along the optical axis."""
    dirs = direction_grid(intr, pose)
    axis = np.asarray(pose.orientation)[:, 2]
    return depth.depth * (dirs @ axis)
