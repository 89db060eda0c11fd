"""Simulation and reconstruction for passive bistatic time-of-flight imaging."""

from .camera import CameraIntrinsics, CameraPose, direction_grid, pixel_direction
from .config import RunConfig, boehler_star_scenario, load_config, reference_scenario
from .geometry import (
    BistaticGeometry,
    baseline_distance,
    bistatic_total_path,
    correct_depth,
    oracle_depth_bisection,
    target_from_depth,
)
from .pipeline import CorrelationFrame, DepthMap, IntensityMap, depth_rmse, reconstruct, simulate_frame
from .scene import BoehlerStar, Plane, Scene, ground_truth_paths, ray_cast
from .signal import (
    SPEED_OF_LIGHT,
    CalibrationParams,
    CorrelationKind,
    CorrelationModel,
    DelaySweep,
    NoiseModel,
    correlation_value,
    estimate_shift_least_squares,
    estimate_shift_matched_filter,
    sample_sweep,
    shift_to_path,
    threshold_trigger,
)

__version__ = "0.1.0"
