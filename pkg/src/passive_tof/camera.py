"""Ideal pinhole camera: per-pixel unit observation directions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import as_point

ROTATION_TOL = 1e-10


class PixelOutOfBounds(ValueError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_length: float = 0.025
    pixel_pitch: float = 17.5e-6
    width: int = 352
    height: int = 288
    # None -> centre of the sensor, (width/2, height/2)
    principal_point: tuple[float, float] | None = None

    def __post_init__(self):
        if self.principal_point is None:
            object.__setattr__(self, "principal_point", (self.width / 2.0, self.height / 2.0))
        else:
            object.__setattr__(self, "principal_point", tuple(float(c) for c in self.principal_point))
        if not self.focal_length > 0:
            raise ValueError("focal_length must be positive")
        if not self.pixel_pitch > 0:
            raise ValueError("pixel_pitch must be positive")
        if int(self.width) != self.width or self.width < 1:
            raise ValueError("width must be an integer >= 1")
        if int(self.height) != self.height or self.height < 1:
            raise ValueError("height must be an integer >= 1")
        u0, v0 = self.principal_point
        if not (0 <= u0 < self.width and 0 <= v0 < self.height):
            raise ValueError(f"principal point {self.principal_point} outside the sensor")


@dataclass(frozen=True)
class CameraPose:
    """World-from-camera pose; ``position`` is the receiver location."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: tuple[tuple[float, ...], ...] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in as_point(self.position)))
        rot = np.asarray(self.orientation, dtype=float)
        if rot.shape != (3, 3) or not np.all(np.isfinite(rot)):
            raise ValueError("orientation must be a finite 3x3 matrix")
        if not np.allclose(rot.T @ rot, np.eye(3), rtol=0, atol=ROTATION_TOL) or abs(
            np.linalg.det(rot) - 1.0
        ) > ROTATION_TOL:
            raise ValueError("orientation must be a proper rotation (orthonormal, det +1)")
        object.__setattr__(self, "orientation", tuple(tuple(float(c) for c in row) for row in rot))


def _directions(intr: CameraIntrinsics, pose: CameraPose, u, v) -> np.ndarray:
    # elementwise only, so scalar and grid evaluation round identically
    u0, v0 = intr.principal_point
    x = (u - u0) * intr.pixel_pitch
    y = (v - v0) * intr.pixel_pitch
    z = np.full_like(x, intr.focal_length)
    rot = pose.orientation
    wx = rot[0][0] * x + rot[0][1] * y + rot[0][2] * z
    wy = rot[1][0] * x + rot[1][1] * y + rot[1][2] * z
    wz = rot[2][0] * x + rot[2][1] * y + rot[2][2] * z
    norm = np.sqrt(wx * wx + wy * wy + wz * wz)
    return np.stack([wx / norm, wy / norm, wz / norm], axis=-1)


def pixel_direction(intr: CameraIntrinsics, pose: CameraPose, u: float, v: float) -> np.ndarray:
    """World-frame unit ray through (possibly fractional) pixel coordinate (u, v)."""
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        raise PixelOutOfBounds(f"pixel ({u}, {v}) outside {intr.width}x{intr.height}")
    return _directions(intr, pose, np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def direction_grid(intr: CameraIntrinsics, pose: CameraPose) -> np.ndarray:
    """Array of shape (height, width, 3); entry [v, u] is the ray through the centre of pixel (u, v)."""
    u = np.arange(intr.width, dtype=float) + 0.5
    v = np.arange(intr.height, dtype=float) + 0.5
    uu, vv = np.meshgrid(u, v)
    return _directions(intr, pose, uu, vv)
