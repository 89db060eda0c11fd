"""Synthetic scenes and nearest-hit ray casting for ground-truth paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .camera import CameraIntrinsics, CameraPose, direction_grid
from .geometry import BistaticGeometry, as_point, as_unit

HIT_EPS = 1e-12
PARALLEL_EPS = 1e-15


@dataclass(frozen=True)
class Plane:
    point: tuple[float, float, float]
    normal: tuple[float, float, float]
    reflectivity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(as_point(self.point).tolist()))
        object.__setattr__(self, "normal", tuple(as_unit(self.normal, tol=1e-9).tolist()))
        _check_reflectivity(self.reflectivity)


@dataclass(frozen=True)
class BoehlerStar:
    """Two-level stepped star target.

    The background is a disc of ``outer_radius`` through ``center``.  Spokes
    are star-shaped plates raised by ``depth_step`` along ``normal``, which
    should therefore face the camera.  A polar sector ``k`` of the plate
    plane is a spoke when ``floor(spoke_count * theta / 2pi)`` is even.
    """

    center: tuple[float, float, float] = (0.0, 0.0, 0.2)
    normal: tuple[float, float, float] = (0.0, 0.0, -1.0)
    outer_radius: float = 0.05
    spoke_count: int = 8
    depth_step: float = 0.01
    reflectivity_fg: float = 1.0
    reflectivity_bg: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(as_point(self.center).tolist()))
        object.__setattr__(self, "normal", tuple(as_unit(self.normal, tol=1e-9).tolist()))
        if not self.outer_radius > 0:
            raise ValueError("outer_radius must be positive")
        if int(self.spoke_count) != self.spoke_count or self.spoke_count < 2 or self.spoke_count % 2:
            raise ValueError("spoke_count must be an even integer >= 2")
        if not np.isfinite(self.depth_step):
            raise ValueError("depth_step must be finite")
        _check_reflectivity(self.reflectivity_fg)
        _check_reflectivity(self.reflectivity_bg)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane axes (e1, e2) defining the polar angle."""
        n = np.array(self.normal)
        helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = helper - (helper @ n) * n
        e1 /= np.linalg.norm(e1)
        return e1, np.cross(n, e1)

    def in_spoke(self, theta):
        sector = np.floor(self.spoke_count * np.mod(theta, 2 * np.pi) / (2 * np.pi))
        return np.mod(sector, 2) == 0


Primitive = Union[Plane, BoehlerStar]


def _check_reflectivity(r):
    if not 0 < r <= 1:
        raise ValueError(f"reflectivity must lie in (0, 1], got {r!r}")


@dataclass(frozen=True)
class Scene:
    primitives: tuple[Primitive, ...] = ()
    # scale amplitude by 1/d_RT^2
    falloff: bool = False

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))


@dataclass(frozen=True)
class Hit:
    distance: float
    reflectivity: float


def _plane_hit(point, normal, origin, dirs):
    denom = dirs @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((point - origin) @ normal) / denom
    return np.where((np.abs(denom) > PARALLEL_EPS) & (t > HIT_EPS), t, np.inf)


def _cast_primitive(prim: Primitive, origin, dirs):
    """Distances (inf = miss) and reflectivities for rays ``dirs[..., 3]``."""
    n = np.array(prim.normal)
    if isinstance(prim, Plane):
        t = _plane_hit(np.array(prim.point), n, origin, dirs)
        return t, np.full(t.shape, prim.reflectivity)

    center = np.array(prim.center)
    e1, e2 = prim.basis()

    def local(t):
        rel = origin + np.where(np.isfinite(t), t, 0.0)[..., None] * dirs - center
        return rel @ e1, rel @ e2

    t_fg = _plane_hit(center + prim.depth_step * n, n, origin, dirs)
    x, y = local(t_fg)
    fg = np.isfinite(t_fg) & (np.hypot(x, y) <= prim.outer_radius) & prim.in_spoke(np.arctan2(y, x))

    t_bg = _plane_hit(center, n, origin, dirs)
    x, y = local(t_bg)
    bg = np.isfinite(t_bg) & (np.hypot(x, y) <= prim.outer_radius)

    t_fg = np.where(fg, t_fg, np.inf)
    t_bg = np.where(bg, t_bg, np.inf)
    use_fg = t_fg <= t_bg
    return np.where(use_fg, t_fg, t_bg), np.where(use_fg, prim.reflectivity_fg, prim.reflectivity_bg)


def ray_cast_array(scene: Scene, origin, dirs):
    """Nearest hit per ray: (distance, reflectivity) with distance inf on a miss."""
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    best_t = np.full(dirs.shape[:-1], np.inf)
    best_r = np.zeros(dirs.shape[:-1])
    for prim in scene.primitives:
        t, r = _cast_primitive(prim, origin, dirs)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_r = np.where(closer, r, best_r)
    return best_t, best_r


def ray_cast(scene: Scene, origin, direction) -> Hit | None:
    """Nearest positive-distance hit, or None for a miss."""
    t, r = ray_cast_array(scene, as_point(origin), as_unit(direction))
    if not np.isfinite(t):
        return None
    return Hit(float(t), float(r))


@dataclass
class GroundTruth:
    """Per-pixel arrays of shape (height, width); NaN where the ray missed."""

    d_et: np.ndarray
    d_rt: np.ndarray
    reflectivity: np.ndarray
    valid: np.ndarray = field(init=False)

    def __post_init__(self):
        self.valid = np.isfinite(self.d_rt)

    @property
    def total_path(self) -> np.ndarray:
        return self.d_et + self.d_rt


def ground_truth_paths(scene: Scene, geom: BistaticGeometry, intr: CameraIntrinsics,
                       pose: CameraPose, dirs: np.ndarray | None = None) -> GroundTruth:
    if dirs is None:
        dirs = direction_grid(intr, pose)
    receiver = geom.receiver_array
    t, refl = ray_cast_array(scene, receiver, dirs)
    hit = np.isfinite(t)
    d_rt = np.where(hit, t, np.nan)
    targets = receiver + np.where(hit, t, 0.0)[..., None] * dirs
    diff = geom.emitter_array - targets
    d_et = np.where(hit, np.sqrt(np.sum(diff * diff, axis=-1)), np.nan)
    return GroundTruth(d_et=d_et, d_rt=d_rt, reflectivity=np.where(hit, refl, np.nan))


def reference_plane_scene(distance: float = 0.2) -> Scene:
    """Flat target facing the camera at ``distance`` along +z."""
    return Scene((Plane((0.0, 0.0, distance), (0.0, 0.0, -1.0)),))


def boehler_star_scene() -> Scene:
    return Scene((BoehlerStar(),))
