"""Bistatic ellipsoid model and closed-form ray/ellipsoid depth correction.

A passive ToF pixel measures the total optical path emitter -> target ->
receiver.  For a fixed total path the admissible targets lie on an
ellipsoid whose foci are the emitter and the receiver.  Intersecting that
ellipsoid with the pixel's observation ray gives the true receiver-target
distance in closed form.  A bisection root finder on the raw path equation
is provided as an independent check of the closed form.

Scalar functions raise on degenerate input.  The ``*_array`` variants are
vectorised over rays and report failures as NaN instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_TRIANGLE = 1e-12
EPS_DENOMINATOR = 1e-12
UNIT_NORM_TOL = 1e-12

BISECTION_MAX_ITER = 200
BISECTION_WIDTH = 1e-12


class GeometryError(ValueError):
    pass


class DegenerateDenominator(GeometryError):
    """Ray is asymptotically parallel to the ellipsoid."""


class NonPhysicalDepth(GeometryError):
    """Closed form yields a target behind the receiver."""


class RangeBelowBaseline(GeometryError):
    """Total path too short for any ellipsoid to exist."""


class NonPositiveDepth(GeometryError):
    pass


class NoIntersection(GeometryError):
    pass


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point has non-finite coordinates: {arr}")
    return arr


def as_unit(n, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    arr = as_point(n)
    norm = float(np.sqrt(arr @ arr))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"direction is not unit length (norm={norm!r})")
    return arr


def normalize(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    return arr / np.linalg.norm(arr, axis=-1, keepdims=True)


@dataclass(frozen=True)
class BistaticGeometry:
    """Emitter and receiver positions; the two ellipsoid foci."""

    emitter: tuple[float, float, float]
    receiver: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "emitter", tuple(float(c) for c in as_point(self.emitter)))
        object.__setattr__(self, "receiver", tuple(float(c) for c in as_point(self.receiver)))

    @property
    def baseline(self) -> float:
        return baseline_distance(self.emitter, self.receiver)

    @property
    def emitter_array(self) -> np.ndarray:
        return np.array(self.emitter)

    @property
    def receiver_array(self) -> np.ndarray:
        return np.array(self.receiver)


def baseline_distance(emitter, receiver) -> float:
    return float(np.linalg.norm(as_point(emitter) - as_point(receiver)))


def bistatic_total_path(geom: BistaticGeometry, target) -> float:
    """Emitter-to-target plus target-to-receiver distance."""
    t = as_point(target)
    return float(np.linalg.norm(geom.emitter_array - t) + np.linalg.norm(geom.receiver_array - t))


def target_from_depth(receiver, direction, depth: float) -> np.ndarray:
    if not depth > 0:
        raise NonPositiveDepth(f"depth must be positive, got {depth!r}")
    return as_point(receiver) + as_unit(direction) * depth


def _check_range(geom: BistaticGeometry, total_path: float, eps_tri: float) -> None:
    if not np.isfinite(total_path) or total_path <= geom.baseline + eps_tri:
        raise RangeBelowBaseline(
            f"total path {total_path!r} m does not exceed baseline {geom.baseline!r} m"
        )


def correct_depth(
    geom: BistaticGeometry,
    direction,
    total_path: float,
    eps_tri: float = EPS_TRIANGLE,
    eps_den: float = EPS_DENOMINATOR,
) -> float:
    """Receiver-target distance along ``direction`` for a measured total path.

    Solves ``||E - (R + t n)|| + t = d`` for ``t``.  Squaring once gives the
    linear equation ``t (2G - 2d) = b^2 - d^2`` with ``G = <E - R, n>`` and
    ``b`` the baseline.
    """
    n = as_unit(direction)
    _check_range(geom, total_path, eps_tri)
    b = geom.baseline
    g = float((geom.emitter_array - geom.receiver_array) @ n)
    den = 2.0 * g - 2.0 * total_path
    if abs(den) <= eps_den:
        raise DegenerateDenominator(f"|2G - 2d| = {abs(den)!r} <= {eps_den!r}")
    # (b - d)(b + d) keeps precision when d is close to the baseline
    depth = (b - total_path) * (b + total_path) / den
    if not depth > 0:
        raise NonPhysicalDepth(f"corrected depth {depth!r} is not positive")
    return depth


def correct_depth_array(emitter, receiver, directions, total_path, eps_tri=EPS_TRIANGLE, eps_den=EPS_DENOMINATOR):
    """Vectorised closed form over ``directions[..., 3]`` and ``total_path[...]``.

    ``emitter``/``receiver`` broadcast the same way as ``directions``.
    Entries failing any precondition come back as NaN.
    """
    e = np.asarray(emitter, dtype=float)
    r = np.asarray(receiver, dtype=float)
    n = np.asarray(directions, dtype=float)
    d = np.asarray(total_path, dtype=float)
    a = e - r
    b = np.sqrt(np.sum(a * a, axis=-1))
    g = np.sum(a * n, axis=-1)
    den = 2.0 * g - 2.0 * d
    ok = np.isfinite(d) & (d > b + eps_tri) & (np.abs(den) > eps_den)
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = (b - d) * (b + d) / den
    ok &= depth > 0
    return np.where(ok, depth, np.nan)


def _path_residual(a, n, t, d):
    # f(t) = ||E - (R + t n)|| + t - d, with a = E - R
    diff = a - t[..., None] * n
    return np.sqrt(np.sum(diff * diff, axis=-1)) + t - d


def oracle_depth_bisection_array(emitter, receiver, directions, total_path,
                                 max_iter=BISECTION_MAX_ITER, width=BISECTION_WIDTH):
    """Bisection on the raw path equation, vectorised over rays.

    Does not use the closed form.  Rays with no sign change in ``(0, d]``
    return NaN.
    """
    e = np.asarray(emitter, dtype=float)
    r = np.asarray(receiver, dtype=float)
    n = np.asarray(directions, dtype=float)
    d = np.asarray(total_path, dtype=float)
    a = np.broadcast_to(e - r, n.shape)
    d = np.broadcast_to(d, n.shape[:-1]).astype(float)

    lo = np.zeros_like(d)
    hi = d.copy()
    ok = (_path_residual(a, n, np.full_like(d, np.finfo(float).tiny), d) <= 0) & (
        _path_residual(a, n, hi, d) >= 0
    )
    for _ in range(max_iter):
        if np.all(hi - lo < width):
            break
        mid = 0.5 * (lo + hi)
        below = _path_residual(a, n, mid, d) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(ok, 0.5 * (lo + hi), np.nan)


def oracle_depth_bisection(
    geom: BistaticGeometry,
    direction,
    total_path: float,
    eps_tri: float = EPS_TRIANGLE,
) -> float:
    n = as_unit(direction)
    _check_range(geom, total_path, eps_tri)
    t = oracle_depth_bisection_array(geom.emitter, geom.receiver, n, total_path)
    if np.isnan(t):
        raise NoIntersection(f"no sign change of the path residual on (0, {total_path!r}]")
    return float(t)
