"""Run configuration: a JSON document with a fixed set of key paths.

Unknown keys are rejected and every validation failure names the offending
key path (``noise.sigma``, ``scene.primitives[1].normal``, ...).  Dumping a
loaded config gives canonical JSON (sorted keys, explicit delay list), so
load -> dump is idempotent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .camera import CameraIntrinsics, CameraPose
from .geometry import BistaticGeometry
from .pipeline import DEFAULT_GRID_STEP, ESTIMATORS
from .scene import BoehlerStar, Plane, Scene
from .signal import CalibrationParams, CorrelationKind, CorrelationModel, DelaySweep, NoiseModel

IDENTITY = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


class ConfigInvalid(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class EstimatorConfig:
    name: str = "least_squares"
    grid_step: float = DEFAULT_GRID_STEP


@dataclass(frozen=True)
class RunConfig:
    geometry: BistaticGeometry
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    orientation: tuple = IDENTITY
    signal: CorrelationModel = field(default_factory=CorrelationModel)
    sweep: DelaySweep | None = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    scene: Scene = field(default_factory=Scene)
    calibration: CalibrationParams = field(default_factory=CalibrationParams)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)

    def __post_init__(self):
        if self.sweep is None:
            object.__setattr__(self, "sweep", DelaySweep.four_phase(self.signal.frequency))

    @property
    def pose(self) -> CameraPose:
        return CameraPose(self.geometry.receiver, self.orientation)


# -- reading ---------------------------------------------------------------


def _obj(value, path, required=(), optional=()):
    if not isinstance(value, dict):
        raise ConfigInvalid(path, "expected an object")
    allowed = set(required) | set(optional)
    for key in value:
        if key not in allowed:
            raise ConfigInvalid(_join(path, key), "unknown key")
    for key in required:
        if key not in value:
            raise ConfigInvalid(_join(path, key), "missing required key")
    return value


def _join(path, key):
    return f"{path}.{key}" if path else key


def _num(value, path, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(path, f"expected a number, got {value!r}")
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise ConfigInvalid(path, "must be finite")
    if positive and not value > 0:
        raise ConfigInvalid(path, f"must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ConfigInvalid(path, f"must be non-negative, got {value!r}")
    return value


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigInvalid(path, f"must be >= {minimum}, got {value!r}")
    return value


def _vec(value, path, n=3):
    if not isinstance(value, list) or len(value) != n:
        raise ConfigInvalid(path, f"expected a list of {n} numbers")
    return tuple(_num(x, f"{path}[{i}]") for i, x in enumerate(value))


def _build(path, ctor, *args, **kwargs):
    # module-level invariants surface as ConfigInvalid at the owning path
    try:
        return ctor(*args, **kwargs)
    except ConfigInvalid:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(path, str(exc)) from None


def _geometry(d, path):
    _obj(d, path, required=("emitter", "receiver"))
    return BistaticGeometry(_vec(d["emitter"], _join(path, "emitter")),
                            _vec(d["receiver"], _join(path, "receiver")))


def _camera(d, path):
    _obj(d, path, optional=("intrinsics", "pose"))
    ip = _join(path, "intrinsics")
    intr = _obj(d.get("intrinsics", {}), ip,
                optional=("focal_length", "pixel_pitch", "width", "height", "principal_point"))
    defaults = CameraIntrinsics()
    kwargs = {
        "focal_length": _num(intr.get("focal_length", defaults.focal_length), _join(ip, "focal_length"), positive=True),
        "pixel_pitch": _num(intr.get("pixel_pitch", defaults.pixel_pitch), _join(ip, "pixel_pitch"), positive=True),
        "width": _int(intr.get("width", defaults.width), _join(ip, "width"), minimum=1),
        "height": _int(intr.get("height", defaults.height), _join(ip, "height"), minimum=1),
    }
    if "principal_point" in intr:
        kwargs["principal_point"] = _vec(intr["principal_point"], _join(ip, "principal_point"), 2)
    intrinsics = _build(_join(ip, "principal_point"), CameraIntrinsics, **kwargs)

    pp = _join(path, "pose")
    pose = _obj(d.get("pose", {}), pp, optional=("orientation",))
    op = _join(pp, "orientation")
    rows = pose.get("orientation", [list(r) for r in IDENTITY])
    if not isinstance(rows, list) or len(rows) != 3:
        raise ConfigInvalid(op, "expected a 3x3 nested list")
    orientation = tuple(_vec(row, f"{op}[{i}]") for i, row in enumerate(rows))
    _build(op, CameraPose, (0.0, 0.0, 0.0), orientation)
    return intrinsics, orientation


def _signal(d, path):
    _obj(d, path, optional=("kind", "frequency", "amplitude", "offset", "pulse_width"))
    kind = d.get("kind", CorrelationKind.SINUSOIDAL.value)
    if kind not in [k.value for k in CorrelationKind]:
        raise ConfigInvalid(_join(path, "kind"), f"unknown kind {kind!r}")
    pw = d.get("pulse_width")
    kwargs = dict(
        kind=kind,
        frequency=_num(d.get("frequency", 10e6), _join(path, "frequency"), positive=True),
        amplitude=_num(d.get("amplitude", 1.0), _join(path, "amplitude"), nonneg=True),
        offset=_num(d.get("offset", 0.0), _join(path, "offset")),
        pulse_width=None if pw is None else _num(pw, _join(path, "pulse_width"), positive=True),
    )
    return _build(_join(path, "pulse_width"), CorrelationModel, **kwargs)


def _sweep(d, path):
    _obj(d, path, optional=("delays", "count", "step", "start"))
    if "delays" in d:
        if any(k in d for k in ("count", "step", "start")):
            raise ConfigInvalid(path, "give either 'delays' or 'count'/'step', not both")
        if not isinstance(d["delays"], list) or not d["delays"]:
            raise ConfigInvalid(_join(path, "delays"), "expected a non-empty list")
        delays = [_num(x, f"{path}.delays[{i}]", nonneg=True) for i, x in enumerate(d["delays"])]
        return _build(_join(path, "delays"), DelaySweep, tuple(delays))
    _obj(d, path, required=("count", "step"), optional=("start",))
    count = _int(d["count"], _join(path, "count"), minimum=1)
    step = _num(d["step"], _join(path, "step"), positive=True)
    start = _num(d.get("start", 0.0), _join(path, "start"), nonneg=True)
    return DelaySweep.uniform(count, step, start)


def _noise(d, path):
    _obj(d, path, optional=("kind", "sigma", "seed"))
    kind = d.get("kind", "none")
    if kind not in ("none", "additive_gaussian"):
        raise ConfigInvalid(_join(path, "kind"), f"unknown kind {kind!r}")
    sigma = _num(d.get("sigma", 0.0), _join(path, "sigma"), nonneg=True)
    seed = _int(d.get("seed", 0), _join(path, "seed"), minimum=0)
    return NoiseModel(kind, sigma, seed)


_PLANE_KEYS = ("type", "point", "normal", "reflectivity")
_STAR_KEYS = ("type", "center", "normal", "outer_radius", "spoke_count", "depth_step",
              "reflectivity_fg", "reflectivity_bg")


def _primitive(d, path):
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigInvalid(_join(path, "type"), "missing primitive type")
    if d["type"] == "plane":
        _obj(d, path, required=("type", "point", "normal"), optional=("reflectivity",))
        return _build(path, Plane, _vec(d["point"], _join(path, "point")),
                      _vec(d["normal"], _join(path, "normal")),
                      _num(d.get("reflectivity", 1.0), _join(path, "reflectivity")))
    if d["type"] == "boehler_star":
        _obj(d, path, required=("type",), optional=_STAR_KEYS)
        star = BoehlerStar()
        kwargs = {}
        for key in ("center", "normal"):
            kwargs[key] = _vec(d.get(key, list(getattr(star, key))), _join(path, key))
        for key in ("outer_radius", "depth_step", "reflectivity_fg", "reflectivity_bg"):
            kwargs[key] = _num(d.get(key, getattr(star, key)), _join(path, key))
        kwargs["spoke_count"] = _int(d.get("spoke_count", star.spoke_count), _join(path, "spoke_count"), minimum=2)
        return _build(path, BoehlerStar, **kwargs)
    raise ConfigInvalid(_join(path, "type"), f"unknown primitive type {d['type']!r}")


def _scene(d, path):
    _obj(d, path, optional=("primitives", "falloff"))
    prims = d.get("primitives", [])
    if not isinstance(prims, list):
        raise ConfigInvalid(_join(path, "primitives"), "expected a list")
    falloff = d.get("falloff", False)
    if not isinstance(falloff, bool):
        raise ConfigInvalid(_join(path, "falloff"), "expected true or false")
    return Scene(tuple(_primitive(p, f"{path}.primitives[{i}]") for i, p in enumerate(prims)), falloff)


def _calibration(d, path):
    _obj(d, path, optional=("delay_offset", "distance_offset"))
    return CalibrationParams(_num(d.get("delay_offset", 0.0), _join(path, "delay_offset")),
                             _num(d.get("distance_offset", 0.0), _join(path, "distance_offset")))


def _estimator(d, path):
    _obj(d, path, optional=("name", "grid_step"))
    name = d.get("name", "least_squares")
    if name not in ESTIMATORS:
        raise ConfigInvalid(_join(path, "name"), f"unknown estimator {name!r}")
    return EstimatorConfig(name, _num(d.get("grid_step", DEFAULT_GRID_STEP), _join(path, "grid_step"), positive=True))


def parse_config(data) -> RunConfig:
    _obj(data, "", required=("geometry",),
         optional=("camera", "signal", "sweep", "noise", "scene", "calibration", "estimator"))
    intrinsics, orientation = _camera(data.get("camera", {}), "camera")
    signal = _signal(data.get("signal", {}), "signal")
    return RunConfig(
        geometry=_geometry(data["geometry"], "geometry"),
        intrinsics=intrinsics,
        orientation=orientation,
        signal=signal,
        sweep=_sweep(data["sweep"], "sweep") if "sweep" in data else None,
        noise=_noise(data.get("noise", {}), "noise"),
        scene=_scene(data.get("scene", {}), "scene"),
        calibration=_calibration(data.get("calibration", {}), "calibration"),
        estimator=_estimator(data.get("estimator", {}), "estimator"),
    )


def load_config(path) -> RunConfig:
    """Read and validate a config file.

    Raises ``OSError`` when unreadable and ``ConfigInvalid`` otherwise.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("", f"not valid JSON ({exc})") from None
    return parse_config(data)


# -- writing ---------------------------------------------------------------


def _primitive_dict(p):
    if isinstance(p, Plane):
        return {"type": "plane", "point": list(p.point), "normal": list(p.normal),
                "reflectivity": p.reflectivity}
    return {"type": "boehler_star", "center": list(p.center), "normal": list(p.normal),
            "outer_radius": p.outer_radius, "spoke_count": p.spoke_count,
            "depth_step": p.depth_step, "reflectivity_fg": p.reflectivity_fg,
            "reflectivity_bg": p.reflectivity_bg}


def config_to_dict(cfg: RunConfig) -> dict:
    intr, sig = cfg.intrinsics, cfg.signal
    signal = {"kind": sig.kind.value, "frequency": sig.frequency, "amplitude": sig.amplitude,
              "offset": sig.offset}
    if sig.pulse_width is not None:
        signal["pulse_width"] = sig.pulse_width
    return {
        "geometry": {"emitter": list(cfg.geometry.emitter), "receiver": list(cfg.geometry.receiver)},
        "camera": {
            "intrinsics": {"focal_length": intr.focal_length, "pixel_pitch": intr.pixel_pitch,
                           "width": intr.width, "height": intr.height,
                           "principal_point": list(intr.principal_point)},
            "pose": {"orientation": [list(r) for r in cfg.orientation]},
        },
        "signal": signal,
        "sweep": {"delays": list(cfg.sweep.delays)},
        "noise": {"kind": cfg.noise.kind, "sigma": cfg.noise.sigma, "seed": cfg.noise.seed},
        "scene": {"primitives": [_primitive_dict(p) for p in cfg.scene.primitives],
                  "falloff": cfg.scene.falloff},
        "calibration": {"delay_offset": cfg.calibration.delay_offset,
                        "distance_offset": cfg.calibration.distance_offset},
        "estimator": {"name": cfg.estimator.name, "grid_step": cfg.estimator.grid_step},
    }


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


# -- canned scenarios ------------------------------------------------------


def reference_scenario(**overrides) -> RunConfig:
    """Desk-scale bistatic setup: emitter 0.30 m and receiver 0.20 m from a
    flat target, 0.10 m baseline on the optical axis, 25 mm lens."""
    base = dict(
        geometry=BistaticGeometry((0.0, 0.0, -0.10), (0.0, 0.0, 0.0)),
        signal=CorrelationModel(CorrelationKind.SINUSOIDAL, 10e6, 1.0, 2.0),
        scene=Scene((Plane((0.0, 0.0, 0.2), (0.0, 0.0, -1.0)),)),
    )
    base.update(overrides)
    return RunConfig(**base)


def boehler_star_scenario(**overrides) -> RunConfig:
    return reference_scenario(**{"scene": Scene((BoehlerStar(),)), **overrides})
