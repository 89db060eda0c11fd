"""On-disk formats: correlation frame tables, PFM depth, 16-bit PGM intensity.

Every writer goes through :func:`atomic_write` so a partially written file
never appears under the target name.
"""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .camera import CameraIntrinsics, CameraPose
from .geometry import BistaticGeometry
from .pipeline import CorrelationFrame, DepthMap, IntensityMap
from .signal import CorrelationModel, DelaySweep, NoiseModel

FRAME_HEADER = "u,v,delay_s,value"
INVALID_DEPTH = -1.0


class FrameParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_vec(xs) -> str:
    return ",".join(_fmt(x) for x in xs)


def frame_metadata(frame: CorrelationFrame) -> dict[str, str]:
    intr, sig = frame.intrinsics, frame.signal
    return {
        "width": str(intr.width),
        "height": str(intr.height),
        "emitter": _fmt_vec(frame.geometry.emitter),
        "receiver": _fmt_vec(frame.geometry.receiver),
        "focal_length": _fmt(intr.focal_length),
        "pixel_pitch": _fmt(intr.pixel_pitch),
        "principal_point": _fmt_vec(intr.principal_point),
        "orientation": _fmt_vec(np.ravel(frame.pose.orientation)),
        "signal_kind": sig.kind.value,
        "frequency": _fmt(sig.frequency),
        "amplitude": _fmt(sig.amplitude),
        "offset": _fmt(sig.offset),
        "pulse_width": "none" if sig.pulse_width is None else _fmt(sig.pulse_width),
        "delays": _fmt_vec(frame.sweep.delays),
        "noise_kind": frame.noise.kind,
        "sigma": _fmt(frame.noise.sigma),
        "seed": str(frame.noise.seed),
        "rows": str(int(frame.valid.sum()) * len(frame.sweep)),
    }


def format_frame(frame: CorrelationFrame) -> str:
    buf = io.StringIO()
    for key, value in frame_metadata(frame).items():
        buf.write(f"# {key}={value}\n")
    buf.write(FRAME_HEADER + "\n")
    vs, us = np.nonzero(frame.valid)  # row-major: v outer, u inner
    delays = frame.sweep.delays
    for u, v in zip(us.tolist(), vs.tolist()):
        for delay, value in zip(delays, frame.samples[v, u].tolist()):
            buf.write(f"{u},{v},{delay!r},{value!r}\n")
    return buf.getvalue()


def write_frame(path, frame: CorrelationFrame) -> None:
    atomic_write(path, format_frame(frame).encode("ascii"))


def _floats(text: str, line: int, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise FrameParseError(f"malformed number list {text!r}", line) from None
    if n is not None and len(vals) != n:
        raise FrameParseError(f"expected {n} values, got {len(vals)}", line)
    return vals


def parse_frame(text: str) -> CorrelationFrame:
    meta: dict[str, tuple[str, int]] = {}
    lines = text.split("\n")
    if lines[-1] != "":
        raise FrameParseError(f"truncated frame: incomplete final line {lines[-1]!r}", len(lines))
    lines.pop()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" not in body:
            raise FrameParseError(f"metadata line without '=': {lines[i]!r}", i + 1)
        key, value = body.split("=", 1)
        meta[key.strip()] = (value.strip(), i + 1)
        i += 1
    if i >= len(lines) or lines[i].strip() != FRAME_HEADER:
        raise FrameParseError(f"expected header {FRAME_HEADER!r}", i + 1)
    header_line = i + 1

    def get(key):
        if key not in meta:
            raise FrameParseError(f"missing metadata key {key!r}", header_line)
        return meta[key]

    try:
        width, height = int(get("width")[0]), int(get("height")[0])
        rows_expected = int(get("rows")[0])
        seed = int(get("seed")[0])
    except ValueError as exc:
        raise FrameParseError(f"bad integer metadata: {exc}", header_line) from None
    delays = _floats(*get("delays"))
    pw = get("pulse_width")
    try:
        geom = BistaticGeometry(_floats(*get("emitter"), 3), _floats(*get("receiver"), 3))
        intr = CameraIntrinsics(
            focal_length=_floats(*get("focal_length"), 1)[0],
            pixel_pitch=_floats(*get("pixel_pitch"), 1)[0],
            width=width,
            height=height,
            principal_point=_floats(*get("principal_point"), 2),
        )
        rot = _floats(*get("orientation"), 9)
        pose = CameraPose(geom.receiver, (rot[0:3], rot[3:6], rot[6:9]))
        signal = CorrelationModel(
            kind=get("signal_kind")[0],
            frequency=_floats(*get("frequency"), 1)[0],
            amplitude=_floats(*get("amplitude"), 1)[0],
            offset=_floats(*get("offset"), 1)[0],
            pulse_width=None if pw[0] == "none" else _floats(*pw, 1)[0],
        )
        sweep = DelaySweep(delays)
        noise = NoiseModel(get("noise_kind")[0], _floats(*get("sigma"), 1)[0], seed)
    except FrameParseError:
        raise
    except ValueError as exc:
        raise FrameParseError(f"invalid metadata: {exc}", header_line) from None

    k = len(delays)
    samples = np.zeros((height, width, k))
    counts = np.zeros((height, width), dtype=int)
    body = lines[i + 1:]
    for offset, row in enumerate(body):
        lineno = i + 2 + offset
        parts = row.split(",")
        if len(parts) != 4:
            raise FrameParseError(f"expected 4 fields, got {len(parts)}: {row!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            delay, value = float(parts[2]), float(parts[3])
        except ValueError:
            raise FrameParseError(f"malformed row {row!r}", lineno) from None
        if not (0 <= u < width and 0 <= v < height):
            raise FrameParseError(f"pixel ({u}, {v}) outside {width}x{height}", lineno)
        j = counts[v, u]
        if j >= k or delay != delays[j]:
            raise FrameParseError(f"unexpected delay {delay!r} for pixel ({u}, {v})", lineno)
        samples[v, u, j] = value
        counts[v, u] = j + 1
    if len(body) != rows_expected:
        raise FrameParseError(
            f"truncated frame: expected {rows_expected} data rows, found {len(body)}", len(lines) + 1
        )
    if np.any((counts != 0) & (counts != k)):
        v, u = np.argwhere((counts != 0) & (counts != k))[0]
        raise FrameParseError(f"pixel ({u}, {v}) has {counts[v, u]} of {k} samples", len(lines) + 1)
    valid = counts == k
    return CorrelationFrame(geom, intr, pose, signal, sweep, samples, valid, noise)


def read_frame(path) -> CorrelationFrame:
    return parse_frame(Path(path).read_text(encoding="ascii"))


def pfm_bytes(depth: DepthMap) -> bytes:
    img = np.where(depth.valid, depth.depth, INVALID_DEPTH).astype("<f4")
    h, w = img.shape
    head = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")  # negative scale: little-endian
    return head + np.flipud(img).tobytes()


def write_pfm(path, depth: DepthMap) -> None:
    atomic_write(path, pfm_bytes(depth))


def read_pfm(path) -> np.ndarray:
    """Single-channel PFM as a top-to-bottom float32 array."""
    with open(path, "rb") as fh:
        tag = fh.readline().strip()
        if tag != b"Pf":
            raise ValueError(f"not a single-channel PFM: {tag!r}")
        w, h = (int(x) for x in fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(), dtype=dtype)
    if data.size != w * h:
        raise ValueError(f"PFM payload has {data.size} floats, expected {w * h}")
    return np.flipud(data.reshape(h, w)).astype(np.float32)


def depth_csv(depth: DepthMap) -> str:
    buf = io.StringIO()
    buf.write("u,v,depth_m\n")
    vs, us = np.nonzero(depth.valid)
    for u, v, d in zip(us.tolist(), vs.tolist(), depth.depth[vs, us].tolist()):
        buf.write(f"{u},{v},{d!r}\n")
    return buf.getvalue()


def pgm_bytes(intensity: IntensityMap) -> tuple[bytes, float]:
    """16-bit binary PGM; returns the bytes and the amplitude per count."""
    amp = np.where(intensity.valid, intensity.amplitude, 0.0)
    peak = float(amp.max()) if amp.size else 0.0
    scale = peak / 65535.0 if peak > 0 else 1.0
    counts = np.clip(np.rint(amp / scale), 0, 65535).astype(">u2")
    h, w = counts.shape
    head = f"P5\n# scale={scale!r}\n{w} {h}\n65535\n".encode("ascii")
    return head + counts.tobytes(), scale


def write_pgm(path, intensity: IntensityMap) -> float:
    data, scale = pgm_bytes(intensity)
    atomic_write(path, data)
    return scale


def read_pgm(path) -> tuple[np.ndarray, float | None]:
    """Counts array and the recorded scale (amplitude per count)."""
    raw = Path(path).read_bytes()
    pos = 0
    tokens: list[bytes] = []
    scale = None
    while len(tokens) < 4:
        end = raw.index(b"\n", pos)
        line = raw[pos:end]
        pos = end + 1
        if line.startswith(b"#"):
            text = line[1:].strip().decode("ascii")
            if text.startswith("scale="):
                scale = float(text.split("=", 1)[1])
            continue
        tokens.extend(line.split())
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(raw[pos:], dtype=dtype).reshape(h, w), scale
