import numpy as np
import pytest

from passive_tof.camera import CameraIntrinsics
from passive_tof.config import reference_scenario
from passive_tof.fileio import (
    FRAME_HEADER,
    FrameParseError,
    atomic_write,
    depth_csv,
    format_frame,
    parse_frame,
    pgm_bytes,
    read_frame,
    read_pfm,
    read_pgm,
    write_frame,
    write_pfm,
    write_pgm,
)
from passive_tof.pipeline import DepthMap, IntensityMap, simulate_frame
from passive_tof.scene import BoehlerStar, Scene
from passive_tof.signal import NoiseModel


def small_frame(**kw):
    cfg = reference_scenario(intrinsics=CameraIntrinsics(width=9, height=7), **kw)
    return simulate_frame(cfg.scene, cfg.geometry, cfg.intrinsics, cfg.pose, cfg.signal, cfg.noise, cfg.sweep)


def test_frame_text_layout():
    frame = small_frame()
    text = format_frame(frame)
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    assert all("=" in l for l in meta)
    body = lines[len(meta) + 1:]
    assert lines[len(meta)] == FRAME_HEADER
    assert len(body) == frame.valid.sum() * len(frame.sweep)
    assert body[0].startswith("0,0,0.0,")


def test_frame_round_trip_bit_exact(tmp_path):
    frame = small_frame(noise=NoiseModel("additive_gaussian", 0.02, 5),
                        scene=Scene((BoehlerStar(outer_radius=0.0003),)))
    assert 0 < frame.valid.sum() < frame.valid.size
    path = tmp_path / "f.csv"
    write_frame(path, frame)
    back = read_frame(path)
    np.testing.assert_array_equal(back.valid, frame.valid)
    assert back.samples.tobytes() == frame.samples.tobytes()
    assert back.sweep == frame.sweep and back.signal == frame.signal and back.noise == frame.noise
    assert back.geometry == frame.geometry and back.intrinsics == frame.intrinsics
    assert back.pose == frame.pose


def test_truncated_frames_report_position():
    text = format_frame(small_frame())
    with pytest.raises(FrameParseError, match="line"):
        parse_frame(text[:-7])  # cut mid-row
    lines = text.splitlines(keepends=True)
    with pytest.raises(FrameParseError, match="truncated") as info:
        parse_frame("".join(lines[:-4]))  # cut on a row boundary
    assert info.value.line == len(lines) - 3
    with pytest.raises(FrameParseError, match="header"):
        parse_frame("# width=3\n")
    bad = text.replace(",0,0.0,", ",0,zero,", 1)
    with pytest.raises(FrameParseError):
        parse_frame(bad)


def test_pfm_layout_and_round_trip(tmp_path):
    depth = np.arange(12, dtype=float).reshape(3, 4) * 0.1 + 0.1
    valid = np.ones((3, 4), bool)
    valid[2, 3] = False
    dm = DepthMap(np.where(valid, depth, np.nan), valid)
    path = tmp_path / "d.pfm"
    write_pfm(path, dm)
    raw = path.read_bytes()
    assert raw.startswith(b"Pf\n4 3\n-1.0\n")
    payload = np.frombuffer(raw[len(b"Pf\n4 3\n-1.0\n"):], dtype="<f4")
    assert payload.size == 12
    # bottom row first; the invalid pixel is the last entry of that row
    assert payload[3] == -1.0
    assert payload[4] == np.float32(depth[1, 0])
    back = read_pfm(path)
    np.testing.assert_array_equal(back, np.where(valid, depth, -1.0).astype(np.float32))


def test_depth_csv():
    valid = np.array([[True, False], [False, True]])
    text = depth_csv(DepthMap(np.array([[0.25, np.nan], [np.nan, 0.5]]), valid))
    assert text == "u,v,depth_m\n0,0,0.25\n1,1,0.5\n"


def test_pgm_16bit(tmp_path):
    amp = np.array([[0.0, 0.5], [1.0, 2.0]])
    valid = np.array([[True, True], [True, False]])
    path = tmp_path / "i.pgm"
    scale = write_pgm(path, IntensityMap(amp, valid))
    assert scale == pytest.approx(1.0 / 65535)
    counts, recorded = read_pgm(path)
    assert recorded == scale
    assert counts.dtype == np.dtype(">u2")
    np.testing.assert_array_equal(counts, [[0, 32768], [65535, 0]])
    data, _ = pgm_bytes(IntensityMap(np.zeros((1, 1)), np.zeros((1, 1), bool)))
    assert data.endswith(b"\x00\x00")


def test_atomic_write_leaves_no_partial(tmp_path, monkeypatch):
    target = tmp_path / "out.bin"
    target.write_bytes(b"old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr("passive_tof.fileio.os.replace", boom)
    with pytest.raises(OSError):
        atomic_write(target, b"new contents")
    assert target.read_bytes() == b"old"
    assert list(tmp_path.iterdir()) == [target]
