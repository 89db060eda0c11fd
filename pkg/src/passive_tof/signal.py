"""Correlation waveforms, delay sweeps, noise, and time-shift estimators.

Two waveform models are supported: the sinusoidal fundamental of the
illuminator's autocorrelation, and a triangular lobe train (the
autocorrelation of a rectangular pulse train).  Shifts are recovered either
by a linear least-squares fit of the fundamental or by a grid matched
filter against a zero-shift template.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class SignalError(ValueError):
    pass


class NoCrossing(SignalError):
    pass


class RankDeficient(SignalError):
    pass


class EmptySweep(SignalError):
    pass


class NonPositivePath(SignalError):
    pass


class CorrelationKind(str, enum.Enum):
    SINUSOIDAL = "sinusoidal_fundamental"
    RECT_PULSE_TRAIN = "rect_pulse_train"


@dataclass(frozen=True)
class CorrelationModel:
    kind: CorrelationKind = CorrelationKind.SINUSOIDAL
    frequency: float = 10e6
    amplitude: float = 1.0
    offset: float = 0.0
    shift: float = 0.0
    pulse_width: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", CorrelationKind(self.kind))
        if not (np.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError("frequency must be positive")
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be non-negative")
        if not (np.isfinite(self.offset) and np.isfinite(self.shift)):
            raise ValueError("offset and shift must be finite")
        if self.kind is CorrelationKind.RECT_PULSE_TRAIN:
            if self.pulse_width is None or not 0 < self.pulse_width <= self.period / 2:
                raise ValueError("pulse_width must lie in (0, period/2] for a pulse train")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass(frozen=True)
class DelaySweep:
    delays: tuple[float, ...]

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float).ravel()
        if d.size and (not np.all(np.isfinite(d)) or np.any(d < 0) or np.any(np.diff(d) <= 0)):
            raise ValueError("delays must be finite, non-negative and strictly increasing")
        object.__setattr__(self, "delays", tuple(float(x) for x in d))

    @classmethod
    def uniform(cls, count: int, step: float, start: float = 0.0) -> "DelaySweep":
        return cls(tuple(start + k * step for k in range(count)))

    @classmethod
    def four_phase(cls, frequency: float) -> "DelaySweep":
        return cls.uniform(4, 1.0 / (4.0 * frequency))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.delays)

    def __len__(self):
        return len(self.delays)


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "additive_gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("sigma must be non-negative")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be an unsigned integer")

    @property
    def active(self) -> bool:
        return self.kind == "additive_gaussian" and self.sigma > 0


@dataclass(frozen=True)
class CalibrationParams:
    delay_offset: float = 0.0
    distance_offset: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.delay_offset) and np.isfinite(self.distance_offset)):
            raise ValueError("calibration offsets must be finite")


def wrap_centered(x, period):
    """Map ``x`` into (-period/2, period/2]."""
    return period / 2.0 - np.mod(period / 2.0 - x, period)


def correlation_value(model: CorrelationModel, delay):
    """Evaluate the correlation waveform at ``delay`` (scalar or array)."""
    delay = np.asarray(delay, dtype=float)
    if model.kind is CorrelationKind.SINUSOIDAL:
        out = model.amplitude * np.cos(2.0 * np.pi * model.frequency * (delay - model.shift)) + model.offset
    else:
        lag = wrap_centered(delay - model.shift, model.period)
        out = model.offset + model.amplitude * np.maximum(0.0, 1.0 - np.abs(lag) / model.pulse_width)
    return out if out.ndim else float(out)


def sample_sweep(model: CorrelationModel, sweep: DelaySweep, noise: NoiseModel = NoiseModel(),
                 rng: np.random.Generator | None = None) -> np.ndarray:
    values = np.asarray(correlation_value(model, sweep.array), dtype=float)
    if noise.active:
        if rng is None:
            rng = np.random.default_rng(noise.seed)
        values = values + rng.normal(0.0, noise.sigma, size=values.shape)
    return values


def threshold_trigger(waveform, times, threshold: float) -> float:
    """Time of the first upward threshold crossing, linearly interpolated."""
    y = np.asarray(waveform, dtype=float)
    t = np.asarray(times.delays if isinstance(times, DelaySweep) else times, dtype=float)
    if y.shape != t.shape:
        raise ValueError("waveform and times differ in length")
    idx = np.flatnonzero((y[:-1] < threshold) & (y[1:] >= threshold))
    if idx.size == 0:
        raise NoCrossing(f"waveform never rises through {threshold!r}")
    k = idx[0]
    frac = (threshold - y[k]) / (y[k + 1] - y[k])
    return float(t[k] + frac * (t[k + 1] - t[k]))


def _sinusoid_design(delays, frequency):
    phase = 2.0 * np.pi * frequency * np.asarray(delays, dtype=float)
    return np.column_stack([np.cos(phase), np.sin(phase), np.ones_like(phase)])


def fit_sinusoid(samples, delays, frequency: float):
    """Least-squares fundamental fit for one or many sample vectors.

    ``samples`` has shape (..., K).  Returns ``(shift, amplitude, offset)``
    arrays of shape (...); shift lies in [0, 1/frequency).
    """
    design = _sinusoid_design(delays, frequency)
    if design.shape[0] < 3 or np.linalg.matrix_rank(design) < 3:
        raise RankDeficient("delays cover fewer than three distinct phases")
    coef = np.asarray(samples, dtype=float) @ np.linalg.pinv(design).T
    c1, c2, offset = coef[..., 0], coef[..., 1], coef[..., 2]
    period = 1.0 / frequency
    shift = np.mod(np.arctan2(c2, c1) / (2.0 * np.pi * frequency), period)
    # np.mod can round up to exactly one period
    shift = np.where(shift >= period, 0.0, shift)
    return shift, np.hypot(c1, c2), offset


def estimate_shift_least_squares(samples, sweep: DelaySweep, frequency: float):
    y = np.asarray(samples, dtype=float)
    if y.shape != (len(sweep),):
        raise ValueError("samples and sweep differ in length")
    shift, amplitude, offset = fit_sinusoid(y, sweep.array, frequency)
    return float(shift), float(amplitude), float(offset)


def matched_filter_bank(template: CorrelationModel, delays, grid_step: float):
    """Candidate shifts over one period and the template evaluated at each."""
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    n = int(np.ceil(template.period / grid_step - 1e-9))
    candidates = np.arange(n) * grid_step
    bank = correlation_value(template, np.asarray(delays)[None, :] - candidates[:, None])
    # zero-mean rows: constant offsets do not bias the peak
    bank = bank - bank.mean(axis=1, keepdims=True)
    return candidates, bank


def matched_filter(samples, delays, template: CorrelationModel, grid_step: float, chunk: int = 4096):
    """Grid matched filter over sample vectors of shape (..., K); returns shifts (...)."""
    y = np.asarray(samples, dtype=float)
    if y.shape[-1] == 0:
        raise EmptySweep("no samples to correlate")
    if template.shift != 0:
        raise ValueError("template must have zero shift")
    candidates, bank = matched_filter_bank(template, delays, grid_step)
    flat = y.reshape(-1, y.shape[-1])
    best = np.empty(flat.shape[0], dtype=np.intp)
    for start in range(0, flat.shape[0], chunk):
        block = flat[start:start + chunk]
        flat_rows = np.ptp(block, axis=1, keepdims=True) == 0
        block = np.where(flat_rows, 0.0, block - block.mean(axis=1, keepdims=True))
        # argmax returns the first maximum -> smallest candidate on ties
        best[start:start + chunk] = np.argmax(block @ bank.T, axis=1)
    return candidates[best].reshape(y.shape[:-1])


def estimate_shift_matched_filter(samples, sweep: DelaySweep, template: CorrelationModel,
                                  grid_step: float) -> float:
    if len(sweep) == 0:
        raise EmptySweep("delay sweep is empty")
    return float(matched_filter(samples, sweep.array, template, grid_step))


def shift_to_path(shift: float, calib: CalibrationParams, baseline: float) -> float:
    """Total bistatic path from a sync-referenced shift.

    The reference trigger fires on the direct emitter-receiver path, so the
    measured shift holds only the excess path over the baseline.
    """
    path = SPEED_OF_LIGHT * (shift - calib.delay_offset) + baseline - calib.distance_offset
    if not path > 0:
        raise NonPositivePath(f"total path {path!r} m is not positive")
    return float(path)


def monte_carlo_shift_errors(model: CorrelationModel, sweep: DelaySweep, sigma: float,
                             trials: int, seed: int) -> np.ndarray:
    """Signed least-squares shift errors over ``trials`` seeded noisy sweeps."""
    rng = np.random.default_rng(seed)
    clean = np.asarray(correlation_value(model, sweep.array))
    noisy = clean[None, :] + rng.normal(0.0, sigma, size=(trials, len(sweep)))
    shift, _, _ = fit_sinusoid(noisy, sweep.array, model.frequency)
    return wrap_centered(shift - model.shift, model.period)
