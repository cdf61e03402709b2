"""Demodulated lock-in waveform synthesis and per-cycle reduction.

Everything here works on the demodulated (post-filter) signal; the carrier
frequency is metadata only. Each 2 s switch cycle settles exponentially to
its target level, drifts linearly, and carries Gaussian noise whose size
depends on the instrument range. Only the trailing window of each cycle is
recorded; the reduction fits a line to the window and returns its value at
the window's temporal midpoint, which equals the mean of the slope-detrended
samples.

Noise configuration is per-reading: sigma_low / sigma_high are standard
deviations of the reduced reading. Waveform mode converts to per-sample
noise via sigma_sample = sigma_reading * sqrt(n_window_samples), so both
modes produce matched reading distributions.
"""

from dataclasses import dataclass
from enum import Enum
import math
import os
from typing import Sequence

import numpy as np

from .model import NonlinearParams, expected_reading
from .seeds import cycle_rng


class AcquisitionMode(str, Enum):
    FAST = "fast"
    WAVEFORM = "waveform"


class VoltageRange(str, Enum):
    SENSITIVE = "sensitive"
    INSENSITIVE = "insensitive"


@dataclass(frozen=True)
class AcquisitionConfig:
    cycle_duration: float = 2.0  # s
    record_window: float = 1.0  # s, trailing
    sample_rate: float = 1000.0  # Sa/s
    filter_tau: float = 1e-3  # s
    carrier_freq: float = 1e6  # Hz, metadata only
    sigma_low: float = 3.4e-9  # V per reading, sensitive range
    sigma_high: float = 1.8e-4  # V per reading, insensitive range
    range_threshold: float = 1.0  # V
    drift_rate: float = 0.0  # V/s
    mode: AcquisitionMode = AcquisitionMode.FAST

    def __post_init__(self):
        if self.record_window > self.cycle_duration:
            raise ValueError("record_window must not exceed cycle_duration")
        settle = self.cycle_duration - self.record_window
        if settle < 20 * self.filter_tau:
            raise ValueError(
                f"settling time {settle} s too short for filter_tau {self.filter_tau} s"
            )
        if self.sample_rate * self.record_window < 2:
            raise ValueError("record window must contain at least 2 samples")
        if self.sigma_low < 0 or self.sigma_high < 0:
            raise ValueError("noise sigmas must be non-negative")

    @property
    def n_cycle_samples(self) -> int:
        return round(self.cycle_duration * self.sample_rate)

    @property
    def n_window_samples(self) -> int:
        return round(self.record_window * self.sample_rate)

    @property
    def window_mid_time(self) -> float:
        """Mean sample time of the record window, within the cycle."""
        t0 = self.cycle_duration - self.record_window
        return t0 + (self.n_window_samples - 1) / (2 * self.sample_rate)

    def range_for(self, level: float) -> VoltageRange:
        return VoltageRange.INSENSITIVE if level > self.range_threshold else VoltageRange.SENSITIVE

    def sigma_reading_for(self, level: float) -> float:
        if self.range_for(level) is VoltageRange.INSENSITIVE:
            return self.sigma_high
        return self.sigma_low


@dataclass(frozen=True)
class CycleReading:
    blinded_index: int
    reading: float  # V
    range: VoltageRange


def synthesize_cycle(
    prev_level: float,
    target_level: float,
    cfg: AcquisitionConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Full-cycle sample block: exponential settling + linear drift + noise.

    v(t_i) = target + (prev - target) exp(-t_i / tau) + drift_rate * t_i + eta_i
    with eta_i iid Gaussian at the per-sample sigma of the range the target
    level puts the instrument on.
    """
    n = cfg.n_cycle_samples
    t = np.arange(n) / cfg.sample_rate
    v = target_level + (prev_level - target_level) * np.exp(-t / cfg.filter_tau)
    v += cfg.drift_rate * t
    sigma_sample = cfg.sigma_reading_for(target_level) * math.sqrt(cfg.n_window_samples)
    if sigma_sample > 0:
        v += rng.normal(0.0, sigma_sample, size=n)
    return v


def reduce_cycle(block: np.ndarray, cfg: AcquisitionConfig) -> float:
    """One voltage per cycle: OLS line over the trailing window, evaluated at its midpoint.

    Equivalent to the mean of the slope-detrended window samples, so a drift
    term odd-symmetric about the midpoint cancels exactly.
    """
    nw = cfg.n_window_samples
    if len(block) < nw:
        raise ValueError(f"block of {len(block)} samples shorter than window ({nw})")
    if nw < 2:
        raise ValueError("window must contain at least 2 samples")
    window = np.asarray(block[-nw:], dtype=float)
    t = np.arange(nw) / cfg.sample_rate
    tc = t - t.mean()
    slope = np.dot(tc, window) / np.dot(tc, tc)
    detrended = window - slope * tc
    return float(detrended.mean())


def fast_reading(expected: float, sigma: float, rng: np.random.Generator) -> float:
    """Draw the reduced reading directly from its sampling distribution."""
    if sigma < 0:
        raise ValueError(f"sigma {sigma} < 0")
    return float(rng.normal(expected, sigma))


def run_acquisition(
    blinded_bits: Sequence[int],
    fidelities: Sequence[float],
    params: NonlinearParams,
    cfg: AcquisitionConfig,
    noise_seed: int,
) -> list[CycleReading]:
    """One CycleReading per blinded bit, using the true per-bit source fidelity.

    `fidelities` is provenance: the simulator (playing the role of nature)
    knows each blinded position's source fidelity; analysis code never sees
    this array. Noise streams are split per cycle by blinded index, so
    evaluation order cannot matter. In waveform mode the previous cycle's
    known target level seeds the settling transient (deterministic and
    parallelizable; the first cycle settles from 0 V).
    """
    bits = np.asarray(blinded_bits)
    fids = np.asarray(fidelities, dtype=float)
    if len(bits) != len(fids):
        raise ValueError(f"{len(bits)} bits but {len(fids)} provenance fidelities")

    levels = np.array(
        [expected_reading(int(b), float(f), params) for b, f in zip(bits, fids)]
    )
    readings: list[CycleReading] = []
    t_mid = cfg.window_mid_time
    if cfg.mode is AcquisitionMode.FAST:
        for i, level in enumerate(levels):
            sigma = cfg.sigma_reading_for(level)
            value = fast_reading(level + cfg.drift_rate * t_mid, sigma, cycle_rng(noise_seed, i))
            readings.append(CycleReading(i, value, cfg.range_for(level)))
    else:
        prev = 0.0
        for i, level in enumerate(levels):
            block = synthesize_cycle(prev, level, cfg, cycle_rng(noise_seed, i))
            readings.append(CycleReading(i, reduce_cycle(block, cfg), cfg.range_for(level)))
            prev = level
    return readings


def write_readings(readings: Sequence[CycleReading], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("blinded_index,reading_volts,range\n")
        for r in readings:
            fh.write(f"{r.blinded_index},{r.reading:.17e},{r.range.value}\n")


def read_readings(path: str | os.PathLike) -> list[CycleReading]:
    readings: list[CycleReading] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "blinded_index,reading_volts,range":
            raise ValueError(f"{path}: unexpected readings header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {line_no}: expected 3 fields")
            readings.append(
                CycleReading(int(parts[0]), float(parts[1]), VoltageRange(parts[2]))
            )
    return readings
