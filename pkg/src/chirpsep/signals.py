"""Synthetic test-signal generators, ground-truth tracks, noise, and metrics.

Each generator returns a :class:`~chirpsep.model.SampledSignal` together with
a :class:`GroundTruth` holding callables for every component's amplitude,
phase (in cycles), instantaneous frequency (Hz) and chirp rate (Hz/s).
Generators are pure: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import SampledSignal

__all__ = [
    "ComponentTruth",
    "GroundTruth",
    "gen_two_component",
    "gen_two_lfm",
    "gen_s_with_trend",
    "gen_sinusoidal_fm",
    "add_awgn",
    "rmse",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ComponentTruth:
    """Analytic description of one oscillatory mode A(t) cos(2 pi phi(t))."""

    amplitude: ArrayFn
    phase_cycles: ArrayFn
    if_hz: ArrayFn
    chirp_hz_s: ArrayFn
    label: str = ""

    def waveform(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return self.amplitude(t) * np.cos(2.0 * np.pi * self.phase_cycles(t))


@dataclass(frozen=True)
class GroundTruth:
    """Oscillatory components plus an optional additive trend."""

    components: tuple[ComponentTruth, ...]
    trend: Optional[ArrayFn] = None

    def mixture(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        total = np.zeros_like(t)
        if self.trend is not None:
            total = total + self.trend(t)
        for comp in self.components:
            total = total + comp.waveform(t)
        return total


def _sample_times(sample_rate: float, n: int) -> np.ndarray:
    if sample_rate <= 0 or not np.isfinite(sample_rate):
        raise ValueError("sample_rate must be finite and > 0")
    if n < 2:
        raise ValueError("need at least two samples")
    return np.arange(n) / sample_rate


def gen_two_component(sample_rate: float, n: int) -> tuple[SampledSignal, GroundTruth]:
    """cos(t^2 + t + cos t) + cos(8 t): a nonlinear chirp crossing a tone.

    The first component's IF is (2t + 1 - sin t) / (2 pi) Hz, the second's
    is the constant 4/pi Hz; the IF curves cross near t = 3.385 s.
    """
    t = _sample_times(sample_rate, n)

    c1 = ComponentTruth(
        amplitude=lambda t: np.ones_like(t),
        phase_cycles=lambda t: (t ** 2 + t + np.cos(t)) / (2.0 * np.pi),
        if_hz=lambda t: (2.0 * t + 1.0 - np.sin(t)) / (2.0 * np.pi),
        chirp_hz_s=lambda t: (2.0 - np.cos(t)) / (2.0 * np.pi),
        label="nonlinear chirp",
    )
    c2 = ComponentTruth(
        amplitude=lambda t: np.ones_like(t),
        phase_cycles=lambda t: 8.0 * t / (2.0 * np.pi),
        if_hz=lambda t: np.full_like(t, 4.0 / np.pi),
        chirp_hz_s=lambda t: np.zeros_like(t),
        label="tone",
    )
    truth = GroundTruth(components=(c1, c2))
    return SampledSignal.from_real(truth.mixture(t), sample_rate), truth


def gen_two_lfm(sample_rate: float, n: int, c1: float, r1: float,
                c2: float, r2: float) -> tuple[SampledSignal, GroundTruth]:
    """Two linear chirps cos(2 pi c_k t + pi r_k t^2) with IFs c_k + r_k t."""
    t = _sample_times(sample_rate, n)

    def lfm(c: float, r: float, label: str) -> ComponentTruth:
        return ComponentTruth(
            amplitude=lambda t: np.ones_like(t),
            phase_cycles=lambda t: c * t + 0.5 * r * t ** 2,
            if_hz=lambda t: c + r * t,
            chirp_hz_s=lambda t: np.full_like(t, float(r)),
            label=label,
        )

    truth = GroundTruth(components=(lfm(c1, r1, "chirp 1"), lfm(c2, r2, "chirp 2")))
    return SampledSignal.from_real(truth.mixture(t), sample_rate), truth


def gen_s_with_trend(sample_rate: float, n: int) -> tuple[SampledSignal, GroundTruth]:
    """Sinusoidally modulated FM component, a tone, and a smooth trend.

    1.2 cos(2300 pi t + 90 sin(20 pi t)) + cos(2438 pi t)
    + (1 + (t^2 + t) exp(1 - t^1.5)); IFs are 1150 + 900 cos(20 pi t) Hz
    and 1219 Hz, crossing about 40 times over [0, 2.048] s.
    """
    max_if = 1150.0 + 900.0
    if sample_rate < 2.0 * max_if:
        raise ValueError(f"sample_rate must be at least {2 * max_if} Hz for this signal")
    t = _sample_times(sample_rate, n)

    c1 = ComponentTruth(
        amplitude=lambda t: np.full_like(t, 1.2),
        phase_cycles=lambda t: 1150.0 * t + (45.0 / np.pi) * np.sin(20.0 * np.pi * t),
        if_hz=lambda t: 1150.0 + 900.0 * np.cos(20.0 * np.pi * t),
        chirp_hz_s=lambda t: -18000.0 * np.pi * np.sin(20.0 * np.pi * t),
        label="sinusoidal FM",
    )
    c2 = ComponentTruth(
        amplitude=lambda t: np.ones_like(t),
        phase_cycles=lambda t: 1219.0 * t,
        if_hz=lambda t: np.full_like(t, 1219.0),
        chirp_hz_s=lambda t: np.zeros_like(t),
        label="tone",
    )

    def trend(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return 1.0 + (t ** 2 + t) * np.exp(1.0 - t ** 1.5)

    truth = GroundTruth(components=(c1, c2), trend=trend)
    return SampledSignal.from_real(truth.mixture(t), sample_rate), truth


def gen_sinusoidal_fm(sample_rate: float, n: int, carrier: float, depth: float,
                      mod_rate: float, amp: float = 1.0,
                      phase0: float = 0.0) -> tuple[SampledSignal, GroundTruth]:
    """amp cos(2 pi carrier t + depth sin(2 pi mod_rate t + phase0)).

    Micro-motion style tone whose IF swings sinusoidally around the carrier:
    IF = carrier + depth * mod_rate * cos(2 pi mod_rate t + phase0) Hz.  Two
    such signals with staggered ``phase0`` produce crossing IFs.
    """
    t = _sample_times(sample_rate, n)
    comp = ComponentTruth(
        amplitude=lambda t: np.full_like(t, float(amp)),
        phase_cycles=lambda t: carrier * t + (depth / (2.0 * np.pi))
        * np.sin(2.0 * np.pi * mod_rate * t + phase0),
        if_hz=lambda t: carrier + depth * mod_rate
        * np.cos(2.0 * np.pi * mod_rate * t + phase0),
        chirp_hz_s=lambda t: -2.0 * np.pi * depth * mod_rate ** 2
        * np.sin(2.0 * np.pi * mod_rate * t + phase0),
        label="sinusoidal FM",
    )
    truth = GroundTruth(components=(comp,))
    return SampledSignal.from_real(truth.mixture(t), sample_rate), truth


def add_awgn(x: SampledSignal, snr_db: float, seed: int = 0) -> SampledSignal:
    """Add white Gaussian noise at the requested SNR (deterministic per seed).

    The SNR is defined against the full mean power of ``x`` including any
    trend.  ``snr_db=inf`` returns the input unchanged.  Real signals get
    real noise; complex signals get circular complex noise.
    """
    if np.isinf(snr_db) and snr_db > 0:
        return x
    power = float(np.mean(np.abs(x.samples) ** 2))
    if power == 0.0:
        raise ValueError("cannot set an SNR on the zero signal")
    noise_power = power / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    n = len(x)
    if x.is_real:
        noise = rng.standard_normal(n) * math.sqrt(noise_power)
        return SampledSignal.from_real(x.samples.real + noise, x.sample_rate, x.start_time)
    scale = math.sqrt(noise_power / 2.0)
    noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return SampledSignal.from_complex(x.samples + noise, x.sample_rate, x.start_time)


def rmse(estimate: SampledSignal, truth: SampledSignal, trim: int = 0) -> float:
    """Relative L2 error ||truth - estimate|| / ||truth||.

    ``trim`` samples are discarded at each end before measuring, which
    excludes the window-length boundary region where zero extension
    dominates the error for every method.
    """
    if len(estimate) != len(truth):
        raise ValueError("estimate and truth must have equal lengths")
    n = len(truth)
    if trim < 0 or 2 * trim >= n:
        raise ValueError("trim must satisfy 0 <= trim < len/2")
    sl = slice(trim, n - trim)
    diff = estimate.samples[sl] - truth.samples[sl]
    denom = float(np.linalg.norm(truth.samples[sl]))
    if denom == 0.0:
        raise ValueError("truth signal is zero on the compared region")
    return float(np.linalg.norm(diff)) / denom
