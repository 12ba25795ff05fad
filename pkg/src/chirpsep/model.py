"""Core domain types shared by every stage of the separation pipeline.

Conventions used throughout the package:

* time is in seconds, frequency in Hz, chirp rate in Hz/s;
* a "frame" is one analysis window position; frame ``i`` is centered on
  sample index ``i * frame_hop`` of the input signal;
* the three-dimensional transform is indexed ``(frame, freq_bin, chirp_bin)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "SampledSignal",
    "FrequencyGrid",
    "ChirpRateGrid",
    "TFCCube",
    "ThresholdPolicy",
    "AnalysisConfig",
    "RidgeTrack",
    "RidgeSet",
    "ComponentEstimate",
    "make_grids",
]

_GRID_RTOL = 1e-9


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampledSignal:
    """A uniformly sampled real or complex time series.

    Real signals are stored with zero imaginary part and ``is_real=True``;
    the flag controls grid construction and the factor-2 real-part
    reconstruction downstream.
    """

    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    is_real: bool = True

    def __post_init__(self) -> None:
        samples = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("signal must be a non-empty 1-D sequence")
        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be finite and > 0, got {self.sample_rate}")
        if not np.isfinite(self.start_time):
            raise ValueError("start_time must be finite")
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise ValueError("signal samples must be finite")
        if self.is_real and np.any(samples.imag != 0.0):
            raise ValueError("signal flagged real but has nonzero imaginary parts")
        object.__setattr__(self, "samples", _as_readonly(samples))

    @classmethod
    def from_real(cls, values: Sequence[float], sample_rate: float,
                  start_time: float = 0.0) -> "SampledSignal":
        v = np.asarray(values, dtype=np.float64)
        return cls(v.astype(np.complex128), sample_rate, start_time, is_real=True)

    @classmethod
    def from_complex(cls, values: Sequence[complex], sample_rate: float,
                     start_time: float = 0.0) -> "SampledSignal":
        return cls(np.asarray(values, dtype=np.complex128), sample_rate,
                   start_time, is_real=False)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    def real_values(self) -> np.ndarray:
        """Real waveform view (valid only for real-flagged signals)."""
        if not self.is_real:
            raise ValueError("signal is complex; use .samples")
        return self.samples.real

    def scaled(self, factor: complex) -> "SampledSignal":
        real = self.is_real and float(np.imag(factor)) == 0.0
        return SampledSignal(self.samples * factor, self.sample_rate,
                             self.start_time, is_real=real)


class _UniformGrid:
    """Shared behaviour of the frequency and chirp-rate axes."""

    values: np.ndarray
    bin_width: float

    def _validate(self, unit: str) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError(f"{unit} grid must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{unit} grid values must be finite")
        if not (np.isfinite(self.bin_width) and self.bin_width > 0):
            raise ValueError(f"{unit} bin_width must be finite and > 0")
        if v.size > 1:
            steps = np.diff(v)
            if np.any(steps <= 0):
                raise ValueError(f"{unit} grid must be strictly ascending")
            scale = max(abs(v[0]), abs(v[-1]), self.bin_width)
            if np.max(np.abs(steps - self.bin_width)) > _GRID_RTOL * scale:
                raise ValueError(f"{unit} grid spacing is not uniform")
        object.__setattr__(self, "values", _as_readonly(v))

    def __len__(self) -> int:
        return self.values.size

    def index_of(self, value: float) -> int:
        """Nearest bin index for a physical value (clipped to the grid)."""
        idx = int(round((value - self.values[0]) / self.bin_width))
        return min(max(idx, 0), self.values.size - 1)

    def value_of(self, index: int) -> float:
        return float(self.values[index])

    def offset_from(self, value: float) -> float:
        """Distance of ``value`` from its nearest bin, in bins."""
        k = self.index_of(value)
        return abs(value - self.values[k]) / self.bin_width


@dataclass(frozen=True)
class FrequencyGrid(_UniformGrid):
    """Ascending, uniformly spaced frequency axis in Hz."""

    values: np.ndarray
    bin_width: float

    def __post_init__(self) -> None:
        self._validate("frequency")


@dataclass(frozen=True)
class ChirpRateGrid(_UniformGrid):
    """Ascending, uniformly spaced chirp-rate axis in Hz/s."""

    values: np.ndarray
    bin_width: float

    def __post_init__(self) -> None:
        self._validate("chirp-rate")


def make_grids(frame_length: int, sample_rate: float,
               real: bool = True) -> tuple[FrequencyGrid, ChirpRateGrid]:
    """Build the default frequency and chirp-rate axes for a frame length.

    For a frame of ``T`` samples at rate ``Fs`` the frequency axis is
    ``{0, 1, ..., T/2-1} * Fs/T`` for real signals and the full
    ``{-T/2+1, ..., T/2} * Fs/T`` axis for complex ones.  The chirp-rate
    axis is symmetric, ``{-(T/2-1), ..., T/2-1} * Fs^2/T^2``.

    Parameters
    ----------
    frame_length : int
        Analysis frame length ``T`` in samples; must be even and >= 8.
    sample_rate : float
        Sampling rate in Hz.
    real : bool
        Restrict the frequency axis to nonnegative bins (conjugate symmetry
        makes negative bins redundant for real inputs).
    """
    T = int(frame_length)
    if T != frame_length or T < 8 or T % 2 != 0:
        raise ValueError(f"frame length must be an even integer >= 8, got {frame_length}")
    if not np.isfinite(sample_rate) or sample_rate <= 0:
        raise ValueError("sample_rate must be finite and > 0")
    df = sample_rate / T
    if real:
        freqs = np.arange(T // 2) * df
    else:
        freqs = np.arange(-T // 2 + 1, T // 2 + 1) * df
    dr = sample_rate ** 2 / T ** 2
    rates = np.arange(-(T // 2 - 1), T // 2) * dr
    return FrequencyGrid(freqs, df), ChirpRateGrid(rates, dr)


@dataclass(frozen=True)
class TFCCube:
    """Complex transform values over (frame, frequency bin, chirp-rate bin)."""

    data: np.ndarray
    frame_times: np.ndarray
    freq_grid: FrequencyGrid
    chirp_grid: ChirpRateGrid
    sigma: float

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ValueError("cube data must be 3-D (frame, freq, chirp)")
        times = np.ascontiguousarray(self.frame_times, dtype=np.float64)
        expected = (times.size, len(self.freq_grid), len(self.chirp_grid))
        if data.shape != expected:
            raise ValueError(f"cube shape {data.shape} does not match grids {expected}")
        if not np.all(np.isfinite(data.view(np.float64) if data.dtype == np.complex128 else data)):
            raise ValueError("cube entries must be finite")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be finite and > 0")
        object.__setattr__(self, "data", _as_readonly(data))
        object.__setattr__(self, "frame_times", _as_readonly(times))

    @property
    def n_frames(self) -> int:
        return self.frame_times.size

    @property
    def frame_dt(self) -> float:
        """Spacing of consecutive frame centers in seconds."""
        if self.frame_times.size < 2:
            raise ValueError("cube has a single frame; frame spacing is undefined")
        return float(self.frame_times[1] - self.frame_times[0])

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)


@dataclass(frozen=True)
class ThresholdPolicy:
    """How the per-frame detection threshold is derived.

    ``absolute`` stores the floor amplitude mu (threshold is mu/2);
    ``frame_fraction`` and ``global_fraction`` store a fraction of the
    per-frame or whole-cube maximum magnitude.
    """

    kind: str
    value: float

    _KINDS = ("absolute", "frame_fraction", "global_fraction")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown threshold policy {self.kind!r}; expected one of {self._KINDS}")
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError("threshold policy value must be finite and >= 0")

    @classmethod
    def absolute(cls, mu: float) -> "ThresholdPolicy":
        return cls("absolute", mu)

    @classmethod
    def frame_fraction(cls, fraction: float = 0.3) -> "ThresholdPolicy":
        return cls("frame_fraction", fraction)

    @classmethod
    def global_fraction(cls, fraction: float) -> "ThresholdPolicy":
        return cls("global_fraction", fraction)


@dataclass(frozen=True)
class AnalysisConfig:
    """Parameters shared by the transform, ridge and separation stages.

    ``delta`` (the separation resolution) may be left as None, in which
    case stages that need it resolve it to twice the frequency bin width.
    """

    sigma: float
    frame_length: int = 256
    frame_hop: int = 1
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy.frame_fraction)
    rho: float = 0.0
    delta: Optional[float] = None
    matched_half_width_b: int = 20
    max_components: Optional[int] = None
    include_trend: bool = False
    truncation_sigmas: float = 4.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError("sigma must be finite and > 0")
        T = self.frame_length
        if T < 8 or T % 2 != 0:
            raise ValueError("frame_length must be an even integer >= 8")
        if self.frame_hop < 1:
            raise ValueError("frame_hop must be >= 1")
        if not np.isfinite(self.rho) or self.rho < 0:
            raise ValueError("rho must be finite and >= 0")
        if self.delta is not None and (not np.isfinite(self.delta) or self.delta <= 0):
            raise ValueError("delta must be finite and > 0")
        if self.matched_half_width_b < 0:
            raise ValueError("matched_half_width_b must be >= 0")
        if self.max_components is not None and self.max_components < 1:
            raise ValueError("max_components must be a positive integer")
        if not np.isfinite(self.truncation_sigmas) or self.truncation_sigmas <= 0:
            raise ValueError("truncation_sigmas must be finite and > 0")

    def window_half_width(self, sample_rate: float) -> int:
        """Truncation half-width in samples, clamped to fit one frame."""
        n = int(np.floor(self.truncation_sigmas * self.sigma * sample_rate))
        return max(1, min(n, (self.frame_length - 1) // 2))

    def resolved_delta(self, fgrid: FrequencyGrid) -> float:
        return self.delta if self.delta is not None else 2.0 * fgrid.bin_width


@dataclass
class RidgeTrack:
    """Per-frame ridge estimates for one component.

    Arrays span the full frame axis; frames where the component is absent
    hold NaN (and cluster id -1).  Component 0 is reserved for the trend.
    """

    component: int
    eta: np.ndarray
    lam: np.ndarray
    magnitude: np.ndarray
    cluster_id: np.ndarray
    is_trend: bool = False

    def present(self) -> np.ndarray:
        return ~np.isnan(self.eta)

    def n_present(self) -> int:
        return int(np.count_nonzero(self.present()))


@dataclass
class RidgeSet:
    """Ridge tracks of all retrieved components over a common frame axis."""

    frame_times: np.ndarray
    tracks: list[RidgeTrack]
    freq_grid: FrequencyGrid
    chirp_grid: ChirpRateGrid

    def __post_init__(self) -> None:
        n = np.asarray(self.frame_times).size
        for tr in self.tracks:
            if not (tr.eta.size == tr.lam.size == tr.magnitude.size
                    == tr.cluster_id.size == n):
                raise ValueError("ridge track arrays must match the frame axis")

    @property
    def n_frames(self) -> int:
        return np.asarray(self.frame_times).size

    @property
    def n_components(self) -> int:
        return len(self.tracks)

    def track(self, component: int) -> RidgeTrack:
        for tr in self.tracks:
            if tr.component == component:
                return tr
        raise KeyError(f"no track for component {component}")

    @property
    def frame_dt(self) -> float:
        t = np.asarray(self.frame_times)
        if t.size < 2:
            raise ValueError("single-frame ridge set has no frame spacing")
        return float(t[1] - t[0])


@dataclass
class ComponentEstimate:
    """Recovered waveform plus per-frame amplitude/IF/chirp tracks of one mode."""

    component: int
    waveform: SampledSignal
    frame_times: np.ndarray
    amplitude_track: np.ndarray
    if_track: np.ndarray
    chirp_track: np.ndarray
    is_trend: bool = False

    def __post_init__(self) -> None:
        n = np.asarray(self.frame_times).size
        if not (self.amplitude_track.size == self.if_track.size
                == self.chirp_track.size == n):
            raise ValueError("component tracks must share the frame grid")
        finite_amp = self.amplitude_track[~np.isnan(self.amplitude_track)]
        if np.any(finite_amp < 0):
            raise ValueError("amplitude track must be nonnegative")
