"""Windows, the STFT baseline, and the time-frequency-chirprate transform.

The transform of a signal x at frame time t, frequency eta and chirp rate
lam is the Riemann-sum discretization of

    S_x(t, eta, lam) = integral x(t+tau) (1/sigma) g(tau/sigma)
                       exp(-i 2 pi eta tau - i pi lam tau^2) dtau

with the unit Gaussian g and the window truncated and renormalized to unit
discrete mass.  For each fixed chirp rate the frequency axis is evaluated
with one FFT of the demodulated, windowed frame, so a full cube over n
frames, m chirp bins and frame length L costs O(n m L log L).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (AnalysisConfig, ChirpRateGrid, FrequencyGrid,
                    SampledSignal, TFCCube)

__all__ = [
    "GaussianWindow",
    "gaussian_pft",
    "chirp_amp_kernel",
    "chirp_offset_kernel",
    "ct_closed_form_lfm",
    "stft",
    "chirplet_transform",
    "iter_ct_frames",
    "AdmissibilityReport",
    "verify_admissibility",
]


@dataclass(frozen=True)
class GaussianWindow:
    """Truncated unit-integral Gaussian window (1/sigma) g(tau/sigma)."""

    sigma: float
    truncation_half_width: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError("sigma must be finite and > 0")
        if self.truncation_half_width < 1:
            raise ValueError("truncation_half_width must be >= 1 sample")

    @classmethod
    def for_config(cls, cfg: AnalysisConfig, sample_rate: float) -> "GaussianWindow":
        return cls(cfg.sigma, cfg.window_half_width(sample_rate))

    @property
    def support(self) -> int:
        """Total support length in samples (2N + 1)."""
        return 2 * self.truncation_half_width + 1

    def sample_values(self, sample_rate: float) -> np.ndarray:
        """Window samples over [-N, N], renormalized to unit Riemann mass."""
        return _window_samples(self.sigma, self.truncation_half_width, sample_rate)

    def offsets(self) -> np.ndarray:
        N = self.truncation_half_width
        return np.arange(-N, N + 1)


@lru_cache(maxsize=32)
def _window_samples(sigma: float, half_width: int, sample_rate: float) -> np.ndarray:
    tau = np.arange(-half_width, half_width + 1) / sample_rate
    raw = np.exp(-0.5 * (tau / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)
    # renormalize so that sum(w) * dt == 1 exactly
    w = raw / (raw.sum() / sample_rate)
    w.setflags(write=False)
    return w


def gaussian_pft(eta, lam):
    """Closed-form order-2 polynomial Fourier transform of the unit Gaussian.

    Evaluates (1 + i 2 pi lam)^(-1/2) exp(-2 pi^2 eta^2 / (1 + i 2 pi lam))
    with the principal square root; arguments are dimensionless.  Its
    magnitude is (1 + 4 pi^2 lam^2)^(-1/4) exp(-2 pi^2 eta^2 / (1 + 4 pi^2
    lam^2)), bounded by 1 with the maximum at the origin.
    """
    eta = np.asarray(eta, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    z = 1.0 + 2j * np.pi * lam
    out = np.exp(-2.0 * np.pi ** 2 * eta ** 2 / z) / np.sqrt(z)
    return out if out.ndim else complex(out)


def chirp_amp_kernel(dlam, sigma: float):
    """Chirp-rate mismatch attenuation (1 + i 2 pi sigma^2 dlam)^(-1/2)."""
    dlam = np.asarray(dlam, dtype=np.float64)
    out = 1.0 / np.sqrt(1.0 + 2j * np.pi * sigma ** 2 * dlam)
    return out if out.ndim else complex(out)


def chirp_offset_kernel(dlam, deta, sigma: float):
    """Frequency mismatch factor exp(-2 pi^2 sigma^2 deta^2 / (1 + i 2 pi sigma^2 dlam))."""
    dlam = np.asarray(dlam, dtype=np.float64)
    deta = np.asarray(deta, dtype=np.float64)
    out = np.exp(-2.0 * np.pi ** 2 * sigma ** 2 * deta ** 2
                 / (1.0 + 2j * np.pi * sigma ** 2 * dlam))
    return out if out.ndim else complex(out)


def ct_closed_form_lfm(x_value, phi1: float, phi2: float, eta, lam, sigma: float):
    """Analytic transform value of a linear chirp (exact for pure LFMs).

    For a component whose local model at the frame is
    x(t) exp(i 2 pi (phi1 tau + phi2 tau^2 / 2)), the transform at (eta,
    lam) equals ``x_value * A(lam - phi2) * Omega(lam - phi2, eta - phi1)``
    where A and Omega are the Gaussian chirp kernels above.  The magnitude
    decays exponentially in the frequency offset but only like
    (1 + 4 pi^2 sigma^4 dlam^2)^(-1/4) in the chirp-rate offset.
    """
    dlam = np.asarray(lam, dtype=np.float64) - phi2
    deta = np.asarray(eta, dtype=np.float64) - phi1
    out = x_value * chirp_amp_kernel(dlam, sigma) * chirp_offset_kernel(dlam, deta, sigma)
    return out if np.ndim(out) else complex(out)


def _frame_centers(n_samples: int, hop: int) -> np.ndarray:
    return np.arange(0, n_samples, hop)


def _fft_bin_indices(fgrid: FrequencyGrid, sample_rate: float, T: int) -> np.ndarray:
    """Map physical grid frequencies to FFT output bins of a length-T FFT."""
    k = np.rint(fgrid.values * T / sample_rate).astype(np.int64)
    if np.max(np.abs(fgrid.values - k * sample_rate / T)) > 1e-9 * sample_rate:
        raise ValueError("frequency grid is not aligned with the frame FFT bins")
    return np.mod(k, T)


def iter_ct_frames(x: SampledSignal, cfg: AnalysisConfig, fgrid: FrequencyGrid,
                   cgrid: ChirpRateGrid, batch: int = 64):
    """Yield (frame_indices, slices) batches of the transform.

    ``slices`` has shape (len(frame_indices), len(fgrid), len(cgrid)).
    Boundary frames are computed against the zero-extended signal.  This
    is the memory-bounded engine behind both the materialized cube and the
    streaming processor.
    """
    window = GaussianWindow.for_config(cfg, x.sample_rate)
    N = window.truncation_half_width
    L = window.support
    T = cfg.frame_length
    if len(x) < L:
        raise ValueError(f"signal length {len(x)} is shorter than one window ({L} samples)")
    dt = x.dt
    offs = window.offsets()
    w = window.sample_values(x.sample_rate)
    tau = offs * dt
    # demodulators, one row per chirp-rate bin, window and dt folded in
    demod = (w * dt) * np.exp(-1j * np.pi * cgrid.values[:, None] * tau ** 2)
    fft_pos = np.mod(offs, T)
    freq_idx = _fft_bin_indices(fgrid, x.sample_rate, T)

    xpad = np.concatenate([np.zeros(N, np.complex128), x.samples,
                           np.zeros(N, np.complex128)])
    centers = _frame_centers(len(x), cfg.frame_hop)
    for lo in range(0, centers.size, batch):
        idx = centers[lo:lo + batch]
        frames = xpad[idx[:, None] + (offs + N)[None, :]]
        z = frames[:, None, :] * demod[None, :, :]
        buf = np.zeros((idx.size, len(cgrid), T), dtype=np.complex128)
        buf[:, :, fft_pos] = z
        spec = np.fft.fft(buf, axis=-1)
        yield np.arange(lo, lo + idx.size), np.ascontiguousarray(
            spec[:, :, freq_idx].transpose(0, 2, 1))


def chirplet_transform(x: SampledSignal, cfg: AnalysisConfig, fgrid: FrequencyGrid,
                       cgrid: ChirpRateGrid) -> TFCCube:
    """Full transform cube over (frame, frequency bin, chirp-rate bin).

    The chirp-rate = 0 slice equals :func:`stft` with the same window and
    hop entry for entry; for a pure linear chirp the cube matches
    :func:`ct_closed_form_lfm` up to quadrature error.
    """
    centers = _frame_centers(len(x), cfg.frame_hop)
    data = np.empty((centers.size, len(fgrid), len(cgrid)), dtype=np.complex128)
    for idx, slices in iter_ct_frames(x, cfg, fgrid, cgrid):
        data[idx] = slices
    frame_times = x.start_time + centers / x.sample_rate
    return TFCCube(data, frame_times, fgrid, cgrid, cfg.sigma)


def stft(x: SampledSignal, window: GaussianWindow, hop: int,
         fgrid: FrequencyGrid) -> np.ndarray:
    """Short-time Fourier transform with the scaled window, shape (frames, freqs).

    This is exactly the chirp-rate = 0 slice of the cube (same zero
    extension, same renormalized window), kept as an independent baseline.
    """
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if len(x) == 0:
        raise ValueError("empty signal")
    N = window.truncation_half_width
    L = window.support
    if len(x) < L:
        raise ValueError(f"signal length {len(x)} is shorter than one window ({L} samples)")
    T = _infer_frame_length(fgrid, x.sample_rate)
    if L > T:
        raise ValueError("window support does not fit inside a frame")
    dt = x.dt
    offs = window.offsets()
    w = window.sample_values(x.sample_rate) * dt
    fft_pos = np.mod(offs, T)
    freq_idx = _fft_bin_indices(fgrid, x.sample_rate, T)

    xpad = np.concatenate([np.zeros(N, np.complex128), x.samples,
                           np.zeros(N, np.complex128)])
    centers = _frame_centers(len(x), hop)
    out = np.empty((centers.size, len(fgrid)), dtype=np.complex128)
    for lo in range(0, centers.size, 256):
        idx = centers[lo:lo + 256]
        frames = xpad[idx[:, None] + (offs + N)[None, :]] * w
        buf = np.zeros((idx.size, T), dtype=np.complex128)
        buf[:, fft_pos] = frames
        out[lo:lo + idx.size] = np.fft.fft(buf, axis=-1)[:, freq_idx]
    return out


def _infer_frame_length(fgrid: FrequencyGrid, sample_rate: float) -> int:
    T = int(round(sample_rate / fgrid.bin_width))
    if abs(sample_rate / T - fgrid.bin_width) > 1e-9 * fgrid.bin_width * T:
        raise ValueError("frequency grid spacing does not divide the sample rate")
    return T


@dataclass(frozen=True)
class AdmissibilityReport:
    """Numerical check of the window transform's admissibility conditions."""

    fitted_c: float
    max_magnitude: float
    origin_magnitude: float
    bounded_by_origin: bool
    eta_monotone: bool

    @property
    def admissible(self) -> bool:
        return (np.isfinite(self.fitted_c) and self.bounded_by_origin
                and self.eta_monotone)


def verify_admissibility(extent: tuple[float, float] = (1e-3, 1e3),
                         points: int = 61) -> AdmissibilityReport:
    """Sweep the Gaussian window transform over a log-spaced grid.

    Reports the smallest constant C with |pft(eta, lam)| <= C / sqrt(|eta| +
    |lam|) over the sweep, checks that the magnitude is globally bounded by
    its value 1 at the origin, and that it decreases monotonically along
    the frequency axis.  Used by the test suite only.
    """
    lo, hi = extent
    axis = np.concatenate([-np.logspace(np.log10(hi), np.log10(lo), points),
                           [0.0], np.logspace(np.log10(lo), np.log10(hi), points)])
    eta, lam = np.meshgrid(axis, axis, indexing="ij")
    mag = np.abs(gaussian_pft(eta, lam))
    weight = np.sqrt(np.abs(eta) + np.abs(lam))
    mask = weight > 0
    fitted_c = float(np.max(mag[mask] * weight[mask]))
    max_mag = float(np.max(mag))
    origin = float(np.abs(gaussian_pft(0.0, 0.0)))
    eta_line = np.abs(gaussian_pft(np.logspace(np.log10(lo), np.log10(hi), 512), 0.0))
    return AdmissibilityReport(
        fitted_c=fitted_c,
        max_magnitude=max_mag,
        origin_magnitude=origin,
        bounded_by_origin=bool(max_mag <= origin + 1e-12),
        eta_monotone=bool(np.all(np.diff(eta_line) < 0)),
    )
