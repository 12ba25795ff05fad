"""End-to-end orchestration: transform, matched filter, ridges, separation.

``run_pipeline`` is the batch path used by the command line tool and the
acceptance experiments; its per-frame stages are shared with the
streaming processor, which must produce identical interior-frame output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matchedfilter import MatchedCube, filter_matched_ct, matched_ridge
from .model import (AnalysisConfig, ChirpRateGrid, FrequencyGrid, RidgeSet,
                    SampledSignal, TFCCube, ComponentEstimate, make_grids)
from .ridges import (FrameClusters, cluster_frame, fill_track_gaps,
                     link_tracks, pin_trend, refine_chirp_from_if,
                     smooth_ridge, threshold_frame)
from .separation import (ct3s_reconstruct, gfct3s_separate,
                         refine_ridge_positions)
from .transforms import chirplet_transform

__all__ = ["TrackingParams", "PipelineResult", "build_clusters",
           "extract_ridge", "run_pipeline"]


@dataclass(frozen=True)
class TrackingParams:
    """Knobs of the ridge-extraction stage outside the core config.

    ``chirp_slope_half_window`` switches on the slope-based chirp-rate
    refit; leave None for signals whose chirp rate varies quickly relative
    to the window.  ``smoothing_half_window=0`` and ``fill_gaps=False``
    give the streaming-compatible variant (no use of future frames beyond
    the matched-filter look-ahead).
    """

    min_cluster_cells: int = 3
    min_track_frames: int = 5
    max_gap: int = 5
    gate_bins: float = 8.0
    smoothing_half_window: int = 3
    chirp_slope_half_window: Optional[int] = None
    fill_gaps: bool = True
    refine_passes: int = 1
    birth_chirp_margin: float = 0.25
    dc_guard_bins: Optional[int] = None


@dataclass
class PipelineResult:
    signal: SampledSignal
    config: AnalysisConfig
    freq_grid: FrequencyGrid
    chirp_grid: ChirpRateGrid
    ridge: RidgeSet
    components: list[ComponentEstimate]
    method: str
    fallback_frames: list[int] = field(default_factory=list)
    cube: Optional[TFCCube] = None
    matched: Optional[MatchedCube] = None


def build_clusters(mcube: MatchedCube, cfg: AnalysisConfig,
                   params: TrackingParams) -> list[FrameClusters]:
    """Threshold and cluster every frame of the matched cube.

    When a trend is modeled, the near-DC frequency rows are excluded from
    oscillatory clustering: the trend is read at its pinned (0, 0) bin
    regardless, and for real signals the region below a few bins carries
    trend smear and mirror-image leakage rather than resolvable
    components.
    """
    guard = params.dc_guard_bins
    if guard is None:
        guard = 4 if cfg.include_trend else 0
    k_min = 0
    if guard:
        k_min = int(np.searchsorted(mcube.freq_grid.values,
                                    guard * mcube.freq_grid.bin_width - 1e-12))
    global_max = float(np.max(mcube.data[:, k_min:, :])) if mcube.data.size else 0.0
    frames = []
    for i in range(mcube.n_frames):
        mags = mcube.data[i]
        if k_min:
            mags = mags.copy()
            mags[:k_min, :] = 0.0
        mask, thr = threshold_frame(mags, cfg.threshold, global_max=global_max)
        clusters = cluster_frame(mask, mags, min_cells=params.min_cluster_cells)
        frames.append(FrameClusters(
            frame_index=i,
            frame_time=float(mcube.frame_times[i]),
            threshold=thr,
            clusters=clusters,
        ))
    return frames


def extract_ridge(cube: TFCCube, mcube: MatchedCube, cfg: AnalysisConfig,
                  params: TrackingParams) -> RidgeSet:
    """Cluster, link, refine and finalize the ridge set of a cube."""
    frames = build_clusters(mcube, cfg, params)
    ridge = link_tracks(
        frames, cfg.rho, cfg.max_components,
        freq_grid=cube.freq_grid, chirp_grid=cube.chirp_grid,
        include_trend=cfg.include_trend,
        min_track_frames=params.min_track_frames,
        max_gap=params.max_gap, gate_bins=params.gate_bins,
        birth_chirp_margin=params.birth_chirp_margin,
    )
    ridge = matched_ridge(mcube, frames, cube)
    if params.smoothing_half_window > 0:
        ridge = smooth_ridge(ridge, params.smoothing_half_window)
    if params.chirp_slope_half_window is not None:
        ridge = refine_chirp_from_if(ridge, params.chirp_slope_half_window)
    if params.fill_gaps:
        ridge = fill_track_gaps(ridge)
    if cfg.include_trend:
        k0 = cube.freq_grid.index_of(0.0)
        j0 = cube.chirp_grid.index_of(0.0)
        ridge = pin_trend(ridge, np.abs(cube.data[:, k0, j0]))
    return ridge


def run_pipeline(signal: SampledSignal, cfg: AnalysisConfig,
                 method: str = "gfct3s",
                 params: Optional[TrackingParams] = None,
                 keep_cubes: bool = False) -> PipelineResult:
    """Separate a signal into component estimates.

    ``method`` selects single-ridge (``ct3s``) or group (``gfct3s``)
    reconstruction; both use the same matched-filter ridge extraction.
    """
    if method not in ("ct3s", "gfct3s"):
        raise ValueError(f"unknown method {method!r}; expected 'ct3s' or 'gfct3s'")
    params = params or TrackingParams()
    fgrid, cgrid = make_grids(cfg.frame_length, signal.sample_rate,
                              real=signal.is_real)
    cube = chirplet_transform(signal, cfg, fgrid, cgrid)
    mcube = filter_matched_ct(cube, cfg.matched_half_width_b)
    ridge = extract_ridge(cube, mcube, cfg, params)

    fallback: list[int] = []
    if method == "ct3s":
        comps = ct3s_reconstruct(cube, ridge, signal.is_real, n_samples=len(signal))
    else:
        for _ in range(params.refine_passes):
            _, info = gfct3s_separate(cube, ridge, signal.is_real,
                                      n_samples=len(signal), return_info=True)
            ridge = refine_ridge_positions(cube, ridge, info["solved"])
            if params.chirp_slope_half_window is not None:
                ridge = refine_chirp_from_if(ridge, params.chirp_slope_half_window)
        comps, info = gfct3s_separate(cube, ridge, signal.is_real,
                                      n_samples=len(signal), return_info=True)
        fallback = info["fallback_frames"]
    return PipelineResult(
        signal=signal, config=cfg, freq_grid=fgrid, chirp_grid=cgrid,
        ridge=ridge, components=comps, method=method,
        fallback_frames=fallback,
        cube=cube if keep_cubes else None,
        matched=mcube if keep_cubes else None,
    )
