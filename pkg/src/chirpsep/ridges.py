"""Thresholding, per-frame clustering, temporal linking and track cleanup.

The per-frame detection set {(eta, lam) : magnitude >= threshold} is broken
into 8-connected clusters, clusters are associated across frames by a
greedy nearest-peak rule, and the resulting tracks yield one ridge per
component per frame.  When two tracks meet inside a single connected blob
(crossing instantaneous frequencies with close chirp rates), the blob is
partitioned among the claiming tracks by proximity to their predicted
positions, so temporary merges do not drop components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .model import (ChirpRateGrid, FrequencyGrid, RidgeSet, RidgeTrack,
                    ThresholdPolicy)

__all__ = [
    "FrameCluster",
    "FrameClusters",
    "threshold_frame",
    "cluster_frame",
    "TrackLinker",
    "link_tracks",
    "smooth_ridge",
    "refine_chirp_from_if",
    "fill_track_gaps",
    "pin_trend",
]

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass
class FrameCluster:
    """One connected above-threshold component of a frame's (eta, lam) plane."""

    cells: np.ndarray          # (m, 2) int (freq_bin, chirp_bin), lexicographic
    values: np.ndarray         # magnitudes at the cells
    peak: tuple[int, int]
    peak_value: float
    component: Optional[int] = None


@dataclass
class FrameClusters:
    """Threshold and cluster decomposition of one frame."""

    frame_index: int
    frame_time: float
    threshold: float
    clusters: list[FrameCluster] = field(default_factory=list)


def threshold_frame(magnitudes: np.ndarray, policy: ThresholdPolicy,
                    mu_override: Optional[float] = None,
                    global_max: Optional[float] = None) -> tuple[np.ndarray, float]:
    """Binary detection mask of one frame plus the threshold used.

    With ``mu_override`` the threshold is mu/2 regardless of the policy;
    an ``absolute`` policy stores mu and behaves the same way.  Fractional
    policies scale the per-frame or whole-cube maximum magnitude.
    """
    mags = np.asarray(magnitudes, dtype=np.float64)
    if not np.all(np.isfinite(mags)):
        raise ValueError("frame magnitudes must be finite")
    if mu_override is not None:
        thr = 0.5 * float(mu_override)
    elif policy.kind == "absolute":
        thr = 0.5 * policy.value
    elif policy.kind == "frame_fraction":
        thr = policy.value * float(mags.max(initial=0.0))
    else:  # global_fraction
        if global_max is None:
            raise ValueError("global_fraction policy needs the cube-wide maximum")
        thr = policy.value * float(global_max)
    mask = (mags >= thr) & (mags > 0.0)
    return mask, thr


def cluster_frame(mask: np.ndarray, magnitudes: np.ndarray,
                  min_cells: int = 3, subdivide: bool = True,
                  subpeak_rel: float = 0.5,
                  subpeak_min_cells: int = 5) -> list[FrameCluster]:
    """Per-component cell sets of one frame's detection mask.

    Connected components (8-neighborhood) of the mask are found first and
    the smallest discarded as noise.  Because the transform magnitude
    decays slowly along the chirp-rate axis, distinct components whose
    frequencies are a few bins apart can share one connected blob; with
    ``subdivide`` each blob is therefore split along its frequency-axis
    ridge lines (see :func:`_subdivide_cluster`) so that one cluster
    corresponds to one concentration region, mirroring the per-component
    decomposition the thresholded set is meant to carry.

    Each cluster's cells are in lexicographic (freq_bin, chirp_bin) order
    with the argmax cell as representative peak; equal magnitudes resolve
    to the lexicographically lowest cell.
    """
    labels, count = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    clusters: list[FrameCluster] = []
    mags = np.asarray(magnitudes, dtype=np.float64)
    for lab in range(1, count + 1):
        cells = np.argwhere(labels == lab)
        if cells.shape[0] < min_cells:
            continue
        if subdivide:
            clusters.extend(_subdivide_cluster(cells, mags, subpeak_rel,
                                               subpeak_min_cells))
        else:
            clusters.append(_make_cluster(cells, mags))
    return clusters


def _make_cluster(cells: np.ndarray, mags: np.ndarray) -> FrameCluster:
    values = mags[cells[:, 0], cells[:, 1]]
    best = int(np.argmax(values))
    return FrameCluster(
        cells=cells,
        values=values,
        peak=(int(cells[best, 0]), int(cells[best, 1])),
        peak_value=float(values[best]),
    )


def _subdivide_cluster(cells: np.ndarray, mags: np.ndarray,
                       subpeak_rel: float,
                       subpeak_min_cells: int) -> list[FrameCluster]:
    """Split a connected blob that carries several frequency-ridge lines.

    Cells that are local maxima along the frequency axis trace each
    component's ridge as a curve over the chirp-rate axis; curves of
    different components stay 8-disconnected whenever their frequencies
    differ by more than a bin or two, even though the full blobs merge.
    When two or more sufficiently strong, sufficiently large ridge curves
    are present, the blob's cells are partitioned by nearest curve.
    """
    k_idx, j_idx = cells[:, 0], cells[:, 1]
    k0, k1 = k_idx.min(), k_idx.max()
    j0, j1 = j_idx.min(), j_idx.max()
    local = np.full((k1 - k0 + 3, j1 - j0 + 3), -np.inf)
    local[k_idx - k0 + 1, j_idx - j0 + 1] = mags[k_idx, j_idx]
    inside = np.zeros_like(local, dtype=bool)
    inside[k_idx - k0 + 1, j_idx - j0 + 1] = True
    ridge_mask = inside & (local >= np.roll(local, 1, axis=0)) \
        & (local >= np.roll(local, -1, axis=0))
    groups, n_groups = ndimage.label(ridge_mask, structure=_EIGHT_CONNECTED)
    if n_groups <= 1:
        return [_make_cluster(cells, mags)]
    peaks = ndimage.maximum(np.where(inside, local, 0.0), groups,
                            index=np.arange(1, n_groups + 1))
    sizes = ndimage.sum_labels(ridge_mask, groups, index=np.arange(1, n_groups + 1))
    strong = np.flatnonzero((peaks >= subpeak_rel * peaks.max())
                            & (sizes >= subpeak_min_cells)) + 1
    if strong.size > 1:
        # distinct components must differ in frequency; side ripples of one
        # component peak at (almost) the same frequency row and are absorbed
        order = strong[np.argsort(-peaks[strong - 1])]
        rows = [int(np.argwhere(groups == g)[
            np.argmax(local[groups == g])][0]) for g in order]
        keep = []
        for g, row in zip(order, rows):
            if all(abs(row - local_row) > 2 for _, local_row in keep):
                keep.append((g, row))
        strong = np.array([g for g, _ in keep])
    if strong.size <= 1:
        return [_make_cluster(cells, mags)]
    # Voronoi partition of all cells by nearest ridge-curve cell
    seed_cells = [np.argwhere(groups == g) for g in strong]
    dist = np.empty((cells.shape[0], len(seed_cells)))
    pos = np.stack([k_idx - k0 + 1, j_idx - j0 + 1], axis=1)
    for i, sc in enumerate(seed_cells):
        d = np.abs(pos[:, None, :] - sc[None, :, :]).sum(axis=2)
        dist[:, i] = d.min(axis=1)
    owner = np.argmin(dist, axis=1)
    out = []
    for i in range(len(seed_cells)):
        sel = owner == i
        if np.any(sel):
            out.append(_make_cluster(cells[sel], mags))
    return out


@dataclass
class _Track:
    ident: int
    birth: int
    last_frame: int
    last_eta: float
    last_lam: float
    entries: dict = field(default_factory=dict)  # frame -> FrameCluster
    total_value: float = 0.0

    def record(self, frame: int, cluster: FrameCluster, eta: float, lam: float) -> None:
        self.entries[frame] = cluster
        self.last_frame = frame
        self.last_eta = eta
        self.last_lam = lam
        self.total_value += cluster.peak_value


class TrackLinker:
    """Incremental cluster-to-track association, one frame at a time.

    Shared by the batch pipeline and the streaming processor so both
    produce identical associations.  Per frame: greedy 1-1 matching by
    |d eta| + rho |d lam| against each open track's predicted position,
    claims and splits of merged blobs, then births from leftover clusters.
    """

    def __init__(self, rho: float, freq_grid: FrequencyGrid,
                 chirp_grid: ChirpRateGrid, dt_frame: float,
                 max_gap: int = 5, gate_bins: float = 8.0,
                 birth_chirp_margin: float = 0.25):
        self.rho = rho
        self.fgrid = freq_grid
        self.cgrid = chirp_grid
        self.dt_frame = dt_frame
        self.max_gap = max_gap
        self.gate = gate_bins * (freq_grid.bin_width + rho * chirp_grid.bin_width)
        self.lam_birth_max = (1.0 - birth_chirp_margin) * float(
            np.max(np.abs(chirp_grid.values)))
        self.tracks: list[_Track] = []
        self._next_id = 0

    def _peak_coords(self, cl: FrameCluster) -> tuple[float, float]:
        return (self.fgrid.values[cl.peak[0]], self.cgrid.values[cl.peak[1]])

    def step(self, fc: FrameClusters) -> dict[int, FrameCluster]:
        """Process one frame; returns {track ident: cluster} assignments.

        Splits of merged clusters are written back into ``fc.clusters``.
        """
        f = fc.frame_index
        fgrid, cgrid, rho, dt_frame = self.fgrid, self.cgrid, self.rho, self.dt_frame
        open_tracks = [tr for tr in self.tracks if f - tr.last_frame <= self.max_gap]
        # 1-1 greedy matching by predicted-peak distance; a cluster whose
        # cells contain the prediction is matchable even when its peak has
        # wandered (flat chirp-rate profiles move the argmax around)
        pairs = []
        for ti, tr in enumerate(open_tracks):
            gap_frames = f - tr.last_frame
            eta_pred = tr.last_eta + tr.last_lam * gap_frames * dt_frame
            k_pred = fgrid.index_of(eta_pred)
            j_pred = cgrid.index_of(tr.last_lam)
            for ci, cl in enumerate(fc.clusters):
                eta_c, lam_c = self._peak_coords(cl)
                cost = abs(eta_c - eta_pred) + rho * abs(lam_c - tr.last_lam)
                d_cells = np.abs(cl.cells - np.array([k_pred, j_pred])).max(axis=1).min()
                if d_cells <= 2:
                    cost = min(cost, d_cells * fgrid.bin_width)
                if cost <= self.gate:
                    pairs.append((cost, ti, ci))
        pairs.sort(key=lambda p: (p[0], open_tracks[p[1]].ident, p[2]))
        used_t: set[int] = set()
        used_c: set[int] = set()
        assignment: dict[int, list[int]] = {}
        for cost, ti, ci in pairs:
            if ti in used_t or ci in used_c:
                continue
            used_t.add(ti)
            used_c.add(ci)
            assignment.setdefault(ci, []).append(ti)
        # unmatched open tracks may claim an already-assigned cluster whose
        # cells reach their predicted position (temporarily merged blobs)
        for ti, tr in enumerate(open_tracks):
            if ti in used_t:
                continue
            k_pred = fgrid.index_of(tr.last_eta + tr.last_lam
                                    * (f - tr.last_frame) * dt_frame)
            j_pred = cgrid.index_of(tr.last_lam)
            for ci in list(assignment):
                cl = fc.clusters[ci]
                d = np.abs(cl.cells - np.array([k_pred, j_pred])).max(axis=1)
                if d.min() <= 2:
                    assignment[ci].append(ti)
                    used_t.add(ti)
                    break
        # resolve assignments, splitting clusters claimed by several tracks
        result: dict[int, FrameCluster] = {}
        new_clusters = list(fc.clusters)
        for ci, claimants in assignment.items():
            cl = fc.clusters[ci]
            if len(claimants) == 1:
                tr = open_tracks[claimants[0]]
                eta_c, lam_c = self._peak_coords(cl)
                tr.record(f, cl, eta_c, lam_c)
                result[tr.ident] = cl
                continue
            parts = _split_cluster(cl, [open_tracks[ti] for ti in claimants],
                                   f, dt_frame, fgrid, cgrid)
            # a split is genuine only when the parts peak at distinct
            # positions; otherwise the later claimant is shadowing an
            # already-tracked peak and is turned away
            kept: list[tuple[int, int]] = []
            for idx, part in enumerate(parts):
                if part is None:
                    continue
                dup = any(abs(part.peak[0] - pk) <= 1 and abs(part.peak[1] - pj) <= 2
                          for pk, pj in kept)
                if dup:
                    parts[idx] = None
                else:
                    kept.append(part.peak)
            pieces = [p for p in parts if p is not None]
            if len(pieces) <= 1:
                tr = open_tracks[claimants[0]]
                eta_c, lam_c = self._peak_coords(cl)
                tr.record(f, cl, eta_c, lam_c)
                result[tr.ident] = cl
                continue
            new_clusters[ci] = pieces[0]
            new_clusters.extend(pieces[1:])
            for ti, part in zip(claimants, parts):
                if part is None:
                    continue
                tr = open_tracks[ti]
                eta_c, lam_c = self._peak_coords(part)
                tr.record(f, part, eta_c, lam_c)
                result[tr.ident] = part
        fc.clusters = new_clusters
        # leftover clusters start new tracks; clusters peaking near the
        # chirp-rate grid extremes are mirror-image and clipping residue
        # (the slow chirp-rate decay leaves every real component a remnant
        # there) and may be matched but never seed a track
        assigned = {id(cl) for cl in result.values()}
        born = []
        for cl in fc.clusters:
            if id(cl) in assigned:
                continue
            eta_c, lam_c = self._peak_coords(cl)
            if abs(lam_c) > self.lam_birth_max:
                continue
            born.append((eta_c, lam_c, cl))
        born.sort(key=lambda b: b[0])
        for eta_c, lam_c, cl in born:
            tr = _Track(ident=self._next_id, birth=f, last_frame=f,
                        last_eta=eta_c, last_lam=lam_c)
            tr.record(f, cl, eta_c, lam_c)
            self.tracks.append(tr)
            result[tr.ident] = cl
            self._next_id += 1
        return result


def link_tracks(frames: list[FrameClusters], rho: float,
                max_components: Optional[int] = None, *,
                freq_grid: FrequencyGrid, chirp_grid: ChirpRateGrid,
                include_trend: bool = False, min_track_frames: int = 5,
                max_gap: int = 5, gate_bins: float = 8.0,
                birth_chirp_margin: float = 0.25) -> RidgeSet:
    """Associate clusters across frames into component tracks.

    Consecutive-frame association minimizes |d eta| + rho |d lam| between a
    cluster peak and each open track's predicted position (the previous
    peak advanced along its own chirp rate).  Unmatched clusters start new
    tracks; tracks shorter than ``min_track_frames`` are pruned; the number
    of surviving oscillatory tracks, capped by ``max_components``, is the
    component count estimate.  Cluster component labels are written back
    into ``frames`` for the ridge refinement stage.
    """
    if not frames:
        raise ValueError("no frames to link")
    dt_frame = (frames[1].frame_time - frames[0].frame_time) if len(frames) > 1 else 0.0
    linker = TrackLinker(rho, freq_grid, chirp_grid, dt_frame, max_gap=max_gap,
                         gate_bins=gate_bins, birth_chirp_margin=birth_chirp_margin)
    for fc in frames:
        linker.step(fc)
    tracks = linker.tracks

    survivors = [tr for tr in tracks if len(tr.entries) >= min_track_frames]
    survivors = _merge_shadow_tracks(survivors, freq_grid, chirp_grid)
    trend_like = [tr for tr in survivors
                  if _is_trend_like(tr, freq_grid, chirp_grid)]
    oscillatory = [tr for tr in survivors if tr not in trend_like]
    if not include_trend:
        oscillatory = survivors
        trend_like = []
    if max_components is not None and len(oscillatory) > max_components:
        warnings.warn(f"found {len(oscillatory)} tracks, keeping the "
                      f"{max_components} strongest", stacklevel=2)
        oscillatory.sort(key=lambda tr: -tr.total_value)
        oscillatory = oscillatory[:max_components]
    oscillatory.sort(key=lambda tr: (tr.birth, tr.ident))

    n_frames = len(frames)
    frame_times = np.array([fc.frame_time for fc in frames])
    out_tracks: list[RidgeTrack] = []
    if include_trend:
        trend = _new_track(0, n_frames, is_trend=True)
        for tr in trend_like:
            _write_track(trend, tr, freq_grid, chirp_grid, component=0)
        out_tracks.append(trend)
    for comp, tr in enumerate(oscillatory, start=1):
        rt = _new_track(comp, n_frames)
        _write_track(rt, tr, freq_grid, chirp_grid, component=comp)
        out_tracks.append(rt)
    return RidgeSet(frame_times, out_tracks, freq_grid, chirp_grid)


def _split_cluster(cl: FrameCluster, claimants: list[_Track], frame: int,
                   dt_frame: float, fgrid: FrequencyGrid,
                   cgrid: ChirpRateGrid) -> list[Optional[FrameCluster]]:
    """Partition a merged cluster's cells among claiming tracks."""
    preds = []
    for tr in claimants:
        k = fgrid.index_of(tr.last_eta + tr.last_lam
                           * (frame - tr.last_frame) * dt_frame)
        j = cgrid.index_of(tr.last_lam)
        preds.append((k, j))
    preds_arr = np.asarray(preds, dtype=np.float64)
    d2 = ((cl.cells[:, None, 0] - preds_arr[None, :, 0]) ** 2
          + (cl.cells[:, None, 1] - preds_arr[None, :, 1]) ** 2)
    owner = np.argmin(d2, axis=1)
    parts: list[Optional[FrameCluster]] = []
    for i in range(len(claimants)):
        sel = owner == i
        if not np.any(sel):
            parts.append(None)
            continue
        cells = cl.cells[sel]
        values = cl.values[sel]
        best = int(np.argmax(values))
        parts.append(FrameCluster(
            cells=cells, values=values,
            peak=(int(cells[best, 0]), int(cells[best, 1])),
            peak_value=float(values[best]),
        ))
    return parts


def _merge_shadow_tracks(tracks: list[_Track], fgrid: FrequencyGrid,
                         cgrid: ChirpRateGrid) -> list[_Track]:
    """Merge tracks that ride the same peak over their common frames.

    Splitting and re-detection can leave two track objects on one physical
    component; they are recognized by near-coincident positions over a
    substantial overlap and folded into the older track.
    """
    tracks = sorted(tracks, key=lambda tr: tr.ident)
    merged: list[_Track] = []
    for tr in tracks:
        host = None
        for other in merged:
            common = sorted(set(tr.entries) & set(other.entries))
            if len(common) < 5:
                continue
            de = np.mean([abs(fgrid.values[tr.entries[f].peak[0]]
                              - fgrid.values[other.entries[f].peak[0]])
                          for f in common])
            dl = np.mean([abs(cgrid.values[tr.entries[f].peak[1]]
                              - cgrid.values[other.entries[f].peak[1]])
                          for f in common])
            # frequency agreement is the discriminator; the chirp-rate
            # argmax wanders many bins on its flat profile, so its gate
            # is loose
            if de <= 1.5 * fgrid.bin_width and dl <= 25 * cgrid.bin_width:
                host = other
                break
        if host is None:
            merged.append(tr)
            continue
        for f, cl in tr.entries.items():
            if f not in host.entries:
                host.entries[f] = cl
                host.total_value += cl.peak_value
        host.last_frame = max(host.last_frame, tr.last_frame)
    for tr in merged:
        tr.entries = dict(sorted(tr.entries.items()))
    return merged


def _is_trend_like(tr: _Track, fgrid: FrequencyGrid, cgrid: ChirpRateGrid) -> bool:
    etas = np.array([fgrid.values[cl.peak[0]] for cl in tr.entries.values()])
    lams = np.array([cgrid.values[cl.peak[1]] for cl in tr.entries.values()])
    near_dc = (np.abs(etas) < 2 * fgrid.bin_width) & (np.abs(lams) < 2 * cgrid.bin_width)
    return bool(np.mean(near_dc) > 0.8)


def _new_track(component: int, n_frames: int, is_trend: bool = False) -> RidgeTrack:
    return RidgeTrack(
        component=component,
        eta=np.full(n_frames, np.nan),
        lam=np.full(n_frames, np.nan),
        magnitude=np.full(n_frames, np.nan),
        cluster_id=np.full(n_frames, -1, dtype=np.int64),
        is_trend=is_trend,
    )


def _write_track(rt: RidgeTrack, tr: _Track, fgrid: FrequencyGrid,
                 cgrid: ChirpRateGrid, component: int) -> None:
    for f, cl in tr.entries.items():
        rt.eta[f] = fgrid.values[cl.peak[0]]
        rt.lam[f] = cgrid.values[cl.peak[1]]
        rt.magnitude[f] = cl.peak_value
        rt.cluster_id[f] = component
        cl.component = component


def smooth_ridge(ridge: RidgeSet, half_window: int = 3) -> RidgeSet:
    """Running median of each track's eta and lam estimates.

    Windows shrink symmetrically near track ends so the window size stays
    odd; frames where a component is absent are skipped and stay absent.
    ``half_window=0`` is the identity.
    """
    if half_window < 0:
        raise ValueError("half_window must be >= 0")
    if half_window == 0:
        return ridge
    tracks = []
    for tr in ridge.tracks:
        eta = tr.eta.copy()
        lam = tr.lam.copy()
        present = np.flatnonzero(tr.present())
        n = tr.eta.size
        for i in present:
            w = min(half_window, i, n - 1 - i)
            sl = slice(i - w, i + w + 1)
            vals_e = tr.eta[sl]
            vals_l = tr.lam[sl]
            fin = ~np.isnan(vals_e)
            eta[i] = float(np.median(vals_e[fin]))
            lam[i] = float(np.median(vals_l[fin]))
        tracks.append(RidgeTrack(tr.component, eta, lam, tr.magnitude.copy(),
                                 tr.cluster_id.copy(), tr.is_trend))
    return RidgeSet(ridge.frame_times, tracks, ridge.freq_grid, ridge.chirp_grid)


def refine_chirp_from_if(ridge: RidgeSet, half_window: int = 12) -> RidgeSet:
    """Re-estimate each track's chirp rate as the local slope of its IF track.

    The transform magnitude is sharply peaked along frequency but nearly
    flat along chirp rate, so the per-frame chirp argmax wanders several
    bins under interference while the IF stays sub-bin accurate.  A local
    least-squares slope of eta over +-half_window frames recovers the
    chirp rate far more tightly.  Slopes falling outside the chirp grid
    are clipped to its range; trend tracks are left untouched.
    """
    if half_window < 1:
        raise ValueError("half_window must be >= 1")
    tracks = []
    dt = ridge.frame_dt if ridge.n_frames > 1 else 1.0
    lam_lo = float(ridge.chirp_grid.values[0])
    lam_hi = float(ridge.chirp_grid.values[-1])
    for tr in ridge.tracks:
        if tr.is_trend:
            tracks.append(tr)
            continue
        lam = tr.lam.copy()
        present = np.flatnonzero(tr.present())
        n = tr.eta.size
        for i in present:
            w = min(half_window, i, n - 1 - i)
            sl = slice(i - w, i + w + 1)
            t_rel = np.arange(-w, w + 1) * dt
            eta_win = tr.eta[sl]
            fin = ~np.isnan(eta_win)
            if np.count_nonzero(fin) < 3:
                continue
            tt = t_rel[fin] - t_rel[fin].mean()
            slope = float(tt @ (eta_win[fin] - eta_win[fin].mean()) / (tt @ tt))
            lam[i] = min(max(slope, lam_lo), lam_hi)
        tracks.append(RidgeTrack(tr.component, tr.eta.copy(), lam,
                                 tr.magnitude.copy(), tr.cluster_id.copy(),
                                 tr.is_trend))
    return RidgeSet(ridge.frame_times, tracks, ridge.freq_grid, ridge.chirp_grid)


def fill_track_gaps(ridge: RidgeSet) -> RidgeSet:
    """Linearly interpolate interior gaps of each track.

    Frames before a track's birth or after its death stay absent; the
    component contributes zero there during reconstruction.
    """
    tracks = []
    for tr in ridge.tracks:
        present = np.flatnonzero(tr.present())
        if present.size == 0:
            tracks.append(tr)
            continue
        eta, lam, mag = tr.eta.copy(), tr.lam.copy(), tr.magnitude.copy()
        cid = tr.cluster_id.copy()
        lo, hi = present[0], present[-1]
        inner = np.arange(lo, hi + 1)
        holes = inner[np.isnan(eta[inner])]
        if holes.size:
            eta[holes] = np.interp(holes, present, tr.eta[present])
            lam[holes] = np.interp(holes, present, tr.lam[present])
            mag[holes] = np.interp(holes, present, tr.magnitude[present])
        tracks.append(RidgeTrack(tr.component, eta, lam, mag, cid, tr.is_trend))
    return RidgeSet(ridge.frame_times, tracks, ridge.freq_grid, ridge.chirp_grid)


def pin_trend(ridge: RidgeSet, origin_magnitudes: Optional[np.ndarray] = None) -> RidgeSet:
    """Force the trend track (component 0) to (eta, lam) = (0, 0) at every frame.

    Creates the track when missing so the group solve always carries a
    trend row; on signals without a trend the solved trend is simply near
    zero.
    """
    n = ridge.n_frames
    k0 = ridge.freq_grid.index_of(0.0)
    j0 = ridge.chirp_grid.index_of(0.0)
    trend = _new_track(0, n, is_trend=True)
    trend.eta[:] = ridge.freq_grid.values[k0]
    trend.lam[:] = ridge.chirp_grid.values[j0]
    trend.cluster_id[:] = 0
    if origin_magnitudes is not None:
        trend.magnitude[:] = origin_magnitudes
    else:
        trend.magnitude[:] = 0.0
    others = [tr for tr in ridge.tracks if not tr.is_trend and tr.component != 0]
    return RidgeSet(ridge.frame_times, [trend] + others,
                    ridge.freq_grid, ridge.chirp_grid)
