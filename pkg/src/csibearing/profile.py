"""AOA profile computation and its summary metrics.

The profile over candidate directions is

    F[c] = | sum_m h_m * exp(-1j * phase[c, m]) |^2

where h_m is the (CFO-cancelled) channel at virtual element m and phase is
the precomputed steering table. The strongest cell is the bearing estimate;
secondary peaks expose multipath; the variance metric measures how spread
the profile mass is around the maximum and gates outlier rejection.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProfileError, InvalidArgumentError
from .pairing import PairedChannel
from .steering import CELL_CHUNK, DirectionGrid, SteeringTable
from .types import Direction

DEFAULT_TAU = 0.9


@dataclass(frozen=True)
class AoaProfile:
    """Magnitude grid over (elevation, azimuth) plus provenance counters."""

    magnitudes: np.ndarray
    grid: DirectionGrid
    n_packets_used: int
    compute_time: float

    def __post_init__(self) -> None:
        mags = np.asarray(self.magnitudes, dtype=float)
        if mags.shape != self.grid.shape:
            raise InvalidArgumentError(
                f"magnitudes shape {mags.shape} does not match grid {self.grid.shape}"
            )
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)

    @property
    def argmax_cell(self) -> tuple[int, int]:
        """(elevation_idx, azimuth_idx) of the maximum; ties pick the lowest flat index."""
        return self.grid.cell_index(int(np.argmax(self.magnitudes)))


@dataclass(frozen=True)
class Peak:
    direction: Direction
    magnitude: float
    rank: int


@dataclass(frozen=True)
class BearingEstimate:
    aoa_max: Peak
    top_n: tuple[Peak, ...]
    variance: float
    accepted: bool


@dataclass(frozen=True)
class EstimateOptions:
    """Peak-selection and rejection knobs (defaults from simulator tuning)."""

    n: int = 4
    k_percent: float = 40.0
    alpha_deg: float = 10.0
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.k_percent <= 100.0:
            raise InvalidArgumentError(f"k_percent must be in [0, 100], got {self.k_percent}")
        if self.alpha_deg < 0.0:
            raise InvalidArgumentError(f"alpha_deg must be >= 0, got {self.alpha_deg}")


def compute_profile(
    channel: PairedChannel, table: SteeringTable, threads: int = 1
) -> AoaProfile:
    """Correlate a channel sequence against the steering table.

    Work is split over fixed-size cell chunks with a sequential per-cell
    reduction, so the output is bit-identical for any thread count.
    """
    if threads < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {threads}")
    h = channel.channels
    if h.size != table.sample_count:
        raise InvalidArgumentError(
            f"channel has {h.size} entries but table expects {table.sample_count}"
        )
    if h.size < 2:
        raise InvalidArgumentError("need at least 2 packets to form a profile")

    started = time.perf_counter()
    flat = np.empty(table.grid.size, dtype=float)

    def run(start: int) -> None:
        block = np.einsum("cm,m->c", table.steering[start : start + CELL_CHUNK], h)
        flat[start : start + CELL_CHUNK] = block.real**2 + block.imag**2

    starts = range(0, table.grid.size, CELL_CHUNK)
    if threads == 1:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))

    return AoaProfile(
        magnitudes=flat.reshape(table.grid.shape),
        grid=table.grid,
        n_packets_used=int(h.size),
        compute_time=time.perf_counter() - started,
    )


def _angular_offsets(profile: AoaProfile) -> tuple[np.ndarray, np.ndarray]:
    """Wrapped azimuth and plain elevation offsets of every cell from the max."""
    grid = profile.grid
    e_max, a_max = profile.argmax_cell
    d_az = grid.azimuth_centers - grid.azimuth_centers[a_max]
    d_az = (d_az + math.pi) % (2.0 * math.pi) - math.pi
    d_el = grid.elevation_centers - grid.elevation_centers[e_max]
    return d_az, d_el


def profile_variance(profile: AoaProfile, literal: bool = False) -> float:
    """Spread of profile mass around the maximum, normalized so a uniform
    profile scores exactly 1.

    sigma = sum_c(psi_c * f_c) / ((F / A) * sum_c(psi_c)) with
    psi_c = wrap(az_c - az_max)^2 + (el_c - el_max)^2, F the total mass and
    A the cell count. Values near 0 mean a single dominant path, near 1 a
    noise-like profile, above 1 strong multipath.

    literal=True keeps an alternative normalization dividing by
    sum_c(psi_c * F) / A, under which a uniform profile scores 1/F; it is
    retained for comparison only.
    """
    f = profile.magnitudes
    total = float(f.sum())
    if total <= 0.0:
        raise DegenerateProfileError("profile has no mass")

    d_az, d_el = _angular_offsets(profile)
    psi = (d_el**2)[:, None] + (d_az**2)[None, :]
    psi_sum = float(psi.sum())
    if psi_sum == 0.0:
        raise DegenerateProfileError("grid has no angular spread around the maximum")

    weighted = float((psi * f).sum())
    cells = f.size
    if literal:
        return (weighted / total) / (psi_sum * total / cells)
    return weighted / ((total / cells) * psi_sum)


def _neighbor_max(mags: np.ndarray) -> np.ndarray:
    """Largest of each cell's 8 neighbors; azimuth wraps, elevation clamps."""
    n_el, _ = mags.shape
    padded = np.full((n_el + 2, mags.shape[1]), -np.inf)
    padded[1:-1] = mags
    best = np.full_like(mags, -np.inf)
    for d_el in (-1, 0, 1):
        rows = padded[1 + d_el : 1 + d_el + n_el]
        for d_az in (-1, 0, 1):
            if d_el == 0 and d_az == 0:
                continue
            np.maximum(best, np.roll(rows, -d_az, axis=1), out=best)
    return best


def find_peaks(
    profile: AoaProfile, n: int, k_percent: float, alpha_deg: float
) -> list[Peak]:
    """Top-N strict local maxima, mutually separated and above K% of the max.

    Candidates are cells strictly greater than all 8 neighbors (wrapping in
    azimuth, clamped at the elevation edges). They are taken greedily by
    descending magnitude; a candidate within alpha degrees of an already
    selected peak in BOTH azimuth (wrapped) and elevation is skipped, as is
    anything below k_percent of the global maximum. May return fewer than n.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    mags = profile.magnitudes
    grid = profile.grid

    floor = (k_percent / 100.0) * float(mags.max())
    candidate_mask = (mags > _neighbor_max(mags)) & (mags >= floor)
    flat_idx = np.flatnonzero(candidate_mask.reshape(-1))
    if flat_idx.size == 0:
        return []
    order = np.argsort(-mags.reshape(-1)[flat_idx], kind="stable")
    flat_idx = flat_idx[order]

    alpha = math.radians(alpha_deg)
    selected: list[tuple[float, float]] = []
    peaks: list[Peak] = []
    for idx in flat_idx:
        d = grid.direction_at(int(idx))
        too_close = any(
            abs((d.azimuth_rad - az + math.pi) % (2.0 * math.pi) - math.pi) < alpha
            and abs(d.elevation_rad - el) < alpha
            for az, el in selected
        )
        if too_close:
            continue
        selected.append((d.azimuth_rad, d.elevation_rad))
        peaks.append(Peak(d, float(mags.reshape(-1)[idx]), rank=len(peaks) + 1))
        if len(peaks) == n:
            break
    return peaks


def summarize_profile(profile: AoaProfile, opts: EstimateOptions | None = None) -> BearingEstimate:
    """Bearing, multipath peaks, and acceptance verdict for a profile."""
    opts = opts or EstimateOptions()
    flat = profile.magnitudes.reshape(-1)
    max_idx = int(np.argmax(flat))
    aoa_max = Peak(profile.grid.direction_at(max_idx), float(flat[max_idx]), rank=1)
    top = find_peaks(profile, opts.n, opts.k_percent, opts.alpha_deg)
    variance = profile_variance(profile)
    return BearingEstimate(
        aoa_max=aoa_max,
        top_n=tuple(top),
        variance=variance,
        accepted=variance <= opts.tau,
    )


def estimate_bearing(
    channel: PairedChannel,
    table: SteeringTable,
    opts: EstimateOptions | None = None,
    threads: int = 1,
) -> BearingEstimate:
    """compute_profile followed by summarize_profile."""
    return summarize_profile(compute_profile(channel, table, threads=threads), opts)
