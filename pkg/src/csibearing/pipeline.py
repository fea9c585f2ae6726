"""Record-level convenience pipeline shared by the CLI and script bindings.

Keeping this in one place guarantees that every front end produces
numerically identical results for identical inputs.
"""

from __future__ import annotations

import time

from .dataset import DatasetRecord, RecordMeta
from .errors import InvalidArgumentError
from .pairing import pair_exchange
from .profile import AoaProfile, BearingEstimate, EstimateOptions, compute_profile, summarize_profile
from .simulate import Scene, simulate_channel
from .steering import build_grid, precompute_steering
from .types import GridConfig, PhaseFactor, Trajectory, check_aperture

TRAJECTORY_ALIASES = {
    "groundtruth": "groundtruth",
    "camera": "tracking_camera",
    "tracking_camera": "tracking_camera",
    "odometry": "wheel_odometry",
    "wheel_odometry": "wheel_odometry",
}


def parse_resolution(value) -> tuple[int, int]:
    """Accept (azimuth_bins, elevation_bins) or an 'AZxEL' string."""
    if isinstance(value, str):
        try:
            az, el = value.lower().split("x")
            return int(az), int(el)
        except ValueError:
            raise InvalidArgumentError(
                f"resolution must look like 360x180 (azimuth x elevation), got {value!r}"
            ) from None
    az, el = value
    return int(az), int(el)


def estimate_from_record(
    record: DatasetRecord,
    *,
    resolution="360x180",
    subsample: int = 1,
    threads: int = 1,
    skew: int = 0,
    trajectory: str = "groundtruth",
    options: EstimateOptions | None = None,
) -> tuple[AoaProfile, BearingEstimate, float]:
    """Record to (profile, bearing estimate, wall seconds of AOA computation).

    Pairs and CFO-cancels the record's packet streams, aligns them to the
    chosen trajectory, and evaluates the round-trip profile at the given
    resolution. The returned runtime covers steering precomputation, profile
    evaluation, and summary metrics.
    """
    key = TRAJECTORY_ALIASES.get(trajectory)
    if key is None:
        raise InvalidArgumentError(
            f"unknown trajectory {trajectory!r}; choose from {sorted(TRAJECTORY_ALIASES)}"
        )
    if key not in record.trajectories:
        raise InvalidArgumentError(
            f"record has no {key!r} trajectory; available: {sorted(record.trajectories)}"
        )
    traj = record.trajectories[key]
    check_aperture(traj, record.meta.wavelength_m)

    paired = pair_exchange(record.log, traj, skew).subsample(subsample)
    az_bins, el_bins = parse_resolution(resolution)
    config = GridConfig(az_bins, el_bins, record.meta.wavelength_m, PhaseFactor.ROUND_TRIP)

    started = time.perf_counter()
    table = precompute_steering(build_grid(config), paired.positions, threads=threads)
    profile = compute_profile(paired, table, threads=threads)
    estimate = summarize_profile(profile, options)
    return profile, estimate, time.perf_counter() - started


def simulate_record(
    scene: Scene,
    traj: Trajectory,
    packet_rate_hz: float = 200.0,
    wavelength_m: float = 0.06,
) -> DatasetRecord:
    """Simulate one exchange and package it as a canonical record."""
    log = simulate_channel(scene, traj, packet_rate_hz, wavelength_m=wavelength_m)
    return DatasetRecord(
        log=log,
        trajectories={"groundtruth": traj},
        meta=RecordMeta(
            environment="NLOS" if scene.reflectors else "LOS",
            wavelength_m=wavelength_m,
            tx_positions={1: tuple(float(v) for v in scene.tx_position)},
        ),
    )
