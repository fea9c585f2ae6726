"""Mapping-based wrappers over the core operations."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

import csibearing as core
from csibearing.dataset import (
    observations_from_mapping,
    record_from_mapping,
    record_to_mapping,
    scene_from_mapping,
    trajectory_from_rows,
)
from csibearing.errors import RecordParseError
from csibearing.pipeline import estimate_from_record, simulate_record
from csibearing.profile import AoaProfile, EstimateOptions
from csibearing.steering import build_grid
from csibearing.types import GridConfig, PhaseFactor

_ESTIMATE_DEFAULTS = {
    "resolution": "360x180",
    "subsample": 1,
    "threads": 1,
    "skew": 0,
    "trajectory": "groundtruth",
    "n": 4,
    "k_percent": 40.0,
    "alpha_deg": 10.0,
    "tau": 0.9,
}


def _split_options(options: Mapping | None) -> tuple[dict, EstimateOptions]:
    merged = dict(_ESTIMATE_DEFAULTS)
    if options:
        unknown = set(options) - set(_ESTIMATE_DEFAULTS)
        if unknown:
            raise RecordParseError(f"options: unknown keys {sorted(unknown)}")
        merged.update(options)
    opts = EstimateOptions(
        n=int(merged["n"]),
        k_percent=float(merged["k_percent"]),
        alpha_deg=float(merged["alpha_deg"]),
        tau=float(merged["tau"]),
    )
    pipeline_kwargs = {
        "resolution": merged["resolution"],
        "subsample": int(merged["subsample"]),
        "threads": int(merged["threads"]),
        "skew": int(merged["skew"]),
        "trajectory": str(merged["trajectory"]),
    }
    return pipeline_kwargs, opts


def _peak_mapping(peak) -> dict:
    return {
        "rank": peak.rank,
        "azimuth_deg": peak.direction.azimuth_deg,
        "elevation_deg": peak.direction.elevation_deg,
        "magnitude": peak.magnitude,
    }


def _profile_mapping(profile: AoaProfile) -> dict:
    grid = profile.grid
    return {
        "shape": profile.magnitudes.shape,
        "magnitudes": profile.magnitudes.reshape(-1).copy(),
        "azimuth_centers_deg": np.degrees(grid.azimuth_centers),
        "elevation_centers_deg": np.degrees(grid.elevation_centers),
        "wavelength_m": grid.config.wavelength_m,
        "phase_factor": PhaseFactor.name(grid.config.phase_factor),
        "n_packets_used": profile.n_packets_used,
        "compute_time_s": profile.compute_time,
    }


def _profile_from_mapping(payload: Mapping) -> AoaProfile:
    for key in ("shape", "magnitudes"):
        if key not in payload:
            raise RecordParseError(f"profile.{key}: missing required field")
    el_bins, az_bins = (int(v) for v in payload["shape"])
    flat = np.asarray(payload["magnitudes"], dtype=float).reshape(-1)
    if flat.size != el_bins * az_bins:
        raise RecordParseError(
            f"profile.magnitudes: expected {el_bins * az_bins} values, got {flat.size}"
        )
    grid = build_grid(
        GridConfig(
            azimuth_bins=az_bins,
            elevation_bins=el_bins,
            wavelength_m=float(payload.get("wavelength_m", 0.06)),
            phase_factor=PhaseFactor.from_name(payload.get("phase_factor", "round-trip")),
        )
    )
    return AoaProfile(
        magnitudes=flat.reshape(el_bins, az_bins),
        grid=grid,
        n_packets_used=int(payload.get("n_packets_used", 0)),
        compute_time=float(payload.get("compute_time_s", 0.0)),
    )


def estimate_bearing(record: Mapping, options: Mapping | None = None) -> dict:
    """Bearing estimate for a canonical record mapping.

    Returns aoa_deg (azimuth/elevation of the strongest cell), the profile
    variance, the acceptance verdict at tau, the Top-N peaks, and the
    profile shape.
    """
    pipeline_kwargs, opts = _split_options(options)
    profile, estimate, runtime = estimate_from_record(
        record_from_mapping(record), options=opts, **pipeline_kwargs
    )
    return {
        "aoa_deg": {
            "azimuth": estimate.aoa_max.direction.azimuth_deg,
            "elevation": estimate.aoa_max.direction.elevation_deg,
        },
        "variance": estimate.variance,
        "accepted": estimate.accepted,
        "top_n": [_peak_mapping(p) for p in estimate.top_n],
        "profile_shape": profile.magnitudes.shape,
        "n_packets_used": profile.n_packets_used,
        "runtime_s": runtime,
    }


def compute_profile(record: Mapping, options: Mapping | None = None) -> dict:
    """Full profile for a record mapping: shape + flat buffer + bin centers."""
    pipeline_kwargs, opts = _split_options(options)
    profile, _, _ = estimate_from_record(
        record_from_mapping(record), options=opts, **pipeline_kwargs
    )
    return _profile_mapping(profile)


def profile_variance(profile: Mapping, literal: bool = False) -> float:
    """Variance metric of a profile mapping (see compute_profile)."""
    return core.profile_variance(_profile_from_mapping(profile), literal=literal)


def find_peaks(
    profile: Mapping,
    n: int = 4,
    k_percent: float = 40.0,
    alpha_deg: float = 10.0,
) -> list[dict]:
    """Top-N peaks of a profile mapping, as peak mappings."""
    peaks = core.find_peaks(_profile_from_mapping(profile), n, k_percent, alpha_deg)
    return [_peak_mapping(p) for p in peaks]


def localize(observations: Sequence[Mapping] | Mapping, tau: float = 0.9) -> dict:
    """Least-squares position from bearing observation mappings.

    Rows follow the bearing file schema: {"anchor": [x, y], "bearing_deg":
    ..., "variance": ...}.
    """
    result = core.localize(observations_from_mapping(observations), tau=tau)
    return {
        "position": [float(v) for v in result.position],
        "residual": result.residual,
        "used": result.used,
        "behind": list(result.behind),
    }


def simulate_channel(
    scene: Mapping,
    trajectory: Mapping | Sequence[Mapping],
    packet_rate_hz: float = 200.0,
    wavelength_m: float = 0.06,
    seed: int | None = None,
) -> dict:
    """Simulate an exchange; returns the canonical record mapping.

    The trajectory argument accepts either {"samples": [...]} or the bare
    sample rows. An explicit seed overrides the scene's rng_seed, mirroring
    the CLI flag.
    """
    parsed = scene_from_mapping(scene)
    if seed is not None:
        parsed = core.Scene(
            tx_position=parsed.tx_position,
            reflectors=parsed.reflectors,
            noise_std=parsed.noise_std,
            cfo_enabled=parsed.cfo_enabled,
            loss_rate=parsed.loss_rate,
            rng_seed=seed,
        )
    rows = trajectory.get("samples") if isinstance(trajectory, Mapping) else trajectory
    traj = trajectory_from_rows(rows, "trajectory.samples")
    record = simulate_record(parsed, traj, packet_rate_hz, wavelength_m=wavelength_m)
    return record_to_mapping(record)
