"""Serialization: measurement records, scenes, bearing files, profile exports.

Canonical record schema (JSON, schema_version 1):

    {
      "schema_version": 1,
      "meta": {
        "environment": "LOS" | "NLOS",
        "wavelength_m": 0.06,
        "tx_positions": {"<agent id>": [x, y, z], ...},
        "rx_grid_label": "optional free-form label"
      },
      "csi_packets": {
        "forward": [{"counter": 0, "t": 0.0, "re": ..., "im": ...,
                     "sender": 1, "receiver": 0}, ...],
        "reverse": [ ... same row shape ... ]
      },
      "trajectories": {
        "groundtruth":      [{"t": 0.0, "x": 0.0, "y": 0.0, "z": 0.0}, ...],
        "tracking_camera":  [...],   # optional
        "wheel_odometry":   [...]    # optional
      }
    }

Units are meters/seconds; angles cross the I/O boundary in degrees and are
radians internally. Trajectories are re-framed at ingestion so the first
sample is the zero displacement. Unknown top-level fields are preserved on
a round trip but otherwise ignored.

Externally recorded datasets with different field names plug in through
`register_adapter`: an adapter receives the raw parsed payload and returns
a canonical one. None are bundled; mapping a given release's field names is
an integration task for the dataset's owner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import RecordParseError, RecordValidationError
from .pairing import ExchangeLog
from .profile import AoaProfile, BearingEstimate
from .simulate import Reflector, Scene
from .steering import DirectionGrid, build_grid
from .localize import BearingObservation
from .types import CsiPacket, DEFAULT_WAVELENGTH_M, GridConfig, PhaseFactor, Trajectory

SCHEMA_VERSION = 1

TRAJECTORY_KEYS = ("groundtruth", "tracking_camera", "wheel_odometry")
ENVIRONMENTS = ("LOS", "NLOS")

Adapter = Callable[[dict], dict]
_ADAPTERS: dict[str, Adapter] = {}


def register_adapter(name: str, adapter: Adapter) -> None:
    """Register a payload converter for an external dataset layout."""
    _ADAPTERS[name] = adapter


@dataclass(frozen=True)
class RecordMeta:
    environment: str = "LOS"
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    tx_positions: dict[int, tuple[float, float, float]] = field(default_factory=dict)
    rx_grid_label: str | None = None


@dataclass(frozen=True)
class DatasetRecord:
    log: ExchangeLog
    trajectories: dict[str, Trajectory]
    meta: RecordMeta = field(default_factory=RecordMeta)
    extras: dict = field(default_factory=dict)


def _require(payload: Mapping, key: str, where: str) -> object:
    if key not in payload:
        raise RecordParseError(f"{where}.{key}: missing required field")
    return payload[key]


def _number(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RecordParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise RecordParseError(f"{where}: must be finite, got {value!r}")
    return float(value)


def _integer(value: object, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RecordParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _packet_from_row(row: Mapping, where: str) -> CsiPacket:
    if not isinstance(row, Mapping):
        raise RecordParseError(f"{where}: expected an object, got {row!r}")
    try:
        return CsiPacket(
            sender=_integer(_require(row, "sender", where), f"{where}.sender"),
            receiver=_integer(_require(row, "receiver", where), f"{where}.receiver"),
            counter=_integer(_require(row, "counter", where), f"{where}.counter"),
            timestamp=_number(_require(row, "t", where), f"{where}.t"),
            channel=complex(
                _number(_require(row, "re", where), f"{where}.re"),
                _number(_require(row, "im", where), f"{where}.im"),
            ),
        )
    except RecordParseError:
        raise
    except ValueError as exc:
        raise RecordValidationError(f"{where}: {exc}") from exc


def _stream_from_rows(rows: object, where: str) -> tuple[CsiPacket, ...]:
    if not isinstance(rows, Sequence) or isinstance(rows, (str, bytes)):
        raise RecordParseError(f"{where}: expected an array of packet rows")
    packets = tuple(_packet_from_row(row, f"{where}[{i}]") for i, row in enumerate(rows))
    counters = [p.counter for p in packets]
    if any(b <= a for a, b in zip(counters, counters[1:])):
        raise RecordValidationError(f"{where}: packet counters must be strictly increasing")
    return packets


def trajectory_from_rows(rows: object, where: str = "trajectory") -> Trajectory:
    if not isinstance(rows, Sequence) or isinstance(rows, (str, bytes)):
        raise RecordParseError(f"{where}: expected an array of samples")
    if len(rows) == 0:
        raise RecordValidationError(f"{where}: trajectory has no samples")
    ts, pos = [], []
    for i, row in enumerate(rows):
        if not isinstance(row, Mapping):
            raise RecordParseError(f"{where}[{i}]: expected an object")
        ts.append(_number(_require(row, "t", f"{where}[{i}]"), f"{where}[{i}].t"))
        pos.append(
            [
                _number(_require(row, axis, f"{where}[{i}]"), f"{where}[{i}].{axis}")
                for axis in ("x", "y", "z")
            ]
        )
    try:
        return Trajectory.from_global(ts, pos)
    except ValueError as exc:
        raise RecordValidationError(f"{where}: {exc}") from exc


def trajectory_to_rows(traj: Trajectory) -> list[dict]:
    return [
        {"t": float(t), "x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
        for t, p in zip(traj.timestamps, traj.positions)
    ]


def _meta_from_mapping(payload: Mapping) -> RecordMeta:
    environment = payload.get("environment", "LOS")
    if environment not in ENVIRONMENTS:
        raise RecordValidationError(
            f"meta.environment: must be one of {ENVIRONMENTS}, got {environment!r}"
        )
    wavelength = _number(payload.get("wavelength_m", DEFAULT_WAVELENGTH_M), "meta.wavelength_m")
    if wavelength <= 0:
        raise RecordValidationError(f"meta.wavelength_m: must be positive, got {wavelength}")
    tx_positions: dict[int, tuple[float, float, float]] = {}
    for key, value in payload.get("tx_positions", {}).items():
        where = f"meta.tx_positions[{key!r}]"
        try:
            agent = int(key)
        except ValueError as exc:
            raise RecordParseError(f"{where}: agent id must be an integer") from exc
        if not isinstance(value, Sequence) or len(value) != 3:
            raise RecordParseError(f"{where}: expected [x, y, z]")
        tx_positions[agent] = tuple(_number(v, where) for v in value)
    label = payload.get("rx_grid_label")
    if label is not None and not isinstance(label, str):
        raise RecordParseError(f"meta.rx_grid_label: expected a string, got {label!r}")
    return RecordMeta(environment, wavelength, tx_positions, label)


def record_from_mapping(payload: Mapping) -> DatasetRecord:
    """Validate a canonical record mapping into a DatasetRecord."""
    if not isinstance(payload, Mapping):
        raise RecordParseError(f"record: expected an object, got {type(payload).__name__}")
    version = payload.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise RecordParseError(f"schema_version: unsupported version {version!r}")

    packets = _require(payload, "csi_packets", "record")
    if not isinstance(packets, Mapping):
        raise RecordParseError("csi_packets: expected an object with forward/reverse arrays")
    if "forward" not in packets:
        raise RecordValidationError("csi_packets: forward stream absent")
    if "reverse" not in packets:
        raise RecordValidationError("csi_packets: reverse stream absent")
    log = ExchangeLog(
        _stream_from_rows(packets["forward"], "csi_packets.forward"),
        _stream_from_rows(packets["reverse"], "csi_packets.reverse"),
    )

    raw_trajectories = _require(payload, "trajectories", "record")
    if not isinstance(raw_trajectories, Mapping):
        raise RecordParseError("trajectories: expected an object of named trajectories")
    trajectories = {
        str(name): trajectory_from_rows(rows, f"trajectories.{name}")
        for name, rows in raw_trajectories.items()
    }
    if not any(name in trajectories for name in TRAJECTORY_KEYS):
        raise RecordValidationError(
            f"trajectories: need at least one of {TRAJECTORY_KEYS}"
        )

    meta_payload = payload.get("meta", {})
    if not isinstance(meta_payload, Mapping):
        raise RecordParseError("meta: expected an object")
    meta = _meta_from_mapping(meta_payload)

    known = {"schema_version", "meta", "csi_packets", "trajectories"}
    extras = {k: v for k, v in payload.items() if k not in known}
    return DatasetRecord(log, trajectories, meta, extras)


def _packet_to_row(p: CsiPacket) -> dict:
    return {
        "counter": p.counter,
        "t": p.timestamp,
        "re": p.channel.real,
        "im": p.channel.imag,
        "sender": p.sender,
        "receiver": p.receiver,
    }


def record_to_mapping(record: DatasetRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": {
            "environment": record.meta.environment,
            "wavelength_m": record.meta.wavelength_m,
            "tx_positions": {str(k): list(v) for k, v in record.meta.tx_positions.items()},
            "rx_grid_label": record.meta.rx_grid_label,
        },
        "csi_packets": {
            "forward": [_packet_to_row(p) for p in record.log.forward],
            "reverse": [_packet_to_row(p) for p in record.log.reverse],
        },
        "trajectories": {
            name: trajectory_to_rows(traj) for name, traj in record.trajectories.items()
        },
        **record.extras,
    }


def _read_json(path: Path, what: str) -> object:
    try:
        text = path.read_text()
    except OSError as exc:
        raise RecordParseError(f"{path}: cannot read {what}: {exc}") from exc
    if not text.strip():
        raise RecordParseError(f"{path}: empty {what} file")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def load_record(path, adapter: str | None = None) -> DatasetRecord:
    """Load and validate a canonical record file.

    `adapter` selects a registered payload converter for external layouts.
    """
    path = Path(path)
    payload = _read_json(path, "record")
    if adapter is not None:
        if adapter not in _ADAPTERS:
            raise RecordParseError(f"{path}: no adapter registered under {adapter!r}")
        payload = _ADAPTERS[adapter](payload)
    try:
        return record_from_mapping(payload)
    except (RecordParseError, RecordValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_record(record: DatasetRecord, path) -> None:
    Path(path).write_text(json.dumps(record_to_mapping(record)) + "\n")


def scene_from_mapping(payload: Mapping) -> Scene:
    if not isinstance(payload, Mapping):
        raise RecordParseError(f"scene: expected an object, got {type(payload).__name__}")
    tx = _require(payload, "tx_position", "scene")
    if not isinstance(tx, Sequence) or len(tx) != 3:
        raise RecordParseError("scene.tx_position: expected [x, y, z]")
    reflectors = []
    for i, row in enumerate(payload.get("reflectors", [])):
        where = f"scene.reflectors[{i}]"
        if not isinstance(row, Mapping):
            raise RecordParseError(f"{where}: expected an object")
        pos = _require(row, "position", where)
        if not isinstance(pos, Sequence) or len(pos) != 3:
            raise RecordParseError(f"{where}.position: expected [x, y, z]")
        reflectors.append(
            Reflector(
                np.array([_number(v, f"{where}.position") for v in pos]),
                _number(_require(row, "gain", where), f"{where}.gain"),
            )
        )
    try:
        return Scene(
            tx_position=np.array([_number(v, "scene.tx_position") for v in tx]),
            reflectors=tuple(reflectors),
            noise_std=_number(payload.get("noise_std", 0.0), "scene.noise_std"),
            cfo_enabled=bool(payload.get("cfo_enabled", False)),
            loss_rate=_number(payload.get("loss_rate", 0.0), "scene.loss_rate"),
            rng_seed=_integer(payload.get("rng_seed", 0), "scene.rng_seed"),
        )
    except ValueError as exc:
        raise RecordValidationError(f"scene: {exc}") from exc


def scene_to_mapping(scene: Scene) -> dict:
    return {
        "tx_position": [float(v) for v in scene.tx_position],
        "reflectors": [
            {"position": [float(v) for v in r.position], "gain": r.gain}
            for r in scene.reflectors
        ],
        "noise_std": scene.noise_std,
        "cfo_enabled": scene.cfo_enabled,
        "loss_rate": scene.loss_rate,
        "rng_seed": scene.rng_seed,
    }


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        return scene_from_mapping(_read_json(path, "scene"))
    except (RecordParseError, RecordValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_mapping(scene)) + "\n")


def load_trajectory(path) -> Trajectory:
    """Load a standalone trajectory file: {"samples": [{t, x, y, z}, ...]}."""
    path = Path(path)
    payload = _read_json(path, "trajectory")
    if isinstance(payload, Mapping):
        payload = _require(payload, "samples", "trajectory")
    try:
        return trajectory_from_rows(payload, "trajectory.samples")
    except (RecordParseError, RecordValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(json.dumps({"samples": trajectory_to_rows(traj)}) + "\n")


def observations_from_mapping(payload: object) -> list[BearingObservation]:
    """Parse a bearing observation list; bearings are degrees on disk."""
    if isinstance(payload, Mapping):
        payload = _require(payload, "observations", "bearings")
    if not isinstance(payload, Sequence) or isinstance(payload, (str, bytes)):
        raise RecordParseError("bearings: expected an array of observations")
    observations = []
    for i, row in enumerate(payload):
        where = f"bearings[{i}]"
        if not isinstance(row, Mapping):
            raise RecordParseError(f"{where}: expected an object")
        anchor = _require(row, "anchor", where)
        if not isinstance(anchor, Sequence) or len(anchor) != 2:
            raise RecordParseError(f"{where}.anchor: expected [x, y]")
        observations.append(
            BearingObservation(
                np.array([_number(v, f"{where}.anchor") for v in anchor]),
                math.radians(_number(_require(row, "bearing_deg", where), f"{where}.bearing_deg")),
                _number(row.get("variance", 0.0), f"{where}.variance"),
            )
        )
    return observations


def load_observations(path) -> list[BearingObservation]:
    path = Path(path)
    try:
        return observations_from_mapping(_read_json(path, "bearings"))
    except (RecordParseError, RecordValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _grid_to_mapping(grid: DirectionGrid) -> dict:
    cfg = grid.config
    return {
        "azimuth_bins": cfg.azimuth_bins,
        "elevation_bins": cfg.elevation_bins,
        "wavelength_m": cfg.wavelength_m,
        "phase_factor": PhaseFactor.name(cfg.phase_factor),
    }


def _grid_from_mapping(payload: Mapping) -> DirectionGrid:
    return build_grid(
        GridConfig(
            azimuth_bins=_integer(_require(payload, "azimuth_bins", "grid"), "grid.azimuth_bins"),
            elevation_bins=_integer(
                _require(payload, "elevation_bins", "grid"), "grid.elevation_bins"
            ),
            wavelength_m=_number(_require(payload, "wavelength_m", "grid"), "grid.wavelength_m"),
            phase_factor=PhaseFactor.from_name(str(_require(payload, "phase_factor", "grid"))),
        )
    )


def _peak_to_mapping(peak) -> dict:
    return {
        "rank": peak.rank,
        "azimuth_deg": peak.direction.azimuth_deg,
        "elevation_deg": peak.direction.elevation_deg,
        "magnitude": peak.magnitude,
    }


def estimate_to_mapping(est: BearingEstimate) -> dict:
    return {
        "aoa_max": _peak_to_mapping(est.aoa_max),
        "top_n": [_peak_to_mapping(p) for p in est.top_n],
        "variance": est.variance,
        "accepted": est.accepted,
    }


def metrics_path_for(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def export_profile(profile: AoaProfile, est: BearingEstimate, path) -> None:
    """Write a profile as CSV magnitudes plus a JSON metrics document.

    The CSV carries one header row naming the azimuth bin centers in
    degrees, then one row per elevation bin; the metrics document (same stem,
    .json) carries the bearing summary and the grid so the profile can be
    reloaded losslessly.
    """
    csv_path = Path(path)
    grid = profile.grid
    header = ",".join(f"{math.degrees(a):.6g}" for a in grid.azimuth_centers)
    rows = [header]
    rows += [",".join(f"{v:.17g}" for v in row) for row in profile.magnitudes]
    try:
        csv_path.write_text("\n".join(rows) + "\n")
        metrics = {
            "schema_version": SCHEMA_VERSION,
            **estimate_to_mapping(est),
            "n_packets_used": profile.n_packets_used,
            "compute_time_s": profile.compute_time,
            "elevation_centers_deg": [math.degrees(e) for e in grid.elevation_centers],
            "grid": _grid_to_mapping(grid),
        }
        metrics_path_for(csv_path).write_text(json.dumps(metrics, indent=1) + "\n")
    except OSError as exc:
        raise RecordParseError(f"{csv_path}: cannot write profile: {exc}") from exc


def load_profile(path) -> tuple[AoaProfile, dict]:
    """Reload an exported profile; returns the profile and its metrics."""
    csv_path = Path(path)
    metrics = _read_json(metrics_path_for(csv_path), "profile metrics")
    if not isinstance(metrics, Mapping):
        raise RecordParseError(f"{csv_path}: metrics document must be an object")
    grid = _grid_from_mapping(_require(metrics, "grid", "metrics"))
    try:
        lines = csv_path.read_text().strip().splitlines()
    except OSError as exc:
        raise RecordParseError(f"{csv_path}: cannot read profile: {exc}") from exc
    if len(lines) != grid.config.elevation_bins + 1:
        raise RecordParseError(
            f"{csv_path}: expected {grid.config.elevation_bins} data rows, "
            f"got {len(lines) - 1}"
        )
    try:
        mags = np.array(
            [[float(v) for v in line.split(",")] for line in lines[1:]], dtype=float
        )
    except ValueError as exc:
        raise RecordParseError(f"{csv_path}: bad magnitude value: {exc}") from exc
    if mags.shape != grid.shape:
        raise RecordParseError(f"{csv_path}: magnitude shape {mags.shape} != grid {grid.shape}")
    profile = AoaProfile(
        magnitudes=mags,
        grid=grid,
        n_packets_used=int(metrics.get("n_packets_used", 0)),
        compute_time=float(metrics.get("compute_time_s", 0.0)),
    )
    return profile, dict(metrics)
