"""Shared domain types and angle conventions.

Conventions used everywhere in this package:

- azimuth: radians in [-pi, pi), measured counter-clockwise from the +x axis
- elevation: polar angle in [0, pi], measured from the +z axis, so the
  x-y plane sits at elevation pi/2
- positions/displacements: meters, expressed in the receiving agent's body
  frame at the start of the measurement window; the first trajectory sample
  is therefore the origin
- timestamps: seconds

A receiver that traverses a path while collecting packets acts as a virtual
antenna array whose element positions are the trajectory displacements.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

AgentId = int

# 5 GHz WiFi: the carrier phase wraps every ~6 cm of displacement.
DEFAULT_WAVELENGTH_M = 0.06


def wrap_azimuth(angle: float) -> float:
    """Wrap an angle to the canonical azimuth range [-pi, pi)."""
    if not math.isfinite(angle):
        raise InvalidArgumentError(f"azimuth must be finite, got {angle!r}")
    wrapped = (angle + math.pi) % (2.0 * math.pi) - math.pi
    # fmod can land exactly on +pi for inputs a hair below the seam
    return -math.pi if wrapped >= math.pi else wrapped


@dataclass(frozen=True)
class Direction:
    """A candidate arrival direction (azimuth, elevation polar angle)."""

    azimuth_rad: float
    elevation_rad: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth_rad", wrap_azimuth(self.azimuth_rad))
        if not math.isfinite(self.elevation_rad) or not 0.0 <= self.elevation_rad <= math.pi:
            raise InvalidArgumentError(
                f"elevation must lie in [0, pi], got {self.elevation_rad!r}"
            )

    @property
    def azimuth_deg(self) -> float:
        return math.degrees(self.azimuth_rad)

    @property
    def elevation_deg(self) -> float:
        return math.degrees(self.elevation_rad)


def direction_unit_vector(d: Direction) -> np.ndarray:
    """Unit vector (cos az * sin el, sin az * sin el, cos el) for a direction."""
    sin_el = math.sin(d.elevation_rad)
    return np.array(
        [
            math.cos(d.azimuth_rad) * sin_el,
            math.sin(d.azimuth_rad) * sin_el,
            math.cos(d.elevation_rad),
        ]
    )


class PhaseFactor:
    """Displacement-phase multiplier kappa.

    SINGLE_TRIP suits raw one-way channels; ROUND_TRIP suits the product of a
    forward/reverse packet pair, whose geometric phase is doubled.
    """

    SINGLE_TRIP = 1
    ROUND_TRIP = 2

    _NAMES = {SINGLE_TRIP: "single-trip", ROUND_TRIP: "round-trip"}

    @classmethod
    def validate(cls, value: int) -> int:
        if value not in cls._NAMES:
            raise InvalidArgumentError(f"phase_factor must be 1 or 2, got {value!r}")
        return int(value)

    @classmethod
    def name(cls, value: int) -> str:
        return cls._NAMES[cls.validate(value)]

    @classmethod
    def from_name(cls, name: str) -> int:
        for value, label in cls._NAMES.items():
            if label == name:
                return value
        raise InvalidArgumentError(f"unknown phase factor {name!r}")


@dataclass(frozen=True)
class GridConfig:
    """Resolution and wave parameters of the direction search grid."""

    azimuth_bins: int = 360
    elevation_bins: int = 180
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    phase_factor: int = PhaseFactor.SINGLE_TRIP

    def __post_init__(self) -> None:
        if self.azimuth_bins < 4:
            raise InvalidArgumentError(f"azimuth_bins must be >= 4, got {self.azimuth_bins}")
        if self.elevation_bins < 2:
            raise InvalidArgumentError(f"elevation_bins must be >= 2, got {self.elevation_bins}")
        if not self.wavelength_m > 0:
            raise InvalidArgumentError(f"wavelength_m must be > 0, got {self.wavelength_m}")
        PhaseFactor.validate(self.phase_factor)

    @property
    def cell_count(self) -> int:
        return self.azimuth_bins * self.elevation_bins


@dataclass(frozen=True)
class CsiPacket:
    """One channel observation: who sent it, who measured it, and the value."""

    sender: AgentId
    receiver: AgentId
    counter: int
    timestamp: float
    channel: complex

    def __post_init__(self) -> None:
        if self.sender < 0 or self.receiver < 0:
            raise InvalidArgumentError("agent ids must be non-negative")
        if self.sender == self.receiver:
            raise InvalidArgumentError("sender and receiver must differ")
        if self.counter < 0:
            raise InvalidArgumentError(f"counter must be non-negative, got {self.counter}")
        if not math.isfinite(self.timestamp):
            raise InvalidArgumentError("timestamp must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Timestamped displacements of the receiving agent.

    `positions[k]` is the displacement (meters) at `timestamps[k]` relative
    to the pose at the first sample, so `positions[0]` is exactly zero.
    """

    timestamps: np.ndarray
    positions: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if ts.ndim != 1 or ts.size == 0:
            raise InvalidArgumentError("trajectory needs at least one timestamped sample")
        if pos.shape != (ts.size, 3):
            raise InvalidArgumentError(
                f"positions must have shape ({ts.size}, 3), got {pos.shape}"
            )
        if not np.all(np.isfinite(ts)) or not np.all(np.isfinite(pos)):
            raise InvalidArgumentError("trajectory samples must be finite")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise InvalidArgumentError("trajectory timestamps must be strictly increasing")
        if np.any(pos[0] != 0.0):
            raise InvalidArgumentError(
                "first trajectory sample must be the zero displacement; "
                "re-frame with Trajectory.from_global"
            )
        ts.setflags(write=False)
        pos.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_global(cls, timestamps, positions) -> "Trajectory":
        """Build a trajectory from globally-framed positions.

        Subtracts the first sample so displacements are measured from the
        pose at the start of the window.
        """
        pos = np.asarray(positions, dtype=float)
        if pos.ndim != 2 or pos.shape[0] == 0 or pos.shape[1] != 3:
            raise InvalidArgumentError(f"positions must have shape (n, 3), got {pos.shape}")
        return cls(np.asarray(timestamps, dtype=float), pos - pos[0])

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.timestamps[0]), float(self.timestamps[-1])

    @property
    def duration(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])

    def path_length(self) -> float:
        """Total distance traveled along the sampled path."""
        if len(self) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.positions, axis=0), axis=1).sum())

    def interpolate(self, times) -> np.ndarray:
        """Positions at the given times, linear between bracketing samples.

        Times outside the trajectory span clamp to the end samples; callers
        that must drop out-of-span entries filter beforehand.
        """
        t = np.asarray(times, dtype=float)
        return np.stack(
            [np.interp(t, self.timestamps, self.positions[:, axis]) for axis in range(3)],
            axis=-1,
        )


def check_aperture(traj: Trajectory, wavelength_m: float) -> bool:
    """Warn when the path is shorter than the 2-wavelength guideline.

    Short apertures still compute, but the profile loses angular resolution;
    the condition is flagged, never enforced.
    """
    ok = traj.path_length() >= 2.0 * wavelength_m
    if not ok:
        warnings.warn(
            f"trajectory path length {traj.path_length():.4f} m is below twice the "
            f"wavelength ({2.0 * wavelength_m:.4f} m); expect a poorly resolved profile",
            stacklevel=2,
        )
    return ok
