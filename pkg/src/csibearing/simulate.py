"""Synthetic multipath channel generator, the ground-truth oracle for tests.

Each propagation path is an image (virtual) source at a known position; the
one-way channel at receiver position p is

    h(p) = sum_k (gain_k / r_k) * exp(-1j * (2 pi / wavelength) * r_k) + noise

with r_k the distance from virtual source k to p. The direct path has an
implicit gain of 1, so noise_std is expressed relative to the direct-path
amplitude at 1 m. Forward and reverse packets of a round share the same
geometric phase; with CFO enabled the pair picks up opposite-sign phase
offsets drawn uniform(-pi, pi), the worst case the pairing correction must
survive. Generation is fully determined by the scene's rng_seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularGeometryError
from .pairing import ExchangeLog, round_robin_schedule
from .types import (
    AgentId,
    CsiPacket,
    DEFAULT_WAVELENGTH_M,
    Direction,
    Trajectory,
    wrap_azimuth,
)

_MIN_RANGE_M = 1e-9


@dataclass(frozen=True)
class Reflector:
    """One multipath component, modeled as an image source."""

    position: np.ndarray
    gain: float

    def __post_init__(self) -> None:
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise InvalidArgumentError(f"reflector position must be a finite 3-vector, got {pos}")
        if not 0.0 <= self.gain <= 1.0:
            raise InvalidArgumentError(f"reflector gain must be in [0, 1], got {self.gain}")
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class Scene:
    """Transmitter, reflectors, and impairments for one simulated exchange."""

    tx_position: np.ndarray
    reflectors: tuple[Reflector, ...] = ()
    noise_std: float = 0.0
    cfo_enabled: bool = False
    loss_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        pos = np.asarray(self.tx_position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise InvalidArgumentError(f"tx_position must be a finite 3-vector, got {pos}")
        if self.noise_std < 0.0:
            raise InvalidArgumentError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise InvalidArgumentError(f"loss_rate must be in [0, 1], got {self.loss_rate}")
        pos.setflags(write=False)
        object.__setattr__(self, "tx_position", pos)
        object.__setattr__(self, "reflectors", tuple(self.reflectors))


def arc_trajectory(
    duration_s: float = 4.0,
    linear_speed: float = 0.2,
    angular_speed: float = 0.4,
    sample_rate_hz: float = 100.0,
) -> Trajectory:
    """Planar constant-twist arc starting at the origin heading +x.

    The defaults reproduce the data-collection motion used for the released
    measurements (0.2 m/s linear, 0.4 rad/s angular).
    """
    if duration_s <= 0 or sample_rate_hz <= 0:
        raise InvalidArgumentError("duration and sample rate must be positive")
    n = int(math.floor(duration_s * sample_rate_hz + 1e-9)) + 1
    t = np.arange(n) / sample_rate_hz
    if angular_speed == 0.0:
        pos = np.stack([linear_speed * t, np.zeros(n), np.zeros(n)], axis=1)
    else:
        radius = linear_speed / angular_speed
        pos = np.stack(
            [radius * np.sin(angular_speed * t), radius * (1.0 - np.cos(angular_speed * t)), np.zeros(n)],
            axis=1,
        )
    return Trajectory(t, pos)


def _path_sources(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    sources = [scene.tx_position] + [r.position for r in scene.reflectors]
    gains = [1.0] + [r.gain for r in scene.reflectors]
    return np.array(sources), np.array(gains)


def _geometric_channel(
    scene: Scene, positions: np.ndarray, wavelength_m: float
) -> np.ndarray:
    sources, gains = _path_sources(scene)
    k = 2.0 * math.pi / wavelength_m
    total = np.zeros(positions.shape[0], dtype=complex)
    for src, gain in zip(sources, gains):
        dist = np.linalg.norm(positions - src, axis=1)
        if np.any(dist < _MIN_RANGE_M):
            raise SingularGeometryError(
                f"path source at {src} coincides with a receiver position"
            )
        total += (gain / dist) * np.exp(-1j * k * dist)
    return total


def simulate_channel(
    scene: Scene,
    traj: Trajectory,
    packet_rate_hz: float,
    wavelength_m: float = DEFAULT_WAVELENGTH_M,
    receiver: AgentId = 0,
    transmitter: AgentId = 1,
) -> ExchangeLog:
    """Generate the exchange log of one round-robin measurement run.

    Packet m of each direction is stamped at m / packet_rate_hz with the
    receiver at the trajectory position interpolated for that time via the
    same rule the alignment stage uses, so a lossless pipeline reproduces
    positions exactly.
    """
    if packet_rate_hz <= 0:
        raise InvalidArgumentError(f"packet_rate_hz must be positive, got {packet_rate_hz}")
    if traj.duration <= 0:
        raise InvalidArgumentError("trajectory span must be positive")

    n = int(math.floor(traj.duration * packet_rate_hz + 1e-9))
    if n < 1:
        raise InvalidArgumentError("trajectory too short for even one packet interval")
    schedule = round_robin_schedule(receiver, [transmitter], n)
    rounds = [tuple(schedule[2 * m : 2 * m + 2]) for m in range(n)]

    t0 = traj.span[0]
    times = t0 + np.arange(n) / packet_rate_hz
    positions = traj.interpolate(times)
    geo = _geometric_channel(scene, positions, wavelength_m)

    rng = np.random.default_rng(scene.rng_seed)
    noise_fwd = rng.standard_normal((n, 2)) @ np.array([1.0, 1.0j]) / math.sqrt(2.0)
    noise_rev = rng.standard_normal((n, 2)) @ np.array([1.0, 1.0j]) / math.sqrt(2.0)
    cfo = rng.uniform(-math.pi, math.pi, n)
    keep_fwd = rng.random(n) >= scene.loss_rate
    keep_rev = rng.random(n) >= scene.loss_rate

    h_fwd = geo.copy()
    h_rev = geo.copy()
    if scene.cfo_enabled:
        rot = np.exp(1j * cfo)
        h_fwd *= rot
        h_rev *= np.conj(rot)
    if scene.noise_std > 0.0:
        h_fwd += scene.noise_std * noise_fwd
        h_rev += scene.noise_std * noise_rev

    forward: list[CsiPacket] = []
    reverse: list[CsiPacket] = []
    for m, (broadcaster, responder) in enumerate(rounds):
        # broadcaster's packet is measured at the remote agent (reverse
        # stream); the responder's reply is measured at the receiver
        if keep_rev[m]:
            reverse.append(
                CsiPacket(broadcaster, responder, m, float(times[m]), complex(h_rev[m]))
            )
        if keep_fwd[m]:
            forward.append(
                CsiPacket(responder, broadcaster, m, float(times[m]), complex(h_fwd[m]))
            )
    return ExchangeLog(tuple(forward), tuple(reverse))


def ground_truth_bearing(scene: Scene, traj: Trajectory | None = None) -> Direction:
    """True direction of the transmitter from the trajectory origin.

    The trajectory argument exists for signature symmetry with the
    simulator; displacements are measured from the window start, so the
    origin is always the zero vector.
    """
    del traj
    x, y, z = (float(v) for v in scene.tx_position)
    r = math.sqrt(x * x + y * y + z * z)
    if r < _MIN_RANGE_M:
        raise SingularGeometryError("transmitter sits at the trajectory origin")
    return Direction(wrap_azimuth(math.atan2(y, x)), math.acos(max(-1.0, min(1.0, z / r))))
