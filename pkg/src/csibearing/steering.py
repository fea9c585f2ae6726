"""Direction grid and steering-phase precomputation for the virtual array.

The receiver's displacements d_m act as virtual array elements. For a
candidate direction with unit vector u_c, the model phase accumulated at
element m is

    phase[c, m] = kappa * (2 * pi / wavelength) * (u_c . d_m)

with kappa = 1 for one-way channels and kappa = 2 for forward*reverse
products. Profile evaluation correlates the measured channel against
exp(-1j * phase), so the table stores those complex exponentials directly;
they are the expensive part and are reused across every profile computed
on the same trajectory.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .types import Direction, GridConfig, PhaseFactor

# Cells per work unit. Fixed regardless of thread count so results are
# bit-identical whether chunks run sequentially or concurrently.
CELL_CHUNK = 4096

DEFAULT_MEMORY_BUDGET_BYTES = 1 << 30


@dataclass(frozen=True)
class DirectionGrid:
    """Uniform bin-center grid over azimuth [-pi, pi) x elevation [0, pi].

    Cells are stored elevation-major: flat index = elevation_idx * azimuth_bins
    + azimuth_idx.
    """

    config: GridConfig
    azimuth_centers: np.ndarray
    elevation_centers: np.ndarray
    unit_vectors: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.config.elevation_bins, self.config.azimuth_bins

    @property
    def size(self) -> int:
        return self.config.cell_count

    def flat_index(self, elevation_idx: int, azimuth_idx: int) -> int:
        return elevation_idx * self.config.azimuth_bins + azimuth_idx

    def cell_index(self, flat_index: int) -> tuple[int, int]:
        return divmod(flat_index, self.config.azimuth_bins)

    def direction_at(self, flat_index: int) -> Direction:
        e, a = self.cell_index(flat_index)
        return Direction(float(self.azimuth_centers[a]), float(self.elevation_centers[e]))


def build_grid(config: GridConfig) -> DirectionGrid:
    """Lay out bin centers and their unit vectors for a grid config."""
    az_step = 2.0 * math.pi / config.azimuth_bins
    el_step = math.pi / config.elevation_bins
    az = -math.pi + (np.arange(config.azimuth_bins) + 0.5) * az_step
    el = (np.arange(config.elevation_bins) + 0.5) * el_step

    sin_el = np.sin(el)[:, None]
    u = np.empty((config.elevation_bins, config.azimuth_bins, 3))
    u[:, :, 0] = np.cos(az)[None, :] * sin_el
    u[:, :, 1] = np.sin(az)[None, :] * sin_el
    u[:, :, 2] = np.cos(el)[:, None]

    for arr in (az, el, u):
        arr.setflags(write=False)
    return DirectionGrid(config, az, el, u.reshape(-1, 3))


@dataclass(frozen=True)
class SteeringTable:
    """Precomputed exp(-1j * phase[c, m]) for one grid and one trajectory."""

    grid: DirectionGrid
    steering: np.ndarray
    wavelength_m: float
    phase_factor: int

    @property
    def sample_count(self) -> int:
        return int(self.steering.shape[1])

    @property
    def phase_scale(self) -> float:
        """kappa * 2 * pi / wavelength (radians per meter of projection)."""
        return self.phase_factor * 2.0 * math.pi / self.wavelength_m


def _check_positions(positions) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] == 0:
        raise InvalidArgumentError(f"positions must have shape (m, 3), got {pos.shape}")
    if not np.all(np.isfinite(pos)):
        raise InvalidArgumentError("positions must be finite")
    return pos


def steering_phase_matrix(
    grid: DirectionGrid,
    positions,
    wavelength_m: float | None = None,
    phase_factor: int | None = None,
) -> np.ndarray:
    """Raw (unwrapped) phase table kappa * (2 pi / wavelength) * (U @ D.T).

    Materializes the full cells x samples matrix; intended for small grids
    and for verifying the chunked table construction.
    """
    pos = _check_positions(positions)
    wavelength = grid.config.wavelength_m if wavelength_m is None else wavelength_m
    kappa = grid.config.phase_factor if phase_factor is None else PhaseFactor.validate(phase_factor)
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be > 0, got {wavelength}")
    scale = kappa * 2.0 * math.pi / wavelength
    return scale * (grid.unit_vectors @ pos.T)


def table_bytes_estimate(cell_count: int, sample_count: int) -> int:
    """Size of the complex steering table for the given dimensions."""
    return cell_count * sample_count * np.dtype(np.complex128).itemsize


def _fill_chunk(out: np.ndarray, unit_chunk: np.ndarray, pos_t: np.ndarray, scale: float) -> None:
    phases = scale * (unit_chunk @ pos_t)
    out.real = np.cos(phases)
    np.sin(phases, out=phases)
    np.negative(phases, out=phases)
    out.imag = phases


def precompute_steering(
    grid: DirectionGrid,
    traj_positions,
    wavelength_m: float | None = None,
    phase_factor: int | None = None,
    *,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES,
    threads: int = 1,
) -> SteeringTable:
    """Build the steering table for a grid and a list of displacements.

    Raises ResourceLimitError when the table would exceed the memory budget;
    lower the grid resolution or sub-sample packets in that case.
    """
    pos = _check_positions(traj_positions)
    wavelength = grid.config.wavelength_m if wavelength_m is None else wavelength_m
    kappa = grid.config.phase_factor if phase_factor is None else PhaseFactor.validate(phase_factor)
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be > 0, got {wavelength}")
    if threads < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {threads}")

    estimate = table_bytes_estimate(grid.size, pos.shape[0])
    if estimate > memory_budget_bytes:
        raise ResourceLimitError(
            f"steering table of {grid.size} cells x {pos.shape[0]} samples needs "
            f"{estimate / 2**20:.0f} MiB, over the {memory_budget_bytes / 2**20:.0f} MiB "
            "budget; lower the grid resolution or sub-sample packets"
        )

    scale = kappa * 2.0 * math.pi / wavelength
    pos_t = pos.T.copy()
    steering = np.empty((grid.size, pos.shape[0]), dtype=np.complex128)
    starts = range(0, grid.size, CELL_CHUNK)

    if threads == 1:
        for s in starts:
            _fill_chunk(steering[s : s + CELL_CHUNK], grid.unit_vectors[s : s + CELL_CHUNK], pos_t, scale)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(
                pool.map(
                    lambda s: _fill_chunk(
                        steering[s : s + CELL_CHUNK], grid.unit_vectors[s : s + CELL_CHUNK], pos_t, scale
                    ),
                    starts,
                )
            )

    steering.setflags(write=False)
    return SteeringTable(grid, steering, wavelength, kappa)
