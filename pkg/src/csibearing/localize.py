"""Least-squares position estimation from bearings to known anchors.

Each observation defines a ray from an anchor a_j along the unit vector
n_j = (cos b_j, sin b_j). The estimate is the point minimizing the summed
squared line distances

    D_j(p)^2 = || (p - a_j) - ((p - a_j) . n_j) n_j ||^2,

solved through the normal equations sum_j (I - n_j n_j^T) p =
sum_j (I - n_j n_j^T) a_j. Observations whose profile variance exceeds the
rejection threshold are discarded first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InsufficientObservationsError,
    InvalidArgumentError,
)
from .profile import DEFAULT_TAU
from .types import wrap_azimuth

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class BearingObservation:
    """A bearing ray: from a known anchor position toward the receiver."""

    anchor_position: np.ndarray
    bearing_rad: float
    variance: float = 0.0

    def __post_init__(self) -> None:
        pos = np.asarray(self.anchor_position, dtype=float)
        if pos.shape != (2,) or not np.all(np.isfinite(pos)):
            raise InvalidArgumentError(f"anchor_position must be a finite 2-vector, got {pos}")
        if self.variance < 0.0:
            raise InvalidArgumentError(f"variance must be >= 0, got {self.variance}")
        pos.setflags(write=False)
        object.__setattr__(self, "anchor_position", pos)
        object.__setattr__(self, "bearing_rad", wrap_azimuth(self.bearing_rad))

    @property
    def ray_direction(self) -> np.ndarray:
        return np.array([math.cos(self.bearing_rad), math.sin(self.bearing_rad)])


@dataclass(frozen=True)
class LocalizationResult:
    position: np.ndarray
    residual: float
    used: int
    behind: tuple[int, ...]
    """Indices (into the input list) of rays whose anchor faces away from
    the solution; the solver treats rays as full lines, so this is only a
    diagnostic."""


def filter_outliers(
    observations: Sequence[BearingObservation], tau: float = DEFAULT_TAU
) -> list[BearingObservation]:
    """Observations whose profile variance stays within the threshold."""
    return [obs for obs in observations if obs.variance <= tau]


def localize(
    observations: Sequence[BearingObservation], tau: float = DEFAULT_TAU
) -> LocalizationResult:
    """Least-squares intersection of the surviving bearing rays."""
    keep = [(i, obs) for i, obs in enumerate(observations) if obs.variance <= tau]
    if len(keep) < 2:
        raise InsufficientObservationsError(
            f"need at least 2 observations with variance <= {tau}, have {len(keep)}"
        )

    dim = keep[0][1].anchor_position.size
    normal = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    for _, obs in keep:
        proj = np.eye(dim) - np.outer(obs.ray_direction, obs.ray_direction)
        normal += proj
        rhs += proj @ obs.anchor_position

    if np.linalg.cond(normal) > CONDITION_LIMIT:
        raise DegenerateGeometryError(
            "bearing rays are near-parallel; the intersection is unconstrained"
        )
    position = np.linalg.solve(normal, rhs)

    residual = 0.0
    behind: list[int] = []
    for idx, obs in keep:
        offset = position - obs.anchor_position
        along = float(offset @ obs.ray_direction)
        residual += float(offset @ offset) - along * along
        if along < 0.0:
            behind.append(idx)
    return LocalizationResult(position, max(residual, 0.0), len(keep), tuple(behind))
