#
#  Copyright 2023 decodable Inc.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
#
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.husimi.phase_grid import PhaseGrid

MAX_EXACT_SUPPORT = 4096


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point cloud; coordinates with a period are compared by minimum image.

    `resolution_error` bounds the W₁ error introduced when the cloud was coarsened from a grid function.
    """

    points: NDArray[np.float64]
    weights: NDArray[np.float64]
    periods: Tuple[Optional[float], ...] = ()
    resolution_error: float = 0.0

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (points.shape[0],):
            raise InvalidInput(f"{weights.size} weights for {points.shape[0]} support points")
        if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
            raise InvalidInput("Measure weights must be finite and nonnegative")
        periods = self.periods or (None,) * points.shape[1]
        if len(periods) != points.shape[1]:
            raise InvalidInput(f"{len(periods)} periods for {points.shape[1]} coordinates")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "periods", tuple(periods))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def trimmed(self) -> DiscreteMeasure:
        """Drops zero-weight points."""
        keep = self.weights > 0.0
        return DiscreteMeasure(self.points[keep], self.weights[keep], self.periods, self.resolution_error)

    def scaled(self, factor: float) -> DiscreteMeasure:
        return DiscreteMeasure(self.points, self.weights * factor, self.periods, self.resolution_error * factor)

    def marginal(self, axis: int) -> DiscreteMeasure:
        return DiscreteMeasure(self.points[:, [axis]], self.weights, (self.periods[axis],), self.resolution_error)


def cost_matrix(a: DiscreteMeasure, b: DiscreteMeasure) -> NDArray[np.float64]:
    """Euclidean distances between supports, minimum image along periodic coordinates."""
    if a.dim != b.dim or a.periods != b.periods:
        raise InvalidInput(f"Measures live in different spaces: dim {a.dim} vs {b.dim}")
    diff = a.points[:, None, :] - b.points[None, :, :]
    for axis, period in enumerate(a.periods):
        if period is not None:
            diff[..., axis] -= period * np.round(diff[..., axis] / period)
    return np.ascontiguousarray(np.linalg.norm(diff, axis=-1))


def _block_starts(n: int, factor: int) -> NDArray[np.int64]:
    return np.arange(0, n, factor)


def _aggregate_axis(values: NDArray[np.float64], axis: int, starts: NDArray[np.int64]) -> NDArray[np.float64]:
    return np.add.reduceat(values, starts, axis=axis)


def _block_centres(axis_values: NDArray[np.float64], starts: NDArray[np.int64]) -> NDArray[np.float64]:
    counts = np.diff(np.append(starts, axis_values.size))
    return np.add.reduceat(axis_values, starts) / counts


def aggregation_factor(grid: PhaseGrid, max_support: int = MAX_EXACT_SUPPORT) -> int:
    """Smallest block edge, in cells, that brings the grid down to max_support points."""
    factor = 1
    while (math.ceil(grid.n_q / factor) * math.ceil(grid.n_p / factor)) ** grid.d > max_support:
        factor += 1
    return factor


def from_grid_function(
    m: NDArray[np.float64], grid: PhaseGrid, max_support: int = MAX_EXACT_SUPPORT
) -> DiscreteMeasure:
    """Cell masses (2π)^{-d} m dq dp, summed over blocks of cells and placed at block centres.

    Mass is conserved; each unit of mass moves at most one block diameter, recorded as `resolution_error`.
    """
    if m.shape != grid.shape:
        raise InvalidInput(f"Grid function of shape {m.shape} does not live on a grid of shape {grid.shape}")
    d = grid.d
    factor = aggregation_factor(grid, max_support)
    masses = (m * grid.cell_weights).reshape((grid.n_q,) * d + (grid.n_p,) * d)
    q_starts = _block_starts(grid.n_q, factor)
    p_starts = _block_starts(grid.n_p, factor)
    for axis in range(2 * d):
        masses = _aggregate_axis(masses, axis, q_starts if axis < d else p_starts)
    q_centres = _block_centres(grid.q_axis, q_starts)
    p_centres = _block_centres(grid.p_axis, p_starts)
    mesh = np.meshgrid(*([q_centres] * d + [p_centres] * d), indexing="ij")
    points = np.stack(mesh, axis=-1).reshape(-1, 2 * d)
    weights = masses.reshape(-1)
    if factor > 1:
        diameter = math.sqrt(d * ((factor - 1) * grid.dq) ** 2 + d * ((factor - 1) * grid.dp) ** 2)
    else:
        diameter = 0.0
    total = float(np.sum(np.abs(weights)))
    periods: Sequence[Optional[float]] = (grid.box_length,) * d + (None,) * d
    # negative round-off from the solvers carries no mass
    return DiscreteMeasure(points, np.clip(weights, 0.0, None), tuple(periods), diameter * total)
