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

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.fock.scaling import ScalingContext
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure

# values of a grid function may dip to this before counting as clipped
CLIP_FLOOR = -1e-10
MASS_TOLERANCE = 1e-8


def density(m: NDArray[np.float64], grid: PhaseGrid) -> NDArray[np.float64]:
    """ρ(q) = (2π)^{-d} ∫ m(q, p) dp on the q points of the grid."""
    if m.shape != grid.shape:
        raise InvalidInput(f"Grid function of shape {m.shape} does not live on a grid of shape {grid.shape}")
    return (m @ grid.p_weights) / (2.0 * np.pi) ** grid.d


def mass(m: NDArray[np.float64], grid: PhaseGrid) -> float:
    return float(np.sum(m * grid.cell_weights))


@dataclass(frozen=True, eq=False)
class SpeciesPairDistribution:
    """Vlasov pair (m₁, m₂) at time t; each carries the mass n_α of its species."""

    m1: NDArray[np.float64]
    m2: NDArray[np.float64]
    grid: PhaseGrid
    ctx: ScalingContext
    t: float = 0.0

    def __post_init__(self):
        for name, values in (("m1", self.m1), ("m2", self.m2)):
            if values.shape != self.grid.shape:
                raise InvalidInput(f"{name} has shape {values.shape}, expected {self.grid.shape}")
            if not np.all(np.isfinite(values)):
                raise InvalidInput(f"{name} contains non-finite values")

    @classmethod
    def from_measures(cls, m10: HusimiMeasure, m01: HusimiMeasure, t: float = 0.0) -> SpeciesPairDistribution:
        """Initial data from the first-level Husimi measures of a quantum state."""
        if (m10.k, m10.ell) != (1, 0) or (m01.k, m01.ell) != (0, 1):
            raise InvalidInput(f"Expected m^(1,0) and m^(0,1), got m^({m10.k},{m10.ell}) and m^({m01.k},{m01.ell})")
        m10.grid.check_compatible(m01.grid)
        return cls(m10.values.copy(), m01.values.copy(), m10.grid, m10.ctx, t)

    @classmethod
    def zeros(cls, grid: PhaseGrid, ctx: ScalingContext) -> SpeciesPairDistribution:
        return cls(np.zeros(grid.shape), np.zeros(grid.shape), grid, ctx)

    def species(self, alpha: int) -> NDArray[np.float64]:
        if alpha == 1:
            return self.m1
        if alpha == 2:
            return self.m2
        raise InvalidInput(f"Unknown species {alpha}")

    @property
    def densities(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return density(self.m1, self.grid), density(self.m2, self.grid)

    @property
    def masses(self) -> tuple[float, float]:
        return mass(self.m1, self.grid), mass(self.m2, self.grid)

    @property
    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.m1)), np.max(np.abs(self.m2))))

    def mass_gaps(self) -> tuple[float, float]:
        """Deviation of each species mass from n_α."""
        m1, m2 = self.masses
        return abs(m1 - self.ctx.n1), abs(m2 - self.ctx.n2)

    def is_nonnegative(self) -> bool:
        return bool(np.min(self.m1) >= CLIP_FLOOR and np.min(self.m2) >= CLIP_FLOOR)

    def with_values(self, m1: NDArray[np.float64], m2: NDArray[np.float64], t: float) -> SpeciesPairDistribution:
        return SpeciesPairDistribution(m1, m2, self.grid, self.ctx, t)

    def swapped(self) -> SpeciesPairDistribution:
        return SpeciesPairDistribution(self.m2, self.m1, self.grid, self.ctx.swapped(), self.t)
