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

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput


@dataclass(frozen=True)
class ScalingContext:
    N1: int
    N2: int
    d: int = 1

    def __post_init__(self):
        if self.N1 < 0 or self.N2 < 0:
            raise InvalidInput(f"Particle counts must be non-negative, got N1={self.N1}, N2={self.N2}")
        if self.N1 + self.N2 == 0:
            raise InvalidInput("At least one particle is required")
        if self.d not in (1, 2, 3):
            raise InvalidInput(f"Dimension must be 1, 2 or 3, got {self.d}")

    @property
    def N(self) -> int:
        return self.N1 + self.N2

    @property
    def n1(self) -> float:
        return self.N1 / self.N

    @property
    def n2(self) -> float:
        return self.N2 / self.N

    @property
    def hbar(self) -> float:
        return float(self.N ** (-1.0 / self.d))

    def count(self, species: int) -> int:
        return self.N1 if species == 1 else self.N2

    def fraction(self, species: int) -> float:
        return self.n1 if species == 1 else self.n2

    def swapped(self) -> ScalingContext:
        return ScalingContext(N1=self.N2, N2=self.N1, d=self.d)

    def to_dict(self) -> Dict[str, Any]:
        return {"N1": self.N1, "N2": self.N2, "d": self.d, "hbar": self.hbar}


@dataclass(frozen=True)
class LatticeConfig:
    M: int
    dx: float
    d: int = 1
    boundary: str = "periodic"
    positions: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 4:
            raise InvalidInput(f"Lattice needs at least 4 sites per dimension, got M={self.M}")
        if self.dx <= 0:
            raise InvalidInput(f"Lattice spacing must be positive, got dx={self.dx}")
        if self.boundary != "periodic":
            raise InvalidInput(f"Only periodic boundaries are supported, got '{self.boundary}'")
        axes = [np.arange(self.M) * self.dx] * self.d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.d)
        object.__setattr__(self, "positions", grid)

    @property
    def n_sites(self) -> int:
        return self.M**self.d

    @property
    def length(self) -> float:
        return self.M * self.dx

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    def check_context(self, ctx: ScalingContext) -> None:
        if ctx.d != self.d:
            raise InvalidInput(f"Lattice dimension {self.d} does not match scaling dimension {ctx.d}")
        if ctx.N1 > self.n_sites or ctx.N2 > self.n_sites:
            raise InvalidInput(
                f"Cannot place N1={ctx.N1}, N2={ctx.N2} fermions on {self.n_sites} sites"
            )

    def displacements(self) -> NDArray[np.float64]:
        """Minimum-image displacement x_a − x_b for every site pair, shape (S, S, d)."""
        raw = self.positions[:, None, :] - self.positions[None, :, :]
        return raw - self.length * np.round(raw / self.length)

    def neighbours(self, site: int) -> List[int]:
        coords = np.array(np.unravel_index(site, (self.M,) * self.d))
        shifts: List[int] = []
        for axis in range(self.d):
            for step in (-1, 1):
                moved = coords.copy()
                moved[axis] = (moved[axis] + step) % self.M
                shifts.append(int(np.ravel_multi_index(tuple(moved), (self.M,) * self.d)))
        return shifts
