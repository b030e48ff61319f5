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
from typing import Any, Dict, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidConfig

DEFAULT_XI_MAX = 4.0
DEFAULT_NODES = 17


@dataclass(frozen=True)
class FourierGrid:
    """Probe box [−Ξ, Ξ]^{2d} for one slot's (ξ, η), `nodes` points per axis.

    Slot points are flattened in C order over (ξ₁…ξ_d, η₁…η_d); a level of rank R is stored
    as an array of shape (size,)*R with species-1 slots first.
    """

    xi_max: float = DEFAULT_XI_MAX
    nodes: int = DEFAULT_NODES
    d: int = 1

    def __post_init__(self):
        if self.xi_max <= 0.0:
            raise InvalidConfig(f"Fourier box half-width must be positive, got {self.xi_max}")
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise InvalidConfig(f"Fourier box needs an odd node count ≥ 3 so the origin is a node, got {self.nodes}")
        if self.d not in (1, 2, 3):
            raise InvalidConfig(f"Unsupported dimension d={self.d}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], d: int) -> FourierGrid:
        return cls(
            xi_max=float(data.get("xi_max", DEFAULT_XI_MAX)),
            nodes=int(data.get("nodes", DEFAULT_NODES)),
            d=d,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"xi_max": self.xi_max, "nodes": self.nodes}

    @property
    def axis(self) -> NDArray[np.float64]:
        return np.linspace(-self.xi_max, self.xi_max, self.nodes)

    @property
    def spacing(self) -> float:
        return 2.0 * self.xi_max / (self.nodes - 1)

    @property
    def size(self) -> int:
        return self.nodes ** (2 * self.d)

    @property
    def origin(self) -> int:
        """Flat index of ξ = η = 0."""
        return (self.size - 1) // 2

    @property
    def radius(self) -> float:
        """max |ξ| (equally max |η|) over the box."""
        return self.xi_max * math.sqrt(self.d)

    def shape(self, rank: int) -> Tuple[int, ...]:
        return (self.size,) * rank

    def unflattened(self, rank: int) -> Tuple[int, ...]:
        return (self.nodes,) * (2 * self.d * rank)

    def points(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(ξ, η) of every slot point, each of shape (size, d)."""
        mesh = np.meshgrid(*([self.axis] * (2 * self.d)), indexing="ij")
        flat = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        return flat[:, : self.d], flat[:, self.d :]

    def index_of(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        """Fractional node index of coordinates along one axis."""
        return (values + self.xi_max) / self.spacing

    def describe(self) -> str:
        return f"d={self.d}, Ξ={self.xi_max:.6g}, nodes={self.nodes}"
