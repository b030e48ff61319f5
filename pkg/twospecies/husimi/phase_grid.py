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
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput, MismatchedGrids
from twospecies.fock.scaling import LatticeConfig


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor phase-space grid: periodic q axis of length `box_length`, uniform p axis.

    Points are flattened per slot: `q_points` is (Nq, d), `p_points` is (Np, d). A grid
    whose p axis spans one full period 2π·hbar/dq with periodic weights is "full zone".
    """

    q_axis: NDArray[np.float64]
    p_axis: NDArray[np.float64]
    p_weights_axis: NDArray[np.float64]
    box_length: float
    d: int = 1
    full_zone: bool = False
    q_points: NDArray[np.float64] = field(init=False, repr=False, compare=False)
    p_points: NDArray[np.float64] = field(init=False, repr=False, compare=False)
    p_weights: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, axis in (("q", self.q_axis), ("p", self.p_axis)):
            if axis.ndim != 1 or axis.size < 2 or np.any(np.diff(axis) <= 0.0):
                raise InvalidInput(f"Phase grid {name} axis must be strictly increasing with at least 2 points")
        if self.p_weights_axis.shape != self.p_axis.shape:
            raise InvalidInput("Momentum weights must match the p axis")
        object.__setattr__(self, "q_points", _tensor(self.q_axis, self.d))
        object.__setattr__(self, "p_points", _tensor(self.p_axis, self.d))
        weights = np.ones(1)
        for _ in range(self.d):
            weights = np.multiply.outer(weights, self.p_weights_axis).reshape(-1)
        object.__setattr__(self, "p_weights", weights)

    @classmethod
    def full_zone_grid(
        cls, lattice: LatticeConfig, hbar: float, n_p: Optional[int] = None, q_stride: int = 1
    ) -> PhaseGrid:
        """q on lattice sites, p = −πℏ/dx + jΔp with Δp = 2πℏ/(n_p·dx)."""
        n_p = n_p or lattice.M
        p_max = math.pi * hbar / lattice.dx
        dp = 2.0 * p_max / n_p
        p_axis = -p_max + dp * np.arange(n_p)
        q_axis = np.arange(0, lattice.M, q_stride) * lattice.dx
        return cls(q_axis, p_axis, np.full(n_p, dp), lattice.length, lattice.d, full_zone=q_stride == 1)

    @classmethod
    def bounded_grid(
        cls, lattice: LatticeConfig, hbar: float, p_max: float, n_p: int, q_stride: int = 1
    ) -> PhaseGrid:
        """q on lattice sites, p on linspace(−p_max, p_max, n_p) with trapezoid weights."""
        if p_max * lattice.dx > math.pi * hbar * (1.0 + 1e-12):
            raise InvalidInput(
                f"p_max={p_max} exceeds the resolvable momentum πℏ/dx={math.pi * hbar / lattice.dx:.6g}"
            )
        q_axis = np.arange(0, lattice.M, q_stride) * lattice.dx
        p_axis, weights = _trapezoid_axis(p_max, n_p)
        return cls(q_axis, p_axis, weights, lattice.length, lattice.d)

    @classmethod
    def kinetic_grid(cls, box_length: float, n_q: int, p_max: float, n_p: int, d: int = 1) -> PhaseGrid:
        """Periodic q cells on [0, box_length) and a trapezoid p axis; used for Vlasov data."""
        q_axis = np.arange(n_q) * (box_length / n_q)
        p_axis, weights = _trapezoid_axis(p_max, n_p)
        return cls(q_axis, p_axis, weights, box_length, d)

    @property
    def dq(self) -> float:
        return float(self.q_axis[1] - self.q_axis[0])

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    @property
    def p_max(self) -> float:
        return float(max(-self.p_axis[0], self.p_axis[-1]))

    @property
    def n_q(self) -> int:
        return int(self.q_axis.size)

    @property
    def n_p(self) -> int:
        return int(self.p_axis.size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.q_points.shape[0], self.p_points.shape[0]

    @property
    def cell_weights(self) -> NDArray[np.float64]:
        """(2π)^{-d} dq dp per point, shape (Nq, Np)."""
        q_weight = self.dq**self.d
        return np.outer(np.full(self.shape[0], q_weight), self.p_weights) / (2.0 * math.pi) ** self.d

    def centered_q(self) -> NDArray[np.float64]:
        """q points measured from the origin by minimum image."""
        return self.q_points - self.box_length * np.round(self.q_points / self.box_length)

    def check_compatible(self, other: PhaseGrid) -> None:
        if (
            self.d != other.d
            or self.shape != other.shape
            or not np.allclose(self.q_axis, other.q_axis)
            or not np.allclose(self.p_axis, other.p_axis)
        ):
            raise MismatchedGrids(f"Phase grids differ: {self.describe()} vs {other.describe()}")

    def describe(self) -> str:
        return f"d={self.d}, n_q={self.n_q}, n_p={self.n_p}, L={self.box_length:.6g}, p_max={self.p_max:.6g}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "box_length": self.box_length,
            "q_axis": self.q_axis.tolist(),
            "p_axis": self.p_axis.tolist(),
            "p_weights": self.p_weights_axis.tolist(),
            "full_zone": self.full_zone,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> PhaseGrid:
        return cls(
            q_axis=np.asarray(data["q_axis"], dtype=float),
            p_axis=np.asarray(data["p_axis"], dtype=float),
            p_weights_axis=np.asarray(data["p_weights"], dtype=float),
            box_length=float(data["box_length"]),
            d=int(data["d"]),
            full_zone=bool(data.get("full_zone", False)),
        )


def _tensor(axis: NDArray[np.float64], d: int) -> NDArray[np.float64]:
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, d)


def _trapezoid_axis(p_max: float, n_p: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if p_max <= 0.0 or n_p < 2:
        raise InvalidInput(f"Momentum axis needs p_max > 0 and n_p ≥ 2, got p_max={p_max}, n_p={n_p}")
    p_axis = np.linspace(-p_max, p_max, n_p)
    weights = np.full(n_p, p_axis[1] - p_axis[0])
    weights[[0, -1]] *= 0.5
    return p_axis, weights
