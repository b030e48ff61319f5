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
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.husimi.phase_grid import PhaseGrid

# momentum wavelength the probes resolve
DEFAULT_P_WAVELENGTH = 4.0


@dataclass(frozen=True)
class ProbeMode:
    """cos(a·κ_q·Σq_i − φ_q)·cos(b·κ_p·Σp_i − φ_p) on one slot."""

    q_mode: int
    p_mode: int
    q_shift: float = 0.0
    p_shift: float = 0.0


PROBE_MODES: Tuple[ProbeMode, ...] = (
    ProbeMode(1, 0),
    ProbeMode(1, 0, q_shift=0.5 * math.pi),
    ProbeMode(0, 1, p_shift=0.5 * math.pi),
    ProbeMode(1, 1, p_shift=0.5 * math.pi),
    ProbeMode(1, 1, q_shift=0.5 * math.pi),
    ProbeMode(2, 1),
    ProbeMode(1, 2, q_shift=0.5 * math.pi, p_shift=0.5 * math.pi),
    ProbeMode(2, 0),
)


@dataclass(frozen=True)
class SlotProbe:
    value: NDArray[np.float64]
    q_gradient: NDArray[np.float64]
    p_gradient: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class ProbeBattery:
    """Fixed smooth test functions, periodic in q over the box and in p over the grid's p period.

    Multi-slot probes are tensor products; slot r of probe b uses mode (b + 3r) mod 8.
    """

    grid: PhaseGrid
    p_wavelength: float = DEFAULT_P_WAVELENGTH

    def __post_init__(self):
        if self.p_wavelength <= 0.0:
            raise InvalidInput(f"Probe wavelength must be positive, got {self.p_wavelength}")

    def __len__(self) -> int:
        return len(PROBE_MODES)

    @property
    def p_period(self) -> float:
        return self.grid.n_p * self.grid.dp

    @property
    def p_harmonic(self) -> int:
        return max(1, int(round(self.p_period / self.p_wavelength)))

    def slot_probe(self, mode: ProbeMode) -> SlotProbe:
        grid = self.grid
        kq = 2.0 * math.pi * mode.q_mode / grid.box_length
        kp = 2.0 * math.pi * mode.p_mode * self.p_harmonic / self.p_period
        theta_q = kq * np.sum(grid.q_points, axis=-1) - mode.q_shift
        theta_p = kp * np.sum(grid.p_points, axis=-1) - mode.p_shift
        cq, sq = np.cos(theta_q), np.sin(theta_q)
        cp, sp = np.cos(theta_p), np.sin(theta_p)
        value = np.outer(cq, cp)
        ones = np.ones(grid.d)
        q_gradient = np.multiply.outer(-kq * np.outer(sq, cp), ones)
        p_gradient = np.multiply.outer(-kp * np.outer(cq, sp), ones)
        return SlotProbe(value, q_gradient, p_gradient)

    def probe(self, index: int, rank: int) -> List[SlotProbe]:
        return [self.slot_probe(PROBE_MODES[(index + 3 * r) % len(PROBE_MODES)]) for r in range(rank)]

    def pair(self, values: NDArray[np.float64], factors: Sequence[NDArray[np.float64]]) -> float:
        """(2π)^{-d·R} ∫ values · Π_r factor_r over R slots."""
        if values.ndim != 2 * len(factors):
            raise InvalidInput(f"Field of rank {values.ndim // 2} paired against {len(factors)} slot factors")
        cell = self.grid.cell_weights
        out = values
        for factor in factors:
            out = np.tensordot(out, factor * cell, axes=([0, 1], [0, 1]))
        return float(out)

    def pair_scalar(self, index: int, values: NDArray[np.float64]) -> float:
        slots = self.probe(index, values.ndim // 2)
        return self.pair(values, [s.value for s in slots])

    def pair_divergence(self, index: int, fields: NDArray[np.float64], variable: str) -> float:
        """Weak form of Σ_j ∇_{x_j}·X_j: −Σ_j ⟨∇_{x_j}Φ, X_j⟩ for fields of shape (R,) + grid^R + (d,)."""
        rank = fields.shape[0]
        slots = self.probe(index, rank)
        total = 0.0
        for j in range(rank):
            gradient = slots[j].q_gradient if variable == "q" else slots[j].p_gradient
            for c in range(self.grid.d):
                factors = [s.value for s in slots]
                factors[j] = gradient[..., c]
                total -= self.pair(fields[j, ..., c], factors)
        return total
