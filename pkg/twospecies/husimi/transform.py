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
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import ImaginaryResidue, InvalidInput, OrderTooHigh
from twospecies.fock.density import MAX_ORDER, ReducedDensityMatrix
from twospecies.fock.scaling import ScalingContext
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.logs import get_logger

IMAGINARY_TOLERANCE = 1e-9
PASSIVITY_SLACK = 1e-6

logger = get_logger("Husimi")

# (g, h) window pair of one slot, each of shape (Nz, S)
SlotWindows = Tuple[NDArray[np.complex128], NDArray[np.complex128]]


@dataclass(frozen=True)
class HusimiMeasure:
    """m^(k,ℓ) on a phase grid; `values` has shape (Nq, Np) repeated once per slot, species-1 slots first."""

    k: int
    ell: int
    values: NDArray[np.float64]
    grid: PhaseGrid
    ctx: ScalingContext

    @property
    def rank(self) -> int:
        return self.k + self.ell

    def integrate_slot(self, slot: int, weight: NDArray[np.float64] | None = None) -> NDArray[np.float64]:
        """(2π)^{-d}∫ over one slot's (q, p), optionally against a weight of shape (Nq, Np)."""
        cell = self.grid.cell_weights
        if weight is not None:
            cell = cell * weight
        return np.tensordot(self.values, cell, axes=([2 * slot, 2 * slot + 1], [0, 1]))

    def total(self) -> float:
        values = self.values
        for _ in range(self.rank):
            values = np.tensordot(values, self.grid.cell_weights, axes=([0, 1], [0, 1]))
        return float(values)

    def swap_slots(self, first: int, second: int) -> NDArray[np.float64]:
        axes = list(range(2 * self.rank))
        axes[2 * first], axes[2 * second] = axes[2 * second], axes[2 * first]
        axes[2 * first + 1], axes[2 * second + 1] = axes[2 * second + 1], axes[2 * first + 1]
        return np.transpose(self.values, axes)


def contract_slots(kernel: NDArray[np.complex128], slots: Sequence[SlotWindows]) -> NDArray[np.complex128]:
    """Σ_{u,w} Π_r g_r(z_r, w_r) conj(h_r(z_r, u_r)) G(u; w) for a lattice kernel G with axes (u..., w...).

    Output has one axis per slot, of length Nz_r.
    """
    rank = len(slots)
    if kernel.ndim != 2 * rank:
        raise InvalidInput(f"Kernel of rank {kernel.ndim} cannot be contracted against {rank} slots")
    tensor = kernel
    for r, (g, h) in enumerate(slots):
        remaining = rank - r
        n_sites = tensor.shape[0]
        # bring w_r next to u_r
        tensor = np.moveaxis(tensor, remaining, 1)
        rest = tensor.shape[2:]
        pair = (h.conj()[:, :, None] * g[:, None, :]).reshape(g.shape[0], n_sites * n_sites)
        tensor = pair @ tensor.reshape(n_sites * n_sites, -1)
        tensor = np.moveaxis(tensor.reshape((g.shape[0],) + rest), 0, -1)
    return tensor


def real_part(values: NDArray[np.complex128], what: str, tolerance: float = IMAGINARY_TOLERANCE) -> NDArray[np.float64]:
    residue = float(np.max(np.abs(values.imag), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(values.real), initial=0.0)))
    if residue > tolerance * scale:
        raise ImaginaryResidue(f"{what} has imaginary residue {residue:.3e} above {tolerance:.1e}")
    if residue > 0.1 * tolerance * scale:
        logger.warning(f"{what} imaginary residue {residue:.3e} is close to the tolerance {tolerance:.1e}")
    return np.ascontiguousarray(values.real)


def husimi_transform(gamma: ReducedDensityMatrix, fam: CoherentFamily, grid: PhaseGrid) -> HusimiMeasure:
    if gamma.rank > MAX_ORDER:
        raise OrderTooHigh(f"Husimi transform of order k+ℓ={gamma.rank} exceeds the cap {MAX_ORDER}")
    fam.check_grid(grid)
    windows = fam.windows(grid)
    logger.debug(f"Husimi transform of order ({gamma.k}, {gamma.ell}) on {grid.describe()}")
    contracted = contract_slots(gamma.lattice_kernel, [(windows, windows)] * gamma.rank)
    shape = grid.shape * gamma.rank
    values = real_part(contracted, f"m^({gamma.k},{gamma.ell})").reshape(shape)
    return HusimiMeasure(gamma.k, gamma.ell, values, grid, gamma.ctx)
