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
from enum import Enum
from typing import Dict, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidConfig, InvalidInput
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.potentials import Potential, PotentialSet, eval_grad_periodic, eval_periodic

# above this many q points the AUTO method switches to the FFT path
DIRECT_LIMIT = 1024


class ConvolutionMethod(Enum):
    AUTO = "auto"
    DIRECT = "direct"
    FFT = "fft"

    @classmethod
    def from_str(cls, method: str) -> ConvolutionMethod:
        for candidate in cls:
            if candidate.value == method:
                return candidate
        raise InvalidConfig(f"Unknown convolution method '{method}'")


@dataclass(frozen=True)
class ForceField:
    """F1 = ∇V₁₁*ρ₁ + ∇V₁₂*ρ₂ and F2 = ∇V₂₂*ρ₂ + ∇V₂₁*ρ₁ on the q points, shape (Nq, d)."""

    f1: NDArray[np.float64]
    f2: NDArray[np.float64]

    def species(self, alpha: int) -> NDArray[np.float64]:
        return self.f1 if alpha == 1 else self.f2

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.f1) or np.any(self.f2))


def _mirror_index(grid: PhaseGrid) -> NDArray[np.int64]:
    """Flat index of −q (mod the box) for every q point."""
    shape = (grid.n_q,) * grid.d
    coords = np.indices(shape).reshape(grid.d, -1)
    return np.ravel_multi_index(tuple((-coords) % grid.n_q), shape)


def sampled_gradient(pot: Potential, grid: PhaseGrid) -> NDArray[np.float64]:
    """∇V at every q point seen as a displacement from the origin, made exactly odd under q → −q."""
    raw = eval_grad_periodic(pot, grid.q_points, grid.box_length)
    return 0.5 * (raw - raw[_mirror_index(grid)])


def sampled_potential(pot: Potential, grid: PhaseGrid) -> NDArray[np.float64]:
    raw = eval_periodic(pot, grid.q_points, grid.box_length)
    return 0.5 * (raw + raw[_mirror_index(grid)])


def _difference_index(grid: PhaseGrid) -> NDArray[np.int64]:
    shape = (grid.n_q,) * grid.d
    coords = np.indices(shape).reshape(grid.d, -1)
    diff = (coords[:, :, None] - coords[:, None, :]) % grid.n_q
    return np.ravel_multi_index(tuple(diff), shape)


def kernel_matrix(kernel: NDArray[np.float64], grid: PhaseGrid) -> NDArray[np.float64]:
    """K(q_i − q_j) for every pair of q points, shape (Nq, Nq) + kernel.shape[1:]."""
    return kernel[_difference_index(grid)]


def convolve_direct(kernel: NDArray[np.float64], rho: NDArray[np.float64], grid: PhaseGrid) -> NDArray[np.float64]:
    """(K*ρ)(q_i) = Σ_j K(q_i − q_j) ρ(q_j) dq^d with K sampled per q point; K has shape (Nq,) or (Nq, c)."""
    matrix = kernel_matrix(kernel, grid)
    return np.tensordot(rho, matrix, axes=([0], [1])) * grid.dq**grid.d


def convolve_fft(kernel: NDArray[np.float64], rho: NDArray[np.float64], grid: PhaseGrid) -> NDArray[np.float64]:
    shape = (grid.n_q,) * grid.d
    axes = tuple(range(grid.d))
    rho_hat = np.fft.fftn(rho.reshape(shape))
    columns = kernel.reshape(kernel.shape[0], -1)
    out = np.empty(columns.shape)
    for c in range(columns.shape[1]):
        kernel_hat = np.fft.fftn(columns[:, c].reshape(shape))
        out[:, c] = np.real(np.fft.ifftn(kernel_hat * rho_hat, axes=axes)).reshape(-1)
    return out.reshape(kernel.shape) * grid.dq**grid.d


def convolve(
    kernel: NDArray[np.float64],
    rho: NDArray[np.float64],
    grid: PhaseGrid,
    method: ConvolutionMethod = ConvolutionMethod.AUTO,
) -> NDArray[np.float64]:
    if rho.shape != (grid.shape[0],):
        raise InvalidInput(f"Density of shape {rho.shape} does not match {grid.shape[0]} q points")
    if method is ConvolutionMethod.AUTO:
        method = ConvolutionMethod.DIRECT if grid.shape[0] <= DIRECT_LIMIT else ConvolutionMethod.FFT
    if method is ConvolutionMethod.DIRECT:
        return convolve_direct(kernel, rho, grid)
    return convolve_fft(kernel, rho, grid)


class KernelCache:
    """Sampled ∇V and V per potential on one grid."""

    def __init__(self, pots: PotentialSet, grid: PhaseGrid):
        self.pots = pots
        self.grid = grid
        self._gradients: Dict[str, NDArray[np.float64]] = {}
        self._values: Dict[str, NDArray[np.float64]] = {}

    def gradient(self, name: str) -> NDArray[np.float64]:
        if name not in self._gradients:
            self._gradients[name] = sampled_gradient(self.pots.items()[name], self.grid)
        return self._gradients[name]

    def value(self, name: str) -> NDArray[np.float64]:
        if name not in self._values:
            self._values[name] = sampled_potential(self.pots.items()[name], self.grid)
        return self._values[name]


def _field(
    cache: KernelCache,
    terms: Tuple[Tuple[str, NDArray[np.float64]], ...],
    method: ConvolutionMethod,
) -> NDArray[np.float64]:
    grid = cache.grid
    total = np.zeros((grid.shape[0], grid.d))
    for name, rho in terms:
        if cache.pots.items()[name].is_zero:
            continue
        total += convolve(cache.gradient(name), rho, grid, method)
    return total


def force_field(
    rho1: NDArray[np.float64],
    rho2: NDArray[np.float64],
    pots: PotentialSet,
    grid: PhaseGrid,
    method: ConvolutionMethod = ConvolutionMethod.AUTO,
    cache: KernelCache | None = None,
) -> ForceField:
    if rho1.shape != rho2.shape:
        raise InvalidInput(f"Densities live on different grids: {rho1.shape} vs {rho2.shape}")
    cache = cache or KernelCache(pots, grid)
    # V21 = V12, so the cross kernel is shared
    f1 = _field(cache, (("v11", rho1), ("v12", rho2)), method)
    f2 = _field(cache, (("v22", rho2), ("v12", rho1)), method)
    return ForceField(f1, f2)


def potential_energy(
    rho1: NDArray[np.float64],
    rho2: NDArray[np.float64],
    pots: PotentialSet,
    grid: PhaseGrid,
    cache: KernelCache | None = None,
) -> float:
    """½∬ρ₁V₁₁ρ₁ + ½∬ρ₂V₂₂ρ₂ + ∬ρ₁V₁₂ρ₂."""
    cache = cache or KernelCache(pots, grid)
    volume = grid.dq**grid.d
    energy = 0.0
    for name, left, right, weight in (("v11", rho1, rho1, 0.5), ("v22", rho2, rho2, 0.5), ("v12", rho1, rho2, 1.0)):
        if cache.pots.items()[name].is_zero:
            continue
        field = convolve(cache.value(name), right, grid)
        energy += weight * float(np.sum(left * field)) * volume
    return energy
