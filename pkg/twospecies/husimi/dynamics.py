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

from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.fock.density import ReducedDensityMatrix, transition_density
from twospecies.fock.state import ManyBodyState
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure, contract_slots, real_part


def density_time_derivative(
    state: ManyBodyState, hamiltonian: sparse.spmatrix, k: int, ell: int
) -> ReducedDensityMatrix:
    """∂_t γ^(k,ℓ) along iℏ∂_tΨ = HΨ, from transition kernels of Ψ and −iHΨ/ℏ."""
    velocity = state.with_amplitudes(-1j * (hamiltonian @ state.amplitudes) / state.ctx.hbar)
    forward = transition_density(velocity, state, k, ell)
    backward = transition_density(state, velocity, k, ell)
    return ReducedDensityMatrix(k, ell, forward.values + backward.values, forward.lattice, forward.ctx)


def husimi_time_derivative(
    state: ManyBodyState,
    hamiltonian: sparse.spmatrix,
    fam: CoherentFamily,
    grid: PhaseGrid,
    k: int,
    ell: int,
) -> HusimiMeasure:
    """Exact ∂_t m^(k,ℓ) at the given state; no finite differences in time."""
    derivative = density_time_derivative(state, hamiltonian, k, ell)
    windows = fam.windows(grid)
    contracted = contract_slots(derivative.lattice_kernel, [(windows, windows)] * (k + ell))
    values = real_part(contracted, f"∂_t m^({k},{ell})").reshape(grid.shape * (k + ell))
    return HusimiMeasure(k, ell, values, grid, state.ctx)
