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
from twospecies.fock.basis import DEFAULT_CAPACITY, SpeciesSector, TwoSpeciesBasis, build_basis
from twospecies.fock.density import (
    ReducedDensityMatrix,
    expect_kinetic,
    expect_number,
    expect_number_moments,
    reduced_density,
    transition_density,
)
from twospecies.fock.hamiltonian import build_hamiltonian, interaction_diagonal, kinetic_operator, one_body_kinetic
from twospecies.fock.krylov import KrylovPropagator, evolve, trajectory
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.fock.state import ManyBodyState, apply_annihilation, apply_creation, slater_initial_state

__all__ = [
    "DEFAULT_CAPACITY",
    "KrylovPropagator",
    "LatticeConfig",
    "ManyBodyState",
    "ReducedDensityMatrix",
    "ScalingContext",
    "SpeciesSector",
    "TwoSpeciesBasis",
    "apply_annihilation",
    "apply_creation",
    "build_basis",
    "build_hamiltonian",
    "evolve",
    "expect_kinetic",
    "expect_number",
    "expect_number_moments",
    "interaction_diagonal",
    "kinetic_operator",
    "one_body_kinetic",
    "reduced_density",
    "slater_initial_state",
    "trajectory",
    "transition_density",
]
