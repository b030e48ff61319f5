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
from twospecies.vlasov.distribution import SpeciesPairDistribution, density, mass
from twospecies.vlasov.forces import ConvolutionMethod, ForceField, KernelCache, force_field, potential_energy
from twospecies.vlasov.solver import (
    CONSERVATION_COLUMNS,
    ConservationRecord,
    ConservedQuantities,
    VlasovSolver,
    VlasovTrajectory,
    advect_p,
    advect_q,
    conserved_quantities,
    run,
    step,
)

__all__ = [
    "CONSERVATION_COLUMNS",
    "ConservationRecord",
    "ConservedQuantities",
    "ConvolutionMethod",
    "ForceField",
    "KernelCache",
    "SpeciesPairDistribution",
    "VlasovSolver",
    "VlasovTrajectory",
    "advect_p",
    "advect_q",
    "conserved_quantities",
    "density",
    "force_field",
    "mass",
    "potential_energy",
    "run",
    "step",
]
