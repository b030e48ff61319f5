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
from twospecies.husimi.checks import (
    IdentityReport,
    PropertyReport,
    check_properties,
    expected_l1,
    kinetic_identity,
    overlap_resolution,
)
from twospecies.husimi.coherent import CoherentFamily, ProfileKind, coherent_state
from twospecies.husimi.dynamics import density_time_derivative, husimi_time_derivative
from twospecies.husimi.moments import (
    GrowthReport,
    MomentReport,
    RateReport,
    kinetic_growth_report,
    moment_bounds,
    phase_space_moment,
    q_moment_rate,
)
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure, contract_slots, husimi_transform

__all__ = [
    "CoherentFamily",
    "GrowthReport",
    "HusimiMeasure",
    "IdentityReport",
    "MomentReport",
    "PhaseGrid",
    "ProfileKind",
    "PropertyReport",
    "RateReport",
    "check_properties",
    "coherent_state",
    "contract_slots",
    "density_time_derivative",
    "expected_l1",
    "husimi_time_derivative",
    "husimi_transform",
    "kinetic_growth_report",
    "kinetic_identity",
    "moment_bounds",
    "overlap_resolution",
    "phase_space_moment",
    "q_moment_rate",
]
