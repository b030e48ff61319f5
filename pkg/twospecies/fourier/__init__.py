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
from twospecies.fourier.characteristic import (
    CharFamily,
    CharSource,
    MassConvention,
    characteristic_family,
    interaction_characteristic,
    interaction_rep,
    to_characteristic,
    vlasov_characteristic,
)
from twospecies.fourier.grid import FourierGrid
from twospecies.fourier.operator import (
    ETA_NODES,
    CollisionBranch,
    apply_K,
    check_band_limited,
    collision_branches,
    eta_quadrature,
    factorized_char_residual,
    quadrature_gap,
)
from twospecies.fourier.picard import (
    MAX_DEPTH,
    PICARD_SUMMARY_COLUMNS,
    PicardConfig,
    PicardResult,
    delta_L_bound,
    picard_iterate,
    probe_columns,
)

__all__ = [
    "ETA_NODES",
    "MAX_DEPTH",
    "PICARD_SUMMARY_COLUMNS",
    "CharFamily",
    "CharSource",
    "CollisionBranch",
    "FourierGrid",
    "MassConvention",
    "PicardConfig",
    "PicardResult",
    "apply_K",
    "characteristic_family",
    "check_band_limited",
    "collision_branches",
    "delta_L_bound",
    "eta_quadrature",
    "factorized_char_residual",
    "interaction_characteristic",
    "interaction_rep",
    "picard_iterate",
    "probe_columns",
    "quadrature_gap",
    "to_characteristic",
    "vlasov_characteristic",
]
