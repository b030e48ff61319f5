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
from twospecies.metrics.measures import (
    MAX_EXACT_SUPPORT,
    DiscreteMeasure,
    aggregation_factor,
    cost_matrix,
    from_grid_function,
)
from twospecies.metrics.moments import PhaseMoments, phase_moments
from twospecies.metrics.transport import (
    SinkhornConfig,
    TransportMode,
    TransportResult,
    sinkhorn_bounds,
    wasserstein1,
    wasserstein1_marginal_1d,
)

__all__ = [
    "MAX_EXACT_SUPPORT",
    "DiscreteMeasure",
    "PhaseMoments",
    "SinkhornConfig",
    "TransportMode",
    "TransportResult",
    "aggregation_factor",
    "cost_matrix",
    "from_grid_function",
    "phase_moments",
    "sinkhorn_bounds",
    "wasserstein1",
    "wasserstein1_marginal_1d",
]
