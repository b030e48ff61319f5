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
from twospecies.hierarchy.consistency import ConsistencyReport, WeakBalance, bbgky_consistency, weak_balance
from twospecies.hierarchy.family import DEFAULT_K_MAX, HusimiFamily, levels_up_to, tensor_power
from twospecies.hierarchy.limit import (
    collision_term,
    factorized_residual,
    l1_norm,
    p_derivative,
    q_derivative,
    transport_term,
    vlasov_hierarchy_rhs,
)
from twospecies.hierarchy.remainders import (
    REMAINDER_COLUMNS,
    REMAINDER_NAMES,
    HierarchyTerms,
    RemainderReport,
    TermField,
    hierarchy_terms,
    path_gradient,
    quantum_remainders,
    remainder_report,
)
from twospecies.hierarchy.weak import PROBE_MODES, ProbeBattery, ProbeMode

__all__ = [
    "DEFAULT_K_MAX",
    "PROBE_MODES",
    "REMAINDER_COLUMNS",
    "REMAINDER_NAMES",
    "ConsistencyReport",
    "HierarchyTerms",
    "HusimiFamily",
    "ProbeBattery",
    "ProbeMode",
    "RemainderReport",
    "TermField",
    "WeakBalance",
    "bbgky_consistency",
    "collision_term",
    "factorized_residual",
    "hierarchy_terms",
    "l1_norm",
    "levels_up_to",
    "p_derivative",
    "path_gradient",
    "q_derivative",
    "quantum_remainders",
    "remainder_report",
    "tensor_power",
    "transport_term",
    "vlasov_hierarchy_rhs",
    "weak_balance",
]
