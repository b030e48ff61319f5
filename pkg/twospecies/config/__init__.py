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
from twospecies.config.config_reader import CONFIG_ENV_VARIABLE_NAME, RunConfigReader
from twospecies.config.run_config import (
    CoherentSection,
    CompareSection,
    HierarchySection,
    InitialSection,
    PhaseGridSection,
    PicardSection,
    QuantumSection,
    RunConfig,
    SweepSection,
    VlasovSection,
)

__all__ = [
    "CONFIG_ENV_VARIABLE_NAME",
    "CoherentSection",
    "CompareSection",
    "HierarchySection",
    "InitialSection",
    "PhaseGridSection",
    "PicardSection",
    "QuantumSection",
    "RunConfig",
    "RunConfigReader",
    "SweepSection",
    "VlasovSection",
]
