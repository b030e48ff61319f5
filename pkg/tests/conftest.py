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
from typing import Any, Dict

import pytest


# The run config dictionary, written out as run.yml by the command tests
@pytest.fixture  # pyright: ignore [reportUntypedFunctionDecorator]
def run_config_dict() -> Dict[str, Any]:
    return {
        "scaling": {"N1": 1, "N2": 1, "d": 1},
        "lattice": {"M": 8, "dx": 1.0},
        "quantum": {"t_final_time": 0.2, "steps": 2},
        "vlasov": {"dt_time": 0.05, "t_final_time": 0.2},
        "hierarchy": {"k_max": 1, "t_time": 0.1, "dt_probe": 0.05},
    }
