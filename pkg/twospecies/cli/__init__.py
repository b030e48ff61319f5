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
from twospecies.cli.commands import (
    QuantumSetup,
    cmd_compare,
    cmd_hierarchy,
    cmd_picard,
    cmd_quantum,
    cmd_sweep,
    cmd_vlasov,
    compare_distributions,
    matched_initial_data,
)
from twospecies.cli.main import COMMANDS, build_parser, execute, main

__all__ = [
    "COMMANDS",
    "QuantumSetup",
    "build_parser",
    "cmd_compare",
    "cmd_hierarchy",
    "cmd_picard",
    "cmd_quantum",
    "cmd_sweep",
    "cmd_vlasov",
    "compare_distributions",
    "execute",
    "main",
    "matched_initial_data",
]
