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
from twospecies.io.arrays import (
    DENSITY_TAG,
    HUSIMI_TAG,
    MAGIC,
    STATE_TAG,
    VLASOV_TAG,
    ArrayRecord,
    density_from_record,
    density_record,
    husimi_from_record,
    husimi_record,
    state_from_record,
    state_record,
    vlasov_from_record,
    vlasov_record,
)
from twospecies.io.artifacts import (
    MANIFEST_NAME,
    RESOLVED_CONFIG_NAME,
    RunArtifacts,
    measure_columns,
    measure_rows,
    read_array,
    read_csv,
    sha256_of,
    write_csv,
)

__all__ = [
    "DENSITY_TAG",
    "HUSIMI_TAG",
    "MAGIC",
    "MANIFEST_NAME",
    "RESOLVED_CONFIG_NAME",
    "STATE_TAG",
    "VLASOV_TAG",
    "ArrayRecord",
    "RunArtifacts",
    "density_from_record",
    "density_record",
    "husimi_from_record",
    "husimi_record",
    "measure_columns",
    "measure_rows",
    "read_array",
    "read_csv",
    "sha256_of",
    "state_from_record",
    "state_record",
    "vlasov_from_record",
    "vlasov_record",
    "write_csv",
]
