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
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from yaml import SafeLoader, YAMLError, load

from twospecies.config.run_config import RunConfig
from twospecies.errors import InvalidConfig

CONFIG_ENV_VARIABLE_NAME = "TWOSPECIES_CONFIG"


class RunConfigReader:
    @staticmethod
    def load_config(config_path: Optional[str] = None) -> RunConfig:
        path_name = RunConfigReader.get_config_path(config_path)
        if path_name is None:
            raise InvalidConfig(f"No run config given. Pass --config or set {CONFIG_ENV_VARIABLE_NAME}")

        path = Path(path_name)
        if path.is_file() is False:
            raise InvalidConfig(f"No run config under path: {path}")

        with open(path, "r") as file:
            return RunConfigReader.from_yaml(file.read())

    @staticmethod
    def get_config_path(config_path: Optional[str]) -> Optional[str]:
        if config_path is not None:
            return config_path
        else:
            return os.getenv(CONFIG_ENV_VARIABLE_NAME)

    @staticmethod
    def from_yaml(yaml: str) -> RunConfig:
        try:
            data = load(yaml, Loader=SafeLoader)
        except YAMLError as error:
            raise InvalidConfig(f"Run config is not valid YAML: {error}") from error
        if data is None:
            raise InvalidConfig("Run config is empty")
        return RunConfig.from_dict(data)
