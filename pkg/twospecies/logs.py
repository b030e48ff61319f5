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
import sys

from logbook import Handler, Logger, StreamHandler, lookup_level  # pyright: ignore [reportMissingTypeStubs]

LOGGER_PREFIX = "TwoSpecies"
LOG_FORMAT = "{record.time:%H:%M:%S} [{record.level_name}] {record.channel}: {record.message}"


def get_logger(component: str) -> Logger:
    return Logger(f"{LOGGER_PREFIX}.{component}")


def stderr_handler(level: str = "INFO") -> Handler:
    level_value: int = lookup_level(level.upper())
    handler = StreamHandler(sys.stderr, level=level_value, bubble=False)
    handler.format_string = LOG_FORMAT
    return handler
