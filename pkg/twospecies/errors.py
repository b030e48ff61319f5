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

from typing_extensions import override

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5


class TwoSpeciesException(Exception):
    exit_code: int = EXIT_INTERNAL

    @classmethod
    def category(cls) -> str:
        return "TwoSpeciesException"

    @override
    def __str__(self) -> str:
        return f"TwoSpecies: {self.category()}: {self.args[0]}"


class ConfigurationError(TwoSpeciesException):
    exit_code = EXIT_CONFIG

    @classmethod
    def category(cls) -> str:
        return "ConfigurationError"


class InvalidConfig(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "InvalidConfig"


class InvalidInput(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "InvalidInput"


class OrderTooHigh(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "OrderTooHigh"


class MissingLevel(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "MissingLevel"


class BandLimitRequired(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "BandLimitRequired"


class DepthExceedsFamily(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "DepthExceedsFamily"


class MismatchedGrids(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "MismatchedGrids"


class SupportTooLarge(ConfigurationError):
    @classmethod
    def category(cls) -> str:
        return "SupportTooLarge"


class CapacityExceeded(TwoSpeciesException):
    exit_code = EXIT_CAPACITY

    @classmethod
    def category(cls) -> str:
        return "CapacityExceeded"


class NumericalError(TwoSpeciesException):
    exit_code = EXIT_NUMERIC

    @classmethod
    def category(cls) -> str:
        return "NumericalError"


class BlowUp(NumericalError):
    @classmethod
    def category(cls) -> str:
        return "BlowUp"


class KrylovStagnation(NumericalError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual

    @classmethod
    def category(cls) -> str:
        return "KrylovStagnation"


class ImaginaryResidue(NumericalError):
    @classmethod
    def category(cls) -> str:
        return "ImaginaryResidue"


class NormalizationGap(NumericalError):
    @classmethod
    def category(cls) -> str:
        return "NormalizationGap"


class ExtrapolationNeeded(NumericalError):
    def __init__(self, message: str, fraction: float):
        super().__init__(message)
        self.fraction = fraction

    @classmethod
    def category(cls) -> str:
        return "ExtrapolationNeeded"


class NonConvergence(NumericalError):
    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap

    @classmethod
    def category(cls) -> str:
        return "NonConvergence"


class DegenerateOrbitals(NumericalError):
    @classmethod
    def category(cls) -> str:
        return "DegenerateOrbitals"


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, TwoSpeciesException):
        return error.exit_code
    return EXIT_INTERNAL
