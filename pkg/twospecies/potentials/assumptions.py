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

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict

import numpy as np

from twospecies.logs import get_logger
from twospecies.potentials.potential import (
    Potential,
    PotentialKind,
    PotentialSet,
    eval_fourier,
    eval_grad,
    eval_potential,
)

logger = get_logger("Potentials")

SAMPLE_POINTS = 4001
SUPPORT_SCAN_POINTS = 8001


class BandLimitStatus(Enum):
    MET = "met"
    UNMET = "unmet"
    NOT_REQUIRED = "not_required"


@dataclass(frozen=True)
class PotentialCheck:
    even: bool
    fourier_continuous_decaying: bool
    gradient_bounded: bool
    gradient_lipschitz: bool
    band_limited: bool
    band_limit_status: BandLimitStatus
    fourier_amp: float
    fourier_band: float
    measured_band: float
    sup_grad: float
    sampled_sup_grad: float
    lipschitz_grad: float
    sampled_lipschitz: float

    @property
    def passed(self) -> bool:
        return (
            self.even
            and self.fourier_continuous_decaying
            and self.gradient_bounded
            and self.gradient_lipschitz
            and self.band_limit_status is not BandLimitStatus.UNMET
        )


@dataclass(frozen=True)
class AssumptionReport:
    checks: Dict[str, PotentialCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    @property
    def fourier_amp(self) -> float:
        return max(check.fourier_amp for check in self.checks.values())

    @property
    def fourier_band(self) -> float:
        return max(check.fourier_band for check in self.checks.values())


def _sample_axis(pot: Potential) -> np.ndarray:
    scale = pot.width_or_bandlimit
    if pot.kind is PotentialKind.BAND_LIMITED:
        scale = 1.0 / pot.width_or_bandlimit
    return np.linspace(-12.0 * scale, 12.0 * scale, SAMPLE_POINTS)


def _sample_points(pot: Potential) -> np.ndarray:
    axis = _sample_axis(pot)
    points = np.zeros((axis.size, pot.d))
    points[:, 0] = axis
    if pot.d > 1:
        # a diagonal ray exercises the radial code path off the coordinate axes
        diagonal = axis[:, None] * np.ones(pot.d) / math.sqrt(pot.d)
        points = np.concatenate([points, diagonal])
    return points


def _measured_band(pot: Potential) -> float:
    if pot.is_zero:
        return 0.0
    if pot.kind is PotentialKind.GAUSSIAN:
        return math.inf
    limit = 2.0 * pot.width_or_bandlimit
    etas = np.linspace(0.0, limit, SUPPORT_SCAN_POINTS)
    wave = np.zeros((etas.size, pot.d))
    wave[:, 0] = etas
    values = np.abs(eval_fourier(pot, wave))
    nonzero = np.nonzero(values > 0.0)[0]
    if nonzero.size == 0:
        return 0.0
    return float(etas[nonzero[-1]])


def check_potential(pot: Potential, fourier_requested: bool) -> PotentialCheck:
    points = _sample_points(pot)
    values = eval_potential(pot, points)
    mirrored = eval_potential(pot, -points)
    even = bool(np.max(np.abs(values - mirrored), initial=0.0) <= 1e-12)

    grads = eval_grad(pot, points)
    grad_norm = np.linalg.norm(grads, axis=-1)
    sampled_sup_grad = float(np.max(grad_norm, initial=0.0))
    step = np.linalg.norm(np.diff(points[: _sample_axis(pot).size], axis=0), axis=-1)
    grad_diff = np.linalg.norm(np.diff(grads[: _sample_axis(pot).size], axis=0), axis=-1)
    sampled_lipschitz = float(np.max(grad_diff / step, initial=0.0))
    gradient_bounded = np.isfinite(sampled_sup_grad) and sampled_sup_grad <= pot.sup_grad * (1.0 + 1e-9) + 1e-15
    # secant slopes of ∇V never exceed the true Lipschitz constant
    gradient_lipschitz = (
        np.isfinite(sampled_lipschitz) and sampled_lipschitz <= pot.lipschitz_grad * (1.0 + 1e-9) + 1e-15
    )

    far = np.zeros((1, pot.d))
    far[0, 0] = 50.0 * max(pot.width_or_bandlimit, 1.0 / max(pot.width_or_bandlimit, 1e-12))
    origin = np.zeros((1, pot.d))
    peak = float(np.abs(eval_fourier(pot, origin))[0])
    tail = float(np.abs(eval_fourier(pot, far))[0])
    decaying = tail <= 1e-8 * max(peak, 1.0)

    band_limited = pot.is_zero or pot.kind is PotentialKind.BAND_LIMITED
    if not fourier_requested:
        status = BandLimitStatus.NOT_REQUIRED
    elif band_limited:
        status = BandLimitStatus.MET
    else:
        status = BandLimitStatus.UNMET

    return PotentialCheck(
        even=even,
        fourier_continuous_decaying=decaying,
        gradient_bounded=bool(gradient_bounded),
        gradient_lipschitz=bool(gradient_lipschitz),
        band_limited=band_limited,
        band_limit_status=status,
        fourier_amp=pot.fourier_amp,
        fourier_band=pot.fourier_band,
        measured_band=_measured_band(pot),
        sup_grad=pot.sup_grad,
        sampled_sup_grad=sampled_sup_grad,
        lipschitz_grad=pot.lipschitz_grad,
        sampled_lipschitz=sampled_lipschitz,
    )


def validate_assumptions(potentials: PotentialSet, fourier_requested: bool = False) -> AssumptionReport:
    checks = {name: check_potential(pot, fourier_requested) for name, pot in potentials.items().items()}
    for name, check in checks.items():
        if check.band_limit_status is BandLimitStatus.UNMET:
            logger.warning(f"Potential '{name}' is not band-limited; Fourier hierarchy constants are unavailable")
        if not check.even:
            logger.warning(f"Potential '{name}' failed the evenness check")
        if not check.gradient_lipschitz:
            logger.warning(
                f"Potential '{name}' declares a gradient Lipschitz constant {check.lipschitz_grad:.4g} "
                f"below the sampled {check.sampled_lipschitz:.4g}"
            )
    return AssumptionReport(checks=checks)
