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

from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.husimi.phase_grid import PhaseGrid


@dataclass(frozen=True)
class PhaseMoments:
    mass: float
    q_abs: float
    p_sq: float
    q_mean: Tuple[float, ...]
    p_mean: Tuple[float, ...]

    @property
    def combined(self) -> float:
        """(2π)^{-d}∫(|q| + |p|²) m, the moment tracked along the dynamics."""
        return self.q_abs + self.p_sq

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "combined": self.combined}


def phase_moments(m: NDArray[np.float64], grid: PhaseGrid) -> PhaseMoments:
    """Moments of a grid function; q is measured from the origin by minimum image."""
    if m.shape != grid.shape:
        raise InvalidInput(f"Grid function of shape {m.shape} does not live on a grid of shape {grid.shape}")
    weighted = m * grid.cell_weights
    rho = weighted.sum(axis=1)
    pi = weighted.sum(axis=0)
    q = grid.centered_q()
    return PhaseMoments(
        mass=float(rho.sum()),
        q_abs=float(rho @ np.linalg.norm(q, axis=-1)),
        p_sq=float(pi @ np.sum(grid.p_points**2, axis=-1)),
        q_mean=tuple(float(x) for x in rho @ q),
        p_mean=tuple(float(x) for x in pi @ grid.p_points),
    )
