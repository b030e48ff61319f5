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
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import nnls  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidInput
from twospecies.fock.density import expect_kinetic
from twospecies.fock.state import ManyBodyState
from twospecies.husimi.transform import HusimiMeasure
from twospecies.logs import get_logger
from twospecies.potentials import PotentialSet

logger = get_logger("Moments")

ENVELOPE_FACTOR = 2.0


def slot_moment_weight(m: HusimiMeasure) -> NDArray[np.float64]:
    """|q| + |p|² per phase point, q by minimum image from the origin."""
    grid = m.grid
    q_abs = np.linalg.norm(grid.centered_q(), axis=-1)
    p_sq = np.sum(grid.p_points**2, axis=-1)
    return q_abs[:, None] + p_sq[None, :]


def phase_space_moment(m: HusimiMeasure) -> float:
    """(2π)^{-d(k+ℓ)}∫ Σ_slots (|q_r| + |p_r|²) m."""
    weight = slot_moment_weight(m)
    total = 0.0
    for slot in range(m.rank):
        values = m.integrate_slot(slot, weight)
        for _ in range(m.rank - 1):
            values = np.tensordot(values, m.grid.cell_weights, axes=([0, 1], [0, 1]))
        total += float(values)
    return total


@dataclass(frozen=True)
class MomentReport:
    times: Tuple[float, ...]
    moments: Tuple[float, ...]
    envelope: float

    @property
    def exceeded(self) -> bool:
        return any(
            value > ENVELOPE_FACTOR * self.envelope * (1.0 + t**3) for t, value in zip(self.times, self.moments)
        )


def moment_bounds(trajectory: Sequence[Tuple[float, HusimiMeasure]]) -> MomentReport:
    """Fits moment(t) ≈ a + c·t³ with a, c ≥ 0; the envelope C = max(a, c) bounds moment ≤ C(1 + t³)."""
    if not trajectory:
        raise InvalidInput("Moment bounds need at least one snapshot")
    times = tuple(float(t) for t, _ in trajectory)
    moments = tuple(phase_space_moment(m) for _, m in trajectory)
    cubes = np.asarray(times) ** 3
    design = np.column_stack([np.ones_like(cubes), cubes])
    coefficients: NDArray[np.float64] = nnls(design, np.asarray(moments))[0]
    envelope = float(np.max(coefficients))
    report = MomentReport(times=times, moments=moments, envelope=envelope)
    if report.exceeded:
        logger.warning(f"Phase-space moments exceed {ENVELOPE_FACTOR}x the cubic envelope C={envelope:.4g}")
    return report


@dataclass(frozen=True)
class GrowthReport:
    species: int
    times: Tuple[float, ...]
    kinetic: Tuple[float, ...]
    constant: float

    def bound(self, t: float) -> float:
        return self.constant * self.kinetic[0] + self.constant * t**2

    @property
    def violations(self) -> List[float]:
        return [t for t, value in zip(self.times, self.kinetic) if value > self.bound(t) * (1.0 + 1e-12)]


def growth_constant(pots: PotentialSet, species: int, n1: float, n2: float) -> float:
    """C with ⟨K/N⟩_t ≤ C⟨K/N⟩_0 + C t², from the mean-field force bound on one particle."""
    if species == 1:
        force = n1 * pots.v11.sup_grad + n2 * pots.v12.sup_grad
    else:
        force = n2 * pots.v22.sup_grad + n1 * pots.v21.sup_grad
    return max(2.0, force**2)


def kinetic_growth_report(
    trajectory: Sequence[Tuple[float, ManyBodyState]], pots: PotentialSet, species: int = 1
) -> GrowthReport:
    if not trajectory:
        raise InvalidInput("Kinetic growth report needs at least one snapshot")
    ctx = trajectory[0][1].ctx
    times = tuple(float(t) for t, _ in trajectory)
    kinetic = tuple(expect_kinetic(state, species) / ctx.N for _, state in trajectory)
    report = GrowthReport(species, times, kinetic, growth_constant(pots, species, ctx.n1, ctx.n2))
    if report.violations:
        logger.warning(f"Species-{species} kinetic energy exceeds its growth bound at t={report.violations}")
    return report


@dataclass(frozen=True)
class RateReport:
    times: Tuple[float, ...]
    rates: Tuple[float, ...]
    bounds: Tuple[float, ...]

    @property
    def violations(self) -> List[float]:
        return [t for t, rate, bound in zip(self.times, self.rates, self.bounds) if abs(rate) > bound]


def q_moment_rate(
    trajectory: Sequence[Tuple[float, HusimiMeasure]], initial_kinetic: float, constant: float
) -> RateReport:
    """Central-difference rate of (2π)^{-d}∫|q| m^(1,0) against (2π)^d(1 + 2⟨K₁/N⟩₀ + Ct² + C√ℏ)."""
    if len(trajectory) < 3:
        raise InvalidInput("Position-moment rate needs at least three snapshots")
    values = []
    for _, m in trajectory:
        q_abs = np.linalg.norm(m.grid.centered_q(), axis=-1)
        weight = np.broadcast_to(q_abs[:, None], m.grid.shape)
        values.append(float(m.integrate_slot(0, weight)))
    times = [float(t) for t, _ in trajectory]
    rates = np.gradient(np.asarray(values), np.asarray(times))
    m0 = trajectory[0][1]
    hbar = m0.ctx.hbar
    scale = (2.0 * math.pi) ** m0.grid.d
    bounds = tuple(scale * (1.0 + 2.0 * initial_kinetic + constant * t**2 + constant * math.sqrt(hbar)) for t in times)
    report = RateReport(tuple(times), tuple(float(r) for r in rates), bounds)
    if report.violations:
        logger.warning(f"Position-moment rate exceeds its bound at t={report.violations}")
    return report
