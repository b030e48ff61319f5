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
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import BlowUp, InvalidInput
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.logs import get_logger
from twospecies.potentials import PotentialSet
from twospecies.vlasov.distribution import CLIP_FLOOR, SpeciesPairDistribution, density, mass
from twospecies.vlasov.forces import ConvolutionMethod, KernelCache, force_field, potential_energy

BLOWUP_FACTOR = 1e3
SPLINE_ORDER = 3
# shifts this close to a whole number of cells are applied as index rotations
INTEGER_SHIFT_TOLERANCE = 1e-9
# mass deviations below this relative size are left alone
RESCALE_SLACK = 1e-13

CONSERVATION_COLUMNS = ("t", "mass1", "mass2", "momentum", "energy", "clipped_mass")


@dataclass(frozen=True)
class ConservedQuantities:
    mass1: float
    mass2: float
    momentum: Tuple[float, ...]
    energy: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mass1": self.mass1,
            "mass2": self.mass2,
            "momentum": self.momentum[0] if len(self.momentum) == 1 else list(self.momentum),
            "energy": self.energy,
        }


def conserved_quantities(
    state: SpeciesPairDistribution, pots: PotentialSet, cache: Optional[KernelCache] = None
) -> ConservedQuantities:
    grid = state.grid
    p_sq = np.sum(grid.p_points**2, axis=-1)
    momentum = np.zeros(grid.d)
    kinetic = 0.0
    for values in (state.m1, state.m2):
        weighted = values * grid.cell_weights
        momentum += np.sum(weighted, axis=0) @ grid.p_points
        kinetic += 0.5 * float(np.sum(weighted, axis=0) @ p_sq)
    rho1, rho2 = state.densities
    energy = kinetic + potential_energy(rho1, rho2, pots, grid, cache)
    m1, m2 = state.masses
    return ConservedQuantities(m1, m2, tuple(float(x) for x in momentum), energy)


@dataclass(frozen=True)
class ConservationRecord:
    t: float
    quantities: ConservedQuantities
    clipped_mass: float

    def to_row(self) -> List[float]:
        momentum = self.quantities.momentum
        return [
            self.t,
            self.quantities.mass1,
            self.quantities.mass2,
            momentum[0] if len(momentum) == 1 else float(np.linalg.norm(momentum)),
            self.quantities.energy,
            self.clipped_mass,
        ]


@dataclass
class VlasovTrajectory:
    snapshots: List[SpeciesPairDistribution] = field(default_factory=list)
    log: List[ConservationRecord] = field(default_factory=list)

    @property
    def final(self) -> SpeciesPairDistribution:
        return self.snapshots[-1]

    @property
    def times(self) -> List[float]:
        return [s.t for s in self.snapshots]

    def drift(self, quantity: str) -> float:
        """Largest relative deviation of a logged scalar from its initial value."""
        column = CONSERVATION_COLUMNS.index(quantity)
        values = np.asarray([record.to_row()[column] for record in self.log])
        scale = max(abs(values[0]), 1e-300)
        return float(np.max(np.abs(values - values[0]))) / scale


def _shift_periodic(block: NDArray[np.float64], shift: NDArray[np.float64]) -> NDArray[np.float64]:
    rounded = np.round(shift)
    if np.all(np.abs(shift - rounded) <= INTEGER_SHIFT_TOLERANCE):
        if not np.any(rounded):
            return block.copy()
        return np.roll(block, tuple(int(s) for s in rounded), axis=tuple(range(block.ndim)))
    return ndimage.shift(block, shift, order=SPLINE_ORDER, mode="grid-wrap")


def advect_q(values: NDArray[np.float64], grid: PhaseGrid, tau: float) -> NDArray[np.float64]:
    """m(q, p) → m(q − pτ, p), periodic in q."""
    blocks = values.reshape((grid.n_q,) * grid.d + (grid.shape[1],))
    out = np.empty_like(blocks)
    for j, p in enumerate(grid.p_points):
        out[..., j] = _shift_periodic(blocks[..., j], p * tau / grid.dq)
    return out.reshape(values.shape)


def advect_p(
    values: NDArray[np.float64], grid: PhaseGrid, force: NDArray[np.float64], tau: float
) -> NDArray[np.float64]:
    """m(q, p) → m(q, p + F(q)τ), zero inflow at ±p_max."""
    blocks = values.reshape((grid.shape[0],) + (grid.n_p,) * grid.d)
    out = np.empty_like(blocks)
    for i in range(grid.shape[0]):
        shift = -force[i] * tau / grid.dp
        if not np.any(shift):
            out[i] = blocks[i]
            continue
        out[i] = ndimage.shift(blocks[i], shift, order=SPLINE_ORDER, mode="grid-constant", cval=0.0)
    return out.reshape(values.shape)


def _clip(values: NDArray[np.float64], grid: PhaseGrid) -> Tuple[NDArray[np.float64], float]:
    negative = values < CLIP_FLOOR
    if not np.any(negative):
        return values, 0.0
    clipped = float(-np.sum(values[negative] * grid.cell_weights[negative]))
    return np.where(negative, 0.0, values), clipped


def _rescale(values: NDArray[np.float64], grid: PhaseGrid, target: float) -> NDArray[np.float64]:
    current = mass(values, grid)
    if target == 0.0 or current <= 0.0 or abs(current - target) <= RESCALE_SLACK * abs(target):
        return values
    return values * (target / current)


class VlasovSolver:
    """Strang-split semi-Lagrangian solver: half q-advection, full p-advection in the frozen force, half q-advection."""

    logger = get_logger("Vlasov")

    def __init__(
        self,
        pots: PotentialSet,
        grid: PhaseGrid,
        method: ConvolutionMethod = ConvolutionMethod.AUTO,
    ):
        self.pots = pots
        self.grid = grid
        self.method = method
        self.cache = KernelCache(pots, grid)

    def advance(
        self, state: SpeciesPairDistribution, dt: float, reference_max: Optional[float] = None
    ) -> Tuple[SpeciesPairDistribution, float]:
        """One step; returns the new state and the mass removed by clipping."""
        grid = self.grid
        if state.grid is not grid:
            state.grid.check_compatible(grid)
        if dt * grid.p_max > grid.box_length:
            raise InvalidInput(f"dt={dt} moves the fastest particle further than the box length {grid.box_length}")
        reference = reference_max if reference_max is not None else state.max_abs
        targets = state.masses
        m1 = advect_q(state.m1, grid, 0.5 * dt)
        m2 = advect_q(state.m2, grid, 0.5 * dt)
        if not self.pots.is_zero:
            forces = force_field(density(m1, grid), density(m2, grid), self.pots, grid, self.method, self.cache)
            m1 = advect_p(m1, grid, forces.f1, dt)
            m2 = advect_p(m2, grid, forces.f2, dt)
        m1 = advect_q(m1, grid, 0.5 * dt)
        m2 = advect_q(m2, grid, 0.5 * dt)
        clipped = 0.0
        results = []
        for values, target in ((m1, targets[0]), (m2, targets[1])):
            values, removed = _clip(values, grid)
            clipped += removed
            results.append(_rescale(values, grid, target))
        new_state = state.with_values(results[0], results[1], state.t + dt)
        peak = new_state.max_abs
        if reference > 0.0 and peak > BLOWUP_FACTOR * reference:
            raise BlowUp(
                f"max|m|={peak:.4g} exceeds {BLOWUP_FACTOR:g}x the initial maximum {reference:.4g} "
                f"at t={new_state.t:.6g}"
            )
        if clipped > 0.0:
            self.logger.debug(f"Clipped mass {clipped:.3e} at t={new_state.t:.6g}")
        return new_state, clipped

    def step(self, state: SpeciesPairDistribution, dt: float) -> SpeciesPairDistribution:
        new_state, _ = self.advance(state, dt)
        return new_state

    def run(
        self,
        initial: SpeciesPairDistribution,
        t_final: float,
        dt: float,
        snapshot_times: Optional[Sequence[float]] = None,
    ) -> VlasovTrajectory:
        """Steps to t_final with a step no longer than dt; snapshots at the step times nearest the requested ones."""
        if t_final < 0.0 or dt <= 0.0:
            raise InvalidInput(f"Vlasov run needs t_final ≥ 0 and dt > 0, got t_final={t_final}, dt={dt}")
        trajectory = VlasovTrajectory([initial], [ConservationRecord(initial.t, self.quantities(initial), 0.0)])
        if t_final == 0.0:
            return trajectory
        steps = max(1, math.ceil(t_final / dt - 1e-12))
        tau = t_final / steps
        wanted = {steps}
        for t in snapshot_times or ():
            if 0.0 < t <= t_final:
                wanted.add(int(round(t / tau)))
        self.logger.info(f"Running Vlasov solver to t={t_final} in {steps} steps on {self.grid.describe()}...")
        reference = initial.max_abs
        state = initial
        total_clipped = 0.0
        for n in range(1, steps + 1):
            state, clipped = self.advance(state, tau, reference)
            total_clipped += clipped
            trajectory.log.append(ConservationRecord(state.t, self.quantities(state), clipped))
            if n in wanted:
                trajectory.snapshots.append(state)
        self.logger.info(
            f"Vlasov run finished: mass drift {trajectory.drift('mass1'):.2e}/{trajectory.drift('mass2'):.2e}, "
            f"energy drift {trajectory.drift('energy'):.2e}, clipped mass {total_clipped:.3e}"
        )
        return trajectory

    def quantities(self, state: SpeciesPairDistribution) -> ConservedQuantities:
        return conserved_quantities(state, self.pots, self.cache)


def step(state: SpeciesPairDistribution, pots: PotentialSet, dt: float) -> SpeciesPairDistribution:
    return VlasovSolver(pots, state.grid).step(state, dt)


def run(
    initial: SpeciesPairDistribution,
    pots: PotentialSet,
    t_final: float,
    dt: float,
    snapshot_times: Optional[Sequence[float]] = None,
    method: ConvolutionMethod = ConvolutionMethod.AUTO,
) -> VlasovTrajectory:
    return VlasovSolver(pots, initial.grid, method).run(initial, t_final, dt, snapshot_times)
