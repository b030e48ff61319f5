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

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput, MissingLevel, OrderTooHigh
from twospecies.fock.density import MAX_ORDER, reduced_density
from twospecies.fock.scaling import ScalingContext
from twospecies.fock.state import ManyBodyState
from twospecies.husimi.checks import PropertyReport, check_properties
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure, husimi_transform
from twospecies.logs import get_logger

DEFAULT_K_MAX = 2

logger = get_logger("Hierarchy")

Level = Tuple[int, int]


def levels_up_to(k_max: int, ctx: Optional[ScalingContext] = None) -> List[Level]:
    """Every (k, ℓ) with 1 ≤ k+ℓ ≤ k_max, bounded by the particle counts when a context is given."""
    levels = []
    for order in range(1, k_max + 1):
        for k in range(order, -1, -1):
            ell = order - k
            if ctx is not None and (k > ctx.N1 or ell > ctx.N2):
                continue
            levels.append((k, ell))
    return levels


def tensor_power(m1: NDArray[np.float64], m2: NDArray[np.float64], k: int, ell: int) -> NDArray[np.float64]:
    """m₁^⊗k ⊗ m₂^⊗ℓ with species-1 slots first."""
    if k + ell == 0:
        raise InvalidInput("Tensor power needs at least one slot")
    factors = [m1] * k + [m2] * ell
    values = factors[0]
    for factor in factors[1:]:
        values = np.multiply.outer(values, factor)
    return values


@dataclass(frozen=True, eq=False)
class HusimiFamily:
    """Truncated family {m^(k,ℓ)} on one phase grid.

    A family is either tabulated (`levels`) or factorized (`factors` = (m₁, m₂), every level
    being a tensor power). Tabulated families taken from a state know that levels beyond the
    particle counts vanish identically.
    """

    grid: PhaseGrid
    ctx: ScalingContext
    levels: Dict[Level, NDArray[np.float64]] = field(default_factory=dict)
    factors: Optional[Tuple[NDArray[np.float64], NDArray[np.float64]]] = None
    k_max: int = DEFAULT_K_MAX
    counts_bound: bool = False

    def __post_init__(self):
        if self.k_max < 1 or self.k_max > MAX_ORDER:
            raise OrderTooHigh(f"Family depth K_max={self.k_max} must lie in 1..{MAX_ORDER}")
        for (k, ell), values in self.levels.items():
            expected = self.grid.shape * (k + ell)
            if values.shape != expected:
                raise InvalidInput(f"Level ({k},{ell}) has shape {values.shape}, expected {expected}")
        if self.factors is not None:
            for values in self.factors:
                if values.shape != self.grid.shape:
                    raise InvalidInput(f"Factor of shape {values.shape} does not live on {self.grid.describe()}")

    @classmethod
    def from_state(
        cls, state: ManyBodyState, fam: CoherentFamily, grid: PhaseGrid, k_max: int = DEFAULT_K_MAX
    ) -> HusimiFamily:
        if k_max > MAX_ORDER:
            raise OrderTooHigh(f"Family depth K_max={k_max} exceeds the cap {MAX_ORDER}")
        levels = {}
        for k, ell in levels_up_to(k_max, state.ctx):
            levels[(k, ell)] = husimi_transform(reduced_density(state, k, ell), fam, grid).values
        logger.debug(f"Tabulated {len(levels)} Husimi levels up to order {k_max}")
        return cls(grid, state.ctx, levels, k_max=k_max, counts_bound=True)

    @classmethod
    def from_measures(cls, measures: Iterable[HusimiMeasure], k_max: int = DEFAULT_K_MAX) -> HusimiFamily:
        measures = list(measures)
        if not measures:
            raise InvalidInput("A Husimi family needs at least one level")
        grid, ctx = measures[0].grid, measures[0].ctx
        for m in measures[1:]:
            grid.check_compatible(m.grid)
        return cls(grid, ctx, {(m.k, m.ell): m.values for m in measures}, k_max=k_max)

    @classmethod
    def from_factors(
        cls,
        m1: NDArray[np.float64],
        m2: NDArray[np.float64],
        grid: PhaseGrid,
        ctx: ScalingContext,
        k_max: int = DEFAULT_K_MAX,
    ) -> HusimiFamily:
        return cls(grid, ctx, factors=(m1, m2), k_max=k_max)

    @property
    def is_factorized(self) -> bool:
        return self.factors is not None

    def has_level(self, k: int, ell: int) -> bool:
        try:
            self.level(k, ell)
        except MissingLevel:
            return False
        return True

    def vanishes(self, k: int, ell: int) -> bool:
        return self.counts_bound and (k > self.ctx.N1 or ell > self.ctx.N2)

    def level(self, k: int, ell: int) -> NDArray[np.float64]:
        if (k, ell) in self.levels:
            return self.levels[(k, ell)]
        if self.factors is not None and 1 <= k + ell <= self.k_max + 1:
            return tensor_power(self.factors[0], self.factors[1], k, ell)
        if self.vanishes(k, ell):
            return np.zeros(self.grid.shape * (k + ell))
        raise MissingLevel(f"Husimi family has no level ({k},{ell})")

    def measure(self, k: int, ell: int) -> HusimiMeasure:
        return HusimiMeasure(k, ell, self.level(k, ell), self.grid, self.ctx)

    def recursion_report(self) -> Dict[Level, PropertyReport]:
        """Symmetry, norm and recursion checks of every tabulated level against the levels below it."""
        measures = {key: self.measure(*key) for key in self.levels}
        return {key: check_properties(m, self.ctx, measures) for key, m in measures.items()}
