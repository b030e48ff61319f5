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
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.fock.density import expect_kinetic
from twospecies.fock.scaling import ScalingContext
from twospecies.fock.state import ManyBodyState
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import PASSIVITY_SLACK, HusimiMeasure
from twospecies.logs import get_logger

logger = get_logger("Checks")

PASSIVITY_FLOOR = -1e-9
SYMMETRY_TOLERANCE = 1e-10
L1_TOLERANCE = 1e-5
RECURSION_TOLERANCE = 1e-4


def falling_ratio(count: int, order: int, total: int) -> float:
    """count(count−1)…(count−order+1) / total^order."""
    value = 1.0
    for j in range(order):
        value *= (count - j) / total
    return value


@dataclass(frozen=True)
class PropertyReport:
    k: int
    ell: int
    symmetry_gap: float
    min_value: float
    max_value: float
    l1_value: float
    l1_expected: float
    recursion_gaps: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def l1_error(self) -> float:
        if self.l1_expected == 0.0:
            return abs(self.l1_value)
        return abs(self.l1_value - self.l1_expected) / abs(self.l1_expected)

    def flags(
        self, l1_tolerance: float = L1_TOLERANCE, recursion_tolerance: float = RECURSION_TOLERANCE
    ) -> Dict[str, bool]:
        recursion = [gap for gap in self.recursion_gaps.values() if gap is not None]
        return {
            "symmetry": self.symmetry_gap <= SYMMETRY_TOLERANCE,
            "passivity": self.min_value >= PASSIVITY_FLOOR and self.max_value <= 1.0 + PASSIVITY_SLACK,
            "l1_norm": self.l1_error <= l1_tolerance,
            "recursion": all(gap <= recursion_tolerance for gap in recursion),
        }

    def passed(self, **tolerances: float) -> bool:
        return all(self.flags(**tolerances).values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "ell": self.ell,
            "symmetry_gap": self.symmetry_gap,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "l1_value": self.l1_value,
            "l1_expected": self.l1_expected,
            "l1_error": self.l1_error,
            **{f"recursion_{name}": gap for name, gap in self.recursion_gaps.items()},
            **self.flags(),
        }


def _symmetry_gap(m: HusimiMeasure) -> float:
    gap = 0.0
    for start, count in ((0, m.k), (m.k, m.ell)):
        for i in range(start, start + count):
            for j in range(i + 1, start + count):
                gap = max(gap, float(np.max(np.abs(m.values - m.swap_slots(i, j)))))
    return gap


def _recursion_gap(
    m: HusimiMeasure, species: int, lower: Mapping[Tuple[int, int], HusimiMeasure], ctx: ScalingContext
) -> Optional[float]:
    if species == 1:
        if m.k == 0:
            return None
        slot, key, factor = m.k - 1, (m.k - 1, m.ell), (ctx.N1 - m.k + 1) / ctx.N
    else:
        if m.ell == 0:
            return None
        slot, key, factor = m.rank - 1, (m.k, m.ell - 1), (ctx.N2 - m.ell + 1) / ctx.N
    if key == (0, 0):
        return None
    reference = lower.get(key)
    if reference is None:
        return None
    integrated = m.integrate_slot(slot)
    expected = factor * reference.values
    scale = max(float(np.max(np.abs(expected))), 1e-300)
    return float(np.max(np.abs(integrated - expected))) / scale


def check_properties(
    m: HusimiMeasure,
    ctx: ScalingContext,
    lower: Optional[Mapping[Tuple[int, int], HusimiMeasure]] = None,
) -> PropertyReport:
    """Block symmetry, passivity, L¹ norm and (given the lower levels) the recursion identities of m^(k,ℓ)."""
    lower = lower or {}
    report = PropertyReport(
        k=m.k,
        ell=m.ell,
        symmetry_gap=_symmetry_gap(m),
        min_value=float(np.min(m.values)),
        max_value=float(np.max(m.values)),
        l1_value=m.total(),
        l1_expected=expected_l1(ctx, m.k, m.ell),
        recursion_gaps={
            "species1": _recursion_gap(m, 1, lower, ctx),
            "species2": _recursion_gap(m, 2, lower, ctx),
        },
    )
    failed = [name for name, ok in report.flags().items() if not ok]
    if failed:
        logger.warning(f"m^({m.k},{m.ell}) failed checks: {', '.join(failed)}")
    return report


@dataclass(frozen=True)
class IdentityReport:
    kinetic: float
    p2_moment: float
    gradient_term: float

    @property
    def rhs(self) -> float:
        return self.p2_moment - self.gradient_term

    @property
    def abs_gap(self) -> float:
        return abs(self.kinetic - self.rhs)

    @property
    def rel_gap(self) -> float:
        scale = max(abs(self.kinetic), abs(self.rhs))
        return self.abs_gap / scale if scale > 0.0 else 0.0


def kinetic_identity(state: ManyBodyState, m10: HusimiMeasure, fam: CoherentFamily) -> IdentityReport:
    """⟨K₁/N⟩ against ½(2π)^{-d}∫|p|² m^(1,0) − ½(N₁/N)ℏ‖∇f‖²."""
    ctx = state.ctx
    p_squared = np.sum(m10.grid.p_points**2, axis=-1)
    weight = np.broadcast_to(p_squared, m10.grid.shape)
    p2_moment = 0.5 * float(m10.integrate_slot(0, weight))
    gradient_term = 0.5 * ctx.n1 * ctx.hbar * fam.gradient_norm_sq()
    kinetic = expect_kinetic(state, 1) / ctx.N
    return IdentityReport(kinetic=kinetic, p2_moment=p2_moment, gradient_term=gradient_term)


def overlap_resolution(fam: CoherentFamily, grid: PhaseGrid, vector: NDArray[np.complex128]) -> float:
    """(2πℏ)^{-d} Σ_{q,p} |⟨f^ℏ_{q,p}, g⟩|² dq dp for a lattice vector g; equals ‖g‖² on full-zone grids."""
    overlaps = np.abs(fam.windows(grid).conj() @ vector) ** 2
    return float(np.sum(overlaps * grid.cell_weights.reshape(-1))) / fam.hbar**fam.lattice.d


def expected_l1(ctx: ScalingContext, k: int, ell: int) -> float:
    return falling_ratio(ctx.N1, k, ctx.N) * falling_ratio(ctx.N2, ell, ctx.N)
