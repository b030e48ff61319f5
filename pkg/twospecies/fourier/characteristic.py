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

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import (
    DepthExceedsFamily,
    ExtrapolationNeeded,
    InvalidConfig,
    InvalidInput,
    MismatchedGrids,
    MissingLevel,
    NormalizationGap,
    OrderTooHigh,
)
from twospecies.fock.density import MAX_ORDER
from twospecies.fock.scaling import ScalingContext
from twospecies.fourier.grid import FourierGrid
from twospecies.hierarchy.family import DEFAULT_K_MAX, Level, levels_up_to
from twospecies.hierarchy.limit import slot_species
from twospecies.husimi.checks import expected_l1
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure
from twospecies.logs import get_logger
from twospecies.vlasov.distribution import SpeciesPairDistribution

NORMALIZATION_TOLERANCE = 1e-4
MODULUS_TOLERANCE = 1e-6
# query points per plane-wave block
EVALUATION_CHUNK = 2048
# fractional index slack before a shifted node counts as outside the box
BOX_SLACK = 1e-9

logger = get_logger("Fourier")


class MassConvention(Enum):
    """How a level is normalized: falling ratios of the particle counts, or plain powers n₁^k n₂^ℓ."""

    FALLING = "falling"
    PRODUCT = "product"

    @classmethod
    def from_str(cls, kind: str) -> MassConvention:
        for candidate in cls:
            if candidate.value == kind:
                return candidate
        raise InvalidConfig(f"Unknown mass convention '{kind}'")


def level_mass(ctx: ScalingContext, k: int, ell: int, convention: MassConvention) -> float:
    if convention is MassConvention.FALLING:
        return expected_l1(ctx, k, ell)
    return ctx.n1**k * ctx.n2**ell


def outer_product(factors: Sequence[NDArray[np.complex128]]) -> NDArray[np.complex128]:
    values = factors[0]
    for factor in factors[1:]:
        values = np.multiply.outer(values, factor)
    return values


@dataclass(frozen=True, eq=False)
class CharSource:
    """Phase-space tensor whose characteristic function is evaluated exactly at any (ξ, η).

    With a nonzero `shift` s every evaluation returns μ(ξ − s·η, η), the interaction
    representation at time s.
    """

    values: NDArray[np.float64]
    grid: PhaseGrid
    mass: float
    shift: float = 0.0

    def __post_init__(self):
        rank = self.values.ndim // 2
        if rank < 1 or self.values.shape != self.grid.shape * rank:
            raise InvalidInput(f"Source of shape {self.values.shape} does not live on {self.grid.describe()}")
        if self.mass <= 0.0:
            raise InvalidInput(f"Source mass must be positive, got {self.mass}")

    @property
    def rank(self) -> int:
        return self.values.ndim // 2

    @property
    def cells(self) -> int:
        return self.grid.shape[0] * self.grid.shape[1]

    def shifted(self, t: float) -> CharSource:
        return replace(self, shift=self.shift + t)

    def plane_waves(self, xi: NDArray[np.float64], eta: NDArray[np.float64]) -> NDArray[np.complex128]:
        """(P, Nq·Np) matrix of cell-weighted e^{i((ξ − s·η)·p + η·q)} for P query points."""
        grid = self.grid
        along_q = eta @ grid.q_points.T
        along_p = (xi - self.shift * eta) @ grid.p_points.T
        waves = np.exp(1j * (along_q[:, :, None] + along_p[:, None, :])) * grid.cell_weights[None]
        return waves.reshape(xi.shape[0], -1)

    def at_origin(self) -> float:
        values = self.values
        for _ in range(self.rank):
            values = np.tensordot(values, self.grid.cell_weights, axes=([0, 1], [0, 1]))
        return float(values) / self.mass

    def evaluate(self, xi: NDArray[np.float64], eta: NDArray[np.float64]) -> NDArray[np.complex128]:
        """Rank-1 characteristic function at arbitrary points, shape (P,)."""
        if self.rank != 1:
            raise InvalidInput(f"Pointwise evaluation needs a rank-1 source, got rank {self.rank}")
        flat = self.values.reshape(-1)
        out = np.empty(xi.shape[0], dtype=complex)
        for start in range(0, xi.shape[0], EVALUATION_CHUNK):
            stop = start + EVALUATION_CHUNK
            out[start:stop] = self.plane_waves(xi[start:stop], eta[start:stop]) @ flat
        return out / self.mass

    def tabulate(self, fgrid: FourierGrid) -> NDArray[np.complex128]:
        xi, eta = fgrid.points()
        waves = self.plane_waves(xi, eta)
        out = self.values.reshape((self.cells,) * self.rank)
        for _ in range(self.rank):
            out = np.tensordot(out, waves, axes=([0], [1]))
        return out / self.mass

    def moments(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Mean position and mean momentum of a rank-1 source."""
        weighted = self.values * self.grid.cell_weights
        total = float(weighted.sum())
        center = weighted.sum(axis=1) @ self.grid.q_points / total
        momentum = weighted.sum(axis=0) @ self.grid.p_points / total
        return center, momentum


@dataclass(frozen=True, eq=False)
class CharFamily:
    """Characteristic functions μ^(k,ℓ) on a probe box.

    A level is read from `levels` (box values), or, for a factorized family, formed as the
    tensor product of the two first-level `factors`. `sources` keep the exact phase-space
    data behind tabulated levels so shifts and off-box evaluations stay exact. `t` is the
    interaction time already applied.
    """

    fgrid: FourierGrid
    ctx: ScalingContext
    levels: Dict[Level, NDArray[np.complex128]] = field(default_factory=dict)
    sources: Dict[Level, CharSource] = field(default_factory=dict)
    factors: Optional[Tuple[CharSource, CharSource]] = None
    k_max: int = DEFAULT_K_MAX
    t: float = 0.0

    def __post_init__(self):
        if self.k_max < 1 or self.k_max > MAX_ORDER:
            raise OrderTooHigh(f"Family depth K_max={self.k_max} must lie in 1..{MAX_ORDER}")
        for (k, ell), values in self.levels.items():
            expected = self.fgrid.shape(k + ell)
            if values.shape != expected:
                raise InvalidInput(f"Level ({k},{ell}) has shape {values.shape}, expected {expected}")
        for (k, ell), source in self.sources.items():
            if source.rank != k + ell:
                raise InvalidInput(f"Source for level ({k},{ell}) has rank {source.rank}")
        if self.factors is not None and any(f.rank != 1 for f in self.factors):
            raise InvalidInput("Factorized families need rank-1 factors")

    @property
    def is_factorized(self) -> bool:
        return self.factors is not None

    @cached_property
    def _factor_values(self) -> Tuple[NDArray[np.complex128], ...]:
        if self.factors is None:
            return ()
        return tuple(factor.tabulate(self.fgrid) for factor in self.factors)

    def factor(self, alpha: int) -> CharSource:
        if self.factors is None:
            raise MissingLevel("Family is not factorized")
        return self.factors[alpha - 1]

    def factor_values(self, alpha: int) -> NDArray[np.complex128]:
        if self.factors is None:
            raise MissingLevel("Family is not factorized")
        return self._factor_values[alpha - 1]

    def source(self, k: int, ell: int) -> Optional[CharSource]:
        return self.sources.get((k, ell))

    def has_level(self, k: int, ell: int) -> bool:
        return (k, ell) in self.levels or (self.factors is not None and 1 <= k + ell <= self.k_max + 1)

    def level(self, k: int, ell: int) -> NDArray[np.complex128]:
        if (k, ell) in self.levels:
            return self.levels[(k, ell)]
        if self.factors is not None and 1 <= k + ell <= self.k_max + 1:
            return outer_product([self.factor_values(alpha) for alpha in slot_species(k, ell)])
        raise MissingLevel(f"Characteristic family has no level ({k},{ell})")

    def available(self) -> List[Level]:
        if self.factors is not None:
            return levels_up_to(self.k_max)
        return sorted(self.levels, key=lambda key: (key[0] + key[1], -key[0]))

    def normalization_gaps(self) -> Dict[Level, float]:
        origin = self.fgrid.origin
        gaps = {}
        for k, ell in self.available():
            values = self.level(k, ell)
            gaps[(k, ell)] = float(abs(values[(origin,) * (k + ell)] - 1.0))
        return gaps

    def max_modulus(self) -> float:
        return max((float(np.max(np.abs(self.level(*key)))) for key in self.available()), default=0.0)

    def closure(self) -> CharFamily:
        """Factorized family built from the exact first-level sources."""
        if self.factors is not None:
            return self
        first, second = self.sources.get((1, 0)), self.sources.get((0, 1))
        if first is None or second is None:
            raise DepthExceedsFamily("Factorized closure needs exact sources for the levels (1,0) and (0,1)")
        return CharFamily(self.fgrid, self.ctx, factors=(first, second), k_max=self.k_max, t=self.t)

    def closure_gap(self) -> float:
        """sup |μ^(k,ℓ) − closure| over the tabulated levels of rank ≥ 2."""
        closed = self.closure()
        gap = 0.0
        for (k, ell), values in self.levels.items():
            if k + ell >= 2:
                gap = max(gap, float(np.max(np.abs(values - closed.level(k, ell)))))
        return gap


def _checked_source(
    values: NDArray[np.float64], grid: PhaseGrid, fgrid: FourierGrid, mass: float, label: str
) -> CharSource:
    if grid.d != fgrid.d:
        raise MismatchedGrids(f"{label} lives in d={grid.d}, the Fourier box in d={fgrid.d}")
    source = CharSource(values, grid, mass)
    gap = abs(source.at_origin() - 1.0)
    if gap > NORMALIZATION_TOLERANCE:
        raise NormalizationGap(f"{label} has μ(0) off 1 by {gap:.3e}; its mass does not match {mass:.6g}")
    return source


def to_characteristic(
    m: HusimiMeasure,
    fgrid: FourierGrid,
    convention: MassConvention = MassConvention.FALLING,
    k_max: int = DEFAULT_K_MAX,
) -> CharFamily:
    """Family holding the characteristic function of the single level m."""
    return characteristic_family([m], fgrid, convention, max(k_max, m.rank))


def characteristic_family(
    measures: Iterable[HusimiMeasure],
    fgrid: FourierGrid,
    convention: MassConvention = MassConvention.FALLING,
    k_max: int = DEFAULT_K_MAX,
) -> CharFamily:
    measures = list(measures)
    if not measures:
        raise InvalidInput("A characteristic family needs at least one level")
    ctx = measures[0].ctx
    sources, levels = {}, {}
    for m in measures:
        if m.rank > k_max:
            raise OrderTooHigh(f"Level ({m.k},{m.ell}) exceeds the family depth {k_max}")
        source = _checked_source(m.values, m.grid, fgrid, level_mass(ctx, m.k, m.ell, convention), f"m^({m.k},{m.ell})")
        sources[(m.k, m.ell)] = source
        levels[(m.k, m.ell)] = source.tabulate(fgrid)
    logger.debug(f"Tabulated {len(levels)} characteristic levels on {fgrid.describe()}")
    return CharFamily(fgrid, ctx, levels, sources, k_max=k_max)


def vlasov_characteristic(
    state: SpeciesPairDistribution, fgrid: FourierGrid, k_max: int = DEFAULT_K_MAX
) -> CharFamily:
    """Factorized family of m₁^⊗k ⊗ m₂^⊗ℓ, each factor normalized by its species mass n_α."""
    factors = tuple(
        _checked_source(state.species(alpha), state.grid, fgrid, state.ctx.fraction(alpha), f"m{alpha}")
        for alpha in (1, 2)
    )
    return CharFamily(fgrid, state.ctx, factors=(factors[0], factors[1]), k_max=k_max)


def interaction_characteristic(
    state: SpeciesPairDistribution, fgrid: FourierGrid, k_max: int = DEFAULT_K_MAX
) -> CharFamily:
    """μ̄ of a Vlasov state: its factorized family taken to the interaction representation at state.t."""
    return interaction_rep(vlasov_characteristic(state, fgrid, k_max), state.t)


def _shift_tabulated(
    values: NDArray[np.complex128], fgrid: FourierGrid, rank: int, t: float, extrapolate: bool
) -> NDArray[np.complex128]:
    dims = fgrid.unflattened(rank)
    coords = np.indices(dims, dtype=float)
    d = fgrid.d
    for slot in range(rank):
        for component in range(d):
            xi_axis = 2 * d * slot + component
            eta = -fgrid.xi_max + fgrid.spacing * coords[xi_axis + d]
            coords[xi_axis] -= t * eta / fgrid.spacing
    outside = np.any((coords < -BOX_SLACK) | (coords > fgrid.nodes - 1 + BOX_SLACK), axis=0)
    fraction = float(np.mean(outside))
    if fraction > 0.0:
        message = f"Shift by t={t:.4g} moves {fraction:.1%} of the probe nodes outside ±{fgrid.xi_max:.4g}"
        if not extrapolate:
            raise ExtrapolationNeeded(message, fraction)
        logger.warning(f"{message}; using the nearest boundary values there")
    tabulated = values.reshape(dims)
    flat_coords = coords.reshape(len(dims), -1)
    real: NDArray[np.float64] = ndimage.map_coordinates(tabulated.real, flat_coords, order=3, mode="nearest")
    imag: NDArray[np.float64] = ndimage.map_coordinates(tabulated.imag, flat_coords, order=3, mode="nearest")
    return (real + 1j * imag).reshape(fgrid.shape(rank))


def interaction_rep(family: CharFamily, t: float, extrapolate: bool = False) -> CharFamily:
    """μ̄(ξ₁, η₁, …) = μ(ξ₁ − η₁t, η₁, …) on every slot.

    Levels backed by a source are re-tabulated exactly; bare tabulated levels are
    interpolated with cubic splines.
    """
    if t == 0.0:
        return family
    sources = {key: source.shifted(t) for key, source in family.sources.items()}
    factors = None
    if family.factors is not None:
        factors = (family.factors[0].shifted(t), family.factors[1].shifted(t))
    levels = {}
    for key, values in family.levels.items():
        if key in sources:
            levels[key] = sources[key].tabulate(family.fgrid)
        else:
            levels[key] = _shift_tabulated(values, family.fgrid, key[0] + key[1], t, extrapolate)
    logger.debug(f"Interaction representation shifted by {t:.4g} to t={family.t + t:.4g}")
    return replace(family, levels=levels, sources=sources, factors=factors, t=family.t + t)
