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
from typing import List, Sequence

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.hierarchy.family import HusimiFamily, tensor_power
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.logs import get_logger
from twospecies.potentials import PotentialSet
from twospecies.vlasov.distribution import SpeciesPairDistribution, density
from twospecies.vlasov.forces import convolve, kernel_matrix, sampled_gradient

logger = get_logger("Hierarchy")

POTENTIAL_NAMES = {(1, 1): "v11", (2, 2): "v22", (1, 2): "v12", (2, 1): "v12"}


def slot_species(k: int, ell: int) -> List[int]:
    return [1] * k + [2] * ell


def spectral_derivative(
    values: NDArray[np.float64], axis: int, n: int, spacing: float, d: int, component: int
) -> NDArray[np.float64]:
    """∂ along one coordinate of a flattened (n,)*d axis, treating it as periodic with period n·spacing."""
    shape = values.shape
    expanded = values.reshape(shape[:axis] + (n,) * d + shape[axis + 1 :])
    sub = axis + component
    wave = 2.0 * math.pi * np.fft.fftfreq(n, d=spacing)
    if n % 2 == 0:
        wave[n // 2] = 0.0
    broadcast = [1] * expanded.ndim
    broadcast[sub] = n
    transformed = np.fft.fft(expanded, axis=sub)
    derivative = np.fft.ifft(1j * wave.reshape(broadcast) * transformed, axis=sub).real
    return derivative.reshape(shape)


def q_derivative(values: NDArray[np.float64], grid: PhaseGrid, slot: int, component: int) -> NDArray[np.float64]:
    return spectral_derivative(values, 2 * slot, grid.n_q, grid.dq, grid.d, component)


def p_derivative(values: NDArray[np.float64], grid: PhaseGrid, slot: int, component: int) -> NDArray[np.float64]:
    return spectral_derivative(values, 2 * slot + 1, grid.n_p, grid.dp, grid.d, component)


def _slot_broadcast(array: NDArray[np.float64], rank: int, axis: int) -> NDArray[np.float64]:
    """Reshapes (n,) + trailing so that n sits on `axis` of a rank-slot grid tensor."""
    shape = [1] * (2 * rank) + list(array.shape[1:])
    shape[axis] = array.shape[0]
    return array.reshape(shape)


def transport_term(values: NDArray[np.float64], grid: PhaseGrid) -> NDArray[np.float64]:
    """−Σ_r p_r·∇_{q_r} m."""
    rank = values.ndim // 2
    out = np.zeros_like(values)
    for r in range(rank):
        for c in range(grid.d):
            momentum = _slot_broadcast(grid.p_points[:, c], rank, 2 * r + 1)
            out -= momentum * q_derivative(values, grid, r, c)
    return out


def collision_integral(
    upper: NDArray[np.float64], grid: PhaseGrid, kernel: NDArray[np.float64], slot: int, new_slot: int
) -> NDArray[np.float64]:
    """(2π)^{-d}∬ ∇V(q_slot − q') m(…, q', p', …) dq'dp' over the slot `new_slot` of a rank R+1 level.

    `slot` indexes the R remaining slots; the result has shape grid^R + (d,).
    """
    rank = upper.ndim // 2 - 1
    source = slot if slot < new_slot else slot + 1
    matrix = kernel_matrix(kernel, grid)
    component = 2 * (rank + 1)
    axes = list(range(2 * (rank + 1)))
    out_axes = [a for a in axes if a not in (2 * new_slot, 2 * new_slot + 1)] + [component]
    q_target, q_new = 2 * source, 2 * new_slot
    matrix_axes = [q_target, q_new, component]
    weight = grid.dq**grid.d / (2.0 * math.pi) ** grid.d
    return weight * np.einsum(upper, axes, grid.p_weights, [2 * new_slot + 1], matrix, matrix_axes, out_axes)


def _factorized_collision(
    family: HusimiFamily, k: int, ell: int, slot: int, partner: int, kernel: NDArray[np.float64]
) -> NDArray[np.float64]:
    grid = family.grid
    rank = k + ell
    rho = density(family.factors[partner - 1], grid)
    force = convolve(kernel, rho, grid)
    return family.level(k, ell)[..., None] * _slot_broadcast(force, rank, 2 * slot)


def collision_term(
    family: HusimiFamily, k: int, ell: int, slot: int, partner: int, pots: PotentialSet
) -> NDArray[np.float64]:
    """The collision field on `slot` of m^(k,ℓ) from a partner of the given species, shape grid^R + (d,)."""
    grid = family.grid
    alpha = slot_species(k, ell)[slot]
    pot = pots.pair(alpha, partner)
    shape = grid.shape * (k + ell) + (grid.d,)
    if pot.is_zero:
        return np.zeros(shape)
    kernel = sampled_gradient(pot, grid)
    if family.is_factorized:
        return _factorized_collision(family, k, ell, slot, partner, kernel)
    upper_key, new_slot = ((k + 1, ell), k) if partner == 1 else ((k, ell + 1), k + ell)
    if family.vanishes(*upper_key):
        return np.zeros(shape)
    return collision_integral(family.level(*upper_key), grid, kernel, slot, new_slot)


def p_divergence(field: NDArray[np.float64], grid: PhaseGrid, slot: int) -> NDArray[np.float64]:
    return sum(p_derivative(field[..., c], grid, slot, c) for c in range(grid.d))


def vlasov_hierarchy_rhs(family: HusimiFamily, k: int, ell: int, pots: PotentialSet) -> NDArray[np.float64]:
    """∂_t m^(k,ℓ) of the limit hierarchy: transport plus the four collision integrals."""
    if k < 0 or ell < 0 or k + ell == 0:
        raise InvalidInput(f"Hierarchy order ({k}, {ell}) must be non-negative and nonzero")
    grid = family.grid
    values = family.level(k, ell)
    rhs = transport_term(values, grid)
    for slot in range(k + ell):
        for partner in (1, 2):
            field = collision_term(family, k, ell, slot, partner, pots)
            if np.any(field):
                rhs += p_divergence(field, grid, slot)
    return rhs


def l1_norm(values: NDArray[np.float64], grid: PhaseGrid) -> float:
    out = np.abs(values)
    for _ in range(values.ndim // 2):
        out = np.tensordot(out, grid.cell_weights, axes=([0, 1], [0, 1]))
    return float(out)


def factorized_residual(
    snapshots: Sequence[SpeciesPairDistribution], pots: PotentialSet, k: int, ell: int, dt_probe: float
) -> float:
    """‖∂_t(m₁^⊗k⊗m₂^⊗ℓ) − RHS‖₁ / ‖RHS‖₁ with the time derivative from snapshots at t−δ, t, t+δ."""
    if len(snapshots) != 3:
        raise InvalidInput(f"Factorized residual needs snapshots at t−δ, t, t+δ, got {len(snapshots)}")
    if dt_probe <= 0.0:
        raise InvalidInput(f"dt_probe must be positive, got {dt_probe}")
    before, current, after = snapshots
    grid = current.grid
    derivative = (tensor_power(after.m1, after.m2, k, ell) - tensor_power(before.m1, before.m2, k, ell)) / (
        2.0 * dt_probe
    )
    family = HusimiFamily.from_factors(current.m1, current.m2, grid, current.ctx, k_max=max(1, min(k + ell, 3)))
    rhs = vlasov_hierarchy_rhs(family, k, ell, pots)
    gap = l1_norm(derivative - rhs, grid)
    scale = l1_norm(rhs, grid)
    residual = gap / scale if scale > 0.0 else gap
    logger.debug(f"Factorized residual at ({k},{ell}), t={current.t:.4g}: {residual:.3e}")
    return residual
