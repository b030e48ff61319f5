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
from typing import Union

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput, OrderTooHigh
from twospecies.fock.basis import TwoSpeciesBasis
from twospecies.fock.hamiltonian import kinetic_operator
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.fock.state import ManyBodyState

MAX_ORDER = 3

Species = Union[int, str]


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Continuum kernel γ^(k,ℓ)(u; w) sampled on lattice sites.

    Axes are ordered (u_1..u_k, ũ_1..ũ_ℓ, w_1..w_k, w̃_1..w̃_ℓ); `lattice_kernel` is γ·dx^{d(k+ℓ)},
    the matrix element between site-orthonormal modes.
    """

    k: int
    ell: int
    values: NDArray[np.complex128]
    lattice: LatticeConfig
    ctx: ScalingContext

    @property
    def rank(self) -> int:
        return self.k + self.ell

    @property
    def lattice_kernel(self) -> NDArray[np.complex128]:
        return self.values * self.lattice.cell_volume**self.rank

    def as_matrix(self) -> NDArray[np.complex128]:
        size = self.lattice.n_sites**self.rank
        return self.lattice_kernel.reshape(size, size)

    def trace(self) -> float:
        return float(np.real(np.trace(self.as_matrix())))

    def expected_trace(self) -> float:
        return _falling(self.ctx.N1, self.k) * _falling(self.ctx.N2, self.ell)

    def hermiticity_gap(self) -> float:
        matrix = self.as_matrix()
        return float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))

    def antisymmetry_gap(self) -> float:
        """Largest violation of γ → −γ under swapping two same-species arguments on the row side.

        The swap on both sides must leave γ unchanged; that is checked alongside.
        """
        gap = 0.0
        kernel = self.lattice_kernel
        rank = self.rank
        for start, count in ((0, self.k), (self.k, self.ell)):
            for i in range(start, start + count):
                for j in range(i + 1, start + count):
                    row = list(range(2 * rank))
                    row[i], row[j] = row[j], row[i]
                    both = list(row)
                    both[rank + i], both[rank + j] = both[rank + j], both[rank + i]
                    odd = np.max(np.abs(kernel + np.transpose(kernel, row)), initial=0.0)
                    even = np.max(np.abs(kernel - np.transpose(kernel, both)), initial=0.0)
                    gap = max(gap, float(odd), float(even))
        return gap


def _falling(n: int, k: int) -> float:
    if k > n:
        return 0.0
    return float(math.perm(n, k))


def _annihilate_columns(
    basis: TwoSpeciesBasis, block: NDArray[np.complex128], species: int, counts: tuple[int, int]
) -> NDArray[np.complex128]:
    """Applies c_x for every site x to each column block; new site axis goes last."""
    n1, n2 = counts
    if species == 1:
        upper, lower = basis.sector(1, n1), basis.sector(1, n1 - 1)
    else:
        upper, lower = basis.sector(2, n2), basis.sector(2, n2 - 1)
    pieces = []
    for site in range(basis.n_sites):
        op = upper.annihilator(site, lower)
        if species == 1:
            # block: (dim1, dim2, columns)
            rows, rest = block.shape[0], block.shape[1:]
            piece = (op @ block.reshape(rows, -1)).reshape((lower.dim,) + rest)
        else:
            moved = np.moveaxis(block, 1, 0)
            rows, rest = moved.shape[0], moved.shape[1:]
            piece = np.moveaxis((op @ moved.reshape(rows, -1)).reshape((lower.dim,) + rest), 0, 1)
        pieces.append(piece)
    return np.stack(pieces, axis=-1)


def _check_order(ctx: ScalingContext, k: int, ell: int) -> None:
    if k < 0 or ell < 0 or (k == 0 and ell == 0):
        raise InvalidInput(f"Reduced density order ({k}, {ell}) must be non-negative and nonzero")
    if k + ell > MAX_ORDER:
        raise OrderTooHigh(f"Reduced density order k+ℓ={k + ell} exceeds the cap {MAX_ORDER}")
    if k > ctx.N1 or ell > ctx.N2:
        raise OrderTooHigh(f"Order ({k}, {ell}) exceeds the particle numbers ({ctx.N1}, {ctx.N2})")


def _annihilated(state: ManyBodyState, k: int, ell: int) -> NDArray[np.complex128]:
    basis = state.basis
    block = state.matrix[:, :, None]
    counts = state.counts
    # columns of X are A_u Ψ with A_u = b_{ũ_ℓ}…b_{ũ_1} a_{u_k}…a_{u_1}; site axes accumulate in application order
    for _ in range(k):
        block = _annihilate_columns(basis, block.reshape(block.shape[0], block.shape[1], -1), 1, counts)
        counts = (counts[0] - 1, counts[1])
    for _ in range(ell):
        block = _annihilate_columns(basis, block.reshape(block.shape[0], block.shape[1], -1), 2, counts)
        counts = (counts[0], counts[1] - 1)
    # flattened column index is (u_1, ..., ũ_ℓ) in C order: the earliest site axis is outermost
    return block.reshape(block.shape[0] * block.shape[1], -1)


def _kernel(state: ManyBodyState, gram: NDArray[np.complex128], k: int, ell: int) -> ReducedDensityMatrix:
    lattice = state.basis.lattice
    rank = k + ell
    kernel = gram.reshape((lattice.n_sites,) * (2 * rank))
    return ReducedDensityMatrix(k, ell, kernel / lattice.cell_volume**rank, lattice, state.ctx)


def reduced_density(state: ManyBodyState, k: int, ell: int) -> ReducedDensityMatrix:
    _check_order(state.ctx, k, ell)
    columns = _annihilated(state, k, ell)
    return _kernel(state, columns.T @ columns.conj(), k, ell)


def transition_density(state: ManyBodyState, other: ManyBodyState, k: int, ell: int) -> ReducedDensityMatrix:
    """Kernel ⟨A_w Φ, A_u Ψ⟩ for Ψ = state and Φ = other; reduces to γ when both coincide."""
    _check_order(state.ctx, k, ell)
    if state.counts != other.counts:
        raise InvalidInput(f"States live in different sectors {state.counts} and {other.counts}")
    left = _annihilated(state, k, ell)
    right = _annihilated(other, k, ell)
    return _kernel(state, left.T @ right.conj(), k, ell)


def _species_set(species: Species) -> tuple[int, ...]:
    if species == "total":
        return (1, 2)
    if species in (1, 2):
        return (int(species),)
    raise InvalidInput(f"Unknown species '{species}'")


def expect_number(state: ManyBodyState, species: Species) -> float:
    weights = np.abs(state.matrix) ** 2
    total = 0.0
    for s in _species_set(species):
        sector = state.sectors[s - 1]
        counts = sector.occupations.sum(axis=1).astype(np.float64)
        marginal = weights.sum(axis=1) if s == 1 else weights.sum(axis=0)
        total += float(marginal @ counts)
    return total


def expect_number_moments(state: ManyBodyState, k: int, ell: int) -> float:
    weights = np.abs(state.matrix) ** 2
    ctx = state.ctx
    first, second = state.sectors
    ratio1 = first.occupations.sum(axis=1) / ctx.N1 if ctx.N1 else np.ones(first.dim)
    ratio2 = second.occupations.sum(axis=1) / ctx.N2 if ctx.N2 else np.ones(second.dim)
    return float(np.einsum("ij,i,j->", weights, ratio1**k, ratio2**ell))


def expect_kinetic(state: ManyBodyState, species: Species) -> float:
    total = 0.0
    for s in _species_set(species):
        operator = kinetic_operator(state.basis, s)
        total += float(np.real(np.vdot(state.amplitudes, operator @ state.amplitudes)))
    return total
