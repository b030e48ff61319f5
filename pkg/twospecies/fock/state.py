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

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twospecies.errors import DegenerateOrbitals, InvalidInput
from twospecies.fock.basis import SpeciesSector, TwoSpeciesBasis
from twospecies.fock.scaling import ScalingContext
from twospecies.logs import get_logger

GRAM_TOLERANCE = 1e-8
RANK_TOLERANCE = 1e-10

logger = get_logger("State")


@dataclass(frozen=True)
class ManyBodyState:
    """Amplitudes over a sector basis. `counts` tracks (N1, N2) after ladder operators move the sector."""

    amplitudes: NDArray[np.complex128]
    basis: TwoSpeciesBasis
    counts: Tuple[int, int]

    @classmethod
    def in_sector(cls, amplitudes: ArrayLike, basis: TwoSpeciesBasis) -> ManyBodyState:
        values = np.asarray(amplitudes, dtype=np.complex128)
        if values.shape != (basis.dim,):
            raise InvalidInput(f"Amplitude vector of shape {values.shape} does not match basis dimension {basis.dim}")
        return cls(values, basis, (basis.ctx.N1, basis.ctx.N2))

    @property
    def ctx(self) -> ScalingContext:
        return self.basis.ctx

    @property
    def sectors(self) -> Tuple[SpeciesSector, SpeciesSector]:
        return self.basis.sector(1, self.counts[0]), self.basis.sector(2, self.counts[1])

    @property
    def matrix(self) -> NDArray[np.complex128]:
        """Amplitudes as a (dim1, dim2) array; species 1 indexes rows."""
        first, second = self.sectors
        return self.amplitudes.reshape(first.dim, second.dim)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= 1e-10

    def with_amplitudes(self, amplitudes: NDArray[np.complex128]) -> ManyBodyState:
        return ManyBodyState(amplitudes, self.basis, self.counts)

    def overlap(self, other: ManyBodyState) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __add__(self, other: ManyBodyState) -> ManyBodyState:
        if self.counts != other.counts:
            raise InvalidInput(f"Cannot add states from sectors {self.counts} and {other.counts}")
        return self.with_amplitudes(self.amplitudes + other.amplitudes)

    def __sub__(self, other: ManyBodyState) -> ManyBodyState:
        if self.counts != other.counts:
            raise InvalidInput(f"Cannot subtract states from sectors {self.counts} and {other.counts}")
        return self.with_amplitudes(self.amplitudes - other.amplitudes)


def _check_site(basis: TwoSpeciesBasis, species: int, site: int) -> None:
    if species not in (1, 2):
        raise InvalidInput(f"Species must be 1 or 2, got {species}")
    if not 0 <= site < basis.n_sites:
        raise InvalidInput(f"Site {site} outside the lattice of {basis.n_sites} sites")


def apply_annihilation(state: ManyBodyState, species: int, site: int) -> ManyBodyState:
    _check_site(state.basis, species, site)
    n1, n2 = state.counts
    psi = state.matrix
    if species == 1:
        upper = state.basis.sector(1, n1)
        lower = state.basis.sector(1, n1 - 1)
        out = upper.annihilator(site, lower) @ psi
        counts = (n1 - 1, n2)
    else:
        upper = state.basis.sector(2, n2)
        lower = state.basis.sector(2, n2 - 1)
        # species-2 operators act on columns with no species-1 parity string
        out = (upper.annihilator(site, lower) @ psi.T).T
        counts = (n1, n2 - 1)
    return ManyBodyState(np.ascontiguousarray(out).reshape(-1).astype(np.complex128), state.basis, counts)


def apply_creation(state: ManyBodyState, species: int, site: int) -> ManyBodyState:
    _check_site(state.basis, species, site)
    n1, n2 = state.counts
    psi = state.matrix
    if species == 1:
        upper = state.basis.sector(1, n1 + 1)
        lower = state.basis.sector(1, n1)
        out = upper.annihilator(site, lower).T @ psi
        counts = (n1 + 1, n2)
    else:
        upper = state.basis.sector(2, n2 + 1)
        lower = state.basis.sector(2, n2)
        out = (upper.annihilator(site, lower).T @ psi.T).T
        counts = (n1, n2 + 1)
    return ManyBodyState(np.ascontiguousarray(out).reshape(-1).astype(np.complex128), state.basis, counts)


def orthonormalize(orbitals: NDArray[np.complex128], species: int) -> NDArray[np.complex128]:
    """Returns orbitals (rows) with identity Gram matrix, via QR when the input is not already orthonormal."""
    if orbitals.shape[0] == 0:
        return orbitals
    singular = np.linalg.svd(orbitals, compute_uv=False)
    if singular[-1] <= RANK_TOLERANCE * max(singular[0], 1.0):
        raise DegenerateOrbitals(
            f"Species-{species} orbitals are linearly dependent (smallest singular value {singular[-1]:.3e})"
        )
    gram = orbitals.conj() @ orbitals.T
    if np.max(np.abs(gram - np.eye(orbitals.shape[0]))) <= GRAM_TOLERANCE:
        return orbitals
    logger.debug(f"Orthonormalizing {orbitals.shape[0]} species-{species} orbitals")
    q, r = np.linalg.qr(orbitals.T)
    # keep the orientation of each input orbital
    q = q * np.sign(np.real(np.diag(r)))
    return q.T


def _determinants(orbitals: NDArray[np.complex128], sector: SpeciesSector) -> NDArray[np.complex128]:
    count = orbitals.shape[0]
    if count == 0:
        return np.ones(sector.dim, dtype=np.complex128)
    # minors[s, i, j] = φ_i(y_j) for the ascending occupied sites y_j of state s
    minors = np.transpose(orbitals[:, sector.occupied], (1, 0, 2))
    return np.linalg.det(minors)


def slater_initial_state(
    orbitals1: Sequence[ArrayLike] | NDArray[np.complex128],
    orbitals2: Sequence[ArrayLike] | NDArray[np.complex128],
    basis: TwoSpeciesBasis,
) -> ManyBodyState:
    n_sites = basis.n_sites
    families = []
    for species, orbitals in ((1, orbitals1), (2, orbitals2)):
        rows = np.asarray(orbitals, dtype=np.complex128).reshape(-1, n_sites)
        expected = basis.ctx.count(species)
        if rows.shape[0] != expected:
            raise InvalidInput(f"Expected {expected} species-{species} orbitals, got {rows.shape[0]}")
        families.append(orthonormalize(rows, species))
    first = _determinants(families[0], basis.species1)
    second = _determinants(families[1], basis.species2)
    amplitudes = np.outer(first, second).reshape(-1)
    norm = np.linalg.norm(amplitudes)
    if norm <= RANK_TOLERANCE:
        raise DegenerateOrbitals("Slater determinant vanishes on the lattice")
    return ManyBodyState.in_sector(amplitudes / norm, basis)
