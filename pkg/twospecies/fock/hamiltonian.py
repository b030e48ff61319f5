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

import numpy as np
from numpy.typing import NDArray
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.fock.basis import SpeciesSector, TwoSpeciesBasis
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.logs import get_logger
from twospecies.potentials import Potential, PotentialSet, eval_potential

logger = get_logger("Hamiltonian")


def one_body_kinetic(lattice: LatticeConfig, hbar: float) -> sparse.csr_matrix:
    """(ℏ²/2)(−Δ) with the periodic central second-order stencil, as a site matrix."""
    n_sites = lattice.n_sites
    hop = hbar**2 / (2.0 * lattice.dx**2)
    rows, cols, values = [], [], []
    for site in range(n_sites):
        rows.append(site)
        cols.append(site)
        values.append(2.0 * lattice.d * hop)
        for neighbour in lattice.neighbours(site):
            rows.append(site)
            cols.append(neighbour)
            values.append(-hop)
    return sparse.csr_matrix((values, (rows, cols)), shape=(n_sites, n_sites))


def pair_matrix(lattice: LatticeConfig, pot: Potential, same_species: bool) -> NDArray[np.float64]:
    """V(x_a − x_b) at minimum image; the diagonal is dropped for same-species pairs."""
    values = eval_potential(pot, lattice.displacements())
    if same_species:
        np.fill_diagonal(values, 0.0)
    return values


def species_kinetic(sector: SpeciesSector, lower: SpeciesSector, hopping: sparse.csr_matrix) -> sparse.csr_matrix:
    """Σ_xy T_xy c†_x c_y restricted to one species sector."""
    coo = hopping.tocoo()
    total = sparse.csr_matrix((sector.dim, sector.dim), dtype=np.float64)
    for x, y, value in zip(coo.row, coo.col, coo.data):
        total = total + value * (sector.annihilator(int(x), lower).T @ sector.annihilator(int(y), lower))
    return total.tocsr()


def interaction_diagonal(basis: TwoSpeciesBasis, pots: PotentialSet) -> NDArray[np.float64]:
    """Diagonal of the (1/N)-weighted pair interaction in the label order of the basis."""
    lattice = basis.lattice
    occ1 = basis.species1.occupations.astype(np.float64)
    occ2 = basis.species2.occupations.astype(np.float64)
    inv_n = 1.0 / basis.ctx.N
    v11 = pair_matrix(lattice, pots.v11, same_species=True)
    v22 = pair_matrix(lattice, pots.v22, same_species=True)
    v12 = pair_matrix(lattice, pots.v12, same_species=False)
    e11 = 0.5 * np.einsum("is,st,it->i", occ1, v11, occ1)
    e22 = 0.5 * np.einsum("is,st,it->i", occ2, v22, occ2)
    e12 = occ1 @ v12 @ occ2.T
    return (inv_n * (e11[:, None] + e22[None, :] + e12)).reshape(-1)


def kinetic_operator(basis: TwoSpeciesBasis, species: int) -> sparse.csr_matrix:
    """Many-body kinetic operator K_α on the full sector basis."""
    hopping = one_body_kinetic(basis.lattice, basis.ctx.hbar)
    sector = basis.sector(species, basis.ctx.count(species))
    lower = basis.lowered(species, 1)
    local = species_kinetic(sector, lower, hopping)
    if species == 1:
        return sparse.kron(local, sparse.identity(basis.species2.dim), format="csr")
    return sparse.kron(sparse.identity(basis.species1.dim), local, format="csr")


def build_hamiltonian(basis: TwoSpeciesBasis, pots: PotentialSet) -> sparse.csr_matrix:
    ctx: ScalingContext = basis.ctx
    logger.debug(f"Assembling Hamiltonian of dimension {basis.dim} (N1={ctx.N1}, N2={ctx.N2}, hbar={ctx.hbar:.4g})")
    kinetic = kinetic_operator(basis, 1) + kinetic_operator(basis, 2)
    potential = sparse.diags(interaction_diagonal(basis, pots), format="csr")
    return (kinetic + potential).tocsr()
