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

import itertools
import math
from typing import Dict, Iterable, Iterator, List, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import CapacityExceeded
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.logs import get_logger

DEFAULT_CAPACITY = 5_000_000

logger = get_logger("Basis")


def _rank_table(n_sites: int, count: int) -> NDArray[np.int64]:
    """C(pos, k) for pos < n_sites and k ≤ count, saturated at the int64 ceiling."""
    ceiling = int(np.iinfo(np.int64).max)
    table = np.zeros((max(n_sites, 1), count + 1), dtype=np.int64)
    for pos in range(n_sites):
        for k in range(count + 1):
            table[pos, k] = min(math.comb(pos, k), ceiling)
    return table


class SpeciesSector:
    """Fixed-number occupation states of one species, in ascending bitset order.

    Each state is a row of ascending occupied sites y_0 < ... < y_{n-1}; its index is the
    colexicographic rank Σ_j C(y_j, j + 1), which is the position of its bitset in ascending order.
    """

    def __init__(self, n_sites: int, count: int):
        self.n_sites = n_sites
        self.count = count
        width = max(count, 0)
        self._ranks = _rank_table(n_sites, width)
        if count < 0 or count > n_sites:
            self.occupied = np.zeros((0, width), dtype=np.int64)
        else:
            combos = list(itertools.combinations(range(n_sites), count))
            lex = np.array(combos, dtype=np.int64).reshape(len(combos), count)
            self.occupied = np.empty_like(lex)
            self.occupied[self.rank(lex)] = lex
        self._occupations: NDArray[np.int8] | None = None
        self._states: NDArray[np.object_] | None = None
        self._annihilators: Dict[int, sparse.csr_matrix] = {}

    @property
    def dim(self) -> int:
        return int(self.occupied.shape[0])

    @property
    def occupations(self) -> NDArray[np.int8]:
        if self._occupations is None:
            occ = np.zeros((self.dim, self.n_sites), dtype=np.int8)
            np.put_along_axis(occ, self.occupied, np.int8(1), axis=1)
            self._occupations = occ
        return self._occupations

    @property
    def states(self) -> NDArray[np.object_]:
        """Bitsets as unbounded Python ints."""
        if self._states is None:
            self._states = np.array([sum(1 << int(site) for site in row) for row in self.occupied], dtype=object)
        return self._states

    def rank(self, occupied: NDArray[np.int64]) -> NDArray[np.int64]:
        """Indices of rows of ascending occupied sites."""
        if occupied.shape[1] == 0:
            return np.zeros(occupied.shape[0], dtype=np.int64)
        columns = np.arange(1, occupied.shape[1] + 1)
        return self._ranks[occupied, columns].sum(axis=1)

    def index_of(self, bitsets: Iterable[int]) -> NDArray[np.int64]:
        rows: List[List[int]] = []
        for value in bitsets:
            bits = int(value)
            sites = [site for site in range(self.n_sites) if bits >> site & 1]
            if self.dim == 0 or bits < 0 or bits >> self.n_sites or len(sites) != self.count:
                raise KeyError(f"Bitset not in the {self.count}-particle sector")
            rows.append(sites)
        return self.rank(np.array(rows, dtype=np.int64).reshape(len(rows), self.count))

    def annihilator(self, site: int, lower: SpeciesSector) -> sparse.csr_matrix:
        """Matrix of c_site from this sector into the (count − 1) sector, Jordan–Wigner signed."""
        cached = self._annihilators.get(site)
        if cached is not None:
            return cached
        if self.dim == 0 or lower.dim == 0:
            matrix = sparse.csr_matrix((lower.dim, self.dim), dtype=np.float64)
        else:
            hits = self.occupied == site
            source, slot = np.nonzero(hits)
            # slot is the number of occupied sites below `site`
            signs = 1.0 - 2.0 * (slot % 2)
            reduced = self.occupied[source][~hits[source]].reshape(source.size, self.count - 1)
            matrix = sparse.csr_matrix((signs, (lower.rank(reduced), source)), shape=(lower.dim, self.dim))
        self._annihilators[site] = matrix
        return matrix


class TwoSpeciesBasis:
    """Product basis of the (N1, N2) sector; label index is i1 * dim2 + i2."""

    def __init__(self, lattice: LatticeConfig, ctx: ScalingContext, capacity: int = DEFAULT_CAPACITY):
        self.lattice = lattice
        self.ctx = ctx
        self.capacity = capacity
        self._sectors: Dict[Tuple[int, int], SpeciesSector] = {}
        self.species1 = self.sector(1, ctx.N1)
        self.species2 = self.sector(2, ctx.N2)

    def sector(self, species: int, count: int) -> SpeciesSector:
        key = (species, count)
        if key not in self._sectors:
            self._sectors[key] = SpeciesSector(self.lattice.n_sites, count)
        return self._sectors[key]

    def lowered(self, species: int, removed: int) -> SpeciesSector:
        return self.sector(species, self.ctx.count(species) - removed)

    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    @property
    def dims(self) -> Tuple[int, int]:
        return self.species1.dim, self.species2.dim

    @property
    def dim(self) -> int:
        return self.species1.dim * self.species2.dim

    def index_of(self, bits1: int, bits2: int) -> int:
        i1 = int(self.species1.index_of([bits1])[0])
        i2 = int(self.species2.index_of([bits2])[0])
        return i1 * self.species2.dim + i2

    def label(self, index: int) -> Tuple[int, int]:
        i1, i2 = divmod(index, self.species2.dim)
        return int(self.species1.states[i1]), int(self.species2.states[i2])

    def labels(self) -> Iterator[Tuple[int, int]]:
        for bits1 in self.species1.states:
            for bits2 in self.species2.states:
                yield int(bits1), int(bits2)

    def occupied_sites(self, bits: int) -> List[int]:
        return [site for site in range(self.n_sites) if bits >> site & 1]


def sector_dimension(n_sites: int, count: int) -> int:
    if count < 0 or count > n_sites:
        return 0
    return math.comb(n_sites, count)


def build_basis(
    lattice: LatticeConfig, ctx: ScalingContext, capacity: int = DEFAULT_CAPACITY
) -> TwoSpeciesBasis:
    lattice.check_context(ctx)
    dim = sector_dimension(lattice.n_sites, ctx.N1) * sector_dimension(lattice.n_sites, ctx.N2)
    if dim > capacity:
        raise CapacityExceeded(
            f"Basis dimension {dim} for N1={ctx.N1}, N2={ctx.N2} on {lattice.n_sites} sites exceeds the cap {capacity}"
        )
    logger.debug(f"Building basis of dimension {dim} on {lattice.n_sites} sites...")
    return TwoSpeciesBasis(lattice, ctx, capacity)
