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
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput, OrderTooHigh
from twospecies.fock.density import ReducedDensityMatrix, reduced_density
from twospecies.fock.hamiltonian import kinetic_operator, pair_matrix
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.fock.state import ManyBodyState
from twospecies.hierarchy.limit import collision_integral, l1_norm, slot_species
from twospecies.hierarchy.weak import ProbeBattery
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.dynamics import husimi_time_derivative
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import contract_slots, husimi_transform, real_part
from twospecies.logs import get_logger
from twospecies.potentials import Potential, PotentialSet, eval_grad_periodic, minimum_image
from twospecies.vlasov.forces import sampled_gradient

logger = get_logger("Remainders")

MAX_REMAINDER_ORDER = 2
PATH_NODES = 33
# imaginary residue allowed on the mean-value term, whose transverse part is quadrature
MEAN_VALUE_TOLERANCE = 1e-4

SCALAR = "scalar"
P_DIVERGENCE = "p_divergence"

# (slot species, partner species) -> name suffix
PAIR_SUFFIX = {(1, 1): "11", (1, 2): "12_1", (2, 1): "12_2", (2, 2): "22"}

REMAINDER_NAMES = (
    "transport_1",
    "transport_2",
    "potential_11",
    "potential_12_1",
    "potential_12_2",
    "potential_22",
    "commutator_11",
    "commutator_12",
    "commutator_22",
)

REMAINDER_COLUMNS = ("term", "k", "ell", "N", "hbar", "norm", "weak_norm")


@dataclass(frozen=True, eq=False)
class TermField:
    """A hierarchy term on the phase grid.

    Scalar terms have shape grid^R; divergence terms hold one vector field per slot,
    shape (R,) + grid^R + (d,), and enter the hierarchy as Σ_j ∇_{p_j}· of it.
    """

    kind: str
    values: NDArray[np.float64]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def l1(self, grid: PhaseGrid) -> float:
        if self.kind == SCALAR:
            return l1_norm(self.values, grid)
        return sum(
            l1_norm(self.values[j, ..., c], grid) for j in range(self.values.shape[0]) for c in range(grid.d)
        )

    def weak(self, battery: ProbeBattery, index: int) -> float:
        if self.is_zero:
            return 0.0
        if self.kind == SCALAR:
            return battery.pair_scalar(index, self.values)
        return battery.pair_divergence(index, self.values, "p")


@dataclass(frozen=True, eq=False)
class HierarchyTerms:
    """Every term of the (k,ℓ) quantum hierarchy at one state.

    `streaming` is −Σ_j p_j·∇_{q_j} m and collision_* are the limit collision fields; the rest are remainders.
    """

    k: int
    ell: int
    grid: PhaseGrid
    ctx: ScalingContext
    measure: NDArray[np.float64]
    fields: Dict[str, TermField] = field(default_factory=dict)

    def term(self, name: str) -> TermField:
        if name not in self.fields:
            raise InvalidInput(f"Unknown hierarchy term '{name}'")
        return self.fields[name]

    def group(self, prefix: str) -> List[TermField]:
        return [f for name, f in self.fields.items() if name.startswith(prefix)]


def path_gradient(lattice: LatticeConfig, pot: Potential, nodes: int = PATH_NODES) -> NDArray[np.float64]:
    """∫₀¹ ∇V(u + s·(w−u) − x) ds for all sites (u, w, x), with w−u taken by minimum image.

    Shape (S, S, S, d). Gauss–Legendre in s; the component along w−u is then replaced so that
    (w−u)·P = V(w−x) − V(u−x) holds exactly for the minimum-image potential the Hamiltonian uses,
    whose gradient jumps across half the box.
    """
    abscissae, weights = np.polynomial.legendre.leggauss(nodes)
    pos = lattice.positions
    disp = minimum_image(pos[None, :, :] - pos[:, None, :], lattice.length)
    out = np.zeros((lattice.n_sites,) * 3 + (lattice.d,))
    for node, weight in zip(0.5 * (abscissae + 1.0), 0.5 * weights):
        points = pos[:, None, None, :] + node * disp[:, :, None, :] - pos[None, None, :, :]
        out += weight * eval_grad_periodic(pot, points, lattice.length)
    values = pair_matrix(lattice, pot, same_species=False)
    jump = values[None, :, :] - values[:, None, :]
    length_sq = np.sum(disp**2, axis=-1)[:, :, None]
    along = np.einsum("uwc,uwxc->uwx", disp, out)
    correction = np.where(length_sq > 0.0, (jump - along) / np.where(length_sq > 0.0, length_sq, 1.0), 0.0)
    return out + correction[..., None] * disp[:, :, None, :]


def gradient_windows(fam: CoherentFamily, grid: PhaseGrid) -> NDArray[np.complex128]:
    """∇_q of the window envelope times its phase, shape (Nq·Np, S, d)."""
    envelope = -fam.envelope_gradients(grid.q_points)
    waves = fam.phases(grid.q_points, grid.p_points)
    stacked = envelope[:, None, :, :] * waves[..., None]
    return stacked.reshape(-1, fam.lattice.n_sites, fam.lattice.d)


def _check_chart(fam: CoherentFamily) -> None:
    diameter = 2.0 * fam.radius * math.sqrt(fam.hbar)
    if diameter >= 0.5 * fam.lattice.length:
        raise InvalidInput(
            f"Potential remainders need the window diameter {diameter:.4g} "
            f"below half the box {0.5 * fam.lattice.length:.4g}"
        )


def _streaming(
    kernel: NDArray[np.complex128],
    windows: NDArray[np.complex128],
    gradients: NDArray[np.complex128],
    species: List[int],
    alpha: int,
    grid: PhaseGrid,
) -> NDArray[np.float64]:
    """−Σ_j p_j·∇_{q_j} m over the slots of species α, with ∇_{q_j} m = 2 Re⟨a(∇_q f) …Ψ, a(f) …Ψ⟩."""
    rank = len(species)
    out = np.zeros(grid.shape * rank)
    for j, kind in enumerate(species):
        if kind != alpha:
            continue
        for c in range(grid.d):
            slots = [(windows, windows)] * rank
            slots[j] = (gradients[:, :, c], windows)
            slope = 2.0 * contract_slots(kernel, slots).real.reshape(grid.shape * rank)
            shape = [1] * (2 * rank)
            shape[2 * j + 1] = grid.shape[1]
            out -= grid.p_points[:, c].reshape(shape) * slope
    return out


def _mean_value_term(
    upper: NDArray[np.complex128],
    windows: NDArray[np.complex128],
    path: NDArray[np.float64],
    slot: int,
    new_slot: int,
    grid: PhaseGrid,
    n_total: int,
) -> NDArray[np.float64]:
    """(1/N) Σ_{u,w,x} W(z; u, w) ∫₀¹∇V(u_j + s(w_j−u_j) − x) ds ⟨a_x A_w Ψ, a_x A_u Ψ⟩, shape grid^R + (d,)."""
    rank = upper.ndim // 2 - 1
    diagonal = np.diagonal(upper, axis1=new_slot, axis2=rank + 1 + new_slot)
    weighted = np.einsum(
        diagonal,
        list(range(2 * rank + 1)),
        path,
        [slot, rank + slot, 2 * rank, 2 * rank + 1],
        list(range(2 * rank)) + [2 * rank + 1],
    )
    out = np.empty(grid.shape * rank + (grid.d,))
    for c in range(grid.d):
        contracted = contract_slots(weighted[..., c], [(windows, windows)] * rank)
        values = real_part(contracted, "mean-value collision term", tolerance=MEAN_VALUE_TOLERANCE)
        out[..., c] = values.reshape(grid.shape * rank) / n_total
    return out


def _pair_energy(
    matrix: NDArray[np.float64], pairs: List[Tuple[int, int]], rank: int
) -> Optional[NDArray[np.float64]]:
    """Σ over slot pairs (a < b) of V(u_a − u_b), broadcast to rank site axes."""
    if not pairs:
        return None
    n_sites = matrix.shape[0]
    total = np.zeros((n_sites,) * rank)
    for a, b in pairs:
        shape = [1] * rank
        shape[a] = shape[b] = n_sites
        total = total + matrix.reshape(shape)
    return total


def _commutator_term(
    kernel: NDArray[np.complex128],
    windows: NDArray[np.complex128],
    energy: NDArray[np.float64],
    grid: PhaseGrid,
    ctx: ScalingContext,
) -> NDArray[np.float64]:
    """(i/(Nℏ)) Σ W(z; u, w)[E(w) − E(u)] G(u; w)."""
    rank = energy.ndim
    difference = energy.reshape((1,) * rank + energy.shape) - energy.reshape(energy.shape + (1,) * rank)
    contracted = contract_slots(kernel * difference, [(windows, windows)] * rank)
    values = 1j / (ctx.N * ctx.hbar) * contracted
    return real_part(values, "commutator remainder").reshape(grid.shape * rank)


def hierarchy_terms(
    state: ManyBodyState,
    fam: CoherentFamily,
    grid: PhaseGrid,
    k: int,
    ell: int,
    pots: PotentialSet,
) -> HierarchyTerms:
    """Evaluates m^(k,ℓ), its transport remainders, the limit collision terms, and the interaction remainders."""
    if k < 0 or ell < 0 or k + ell == 0:
        raise InvalidInput(f"Hierarchy order ({k}, {ell}) must be non-negative and nonzero")
    if k + ell > MAX_REMAINDER_ORDER:
        raise OrderTooHigh(f"Remainders are evaluated up to k+ℓ={MAX_REMAINDER_ORDER}, got {k + ell}")
    fam.check_grid(grid)
    if not pots.is_zero:
        _check_chart(fam)
    ctx = state.ctx
    rank = k + ell
    species = slot_species(k, ell)
    lattice = fam.lattice
    gamma = reduced_density(state, k, ell)
    kernel = gamma.lattice_kernel
    windows = fam.windows(grid)
    measure = husimi_transform(gamma, fam, grid).values
    logger.info(f"Evaluating hierarchy terms at ({k},{ell}) on {grid.describe()}")

    fields: Dict[str, TermField] = {}
    gradients = gradient_windows(fam, grid)
    streaming = np.zeros(grid.shape * rank)
    for alpha in (1, 2):
        values = np.zeros(grid.shape * rank)
        if alpha in species:
            # the lattice hopping rate of m, less its streaming part
            hopping = kinetic_operator(state.basis, alpha)
            rate = husimi_time_derivative(state, hopping, fam, grid, k, ell).values
            main = _streaming(kernel, windows, gradients, species, alpha, grid)
            streaming += main
            values = rate - main
        fields[f"transport_{alpha}"] = TermField(SCALAR, values)
    fields["streaming"] = TermField(SCALAR, streaming)

    vector_shape = (rank,) + grid.shape * rank + (grid.d,)
    uppers: Dict[int, Optional[ReducedDensityMatrix]] = {}
    for partner in (1, 2):
        upper_counts = (k + 1, ell) if partner == 1 else (k, ell + 1)
        needed = any(not pots.pair(alpha, partner).is_zero for alpha in set(species))
        within = upper_counts[0] <= ctx.N1 and upper_counts[1] <= ctx.N2
        uppers[partner] = reduced_density(state, *upper_counts) if needed and within else None

    for (alpha, partner), suffix in PAIR_SUFFIX.items():
        main = np.zeros(vector_shape)
        full = np.zeros(vector_shape)
        pot = pots.pair(alpha, partner)
        upper = uppers[partner]
        if not pot.is_zero and upper is not None and alpha in species:
            new_slot = k if partner == 1 else rank
            upper_measure = husimi_transform(upper, fam, grid).values
            kernel_q = sampled_gradient(pot, grid)
            path = path_gradient(lattice, pot)
            for j, kind in enumerate(species):
                if kind != alpha:
                    continue
                main[j] = collision_integral(upper_measure, grid, kernel_q, j, new_slot)
                full[j] = _mean_value_term(upper.lattice_kernel, windows, path, j, new_slot, grid, ctx.N)
        fields[f"collision_{suffix}"] = TermField(P_DIVERGENCE, main)
        fields[f"potential_{suffix}"] = TermField(P_DIVERGENCE, full - main)

    first = [j for j, kind in enumerate(species) if kind == 1]
    second = [j for j, kind in enumerate(species) if kind == 2]
    groups = {
        "11": (pots.v11, True, [(a, b) for a in first for b in first if a < b]),
        "12": (pots.v12, False, [(a, b) for a in first for b in second]),
        "22": (pots.v22, True, [(a, b) for a in second for b in second if a < b]),
    }
    for suffix, (pot, same, pairs) in groups.items():
        energy = None if pot.is_zero else _pair_energy(pair_matrix(lattice, pot, same), pairs, rank)
        if energy is None:
            values = np.zeros(grid.shape * rank)
        else:
            values = _commutator_term(kernel, windows, energy, grid, ctx)
        fields[f"commutator_{suffix}"] = TermField(SCALAR, values)

    return HierarchyTerms(k, ell, grid, ctx, measure, fields)


@dataclass(frozen=True)
class RemainderNorm:
    l1: float
    weak: float


@dataclass(frozen=True, eq=False)
class RemainderReport:
    k: int
    ell: int
    ctx: ScalingContext
    terms: Dict[str, TermField]
    norms: Dict[str, RemainderNorm]

    @property
    def hbar(self) -> float:
        return self.ctx.hbar

    def values(self, name: str) -> NDArray[np.float64]:
        if name not in self.terms:
            raise InvalidInput(f"Unknown remainder '{name}'")
        return self.terms[name].values

    def is_zero(self, name: str) -> bool:
        return self.terms[name].is_zero

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "term": name,
                "k": self.k,
                "ell": self.ell,
                "N": self.ctx.N,
                "hbar": self.hbar,
                "norm": self.norms[name].l1,
                "weak_norm": self.norms[name].weak,
            }
            for name in REMAINDER_NAMES
        ]


def remainder_report(terms: HierarchyTerms, battery: Optional[ProbeBattery] = None) -> RemainderReport:
    battery = battery or ProbeBattery(terms.grid)
    selected = {name: terms.term(name) for name in REMAINDER_NAMES}
    norms = {}
    for name, term in selected.items():
        weak = max((abs(term.weak(battery, b)) for b in range(len(battery))), default=0.0)
        norms[name] = RemainderNorm(l1=term.l1(terms.grid), weak=weak)
    return RemainderReport(terms.k, terms.ell, terms.ctx, selected, norms)


def quantum_remainders(
    state: ManyBodyState,
    fam: CoherentFamily,
    grid: PhaseGrid,
    k: int,
    ell: int,
    pots: PotentialSet,
    battery: Optional[ProbeBattery] = None,
) -> RemainderReport:
    report = remainder_report(hierarchy_terms(state, fam, grid, k, ell, pots), battery)
    largest = max(report.norms.items(), key=lambda item: item[1].l1)
    logger.info(f"Remainders at ({k},{ell}), N={state.ctx.N}: largest {largest[0]} with L¹ norm {largest[1].l1:.3e}")
    return report
