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
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import BandLimitRequired, InvalidInput, MismatchedGrids, MissingLevel
from twospecies.fourier.characteristic import CharFamily, CharSource, interaction_characteristic, outer_product
from twospecies.fourier.grid import FourierGrid
from twospecies.hierarchy.family import Level, levels_up_to
from twospecies.hierarchy.limit import slot_species
from twospecies.logs import get_logger
from twospecies.potentials import Potential, PotentialSet, eval_fourier
from twospecies.vlasov.distribution import SpeciesPairDistribution

ETA_NODES = 33

logger = get_logger("Fourier")

QuadratureRule = Tuple[NDArray[np.float64], NDArray[np.float64]]


def check_band_limited(pots: PotentialSet) -> None:
    for name, pot in pots.items().items():
        if not pot.is_zero and math.isinf(pot.fourier_band):
            raise BandLimitRequired(f"Potential {name} ({pot.kind.value}) has no finite Fourier band")


def common_band(pots: PotentialSet) -> float:
    return max((pot.fourier_band for pot in pots.items().values() if not pot.is_zero), default=0.0)


def eta_quadrature(band: float, d: int, nodes: int = ETA_NODES) -> QuadratureRule:
    """Gauss–Legendre rule on [−B, B]^d, each axis split at 0 where V̂ has a kink."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * band * (x + 1.0)
    half_weights = 0.5 * band * w
    axis = np.concatenate([-half[::-1], half])
    axis_weights = np.concatenate([half_weights[::-1], half_weights])
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    weights = np.ones(1)
    for _ in range(d):
        weights = np.multiply.outer(weights, axis_weights).reshape(-1)
    return points, weights


@dataclass(frozen=True)
class CollisionBranch:
    """Slot `slot` of species α interacting through V_αβ with a new slot of species β."""

    slot: int
    alpha: int
    beta: int
    pot: Potential

    def upper(self, k: int, ell: int) -> Level:
        return (k + 1, ell) if self.beta == 1 else (k, ell + 1)

    def new_position(self, k: int, ell: int) -> int:
        return k if self.beta == 1 else k + ell

    def upper_slot(self, k: int, ell: int) -> int:
        return self.slot if self.slot < self.new_position(k, ell) else self.slot + 1


def collision_branches(k: int, ell: int, pots: PotentialSet) -> List[CollisionBranch]:
    branches = []
    for slot, alpha in enumerate(slot_species(k, ell)):
        for beta in (1, 2):
            pot = pots.pair(alpha, beta)
            if not pot.is_zero:
                branches.append(CollisionBranch(slot, alpha, beta, pot))
    return branches


def branch_rule(pot: Potential, d: int, nodes: int = ETA_NODES) -> QuadratureRule:
    return eta_quadrature(pot.fourier_band, d, nodes)


def branch_weights(
    pot: Potential,
    fraction: float,
    xi: NDArray[np.float64],
    eta: NDArray[np.float64],
    t: float,
    rule: QuadratureRule,
) -> NDArray[np.float64]:
    """n_β w(η') V̂(η') η'·(ξ − ηt), shape (P, Q)."""
    nodes, weights = rule
    drift = (xi - t * eta) @ nodes.T
    return fraction * drift * (weights * eval_fourier(pot, nodes))[None, :]


def _factorized_slot_terms(
    family: CharFamily, t: float, pots: PotentialSet, eta_nodes: int
) -> Dict[int, NDArray[np.complex128]]:
    """g_α(ξ, η) = Σ_β n_β ∫ V̂_αβ(η') η'·(ξ − ηt) φ_α(ξ + η't, η + η') φ_β(−η't, −η') dη'."""
    xi, eta = family.fgrid.points()
    size, d = xi.shape
    terms = {}
    for alpha in (1, 2):
        total = np.zeros(size, dtype=complex)
        moved_by_band: Dict[float, NDArray[np.complex128]] = {}
        for beta in (1, 2):
            pot = pots.pair(alpha, beta)
            if pot.is_zero:
                continue
            rule = branch_rule(pot, d, eta_nodes)
            nodes = rule[0]
            if pot.fourier_band not in moved_by_band:
                moved_xi = (xi[:, None, :] + t * nodes[None, :, :]).reshape(-1, d)
                moved_eta = (eta[:, None, :] + nodes[None, :, :]).reshape(-1, d)
                values = family.factor(alpha).evaluate(moved_xi, moved_eta)
                moved_by_band[pot.fourier_band] = values.reshape(size, nodes.shape[0])
            partner = family.factor(beta).evaluate(-t * nodes, -nodes)
            weights = branch_weights(pot, family.ctx.fraction(beta), xi, eta, t, rule)
            total += np.sum(weights * moved_by_band[pot.fourier_band] * partner[None, :], axis=1)
        terms[alpha] = total
    return terms


def _factorized_level(
    family: CharFamily, k: int, ell: int, terms: Dict[int, NDArray[np.complex128]]
) -> NDArray[np.complex128]:
    species = slot_species(k, ell)
    out = np.zeros(family.fgrid.shape(k + ell), dtype=complex)
    for slot, alpha in enumerate(species):
        factors = [family.factor_values(beta) for beta in species]
        factors[slot] = terms[alpha]
        out += outer_product(factors)
    return out


def _source_branch(
    source: CharSource,
    branch: CollisionBranch,
    k: int,
    ell: int,
    t: float,
    family: CharFamily,
    eta_nodes: int,
) -> NDArray[np.complex128]:
    rank = k + ell
    xi, eta = family.fgrid.points()
    size = xi.shape[0]
    rule = branch_rule(branch.pot, family.fgrid.d, eta_nodes)
    nodes = rule[0]
    slot = branch.upper_slot(k, ell)
    others = [r for r in range(rank + 1) if r not in (slot, branch.new_position(k, ell))]
    tensor = np.transpose(
        source.values.reshape((source.cells,) * (rank + 1)), others + [slot, branch.new_position(k, ell)]
    )
    box = source.plane_waves(xi, eta)
    for _ in others:
        tensor = np.tensordot(tensor, box, axes=([0], [1]))
    # axes: (slot, new, other box points...)
    weights = branch_weights(branch.pot, family.ctx.fraction(branch.beta), xi, eta, t, rule)
    out = np.zeros((size,) * rank, dtype=complex)
    broadcast = (size,) + (1,) * (rank - 1)
    for q in range(nodes.shape[0]):
        node = nodes[q : q + 1]
        partner = source.plane_waves(-t * node, -node)[0]
        reduced = np.tensordot(tensor, partner, axes=([1], [0]))
        moved = source.plane_waves(xi + t * node, eta + node)
        out += weights[:, q].reshape(broadcast) * np.tensordot(moved, reduced, axes=([1], [0]))
    return np.moveaxis(out, 0, branch.slot) / source.mass


def _computable_levels(family: CharFamily, pots: PotentialSet) -> List[Level]:
    if family.is_factorized:
        return levels_up_to(family.k_max)
    if family.k_max == 1:
        return []
    return [
        (k, ell)
        for k, ell in levels_up_to(family.k_max - 1)
        if all(family.source(*branch.upper(k, ell)) is not None for branch in collision_branches(k, ell, pots))
    ]


def apply_K(
    family: CharFamily,
    t: float,
    pots: PotentialSet,
    levels: Optional[Iterable[Level]] = None,
    eta_nodes: int = ETA_NODES,
) -> CharFamily:
    """(K(t)μ̄)^(k,ℓ): the interaction integrals of every slot with one extra slot.

    Slot j of species α meets a new slot of species β through V_αβ with weight n_β; the
    arguments of slot j move to (ξ_j + η't, η_j + η') and the new slot sits at (−η't, −η').
    Factorized families are evaluated slot by slot, others from the exact source of each
    upper level.
    """
    check_band_limited(pots)
    fgrid = family.fgrid
    if pots.d != fgrid.d:
        raise MismatchedGrids(f"Potentials live in d={pots.d}, the Fourier box in d={fgrid.d}")
    targets = list(levels) if levels is not None else _computable_levels(family, pots)
    terms = {}
    if family.is_factorized and not pots.is_zero:
        terms = _factorized_slot_terms(family, t, pots, eta_nodes)
    out = {}
    for k, ell in targets:
        values = np.zeros(fgrid.shape(k + ell), dtype=complex)
        if family.is_factorized and terms:
            values = _factorized_level(family, k, ell, terms)
        elif not family.is_factorized:
            for branch in collision_branches(k, ell, pots):
                source = family.source(*branch.upper(k, ell))
                if source is None:
                    raise MissingLevel(f"K(t) at ({k},{ell}) needs an exact source for level {branch.upper(k, ell)}")
                values += _source_branch(source, branch, k, ell, t, family, eta_nodes)
        out[(k, ell)] = values
    logger.debug(f"Applied K(t={t:.4g}) to {len(out)} levels with {eta_nodes} nodes per half axis")
    k_max = max((k + ell for k, ell in out), default=1)
    return CharFamily(fgrid, family.ctx, out, k_max=k_max, t=family.t)


def quadrature_gap(
    family: CharFamily, t: float, pots: PotentialSet, k: int, ell: int, eta_nodes: int = ETA_NODES
) -> float:
    """sup |K_n − K_2n| at one level, n being the η nodes per half axis."""
    coarse = apply_K(family, t, pots, [(k, ell)], eta_nodes).level(k, ell)
    fine = apply_K(family, t, pots, [(k, ell)], 2 * eta_nodes).level(k, ell)
    return float(np.max(np.abs(coarse - fine)))


def factorized_char_residual(
    snapshots: Sequence[SpeciesPairDistribution],
    pots: PotentialSet,
    fgrid: FourierGrid,
    k: int,
    ell: int,
    dt_probe: float,
) -> float:
    """sup|∂_t μ̄ − K(t)μ̄| / sup|K(t)μ̄| for Vlasov snapshots at t−δ, t, t+δ."""
    if len(snapshots) != 3:
        raise InvalidInput(f"Factorized residual needs snapshots at t−δ, t, t+δ, got {len(snapshots)}")
    if dt_probe <= 0.0:
        raise InvalidInput(f"dt_probe must be positive, got {dt_probe}")
    k_max = max(1, min(k + ell, 3))
    before, current, after = (interaction_characteristic(state, fgrid, k_max) for state in snapshots)
    derivative = (after.level(k, ell) - before.level(k, ell)) / (2.0 * dt_probe)
    rhs = apply_K(current, current.t, pots, [(k, ell)]).level(k, ell)
    gap = float(np.max(np.abs(derivative - rhs)))
    scale = float(np.max(np.abs(rhs)))
    residual = gap / scale if scale > 0.0 else gap
    logger.debug(f"Characteristic residual at ({k},{ell}), t={current.t:.4g}: {residual:.3e}")
    return residual
