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
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage  # pyright: ignore [reportMissingTypeStubs]
from scipy.interpolate import CubicSpline  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import DepthExceedsFamily, ExtrapolationNeeded, InvalidConfig, InvalidInput
from twospecies.fourier.characteristic import BOX_SLACK, CharFamily
from twospecies.fourier.grid import FourierGrid
from twospecies.fourier.operator import ETA_NODES, apply_K, branch_rule, check_band_limited, common_band
from twospecies.hierarchy.family import Level
from twospecies.hierarchy.limit import slot_species
from twospecies.logs import get_logger
from twospecies.potentials import PotentialSet, eval_fourier

MAX_DEPTH = 6
DEFAULT_TIME_NODES = 9
# internal meshes halve the probe spacing
MESH_REFINEMENT = 2

PICARD_SUMMARY_COLUMNS = ("k", "ell", "L", "t", "increment", "bound")

logger = get_logger("Picard")


@dataclass(frozen=True)
class PicardConfig:
    """Depth L and time of a truncated Picard series with the constants A, B, C, D of its bound."""

    depth: int
    t: float
    amplitude: float
    band: float
    support_volume: float
    xi_radius: float
    eta_radius: float
    time_nodes: int = DEFAULT_TIME_NODES
    eta_nodes: int = ETA_NODES
    closure: bool = True

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise InvalidConfig(f"Picard depth L={self.depth} must lie in 1..{MAX_DEPTH}")
        if not math.isfinite(self.t) or self.t < 0.0:
            raise InvalidConfig(f"Picard time must be finite and non-negative, got {self.t}")
        if self.time_nodes < 4:
            raise InvalidConfig(f"Picard time integrals need at least 4 nodes, got {self.time_nodes}")
        if self.eta_nodes < 2:
            raise InvalidConfig(f"η quadrature needs at least 2 nodes per half axis, got {self.eta_nodes}")

    @classmethod
    def from_potentials(
        cls, pots: PotentialSet, fgrid: FourierGrid, depth: int, t: float, **options: Any
    ) -> PicardConfig:
        check_band_limited(pots)
        active = [pot for pot in pots.items().values() if not pot.is_zero]
        return cls(
            depth=depth,
            t=t,
            amplitude=max((pot.fourier_amp for pot in active), default=0.0),
            band=common_band(pots),
            support_volume=max((pot.support_volume for pot in active), default=0.0),
            xi_radius=fgrid.radius,
            eta_radius=fgrid.radius,
            **options,
        )

    @property
    def horizon(self) -> float:
        """τ = (8·|supp V̂|·A·B)^{-1/2}."""
        product = 8.0 * self.support_volume * self.amplitude * self.band
        return math.inf if product == 0.0 else product**-0.5

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depth": self.depth,
            "t": self.t,
            "A": self.amplitude,
            "B": self.band,
            "support_volume": self.support_volume,
            "C": self.xi_radius,
            "D": self.eta_radius,
            "horizon": self.horizon,
            "time_nodes": self.time_nodes,
            "eta_nodes": self.eta_nodes,
            "closure": self.closure,
        }


def delta_L_bound(
    cfg: PicardConfig, k: int, ell: int, depth: Optional[int] = None, t: Optional[float] = None
) -> float:
    """(4|supp V̂|A)^L · Π_{m=0}^{L−1} [(C+D|t|)(k+ℓ) + 1_{m>0}(k+ℓ+m)B|t|] · |t|^L / L!"""
    depth = cfg.depth if depth is None else depth
    t = abs(cfg.t if t is None else t)
    if depth < 1:
        raise InvalidInput(f"Truncation bound needs L ≥ 1, got {depth}")
    order = k + ell
    base = (cfg.xi_radius + cfg.eta_radius * t) * order
    value = (4.0 * cfg.support_volume * cfg.amplitude * t) ** depth / math.factorial(depth) * base
    for m in range(1, depth):
        value *= base + (order + m) * cfg.band * t
    return value


@dataclass(frozen=True)
class _Mesh:
    """Uniform (ξ, η) mesh of one Picard order, spacing h, centred on the origin."""

    xi_half: int
    eta_half: int
    spacing: float

    @property
    def xi(self) -> NDArray[np.float64]:
        return self.spacing * np.arange(-self.xi_half, self.xi_half + 1)

    @property
    def eta(self) -> NDArray[np.float64]:
        return self.spacing * np.arange(-self.eta_half, self.eta_half + 1)

    def sample(
        self, values: NDArray[np.complex128], xi: NDArray[np.float64], eta: NDArray[np.float64]
    ) -> NDArray[np.complex128]:
        coords = np.stack(
            [(xi.reshape(-1) / self.spacing) + self.xi_half, (eta.reshape(-1) / self.spacing) + self.eta_half]
        )
        upper = np.array([[2 * self.xi_half], [2 * self.eta_half]]) + BOX_SLACK
        outside = np.any((coords < -BOX_SLACK) | (coords > upper), axis=0)
        if np.any(outside):
            raise ExtrapolationNeeded(
                f"Picard query leaves its internal mesh at {int(outside.sum())} points", float(np.mean(outside))
            )
        real: NDArray[np.float64] = ndimage.map_coordinates(values.real, coords, order=3, mode="nearest")
        imag: NDArray[np.float64] = ndimage.map_coordinates(values.imag, coords, order=3, mode="nearest")
        return (real + 1j * imag).reshape(xi.shape)

    def box(self, values: NDArray[np.complex128], fgrid: FourierGrid) -> NDArray[np.complex128]:
        reach = MESH_REFINEMENT * (fgrid.nodes - 1) // 2
        xi_rows = slice(self.xi_half - reach, self.xi_half + reach + 1, MESH_REFINEMENT)
        eta_rows = slice(self.eta_half - reach, self.eta_half + reach + 1, MESH_REFINEMENT)
        return values[xi_rows, eta_rows].reshape(-1)


def _order_meshes(fgrid: FourierGrid, depth: int, band: float, t: float) -> List[_Mesh]:
    """Mesh i reaches Ξ + (L−i)B in η and Ξ + (L−i+1)B|t| in ξ, in whole shift steps."""
    spacing = fgrid.spacing / MESH_REFINEMENT
    box = MESH_REFINEMENT * (fgrid.nodes - 1) // 2
    eta_step = math.ceil(band / spacing - 1e-9)
    xi_step = math.ceil(band * t / spacing - 1e-9)
    return [
        _Mesh(box + (depth - i + 1) * xi_step, box + (depth - i) * eta_step, spacing) for i in range(depth)
    ]


def _time_integral(rhs: NDArray[np.complex128], times: NDArray[np.float64]) -> NDArray[np.complex128]:
    real: NDArray[np.float64] = CubicSpline(times, rhs.real, axis=0).antiderivative()(times)
    imag: NDArray[np.float64] = CubicSpline(times, rhs.imag, axis=0).antiderivative()(times)
    return real + 1j * imag


def _species_series(
    family: CharFamily, t: float, cfg: PicardConfig, pots: PotentialSet
) -> Dict[int, List[NDArray[np.complex128]]]:
    """Box values of φ_α^{(i)}(t), i < L, for both species of a factorized d=1 family.

    φ^{(0)} = μ̄₀ and φ_α^{(i)} integrates Σ_β n_β ∫ V̂ η'(ξ−ηs) Σ_{a+b=i−1} φ_α^{(a)}(ξ+η's, η+η')
    φ_β^{(b)}(−η's, −η') dη' over [0, t]. Each order is stored demodulated by e^{−i(ξp̄_α+ηq̄_α)}
    on its own mesh so the interpolated functions stay smooth.
    """
    fgrid = family.fgrid
    meshes = _order_meshes(fgrid, cfg.depth, common_band(pots), t)
    times = np.linspace(0.0, t, cfg.time_nodes)
    centers = {alpha: tuple(float(v[0]) for v in family.factor(alpha).moments()) for alpha in (1, 2)}
    rules = {
        (alpha, beta): branch_rule(pots.pair(alpha, beta), 1, cfg.eta_nodes)
        for alpha in (1, 2)
        for beta in (1, 2)
        if not pots.pair(alpha, beta).is_zero
    }

    series: Dict[int, List[NDArray[np.complex128]]] = {}
    for alpha in (1, 2):
        center, momentum = centers[alpha]
        xi, eta = np.meshgrid(meshes[0].xi, meshes[0].eta, indexing="ij")
        exact = family.factor(alpha).evaluate(xi.reshape(-1, 1), eta.reshape(-1, 1)).reshape(xi.shape)
        series[alpha] = [(exact * np.exp(-1j * (xi * momentum + eta * center)))[None]]

    def sample(
        alpha: int, order: int, n: int, xi: NDArray[np.float64], eta: NDArray[np.float64]
    ) -> NDArray[np.complex128]:
        values = series[alpha][order]
        return meshes[order].sample(values[min(n, values.shape[0] - 1)], xi, eta)

    for i in range(1, cfg.depth):
        xi_axis, eta_axis = meshes[i].xi, meshes[i].eta
        for alpha in (1, 2):
            partners = [beta for beta in (1, 2) if (alpha, beta) in rules]
            rhs = np.zeros((times.size, xi_axis.size, eta_axis.size), dtype=complex)
            for n, s in enumerate(times if partners else []):
                moved_by_band: Dict[float, List[NDArray[np.complex128]]] = {}
                for beta in partners:
                    pot = pots.pair(alpha, beta)
                    nodes, weights = rules[(alpha, beta)]
                    shifts = nodes[:, 0]
                    shape = (xi_axis.size, eta_axis.size, shifts.size)
                    if pot.fourier_band not in moved_by_band:
                        moved_xi = np.broadcast_to(xi_axis[:, None, None] + s * shifts[None, None, :], shape)
                        moved_eta = np.broadcast_to(eta_axis[None, :, None] + shifts[None, None, :], shape)
                        moved_by_band[pot.fourier_band] = [sample(alpha, a, n, moved_xi, moved_eta) for a in range(i)]
                    moved = moved_by_band[pot.fourier_band]
                    partner = [sample(beta, b, n, -s * shifts, -shifts) for b in range(i)]
                    drift = (xi_axis[:, None, None] - s * eta_axis[None, :, None]) * shifts[None, None, :]
                    offset = (centers[alpha][0] - centers[beta][0]) + s * (centers[alpha][1] - centers[beta][1])
                    coef = family.ctx.fraction(beta) * weights * eval_fourier(pot, nodes) * np.exp(1j * shifts * offset)
                    pairs = sum(moved[a] * partner[i - 1 - a][None, None, :] for a in range(i))
                    rhs[n] += np.sum(drift * coef[None, None, :] * pairs, axis=2)
            series[alpha].append(_time_integral(rhs, times))
        logger.debug(f"Picard order {i} on a {xi_axis.size}×{eta_axis.size} mesh")

    out: Dict[int, List[NDArray[np.complex128]]] = {}
    xi_box, eta_box = fgrid.points()
    for alpha in (1, 2):
        center, momentum = centers[alpha]
        phase = np.exp(1j * (xi_box[:, 0] * momentum + eta_box[:, 0] * center))
        out[alpha] = [family.factor_values(alpha)]
        for i in range(1, cfg.depth):
            out[alpha].append(phase * meshes[i].box(series[alpha][i][-1], fgrid))
    return out


def _level_terms(species: List[int], orders: Dict[int, List[NDArray[np.complex128]]], depth: int):
    """Degree-j parts of Π_r Σ_i φ_{α_r}^{(i)} for j < L."""
    partial: Dict[int, NDArray[np.complex128]] = {0: np.ones(())}
    for alpha in species:
        grown: Dict[int, NDArray[np.complex128]] = {}
        for degree, values in partial.items():
            for i in range(depth - degree):
                product = np.multiply.outer(values, orders[alpha][i])
                grown[degree + i] = grown[degree + i] + product if degree + i in grown else product
        partial = grown
    return [partial[j] for j in range(depth)]


@dataclass(frozen=True, eq=False)
class PicardResult:
    """μ̄_t from a Picard series truncated at depth L; `terms[(k,ℓ)][j]` is the j-fold integral."""

    t: float
    depth: int
    family: CharFamily
    terms: Dict[Level, List[NDArray[np.complex128]]]
    closure_gap: Optional[float] = None

    def truncated(self, k: int, ell: int, depth: Optional[int] = None) -> NDArray[np.complex128]:
        depth = self.depth if depth is None else depth
        return sum(self.terms[(k, ell)][:depth], np.zeros_like(self.terms[(k, ell)][0]))

    def increment(self, k: int, ell: int, order: int) -> float:
        """sup over the probe box of the order-th term, the gap between depths order+1 and order."""
        return float(np.max(np.abs(self.terms[(k, ell)][order])))

    def summary(self, cfg: PicardConfig) -> List[Dict[str, Any]]:
        rows = []
        for k, ell in self.terms:
            for order in range(1, self.depth):
                rows.append(
                    {
                        "k": k,
                        "ell": ell,
                        "L": order,
                        "t": self.t,
                        "increment": self.increment(k, ell, order),
                        "bound": delta_L_bound(cfg, k, ell, order, self.t),
                    }
                )
        return rows

    def to_rows(self, cfg: PicardConfig, levels: Optional[Iterable[Level]] = None) -> List[Dict[str, Any]]:
        """One row per probe node of the full-depth value, with the truncation bound of its level."""
        fgrid = self.family.fgrid
        xi, eta = fgrid.points()
        rows = []
        for k, ell in self.terms if levels is None else levels:
            rank = k + ell
            values = self.truncated(k, ell).reshape(-1)
            bound = delta_L_bound(cfg, k, ell, self.depth, self.t)
            for flat, value in enumerate(values):
                row: Dict[str, Any] = {"k": k, "ell": ell, "L": self.depth, "t": self.t}
                for slot, index in enumerate(np.unravel_index(flat, fgrid.shape(rank)), start=1):
                    for component in range(fgrid.d):
                        suffix = f"{slot}" if fgrid.d == 1 else f"{slot}_{component + 1}"
                        row[f"xi{suffix}"] = float(xi[index, component])
                        row[f"eta{suffix}"] = float(eta[index, component])
                row.update({"re": float(value.real), "im": float(value.imag), "bound": bound})
                rows.append(row)
        return rows


def probe_columns(fgrid: FourierGrid, k_max: int) -> Tuple[str, ...]:
    columns = ["k", "ell", "L", "t"]
    for slot in range(1, k_max + 1):
        for component in range(fgrid.d):
            suffix = f"{slot}" if fgrid.d == 1 else f"{slot}_{component + 1}"
            columns += [f"xi{suffix}", f"eta{suffix}"]
    return tuple(columns + ["re", "im", "bound"])


def _first_order(family: CharFamily, t: float, cfg: PicardConfig, pots: PotentialSet) -> PicardResult:
    """μ̄₀ + ∫₀ᵗ K(s)μ̄₀ ds from exact sources, with Gauss–Legendre in time."""
    x, w = np.polynomial.legendre.leggauss(cfg.time_nodes)
    kicks: Dict[Level, NDArray[np.complex128]] = {}
    for s, weight in zip(0.5 * t * (x + 1.0), 0.5 * t * w):
        for key, values in apply_K(family, float(s), pots, eta_nodes=cfg.eta_nodes).levels.items():
            kicks[key] = kicks[key] + weight * values if key in kicks else weight * values
    if not kicks:
        raise DepthExceedsFamily(f"No level of a depth-{family.k_max} family has the sources K(t) needs")
    terms = {key: [family.level(*key), values] for key, values in kicks.items()}
    return _result(family, t, cfg.depth, terms, None)


def _result(
    family: CharFamily,
    t: float,
    depth: int,
    terms: Dict[Level, List[NDArray[np.complex128]]],
    closure_gap: Optional[float],
) -> PicardResult:
    levels = {key: sum(parts[1:], parts[0]) for key, parts in terms.items()}
    k_max = max(k + ell for k, ell in levels)
    out = CharFamily(family.fgrid, family.ctx, levels, k_max=k_max, t=t)
    return PicardResult(t, depth, out, terms, closure_gap)


def picard_iterate(family: CharFamily, t: float, cfg: PicardConfig, pots: PotentialSet) -> PicardResult:
    """μ̄_t = Σ_{j<L} ∫…∫ K(t₁)…K(t_j) μ̄₀ for a family at interaction time 0.

    Factorized families (or the factorized closure of a tabulated one) are expanded order by
    order in d=1; a tabulated family without closure supports depth 2 from its sources.
    """
    if t < 0.0 or t > cfg.horizon:
        raise InvalidInput(f"Picard time t={t:.4g} must lie in [0, τ={cfg.horizon:.4g}]")
    if family.t != 0.0:
        raise InvalidInput(f"Picard series starts from μ̄₀, got a family at interaction time {family.t:.4g}")
    check_band_limited(pots)
    if cfg.depth == 1 or t == 0.0 or pots.is_zero:
        terms = {}
        for k, ell in family.available():
            silent = np.zeros(family.fgrid.shape(k + ell), dtype=complex)
            terms[(k, ell)] = [family.level(k, ell)] + [silent] * (cfg.depth - 1)
        return _result(family, t, cfg.depth, terms, None)

    closure_gap = None
    if not family.is_factorized:
        if cfg.closure:
            closure_gap = family.closure_gap()
            logger.info(f"Picard series uses the factorized closure; closure gap {closure_gap:.3e}")
            family = family.closure()
        elif cfg.depth == 2:
            return _first_order(family, t, cfg, pots)
        else:
            raise DepthExceedsFamily(
                f"Depth L={cfg.depth} needs levels up to order {family.k_max + cfg.depth - 1}, "
                f"the family stops at {family.k_max} and closure is off"
            )
    if family.fgrid.d != 1:
        raise InvalidInput(f"The order-by-order Picard expansion runs in d=1, got d={family.fgrid.d}")

    orders = _species_series(family, t, cfg, pots)
    terms = {key: _level_terms(slot_species(*key), orders, cfg.depth) for key in family.available()}
    result = _result(family, t, cfg.depth, terms, closure_gap)
    last = max(result.increment(k, ell, cfg.depth - 1) for k, ell in terms)
    logger.info(f"Picard depth {cfg.depth} at t={t:.4g} (τ={cfg.horizon:.4g}): last increment {last:.3e}")
    return result
