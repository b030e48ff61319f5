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
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidInput
from twospecies.fock.density import reduced_density
from twospecies.fock.state import ManyBodyState
from twospecies.hierarchy.remainders import HierarchyTerms, hierarchy_terms
from twospecies.hierarchy.weak import ProbeBattery
from twospecies.husimi.coherent import CoherentFamily
from twospecies.husimi.dynamics import husimi_time_derivative
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import husimi_transform
from twospecies.logs import get_logger
from twospecies.potentials import PotentialSet

logger = get_logger("Consistency")

SPACING_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeakBalance:
    """Weak pairings of every hierarchy term against each probe of the battery."""

    time_derivative: Tuple[float, ...]
    transport: Tuple[float, ...]
    transport_remainder: Tuple[float, ...]
    collision: Tuple[float, ...]
    potential_remainder: Tuple[float, ...]
    commutator_remainder: Tuple[float, ...]

    def _array(self, name: str) -> NDArray[np.float64]:
        return np.asarray(getattr(self, name))

    @property
    def remainders(self) -> NDArray[np.float64]:
        return (
            self._array("transport_remainder")
            + self._array("potential_remainder")
            + self._array("commutator_remainder")
        )

    @property
    def residuals(self) -> NDArray[np.float64]:
        return self._array("time_derivative") - self._array("transport") - self._array("collision") - self.remainders

    @property
    def residuals_without_remainders(self) -> NDArray[np.float64]:
        return self._array("time_derivative") - self._array("transport") - self._array("collision")

    @property
    def scale(self) -> float:
        names = (
            "time_derivative",
            "transport",
            "transport_remainder",
            "collision",
            "potential_remainder",
            "commutator_remainder",
        )
        return max(float(np.max(np.abs(self._array(name)))) for name in names)

    def _relative(self, values: NDArray[np.float64]) -> float:
        scale = self.scale
        largest = float(np.max(np.abs(values)))
        return largest / scale if scale > 0.0 else largest

    @property
    def gap(self) -> float:
        return self._relative(self.residuals)

    @property
    def gap_without_remainders(self) -> float:
        return self._relative(self.residuals_without_remainders)

    @property
    def remainder_magnitude(self) -> float:
        return self._relative(self.remainders)


def weak_balance(
    terms: HierarchyTerms, derivative: NDArray[np.float64], battery: Optional[ProbeBattery] = None
) -> WeakBalance:
    """Pairs ∂_t m and every right-hand-side term of the (k,ℓ) hierarchy against the probes."""
    battery = battery or ProbeBattery(terms.grid)
    if derivative.shape != terms.measure.shape:
        raise InvalidInput(
            f"Time derivative of shape {derivative.shape} does not match m of shape {terms.measure.shape}"
        )
    rows: Dict[str, list] = {name: [] for name in WeakBalance.__dataclass_fields__}
    for b in range(len(battery)):
        rows["time_derivative"].append(battery.pair_scalar(b, derivative))
        rows["transport"].append(terms.term("streaming").weak(battery, b))
        rows["transport_remainder"].append(sum(t.weak(battery, b) for t in terms.group("transport_")))
        rows["collision"].append(sum(t.weak(battery, b) for t in terms.group("collision_")))
        rows["potential_remainder"].append(sum(t.weak(battery, b) for t in terms.group("potential_")))
        rows["commutator_remainder"].append(sum(t.weak(battery, b) for t in terms.group("commutator_")))
    return WeakBalance(**{name: tuple(float(v) for v in values) for name, values in rows.items()})


@dataclass(frozen=True)
class ConsistencyReport:
    k: int
    ell: int
    hbar: float
    dt_probe: float
    central: WeakBalance
    exact: Optional[WeakBalance] = None

    @property
    def gap(self) -> float:
        return self.central.gap

    @property
    def gap_exact(self) -> Optional[float]:
        return None if self.exact is None else self.exact.gap

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "ell": self.ell,
            "hbar": self.hbar,
            "dt_probe": self.dt_probe,
            "gap": self.gap,
            "gap_without_remainders": self.central.gap_without_remainders,
            "remainder_magnitude": self.central.remainder_magnitude,
            "gap_exact": self.gap_exact,
        }


def bbgky_consistency(
    snapshots: Sequence[Tuple[float, ManyBodyState]],
    fam: CoherentFamily,
    grid: PhaseGrid,
    k: int,
    ell: int,
    pots: PotentialSet,
    hamiltonian: Optional[sparse.spmatrix] = None,
    battery: Optional[ProbeBattery] = None,
) -> ConsistencyReport:
    """Weak-form gap of the (k,ℓ) quantum hierarchy at the middle of three equally spaced snapshots.

    ∂_t m comes from the central difference; with a Hamiltonian the exact derivative is paired too.
    """
    if len(snapshots) != 3:
        raise InvalidInput(f"Hierarchy consistency needs snapshots at t−δ, t, t+δ, got {len(snapshots)}")
    (t0, before), (t1, current), (t2, after) = snapshots
    delta = 0.5 * (t2 - t0)
    if delta <= 0.0 or abs((t1 - t0) - (t2 - t1)) > SPACING_TOLERANCE * max(1.0, delta):
        raise InvalidInput(f"Snapshots at {t0}, {t1}, {t2} are not equally spaced around t")
    battery = battery or ProbeBattery(grid)
    terms = hierarchy_terms(current, fam, grid, k, ell, pots)
    forward = husimi_transform(reduced_density(after, k, ell), fam, grid).values
    backward = husimi_transform(reduced_density(before, k, ell), fam, grid).values
    central = weak_balance(terms, (forward - backward) / (2.0 * delta), battery)
    exact = None
    if hamiltonian is not None:
        derivative = husimi_time_derivative(current, hamiltonian, fam, grid, k, ell).values
        exact = weak_balance(terms, derivative, battery)
    report = ConsistencyReport(k, ell, current.ctx.hbar, delta, central, exact)
    logger.info(
        f"Hierarchy ({k},{ell}) at t={t1:.4g}: gap {report.gap:.3e}, "
        f"without remainders {central.gap_without_remainders:.3e}"
    )
    return report
