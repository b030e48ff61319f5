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
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np
import ot  # pyright: ignore [reportMissingTypeStubs]
from numpy.typing import NDArray
from scipy.stats import wasserstein_distance  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidConfig, InvalidInput, NonConvergence, SupportTooLarge
from twospecies.logs import get_logger
from twospecies.metrics.measures import MAX_EXACT_SUPPORT, DiscreteMeasure, cost_matrix

logger = get_logger("Transport")

MASS_TOLERANCE = 1e-6
CERTIFIED_GAP = 0.02
EMD_MAX_ITERATIONS = 1_000_000


class TransportMode(Enum):
    EXACT = "exact"
    ENTROPIC = "entropic"

    @classmethod
    def from_str(cls, mode: str) -> TransportMode:
        for candidate in cls:
            if candidate.value == mode:
                return candidate
        raise InvalidConfig(f"Unknown transport mode '{mode}'")


@dataclass(frozen=True)
class SinkhornConfig:
    # regularization as a fraction of the largest cost
    epsilon_start: float = 1.0
    epsilon_final: float = 1e-4
    annealing: float = 0.5
    max_iterations: int = 2000
    marginal_tolerance: float = 1e-10
    target_gap: float = CERTIFIED_GAP


@dataclass(frozen=True)
class TransportResult:
    distance: float
    mode: TransportMode
    # upper minus lower bound; 0 for the exact solver
    gap: float = 0.0
    mass_adjustment: float = 0.0

    @property
    def relative_gap(self) -> float:
        return self.gap / self.distance if self.distance > 0.0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "distance": self.distance,
            "mode": self.mode.value,
            "gap": self.gap,
            "mass_adjustment": self.mass_adjustment,
        }


def _balanced(a: DiscreteMeasure, b: DiscreteMeasure) -> Tuple[NDArray[np.float64], NDArray[np.float64], float, float]:
    """Probability weights of both measures, the common mass, and the renormalization applied to b."""
    mass_a, mass_b = a.total_mass, b.total_mass
    if mass_a <= 0.0 or mass_b <= 0.0:
        raise InvalidInput(f"Transport needs positive masses, got {mass_a} and {mass_b}")
    adjustment = mass_b - mass_a
    if abs(adjustment) > MASS_TOLERANCE * max(mass_a, mass_b):
        logger.warning(f"Masses differ by {adjustment:.3e}; renormalizing the second measure to {mass_a:.6g}")
    return a.weights / mass_a, b.weights / mass_b, mass_a, adjustment


def _exact(p: NDArray[np.float64], r: NDArray[np.float64], cost: NDArray[np.float64]) -> float:
    solved: Tuple[float, Dict[str, Any]] = ot.emd2(p, r, cost, numItermax=EMD_MAX_ITERATIONS, log=True)
    value, log = solved
    if log.get("warning"):
        raise NonConvergence(f"Network simplex did not finish: {log['warning']}", gap=float("nan"))
    return float(value)


def _round_plan(plan: NDArray[np.float64], p: NDArray[np.float64], r: NDArray[np.float64]) -> NDArray[np.float64]:
    """Projects an approximate plan onto the exact marginals (p, r)."""
    rows = plan.sum(axis=1)
    plan = plan * np.minimum(1.0, p / np.where(rows > 0.0, rows, 1.0))[:, None]
    cols = plan.sum(axis=0)
    plan = plan * np.minimum(1.0, r / np.where(cols > 0.0, cols, 1.0))[None, :]
    err_rows = p - plan.sum(axis=1)
    err_cols = r - plan.sum(axis=0)
    missing = float(np.sum(err_rows))
    if missing > 0.0:
        plan = plan + np.outer(err_rows, err_cols) / missing
    return plan


def _dual_bound(
    f: NDArray[np.float64], cost: NDArray[np.float64], p: NDArray[np.float64], r: NDArray[np.float64]
) -> float:
    """Dual objective after two c-transforms, a lower bound on the transport cost."""
    g = np.min(cost - f[:, None], axis=0)
    f = np.min(cost - g[None, :], axis=1)
    return float(p @ f + r @ g)


def sinkhorn_bounds(
    p: NDArray[np.float64], r: NDArray[np.float64], cost: NDArray[np.float64], config: SinkhornConfig = SinkhornConfig()
) -> Tuple[float, float]:
    """(upper, lower) bounds on the transport cost from POT's log-domain Sinkhorn with ε-annealing."""
    scale = float(np.max(cost))
    if scale == 0.0:
        return 0.0, 0.0
    epsilon = config.epsilon_start * scale
    upper, lower = np.inf, -np.inf
    while True:
        solved: Tuple[NDArray[np.float64], Dict[str, Any]] = ot.bregman.sinkhorn_log(
            p,
            r,
            cost,
            epsilon,
            numItermax=config.max_iterations,
            stopThr=config.marginal_tolerance,
            log=True,
            warn=False,
        )
        plan, log = solved
        # the plan is exp((f ⊕ g − C)/ε) with f = ε·log_u
        f = epsilon * np.asarray(log["log_u"], dtype=float)
        upper = min(upper, float(np.sum(_round_plan(np.asarray(plan, dtype=float), p, r) * cost)))
        lower = max(lower, _dual_bound(f, cost, p, r))
        logger.debug(f"Sinkhorn at ε={epsilon:.3e} after {log['niter']} iterations: bounds [{lower:.6g}, {upper:.6g}]")
        if upper - lower <= config.target_gap * upper or epsilon <= config.epsilon_final * scale:
            return upper, lower
        epsilon *= config.annealing


def wasserstein1(
    a: DiscreteMeasure,
    b: DiscreteMeasure,
    mode: TransportMode = TransportMode.EXACT,
    config: SinkhornConfig = SinkhornConfig(),
) -> TransportResult:
    a, b = a.trimmed(), b.trimmed()
    p, r, total, adjustment = _balanced(a, b)
    if mode is TransportMode.EXACT and max(a.size, b.size) > MAX_EXACT_SUPPORT:
        raise SupportTooLarge(f"Exact W₁ supports {a.size} and {b.size} exceed {MAX_EXACT_SUPPORT} points")
    cost = cost_matrix(a, b)
    if mode is TransportMode.EXACT:
        return TransportResult(total * _exact(p, r, cost), mode, 0.0, adjustment)
    upper, lower = sinkhorn_bounds(p, r, cost, config)
    gap = max(upper - lower, 0.0)
    if gap > config.target_gap * upper:
        raise NonConvergence(f"Sinkhorn certified gap {gap / upper:.3%} above {config.target_gap:.0%}", gap=total * gap)
    return TransportResult(total * upper, mode, total * gap, adjustment)


def wasserstein1_marginal_1d(a: DiscreteMeasure, b: DiscreteMeasure, axis: int = 0) -> float:
    """∫|F_a − F_b| for the marginals on one coordinate, read on the line; masses normalized to a's."""
    first, second = a.marginal(axis).trimmed(), b.marginal(axis).trimmed()
    p, r, total, _ = _balanced(first, second)
    distance: float = wasserstein_distance(first.points[:, 0], second.points[:, 0], p, r)
    return total * distance
