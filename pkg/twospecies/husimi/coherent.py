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
from enum import Enum
from typing import Any, Dict

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twospecies.errors import InvalidConfig, InvalidInput
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.logs import get_logger
from twospecies.potentials import minimum_image

DEFAULT_RADIUS = 1.5
# truncated gaussian: σ = R1 / GAUSSIAN_SIGMAS
GAUSSIAN_SIGMAS = 6.0

logger = get_logger("Coherent")


class ProfileKind(Enum):
    BUMP = "bump"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"

    @classmethod
    def from_str(cls, kind: str) -> ProfileKind:
        for candidate in cls:
            if candidate.value == kind:
                return candidate
        raise InvalidConfig(f"Unknown coherent profile '{kind}'")


def profile_shape(kind: ProfileKind, radius: float, z: NDArray[np.float64]) -> NDArray[np.float64]:
    """Unnormalized profile at scaled displacements z (trailing axis d); zero outside |z| < radius."""
    r = np.linalg.norm(z, axis=-1)
    inside = r < radius
    if kind is ProfileKind.BUMP:
        values = np.cos(0.5 * math.pi * r / radius) ** 2
    else:
        sigma = radius / GAUSSIAN_SIGMAS
        values = np.exp(-(r**2) / (2.0 * sigma**2))
    return np.where(inside, values, 0.0)


def profile_gradient(kind: ProfileKind, radius: float, z: NDArray[np.float64]) -> NDArray[np.float64]:
    r = np.linalg.norm(z, axis=-1)
    inside = r < radius
    if kind is ProfileKind.BUMP:
        safe = np.where(r == 0.0, 1.0, r)
        slope = -0.5 * math.pi / radius * np.sin(math.pi * r / radius)
        radial = np.where(r == 0.0, 0.0, slope / safe)
        grad = z * radial[..., None]
    else:
        sigma = radius / GAUSSIAN_SIGMAS
        grad = -z / sigma**2 * np.exp(-(r**2) / (2.0 * sigma**2))[..., None]
    return np.where(inside[..., None], grad, 0.0)


@dataclass(frozen=True)
class CoherentFamily:
    """Coherent states f^ℏ_{q,p}(y) = ℏ^{-d/4} f((y−q)/√ℏ) e^{ip·(y−q)/ℏ} as site-orthonormal lattice vectors.

    The profile is normalized by lattice quadrature, Σ_y dx^d ℏ^{-d/2} f((y−q)/√ℏ)² = 1 for q on a site.
    """

    lattice: LatticeConfig
    ctx: ScalingContext
    profile: ProfileKind = ProfileKind.BUMP
    radius: float = DEFAULT_RADIUS
    normalization: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.radius <= 0.0:
            raise InvalidInput(f"Coherent radius R1 must be positive, got {self.radius}")
        root = math.sqrt(self.ctx.hbar)
        diameter = 2.0 * self.radius * root
        if diameter >= self.lattice.length:
            raise InvalidInput(
                f"Coherent window diameter {diameter:.4g} does not fit "
                f"in the periodic box of length {self.lattice.length:.4g}"
            )
        z = self._scaled(np.zeros((1, self.lattice.d)))[0]
        raw = profile_shape(self.profile, self.radius, z)
        mass = float(np.sum(raw**2)) * self.lattice.cell_volume * self.ctx.hbar ** (-self.lattice.d / 2.0)
        if mass <= 0.0:
            raise InvalidInput(f"Coherent window of radius {self.radius} covers no lattice site")
        object.__setattr__(self, "normalization", 1.0 / math.sqrt(mass))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], lattice: LatticeConfig, ctx: ScalingContext) -> CoherentFamily:
        return cls(
            lattice=lattice,
            ctx=ctx,
            profile=ProfileKind.from_str(str(data.get("profile", ProfileKind.BUMP.value))),
            radius=float(data.get("R1", DEFAULT_RADIUS)),
        )

    @property
    def hbar(self) -> float:
        return self.ctx.hbar

    @property
    def window_sites(self) -> int:
        """Widest lattice span of a window, in sites per axis."""
        return int(math.floor(2.0 * self.radius * math.sqrt(self.hbar) / self.lattice.dx)) + 1

    def _displacements(self, q: NDArray[np.float64]) -> NDArray[np.float64]:
        """Minimum-image y − q for every centre q (rows) and site y, shape (Nq, S, d)."""
        return minimum_image(self.lattice.positions[None, :, :] - q[:, None, :], self.lattice.length)

    def _scaled(self, q: NDArray[np.float64]) -> NDArray[np.float64]:
        return self._displacements(q) / math.sqrt(self.hbar)

    def envelopes(self, q: ArrayLike) -> NDArray[np.float64]:
        """dx^{d/2} ℏ^{-d/4} f((y−q)/√ℏ) per centre, shape (Nq, S)."""
        centres = np.asarray(q, dtype=float).reshape(-1, self.lattice.d)
        scale = self.normalization * self.lattice.cell_volume**0.5 * self.hbar ** (-self.lattice.d / 4.0)
        return scale * profile_shape(self.profile, self.radius, self._scaled(centres))

    def envelope_gradients(self, q: ArrayLike) -> NDArray[np.float64]:
        """∇_y of the envelope, shape (Nq, S, d)."""
        centres = np.asarray(q, dtype=float).reshape(-1, self.lattice.d)
        scale = self.normalization * self.lattice.cell_volume**0.5 * self.hbar ** (-self.lattice.d / 4.0)
        return scale / math.sqrt(self.hbar) * profile_gradient(self.profile, self.radius, self._scaled(centres))

    def phases(self, q: ArrayLike, p: ArrayLike) -> NDArray[np.complex128]:
        """e^{ip·(y−q)/ℏ}, shape (Nq, Np, S)."""
        centres = np.asarray(q, dtype=float).reshape(-1, self.lattice.d)
        momenta = np.asarray(p, dtype=float).reshape(-1, self.lattice.d)
        disp = self._displacements(centres)
        return np.exp(1j * np.einsum("pd,qsd->qps", momenta, disp) / self.hbar)

    def windows(self, grid: PhaseGrid) -> NDArray[np.complex128]:
        """Lattice vectors of every phase point, shape (Nq·Np, S), q-major."""
        env = self.envelopes(grid.q_points)
        waves = self.phases(grid.q_points, grid.p_points)
        return (env[:, None, :] * waves).reshape(-1, self.lattice.n_sites)

    def gradient_norm_sq(self) -> float:
        """‖∇f‖² of the normalized profile in scaled coordinates, by lattice quadrature."""
        z = self._scaled(np.zeros((1, self.lattice.d)))[0]
        grad = self.normalization * profile_gradient(self.profile, self.radius, z)
        return float(np.sum(grad**2)) * self.lattice.cell_volume * self.hbar ** (-self.lattice.d / 2.0)

    def check_grid(self, grid: PhaseGrid) -> None:
        if grid.d != self.lattice.d:
            raise InvalidInput(f"Phase grid dimension {grid.d} does not match lattice dimension {self.lattice.d}")
        if grid.full_zone and grid.n_p < self.window_sites:
            logger.warning(
                f"n_p={grid.n_p} is below the window width of {self.window_sites} sites; "
                "phase-space identities are approximate"
            )


def coherent_state(fam: CoherentFamily, q: ArrayLike, p: ArrayLike) -> NDArray[np.complex128]:
    """Lattice vector of f^ℏ_{q,p}, normalized in ℓ² (equivalently in L² by lattice quadrature)."""
    env = fam.envelopes(q)
    return (env[:, None, :] * fam.phases(q, p))[0, 0]
