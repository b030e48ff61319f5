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
from typing import Any, Dict, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import j0, j1  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidConfig

# nodes for the radial Fourier inversion of band-limited potentials in d = 2, 3
RADIAL_QUADRATURE_NODES = 96


class PotentialKind(Enum):
    ZERO = "zero"
    GAUSSIAN = "gaussian"
    BAND_LIMITED = "band_limited"

    @classmethod
    def from_str(cls, kind: str) -> PotentialKind:
        for candidate in cls:
            if candidate.value == kind:
                return candidate
        raise InvalidConfig(f"Unknown potential kind '{kind}'")


def unit_sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(radius: float, d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius**d


def as_displacement(x: ArrayLike, d: int) -> NDArray[np.float64]:
    """Returns x with a trailing axis of length d; scalars and plain arrays are 1-d displacements."""
    arr = np.asarray(x, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != d:
        raise ValueError(f"Displacement has trailing dimension {arr.shape[-1]}, expected {d}")
    return arr


def minimum_image(x: ArrayLike, box_length: float) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=float)
    return arr - box_length * np.round(arr / box_length)


@dataclass(frozen=True)
class Potential:
    kind: PotentialKind
    amplitude: float = 0.0
    width_or_bandlimit: float = 1.0
    d: int = 1
    lipschitz_grad: float = field(init=False, default=0.0)
    sup_grad: float = field(init=False, default=0.0)
    fourier_band: float = field(init=False, default=0.0)
    fourier_amp: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidConfig(f"Unsupported dimension d={self.d}")
        if self.kind is not PotentialKind.ZERO and self.width_or_bandlimit <= 0:
            raise InvalidConfig(f"Potential width_or_bandlimit must be positive, got {self.width_or_bandlimit}")
        lipschitz, sup_grad, band, amp = self._constants()
        object.__setattr__(self, "lipschitz_grad", lipschitz)
        object.__setattr__(self, "sup_grad", sup_grad)
        object.__setattr__(self, "fourier_band", band)
        object.__setattr__(self, "fourier_amp", amp)

    @classmethod
    def zero(cls, d: int = 1) -> Potential:
        return cls(kind=PotentialKind.ZERO, amplitude=0.0, width_or_bandlimit=1.0, d=d)

    @classmethod
    def gaussian(cls, amplitude: float, width: float, d: int = 1) -> Potential:
        return cls(kind=PotentialKind.GAUSSIAN, amplitude=amplitude, width_or_bandlimit=width, d=d)

    @classmethod
    def band_limited(cls, amplitude: float, band: float, d: int = 1) -> Potential:
        return cls(kind=PotentialKind.BAND_LIMITED, amplitude=amplitude, width_or_bandlimit=band, d=d)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], d: int) -> Potential:
        kind = PotentialKind.from_str(str(data.get("kind", "zero")))
        return cls(
            kind=kind,
            amplitude=float(data.get("amplitude", 0.0)),
            width_or_bandlimit=float(data.get("width_or_bandlimit", 1.0)),
            d=d,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "amplitude": self.amplitude,
            "width_or_bandlimit": self.width_or_bandlimit,
        }

    @property
    def is_zero(self) -> bool:
        return self.kind is PotentialKind.ZERO or self.amplitude == 0.0

    @property
    def support_volume(self) -> float:
        """Volume of supp V̂; infinite for full-support transforms."""
        if self.is_zero:
            return 0.0
        if math.isinf(self.fourier_band):
            return math.inf
        return ball_volume(self.fourier_band, self.d)

    def _constants(self) -> Tuple[float, float, float, float]:
        a = abs(self.amplitude)
        d = self.d
        if self.is_zero:
            return 0.0, 0.0, 0.0, 0.0
        if self.kind is PotentialKind.GAUSSIAN:
            w = self.width_or_bandlimit
            sup_grad = a * math.exp(-0.5) / w
            lipschitz = a / w**2
            fourier_amp = a * (w**2 / (2.0 * math.pi)) ** (d / 2.0) * math.exp(-0.5) / w
            return lipschitz, sup_grad, math.inf, fourier_amp
        b = self.width_or_bandlimit
        omega = unit_sphere_area(d)
        # |∇V| ≤ ∫|η||V̂| and |∇²V| ≤ ∫|η|²|V̂|
        sup_grad = a * omega * b ** (d + 1) / ((d + 1) * (d + 2))
        lipschitz = a * omega * b ** (d + 2) / ((d + 2) * (d + 3))
        return lipschitz, sup_grad, b, a * b / 4.0


def _radial_kernel(s: NDArray[np.float64], d: int) -> NDArray[np.float64]:
    if d == 2:
        return 2.0 * math.pi * j0(s)
    return 4.0 * math.pi * np.sinc(s / math.pi)


def _radial_kernel_derivative(s: NDArray[np.float64], d: int) -> NDArray[np.float64]:
    if d == 2:
        return -2.0 * math.pi * j1(s)
    safe = np.where(s == 0.0, 1.0, s)
    value = (safe * np.cos(safe) - np.sin(safe)) / safe**2
    return 4.0 * math.pi * np.where(s == 0.0, 0.0, value)


def _radial_nodes(band: float) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = np.polynomial.legendre.leggauss(RADIAL_QUADRATURE_NODES)
    return 0.5 * band * (nodes + 1.0), 0.5 * band * weights


def _band_limited_radial(pot: Potential, r: NDArray[np.float64]) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """V(r) and V'(r) for the radial triangular transform in d = 2, 3."""
    d = pot.d
    k, w = _radial_nodes(pot.width_or_bandlimit)
    profile = pot.amplitude * (1.0 - k / pot.width_or_bandlimit) * k ** (d - 1) * w
    s = r[..., None] * k
    value = np.sum(profile * _radial_kernel(s, d), axis=-1)
    slope = np.sum(profile * k * _radial_kernel_derivative(s, d), axis=-1)
    return value, slope


def eval_potential(pot: Potential, x: ArrayLike) -> NDArray[np.float64]:
    disp = as_displacement(x, pot.d)
    r = np.linalg.norm(disp, axis=-1)
    if pot.is_zero:
        return np.zeros_like(r)
    if pot.kind is PotentialKind.GAUSSIAN:
        w = pot.width_or_bandlimit
        return pot.amplitude * np.exp(-(r**2) / (2.0 * w**2))
    b = pot.width_or_bandlimit
    if pot.d == 1:
        bx = b * r
        small = bx < 1e-2
        safe = np.where(small, 1.0, r)
        closed = 2.0 * (1.0 - np.cos(b * safe)) / (b * safe**2)
        series = b - b**3 * r**2 / 12.0 + b**5 * r**4 / 360.0
        return pot.amplitude * np.where(small, series, closed)
    value, _ = _band_limited_radial(pot, r)
    return value


def eval_grad(pot: Potential, x: ArrayLike) -> NDArray[np.float64]:
    disp = as_displacement(x, pot.d)
    if pot.is_zero:
        return np.zeros_like(disp)
    if pot.kind is PotentialKind.GAUSSIAN:
        w = pot.width_or_bandlimit
        value = eval_potential(pot, disp)
        return -disp / w**2 * value[..., None]
    r = np.linalg.norm(disp, axis=-1)
    b = pot.width_or_bandlimit
    if pot.d == 1:
        x1 = disp[..., 0]
        bx = b * np.abs(x1)
        small = bx < 1e-2
        safe = np.where(small, 1.0, x1)
        closed = 2.0 / b * (b * np.sin(b * safe) / safe**2 - 2.0 * (1.0 - np.cos(b * safe)) / safe**3)
        series = -(b**3) * x1 / 6.0 + b**5 * x1**3 / 90.0
        return (pot.amplitude * np.where(small, series, closed))[..., None]
    _, slope = _band_limited_radial(pot, r)
    safe_r = np.where(r == 0.0, 1.0, r)
    return np.where((r == 0.0)[..., None], 0.0, disp * (slope / safe_r)[..., None])


def eval_fourier(pot: Potential, eta: ArrayLike) -> NDArray[np.float64]:
    """V̂ under the convention V(x) = ∫ V̂(η) e^{iη·x} dη."""
    wave = as_displacement(eta, pot.d)
    k = np.linalg.norm(wave, axis=-1)
    if pot.is_zero:
        return np.zeros_like(k)
    if pot.kind is PotentialKind.GAUSSIAN:
        w = pot.width_or_bandlimit
        return pot.amplitude * (w**2 / (2.0 * math.pi)) ** (pot.d / 2.0) * np.exp(-(w**2) * k**2 / 2.0)
    b = pot.width_or_bandlimit
    return pot.amplitude * np.clip(1.0 - k / b, 0.0, None)


def eval_periodic(pot: Potential, x: ArrayLike, box_length: float) -> NDArray[np.float64]:
    return eval_potential(pot, minimum_image(as_displacement(x, pot.d), box_length))


def eval_grad_periodic(pot: Potential, x: ArrayLike, box_length: float) -> NDArray[np.float64]:
    return eval_grad(pot, minimum_image(as_displacement(x, pot.d), box_length))


@dataclass(frozen=True)
class PotentialSet:
    v11: Potential
    v22: Potential
    v12: Potential

    @property
    def v21(self) -> Potential:
        return self.v12

    @property
    def d(self) -> int:
        return self.v11.d

    @classmethod
    def zero(cls, d: int = 1) -> PotentialSet:
        return cls(v11=Potential.zero(d), v22=Potential.zero(d), v12=Potential.zero(d))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], d: int) -> PotentialSet:
        return cls(
            v11=Potential.from_dict(data.get("v11", {}), d),
            v22=Potential.from_dict(data.get("v22", {}), d),
            v12=Potential.from_dict(data.get("v12", {}), d),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"v11": self.v11.to_dict(), "v22": self.v22.to_dict(), "v12": self.v12.to_dict()}

    def pair(self, alpha: int, beta: int) -> Potential:
        if alpha == 1 and beta == 1:
            return self.v11
        if alpha == 2 and beta == 2:
            return self.v22
        if {alpha, beta} == {1, 2}:
            return self.v12
        raise ValueError(f"Unknown species pair ({alpha}, {beta})")

    def swapped(self) -> PotentialSet:
        return PotentialSet(v11=self.v22, v22=self.v11, v12=self.v12)

    @property
    def is_zero(self) -> bool:
        return self.v11.is_zero and self.v22.is_zero and self.v12.is_zero

    def items(self) -> Dict[str, Potential]:
        return {"v11": self.v11, "v22": self.v22, "v12": self.v12}
