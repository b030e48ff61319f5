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
from typing import Iterator, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]
from scipy.linalg import expm  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidInput, KrylovStagnation
from twospecies.fock.state import ManyBodyState
from twospecies.logs import get_logger

DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_SUBSPACE = 60
MAX_HALVINGS = 8
BREAKDOWN = 1e-14


@dataclass(frozen=True)
class KrylovStep:
    vector: NDArray[np.complex128]
    subspace: int
    error: float


class KrylovPropagator:
    """Applies exp(−iHτ/ℏ) through Arnoldi projection with an a-posteriori error estimate."""

    logger = get_logger("Krylov")

    def __init__(
        self,
        hamiltonian: sparse.spmatrix,
        hbar: float,
        tolerance: float = DEFAULT_TOLERANCE,
        max_subspace: int = DEFAULT_MAX_SUBSPACE,
    ):
        self.hamiltonian = hamiltonian
        self.hbar = hbar
        self.tolerance = tolerance
        self.max_subspace = max_subspace

    def _project(self, vector: NDArray[np.complex128], tau: float) -> KrylovStep:
        beta = float(np.linalg.norm(vector))
        if beta == 0.0:
            return KrylovStep(vector.copy(), 0, 0.0)
        dim = vector.size
        limit = min(self.max_subspace, dim)
        basis = np.zeros((limit + 1, dim), dtype=np.complex128)
        hess = np.zeros((limit + 1, limit + 1), dtype=np.complex128)
        basis[0] = vector / beta
        factor = -1j * tau / self.hbar
        error = np.inf
        for m in range(1, limit + 1):
            w = self.hamiltonian @ basis[m - 1]
            for j in range(m):
                hess[j, m - 1] = np.vdot(basis[j], w)
                w = w - hess[j, m - 1] * basis[j]
            # second pass keeps the basis orthogonal at large m
            for j in range(m):
                correction = np.vdot(basis[j], w)
                hess[j, m - 1] += correction
                w = w - correction * basis[j]
            h_next = float(np.linalg.norm(w))
            small: NDArray[np.complex128] = expm(factor * hess[:m, :m])
            coefficients = beta * small[:, 0]
            if h_next <= BREAKDOWN or m == dim:
                return KrylovStep(coefficients @ basis[:m], m, 0.0)
            error = beta * h_next * abs(small[m - 1, 0]) * abs(factor)
            if error <= self.tolerance:
                return KrylovStep(coefficients @ basis[:m], m, float(error))
            hess[m, m - 1] = h_next
            basis[m] = w / h_next
        raise KrylovStagnation(
            f"Krylov error {error:.3e} above tolerance {self.tolerance:.1e} at subspace size {limit}",
            residual=float(error),
        )

    def step(self, vector: NDArray[np.complex128], tau: float, depth: int = 0) -> NDArray[np.complex128]:
        try:
            result = self._project(vector, tau)
        except KrylovStagnation:
            if depth >= MAX_HALVINGS:
                raise
            self.logger.debug(f"Halving Krylov step {tau:.3e} (depth {depth + 1})")
            half = self.step(vector, tau / 2.0, depth + 1)
            return self.step(half, tau / 2.0, depth + 1)
        self.logger.debug(f"Krylov step tau={tau:.3e} used subspace {result.subspace} (error {result.error:.2e})")
        return result.vector


def evolve(
    state: ManyBodyState,
    hamiltonian: sparse.spmatrix,
    t_final: float,
    steps: int,
    tolerance: float = DEFAULT_TOLERANCE,
    max_subspace: int = DEFAULT_MAX_SUBSPACE,
) -> ManyBodyState:
    *_, (_, final) = trajectory(state, hamiltonian, t_final, steps, tolerance, max_subspace)
    return final


def trajectory(
    state: ManyBodyState,
    hamiltonian: sparse.spmatrix,
    t_final: float,
    steps: int,
    tolerance: float = DEFAULT_TOLERANCE,
    max_subspace: int = DEFAULT_MAX_SUBSPACE,
) -> Sequence[Tuple[float, ManyBodyState]]:
    """States at the step times 0, Δt, ..., t_final, starting with the input state."""
    return list(_walk(state, hamiltonian, t_final, steps, tolerance, max_subspace))


def _walk(
    state: ManyBodyState,
    hamiltonian: sparse.spmatrix,
    t_final: float,
    steps: int,
    tolerance: float,
    max_subspace: int,
) -> Iterator[Tuple[float, ManyBodyState]]:
    if steps < 1:
        raise InvalidInput(f"Number of steps must be positive, got {steps}")
    if hamiltonian.shape != (state.amplitudes.size, state.amplitudes.size):
        raise InvalidInput(
            f"Hamiltonian shape {hamiltonian.shape} does not match state dimension {state.amplitudes.size}"
        )
    propagator = KrylovPropagator(hamiltonian, state.ctx.hbar, tolerance, max_subspace)
    propagator.logger.info(f"Evolving state to t={t_final} in {steps} steps...")
    dt = t_final / steps
    vector = state.amplitudes
    yield 0.0, state
    for n in range(1, steps + 1):
        vector = propagator.step(vector, dt)
        yield n * dt, state.with_amplitudes(vector)
