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
import math

import numpy as np
import pytest

from twospecies.errors import BlowUp, InvalidInput
from twospecies.fock import ScalingContext
from twospecies.husimi import PhaseGrid
from twospecies.potentials import Potential, PotentialSet, eval_grad_periodic
from twospecies.vlasov import (
    ConvolutionMethod,
    SpeciesPairDistribution,
    VlasovSolver,
    conserved_quantities,
    density,
    force_field,
    mass,
    run,
)
from twospecies.vlasov.forces import KernelCache, convolve


def maxwellian(grid: PhaseGrid, q0: float, p0: float, target: float, width: float = 0.6) -> np.ndarray:
    q = grid.q_points[:, 0]
    dq = q - q0 - grid.box_length * np.round((q - q0) / grid.box_length)
    p = grid.p_points[:, 0]
    values = np.outer(np.exp(-(dq**2) / (2.0 * width**2)), np.exp(-((p - p0) ** 2) / 2.0))
    return values * (target / mass(values, grid))


def interacting() -> PotentialSet:
    return PotentialSet(
        v11=Potential.gaussian(1.0, 0.5),
        v22=Potential.gaussian(1.0, 0.5),
        v12=Potential.gaussian(-0.6, 0.8),
    )


class TestDensity:
    grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=32, p_max=8.0, n_p=128)

    def test_zero(self):
        assert np.all(density(np.zeros(self.grid.shape), self.grid) == 0.0)

    def test_separable(self):
        g = 1.0 + 0.5 * np.sin(2.0 * math.pi * self.grid.q_points[:, 0] / 8.0)
        h = np.exp(-np.abs(self.grid.p_points[:, 0]))
        rho = density(np.outer(g, h), self.grid)
        factor = float(h @ self.grid.p_weights) / (2.0 * math.pi)
        assert np.allclose(rho, g * factor, rtol=1e-14, atol=0.0)

    def test_maxwellian_prefactor(self):
        h = np.exp(-self.grid.p_points[:, 0] ** 2 / 2.0)
        rho = density(np.outer(np.ones(self.grid.n_q), h), self.grid)
        assert np.max(np.abs(rho - 1.0 / math.sqrt(2.0 * math.pi))) <= 1e-6

    def test_mass_matches_density_integral(self):
        m = maxwellian(self.grid, 3.0, 0.5, 0.4)
        assert mass(m, self.grid) == pytest.approx(0.4, rel=1e-12)
        assert float(np.sum(density(m, self.grid))) * self.grid.dq == pytest.approx(0.4, rel=1e-12)


class TestForceField:
    grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=64, p_max=6.0, n_p=33)

    def test_uniform_density_has_no_force(self):
        rho = np.full(self.grid.n_q, 0.5 / 8.0)
        forces = force_field(rho, rho, interacting(), self.grid)
        assert np.max(np.abs(forces.f1)) <= 1e-13
        assert np.max(np.abs(forces.f2)) <= 1e-13

    def test_direct_and_fft_paths_agree(self):
        rng = np.random.default_rng(3)
        rho1, rho2 = rng.random(self.grid.n_q), rng.random(self.grid.n_q)
        direct = force_field(rho1, rho2, interacting(), self.grid, ConvolutionMethod.DIRECT)
        spectral = force_field(rho1, rho2, interacting(), self.grid, ConvolutionMethod.FFT)
        assert np.max(np.abs(direct.f1 - spectral.f1)) <= 1e-10
        assert np.max(np.abs(direct.f2 - spectral.f2)) <= 1e-10

    def test_point_mass(self):
        pots = PotentialSet(v11=Potential.zero(), v22=Potential.zero(), v12=Potential.gaussian(1.0, 0.5))
        i0 = 20
        rho2 = np.zeros(self.grid.n_q)
        rho2[i0] = 0.5 / self.grid.dq
        forces = force_field(np.zeros(self.grid.n_q), rho2, pots, self.grid)
        q = self.grid.q_points
        expected = 0.5 * eval_grad_periodic(pots.v12, q - q[i0], self.grid.box_length)
        assert np.max(np.abs(forces.f1 - expected)) <= 1e-12

    def test_species_swap(self):
        pots = interacting()
        rng = np.random.default_rng(4)
        rho = rng.random(self.grid.n_q)
        forces = force_field(rho, rho, pots, self.grid)
        assert np.max(np.abs(forces.f1 - forces.f2)) == 0.0

    def test_two_dimensional_paths_agree(self):
        grid = PhaseGrid.kinetic_grid(box_length=6.0, n_q=8, p_max=3.0, n_p=5, d=2)
        pots = PotentialSet(v11=Potential.gaussian(1.0, 0.7, d=2), v22=Potential.zero(d=2), v12=Potential.zero(d=2))
        kernel = KernelCache(pots, grid).gradient("v11")
        rho = np.random.default_rng(5).random(grid.shape[0])
        direct = convolve(kernel, rho, grid, ConvolutionMethod.DIRECT)
        spectral = convolve(kernel, rho, grid, ConvolutionMethod.FFT)
        assert direct.shape == (64, 2)
        assert np.max(np.abs(direct - spectral)) <= 1e-10


class TestStep:
    def test_free_transport_on_whole_cells_is_exact(self):
        grid = PhaseGrid.kinetic_grid(box_length=32.0, n_q=32, p_max=4.0, n_p=9)
        ctx = ScalingContext(1, 1)
        rng = np.random.default_rng(6)
        m1, m2 = rng.random(grid.shape), rng.random(grid.shape)
        initial = SpeciesPairDistribution(m1, m2, grid, ctx)
        trajectory = run(initial, PotentialSet.zero(), 4.0, 2.0)
        final = trajectory.final
        assert final.t == 4.0
        for j, p in enumerate(grid.p_axis):
            shift = int(round(4.0 * p))
            assert np.array_equal(final.m1[:, j], np.roll(m1[:, j], shift))
            assert np.array_equal(final.m2[:, j], np.roll(m2[:, j], shift))
        energies = [record.quantities.energy for record in trajectory.log]
        assert max(energies) == pytest.approx(min(energies), rel=1e-13)

    def test_free_transport_follows_characteristics(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=128, p_max=6.0, n_p=49)
        ctx = ScalingContext(1, 0)
        initial = SpeciesPairDistribution(maxwellian(grid, 4.0, 0.0, 1.0), np.zeros(grid.shape), grid, ctx)
        final = run(initial, PotentialSet.zero(), 0.3, 0.1).final
        q, p = grid.q_points[:, 0], grid.p_points[:, 0]
        shifted = q[:, None] - p[None, :] * 0.3 - 4.0
        shifted -= 8.0 * np.round(shifted / 8.0)
        expected = np.exp(-(shifted**2) / (2.0 * 0.36)) * np.exp(-(p[None, :] ** 2) / 2.0)
        expected *= 1.0 / mass(expected, grid)
        assert np.max(np.abs(final.m1 - expected)) <= 1e-3 * np.max(expected)

    def test_mass_conserved_in_interacting_step(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=48, p_max=7.0, n_p=57)
        ctx = ScalingContext(2, 3)
        state = SpeciesPairDistribution(
            maxwellian(grid, 3.0, 0.5, ctx.n1), maxwellian(grid, 5.0, -0.5, ctx.n2), grid, ctx
        )
        solver = VlasovSolver(interacting(), grid)
        for _ in range(5):
            state = solver.step(state, 0.05)
            gaps = state.mass_gaps()
            assert gaps[0] <= 1e-8 and gaps[1] <= 1e-8
            assert state.is_nonnegative()

    def test_single_species_momentum_conserved(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=32, p_max=8.0, n_p=65)
        ctx = ScalingContext(1, 0)
        q = grid.q_points[:, 0]
        m1 = maxwellian(grid, 4.0, 0.5, 1.0, width=1.2) * (1.0 + 0.3 * np.cos(2.0 * math.pi * q / 8.0))[:, None]
        m1 *= 1.0 / mass(m1, grid)
        pots = PotentialSet(v11=Potential.gaussian(1.0, 0.8), v22=Potential.zero(), v12=Potential.zero())
        trajectory = run(SpeciesPairDistribution(m1, np.zeros(grid.shape), grid, ctx), pots, 1.0, 0.01)
        momenta = [record.quantities.momentum[0] for record in trajectory.log]
        assert len(momenta) == 101
        assert max(abs(value - momenta[0]) for value in momenta) <= 1e-6

    def test_mirror_symmetry(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=40, p_max=6.0, n_p=41)
        ctx = ScalingContext(2, 2)
        m1 = maxwellian(grid, 2.4, 0.8, ctx.n1)
        mirror_q = (-np.arange(grid.n_q)) % grid.n_q

        def mirror(values: np.ndarray) -> np.ndarray:
            return values[mirror_q][:, ::-1]

        state = SpeciesPairDistribution(m1, mirror(m1), grid, ctx)
        solver = VlasovSolver(interacting(), grid)
        for _ in range(4):
            state = solver.step(state, 0.1)
            assert np.max(np.abs(state.m2 - mirror(state.m1))) <= 1e-9

    def test_blow_up(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=16, p_max=4.0, n_p=17)
        initial = maxwellian(grid, 4.0, 0.0, 1.0)
        state = SpeciesPairDistribution(initial, np.zeros(grid.shape), grid, ScalingContext(1, 0))
        with pytest.raises(BlowUp):
            VlasovSolver(PotentialSet.zero(), grid).advance(state, 0.1, reference_max=1e-6 * state.max_abs)

    def test_rejects_oversized_step(self):
        grid = PhaseGrid.kinetic_grid(box_length=1.0, n_q=16, p_max=4.0, n_p=17)
        state = SpeciesPairDistribution.zeros(grid, ScalingContext(1, 1))
        with pytest.raises(InvalidInput):
            VlasovSolver(PotentialSet.zero(), grid).step(state, 1.0)


class TestRun:
    grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=32, p_max=6.0, n_p=33)

    def initial(self) -> SpeciesPairDistribution:
        m1 = maxwellian(self.grid, 4.0, 0.0, 0.5)
        m2 = maxwellian(self.grid, 2.0, 0.0, 0.5)
        return SpeciesPairDistribution(m1, m2, self.grid, ScalingContext(1, 1))

    def test_zero_horizon_returns_initial(self):
        initial = self.initial()
        trajectory = run(initial, interacting(), 0.0, 0.1)
        assert len(trajectory.snapshots) == 1
        assert trajectory.snapshots[0] is initial
        assert len(trajectory.log) == 1

    def test_snapshots(self):
        initial = self.initial()
        trajectory = run(initial, interacting(), 0.4, 0.1, snapshot_times=[0.2])
        assert trajectory.times == pytest.approx([0.0, 0.2, 0.4])
        assert len(trajectory.log) == 5
        assert trajectory.log[-1].to_row()[0] == pytest.approx(0.4)


class TestLongRun:
    # two species with band-limited interactions on a 128 × 128 phase grid
    grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=128, p_max=8.0, n_p=128)
    pots = PotentialSet(
        v11=Potential.band_limited(0.5, 2.0),
        v22=Potential.band_limited(0.5, 2.0),
        v12=Potential.band_limited(-0.3, 1.5),
    )

    def test_conservation_over_two_time_units(self):
        ctx = ScalingContext(2, 2)
        initial = SpeciesPairDistribution(
            maxwellian(self.grid, 3.0, 0.5, ctx.n1), maxwellian(self.grid, 5.0, -0.3, ctx.n2), self.grid, ctx
        )
        trajectory = run(initial, self.pots, 2.0, 0.01)
        assert trajectory.final.t == pytest.approx(2.0)
        assert len(trajectory.log) == 201
        momenta = np.asarray([record.quantities.momentum[0] for record in trajectory.log])
        assert np.max(np.abs(momenta - momenta[0])) <= 1e-6
        assert trajectory.drift("energy") <= 1e-4
        assert max(trajectory.drift("mass1"), trajectory.drift("mass2")) <= 1e-8


class TestConservedQuantities:
    def test_zero_state(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=16, p_max=4.0, n_p=17)
        quantities = conserved_quantities(SpeciesPairDistribution.zeros(grid, ScalingContext(1, 1)), interacting())
        assert (quantities.mass1, quantities.mass2, quantities.momentum, quantities.energy) == (0.0, 0.0, (0.0,), 0.0)

    def test_uniform_interaction_energy(self):
        grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=64, p_max=8.0, n_p=129)
        ctx = ScalingContext(1, 0)
        values = np.outer(np.ones(grid.n_q), np.exp(-grid.p_points[:, 0] ** 2 / 2.0))
        values *= 1.0 / mass(values, grid)
        pots = PotentialSet(v11=Potential.gaussian(1.0, 0.5), v22=Potential.zero(), v12=Potential.zero())
        quantities = conserved_quantities(SpeciesPairDistribution(values, np.zeros(grid.shape), grid, ctx), pots)
        # ρ = 1/L, ∫V = √(2π)·0.5, kinetic ½⟨p²⟩ = ½
        expected = 0.5 + 0.5 * math.sqrt(2.0 * math.pi) * 0.5 / 8.0
        assert quantities.energy == pytest.approx(expected, rel=1e-6)
