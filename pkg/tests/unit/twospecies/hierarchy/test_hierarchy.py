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
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import InvalidInput, MissingLevel, OrderTooHigh
from twospecies.fock import (
    LatticeConfig,
    ScalingContext,
    build_basis,
    build_hamiltonian,
    interaction_diagonal,
    slater_initial_state,
    trajectory,
)
from twospecies.hierarchy import (
    REMAINDER_COLUMNS,
    REMAINDER_NAMES,
    HusimiFamily,
    ProbeBattery,
    bbgky_consistency,
    collision_term,
    factorized_residual,
    hierarchy_terms,
    levels_up_to,
    p_derivative,
    path_gradient,
    quantum_remainders,
    tensor_power,
    transport_term,
    vlasov_hierarchy_rhs,
    weak_balance,
)
from twospecies.husimi import CoherentFamily, PhaseGrid, ProfileKind, husimi_time_derivative
from twospecies.potentials import Potential, PotentialSet, eval_potential
from twospecies.vlasov import SpeciesPairDistribution, VlasovSolver, density, force_field, mass


def random_orbitals(count: int, n_sites: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(count, n_sites)) + 1j * rng.normal(size=(count, n_sites))
    q, _ = np.linalg.qr(raw.T)
    return q.T


def maxwellian(grid: PhaseGrid, q0: float, p0: float, target: float, width: float = 0.8) -> np.ndarray:
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


def narrow() -> PotentialSet:
    return PotentialSet(
        v11=Potential.gaussian(1.0, 0.2),
        v22=Potential.gaussian(0.8, 0.2),
        v12=Potential.gaussian(-0.6, 0.2),
    )


def relative_gap(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(expected))), 1e-300)
    return float(np.max(np.abs(actual - expected))) / scale


def quantum_setup(M: int, dx: float, N1: int, N2: int, **family_options):
    lattice = LatticeConfig(M=M, dx=dx)
    ctx = ScalingContext(N1, N2)
    basis = build_basis(lattice, ctx)
    fam = CoherentFamily(lattice, ctx, **family_options)
    grid = PhaseGrid.full_zone_grid(lattice, ctx.hbar)
    return lattice, ctx, basis, fam, grid


class TestHusimiFamily:
    lattice, ctx, basis, fam, grid = quantum_setup(8, 0.4, 2, 1)
    state = slater_initial_state(random_orbitals(2, 8, 3), random_orbitals(1, 8, 4), basis)

    def test_levels_respect_particle_counts(self):
        assert levels_up_to(2) == [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        assert set(levels_up_to(2, self.ctx)) == {(1, 0), (0, 1), (2, 0), (1, 1)}

    def test_from_state(self):
        family = HusimiFamily.from_state(self.state, self.fam, self.grid)
        assert set(family.levels) == {(1, 0), (0, 1), (2, 0), (1, 1)}
        assert not family.is_factorized
        assert family.vanishes(0, 2)
        assert not np.any(family.level(0, 2))
        assert family.has_level(1, 1)

    def test_recursion_of_tabulated_levels(self):
        family = HusimiFamily.from_state(self.state, self.fam, self.grid)
        reports = family.recursion_report()
        assert set(reports) == set(family.levels)
        for report in reports.values():
            gaps = [gap for gap in report.recursion_gaps.values() if gap is not None]
            assert all(gap <= 1e-8 for gap in gaps)
            assert report.symmetry_gap <= 1e-10

    def test_missing_level(self):
        m1 = np.ones(self.grid.shape)
        family = HusimiFamily(self.grid, self.ctx, {(1, 0): m1})
        assert not family.has_level(2, 0)
        with pytest.raises(MissingLevel):
            family.level(2, 0)

    def test_depth_cap(self):
        with pytest.raises(OrderTooHigh):
            HusimiFamily(self.grid, self.ctx, k_max=4)
        with pytest.raises(OrderTooHigh):
            HusimiFamily.from_state(self.state, self.fam, self.grid, k_max=4)

    def test_level_shape_checked(self):
        with pytest.raises(InvalidInput):
            HusimiFamily(self.grid, self.ctx, {(1, 1): np.ones(self.grid.shape)})

    def test_factorized_levels_are_tensor_powers(self):
        rng = np.random.default_rng(5)
        m1 = rng.random(self.grid.shape)
        m2 = rng.random(self.grid.shape)
        family = HusimiFamily.from_factors(m1, m2, self.grid, self.ctx)
        assert family.is_factorized
        np.testing.assert_allclose(family.level(1, 1), np.multiply.outer(m1, m2))
        np.testing.assert_allclose(family.level(0, 2), tensor_power(m1, m2, 0, 2))
        assert family.level(2, 1).shape == self.grid.shape * 3
        with pytest.raises(MissingLevel):
            family.level(2, 2)


class TestVlasovHierarchy:
    grid = PhaseGrid.kinetic_grid(8.0, 32, 8.0, 65)
    ctx = ScalingContext(2, 1)

    def test_free_transport_of_single_mode(self):
        q = self.grid.q_points[:, 0]
        p = self.grid.p_points[:, 0]
        wave = 2.0 * math.pi / self.grid.box_length
        g = np.exp(-(p**2) / 2.0)
        values = np.outer(np.cos(wave * q), g)
        expected = np.outer(np.sin(wave * q), p * g) * wave
        np.testing.assert_allclose(transport_term(values, self.grid), expected, atol=1e-10)

    def test_zero_potential_is_pure_transport(self):
        m1 = maxwellian(self.grid, 3.0, 1.0, 0.5)
        m2 = maxwellian(self.grid, 5.0, -1.0, 0.5)
        family = HusimiFamily.from_factors(m1, m2, self.grid, self.ctx)
        rhs = vlasov_hierarchy_rhs(family, 1, 1, PotentialSet.zero())
        np.testing.assert_allclose(rhs, transport_term(family.level(1, 1), self.grid))

    def test_uniform_partner_exerts_no_force(self):
        m1 = maxwellian(self.grid, 3.0, 0.5, 0.5)
        partner = np.outer(np.ones(self.grid.n_q), np.exp(-(self.grid.p_points[:, 0] ** 2) / 2.0))
        family = HusimiFamily(self.grid, self.ctx, {(1, 0): m1, (2, 0): np.multiply.outer(m1, partner)})
        field = collision_term(family, 1, 0, 0, 1, interacting())
        assert float(np.max(np.abs(field))) <= 1e-12 * float(np.max(np.abs(m1)))

    def test_tabulated_product_matches_mean_field_force(self):
        m1 = maxwellian(self.grid, 3.0, 0.5, 0.5)
        m2 = maxwellian(self.grid, 5.0, -0.5, 0.5)
        pots = PotentialSet(v11=Potential.zero(), v22=Potential.zero(), v12=Potential.gaussian(-0.6, 0.8))
        family = HusimiFamily(self.grid, self.ctx, {(1, 0): m1, (1, 1): np.multiply.outer(m1, m2)})
        collision = vlasov_hierarchy_rhs(family, 1, 0, pots) - transport_term(m1, self.grid)
        forces = force_field(density(m1, self.grid), density(m2, self.grid), pots, self.grid)
        expected = forces.f1[:, 0][:, None] * p_derivative(m1, self.grid, 0, 0)
        assert relative_gap(collision, expected) <= 1e-8

    def test_factorized_and_tabulated_families_agree(self):
        grid = PhaseGrid.kinetic_grid(8.0, 8, 6.0, 9)
        m1 = maxwellian(grid, 3.0, 0.5, 0.5, width=1.2)
        m2 = maxwellian(grid, 5.0, -0.5, 0.5, width=1.2)
        factorized = HusimiFamily.from_factors(m1, m2, grid, self.ctx)
        levels = {key: tensor_power(m1, m2, *key) for key in ((1, 1), (2, 1), (1, 2))}
        tabulated = HusimiFamily(grid, self.ctx, levels)
        expected = vlasov_hierarchy_rhs(factorized, 1, 1, interacting())
        assert relative_gap(vlasov_hierarchy_rhs(tabulated, 1, 1, interacting()), expected) <= 1e-10

    def test_missing_upper_level(self):
        m1 = maxwellian(self.grid, 3.0, 0.5, 0.5)
        family = HusimiFamily(self.grid, self.ctx, {(1, 0): m1})
        with pytest.raises(MissingLevel):
            vlasov_hierarchy_rhs(family, 1, 0, interacting())

    def test_invalid_order(self):
        family = HusimiFamily(self.grid, self.ctx)
        with pytest.raises(InvalidInput):
            vlasov_hierarchy_rhs(family, 0, 0, interacting())


class TestFactorizedResidual:
    grid = PhaseGrid.kinetic_grid(8.0, 64, 6.0, 33)
    ctx = ScalingContext(2, 2)

    def snapshots(self, pots: PotentialSet, dt: float = 0.01):
        m1 = maxwellian(self.grid, 3.0, 0.5, 0.5)
        m2 = maxwellian(self.grid, 5.0, -0.5, 0.5)
        s0 = SpeciesPairDistribution(m1, m2, self.grid, self.ctx)
        solver = VlasovSolver(pots, self.grid)
        s1 = solver.step(s0, dt)
        return [s0, s1, solver.step(s1, dt)]

    @pytest.mark.parametrize("k,ell", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    def test_free_flow_is_factorized(self, k, ell):
        snapshots = self.snapshots(PotentialSet.zero())
        assert factorized_residual(snapshots, PotentialSet.zero(), k, ell, 0.01) <= 1e-3

    @pytest.mark.parametrize("k,ell", [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    def test_interacting_flow_is_factorized(self, k, ell):
        snapshots = self.snapshots(interacting())
        assert factorized_residual(snapshots, interacting(), k, ell, 0.01) <= 1e-2

    def test_frozen_snapshots_are_not_a_solution(self):
        s0 = self.snapshots(interacting())[0]
        assert factorized_residual([s0, s0, s0], interacting(), 1, 0, 0.01) == pytest.approx(1.0)

    def test_requires_three_snapshots(self):
        snapshots = self.snapshots(PotentialSet.zero())
        with pytest.raises(InvalidInput):
            factorized_residual(snapshots[:2], PotentialSet.zero(), 1, 0, 0.01)
        with pytest.raises(InvalidInput):
            factorized_residual(snapshots, PotentialSet.zero(), 1, 0, 0.0)


class TestQuantumRemainders:
    lattice, ctx, basis, fam, grid = quantum_setup(12, 0.25, 2, 3)
    orbitals1 = random_orbitals(2, 12, 21)
    orbitals2 = random_orbitals(3, 12, 22)
    state = slater_initial_state(orbitals1, orbitals2, basis)

    @pytest.mark.parametrize("k,ell", [(1, 0), (0, 1), (1, 1)])
    def test_interaction_terms_balance_exactly(self, k, ell):
        pots = narrow()
        interaction: sparse.csr_matrix = sparse.diags(interaction_diagonal(self.basis, pots), format="csr")
        terms = hierarchy_terms(self.state, self.fam, self.grid, k, ell, pots)
        derivative = husimi_time_derivative(self.state, interaction, self.fam, self.grid, k, ell).values
        balance = weak_balance(terms, derivative)
        lhs = np.asarray(balance.time_derivative)
        rhs = (
            np.asarray(balance.collision)
            + np.asarray(balance.potential_remainder)
            + np.asarray(balance.commutator_remainder)
        )
        assert float(np.max(np.abs(lhs))) > 0.0
        assert float(np.max(np.abs(lhs - rhs))) <= 1e-8 * float(np.max(np.abs(lhs)))

    def test_commutators_need_two_slots_of_a_species(self):
        report = quantum_remainders(self.state, self.fam, self.grid, 1, 1, narrow())
        assert report.is_zero("commutator_11")
        assert report.is_zero("commutator_22")
        assert not report.is_zero("commutator_12")
        single = quantum_remainders(self.state, self.fam, self.grid, 1, 0, narrow())
        assert all(single.is_zero(f"commutator_{suffix}") for suffix in ("11", "12", "22"))

    def test_free_particles_leave_only_transport_remainders(self):
        report = quantum_remainders(self.state, self.fam, self.grid, 1, 0, PotentialSet.zero())
        for name in REMAINDER_NAMES:
            if name.startswith(("potential_", "commutator_")):
                assert report.is_zero(name)
        assert not report.is_zero("transport_1")
        assert report.is_zero("transport_2")
        assert report.norms["transport_1"].l1 > 0.0

    def test_species_swap(self):
        swapped_ctx = ScalingContext(3, 2)
        swapped_basis = build_basis(self.lattice, swapped_ctx)
        swapped_state = slater_initial_state(self.orbitals2, self.orbitals1, swapped_basis)
        swapped_fam = CoherentFamily(self.lattice, swapped_ctx)
        pots = narrow()
        direct = quantum_remainders(self.state, self.fam, self.grid, 1, 0, pots)
        mirror = quantum_remainders(swapped_state, swapped_fam, self.grid, 0, 1, pots.swapped())
        for name, partner in (
            ("transport_1", "transport_2"),
            ("potential_11", "potential_22"),
            ("potential_12_1", "potential_12_2"),
        ):
            assert relative_gap(mirror.values(partner), direct.values(name)) <= 1e-10

    def test_order_cap(self):
        with pytest.raises(OrderTooHigh):
            hierarchy_terms(self.state, self.fam, self.grid, 2, 1, narrow())

    def test_wide_windows_rejected_with_interaction(self):
        lattice, ctx, basis, fam, grid = quantum_setup(12, 0.25, 1, 1)
        state = slater_initial_state(random_orbitals(1, 12, 1), random_orbitals(1, 12, 2), basis)
        with pytest.raises(InvalidInput):
            hierarchy_terms(state, fam, grid, 1, 0, narrow())
        hierarchy_terms(state, fam, grid, 1, 0, PotentialSet.zero())

    def test_rows(self):
        report = quantum_remainders(self.state, self.fam, self.grid, 0, 1, narrow(), ProbeBattery(self.grid))
        rows = report.to_rows()
        assert [row["term"] for row in rows] == list(REMAINDER_NAMES)
        assert all(tuple(row) == REMAINDER_COLUMNS for row in rows)
        assert all(row["N"] == 5 and row["hbar"] == pytest.approx(0.2) for row in rows)
        with pytest.raises(InvalidInput):
            report.values("collision_11")


class TestBbgkyConsistency:
    lattice, ctx, basis, fam, grid = quantum_setup(96, 0.025, 1, 1, profile=ProfileKind.TRUNCATED_GAUSSIAN)

    def packet(self, center: float, width: float, momentum: float) -> np.ndarray:
        y = self.lattice.positions[:, 0]
        shifted = y - center - self.lattice.length * np.round((y - center) / self.lattice.length)
        values = np.exp(-(shifted**2) / (2.0 * width**2)) * np.exp(1j * momentum * y / self.ctx.hbar)
        return values / np.linalg.norm(values)

    def snapshots(self, delta: float = 1e-3):
        momentum = 2.0 * math.pi * self.ctx.hbar / self.lattice.length
        state = slater_initial_state([self.packet(1.2, 0.25, momentum)], [self.packet(0.4, 0.25, 0.0)], self.basis)
        hamiltonian = build_hamiltonian(self.basis, PotentialSet.zero())
        return trajectory(state, hamiltonian, 2.0 * delta, 2), hamiltonian

    def test_free_hierarchy_closes_with_transport_remainder(self):
        snapshots, hamiltonian = self.snapshots()
        report = bbgky_consistency(snapshots, self.fam, self.grid, 1, 0, PotentialSet.zero(), hamiltonian)
        assert report.exact is not None
        assert report.gap_exact <= 1e-2
        assert report.gap <= 1e-2
        assert report.exact.gap_without_remainders > 3.0 * report.exact.gap
        assert report.to_dict()["k"] == 1

    def test_snapshot_layout(self):
        snapshots, _ = self.snapshots()
        with pytest.raises(InvalidInput):
            bbgky_consistency(snapshots[:2], self.fam, self.grid, 1, 0, PotentialSet.zero())
        (t0, s0), (t1, s1), (t2, s2) = snapshots
        with pytest.raises(InvalidInput):
            bbgky_consistency([(t0, s0), (t1, s1), (3.0 * t2, s2)], self.fam, self.grid, 1, 0, PotentialSet.zero())


class TestInteractingBbgkyConsistency:
    lattice, ctx, basis, fam, grid = quantum_setup(12, 0.5, 1, 1)

    def snapshots(self, pots: PotentialSet, delta: float = 1e-3):
        state = slater_initial_state(random_orbitals(1, 12, 31), random_orbitals(1, 12, 32), self.basis)
        hamiltonian = build_hamiltonian(self.basis, pots)
        return trajectory(state, hamiltonian, 2.0 * delta, 2), hamiltonian

    @pytest.mark.parametrize("k,ell", [(1, 0), (0, 1)])
    def test_balance_closes_with_interaction(self, k, ell):
        snapshots, hamiltonian = self.snapshots(interacting())
        report = bbgky_consistency(snapshots, self.fam, self.grid, k, ell, interacting(), hamiltonian)
        assert report.gap <= 1e-2
        assert report.gap_exact <= 1e-8
        assert report.central.gap_without_remainders > 10.0 * report.gap
        assert report.central.remainder_magnitude > 0.0

    def test_band_limited_potentials(self):
        pots = PotentialSet(
            v11=Potential.band_limited(0.5, 2.0),
            v22=Potential.band_limited(0.5, 2.0),
            v12=Potential.band_limited(-0.3, 1.5),
        )
        snapshots, hamiltonian = self.snapshots(pots)
        for k, ell in ((1, 0), (0, 1)):
            report = bbgky_consistency(snapshots, self.fam, self.grid, k, ell, pots, hamiltonian)
            assert report.gap_exact <= 1e-8
            assert report.gap <= 1e-2

    def test_path_gradient_reproduces_potential_differences(self):
        pot = Potential.band_limited(0.5, 2.0)
        path = path_gradient(self.lattice, pot)
        step = -self.lattice.displacements()
        values = eval_potential(pot, self.lattice.displacements())
        jump = values[None, :, :] - values[:, None, :]
        assert np.max(np.abs(np.einsum("uwc,uwxc->uwx", step, path) - jump)) <= 1e-12
        assert np.max(np.abs(path - np.transpose(path, (1, 0, 2, 3)))) <= 1e-12
