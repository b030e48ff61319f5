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
import numpy as np
import pytest
from scipy import integrate  # pyright: ignore [reportMissingTypeStubs]

from twospecies.errors import (
    BandLimitRequired,
    DepthExceedsFamily,
    ExtrapolationNeeded,
    InvalidConfig,
    InvalidInput,
    MismatchedGrids,
    NormalizationGap,
)
from twospecies.fock import ScalingContext
from twospecies.fourier import (
    PICARD_SUMMARY_COLUMNS,
    CharFamily,
    FourierGrid,
    MassConvention,
    PicardConfig,
    apply_K,
    characteristic_family,
    delta_L_bound,
    factorized_char_residual,
    interaction_characteristic,
    interaction_rep,
    picard_iterate,
    probe_columns,
    quadrature_gap,
    to_characteristic,
    vlasov_characteristic,
)
from twospecies.hierarchy import tensor_power
from twospecies.husimi import HusimiMeasure, PhaseGrid
from twospecies.potentials import Potential, PotentialSet
from twospecies.vlasov import SpeciesPairDistribution, VlasovSolver, mass, run

CTX = ScalingContext(4, 4)
FGRID = FourierGrid()


def kinetic_grid() -> PhaseGrid:
    return PhaseGrid.kinetic_grid(16.0, 128, 8.0, 65)


def coarse_grid() -> PhaseGrid:
    return PhaseGrid.kinetic_grid(16.0, 32, 8.0, 17)


def maxwellian(grid: PhaseGrid, q0: float, p0: float, target: float, width: float = 0.8) -> np.ndarray:
    q = grid.q_points[:, 0]
    p = grid.p_points[:, 0]
    values = np.outer(np.exp(-((q - q0) ** 2) / (2.0 * width**2)), np.exp(-((p - p0) ** 2) / 2.0))
    return values * (target / mass(values, grid))


def gaussian_char(xi, eta, q0: float, p0: float, width: float = 0.8):
    """Closed-form characteristic function of the Maxwellian above."""
    return np.exp(1j * (xi * p0 + eta * q0) - xi**2 / 2.0 - (width * eta) ** 2 / 2.0)


def packets(grid: PhaseGrid, shift: float = 0.0) -> SpeciesPairDistribution:
    m1 = maxwellian(grid, 7.0 + shift, 0.5, CTX.n1)
    m2 = maxwellian(grid, 9.0 - shift, -0.5, CTX.n2)
    return SpeciesPairDistribution(m1, m2, grid, CTX)


def band_limited() -> PotentialSet:
    return PotentialSet(
        v11=Potential.band_limited(1.0, 1.0),
        v22=Potential.band_limited(1.0, 1.0),
        v12=Potential.band_limited(1.0, 1.0),
    )


def mixed_band() -> PotentialSet:
    return PotentialSet(
        v11=Potential.band_limited(1.0, 1.0),
        v22=Potential.band_limited(0.8, 1.0),
        v12=Potential.band_limited(-0.5, 0.8),
    )


def product_family(state: SpeciesPairDistribution) -> CharFamily:
    """Tabulated family with exact sources for the tensor powers of a Vlasov state."""
    measures = [
        HusimiMeasure(k, ell, tensor_power(state.m1, state.m2, k, ell), state.grid, state.ctx)
        for k, ell in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    ]
    return characteristic_family(measures, FGRID, MassConvention.PRODUCT)


def box_points():
    xi, eta = FGRID.points()
    return xi[:, 0], eta[:, 0]


class TestCharacteristicFunction:
    def test_point_mass_is_a_plane_wave(self):
        grid = kinetic_grid()
        values = np.zeros(grid.shape)
        values[40, 36] = CTX.n1 / grid.cell_weights[40, 36]
        family = to_characteristic(HusimiMeasure(1, 0, values, grid, CTX), FGRID)
        xi, eta = box_points()
        q0, p0 = grid.q_axis[40], grid.p_axis[36]
        np.testing.assert_allclose(family.level(1, 0), np.exp(1j * (xi * p0 + eta * q0)), atol=1e-12)
        np.testing.assert_allclose(np.abs(family.level(1, 0)), 1.0, atol=1e-12)

    def test_gaussian_has_closed_form(self):
        grid = kinetic_grid()
        m = HusimiMeasure(1, 0, maxwellian(grid, 8.0, 0.0, CTX.n1), grid, CTX)
        mu = to_characteristic(m, FGRID).level(1, 0)
        xi, eta = box_points()
        np.testing.assert_allclose(mu, gaussian_char(xi, eta, 8.0, 0.0), atol=1e-8)
        demodulated = mu * np.exp(-1j * eta * 8.0)
        assert np.max(np.abs(demodulated.imag)) < 1e-8
        assert np.all(demodulated.real > 0.0)

    def test_origin_value_is_one(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        assert max(family.normalization_gaps().values()) < 1e-6
        assert family.max_modulus() <= 1.0 + 1e-6

    def test_mass_mismatch_is_flagged(self):
        grid = kinetic_grid()
        m = HusimiMeasure(1, 0, 1.5 * maxwellian(grid, 8.0, 0.0, CTX.n1), grid, CTX)
        with pytest.raises(NormalizationGap):
            to_characteristic(m, FGRID)

    def test_falling_convention_normalizes_pair_levels(self):
        grid = coarse_grid()
        m1 = maxwellian(grid, 8.0, 0.0, 1.0)
        # tr γ^(2,0) is N1(N1 − 1), scaled by N^2
        weight = CTX.N1 * (CTX.N1 - 1) / CTX.N**2
        m = HusimiMeasure(2, 0, weight * np.multiply.outer(m1, m1), grid, CTX)
        family = to_characteristic(m, FGRID)
        assert abs(family.level(2, 0)[FGRID.origin, FGRID.origin] - 1.0) < 1e-10
        with pytest.raises(NormalizationGap):
            to_characteristic(m, FGRID, MassConvention.PRODUCT)

    def test_factorized_levels_are_products(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        expected = np.multiply.outer(family.level(1, 0), family.level(0, 1))
        np.testing.assert_allclose(family.level(1, 1), expected, atol=1e-14)

    def test_grid_dimensions_must_agree(self):
        with pytest.raises(MismatchedGrids):
            vlasov_characteristic(packets(coarse_grid()), FourierGrid(d=2))

    def test_box_needs_odd_nodes(self):
        with pytest.raises(InvalidConfig):
            FourierGrid(nodes=16)
        assert FourierGrid(nodes=5).origin == 12


class TestInteractionRepresentation:
    def test_zero_time_is_identity(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        assert interaction_rep(family, 0.0) is family

    def test_shifts_compose(self):
        family = product_family(packets(coarse_grid()))
        stepped = interaction_rep(interaction_rep(family, 0.2), 0.3)
        direct = interaction_rep(family, 0.5)
        assert stepped.t == pytest.approx(0.5)
        for key in ((1, 0), (1, 1)):
            np.testing.assert_allclose(stepped.level(*key), direct.level(*key), atol=1e-12)

    def test_shift_is_an_argument_substitution(self):
        grid = kinetic_grid()
        family = vlasov_characteristic(packets(grid), FGRID)
        shifted = interaction_rep(family, 0.4)
        xi, eta = box_points()
        expected = gaussian_char(xi - 0.4 * eta, eta, 7.0, 0.5)
        np.testing.assert_allclose(shifted.level(1, 0), expected, atol=1e-8)
        assert shifted.max_modulus() <= 1.0 + 1e-6

    def test_free_transport_is_constant(self):
        initial = packets(kinetic_grid())
        final = run(initial, PotentialSet.zero(), 1.0, 1.0).final
        before = interaction_characteristic(initial, FGRID)
        after = interaction_characteristic(final, FGRID)
        assert after.t == pytest.approx(1.0)
        for key in ((1, 0), (0, 1), (1, 1)):
            np.testing.assert_allclose(after.level(*key), before.level(*key), atol=1e-6)

    def test_bare_tables_flag_extrapolation(self):
        xi, eta = box_points()
        table = np.exp(-(xi**2) / 2.0 - eta**2 / 2.0).astype(complex)
        family = CharFamily(FGRID, CTX, {(1, 0): table}, k_max=1)
        with pytest.raises(ExtrapolationNeeded) as caught:
            interaction_rep(family, 0.25)
        assert 0.0 < caught.value.fraction < 1.0

        shifted = interaction_rep(family, 0.25, extrapolate=True).level(1, 0)
        inside = np.abs(xi - 0.25 * eta) <= FGRID.xi_max
        expected = np.exp(-((xi - 0.25 * eta) ** 2) / 2.0 - eta**2 / 2.0)
        np.testing.assert_allclose(shifted[inside], expected[inside], atol=5e-3)


class TestKOperator:
    def test_zero_potentials_give_zero(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        out = apply_K(family, 0.3, PotentialSet.zero())
        assert set(out.levels) == {(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
        for values in out.levels.values():
            assert not np.any(values)

    def test_gaussian_potential_is_rejected(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        pots = PotentialSet(Potential.gaussian(1.0, 0.5), Potential.zero(), Potential.zero())
        with pytest.raises(BandLimitRequired):
            apply_K(family, 0.1, pots)

    def test_single_species_branch(self):
        pots = PotentialSet(Potential.band_limited(1.0, 1.0), Potential.zero(), Potential.zero())
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        t = 0.3
        kicked = apply_K(family, t, pots, [(1, 0)]).level(1, 0)

        def integrand(eta_p, xi, eta, part):
            phi = gaussian_char(xi + eta_p * t, eta + eta_p, 7.0, 0.5) * gaussian_char(-eta_p * t, -eta_p, 7.0, 0.5)
            value = CTX.n1 * (1.0 - abs(eta_p)) * eta_p * (xi - eta * t) * phi
            return value.real if part == "re" else value.imag

        xi, eta = box_points()
        scale = np.max(np.abs(kicked))
        for index in np.random.default_rng(7).choice(FGRID.size, size=10, replace=False):
            args = (xi[index], eta[index])
            re: float = integrate.quad(integrand, -1.0, 1.0, args=args + ("re",), points=[0.0], epsabs=1e-13)[0]
            im: float = integrate.quad(integrand, -1.0, 1.0, args=args + ("im",), points=[0.0], epsabs=1e-13)[0]
            assert abs(kicked[index] - (re + 1j * im)) <= 1e-6 * scale

    def test_factorized_and_source_paths_agree(self):
        state = packets(coarse_grid())
        factorized = apply_K(vlasov_characteristic(state, FGRID), 0.2, mixed_band(), [(1, 0), (0, 1)])
        tabulated = apply_K(product_family(state), 0.2, mixed_band())
        assert set(tabulated.levels) == {(1, 0), (0, 1)}
        for key in ((1, 0), (0, 1)):
            scale = np.max(np.abs(factorized.level(*key)))
            np.testing.assert_allclose(tabulated.level(*key), factorized.level(*key), atol=1e-10 * scale)

    def test_linear_in_the_family(self):
        grid = coarse_grid()
        first, second = packets(grid), packets(grid, shift=0.7)
        measures = []
        for k, ell in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
            mixed = 0.3 * tensor_power(first.m1, first.m2, k, ell)
            mixed += 0.7 * tensor_power(second.m1, second.m2, k, ell)
            measures.append(HusimiMeasure(k, ell, mixed, grid, CTX))
        combined = apply_K(characteristic_family(measures, FGRID, MassConvention.PRODUCT), 0.2, mixed_band())
        parts = [apply_K(product_family(state), 0.2, mixed_band()) for state in (first, second)]
        for key in ((1, 0), (0, 1)):
            expected = 0.3 * parts[0].level(*key) + 0.7 * parts[1].level(*key)
            scale = np.max(np.abs(expected))
            np.testing.assert_allclose(combined.level(*key), expected, atol=1e-10 * scale)

    def test_quadrature_converges(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        scale = np.max(np.abs(apply_K(family, 0.2, mixed_band(), [(1, 0)]).level(1, 0)))
        assert quadrature_gap(family, 0.2, mixed_band(), 1, 0) <= 1e-10 * scale

    def test_matches_vlasov_time_derivative(self):
        grid = kinetic_grid()
        solver = VlasovSolver(mixed_band(), grid)
        s0 = packets(grid)
        s1 = solver.step(s0, 0.01)
        snapshots = [s0, s1, solver.step(s1, 0.01)]
        assert factorized_char_residual(snapshots, mixed_band(), FGRID, 1, 0, 0.01) <= 5e-2
        assert factorized_char_residual(snapshots, mixed_band(), FGRID, 1, 1, 0.01) <= 5e-2

        stronger = PotentialSet(
            v11=Potential.band_limited(2.0, 1.0),
            v22=Potential.band_limited(1.6, 1.0),
            v12=Potential.band_limited(-1.0, 0.8),
        )
        assert factorized_char_residual(snapshots, stronger, FGRID, 1, 0, 0.01) >= 0.3

    def test_residual_needs_three_snapshots(self):
        state = packets(coarse_grid())
        with pytest.raises(InvalidInput):
            factorized_char_residual([state, state], mixed_band(), FGRID, 1, 0, 0.01)


class TestTruncationBound:
    def test_horizon(self):
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 4, 0.1)
        assert cfg.amplitude == pytest.approx(0.25)
        assert cfg.support_volume == pytest.approx(2.0)
        assert cfg.horizon == pytest.approx(0.5)
        assert cfg.xi_radius == pytest.approx(4.0)

    def test_zero_amplitude_gives_zero(self):
        cfg = PicardConfig.from_potentials(PotentialSet.zero(), FGRID, 3, 0.4)
        assert cfg.horizon == float("inf")
        assert delta_L_bound(cfg, 1, 0) == 0.0

    def test_first_term(self):
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 1, 0.25)
        # 4·2·0.25 · (4 + 4·0.25) · 0.25
        assert delta_L_bound(cfg, 1, 0) == pytest.approx(2.5)

    def test_decreasing_at_half_horizon(self):
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 6, 0.25)
        bounds = [delta_L_bound(cfg, 1, 0, depth) for depth in range(1, 41)]
        assert all(later < earlier for earlier, later in zip(bounds[2:], bounds[3:]))
        assert bounds[-1] < 1e-10

    def test_depth_is_capped(self):
        with pytest.raises(InvalidConfig):
            PicardConfig.from_potentials(band_limited(), FGRID, 7, 0.1)

    def test_gaussian_has_no_bound(self):
        pots = PotentialSet(Potential.gaussian(1.0, 0.5), Potential.zero(), Potential.zero())
        with pytest.raises(BandLimitRequired):
            PicardConfig.from_potentials(pots, FGRID, 2, 0.1)


class TestPicardSeries:
    def test_depth_one_returns_the_initial_family(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 1, 0.1)
        result = picard_iterate(family, 0.1, cfg, band_limited())
        np.testing.assert_array_equal(result.family.level(1, 0), family.level(1, 0))
        np.testing.assert_array_equal(result.family.level(1, 1), family.level(1, 1))

    def test_free_motion_keeps_the_initial_family(self):
        family = vlasov_characteristic(packets(kinetic_grid()), FGRID)
        cfg = PicardConfig.from_potentials(PotentialSet.zero(), FGRID, 4, 0.3)
        result = picard_iterate(family, 0.3, cfg, PotentialSet.zero())
        np.testing.assert_array_equal(result.family.level(0, 1), family.level(0, 1))
        assert all(result.increment(1, 0, order) == 0.0 for order in range(1, 4))

    def test_matches_vlasov_at_quarter_horizon(self):
        grid = kinetic_grid()
        initial = packets(grid)
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 6, 0.125)
        t = cfg.horizon / 4.0
        result = picard_iterate(vlasov_characteristic(initial, FGRID), t, cfg, band_limited())
        final = run(initial, band_limited(), t, t / 25.0).final
        oracle = interaction_characteristic(final, FGRID)
        start = vlasov_characteristic(initial, FGRID)
        for key in ((1, 0), (0, 1)):
            assert np.max(np.abs(result.family.level(*key) - oracle.level(*key))) <= 2e-3
            assert np.max(np.abs(oracle.level(*key) - start.level(*key))) >= 5e-3

        for order in range(1, cfg.depth):
            assert result.increment(1, 0, order) <= delta_L_bound(cfg, 1, 0, order, t)
            assert result.increment(1, 1, order) <= delta_L_bound(cfg, 1, 1, order, t)

    def test_first_order_from_sources_matches_closure(self):
        state = packets(coarse_grid())
        cfg = PicardConfig.from_potentials(mixed_band(), FGRID, 2, 0.1, closure=False)
        t = 0.1
        direct = picard_iterate(product_family(state), t, cfg, mixed_band())
        closed = picard_iterate(vlasov_characteristic(state, FGRID), t, cfg, mixed_band())
        for key in ((1, 0), (0, 1)):
            scale = closed.increment(*key, 1)
            assert scale > 0.0
            np.testing.assert_allclose(direct.terms[key][1], closed.terms[key][1], atol=1e-2 * scale)

    def test_closure_is_measured(self):
        state = packets(coarse_grid())
        cfg = PicardConfig.from_potentials(mixed_band(), FGRID, 2, 0.05)
        result = picard_iterate(product_family(state), 0.05, cfg, mixed_band())
        assert result.closure_gap is not None and result.closure_gap < 1e-12

    def test_deep_series_needs_closure(self):
        cfg = PicardConfig.from_potentials(mixed_band(), FGRID, 3, 0.1, closure=False)
        with pytest.raises(DepthExceedsFamily):
            picard_iterate(product_family(packets(coarse_grid())), 0.1, cfg, mixed_band())

    def test_time_is_bounded_by_the_horizon(self):
        family = vlasov_characteristic(packets(coarse_grid()), FGRID)
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 2, 0.1)
        with pytest.raises(InvalidInput):
            picard_iterate(family, 0.6, cfg, band_limited())
        with pytest.raises(InvalidInput):
            picard_iterate(interaction_rep(family, 0.1), 0.1, cfg, band_limited())

    def test_report_rows(self):
        family = vlasov_characteristic(packets(coarse_grid()), FGRID)
        cfg = PicardConfig.from_potentials(band_limited(), FGRID, 2, 0.05)
        result = picard_iterate(family, 0.05, cfg, band_limited())
        summary = result.summary(cfg)
        assert len(summary) == len(result.terms)
        assert all(tuple(row) == PICARD_SUMMARY_COLUMNS for row in summary)
        assert all(row["increment"] <= row["bound"] for row in summary)

        rows = result.to_rows(cfg, [(1, 0), (0, 1)])
        columns = set(probe_columns(FGRID, 2))
        assert len(rows) == 2 * FGRID.size
        assert all(set(row) <= columns for row in rows)
