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
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import sparse  # pyright: ignore [reportMissingTypeStubs]

from twospecies.config.run_config import RunConfig
from twospecies.errors import InvalidInput
from twospecies.fock import (
    ManyBodyState,
    TwoSpeciesBasis,
    build_basis,
    build_hamiltonian,
    expect_number_moments,
    reduced_density,
    slater_initial_state,
    trajectory,
)
from twospecies.fourier import (
    PICARD_SUMMARY_COLUMNS,
    PicardConfig,
    check_band_limited,
    interaction_characteristic,
    picard_iterate,
    probe_columns,
    vlasov_characteristic,
)
from twospecies.hierarchy import (
    REMAINDER_COLUMNS,
    HierarchyTerms,
    HusimiFamily,
    ProbeBattery,
    bbgky_consistency,
    factorized_residual,
    hierarchy_terms,
    levels_up_to,
    remainder_report,
)
from twospecies.hierarchy.remainders import PAIR_SUFFIX
from twospecies.husimi import (
    CoherentFamily,
    HusimiMeasure,
    PhaseGrid,
    PropertyReport,
    coherent_state,
    husimi_transform,
    kinetic_identity,
)
from twospecies.io import (
    RunArtifacts,
    density_record,
    husimi_record,
    measure_columns,
    measure_rows,
    state_record,
    vlasov_record,
)
from twospecies.logs import get_logger
from twospecies.metrics import TransportMode, from_grid_function, wasserstein1
from twospecies.vlasov import CONSERVATION_COLUMNS, SpeciesPairDistribution, VlasovTrajectory, advect_q, run

logger = get_logger("Commands")

PROPERTY_COLUMNS = (
    "t",
    "k",
    "ell",
    "symmetry_gap",
    "min_value",
    "max_value",
    "l1_value",
    "l1_expected",
    "l1_error",
    "recursion_gap",
    "symmetry",
    "passivity",
    "l1_norm",
    "recursion",
)
IDENTITY_COLUMNS = ("t", "kinetic", "p2_moment", "gradient_term", "rel_gap", "number_moment_gap")
REPORT_COLUMNS = ("quantity", "value")
COMPARE_COLUMNS = ("t", "W1_species1", "W1_species2", "N", "hbar")
CONSISTENCY_COLUMNS = (
    "t",
    "k",
    "ell",
    "hbar",
    "dt_probe",
    "gap",
    "gap_without_remainders",
    "remainder_magnitude",
    "gap_exact",
)
FACTORIZED_COLUMNS = ("k", "ell", "t", "residual")
PICARD_VLASOV_COLUMNS = ("k", "ell", "t", "sup_gap")
SWEEP_W1_COLUMNS = (
    "N1",
    "N2",
    "N",
    "hbar",
    "t",
    "W1_species1",
    "W1_species2",
    "W1_per_mass_species1",
    "W1_per_mass_species2",
)
SLOPE_COLUMNS = ("quantity", "k", "ell", "slope", "monotone_decreasing")

FREE_TRANSPORT_TOLERANCE = 1e-12
TIME_MATCH_TOLERANCE = 1e-9
PACKET_MOMENTUM = 0.5
FACTORIZED_LEVELS = ((2, 0), (1, 1), (0, 2))


@dataclass
class QuantumSetup:
    """Everything a quantum run needs, built once from the config."""

    config: RunConfig
    basis: TwoSpeciesBasis
    fam: CoherentFamily
    grid: PhaseGrid
    hamiltonian: sparse.spmatrix
    initial: ManyBodyState

    @classmethod
    def from_config(cls, config: RunConfig) -> QuantumSetup:
        config.validate()
        basis = build_basis(config.lattice, config.scaling, config.quantum.capacity)
        fam = config.coherent_family()
        grid = config.build_phase_grid()
        orbitals1, orbitals2 = initial_orbitals(config, fam)
        initial = slater_initial_state(orbitals1, orbitals2, basis)
        return cls(config, basis, fam, grid, build_hamiltonian(basis, config.potentials), initial)

    def trajectory(
        self, state: Optional[ManyBodyState] = None, t_final: Optional[float] = None
    ) -> Sequence[Tuple[float, ManyBodyState]]:
        """Krylov walk from `state` (default the initial state) with steps no longer than the configured one."""
        section = self.config.quantum
        start = self.initial if state is None else state
        horizon = section.t_final_time if t_final is None else t_final
        if horizon == 0.0:
            return [(0.0, start)]
        steps = section.steps
        if section.dt > 0.0:
            steps = max(1, math.ceil(horizon / section.dt - 1e-12))
        return trajectory(start, self.hamiltonian, horizon, steps, section.tolerance, section.max_subspace)

    def evolve_to(self, t: float) -> ManyBodyState:
        if t == 0.0:
            return self.initial
        return self.trajectory(t_final=t)[-1][1]

    def one_particle(self, state: ManyBodyState, t: float) -> SpeciesPairDistribution:
        """(m^(1,0), m^(0,1)) of a state as a pair of one-particle densities; absent species are zero."""
        values = []
        for level in ((1, 0), (0, 1)):
            species = 1 if level == (1, 0) else 2
            if self.config.scaling.count(species) == 0:
                values.append(np.zeros(self.grid.shape))
            else:
                values.append(husimi_transform(reduced_density(state, *level), self.fam, self.grid).values)
        return SpeciesPairDistribution(values[0], values[1], self.grid, state.ctx, t)


def _packet_centres(config: RunConfig, species: int) -> NDArray[np.float64]:
    """(count, 2d) centres: configured, or quantiles of one seeded profile per species.

    The profile is uniform along the box diagonal with momentum p = u(q), where
    u(q) = PACKET_MOMENTUM · sin(2πq/L + φ) and the phase φ depends on the seed and species only,
    so runs with different particle counts sample the same one-particle distribution.
    """
    ctx = config.scaling
    count = ctx.count(species)
    packets = config.initial.packets(species)
    if packets:
        return np.asarray(packets, dtype=float).reshape(count, 2 * ctx.d)
    length = config.lattice.length
    phase = np.random.default_rng([config.seed, species]).uniform(0.0, 2.0 * np.pi)
    offset = 0.5 if species == 1 else 0.25
    q = (np.arange(count)[:, None] + offset) * (length / max(count, 1))
    q = np.repeat(q, ctx.d, axis=1)
    p = PACKET_MOMENTUM * np.sin(2.0 * np.pi * q / length + phase)
    return np.concatenate([q, p], axis=1)


def initial_orbitals(config: RunConfig, fam: CoherentFamily) -> Tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    d = config.scaling.d
    out = []
    for species in (1, 2):
        centres = _packet_centres(config, species)
        rows = [coherent_state(fam, centre[:d], centre[d:]) for centre in centres]
        out.append(np.asarray(rows, dtype=np.complex128).reshape(len(rows), config.lattice.n_sites))
    return out[0], out[1]


def _property_row(t: float, report: PropertyReport) -> Dict[str, Any]:
    gaps = [gap for gap in report.recursion_gaps.values() if gap is not None]
    return {
        "t": t,
        "k": report.k,
        "ell": report.ell,
        "symmetry_gap": report.symmetry_gap,
        "min_value": report.min_value,
        "max_value": report.max_value,
        "l1_value": report.l1_value,
        "l1_expected": report.l1_expected,
        "l1_error": report.l1_error,
        "recursion_gap": max(gaps) if gaps else None,
        **report.flags(),
    }


def cmd_quantum(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """Slater initial data evolved under H; state, γ and m^(k,ℓ) snapshots with their property checks."""
    setup = QuantumSetup.from_config(config)
    ctx = config.scaling
    walk = setup.trajectory()
    wanted = set(config.quantum.snapshot_steps())
    property_rows: List[Dict[str, Any]] = []
    identity_rows: List[Dict[str, Any]] = []
    passed = True
    for index, (t, state) in enumerate(walk):
        if index not in wanted:
            continue
        artifacts.write_array(f"state_{index:04d}.v2s", state_record(state, t))
        measures: List[HusimiMeasure] = []
        for k, ell in levels_up_to(config.hierarchy.k_max, ctx):
            gamma = reduced_density(state, k, ell)
            m = husimi_transform(gamma, setup.fam, setup.grid)
            measures.append(m)
            artifacts.write_array(f"gamma_{k}{ell}_{index:04d}.v2s", density_record(gamma, t))
            artifacts.write_array(f"husimi_{k}{ell}_{index:04d}.v2s", husimi_record(m, t))
            if m.rank == 1:
                artifacts.write_csv(f"husimi_{k}{ell}_{index:04d}.csv", measure_columns(ctx.d), measure_rows(m))
        family = HusimiFamily.from_measures(measures, config.hierarchy.k_max)
        for report in family.recursion_report().values():
            property_rows.append(_property_row(t, report))
            passed = passed and report.passed()
        moments = [expect_number_moments(state, k, ell) for k, ell in levels_up_to(3)]
        row: Dict[str, Any] = {"t": t, "number_moment_gap": max(abs(x - 1.0) for x in moments)}
        if ctx.N1 > 0:
            identity = kinetic_identity(state, family.measure(1, 0), setup.fam)
            row.update(
                kinetic=identity.kinetic,
                p2_moment=identity.p2_moment,
                gradient_term=identity.gradient_term,
                rel_gap=identity.rel_gap,
            )
        identity_rows.append(row)
    artifacts.write_csv("property_checks.csv", PROPERTY_COLUMNS, property_rows)
    artifacts.write_csv("identities.csv", IDENTITY_COLUMNS, identity_rows)
    if not passed:
        logger.warning("Some Husimi property checks failed; see property_checks.csv")
    logger.info(f"Quantum run wrote {len(wanted)} snapshots for N1={ctx.N1}, N2={ctx.N2}, hbar={ctx.hbar:.4g}")
    return {"snapshots": len(wanted), "checks_passed": passed}


def matched_initial_data(config: RunConfig) -> SpeciesPairDistribution:
    """The t=0 one-particle Husimi measures of the configured Slater state."""
    setup = QuantumSetup.from_config(config)
    return setup.one_particle(setup.initial, 0.0)


def _vlasov_run(
    config: RunConfig,
    initial: SpeciesPairDistribution,
    t_final: float,
    dt: float,
    times: Optional[Sequence[float]] = None,
) -> VlasovTrajectory:
    return run(initial, config.potentials, t_final, dt, times, config.vlasov.method)


def free_transport_gap(result: VlasovTrajectory) -> float:
    """sup|m(T) − m(0) advected over T in one shift| relative to sup|m(0)|."""
    initial, final = result.snapshots[0], result.final
    grid = initial.grid
    elapsed = final.t - initial.t
    gap = 0.0
    for alpha in (1, 2):
        expected = advect_q(initial.species(alpha), grid, elapsed)
        gap = max(gap, float(np.max(np.abs(final.species(alpha) - expected))))
    scale = max(initial.max_abs, 1e-300)
    return gap / scale


def convergence_ratio(config: RunConfig, initial: SpeciesPairDistribution) -> float:
    """‖m_dt − m_{dt/2}‖∞ / ‖m_{dt/2} − m_{dt/4}‖∞ at the final time; about 4 for a second-order scheme."""
    section = config.vlasov
    finals = [
        _vlasov_run(config, initial, section.t_final_time, section.dt_time / factor).final for factor in (1, 2, 4)
    ]
    coarse = max(float(np.max(np.abs(finals[0].species(a) - finals[1].species(a)))) for a in (1, 2))
    fine = max(float(np.max(np.abs(finals[1].species(a) - finals[2].species(a)))) for a in (1, 2))
    return coarse / fine if fine > 0.0 else math.inf


def cmd_vlasov(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """Splitting run from matched initial data; snapshots, conservation log and drift report."""
    section = config.vlasov
    initial = matched_initial_data(config)
    result = _vlasov_run(config, initial, section.t_final_time, section.dt_time, section.snapshot_times)
    for index, snapshot in enumerate(result.snapshots):
        artifacts.write_array(f"vlasov_{index:04d}.v2s", vlasov_record(snapshot))
    artifacts.write_csv(
        "conservation.csv", CONSERVATION_COLUMNS, (dict(zip(CONSERVATION_COLUMNS, r.to_row())) for r in result.log)
    )
    momenta = np.asarray([r.quantities.momentum for r in result.log])
    report: Dict[str, Any] = {
        "mass1_drift": result.drift("mass1"),
        "mass2_drift": result.drift("mass2"),
        "energy_drift": result.drift("energy"),
        "momentum_change": float(np.max(np.abs(momenta - momenta[0]))),
        "clipped_mass": float(sum(r.clipped_mass for r in result.log)),
    }
    if config.potentials.is_zero:
        gap = free_transport_gap(result)
        report["free_transport_gap"] = gap
        report["exact_advection"] = gap <= FREE_TRANSPORT_TOLERANCE
    if section.self_convergence:
        report["convergence_ratio"] = convergence_ratio(config, initial)
    artifacts.write_csv("vlasov_report.csv", REPORT_COLUMNS, ({"quantity": k, "value": v} for k, v in report.items()))
    return report


def _species_w1(a: SpeciesPairDistribution, b: SpeciesPairDistribution, alpha: int, mode: TransportMode) -> float:
    if a.ctx.count(alpha) == 0:
        return 0.0
    first = from_grid_function(a.species(alpha), a.grid)
    second = from_grid_function(b.species(alpha), b.grid)
    return wasserstein1(first, second, mode).distance


def compare_distributions(
    left: Sequence[SpeciesPairDistribution],
    right: Sequence[SpeciesPairDistribution],
    mode: TransportMode = TransportMode.EXACT,
) -> List[Dict[str, Any]]:
    """W₁ per species between two sequences of one-particle pairs taken at the same times."""
    if len(left) != len(right):
        raise InvalidInput(f"Cannot compare {len(left)} snapshots with {len(right)}")
    rows = []
    for a, b in zip(left, right):
        a.grid.check_compatible(b.grid)
        if abs(a.t - b.t) > TIME_MATCH_TOLERANCE * max(1.0, abs(a.t)):
            raise InvalidInput(f"Snapshots at t={a.t} and t={b.t} are not simultaneous")
        rows.append(
            {
                "t": a.t,
                "W1_species1": _species_w1(a, b, 1, mode),
                "W1_species2": _species_w1(a, b, 2, mode),
                "N": a.ctx.N,
                "hbar": a.ctx.hbar,
            }
        )
    return rows


def _aligned_vlasov(config: RunConfig, initial: SpeciesPairDistribution, times: Sequence[float]) -> VlasovTrajectory:
    """Vlasov run whose step divides the quantum step, so every quantum snapshot time is a step time."""
    quantum = config.quantum
    refinement = max(1, math.ceil(quantum.dt / config.vlasov.dt_time - 1e-12))
    return _vlasov_run(config, initial, quantum.t_final_time, quantum.dt / refinement, times)


def cmd_compare(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """W₁(t) between the quantum one-particle Husimi measures and the Vlasov solution."""
    setup = QuantumSetup.from_config(config)
    wanted = set(config.quantum.snapshot_steps())
    walk = [(t, state) for index, (t, state) in enumerate(setup.trajectory()) if index in wanted]
    quantum = [setup.one_particle(state, t) for t, state in walk]
    if config.quantum.t_final_time == 0.0:
        vlasov = [quantum[0]]
    else:
        initial = setup.one_particle(setup.initial, 0.0)
        result = _aligned_vlasov(config, initial, [t for t, _ in walk])
        vlasov = [s for s in result.snapshots if any(abs(s.t - t) <= TIME_MATCH_TOLERANCE for t, _ in walk)]
    rows = compare_distributions(quantum, vlasov, config.compare.mode)
    artifacts.write_csv("w1.csv", COMPARE_COLUMNS, rows)
    terminal = rows[-1]
    logger.info(
        f"Terminal W1 at t={terminal['t']:.4g}: {terminal['W1_species1']:.4e} / {terminal['W1_species2']:.4e}"
    )
    return terminal


def _probe_snapshots(setup: QuantumSetup, t: float, delta: float) -> List[Tuple[float, ManyBodyState]]:
    start = t - delta
    before = setup.evolve_to(start)
    walk = trajectory(before, setup.hamiltonian, 2.0 * delta, 2, setup.config.quantum.tolerance)
    return [(start + s, state) for s, state in walk]


def _collision_rows(terms: HierarchyTerms, battery: ProbeBattery) -> List[Dict[str, Any]]:
    rows = []
    for suffix in PAIR_SUFFIX.values():
        term = terms.term(f"collision_{suffix}")
        weak = max((abs(term.weak(battery, b)) for b in range(len(battery))), default=0.0)
        rows.append(
            {
                "term": f"collision_{suffix}",
                "k": terms.k,
                "ell": terms.ell,
                "N": terms.ctx.N,
                "hbar": terms.ctx.hbar,
                "norm": term.l1(terms.grid),
                "weak_norm": weak,
            }
        )
    return rows


def vlasov_probe_snapshots(config: RunConfig, t: float, delta: float) -> List[SpeciesPairDistribution]:
    """Vlasov states at t−δ, t, t+δ from matched initial data."""
    initial = matched_initial_data(config)
    dt = config.vlasov.dt_time
    start = initial if t - delta <= 0.0 else _vlasov_run(config, initial, t - delta, dt).final
    half_steps = max(1, math.ceil(delta / dt - 1e-12))
    window = _vlasov_run(config, start, 2.0 * delta, delta / half_steps, [delta, 2.0 * delta])
    return [window.snapshots[0], window.snapshots[1], window.snapshots[2]]


def cmd_hierarchy(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """Collision and remainder norms, and the weak BBGKY balance, at the configured time."""
    section = config.hierarchy
    setup = QuantumSetup.from_config(config)
    snapshots = _probe_snapshots(setup, section.t_time, section.dt_probe)
    battery = ProbeBattery(setup.grid)
    term_rows: List[Dict[str, Any]] = []
    consistency_rows: List[Dict[str, Any]] = []
    hamiltonian = setup.hamiltonian if section.exact_derivative else None
    for k, ell in section.orders:
        terms = hierarchy_terms(snapshots[1][1], setup.fam, setup.grid, k, ell, config.potentials)
        term_rows += _collision_rows(terms, battery)
        term_rows += remainder_report(terms, battery).to_rows()
        report = bbgky_consistency(snapshots, setup.fam, setup.grid, k, ell, config.potentials, hamiltonian, battery)
        consistency_rows.append({"t": snapshots[1][0], **report.to_dict()})
    artifacts.write_csv("hierarchy_terms.csv", REMAINDER_COLUMNS, term_rows)
    artifacts.write_csv("consistency.csv", CONSISTENCY_COLUMNS, consistency_rows)
    summary: Dict[str, Any] = {"max_gap": max(row["gap"] for row in consistency_rows)}
    if section.factorized_residual:
        states = vlasov_probe_snapshots(config, section.t_time, section.dt_probe)
        rows = [
            {
                "k": k,
                "ell": ell,
                "t": states[1].t,
                "residual": factorized_residual(states, config.potentials, k, ell, section.dt_probe),
            }
            for k, ell in FACTORIZED_LEVELS
        ]
        artifacts.write_csv("factorized_residual.csv", FACTORIZED_COLUMNS, rows)
        summary["max_factorized_residual"] = max(row["residual"] for row in rows)
    return summary


def cmd_picard(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """Picard series of the characteristic family from matched initial data, against its truncation bound."""
    check_band_limited(config.potentials)
    section = config.picard
    ctx = config.scaling
    if ctx.N1 == 0 or ctx.N2 == 0:
        raise InvalidInput("The Picard series needs both species present")
    fgrid = config.fourier_grid()
    cfg = PicardConfig.from_potentials(
        config.potentials,
        fgrid,
        section.L,
        section.t_time,
        time_nodes=section.time_nodes,
        eta_nodes=section.eta_nodes,
        closure=section.closure,
    )
    initial = matched_initial_data(config)
    family = vlasov_characteristic(initial, fgrid)
    result = picard_iterate(family, section.t_time, cfg, config.potentials)
    artifacts.write_csv("picard_summary.csv", PICARD_SUMMARY_COLUMNS, result.summary(cfg))
    levels = [(1, 0), (0, 1)]
    artifacts.write_csv("picard_probes.csv", probe_columns(fgrid, 1), result.to_rows(cfg, levels))
    rows = []
    if section.t_time > 0.0:
        final = _vlasov_run(config, initial, section.t_time, config.vlasov.dt_time).final
        reference = interaction_characteristic(final, fgrid)
        for k, ell in levels:
            gap = float(np.max(np.abs(result.truncated(k, ell) - reference.level(k, ell))))
            rows.append({"k": k, "ell": ell, "t": section.t_time, "sup_gap": gap})
    artifacts.write_csv("picard_vlasov.csv", PICARD_VLASOV_COLUMNS, rows)
    violations = [row for row in result.summary(cfg) if row["increment"] > row["bound"]]
    for row in violations:
        logger.warning(f"Picard increment {row['increment']:.3e} above its bound {row['bound']:.3e} at L={row['L']}")
    return {"horizon": cfg.horizon, "bound_violations": len(violations)}


def _slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if len(x) < 2 or any(v <= 0.0 for v in y):
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _per_mass(row: Dict[str, Any], N1: int, N2: int) -> Dict[str, Any]:
    out = {}
    for alpha, count in ((1, N1), (2, N2)):
        value = row[f"W1_species{alpha}"]
        out[f"W1_per_mass_species{alpha}"] = value * (N1 + N2) / count if count else 0.0
    return out


def cmd_sweep(config: RunConfig, artifacts: RunArtifacts) -> Dict[str, Any]:
    """Remainder norms and terminal W₁ over particle counts, with fitted ħ-slopes.

    Trends are taken on the weak remainder norms and on W₁ per unit species mass, since the
    one-particle measures carry mass N_α/N, which changes along the sweep.
    """
    t_final = config.quantum.t_final_time
    remainder_rows: List[Dict[str, Any]] = []
    w1_rows: List[Dict[str, Any]] = []
    for N1, N2 in config.sweep.N_values:
        run_config = config.with_counts(N1, N2)
        setup = QuantumSetup.from_config(run_config)
        terminal = setup.evolve_to(t_final)
        battery = ProbeBattery(setup.grid)
        for k, ell in run_config.sweep.orders:
            terms = hierarchy_terms(terminal, setup.fam, setup.grid, k, ell, run_config.potentials)
            remainder_rows += remainder_report(terms, battery).to_rows()
        quantum = setup.one_particle(terminal, t_final)
        if t_final == 0.0:
            vlasov = quantum
        else:
            vlasov = _aligned_vlasov(run_config, setup.one_particle(setup.initial, 0.0), [t_final]).final
        (row,) = compare_distributions([quantum], [vlasov], run_config.compare.mode)
        w1_rows.append({"N1": N1, "N2": N2, **row, **_per_mass(row, N1, N2)})
    artifacts.write_csv("sweep_remainders.csv", REMAINDER_COLUMNS, remainder_rows)
    artifacts.write_csv("sweep_w1.csv", SWEEP_W1_COLUMNS, w1_rows)
    slope_rows: List[Dict[str, Any]] = []
    groups: Dict[Tuple[str, int, int], List[Dict[str, Any]]] = {}
    for row in remainder_rows:
        groups.setdefault((row["term"], row["k"], row["ell"]), []).append(row)
    for (term, k, ell), rows in groups.items():
        norms = [row["weak_norm"] for row in rows]
        slope_rows.append(
            {
                "quantity": term,
                "k": k,
                "ell": ell,
                "slope": _slope([row["hbar"] for row in rows], norms),
                "monotone_decreasing": _decreasing(norms),
            }
        )
    for alpha in (1, 2):
        values = [row[f"W1_per_mass_species{alpha}"] for row in w1_rows]
        slope_rows.append(
            {
                "quantity": f"W1_species{alpha}",
                "slope": _slope([row["hbar"] for row in w1_rows], values),
                "monotone_decreasing": _decreasing(values),
            }
        )
    artifacts.write_csv("sweep_slopes.csv", SLOPE_COLUMNS, slope_rows)
    return {"runs": len(w1_rows), "w1_decreasing": _decreasing([row["W1_per_mass_species1"] for row in w1_rows])}
