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
from pathlib import Path
from typing import Any, Dict
from unittest import mock

import numpy as np
import pytest
import yaml

from twospecies.cli import COMMANDS, build_parser, compare_distributions, main
from twospecies.cli.commands import PACKET_MOMENTUM, _packet_centres, convergence_ratio
from twospecies.config import RunConfig
from twospecies.errors import EXIT_CAPACITY, EXIT_CONFIG, EXIT_INTERNAL, EXIT_OK, InvalidInput, MismatchedGrids
from twospecies.fock import ScalingContext
from twospecies.husimi import PhaseGrid
from twospecies.io import MANIFEST_NAME, RESOLVED_CONFIG_NAME, read_csv, sha256_of
from twospecies.vlasov import SpeciesPairDistribution, mass


def with_counts(config: Dict[str, Any], N1: int, N2: int) -> Dict[str, Any]:
    return {**config, "scaling": {"N1": N1, "N2": N2, "d": 1}}


def write_config(tmp_path: Path, config: Dict[str, Any]) -> str:
    path = tmp_path / "run.yml"
    with open(path, "w") as file:
        yaml.safe_dump(config, file)
    return str(path)


def run_command(tmp_path: Path, command: str, config: Dict[str, Any]) -> int:
    return main([command, "--config", write_config(tmp_path, config), "--output-dir", str(tmp_path / "out")])


class TestParser:
    def test_commands(self):
        args = build_parser().parse_args(["--log-level", "debug", "picard", "--config", "run.yml"])
        assert args.command == "picard"
        assert args.log_level == "DEBUG"
        assert args.output_dir is None
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate"])


class TestValidateConfig:
    def test_valid(self, tmp_path, run_config_dict):
        assert main(["validate-config", "--config", write_config(tmp_path, run_config_dict)]) == EXIT_OK

    def test_config_errors(self, tmp_path, run_config_dict):
        too_many = with_counts(run_config_dict, 9, 0)
        assert main(["validate-config", "--config", write_config(tmp_path, too_many)]) == EXIT_CONFIG
        unknown = {**run_config_dict, "quantum": {"step_count": 4}}
        assert main(["validate-config", "--config", write_config(tmp_path, unknown)]) == EXIT_CONFIG
        assert main(["validate-config", "--config", str(tmp_path / "missing.yml")]) == EXIT_CONFIG


class TestCommands:
    def test_quantum(self, tmp_path, run_config_dict):
        assert run_command(tmp_path, "quantum", with_counts(run_config_dict, 1, 0)) == EXIT_OK
        out = tmp_path / "out" / "quantum"
        assert (out / RESOLVED_CONFIG_NAME).is_file()
        manifest = read_csv(out / MANIFEST_NAME)
        paths = {entry["path"] for entry in manifest}
        assert {"state_0000.v2s", "husimi_10_0002.v2s", "husimi_10_0002.csv", "property_checks.csv"} <= paths
        for entry in manifest:
            assert entry["sha256"] == sha256_of(out / entry["path"])
        identities = read_csv(out / "identities.csv")
        assert len(identities) == 3
        assert all(float(row["number_moment_gap"]) < 1e-10 for row in identities)

    def test_capacity(self, tmp_path, run_config_dict):
        config = with_counts(run_config_dict, 4, 4)
        config["quantum"] = {**config["quantum"], "capacity": 100}
        assert run_command(tmp_path, "quantum", config) == EXIT_CAPACITY

    def test_vlasov(self, tmp_path, run_config_dict):
        assert run_command(tmp_path, "vlasov", run_config_dict) == EXIT_OK
        out = tmp_path / "out" / "vlasov"
        report = {row["quantity"]: row["value"] for row in read_csv(out / "vlasov_report.csv")}
        assert "free_transport_gap" in report
        assert float(report["mass1_drift"]) < 1e-8
        assert (out / "vlasov_0000.v2s").is_file()
        assert len(read_csv(out / "conservation.csv")) == 5

    def test_compare(self, tmp_path, run_config_dict):
        assert run_command(tmp_path, "compare", run_config_dict) == EXIT_OK
        rows = read_csv(tmp_path / "out" / "compare" / "w1.csv")
        assert [float(row["t"]) for row in rows] == pytest.approx([0.0, 0.1, 0.2])
        assert float(rows[0]["W1_species1"]) < 1e-12
        assert all(float(row["W1_species2"]) >= 0.0 for row in rows)

    def test_hierarchy_without_interaction(self, tmp_path, run_config_dict):
        assert run_command(tmp_path, "hierarchy", run_config_dict) == EXIT_OK
        out = tmp_path / "out" / "hierarchy"
        collisions = [row for row in read_csv(out / "hierarchy_terms.csv") if row["term"].startswith("collision")]
        assert len(collisions) == 8
        assert all(float(row["norm"]) == 0.0 for row in collisions)
        assert len(read_csv(out / "consistency.csv")) == 2

    def test_sweep(self, tmp_path, run_config_dict):
        config = {**run_config_dict, "sweep": {"N_values": [[1, 1], [2, 1], [2, 2]]}}
        assert run_command(tmp_path, "sweep", config) == EXIT_OK
        out = tmp_path / "out" / "sweep"
        w1 = read_csv(out / "sweep_w1.csv")
        assert [(row["N1"], row["N2"]) for row in w1] == [("1", "1"), ("2", "1"), ("2", "2")]
        assert [float(row["hbar"]) for row in w1] == pytest.approx([1 / 2, 1 / 3, 1 / 4])
        quantities = {row["quantity"] for row in read_csv(out / "sweep_slopes.csv")}
        assert {"transport_1", "W1_species1", "W1_species2"} <= quantities
        assert len(read_csv(out / "sweep_remainders.csv")) == 27

    def test_sweep_w1_decreases_with_matched_packets(self, tmp_path, run_config_dict):
        # free flow on a fine lattice; packets stay apart so each one is a coherent state
        config = {
            **run_config_dict,
            "lattice": {"M": 48, "dx": 0.125},
            "quantum": {"t_final_time": 0.5, "steps": 5},
            "vlasov": {"dt_time": 0.01, "t_final_time": 0.5},
            "sweep": {"N_values": [[1, 1], [2, 1], [3, 1]]},
        }
        assert run_command(tmp_path, "sweep", config) == EXIT_OK
        out = tmp_path / "out" / "sweep"
        w1 = read_csv(out / "sweep_w1.csv")
        assert [float(row["hbar"]) for row in w1] == pytest.approx([1 / 2, 1 / 3, 1 / 4])
        for row in w1:
            fraction = int(row["N1"]) / int(row["N"])
            assert float(row["W1_per_mass_species1"]) == pytest.approx(float(row["W1_species1"]) / fraction)
        per_mass = [float(row["W1_per_mass_species1"]) for row in w1]
        assert all(b < a for a, b in zip(per_mass, per_mass[1:]))
        slopes = {row["quantity"]: row for row in read_csv(out / "sweep_slopes.csv")}
        for column in ("W1_species1", "W1_species2"):
            assert slopes[column]["monotone_decreasing"] == "True"
            assert float(slopes[column]["slope"]) > 0.0

    def test_matched_packets_share_one_profile(self, run_config_dict):
        base = RunConfig.from_dict({**run_config_dict, "lattice": {"M": 24, "dx": 0.5}})
        length = base.lattice.length
        # u(q) = a sin(2πq/L) + b cos(2πq/L), fitted on the three-packet sample
        reference = _packet_centres(base.with_counts(3, 1), 1)
        angle = 2.0 * np.pi * reference[:, 0] / length
        basis = np.stack([np.sin(angle), np.cos(angle)], axis=1)
        (a, b), *_ = np.linalg.lstsq(basis, reference[:, 1], rcond=None)
        assert np.hypot(a, b) == pytest.approx(PACKET_MOMENTUM)
        for N1 in (1, 2, 4):
            centres = _packet_centres(base.with_counts(N1, 1), 1)
            assert centres.shape == (N1, 2)
            angle = 2.0 * np.pi * centres[:, 0] / length
            assert centres[:, 1] == pytest.approx(a * np.sin(angle) + b * np.cos(angle), abs=1e-12)
        packets = {"species1": [[1.0, 0.2]], "species2": [[2.0, -0.1]]}
        configured = RunConfig.from_dict({**run_config_dict, "initial": packets})
        assert _packet_centres(configured, 2).tolist() == [[2.0, -0.1]]

    def test_picard_needs_band_limit(self, tmp_path, run_config_dict):
        potentials = {"v12": {"kind": "gaussian", "amplitude": 1.0, "width_or_bandlimit": 1.0}}
        assert run_command(tmp_path, "picard", {**run_config_dict, "potentials": potentials}) == EXIT_CONFIG

    def test_unexpected_failure(self, tmp_path, run_config_dict):
        def broken(config, artifacts):
            raise RuntimeError("boom")

        with mock.patch.dict(COMMANDS, {"quantum": broken}):
            assert run_command(tmp_path, "quantum", run_config_dict) == EXIT_INTERNAL


class TestCompareDistributions:
    ctx = ScalingContext(2, 1, 1)
    grid = PhaseGrid.kinetic_grid(box_length=4.0, n_q=8, p_max=3.0, n_p=9)

    def pair(self, grid: PhaseGrid, t: float = 0.0) -> SpeciesPairDistribution:
        q = grid.q_points[:, 0]
        p = grid.p_points[:, 0]
        bump = np.outer(np.exp(-((q - 2.0) ** 2)), np.exp(-(p**2) / 2.0))
        return SpeciesPairDistribution(bump, 0.5 * bump, grid, self.ctx, t)

    def test_self_distance(self):
        states = [self.pair(self.grid, 0.0), self.pair(self.grid, 0.5)]
        rows = compare_distributions(states, states)
        assert len(rows) == 2
        for row in rows:
            assert row["W1_species1"] == pytest.approx(0.0, abs=1e-12)
            assert row["W1_species2"] == pytest.approx(0.0, abs=1e-12)
            assert row["N"] == 3

    def test_rejects(self):
        other = PhaseGrid.kinetic_grid(box_length=4.0, n_q=8, p_max=3.0, n_p=11)
        with pytest.raises(MismatchedGrids):
            compare_distributions([self.pair(self.grid)], [self.pair(other)])
        with pytest.raises(InvalidInput):
            compare_distributions([self.pair(self.grid, 0.0)], [self.pair(self.grid, 0.5)])


class TestConvergenceRatio:
    grid = PhaseGrid.kinetic_grid(box_length=8.0, n_q=128, p_max=6.0, n_p=97)

    def config(self, dt: float) -> RunConfig:
        gaussian = {"kind": "gaussian", "amplitude": 1.0, "width_or_bandlimit": 0.5}
        return RunConfig.from_dict(
            {
                "scaling": {"N1": 2, "N2": 2, "d": 1},
                "lattice": {"M": 16, "dx": 0.5},
                "potentials": {
                    "v11": gaussian,
                    "v22": gaussian,
                    "v12": {"kind": "gaussian", "amplitude": -0.6, "width_or_bandlimit": 0.8},
                },
                "vlasov": {"dt_time": dt, "t_final_time": 1.0},
            }
        )

    def initial(self) -> SpeciesPairDistribution:
        ctx = ScalingContext(2, 2)
        q = self.grid.q_points[:, 0]
        p = self.grid.p_points[:, 0]
        pairs = []
        for q0, p0 in ((3.0, 0.5), (5.0, -0.5)):
            dq = q - q0 - 8.0 * np.round((q - q0) / 8.0)
            values = np.outer(np.exp(-(dq**2) / 0.72), np.exp(-((p - p0) ** 2) / 2.0))
            pairs.append(values * (0.5 / mass(values, self.grid)))
        return SpeciesPairDistribution(pairs[0], pairs[1], self.grid, ctx)

    def test_splitting_is_second_order(self):
        # at dt = 0.1 the splitting error dominates the per-step interpolation error
        ratio = convergence_ratio(self.config(0.1), self.initial())
        assert 2.8 <= ratio <= 5.2
