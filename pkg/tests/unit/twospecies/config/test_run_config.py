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
import os
from unittest import mock

import pytest

from twospecies.config import CONFIG_ENV_VARIABLE_NAME, QuantumSection, RunConfig, RunConfigReader
from twospecies.errors import InvalidConfig, InvalidInput
from twospecies.husimi import ProfileKind
from twospecies.metrics import TransportMode
from twospecies.potentials import PotentialKind

TEST_CONFIG_PATH = f"{os.path.dirname(__file__)}/test_run_config.yml"

MINIMAL = {"scaling": {"N1": 1, "N2": 1}, "lattice": {"M": 8, "dx": 1.0}}


class TestRunConfigReader:
    """Test getting the config path from env variable"""

    @mock.patch.dict(os.environ, {CONFIG_ENV_VARIABLE_NAME: "from_env.yml"})
    def test_get_config_path(self):
        assert RunConfigReader.get_config_path(config_path=None) == "from_env.yml"
        assert RunConfigReader.get_config_path(config_path="given.yml") == "given.yml"

    @mock.patch.dict(os.environ, {CONFIG_ENV_VARIABLE_NAME: TEST_CONFIG_PATH})
    def test_load_from_env(self):
        assert RunConfigReader.load_config().seed == 7

    """Test loading the example config"""

    def test_load_config(self):
        config = RunConfigReader.load_config(TEST_CONFIG_PATH)
        assert config.scaling.N == 3
        assert config.scaling.hbar == pytest.approx(1.0 / 3.0)
        assert config.lattice.n_sites == 12
        assert config.potentials.v11.kind is PotentialKind.GAUSSIAN
        assert config.potentials.v22.is_zero
        assert config.potentials.v12.kind is PotentialKind.BAND_LIMITED
        assert config.coherent.profile is ProfileKind.BUMP
        assert config.quantum.snapshot_steps() == (0, 5)
        assert config.hierarchy.orders == ((1, 0), (1, 1))
        assert config.picard.L == 4
        assert config.compare.mode is TransportMode.ENTROPIC
        assert config.output_dir == "runs/demo"
        config.validate()

    @mock.patch.dict(os.environ, {}, clear=True)
    def test_missing_path(self):
        with pytest.raises(InvalidConfig):
            RunConfigReader.load_config()
        with pytest.raises(InvalidConfig):
            RunConfigReader.load_config(f"{os.path.dirname(__file__)}/does_not_exist.yml")

    def test_broken_yaml(self):
        with pytest.raises(InvalidConfig):
            RunConfigReader.from_yaml("scaling: [N1: 1")
        with pytest.raises(InvalidConfig):
            RunConfigReader.from_yaml("")


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig.from_dict(MINIMAL)
        assert config.scaling.d == 1
        assert config.potentials.v11.is_zero and config.potentials.v12.is_zero
        assert config.hierarchy.k_max == 2
        assert config.hierarchy.orders == ((1, 0), (0, 1))
        assert config.compare.mode is TransportMode.EXACT
        assert config.phase_grid.p_max is None
        grid = config.build_phase_grid()
        assert grid.full_zone
        assert grid.shape == (8, 8)

    def test_round_trip(self):
        config = RunConfigReader.load_config(TEST_CONFIG_PATH)
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_unknown_keys(self):
        with pytest.raises(InvalidConfig, match="potentials.v11.width"):
            RunConfig.from_dict({**MINIMAL, "potentials": {"v11": {"kind": "gaussian", "width": 1.0}}})
        with pytest.raises(InvalidConfig, match="quantum.dt"):
            RunConfig.from_dict({**MINIMAL, "quantum": {"dt": 0.1}})
        with pytest.raises(InvalidConfig, match="verbose"):
            RunConfig.from_dict({**MINIMAL, "verbose": True})

    def test_invalid_values(self):
        with pytest.raises(InvalidConfig, match="Missing config section 'lattice'"):
            RunConfig.from_dict({"scaling": {"N1": 1}})
        with pytest.raises(InvalidConfig):
            RunConfig.from_dict({**MINIMAL, "quantum": {"steps": "many"}})
        with pytest.raises(InvalidConfig):
            RunConfig.from_dict({**MINIMAL, "potentials": {"v12": {"kind": "coulomb"}}})
        with pytest.raises(InvalidConfig):
            RunConfig.from_dict({**MINIMAL, "hierarchy": {"k_max": 1, "orders": [[1, 1]]}})
        with pytest.raises(InvalidConfig):
            RunConfig.from_dict({**MINIMAL, "vlasov": {"self_convergence": "yes"}})

    def test_validate(self):
        RunConfig.from_dict(MINIMAL).validate()
        with pytest.raises(InvalidInput):
            RunConfig.from_dict({**MINIMAL, "scaling": {"N1": 9, "N2": 0}}).validate()

    def test_with_counts(self):
        config = RunConfig.from_dict({**MINIMAL, "initial": {"species1": [[1.0, 0.0]], "species2": [[3.0, 0.5]]}})
        scaled = config.with_counts(2, 2)
        assert scaled.scaling.N == 4
        assert scaled.initial.packets(1) == ()
        assert scaled.lattice == config.lattice


class TestQuantumSection:
    def test_snapshot_steps(self):
        assert QuantumSection(t_final_time=1.0, steps=4).snapshot_steps() == (0, 1, 2, 3, 4)
        assert QuantumSection(t_final_time=1.0, steps=4, snapshot_times=(0.5, 1.0)).snapshot_steps() == (2, 4)
        assert QuantumSection(t_final_time=0.0, steps=4).snapshot_steps() == (0,)
        assert QuantumSection(t_final_time=1.0, steps=4).dt == pytest.approx(0.25)
