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

import csv
import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

import numpy as np
from yaml import safe_dump

from twospecies.config.run_config import RunConfig
from twospecies.errors import InvalidInput
from twospecies.husimi.transform import HusimiMeasure
from twospecies.io.arrays import ArrayRecord
from twospecies.logs import get_logger

MANIFEST_NAME = "manifest.csv"
RESOLVED_CONFIG_NAME = "resolved_config.yaml"
MANIFEST_COLUMNS = ("path", "sha256")


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        return value
    return repr(float(value))


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    """Header row then one row per mapping, in `columns` order; other keys are rejected."""
    with open(path, "w", newline="") as file:
        writer = csv.DictWriter(file, fieldnames=list(columns), extrasaction="raise")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(value) for key, value in row.items()})


def read_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, "r", newline="") as file:
        return list(csv.DictReader(file))


def read_array(path: Path) -> ArrayRecord:
    with open(path, "rb") as file:
        return ArrayRecord.from_bytes(file.read())


class RunArtifacts:
    """Output directory of one command; every file written through it lands in manifest.csv."""

    logger = get_logger("Artifacts")

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.entries: List[Tuple[str, str]] = []

    def path(self, name: str) -> Path:
        return self.root / name

    def _record(self, path: Path) -> Path:
        digest = sha256_of(path)
        relative = path.relative_to(self.root).as_posix()
        self.entries.append((relative, digest))
        self.logger.info(f"Wrote {relative} (sha256 {digest})")
        return path

    def write_array(self, name: str, record: ArrayRecord) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as file:
            file.write(record.to_bytes())
        return self._record(path)

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        path = self.path(name)
        write_csv(path, columns, rows)
        return self._record(path)

    def write_config(self, config: RunConfig) -> Path:
        path = self.path(RESOLVED_CONFIG_NAME)
        with open(path, "w") as file:
            safe_dump(config.to_dict(), file, sort_keys=False)
        return self._record(path)

    def close(self) -> Path:
        path = self.path(MANIFEST_NAME)
        write_csv(path, MANIFEST_COLUMNS, ({"path": p, "sha256": h} for p, h in self.entries))
        self.logger.info(f"Manifest lists {len(self.entries)} artifacts under {self.root}")
        return path


def measure_columns(d: int) -> Tuple[str, ...]:
    if d == 1:
        return ("q", "p", "value")
    return tuple(f"q{i + 1}" for i in range(d)) + tuple(f"p{i + 1}" for i in range(d)) + ("value",)


def measure_rows(m: HusimiMeasure) -> Iterator[Dict[str, Any]]:
    """(q…, p…, value) per grid point of a one-slot measure, for plotting."""
    if m.rank != 1:
        raise InvalidInput(f"CSV export covers one-slot measures, got m^({m.k},{m.ell})")
    columns = measure_columns(m.grid.d)
    for i, q in enumerate(m.grid.q_points):
        for j, p in enumerate(m.grid.p_points):
            yield dict(zip(columns, [*q, *p, m.values[i, j]]))
