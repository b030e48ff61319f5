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

import json
import struct
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np
from numpy.typing import NDArray

from twospecies.errors import InvalidInput
from twospecies.fock.basis import TwoSpeciesBasis
from twospecies.fock.density import ReducedDensityMatrix
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.fock.state import ManyBodyState
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.husimi.transform import HusimiMeasure
from twospecies.vlasov.distribution import SpeciesPairDistribution

MAGIC = b"V2S1"
STATE_TAG = "STAT"
DENSITY_TAG = "GAMM"
HUSIMI_TAG = "HUSI"
VLASOV_TAG = "VLAS"

# magic, tag, dtype code, rank, N1, N2, d, metadata length
HEADER = struct.Struct("<4s4sBBIIBI")
SHAPE_ENTRY = struct.Struct("<Q")

DTYPE_CODES: Dict[int, np.dtype[Any]] = {
    1: np.dtype("<f8"),
    2: np.dtype("<c16"),
    3: np.dtype("<i8"),
}


def _dtype_code(values: NDArray[Any]) -> int:
    for code, dtype in DTYPE_CODES.items():
        if values.dtype.kind == dtype.kind:
            return code
    raise InvalidInput(f"Arrays of dtype {values.dtype} cannot be serialized")


@dataclass(frozen=True, eq=False)
class ArrayRecord:
    """One tagged array with the scaling context it was computed under and JSON metadata."""

    tag: str
    values: NDArray[Any]
    ctx: ScalingContext
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tag.encode("ascii")) != 4:
            raise InvalidInput(f"Record tags are four ASCII characters, got '{self.tag}'")

    def to_bytes(self) -> bytes:
        code = _dtype_code(self.values)
        meta = json.dumps(self.metadata, sort_keys=True).encode("utf-8")
        header = HEADER.pack(
            MAGIC,
            self.tag.encode("ascii"),
            code,
            self.values.ndim,
            self.ctx.N1,
            self.ctx.N2,
            self.ctx.d,
            len(meta),
        )
        shape = b"".join(SHAPE_ENTRY.pack(n) for n in self.values.shape)
        payload = np.ascontiguousarray(self.values, dtype=DTYPE_CODES[code]).tobytes(order="C")
        return header + shape + meta + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> ArrayRecord:
        if len(data) < HEADER.size:
            raise InvalidInput(f"Truncated array file: {len(data)} bytes")
        magic, tag, code, rank, n1, n2, d, meta_length = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise InvalidInput(f"Not a V2S1 array file (magic {magic!r})")
        if code not in DTYPE_CODES:
            raise InvalidInput(f"Unknown dtype code {code}")
        offset = HEADER.size
        shape = []
        for _ in range(rank):
            (n,) = SHAPE_ENTRY.unpack_from(data, offset)
            shape.append(n)
            offset += SHAPE_ENTRY.size
        metadata = json.loads(data[offset : offset + meta_length].decode("utf-8"))
        offset += meta_length
        dtype = DTYPE_CODES[code]
        count = int(np.prod(shape, dtype=np.int64))
        if len(data) - offset != count * dtype.itemsize:
            raise InvalidInput(f"Payload holds {len(data) - offset} bytes, expected {count * dtype.itemsize}")
        values = np.frombuffer(data, dtype=dtype, count=count, offset=offset).reshape(shape).copy()
        return cls(tag.decode("ascii"), values, ScalingContext(n1, n2, d), metadata)

    def expect(self, tag: str) -> ArrayRecord:
        if self.tag != tag:
            raise InvalidInput(f"Expected a {tag} record, got {self.tag}")
        return self


def _lattice_meta(lattice: LatticeConfig) -> Dict[str, Any]:
    return {"M": lattice.M, "dx": lattice.dx, "d": lattice.d}


def _lattice(meta: Dict[str, Any]) -> LatticeConfig:
    return LatticeConfig(M=int(meta["M"]), dx=float(meta["dx"]), d=int(meta["d"]))


def state_record(state: ManyBodyState, t: float) -> ArrayRecord:
    return ArrayRecord(
        STATE_TAG,
        state.matrix,
        state.ctx,
        {"t": t, "lattice": _lattice_meta(state.basis.lattice)},
    )


def density_record(gamma: ReducedDensityMatrix, t: float) -> ArrayRecord:
    return ArrayRecord(
        DENSITY_TAG,
        gamma.values,
        gamma.ctx,
        {"t": t, "k": gamma.k, "ell": gamma.ell, "lattice": _lattice_meta(gamma.lattice)},
    )


def density_from_record(record: ArrayRecord) -> ReducedDensityMatrix:
    meta = record.expect(DENSITY_TAG).metadata
    return ReducedDensityMatrix(int(meta["k"]), int(meta["ell"]), record.values, _lattice(meta["lattice"]), record.ctx)


def husimi_record(m: HusimiMeasure, t: float) -> ArrayRecord:
    return ArrayRecord(HUSIMI_TAG, m.values, m.ctx, {"t": t, "k": m.k, "ell": m.ell, "grid": m.grid.to_dict()})


def husimi_from_record(record: ArrayRecord) -> HusimiMeasure:
    meta = record.expect(HUSIMI_TAG).metadata
    return HusimiMeasure(int(meta["k"]), int(meta["ell"]), record.values, PhaseGrid.from_dict(meta["grid"]), record.ctx)


def vlasov_record(state: SpeciesPairDistribution) -> ArrayRecord:
    values = np.stack([state.m1, state.m2])
    return ArrayRecord(VLASOV_TAG, values, state.ctx, {"t": state.t, "grid": state.grid.to_dict()})


def vlasov_from_record(record: ArrayRecord) -> SpeciesPairDistribution:
    meta = record.expect(VLASOV_TAG).metadata
    m1, m2 = record.values
    return SpeciesPairDistribution(m1, m2, PhaseGrid.from_dict(meta["grid"]), record.ctx, float(meta["t"]))


def state_from_record(record: ArrayRecord, basis: TwoSpeciesBasis) -> ManyBodyState:
    record.expect(STATE_TAG)
    if record.ctx != basis.ctx:
        raise InvalidInput(f"State was saved for {record.ctx}, basis is built for {basis.ctx}")
    return ManyBodyState.in_sector(record.values.reshape(-1), basis)
