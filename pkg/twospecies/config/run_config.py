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

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Tuple, TypeVar

from twospecies.errors import InvalidConfig
from twospecies.fock.basis import DEFAULT_CAPACITY
from twospecies.fock.density import MAX_ORDER
from twospecies.fock.krylov import DEFAULT_MAX_SUBSPACE, DEFAULT_TOLERANCE
from twospecies.fock.scaling import LatticeConfig, ScalingContext
from twospecies.fourier.grid import DEFAULT_NODES, DEFAULT_XI_MAX, FourierGrid
from twospecies.fourier.operator import ETA_NODES
from twospecies.fourier.picard import DEFAULT_TIME_NODES, MAX_DEPTH
from twospecies.hierarchy.family import DEFAULT_K_MAX, Level
from twospecies.husimi.coherent import DEFAULT_RADIUS, CoherentFamily, ProfileKind
from twospecies.husimi.phase_grid import PhaseGrid
from twospecies.metrics.transport import TransportMode
from twospecies.potentials import PotentialSet
from twospecies.vlasov.forces import ConvolutionMethod

T = TypeVar("T")

POTENTIAL_KEYS = ("kind", "amplitude", "width_or_bandlimit")
DEFAULT_ORDERS: Tuple[Level, ...] = ((1, 0), (0, 1))
DEFAULT_SWEEP: Tuple[Tuple[int, int], ...] = ((1, 1), (2, 1), (2, 2))


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _section(data: Any, path: str, allowed: Iterable[str]) -> Dict[str, Any]:
    """The mapping at `path`, rejecting keys outside `allowed`."""
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise InvalidConfig(f"Config section '{path}' must be a mapping, got {type(data).__name__}")
    known = set(allowed)
    for key in data:
        if key not in known:
            raise InvalidConfig(f"Unknown config key '{_join(path, str(key))}'")
    return dict(data)


def _value(data: Mapping[str, Any], key: str, path: str, convert: Callable[[Any], T], default: T) -> T:
    raw = data.get(key, default)
    try:
        return convert(raw)
    except (TypeError, ValueError) as error:
        raise InvalidConfig(f"Invalid value for '{_join(path, key)}': {raw!r}") from error


def _optional(data: Mapping[str, Any], key: str, path: str, convert: Callable[[Any], T]) -> Optional[T]:
    if data.get(key) is None:
        return None
    return _value(data, key, path, convert, None)


def _flag(raw: Any) -> bool:
    if not isinstance(raw, bool):
        raise ValueError(f"expected true or false, got {raw!r}")
    return raw


def _times(raw: Any) -> Tuple[float, ...]:
    if raw is None:
        return ()
    times = tuple(sorted(float(t) for t in raw))
    if any(t < 0.0 for t in times):
        raise ValueError("times must be non-negative")
    return times


def _pairs(raw: Any) -> Tuple[Tuple[int, int], ...]:
    pairs = []
    for entry in raw:
        first, second = (int(x) for x in entry)
        if first < 0 or second < 0 or first + second == 0:
            raise ValueError(f"pair {list(entry)} must be non-negative and nonzero")
        pairs.append((first, second))
    return tuple(pairs)


def _points(raw: Any) -> Tuple[Tuple[float, ...], ...]:
    if raw is None:
        return ()
    return tuple(tuple(float(x) for x in entry) for entry in raw)


def _positive(name: str, value: float) -> None:
    if value <= 0.0:
        raise InvalidConfig(f"'{name}' must be positive, got {value}")


@dataclass(frozen=True)
class CoherentSection:
    profile: ProfileKind = ProfileKind.BUMP
    R1: float = DEFAULT_RADIUS

    @classmethod
    def from_dict(cls, data: Any, path: str = "coherent") -> CoherentSection:
        section = _section(data, path, ("profile", "R1"))
        return cls(
            profile=ProfileKind.from_str(_value(section, "profile", path, str, ProfileKind.BUMP.value)),
            R1=_value(section, "R1", path, float, DEFAULT_RADIUS),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"profile": self.profile.value, "R1": self.R1}


@dataclass(frozen=True)
class PhaseGridSection:
    """`p_max: null` selects the full Brillouin zone with `n_p` points (default M)."""

    p_max: Optional[float] = None
    n_p: Optional[int] = None
    q_stride: int = 1

    def __post_init__(self):
        if self.n_p is not None and self.n_p < 2:
            raise InvalidConfig(f"'phase_grid.n_p' must be at least 2, got {self.n_p}")
        if self.q_stride < 1:
            raise InvalidConfig(f"'phase_grid.q_stride' must be at least 1, got {self.q_stride}")
        if self.p_max is not None:
            _positive("phase_grid.p_max", self.p_max)

    @classmethod
    def from_dict(cls, data: Any, path: str = "phase_grid") -> PhaseGridSection:
        section = _section(data, path, ("p_max", "n_p", "q_stride"))
        return cls(
            p_max=_optional(section, "p_max", path, float),
            n_p=_optional(section, "n_p", path, int),
            q_stride=_value(section, "q_stride", path, int, 1),
        )

    def build(self, lattice: LatticeConfig, hbar: float) -> PhaseGrid:
        if self.p_max is None:
            return PhaseGrid.full_zone_grid(lattice, hbar, self.n_p, self.q_stride)
        return PhaseGrid.bounded_grid(lattice, hbar, self.p_max, self.n_p or lattice.M, self.q_stride)

    def to_dict(self) -> Dict[str, Any]:
        return {"p_max": self.p_max, "n_p": self.n_p, "q_stride": self.q_stride}


@dataclass(frozen=True)
class InitialSection:
    """Coherent packet centres (q…, p…) per species; empty lists are drawn from the run seed."""

    species1: Tuple[Tuple[float, ...], ...] = ()
    species2: Tuple[Tuple[float, ...], ...] = ()

    @classmethod
    def from_dict(cls, data: Any, path: str = "initial") -> InitialSection:
        section = _section(data, path, ("species1", "species2"))
        return cls(
            species1=_value(section, "species1", path, _points, None),
            species2=_value(section, "species2", path, _points, None),
        )

    def packets(self, species: int) -> Tuple[Tuple[float, ...], ...]:
        return self.species1 if species == 1 else self.species2

    def check(self, ctx: ScalingContext) -> None:
        for species in (1, 2):
            packets = self.packets(species)
            if not packets:
                continue
            if len(packets) != ctx.count(species):
                raise InvalidConfig(
                    f"'initial.species{species}' lists {len(packets)} packets for {ctx.count(species)} particles"
                )
            for packet in packets:
                if len(packet) != 2 * ctx.d:
                    raise InvalidConfig(f"Packet {list(packet)} needs {2 * ctx.d} coordinates (q…, p…)")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "species1": [list(packet) for packet in self.species1],
            "species2": [list(packet) for packet in self.species2],
        }


@dataclass(frozen=True)
class QuantumSection:
    t_final_time: float = 0.5
    steps: int = 10
    snapshot_times: Tuple[float, ...] = ()
    capacity: int = DEFAULT_CAPACITY
    tolerance: float = DEFAULT_TOLERANCE
    max_subspace: int = DEFAULT_MAX_SUBSPACE

    def __post_init__(self):
        if self.t_final_time < 0.0:
            raise InvalidConfig(f"'quantum.t_final_time' must be non-negative, got {self.t_final_time}")
        if self.steps < 1:
            raise InvalidConfig(f"'quantum.steps' must be at least 1, got {self.steps}")
        _positive("quantum.tolerance", self.tolerance)

    @classmethod
    def from_dict(cls, data: Any, path: str = "quantum") -> QuantumSection:
        keys = ("t_final_time", "steps", "snapshot_times", "capacity", "tolerance", "max_subspace")
        section = _section(data, path, keys)
        return cls(
            t_final_time=_value(section, "t_final_time", path, float, 0.5),
            steps=_value(section, "steps", path, int, 10),
            snapshot_times=_value(section, "snapshot_times", path, _times, None),
            capacity=_value(section, "capacity", path, int, DEFAULT_CAPACITY),
            tolerance=_value(section, "tolerance", path, float, DEFAULT_TOLERANCE),
            max_subspace=_value(section, "max_subspace", path, int, DEFAULT_MAX_SUBSPACE),
        )

    @property
    def dt(self) -> float:
        return self.t_final_time / self.steps

    def snapshot_steps(self) -> Tuple[int, ...]:
        """Step indices nearest the requested times; every step when none are requested."""
        if self.t_final_time == 0.0:
            return (0,)
        if not self.snapshot_times:
            return tuple(range(self.steps + 1))
        wanted = {int(round(t / self.dt)) for t in self.snapshot_times if t <= self.t_final_time}
        return tuple(sorted(wanted))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t_final_time": self.t_final_time,
            "steps": self.steps,
            "snapshot_times": list(self.snapshot_times),
            "capacity": self.capacity,
            "tolerance": self.tolerance,
            "max_subspace": self.max_subspace,
        }


@dataclass(frozen=True)
class VlasovSection:
    dt_time: float = 0.01
    t_final_time: float = 0.5
    snapshot_times: Tuple[float, ...] = ()
    method: ConvolutionMethod = ConvolutionMethod.AUTO
    self_convergence: bool = False

    def __post_init__(self):
        _positive("vlasov.dt_time", self.dt_time)
        if self.t_final_time < 0.0:
            raise InvalidConfig(f"'vlasov.t_final_time' must be non-negative, got {self.t_final_time}")

    @classmethod
    def from_dict(cls, data: Any, path: str = "vlasov") -> VlasovSection:
        section = _section(data, path, ("dt_time", "t_final_time", "snapshot_times", "method", "self_convergence"))
        return cls(
            dt_time=_value(section, "dt_time", path, float, 0.01),
            t_final_time=_value(section, "t_final_time", path, float, 0.5),
            snapshot_times=_value(section, "snapshot_times", path, _times, None),
            method=ConvolutionMethod.from_str(_value(section, "method", path, str, ConvolutionMethod.AUTO.value)),
            self_convergence=_value(section, "self_convergence", path, _flag, False),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt_time": self.dt_time,
            "t_final_time": self.t_final_time,
            "snapshot_times": list(self.snapshot_times),
            "method": self.method.value,
            "self_convergence": self.self_convergence,
        }


@dataclass(frozen=True)
class HierarchySection:
    k_max: int = DEFAULT_K_MAX
    orders: Tuple[Level, ...] = DEFAULT_ORDERS
    t_time: float = 0.25
    dt_probe: float = 0.01
    exact_derivative: bool = True
    factorized_residual: bool = False

    def __post_init__(self):
        if not 1 <= self.k_max <= MAX_ORDER:
            raise InvalidConfig(f"'hierarchy.k_max' must lie in 1..{MAX_ORDER}, got {self.k_max}")
        for k, ell in self.orders:
            if k + ell > self.k_max:
                raise InvalidConfig(f"Hierarchy order ({k},{ell}) exceeds k_max={self.k_max}")
        _positive("hierarchy.dt_probe", self.dt_probe)
        if self.t_time < self.dt_probe:
            raise InvalidConfig(f"'hierarchy.t_time'={self.t_time} must be at least dt_probe={self.dt_probe}")

    @classmethod
    def from_dict(cls, data: Any, path: str = "hierarchy") -> HierarchySection:
        keys = ("k_max", "orders", "t_time", "dt_probe", "exact_derivative", "factorized_residual")
        section = _section(data, path, keys)
        return cls(
            k_max=_value(section, "k_max", path, int, DEFAULT_K_MAX),
            orders=_value(section, "orders", path, _pairs, DEFAULT_ORDERS),
            t_time=_value(section, "t_time", path, float, 0.25),
            dt_probe=_value(section, "dt_probe", path, float, 0.01),
            exact_derivative=_value(section, "exact_derivative", path, _flag, True),
            factorized_residual=_value(section, "factorized_residual", path, _flag, False),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k_max": self.k_max,
            "orders": [list(order) for order in self.orders],
            "t_time": self.t_time,
            "dt_probe": self.dt_probe,
            "exact_derivative": self.exact_derivative,
            "factorized_residual": self.factorized_residual,
        }


@dataclass(frozen=True)
class PicardSection:
    L: int = 3
    t_time: float = 0.1
    xi_max: float = DEFAULT_XI_MAX
    nodes: int = DEFAULT_NODES
    time_nodes: int = DEFAULT_TIME_NODES
    eta_nodes: int = ETA_NODES
    closure: bool = True

    def __post_init__(self):
        if not 1 <= self.L <= MAX_DEPTH:
            raise InvalidConfig(f"'picard.L' must lie in 1..{MAX_DEPTH}, got {self.L}")
        if self.t_time < 0.0:
            raise InvalidConfig(f"'picard.t_time' must be non-negative, got {self.t_time}")

    @classmethod
    def from_dict(cls, data: Any, path: str = "picard") -> PicardSection:
        keys = ("L", "t_time", "xi_max", "nodes", "time_nodes", "eta_nodes", "closure")
        section = _section(data, path, keys)
        return cls(
            L=_value(section, "L", path, int, 3),
            t_time=_value(section, "t_time", path, float, 0.1),
            xi_max=_value(section, "xi_max", path, float, DEFAULT_XI_MAX),
            nodes=_value(section, "nodes", path, int, DEFAULT_NODES),
            time_nodes=_value(section, "time_nodes", path, int, DEFAULT_TIME_NODES),
            eta_nodes=_value(section, "eta_nodes", path, int, ETA_NODES),
            closure=_value(section, "closure", path, _flag, True),
        )

    def fourier_grid(self, d: int) -> FourierGrid:
        return FourierGrid(xi_max=self.xi_max, nodes=self.nodes, d=d)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "L": self.L,
            "t_time": self.t_time,
            "xi_max": self.xi_max,
            "nodes": self.nodes,
            "time_nodes": self.time_nodes,
            "eta_nodes": self.eta_nodes,
            "closure": self.closure,
        }


@dataclass(frozen=True)
class CompareSection:
    mode: TransportMode = TransportMode.EXACT

    @classmethod
    def from_dict(cls, data: Any, path: str = "compare") -> CompareSection:
        section = _section(data, path, ("mode",))
        return cls(mode=TransportMode.from_str(_value(section, "mode", path, str, TransportMode.EXACT.value)))

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode.value}


@dataclass(frozen=True)
class SweepSection:
    N_values: Tuple[Tuple[int, int], ...] = DEFAULT_SWEEP
    orders: Tuple[Level, ...] = ((1, 0),)

    @classmethod
    def from_dict(cls, data: Any, path: str = "sweep") -> SweepSection:
        section = _section(data, path, ("N_values", "orders"))
        return cls(
            N_values=_value(section, "N_values", path, _pairs, DEFAULT_SWEEP),
            orders=_value(section, "orders", path, _pairs, ((1, 0),)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"N_values": [list(n) for n in self.N_values], "orders": [list(order) for order in self.orders]}


@dataclass(frozen=True)
class RunConfig:
    """One experiment: the physical system, its discretizations and the output location."""

    scaling: ScalingContext
    lattice: LatticeConfig
    potentials: PotentialSet
    coherent: CoherentSection = field(default_factory=CoherentSection)
    phase_grid: PhaseGridSection = field(default_factory=PhaseGridSection)
    initial: InitialSection = field(default_factory=InitialSection)
    quantum: QuantumSection = field(default_factory=QuantumSection)
    vlasov: VlasovSection = field(default_factory=VlasovSection)
    hierarchy: HierarchySection = field(default_factory=HierarchySection)
    picard: PicardSection = field(default_factory=PicardSection)
    compare: CompareSection = field(default_factory=CompareSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    seed: int = 0
    output_dir: str = "runs"

    @classmethod
    def from_dict(cls, data: Any) -> RunConfig:
        top_keys = (
            "scaling",
            "lattice",
            "potentials",
            "coherent",
            "phase_grid",
            "initial",
            "quantum",
            "vlasov",
            "hierarchy",
            "picard",
            "compare",
            "sweep",
            "seed",
            "output_dir",
        )
        top = _section(data, "", top_keys)
        for required in ("scaling", "lattice"):
            if required not in top:
                raise InvalidConfig(f"Missing config section '{required}'")
        scaling = _section(top["scaling"], "scaling", ("N1", "N2", "d"))
        d = _value(scaling, "d", "scaling", int, 1)
        ctx = ScalingContext(
            N1=_value(scaling, "N1", "scaling", int, 0),
            N2=_value(scaling, "N2", "scaling", int, 0),
            d=d,
        )
        lattice_section = _section(top["lattice"], "lattice", ("M", "dx"))
        lattice = LatticeConfig(
            M=_value(lattice_section, "M", "lattice", int, 0),
            dx=_value(lattice_section, "dx", "lattice", float, 0.0),
            d=d,
        )
        potentials = _section(top.get("potentials"), "potentials", ("v11", "v22", "v12"))
        for name, pot in potentials.items():
            potentials[name] = _section(pot, f"potentials.{name}", POTENTIAL_KEYS)
        return cls(
            scaling=ctx,
            lattice=lattice,
            potentials=PotentialSet.from_dict(potentials, d),
            coherent=CoherentSection.from_dict(top.get("coherent")),
            phase_grid=PhaseGridSection.from_dict(top.get("phase_grid")),
            initial=InitialSection.from_dict(top.get("initial")),
            quantum=QuantumSection.from_dict(top.get("quantum")),
            vlasov=VlasovSection.from_dict(top.get("vlasov")),
            hierarchy=HierarchySection.from_dict(top.get("hierarchy")),
            picard=PicardSection.from_dict(top.get("picard")),
            compare=CompareSection.from_dict(top.get("compare")),
            sweep=SweepSection.from_dict(top.get("sweep")),
            seed=_value(top, "seed", "", int, 0),
            output_dir=_value(top, "output_dir", "", str, "runs"),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scaling": {"N1": self.scaling.N1, "N2": self.scaling.N2, "d": self.scaling.d},
            "lattice": {"M": self.lattice.M, "dx": self.lattice.dx},
            "potentials": self.potentials.to_dict(),
            "coherent": self.coherent.to_dict(),
            "phase_grid": self.phase_grid.to_dict(),
            "initial": self.initial.to_dict(),
            "quantum": self.quantum.to_dict(),
            "vlasov": self.vlasov.to_dict(),
            "hierarchy": self.hierarchy.to_dict(),
            "picard": self.picard.to_dict(),
            "compare": self.compare.to_dict(),
            "sweep": self.sweep.to_dict(),
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def with_counts(self, N1: int, N2: int) -> RunConfig:
        """The same experiment with other particle counts; configured packets are dropped."""
        return replace(self, scaling=ScalingContext(N1, N2, self.scaling.d), initial=InitialSection())

    def coherent_family(self) -> CoherentFamily:
        return CoherentFamily(self.lattice, self.scaling, self.coherent.profile, self.coherent.R1)

    def build_phase_grid(self) -> PhaseGrid:
        return self.phase_grid.build(self.lattice, self.scaling.hbar)

    def fourier_grid(self) -> FourierGrid:
        return self.picard.fourier_grid(self.scaling.d)

    def validate(self) -> None:
        """Cross-section checks; each section validated itself on construction."""
        self.lattice.check_context(self.scaling)
        self.initial.check(self.scaling)
        fam = self.coherent_family()
        fam.check_grid(self.build_phase_grid())
