"""Bus/branch network containers for a single voltage level."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import StructuralError
from ..specs import GeneratorSpec

BUS_KINDS = ("slack", "pq", "generator")


@dataclass(frozen=True)
class Bus:
    """Single electrical node; voltages bounds in per unit of ``base_kv``."""

    id: int
    kind: str = "pq"
    base_kv: float = 1.0
    v_min: float = 0.95
    v_max: float = 1.05

    def __post_init__(self):
        if self.kind not in BUS_KINDS:
            raise ValueError(f"bus {self.id}: unknown kind {self.kind!r}")
        if not 0.0 < self.v_min < self.v_max:
            raise ValueError(f"bus {self.id}: need 0 < v_min < v_max")


@dataclass(frozen=True)
class Branch:
    """Series element between two buses (line or two-winding transformer).

    Impedances are per unit on the network power base.  ``shunt_susceptance``
    is the total line-charging susceptance, split evenly between both ends.
    ``tap_ratio`` is applied on the ``from_bus`` side; 1.0 for plain lines.
    """

    from_bus: int
    to_bus: int
    resistance: float
    reactance: float
    shunt_susceptance: float = 0.0
    shunt_conductance: float = 0.0
    ampacity: float = 1.0
    tap_ratio: float = 1.0
    transformer: bool = False

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise ValueError(f"branch {self.from_bus}-{self.to_bus}: endpoints coincide")
        if self.ampacity <= 0:
            raise ValueError(f"branch {self.from_bus}-{self.to_bus}: ampacity must be > 0")
        if self.tap_ratio <= 0:
            raise ValueError(f"branch {self.from_bus}-{self.to_bus}: tap_ratio must be > 0")

    @property
    def impedance(self) -> complex:
        return complex(self.resistance, self.reactance)

    @property
    def shunt_admittance(self) -> complex:
        return complex(self.shunt_conductance, self.shunt_susceptance)


class Network:
    """Immutable single-level grid: buses, branches, generators, candidate nodes.

    Exactly one slack bus is required.  All electrical quantities are per unit
    on ``power_base`` MVA; bus ids are arbitrary integers, internal arrays use
    positional indices in bus-list order.
    """

    def __init__(
        self,
        name: str,
        buses: list[Bus],
        branches: list[Branch],
        generators: list[GeneratorSpec] | None = None,
        injection_nodes: list[int] | None = None,
        ess_candidates: list[int] | str | None = None,
        power_base: float = 100.0,
        validate: bool = True,
    ):
        self.name = name
        self.buses = tuple(buses)
        self.branches = tuple(branches)
        self.generators = tuple(generators or ())
        self.power_base = float(power_base)

        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise StructuralError(f"{name}: duplicate bus ids")
        self._index = {bus_id: i for i, bus_id in enumerate(ids)}

        slacks = [b.id for b in self.buses if b.kind == "slack"]
        if len(slacks) != 1:
            raise StructuralError(f"{name}: expected exactly one slack bus, found {slacks}")
        self.slack_bus = slacks[0]
        self.slack_index = self._index[self.slack_bus]

        self.injection_nodes = tuple(injection_nodes or ())
        if ess_candidates is None or ess_candidates == "all_non_slack":
            ess_candidates = [b.id for b in self.buses if b.kind != "slack"]
        self.ess_candidates = tuple(ess_candidates)

        self._admittance: np.ndarray | None = None
        if validate:
            self._validate()

    def _validate(self):
        for br in self.branches:
            for end in (br.from_bus, br.to_bus):
                if end not in self._index:
                    raise StructuralError(f"{self.name}: branch references unknown bus {end}")
            if abs(br.impedance) == 0.0:
                raise StructuralError(
                    f"{self.name}: branch {br.from_bus}-{br.to_bus} has zero series impedance"
                )
        for node in self.injection_nodes:
            if node not in self._index:
                raise StructuralError(f"{self.name}: injection node {node} not a bus")
        for node in self.ess_candidates:
            if node not in self._index:
                raise StructuralError(f"{self.name}: ESS candidate {node} not a bus")
            if node == self.slack_bus:
                raise StructuralError(f"{self.name}: slack bus cannot host an ESS candidate")
        for gen in self.generators:
            if gen.bus not in self._index:
                raise StructuralError(f"{self.name}: generator references unknown bus {gen.bus}")
        if self.power_base <= 0:
            raise StructuralError(f"{self.name}: power_base must be > 0")
        unreached = self.unreachable_buses()
        if unreached:
            raise StructuralError(f"{self.name}: buses {sorted(unreached)} not connected to slack")

    def unreachable_buses(self) -> set[int]:
        """Bus ids not reachable from the slack through branches."""
        adjacency: dict[int, set[int]] = {b.id: set() for b in self.buses}
        for br in self.branches:
            if br.from_bus in adjacency and br.to_bus in adjacency:
                adjacency[br.from_bus].add(br.to_bus)
                adjacency[br.to_bus].add(br.from_bus)
        seen = {self.slack_bus}
        stack = [self.slack_bus]
        while stack:
            for neighbor in adjacency[stack.pop()]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    stack.append(neighbor)
        return {b.id for b in self.buses} - seen

    # -- index helpers -------------------------------------------------------

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_branch(self) -> int:
        return len(self.branches)

    def index_of(self, bus_id: int) -> int:
        return self._index[bus_id]

    @property
    def bus_ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.buses)

    @property
    def non_slack_indices(self) -> np.ndarray:
        return np.array([i for i in range(self.n_bus) if i != self.slack_index], dtype=int)

    @property
    def non_slack_ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.buses if b.id != self.slack_bus)

    def generators_at(self, bus_id: int) -> tuple[GeneratorSpec, ...]:
        return tuple(g for g in self.generators if g.bus == bus_id)

    def admittance(self) -> np.ndarray:
        """Cached bus admittance matrix (see :func:`build_admittance`)."""
        if self._admittance is None:
            from .admittance import build_admittance

            self._admittance = build_admittance(self)
        return self._admittance

    def voltage_bounds(self, override: tuple[float, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-bus (v_min, v_max) arrays, optionally overridden by a global band."""
        if override is None:
            lo = np.array([b.v_min for b in self.buses])
            hi = np.array([b.v_max for b in self.buses])
        else:
            lo = np.full(self.n_bus, override[0])
            hi = np.full(self.n_bus, override[1])
        return lo, hi

    def __repr__(self):
        return (
            f"Network({self.name!r}, {self.n_bus} buses, {self.n_branch} branches, "
            f"{len(self.generators)} generators)"
        )
