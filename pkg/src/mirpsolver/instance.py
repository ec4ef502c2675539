"""Problem data model, canonical file format, loader and toy generator.

An :class:`Instance` is immutable after construction and safe to share
read-only across concurrent solver workers.  Per-period arrays (rates,
bounds, penalties) are stored explicitly at full horizon length even when
constant, so time-varying data needs no special case.

Time convention: integer time points 0..T.  ``rate[k]``, ``inv_min[k]``,
``inv_max[k]`` and ``penalty[k]`` describe the transition from time point
``k`` to ``k+1`` (the (k+1)-th period); the resulting inventory ``s[k+1]``
is clamped to ``[inv_min[k], inv_max[k]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

FORMAT_VERSION = 1

PRODUCTION = "production"
CONSUMPTION = "consumption"

EMPTY = "empty"
LOADED = "loaded"


class InstanceError(ValueError):
    """Base class for instance file problems."""


class ParseError(InstanceError):
    """Malformed instance file."""


class ValidationError(InstanceError):
    """A named invariant is violated; message carries the field path."""


@dataclass(frozen=True)
class Port:
    id: int
    kind: str                  # "production" | "consumption"
    rate: tuple[float, ...]    # length T, nonnegative
    inv_min: tuple[float, ...]
    inv_max: tuple[float, ...]
    inv_init: float
    berth_limit: int
    port_fee: float
    penalty: tuple[float, ...]  # money per unit of spot-charter slack

    @property
    def delta(self) -> int:
        return 1 if self.kind == PRODUCTION else -1


@dataclass(frozen=True)
class VesselClass:
    id: int
    capacity: float
    cost_per_km: float
    ballast_discount: float    # fraction in [0, 1] applied to empty-leg distance cost


@dataclass(frozen=True)
class Vessel:
    id: int
    class_id: int
    start_port: int            # port the vessel is at (or heading to) when it becomes ready
    ready_time: int            # first time point the vessel may operate
    initial_state: str         # "empty" | "loaded"


@dataclass(frozen=True)
class Instance:
    horizon: int
    ports: tuple[Port, ...]
    classes: tuple[VesselClass, ...]
    vessels: tuple[Vessel, ...]
    distance_km: tuple[tuple[float, ...], ...]
    travel_time: tuple[tuple[tuple[int, ...], ...], ...]  # [class][from][to], whole periods
    op_duration: int = 1
    early_finish_reward: float = 0.0
    name: str = ""
    difficulty_class: str = ""

    # derived, not part of the file format
    production_ports: tuple[int, ...] = field(default=(), compare=False)
    consumption_ports: tuple[int, ...] = field(default=(), compare=False)
    n_ports: int = field(default=0, compare=False)
    n_vessels: int = field(default=0, compare=False)
    # fixed-point leg cost tables: [class][from][to] in cents, and port fees
    leg_cents: tuple = field(default=(), compare=False, repr=False)
    fee_cents: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "production_ports",
            tuple(p.id for p in self.ports if p.kind == PRODUCTION))
        object.__setattr__(
            self, "consumption_ports",
            tuple(p.id for p in self.ports if p.kind == CONSUMPTION))
        object.__setattr__(self, "n_ports", len(self.ports))
        object.__setattr__(self, "n_vessels", len(self.vessels))
        # the discount applies to the distance term of empty legs only, and a
        # vessel is empty exactly when heading to a production port
        leg = []
        for vc in self.classes:
            mat = []
            for a in range(len(self.ports)):
                row = []
                for b, port in enumerate(self.ports):
                    dist = self.distance_km[a][b]
                    if dist == 0.0:
                        row.append(0)
                    elif port.kind == PRODUCTION:
                        row.append(round(vc.cost_per_km * dist
                                         * (1.0 - vc.ballast_discount) * 100))
                    else:
                        row.append(round(vc.cost_per_km * dist * 100))
                mat.append(tuple(row))
            leg.append(tuple(mat))
        object.__setattr__(self, "leg_cents", tuple(leg))
        object.__setattr__(
            self, "fee_cents", tuple(round(p.port_fee * 100) for p in self.ports))

    def vessel_class(self, vessel_id: int) -> VesselClass:
        return self.classes[self.vessels[vessel_id].class_id]

    def ports_of_kind(self, kind: str) -> tuple[int, ...]:
        return self.production_ports if kind == PRODUCTION else self.consumption_ports

    def validate(self) -> "Instance":
        """Check every structural invariant; raise ValidationError naming the field."""
        T = self.horizon
        if T < 1:
            raise ValidationError("horizon: must be >= 1")
        if self.op_duration < 1:
            raise ValidationError("op_duration: must be >= 1")
        if self.early_finish_reward < 0:
            raise ValidationError("reward_early_finish: must be >= 0")
        if not self.production_ports or not self.consumption_ports:
            raise ValidationError("ports: need at least one production and one consumption port")
        for j, p in enumerate(self.ports):
            path = f"ports[{j}]"
            if p.id != j:
                raise ValidationError(f"{path}.id: expected {j}, got {p.id}")
            if p.kind not in (PRODUCTION, CONSUMPTION):
                raise ValidationError(f"{path}.kind: unknown kind {p.kind!r}")
            for name in ("rate", "inv_min", "inv_max", "penalty"):
                arr = getattr(p, name)
                if len(arr) != T:
                    raise ValidationError(f"{path}.{name}: expected length {T}, got {len(arr)}")
            if any(r < 0 for r in p.rate):
                raise ValidationError(f"{path}.rate: negative entry")
            if any(c < 0 for c in p.penalty):
                raise ValidationError(f"{path}.penalty: negative entry")
            for t in range(T):
                if not (0 <= p.inv_min[t] <= p.inv_max[t]):
                    raise ValidationError(
                        f"{path}.inv_min[{t}]: need 0 <= inv_min <= inv_max, "
                        f"got [{p.inv_min[t]}, {p.inv_max[t]}]")
            if not (p.inv_min[0] <= p.inv_init <= p.inv_max[0]):
                raise ValidationError(
                    f"{path}.inv_init: {p.inv_init} outside [{p.inv_min[0]}, {p.inv_max[0]}]")
            if p.berth_limit < 1:
                raise ValidationError(f"{path}.berth_limit: must be >= 1")
            if p.port_fee < 0:
                raise ValidationError(f"{path}.port_fee: must be >= 0")
        for c, vc in enumerate(self.classes):
            path = f"vessel_classes[{c}]"
            if vc.id != c:
                raise ValidationError(f"{path}.id: expected {c}, got {vc.id}")
            if vc.capacity <= 0:
                raise ValidationError(f"{path}.capacity: must be > 0")
            if not (0.0 <= vc.ballast_discount <= 1.0):
                raise ValidationError(f"{path}.ballast_discount: must be in [0, 1]")
            if vc.cost_per_km < 0:
                raise ValidationError(f"{path}.cost_per_km: must be >= 0")
        for k, v in enumerate(self.vessels):
            path = f"vessels[{k}]"
            if v.id != k:
                raise ValidationError(f"{path}.id: expected {k}, got {v.id}")
            if not (0 <= v.class_id < len(self.classes)):
                raise ValidationError(f"{path}.class_id: {v.class_id} does not resolve")
            if not (0 <= v.start_port < self.n_ports):
                raise ValidationError(f"{path}.start_port: {v.start_port} does not resolve")
            if not (0 <= v.ready_time < T):
                raise ValidationError(f"{path}.ready_time: {v.ready_time} outside [0, {T})")
            if v.initial_state not in (EMPTY, LOADED):
                raise ValidationError(f"{path}.initial_state: unknown state {v.initial_state!r}")
        J = self.n_ports
        if len(self.distance_km) != J or any(len(row) != J for row in self.distance_km):
            raise ValidationError(f"distance_km: expected {J}x{J} matrix")
        for a in range(J):
            if self.distance_km[a][a] != 0:
                raise ValidationError(f"distance_km[{a}][{a}]: diagonal must be 0")
            for b in range(J):
                if self.distance_km[a][b] < 0:
                    raise ValidationError(f"distance_km[{a}][{b}]: must be >= 0")
                if self.distance_km[a][b] != self.distance_km[b][a]:
                    raise ValidationError(f"distance_km[{a}][{b}]: matrix not symmetric")
        if len(self.travel_time) != len(self.classes):
            raise ValidationError(
                f"travel_time: expected one {J}x{J} matrix per class "
                f"({len(self.classes)}), got {len(self.travel_time)}")
        for c, mat in enumerate(self.travel_time):
            if len(mat) != J or any(len(row) != J for row in mat):
                raise ValidationError(f"travel_time[{c}]: expected {J}x{J} matrix")
            for a in range(J):
                for b in range(J):
                    tt = mat[a][b]
                    if a == b and tt != 0:
                        raise ValidationError(f"travel_time[{c}][{a}][{b}]: diagonal must be 0")
                    if a != b and tt < 1:
                        raise ValidationError(f"travel_time[{c}][{a}][{b}]: must be >= 1")
        return self

    def with_horizon(self, horizon: int) -> "Instance":
        """Shrink the horizon, slicing every per-period array (extension not supported)."""
        if horizon > self.horizon:
            raise ValidationError(f"horizon: cannot extend {self.horizon} to {horizon}")
        ports = tuple(
            replace(p, rate=p.rate[:horizon], inv_min=p.inv_min[:horizon],
                    inv_max=p.inv_max[:horizon], penalty=p.penalty[:horizon])
            for p in self.ports)
        return replace(self, horizon=horizon, ports=ports).validate()


def _num_list(raw, path: str) -> tuple[float, ...]:
    if not isinstance(raw, list) or not all(isinstance(x, (int, float)) for x in raw):
        raise ParseError(f"{path}: expected a numeric array")
    return tuple(float(x) for x in raw)


def _get(obj: dict, key: str, path: str):
    if key not in obj:
        raise ParseError(f"{path}.{key}: missing required key")
    return obj[key]


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("root: expected an object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"format_version: expected {FORMAT_VERSION}, got {version!r}")
    horizon = int(_get(data, "horizon", "root"))
    ports = []
    for j, raw in enumerate(_get(data, "ports", "root")):
        path = f"ports[{j}]"
        ports.append(Port(
            id=int(_get(raw, "id", path)),
            kind=_get(raw, "kind", path),
            rate=_num_list(_get(raw, "rate", path), f"{path}.rate"),
            inv_min=_num_list(_get(raw, "inv_min", path), f"{path}.inv_min"),
            inv_max=_num_list(_get(raw, "inv_max", path), f"{path}.inv_max"),
            inv_init=float(_get(raw, "inv_init", path)),
            berth_limit=int(_get(raw, "berth_limit", path)),
            port_fee=float(_get(raw, "port_fee", path)),
            penalty=_num_list(_get(raw, "penalty", path), f"{path}.penalty"),
        ))
    classes = []
    for c, raw in enumerate(_get(data, "vessel_classes", "root")):
        path = f"vessel_classes[{c}]"
        classes.append(VesselClass(
            id=int(_get(raw, "id", path)),
            capacity=float(_get(raw, "capacity", path)),
            cost_per_km=float(_get(raw, "cost_per_km", path)),
            ballast_discount=float(_get(raw, "ballast_discount", path)),
        ))
    vessels = []
    for k, raw in enumerate(_get(data, "vessels", "root")):
        path = f"vessels[{k}]"
        vessels.append(Vessel(
            id=int(_get(raw, "id", path)),
            class_id=int(_get(raw, "class_id", path)),
            start_port=int(_get(raw, "start_port", path)),
            ready_time=int(_get(raw, "ready_time", path)),
            initial_state=_get(raw, "initial_state", path),
        ))
    distance = tuple(_num_list(row, f"distance_km[{a}]")
                     for a, row in enumerate(_get(data, "distance_km", "root")))
    travel = tuple(
        tuple(tuple(int(x) for x in row) for row in mat)
        for mat in _get(data, "travel_time", "root"))
    meta = data.get("meta", {})
    inst = Instance(
        horizon=horizon,
        ports=tuple(ports),
        classes=tuple(classes),
        vessels=tuple(vessels),
        distance_km=distance,
        travel_time=travel,
        op_duration=int(data.get("op_duration", 1)),
        early_finish_reward=float(data.get("reward_early_finish", 0.0)),
        name=str(meta.get("name", "")),
        difficulty_class=str(meta.get("class", "")),
    )
    return inst.validate()


def instance_to_dict(inst: Instance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "horizon": inst.horizon,
        "reward_early_finish": inst.early_finish_reward,
        "op_duration": inst.op_duration,
        "ports": [{
            "id": p.id, "kind": p.kind,
            "rate": list(p.rate), "inv_min": list(p.inv_min), "inv_max": list(p.inv_max),
            "inv_init": p.inv_init, "berth_limit": p.berth_limit,
            "port_fee": p.port_fee, "penalty": list(p.penalty),
        } for p in inst.ports],
        "vessel_classes": [{
            "id": c.id, "capacity": c.capacity, "cost_per_km": c.cost_per_km,
            "ballast_discount": c.ballast_discount,
        } for c in inst.classes],
        "vessels": [{
            "id": v.id, "class_id": v.class_id, "start_port": v.start_port,
            "ready_time": v.ready_time, "initial_state": v.initial_state,
        } for v in inst.vessels],
        "distance_km": [list(row) for row in inst.distance_km],
        "travel_time": [[list(row) for row in mat] for mat in inst.travel_time],
        "meta": {"name": inst.name, "class": inst.difficulty_class},
    }


def load_instance(path) -> Instance:
    """Load and validate an instance file (see docs/instance_format.md)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return instance_from_dict(data)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def generate_toy(seed: int, n_consumers: int, horizon: int) -> Instance:
    """Deterministic balanced toy instance: one producer, ``n_consumers`` consumers.

    Total production rate equals total consumption rate at every period by
    construction.  All values derive arithmetically from (seed, index), so
    equal arguments always give field-wise equal instances.
    """
    if n_consumers < 1:
        raise ValueError("n_consumers must be >= 1")
    if horizon < 4:
        raise ValueError("horizon must be >= 4")
    T = horizon
    # all variation is a deterministic function of q = seed - 1 that vanishes
    # at q = 0; the quadratic terms break small residue cycles across seeds
    q = seed - 1
    cons_rates = [1 + (q + 1 + i) % 3 for i in range(n_consumers)]
    prod_rate = sum(cons_rates)

    def make_port(j: int, kind: str, rate: float) -> Port:
        cap = 5.0 * rate
        # stagger initial fill levels so ports breach at different periods
        fill = 0.5 + 0.1 * ((q * (j + 1) + q * q // 3) % 4)
        return Port(
            id=j, kind=kind,
            rate=(float(rate),) * T,
            inv_min=(0.0,) * T,
            inv_max=(cap,) * T,
            inv_init=fill * cap,
            berth_limit=1,
            port_fee=0.0,
            penalty=(100.0,) * T,
        )

    ports = [make_port(0, PRODUCTION, prod_rate)]
    ports += [make_port(1 + i, CONSUMPTION, cons_rates[i]) for i in range(n_consumers)]

    J = 1 + n_consumers
    dist = [[0.0] * J for _ in range(J)]
    for i in range(n_consumers):
        d = 10.0 + 5.0 * ((q * (i + 2) + q * q // 5 + i) % 3)
        dist[0][1 + i] = dist[1 + i][0] = d
    for i in range(n_consumers):
        for j in range(i + 1, n_consumers):
            d = 10.0 + 5.0 * ((q * (i + j + 2) + q * q // 7 + i + j) % 3)
            dist[1 + i][1 + j] = dist[1 + j][1 + i] = d
    travel = [[0 if a == b else max(1, int(dist[a][b]) // 5) for b in range(J)]
              for a in range(J)]

    cls = VesselClass(id=0, capacity=2.0 * prod_rate, cost_per_km=1.0, ballast_discount=0.05)
    vessels = [Vessel(id=0, class_id=0, start_port=0, ready_time=0, initial_state=EMPTY)]
    if n_consumers >= 2:
        vessels.append(Vessel(
            id=1, class_id=0, start_port=1, ready_time=seed % 3,
            initial_state=LOADED if seed % 2 == 0 else EMPTY))

    inst = Instance(
        horizon=T,
        ports=tuple(ports),
        classes=(cls,),
        vessels=tuple(vessels),
        distance_km=tuple(tuple(row) for row in dist),
        travel_time=(tuple(tuple(row) for row in travel),),
        op_duration=1,
        early_finish_reward=0.0,
        name=f"toy-s{seed}-c{n_consumers}-t{horizon}",
        difficulty_class="E",
    )
    return inst.validate()
