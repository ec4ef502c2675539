"""Independent correctness layer: arc-flow reconstruction, constraint
residuals, objective recomputation and a brute-force optimum oracle.

The checker maps a schedule onto the time-expanded vessel-flow graph
(virtual source and sink, waiting arcs, one travel arc per leg), then
verifies:

* flow balance per (node, vessel class): net outflow equals the class
  fleet size at the source, the negative of it at the sink, zero at
  every interior node;
* inventory balance: replaying the balance equation from the initial
  inventories with the schedule's transfers and the evaluator's signed
  spot-charter accruals must reproduce the evaluator's trajectory;
* inventory bounds on the replayed trajectory;
* berth limits per (port, period) with half-open occupancy
  [berth_start, berth_end);
* domain conditions: nonnegative spot charter, at most one vessel of a
  class per loaded (inter-regional) arc, integral nonnegative flows.
  Heuristic intermediate solutions may legitimately leave the model's
  domain (a vessel operation can push inventory past the opposite bound,
  which appears as a negative accrual); these are reported separately
  from the residuals.

The objective is recomputed per arc (distance cost with the ballast
discount, destination port fees, penalties on the accrual magnitudes,
early-finish reward) and compared against the evaluator total, which
must agree to one cent.  The model maximizes a negative-cost objective
while the evaluator minimizes positive cost; the comparison is
sign-adjusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._util import cents
from .evaluator import EvalResult, evaluate
from .instance import Instance, PRODUCTION
from .solution import Call, Solution

SOURCE = ("s",)
SINK = ("t",)


class SearchSpaceExceeded(RuntimeError):
    """The brute-force enumeration would visit too many sequences."""


@dataclass(frozen=True)
class Arc:
    kind: str                     # source | sink | waiting | interregional | ballast
    tail: tuple
    head: tuple


@dataclass
class ArcFlow:
    """Integer flow per vessel class on the time-expanded graph."""
    flows: dict[int, dict[Arc, int]]

    def total(self, class_id: int, kind: str) -> int:
        return sum(n for a, n in self.flows[class_id].items() if a.kind == kind)


@dataclass
class ValidatorReport:
    flow_balance_residuals: dict = field(default_factory=dict)   # (node, class) -> int
    inventory_balance_residuals: dict = field(default_factory=dict)  # (port, t) -> float
    inventory_bound_residuals: dict = field(default_factory=dict)    # (port, t) -> float
    berth_residuals: dict = field(default_factory=dict)              # (port, t) -> int
    domain_violations: dict = field(default_factory=dict)            # eq name -> list
    objective: int = 0           # cents, maximized (<= 0 for costly plans)
    evaluator_total: int = 0     # cents, minimized
    abs_difference: int = 0      # cents
    matches_evaluator: bool = True

    @property
    def residuals_clean(self) -> bool:
        return not (self.flow_balance_residuals or self.inventory_balance_residuals
                    or self.inventory_bound_residuals or self.berth_residuals)

    @property
    def in_milp_domain(self) -> bool:
        return not any(self.domain_violations.values())

    @property
    def clean(self) -> bool:
        return self.residuals_clean and self.matches_evaluator

    def summary(self) -> str:
        lines = [
            f"flow balance residuals : {len(self.flow_balance_residuals)}",
            f"inventory balance      : {len(self.inventory_balance_residuals)}",
            f"inventory bounds       : {len(self.inventory_bound_residuals)}",
            f"berth limits           : {len(self.berth_residuals)}",
            f"domain violations      : "
            f"{sum(len(v) for v in self.domain_violations.values())}",
            f"objective              : {self.objective / 100.0:.2f}",
            f"evaluator total        : {self.evaluator_total / 100.0:.2f}",
            f"difference             : {self.abs_difference / 100.0:.2f} "
            f"({'match' if self.matches_evaluator else 'MISMATCH'})",
        ]
        return "\n".join(lines)


def schedule_to_arcflow(sol: Solution, ev: EvalResult, inst: Instance) -> ArcFlow:
    """Map each vessel chain to source, waiting, travel and sink arcs.

    Vessels with no non-truncated call wait at their start port until the
    horizon end; the others sink at their final berth end.
    """
    if len(ev.arrival) != len(sol.calls):
        raise ValueError("evaluation is stale: schedule length mismatch")
    flows: dict[int, dict[Arc, int]] = {c.id: {} for c in inst.classes}

    def add(class_id: int, arc: Arc) -> None:
        flows[class_id][arc] = flows[class_id].get(arc, 0) + 1

    chains: list[list[int]] = [[] for _ in inst.vessels]
    for i, call in enumerate(sol.calls):
        chains[call.vessel].append(i)
    for v in inst.vessels:
        cid = v.class_id
        pos_port, pos_time = v.start_port, v.ready_time
        add(cid, Arc("source", SOURCE, (pos_port, pos_time)))
        for i in chains[v.id]:
            if ev.truncated[i]:
                break
            p = sol.calls[i].port
            arr, be = ev.arrival[i], ev.berth_end[i]
            if (p, arr) != (pos_port, pos_time):
                # a vessel travels empty exactly when heading to load
                kind = "ballast" if inst.ports[p].kind == PRODUCTION else "interregional"
                add(cid, Arc(kind, (pos_port, pos_time), (p, arr)))
            for u in range(arr, be):
                add(cid, Arc("waiting", (p, u), (p, u + 1)))
            pos_port, pos_time = p, be
        if pos_time == v.ready_time and pos_port == v.start_port and not chains[v.id]:
            for u in range(pos_time, inst.horizon):
                add(cid, Arc("waiting", (pos_port, u), (pos_port, u + 1)))
            pos_time = inst.horizon
        add(cid, Arc("sink", (pos_port, pos_time), SINK))
    return ArcFlow(flows)


def _arc_cost_cents(arc: Arc, inst: Instance, class_id: int, first_call_fee: dict) -> int:
    if arc.kind == "waiting":
        return 0
    if arc.kind == "sink":
        return 0
    if arc.kind == "source":
        return first_call_fee.get((class_id, arc.head), 0)
    vc = inst.classes[class_id]
    p_from, _ = arc.tail
    p_to, _ = arc.head
    dist = inst.distance_km[p_from][p_to]
    cost = 0
    if dist != 0.0:
        if arc.kind == "ballast":
            cost += cents(vc.cost_per_km * dist * (1.0 - vc.ballast_discount))
        else:
            cost += cents(vc.cost_per_km * dist)
    cost += cents(inst.ports[p_to].port_fee)
    return cost


def check(sol: Solution, inst: Instance) -> ValidatorReport:
    """Recompute every constraint residual and the objective for a
    parity-valid solution.  Violations are reported, never raised."""
    ev = evaluate(sol, inst)
    T = inst.horizon
    report = ValidatorReport(evaluator_total=ev.total_cost)
    flow = schedule_to_arcflow(sol, ev, inst)

    # flow balance at every touched node plus source and sink
    class_count = {c.id: 0 for c in inst.classes}
    for v in inst.vessels:
        class_count[v.class_id] += 1
    for cid, arcs in flow.flows.items():
        net: dict[tuple, int] = {}
        for arc, n in arcs.items():
            net[arc.tail] = net.get(arc.tail, 0) + n
            net[arc.head] = net.get(arc.head, 0) - n
        for node, value in net.items():
            expected = class_count[cid] if node == SOURCE else (
                -class_count[cid] if node == SINK else 0)
            if value != expected:
                report.flow_balance_residuals[(node, cid)] = value - expected

    # transfers from the schedule, independent of the evaluator's bookkeeping
    transfer_q = [[0.0] * (T + 1) for _ in inst.ports]
    for i, call in enumerate(sol.calls):
        if ev.truncated[i]:
            continue
        transfer_q[call.port][ev.berth_end[i]] += inst.vessel_class(call.vessel).capacity

    # inventory balance replay from the initial inventories: the clamp to
    # the admissible limit determines the required accrual, which must
    # match the evaluator's stored value exactly, as must the trajectory
    for j, port in enumerate(inst.ports):
        delta = port.delta
        s_prev = port.inv_init
        for t in range(1, T + 1):
            k = t - 1
            shat = s_prev + delta * (port.rate[k] - transfer_q[j][t])
            lo, hi = port.inv_min[k], port.inv_max[k]
            s_t = lo if shat < lo else (hi if shat > hi else shat)
            alpha_required = delta * (shat - s_t)
            diff = max(abs(s_t - ev.inventory[j][t]),
                       abs(alpha_required - ev.spot[j][t]))
            if diff != 0.0:
                report.inventory_balance_residuals[(j, t)] = diff
            bound_resid = max(0.0, lo - s_t, s_t - hi)
            if bound_resid != 0.0:
                report.inventory_bound_residuals[(j, t)] = bound_resid
            s_prev = s_t

    # berth limits, half-open occupancy
    for j, port in enumerate(inst.ports):
        occupancy = [0] * (T + 2)
        for i, call in enumerate(sol.calls):
            if call.port != j or ev.truncated[i]:
                continue
            for u in range(ev.berth_start[i], min(ev.berth_end[i], T + 1)):
                occupancy[u] += 1
        for u, n in enumerate(occupancy):
            if n > port.berth_limit:
                report.berth_residuals[(j, u)] = n - port.berth_limit

    # domain conditions
    negative_spot = [(j, t, ev.spot[j][t])
                     for j in range(inst.n_ports)
                     for t in range(T + 1) if ev.spot[j][t] < 0.0]
    nonbinary = [(cid, arc, n) for cid, arcs in flow.flows.items()
                 for arc, n in arcs.items() if arc.kind == "interregional" and n > 1]
    nonintegral = [(cid, arc, n) for cid, arcs in flow.flows.items()
                   for arc, n in arcs.items()
                   if not isinstance(n, int) or n < 0]
    report.domain_violations = {
        "spot_charter_negative": negative_spot,
        "interregional_arc_nonbinary": nonbinary,
        "flow_nonintegral": nonintegral,
    }

    # objective: fold fees and the ballast discount into arc costs; the fee
    # of a first call at the vessel's start port rides on the source arc
    first_call_fee: dict[tuple, int] = {}
    chains: list[list[int]] = [[] for _ in inst.vessels]
    for i, call in enumerate(sol.calls):
        chains[call.vessel].append(i)
    for v in inst.vessels:
        if chains[v.id] and not ev.truncated[chains[v.id][0]]:
            first = sol.calls[chains[v.id][0]]
            if first.port == v.start_port:
                node = (v.class_id, (v.start_port, v.ready_time))
                first_call_fee[node] = first_call_fee.get(node, 0) \
                    + cents(inst.ports[first.port].port_fee)
    routing_c = 0
    for cid, arcs in flow.flows.items():
        for arc, n in arcs.items():
            if arc.kind == "source":
                routing_c += _arc_cost_cents(arc, inst, cid, first_call_fee)
            else:
                routing_c += n * _arc_cost_cents(arc, inst, cid, first_call_fee)
    penalty_c = 0
    for j, port in enumerate(inst.ports):
        for t in range(1, T + 1):
            a = ev.spot[j][t]
            if a != 0.0:
                penalty_c += cents(port.penalty[t - 1] * abs(a))
    last_be = 0
    for i in range(len(sol.calls)):
        if not ev.truncated[i] and ev.berth_end[i] > last_be:
            last_be = ev.berth_end[i]
    reward_c = cents(inst.early_finish_reward * max(0, T - last_be))
    report.objective = -routing_c - penalty_c + reward_c
    report.abs_difference = abs(-report.objective - ev.total_cost)
    report.matches_evaluator = report.abs_difference <= 1
    return report


def _appendable(sol: Solution, inst: Instance, ev: EvalResult) -> list[Call]:
    """Parity-valid appends derived from first principles (kind
    alternation only); the caller decides what truncation means."""
    out = []
    for v in inst.vessels:
        if ev.vessel_truncated[v.id]:
            continue
        for p in inst.ports_of_kind(sol.pending_kind(v.id)):
            out.append(Call(p, v.id))
    out.sort(key=lambda c: (c.port, c.vessel))
    return out


def brute_force_optimum(inst: Instance, max_calls: int,
                        guard: int = 10_000_000) -> tuple[Solution, int]:
    """Exhaustive minimum over parity-valid call sequences up to
    ``max_calls`` calls.

    Sequences containing beyond-horizon calls are skipped: a truncated
    call contributes nothing, so each such sequence evaluates identically
    to one without it, which is enumerated anyway.  Ties break on the
    lexicographically smallest call sequence.  Refuses (raises
    SearchSpaceExceeded) beyond ``guard`` enumerated sequences.
    """
    if max_calls < 0:
        raise ValueError("max_calls must be >= 0")
    empty = Solution(inst)
    best_cost = evaluate(empty, inst).total_cost
    best_calls: tuple = ()
    visited = 1

    def rec(sol: Solution, depth: int) -> None:
        nonlocal best_cost, best_calls, visited
        ev = evaluate(sol, inst)
        if depth > 0:
            key = tuple(sol.call_tuples())
            if ev.total_cost < best_cost or (ev.total_cost == best_cost
                                             and key < best_calls):
                best_cost = ev.total_cost
                best_calls = key
        if depth == max_calls:
            return
        for call in _appendable(sol, inst, ev):
            child = sol.copy()
            child.append_call(call)
            cev = evaluate(child, inst)
            if cev.truncated[-1]:
                continue
            visited += 1
            if visited > guard:
                raise SearchSpaceExceeded(
                    f"more than {guard} sequences up to length {max_calls}")
            rec(child, depth + 1)

    rec(empty, 0)
    from .solution import from_calls
    best = from_calls(inst, [Call(*c) for c in best_calls])
    evaluate(best, inst)
    return best, best_cost
