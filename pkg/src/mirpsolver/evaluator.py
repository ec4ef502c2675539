"""Schedule, inventory and cost evaluation of (possibly partial) solutions.

Deterministic simulation over time points 0..T:

* Each vessel processes its call chain in sequence order.  Arrival at a
  call is the previous berth end plus the class travel time (never before
  the vessel's ready time).  The berth start is the earliest time point at
  or after arrival where strictly fewer than ``berth_limit`` operations
  are active throughout the operation window, and no earlier call at the
  same port berths later (FIFO in call-sequence order; ties at the same
  period resolve by sequence position).  A full load or discharge takes
  ``op_duration`` periods and transfers exactly the class capacity at the
  berth-end time point.

* Port inventories evolve by their rates plus transfers.  Whenever a
  bound would be breached, a spot-charter accrual restores the inventory
  to the admissible limit and its magnitude is charged at that period's
  penalty price.  The accrual is stored signed in the flow-balance
  convention (positive for excess production / unmet consumption,
  negative when a vessel operation pushes inventory past the opposite
  bound), so replaying the balance equation with the stored values
  reproduces the clamped trajectory exactly.

* Calls whose berth end would exceed the horizon are flagged truncated
  and contribute nothing: no transfer, no berth occupancy, no routing
  cost.  Truncation is a suffix property per vessel chain.

* Routing cost sums, per non-truncated leg, distance cost plus the
  destination port fee; empty (ballast) legs get the class discount on
  the distance term only.  The early-finish reward credits the reward
  rate times the periods between the fleet-wide last berth end and the
  horizon.

All money is fixed-point integer cents, so totals are exact and usable
as dedup keys.  Evaluation is a pure function of (solution, instance);
the cache living inside the Solution value preserves purity externally.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from ._util import cents
from .instance import Instance
from .solution import Solution

log = logging.getLogger(__name__)


@dataclass
class EvalResult:
    # per-call schedule (suffix-truncated calls carry the T+1 sentinel)
    arrival: list[int]
    berth_start: list[int]
    berth_end: list[int]
    truncated: list[bool]
    # per-port trajectories over time points 0..T
    inventory: list[list[float]]
    spot: list[list[float]]            # signed spot-charter accrual, slot 0 unused
    # decomposed costs, integer cents
    routing_cost: int
    penalty_cost: int
    reward_credit: int
    total_cost: int
    truncated_count: int
    last_berth_end: int
    # schedule end state, used to probe candidate appends
    vessel_end_time: list[int]
    vessel_end_port: list[int]
    vessel_truncated: list[bool]
    port_busy: list[list[tuple[int, int]]]
    port_last_start: list[int]

    @property
    def total_money(self) -> float:
        return self.total_cost / 100.0


def _berth_search(busy: list[tuple[int, int]], limit: int, t0: int, dur: int) -> int:
    """Earliest t >= t0 with fewer than ``limit`` occupied berths over [t, t+dur)."""
    t = t0
    while True:
        conflict = -1
        for u in range(t, t + dur):
            n = 0
            for bs, be in busy:
                if bs <= u < be:
                    n += 1
            if n >= limit:
                conflict = u
                break
        if conflict < 0:
            return t
        t = conflict + 1


class _ScheduleState:
    __slots__ = ("vend_t", "vend_p", "vtrunc", "busy", "last_bs")

    def __init__(self, inst: Instance):
        self.vend_t = [v.ready_time for v in inst.vessels]
        self.vend_p = [v.start_port for v in inst.vessels]
        self.vtrunc = [False] * inst.n_vessels
        self.busy: list[list[tuple[int, int]]] = [[] for _ in inst.ports]
        self.last_bs = [-1] * inst.n_ports


def _place(state: _ScheduleState, port: int, vessel: int,
           bs: int, be: int, trunc: bool) -> None:
    if trunc:
        state.vtrunc[vessel] = True
    else:
        state.vend_t[vessel] = be
        state.vend_p[vessel] = port
        state.busy[port].append((bs, be))
        state.last_bs[port] = bs


def _probe_times(state: _ScheduleState, inst: Instance,
                 port: int, vessel: int) -> tuple[int, int, int]:
    """(arrival, berth_start, berth_end) the next call of ``vessel`` at
    ``port`` would get under the current schedule state."""
    v = inst.vessels[vessel]
    tt = inst.travel_time[v.class_id][state.vend_p[vessel]][port]
    arrival = max(state.vend_t[vessel] + tt, v.ready_time)
    t0 = max(arrival, state.last_bs[port])
    bs = _berth_search(state.busy[port], inst.ports[port].berth_limit, t0, inst.op_duration)
    return arrival, bs, bs + inst.op_duration


def _compute(calls, inst: Instance,
             reuse: Optional[EvalResult], reuse_len: int) -> EvalResult:
    n = len(calls)
    T = inst.horizon
    D = inst.op_duration
    arrival = [0] * n
    bstart = [0] * n
    bend = [0] * n
    trunc = [False] * n
    state = _ScheduleState(inst)
    sentinel = T + 1

    for i in range(reuse_len):
        a, bs, be, tr = reuse.arrival[i], reuse.berth_start[i], reuse.berth_end[i], reuse.truncated[i]
        arrival[i], bstart[i], bend[i], trunc[i] = a, bs, be, tr
        _place(state, calls[i].port, calls[i].vessel, bs, be, tr)
    for i in range(reuse_len, n):
        call = calls[i]
        if state.vtrunc[call.vessel]:
            arrival[i] = bstart[i] = bend[i] = sentinel
            trunc[i] = True
            continue
        a, bs, be = _probe_times(state, inst, call.port, call.vessel)
        tr = be > T
        arrival[i], bstart[i], bend[i], trunc[i] = a, bs, be, tr
        _place(state, call.port, call.vessel, bs, be, tr)

    # transfers register at the berth-end time point
    transfer_q = [[0.0] * (T + 1) for _ in inst.ports]
    last_be = 0
    for i in range(n):
        if trunc[i]:
            continue
        call = calls[i]
        transfer_q[call.port][bend[i]] += inst.vessel_class(call.vessel).capacity
        if bend[i] > last_be:
            last_be = bend[i]

    inventory: list[list[float]] = []
    spot: list[list[float]] = []
    penalty_c = 0
    for j, port in enumerate(inst.ports):
        delta = port.delta
        srow = [port.inv_init]
        arow = [0.0] * (T + 1)
        s_prev = port.inv_init
        rate = port.rate
        lo_arr = port.inv_min
        hi_arr = port.inv_max
        pen = port.penalty
        tq = transfer_q[j]
        for t in range(1, T + 1):
            k = t - 1
            shat = s_prev + delta * (rate[k] - tq[t])
            lo = lo_arr[k]
            hi = hi_arr[k]
            if shat < lo:
                s_new = lo
            elif shat > hi:
                s_new = hi
            else:
                s_new = shat
            if s_new != shat:
                alpha = delta * (shat - s_new)
                arow[t] = alpha
                penalty_c += round(pen[k] * abs(alpha) * 100)
            srow.append(s_new)
            s_prev = s_new
        inventory.append(srow)
        spot.append(arow)

    routing_c = 0
    chains: list[list[int]] = [[] for _ in inst.vessels]
    for i, call in enumerate(calls):
        chains[call.vessel].append(i)
    for v in inst.vessels:
        leg = inst.leg_cents[v.class_id]
        fee = inst.fee_cents
        prev_p = v.start_port
        for i in chains[v.id]:
            if trunc[i]:
                break
            p = calls[i].port
            routing_c += leg[prev_p][p] + fee[p]
            prev_p = p

    reward_c = cents(inst.early_finish_reward * max(0, T - last_be))
    return EvalResult(
        arrival=arrival, berth_start=bstart, berth_end=bend, truncated=trunc,
        inventory=inventory, spot=spot,
        routing_cost=routing_c, penalty_cost=penalty_c, reward_credit=reward_c,
        total_cost=routing_c + penalty_c - reward_c,
        truncated_count=sum(trunc), last_berth_end=last_be,
        vessel_end_time=state.vend_t, vessel_end_port=state.vend_p,
        vessel_truncated=state.vtrunc,
        port_busy=state.busy, port_last_start=state.last_bs,
    )


def evaluate_sequence(calls, inst: Instance, base_eval: Optional[EvalResult] = None,
                      prefix: int = 0) -> EvalResult:
    """Evaluate a raw call sequence, reusing ``base_eval``'s schedule for
    the first ``prefix`` positions (which must be unchanged)."""
    if base_eval is None or prefix <= 0:
        return _compute(calls, inst, None, 0)
    return _compute(calls, inst, base_eval, min(prefix, len(calls), len(base_eval.arrival)))


def evaluate_full(sol: Solution, inst: Instance) -> EvalResult:
    """From-scratch reference evaluation."""
    return _compute(sol.calls, inst, None, 0)


def evaluate_incremental(sol: Solution, inst: Instance, change_point: int) -> EvalResult:
    """Re-evaluate reusing the cached schedule before ``change_point``.

    Bit-identical to :func:`evaluate_full`.  A missing or stale cache
    falls back to the full evaluation (logged, not an error).
    """
    ev = sol.cached_eval
    prefix = min(change_point, sol.valid_prefix, len(sol.calls))
    if ev is None or len(ev.arrival) < prefix:
        log.debug("incremental evaluation fell back to full (no usable cache)")
        return evaluate_full(sol, inst)
    return _compute(sol.calls, inst, ev, prefix)


def evaluate(sol: Solution, inst: Instance) -> EvalResult:
    """Evaluate through the solution's cache (incremental when possible)."""
    n = len(sol.calls)
    ev = sol.cached_eval
    if ev is not None and sol.valid_prefix == n and len(ev.arrival) == n:
        return ev
    result = evaluate_incremental(sol, inst, sol.valid_prefix) if ev is not None \
        else evaluate_full(sol, inst)
    sol.cached_eval = result
    sol.valid_prefix = n
    return result


def probe_append(ev: EvalResult, inst: Instance, port: int, vessel: int
                 ) -> Optional[tuple[int, int, int]]:
    """Times a new call would be scheduled at, given a finished evaluation.

    Returns None when the vessel's chain is already truncated (any
    appended call would be truncated by the suffix rule).
    """
    if ev.vessel_truncated[vessel]:
        return None
    v = inst.vessels[vessel]
    tt = inst.travel_time[v.class_id][ev.vessel_end_port[vessel]][port]
    arrival = max(ev.vessel_end_time[vessel] + tt, v.ready_time)
    t0 = max(arrival, ev.port_last_start[port])
    bs = _berth_search(ev.port_busy[port], inst.ports[port].berth_limit, t0, inst.op_duration)
    return arrival, bs, bs + inst.op_duration


def gap_percent(cost: float, best_known: float) -> float:
    """Percentage gap 100 * (cost - best_known) / best_known, to 2 decimals."""
    if best_known <= 0:
        raise ValueError(f"best_known must be > 0, got {best_known}")
    return round(100.0 * (cost - best_known) / best_known, 2) + 0.0


def format_trace(sol: Solution, ev: EvalResult, inst: Instance) -> str:
    """Debug trace: ``t,port,inventory,alpha`` per period per port, then
    ``call_idx,vessel,port,arrival,start,end`` per call."""
    lines = []
    for t in range(inst.horizon + 1):
        for j in range(inst.n_ports):
            lines.append(f"{t},{j},{ev.inventory[j][t]!r},{ev.spot[j][t]!r}")
    for i, call in enumerate(sol.calls):
        lines.append(f"{i},{call.vessel},{call.port},"
                     f"{ev.arrival[i]},{ev.berth_start[i]},{ev.berth_end[i]}")
    return "\n".join(lines) + "\n"
