"""Six neighborhood moves and the randomized VND driver.

Moves:

* ``swap``       exchange the calls at two positions.
* ``relocate``   move one call to a new position.
* ``replace``    change a call's port to another port of the same kind.
* ``insert``     append a load/discharge pair for one vessel at the end.
* ``remove``     delete a call together with the vessel's next call,
                 keeping the chain alternating.
* ``swap_port``  exchange the ports of two calls of different vessels,
                 restricted to ports of the same kind.

Swap and relocate candidates that only commute independent calls are
skipped via the occurrence pointers: such reorderings cannot change the
evaluation.  Invalid candidates (parity violations) are
skipped by the driver, never raised.

The driver shuffles the six neighborhoods (seeded), scans the current
neighborhood in a seeded random order, applies the first cost-improving
move and restarts from a fresh shuffled order; it returns when all six
neighborhoods are exhausted without improvement.  Moves may push calls
past the horizon; displaced calls are simply flagged truncated by the
evaluator and ignored.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .evaluator import evaluate, evaluate_sequence
from .instance import CONSUMPTION, Instance, PRODUCTION
from .solution import Call, ParityError, Solution, from_calls

NEIGHBORHOODS = ("swap", "relocate", "replace", "insert", "remove", "swap_port")


@dataclass(frozen=True)
class Move:
    kind: str
    a: int = 0      # position / vessel id, by kind
    b: int = 0      # position / port id, by kind
    c: int = 0      # consumer port for insert


def _after(ptr: int | None, bound: int) -> bool:
    return ptr is None or ptr > bound


def _before(ptr: int | None, bound: int) -> bool:
    return ptr is None or ptr < bound


def _swap_is_commutation(s: Solution, i: int, j: int) -> bool:
    # i < j; true when both calls are independent of each other and of
    # everything strictly between them
    return (_after(s.next_vessel[i], j) and _after(s.next_port[i], j)
            and _before(s.prev_vessel[j], i) and _before(s.prev_port[j], i))


def _relocate_is_commutation(s: Solution, i: int, k: int) -> bool:
    if k > i:
        return _after(s.next_vessel[i], k) and _after(s.next_port[i], k)
    return _before(s.prev_vessel[i], k) and _before(s.prev_port[i], k)


def moves_swap(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    n = len(s.calls)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            if filtered and _swap_is_commutation(s, i, j):
                continue
            out.append(Move("swap", i, j))
    return out


def moves_relocate(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    n = len(s.calls)
    out = []
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            if filtered and _relocate_is_commutation(s, i, k):
                continue
            out.append(Move("relocate", i, k))
    return out


def moves_replace(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    out = []
    for i, call in enumerate(s.calls):
        kind = inst.ports[call.port].kind
        for p in inst.ports_of_kind(kind):
            if p != call.port:
                out.append(Move("replace", i, p))
    return out


def moves_insert(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    out = []
    for v in inst.vessels:
        for prod in inst.production_ports:
            for cons in inst.consumption_ports:
                out.append(Move("insert", v.id, prod, cons))
    return out


def moves_remove(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    return [Move("remove", i) for i in range(len(s.calls))
            if s.next_vessel[i] is not None]


def moves_swap_port(s: Solution, inst: Instance, filtered: bool = True) -> list[Move]:
    n = len(s.calls)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            ci, cj = s.calls[i], s.calls[j]
            if ci.vessel == cj.vessel or ci.port == cj.port:
                continue
            if inst.ports[ci.port].kind != inst.ports[cj.port].kind:
                continue
            out.append(Move("swap_port", i, j))
    return out


_ENUMERATORS = {
    "swap": moves_swap,
    "relocate": moves_relocate,
    "replace": moves_replace,
    "insert": moves_insert,
    "remove": moves_remove,
    "swap_port": moves_swap_port,
}


def enumerate_moves(s: Solution, kind: str, inst: Instance,
                    filtered: bool = True) -> list[Move]:
    return _ENUMERATORS[kind](s, inst, filtered)


def _mutate_calls(s: Solution, m: Move, inst: Instance
                  ) -> tuple[list[Call], int, tuple[int, ...]]:
    """New call list, earliest touched position, and the vessels whose
    chain order changed (the only ones whose parity needs rechecking)."""
    calls = list(s.calls)
    n = len(calls)
    if m.kind == "swap":
        if not (0 <= m.a < n and 0 <= m.b < n):
            raise IndexError(f"swap positions ({m.a}, {m.b}) out of range")
        calls[m.a], calls[m.b] = calls[m.b], calls[m.a]
        return calls, min(m.a, m.b), (calls[m.a].vessel, calls[m.b].vessel)
    if m.kind == "relocate":
        if not (0 <= m.a < n and 0 <= m.b < n):
            raise IndexError(f"relocate positions ({m.a}, {m.b}) out of range")
        call = calls.pop(m.a)
        calls.insert(m.b, call)
        return calls, min(m.a, m.b), (call.vessel,)
    if m.kind == "replace":
        if not 0 <= m.a < n:
            raise IndexError(f"replace position {m.a} out of range")
        old = calls[m.a]
        if inst.ports[m.b].kind != inst.ports[old.port].kind:
            raise ParityError(
                f"replacement port {m.b} is not a {inst.ports[old.port].kind} port")
        calls[m.a] = Call(m.b, old.vessel)
        return calls, m.a, ()
    if m.kind == "insert":
        first, second = m.b, m.c
        if s.pending_kind(m.a) == inst.ports[m.c].kind:
            first, second = m.c, m.b
        calls.append(Call(first, m.a))
        calls.append(Call(second, m.a))
        return calls, n, ()
    if m.kind == "remove":
        if not 0 <= m.a < n:
            raise IndexError(f"remove position {m.a} out of range")
        partner = s.next_vessel[m.a]
        if partner is None:
            raise ParityError(f"call {m.a} has no same-vessel successor to remove with")
        # the partner is chain-adjacent and of the opposite kind, so the
        # remaining chain stays alternating
        del calls[max(m.a, partner)]
        del calls[min(m.a, partner)]
        return calls, m.a, ()
    if m.kind == "swap_port":
        if not (0 <= m.a < n and 0 <= m.b < n):
            raise IndexError(f"swap_port positions ({m.a}, {m.b}) out of range")
        ca, cb = calls[m.a], calls[m.b]
        if ca.vessel == cb.vessel:
            raise ParityError("swap_port needs two different vessels")
        if inst.ports[ca.port].kind != inst.ports[cb.port].kind:
            raise ParityError("swap_port needs ports of the same kind")
        calls[m.a] = Call(cb.port, ca.vessel)
        calls[m.b] = Call(ca.port, cb.vessel)
        return calls, min(m.a, m.b), ()
    raise ValueError(f"unknown move kind {m.kind!r}")


def _parity_ok(calls: list[Call], inst: Instance, vessels: tuple[int, ...]) -> bool:
    if not vessels:
        return True
    expected = {v: (PRODUCTION if inst.vessels[v].initial_state == "empty"
                    else CONSUMPTION) for v in vessels}
    ports = inst.ports
    for c in calls:
        kind = expected.get(c.vessel)
        if kind is None:
            continue
        if ports[c.port].kind != kind:
            return False
        expected[c.vessel] = CONSUMPTION if kind == PRODUCTION else PRODUCTION
    return True


def apply_move(s: Solution, m: Move, inst: Instance) -> Solution:
    """Apply a move, returning a new solution with pointers rebuilt and the
    evaluation invalidated from the earliest touched position.  Raises
    ParityError / IndexError on invalid moves."""
    calls, change, recheck = _mutate_calls(s, m, inst)
    if not _parity_ok(calls, inst, recheck):
        raise ParityError(f"{m.kind} move breaks a vessel's alternation")
    return from_calls(inst, calls, base_eval=s.cached_eval,
                      change_point=min(change, s.valid_prefix))


def try_apply(s: Solution, m: Move, inst: Instance) -> Solution | None:
    try:
        return apply_move(s, m, inst)
    except (ParityError, IndexError):
        return None


def try_move_cost(s: Solution, m: Move, inst: Instance):
    """Evaluate a candidate move without materializing a Solution.

    Returns (total cost in cents, new call list, evaluation) or None when
    the move is invalid.  The schedule prefix of the current solution's
    evaluation is reused below the touched position.
    """
    try:
        calls, change, recheck = _mutate_calls(s, m, inst)
    except (ParityError, IndexError):
        return None
    if not _parity_ok(calls, inst, recheck):
        return None
    ev = evaluate_sequence(calls, inst, s.cached_eval, min(change, s.valid_prefix))
    return ev.total_cost, calls, ev


def rvnd(s: Solution, inst: Instance, seed: int) -> Solution:
    """Randomized variable neighborhood descent, first improvement.

    Deterministic per (input, seed); the result never costs more than the
    input.
    """
    rng = random.Random(seed)
    cur = s
    cur_cost = evaluate(cur, inst).total_cost
    order = list(NEIGHBORHOODS)
    while True:
        rng.shuffle(order)
        improved = False
        for kind in order:
            moves = enumerate_moves(cur, kind, inst)
            rng.shuffle(moves)
            for m in moves:
                result = try_move_cost(cur, m, inst)
                if result is None:
                    continue
                cost, calls, ev = result
                if cost < cur_cost:
                    cur = from_calls(inst, calls, base_eval=ev,
                                     change_point=len(calls))
                    cur_cost = cost
                    improved = True
                    break
            if improved:
                break
        if not improved:
            return cur
