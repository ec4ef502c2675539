"""Call-sequence solution representation with occurrence pointers.

A solution is an ordered vector of (port, vessel) calls.  For every
position four auxiliary pointers record the previous/next occurrence of
the same vessel and of the same port; local search uses them to skip
redundant reorderings and the evaluator uses the same structure to keep
FIFO berth order per port.

Per-vessel parity: restricted to one vessel, port kinds alternate
production/consumption; a vessel starting empty loads first, a vessel
starting loaded discharges first.  Violations are rejected at
construction time, never penalized.

A Solution is a value owned by one worker at a time; ``copy()`` is the
sharing mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .instance import CONSUMPTION, EMPTY, Instance, PRODUCTION


class ParityError(ValueError):
    """A vessel would visit two ports of the same kind in a row."""


@dataclass(frozen=True)
class Call:
    port: int
    vessel: int


def _first_kind(inst: Instance, vessel: int) -> str:
    return PRODUCTION if inst.vessels[vessel].initial_state == EMPTY else CONSUMPTION


def _other(kind: str) -> str:
    return CONSUMPTION if kind == PRODUCTION else PRODUCTION


class Solution:
    """Mutable call sequence; mutations invalidate the cached evaluation
    from the earliest touched position so re-evaluation can reuse the
    untouched schedule prefix."""

    __slots__ = (
        "inst", "calls",
        "prev_vessel", "prev_port", "next_vessel", "next_port",
        "_last_of_vessel", "_last_of_port", "_pending_kind",
        "cached_eval", "valid_prefix",
    )

    def __init__(self, inst: Instance):
        self.inst = inst
        self.calls: list[Call] = []
        self.prev_vessel: list[Optional[int]] = []
        self.prev_port: list[Optional[int]] = []
        self.next_vessel: list[Optional[int]] = []
        self.next_port: list[Optional[int]] = []
        self._last_of_vessel: dict[int, int] = {}
        self._last_of_port: dict[int, int] = {}
        self._pending_kind: list[str] = [_first_kind(inst, v.id) for v in inst.vessels]
        self.cached_eval = None     # EvalResult of some earlier state of this sequence
        self.valid_prefix = 0       # schedule entries < valid_prefix in cached_eval still hold

    def __len__(self) -> int:
        return len(self.calls)

    def copy(self) -> "Solution":
        s = Solution.__new__(Solution)
        s.inst = self.inst
        s.calls = list(self.calls)
        s.prev_vessel = list(self.prev_vessel)
        s.prev_port = list(self.prev_port)
        s.next_vessel = list(self.next_vessel)
        s.next_port = list(self.next_port)
        s._last_of_vessel = dict(self._last_of_vessel)
        s._last_of_port = dict(self._last_of_port)
        s._pending_kind = list(self._pending_kind)
        s.cached_eval = self.cached_eval
        s.valid_prefix = self.valid_prefix
        return s

    def pending_kind(self, vessel: int) -> str:
        """Port kind the vessel must visit next to keep its chain alternating."""
        return self._pending_kind[vessel]

    def append_call(self, call: Call) -> "Solution":
        """Append in O(1) amortized, back-patching the previous occurrences'
        ``next`` pointers.  Raises ParityError on a same-kind repeat."""
        kind = self.inst.ports[call.port].kind
        expected = self._pending_kind[call.vessel]
        if kind != expected:
            raise ParityError(
                f"vessel {call.vessel} expects a {expected} port next, "
                f"got {kind} port {call.port}")
        i = len(self.calls)
        pv = self._last_of_vessel.get(call.vessel)
        pp = self._last_of_port.get(call.port)
        self.calls.append(call)
        self.prev_vessel.append(pv)
        self.prev_port.append(pp)
        self.next_vessel.append(None)
        self.next_port.append(None)
        if pv is not None:
            self.next_vessel[pv] = i
        if pp is not None:
            self.next_port[pp] = i
        self._last_of_vessel[call.vessel] = i
        self._last_of_port[call.port] = i
        self._pending_kind[call.vessel] = _other(kind)
        # appending keeps every already-scheduled call intact
        self.valid_prefix = min(self.valid_prefix, i) if self.cached_eval else 0
        return self

    def invalidate_from(self, position: int) -> None:
        self.valid_prefix = min(self.valid_prefix, position)

    @property
    def truncation_mask(self) -> Optional[list[bool]]:
        """Per-position beyond-horizon flags from the cached evaluation, if any."""
        ev = self.cached_eval
        if ev is None or len(ev.truncated) != len(self.calls) or self.valid_prefix != len(self.calls):
            return None
        return list(ev.truncated)

    def call_tuples(self) -> list[tuple[int, int]]:
        return [(c.port, c.vessel) for c in self.calls]


def from_calls(inst: Instance, calls: Iterable[Call | tuple[int, int]],
               base_eval=None, change_point: int = 0) -> Solution:
    """Build a solution from an arbitrary (parity-valid) call sequence.

    ``base_eval``/``change_point`` let a local-search move hand over the
    previous evaluation: schedule entries before ``change_point`` are
    reused on the next evaluation.
    """
    s = Solution(inst)
    for c in calls:
        if not isinstance(c, Call):
            c = Call(*c)
        if not (0 <= c.port < inst.n_ports):
            raise ValueError(f"port {c.port} does not resolve")
        if not (0 <= c.vessel < inst.n_vessels):
            raise ValueError(f"vessel {c.vessel} does not resolve")
        s.append_call(c)
    if base_eval is not None:
        s.cached_eval = base_eval
        s.valid_prefix = min(change_point, len(s.calls))
    return s


def rebuild_pointers(s: Solution) -> Solution:
    """Recompute all four pointer arrays from scratch; equals incremental
    maintenance (idempotent on solutions built via append_call)."""
    rebuilt = from_calls(s.inst, s.calls)
    s.prev_vessel = rebuilt.prev_vessel
    s.prev_port = rebuilt.prev_port
    s.next_vessel = rebuilt.next_vessel
    s.next_port = rebuilt.next_port
    s._last_of_vessel = rebuilt._last_of_vessel
    s._last_of_port = rebuilt._last_of_port
    s._pending_kind = rebuilt._pending_kind
    return s


def _dependent(a: Call, b: Call) -> bool:
    return a.port == b.port or a.vessel == b.vessel


def equivalent_under_commutation(s1: Solution, s2: Solution) -> bool:
    """True iff s2 is reachable from s1 by repeatedly swapping adjacent
    calls that share neither port nor vessel.

    Two sequences are equivalent exactly when, for every pair of mutually
    dependent call types (sharing a port or a vessel, including a type
    with itself), their projections onto that pair coincide.  Used only
    by tests; the search dedups by score instead.
    """
    a, b = s1.call_tuples(), s2.call_tuples()
    if len(a) != len(b) or sorted(a) != sorted(b):
        return False
    types = sorted(set(a))
    for i, ta in enumerate(types):
        for tb in types[i:]:
            if not _dependent(Call(*ta), Call(*tb)):
                continue
            pair = {ta, tb}
            if [c for c in a if c in pair] != [c for c in b if c in pair]:
                return False
    return True


def dump_solution(s: Solution, path) -> None:
    """One call per line ``port_id,vessel_id``, trailing ``#truncated``
    marker for beyond-horizon calls (requires a current evaluation)."""
    mask = s.truncation_mask or [False] * len(s.calls)
    lines = []
    for call, trunc in zip(s.calls, mask):
        line = f"{call.port},{call.vessel}"
        if trunc:
            line += " #truncated"
        lines.append(line)
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_solution(inst: Instance, path) -> Solution:
    calls = []
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            port_s, vessel_s = line.split(",")
            calls.append(Call(int(port_s), int(vessel_s)))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: expected 'port_id,vessel_id', got {raw!r}") from exc
    return from_calls(inst, calls)
