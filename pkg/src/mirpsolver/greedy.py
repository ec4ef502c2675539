"""Greedy completion of partial solutions and completion-based scoring.

The construction loop repeatedly appends the call (port, vessel) where
the port is the next one whose projected inventory breaches a bound
(projection assumes no transfers beyond those already scheduled, over the
full remaining horizon) and the vessel is the parity-eligible one that
can berth there earliest.  Ties: earlier violation time then lower port
id; earlier berth start, then earlier arrival, then lower vessel id.
Candidates whose operation would end past the horizon are never
appended; the loop stops when no candidate remains or no port will ever
breach.

A port that stays safe through the horizon remains a candidate ranked
last, so the loop can schedule the enabling load that must precede a
consumer delivery.

The randomized variant perturbs each candidate's selection key (port
violation time, and vessel arrival time when enabled) with an
independent normal sample whose standard deviation is ``sigma_frac``
times the key spread among candidates; the minimum perturbed key wins.
Zero noise reproduces the deterministic variant exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .evaluator import EvalResult, evaluate, probe_append
from .instance import Instance
from .solution import Call, Solution


@dataclass
class GreedyConfig:
    q: int = 3                   # completions per score (1 deterministic + q-1 randomized)
    sigma_frac: float = 0.25     # noise stdev as a fraction of the candidate key spread
    randomize_port: bool = True
    randomize_vessel: bool = False

    def validate(self) -> "GreedyConfig":
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.sigma_frac < 0:
            raise ValueError("sigma_frac must be >= 0")
        return self


def candidate_calls(sol: Solution, inst: Instance
                    ) -> list[tuple[int, int, int, int, int]]:
    """All parity-valid, non-truncating appends as
    (port, vessel, arrival, berth_start, berth_end), sorted by (port, vessel)."""
    ev = evaluate(sol, inst)
    out = []
    for v in inst.vessels:
        kind = sol.pending_kind(v.id)
        for p in inst.ports_of_kind(kind):
            times = probe_append(ev, inst, p, v.id)
            if times is None:
                continue
            arrival, bs, be = times
            if be <= inst.horizon:
                out.append((p, v.id, arrival, bs, be))
    out.sort(key=lambda c: (c[0], c[1]))
    return out


def violation_times(ev: EvalResult, inst: Instance) -> list[int]:
    """First period each port accrues spot charter, horizon+1 if never."""
    never = inst.horizon + 1
    vt = []
    for j in range(inst.n_ports):
        row = ev.spot[j]
        t = next((t for t in range(1, inst.horizon + 1) if row[t] != 0.0), never)
        vt.append(t)
    return vt


def preference_ordered_candidates(sol: Solution, inst: Instance
                                  ) -> list[tuple[int, int, int, int, int]]:
    """Appendable calls in the construction heuristic's preference order:
    earliest-violating port first (then port id), earliest berth start
    (then arrival, then vessel id) within a port.  The head of the list
    is exactly the call the deterministic completion would append."""
    ev = evaluate(sol, inst)
    vt = violation_times(ev, inst)
    return sorted(candidate_calls(sol, inst),
                  key=lambda c: (vt[c[0]], c[0], c[3], c[2], c[1]))


def _noise(rng: random.Random, sigma_frac: float, keys: list[float]) -> list[float]:
    spread = max(keys) - min(keys)
    sigma = sigma_frac * spread
    return [rng.gauss(0.0, sigma) for _ in keys]


def _complete(partial: Solution, inst: Instance,
              cfg: GreedyConfig | None, rng: random.Random | None) -> Solution:
    sol = partial.copy()
    never = inst.horizon + 1
    while True:
        ev = evaluate(sol, inst)
        cands = candidate_calls(sol, inst)
        if not cands:
            break
        vt = violation_times(ev, inst)
        if min(vt) == never:
            break
        by_port: dict[int, list[tuple[int, int, int]]] = {}
        for p, v, arrival, bs, _be in cands:
            by_port.setdefault(p, []).append((v, arrival, bs))
        ports = sorted(by_port)
        keys = [float(vt[p]) for p in ports]
        if rng is not None and cfg.randomize_port and len(ports) > 1:
            keys = [k + n for k, n in zip(keys, _noise(rng, cfg.sigma_frac, keys))]
        port = min(zip(keys, ports))[1]
        vessels = by_port[port]
        if rng is not None and cfg.randomize_vessel and len(vessels) > 1:
            arrivals = [float(a) for _v, a, _bs in vessels]
            noise = _noise(rng, cfg.sigma_frac, arrivals)
            vessel = min((a + n, v) for (v, a, _bs), n in zip(vessels, noise))[1]
        else:
            vessel = min((bs, a, v) for v, a, bs in vessels)[2]
        sol.append_call(Call(port, vessel))
    return sol


def complete_deterministic(partial: Solution, inst: Instance) -> Solution:
    """Deterministic greedy completion; idempotent on its own output."""
    return _complete(partial, inst, None, None)


def complete_randomized(partial: Solution, inst: Instance,
                        cfg: GreedyConfig, seed: int) -> Solution:
    """Noisy greedy completion, deterministic per seed."""
    return _complete(partial, inst, cfg, random.Random(seed))


def score_partial(partial: Solution, inst: Instance, cfg: GreedyConfig, seed: int
                  ) -> tuple[int, Solution, int]:
    """Score a partial solution by the median completion cost.

    Runs one deterministic completion plus ``q - 1`` randomized ones with
    derived seeds ``seed+1 .. seed+q-1``; returns (median cost in cents,
    best completed solution, its cost).  Even counts use the lower median.
    """
    completions = [complete_deterministic(partial, inst)]
    for k in range(1, cfg.q):
        completions.append(complete_randomized(partial, inst, cfg, seed + k))
    costs = [evaluate(s, inst).total_cost for s in completions]
    median = sorted(costs)[(len(costs) - 1) // 2]
    best_idx = min(range(len(costs)), key=lambda k: (costs[k], k))
    return median, completions[best_idx], costs[best_idx]
