import random

import pytest

from mirpsolver import Solution, brute_force_optimum, evaluate, generate_toy
from mirpsolver.greedy import candidate_calls
from mirpsolver.solution import Call

# desk-scale verification suite: <= 2 consumers, <= 2 vessels, T <= 14
SUITE_SPECS = [(k, 1 + (k % 2), 12 + ((k + k // 6) % 3)) for k in range(1, 21)]

# minimum of the exhaustive enumeration on the canonical 2-port fixture,
# frozen as the regression constant for all derived expectations
TOY1_OPTIMUM_CENTS = 222950


@pytest.fixture(scope="session")
def toy1():
    return generate_toy(1, 1, 12)


@pytest.fixture(scope="session")
def toy_suite():
    return [generate_toy(*spec) for spec in SUITE_SPECS]


@pytest.fixture(scope="session")
def oracle(toy1, toy_suite):
    """Brute-force optimum per suite instance, computed once per session."""
    table = {}
    for inst in [toy1] + toy_suite:
        _sol, cost = brute_force_optimum(inst, 32)
        table[inst.name] = cost
    return table


def random_parity_walk(inst, rng: random.Random, max_len: int = 12) -> Solution:
    """Random parity-valid solution (may contain truncated calls)."""
    sol = Solution(inst)
    for _ in range(rng.randrange(max_len + 1)):
        vessel = rng.randrange(inst.n_vessels)
        kind = sol.pending_kind(vessel)
        ports = inst.ports_of_kind(kind)
        sol.append_call(Call(rng.choice(ports), vessel))
    return sol


def random_feasible_walk(inst, rng: random.Random, max_len: int = 12) -> Solution:
    """Random parity-valid solution built from non-truncating appends only."""
    sol = Solution(inst)
    for _ in range(max_len):
        cands = candidate_calls(sol, inst)
        if not cands or rng.random() < 0.15:
            break
        p, v, *_ = rng.choice(cands)
        sol.append_call(Call(p, v))
    evaluate(sol, inst)
    return sol
