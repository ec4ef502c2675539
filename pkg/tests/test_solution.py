import random

import pytest

from mirpsolver import evaluate, from_calls, generate_toy
from mirpsolver.solution import (Call, ParityError, Solution, dump_solution,
                                 equivalent_under_commutation, load_solution,
                                 rebuild_pointers)

from conftest import random_parity_walk


def test_first_append_has_no_pointers(toy1):
    s = Solution(toy1).append_call(Call(0, 0))
    assert len(s) == 1
    assert s.prev_vessel == [None] and s.prev_port == [None]
    assert s.next_vessel == [None] and s.next_port == [None]


def test_second_append_backpatches(toy1):
    s = Solution(toy1).append_call(Call(0, 0)).append_call(Call(1, 0))
    assert s.prev_vessel[1] == 0
    assert s.prev_port[1] is None
    assert s.next_vessel[0] == 1
    assert s.next_port[0] is None


def test_same_kind_append_is_parity_error(toy1):
    s = Solution(toy1).append_call(Call(0, 0))
    with pytest.raises(ParityError):
        s.append_call(Call(0, 0))


def test_loaded_vessel_starts_with_consumption():
    inst = generate_toy(2, 2, 12)     # second vessel starts loaded
    assert inst.vessels[1].initial_state == "loaded"
    s = Solution(inst)
    with pytest.raises(ParityError):
        s.append_call(Call(0, 1))
    s.append_call(Call(1, 1))
    assert s.pending_kind(1) == "production"


def test_two_vessel_prev_port_pointer():
    inst = generate_toy(2, 2, 12)
    s = from_calls(inst, [(0, 0), (1, 1), (1, 0)])
    assert s.prev_port[2] == 1
    assert s.prev_vessel[2] == 0
    assert s.next_port[1] == 2


def test_rebuild_matches_incremental(toy_suite):
    rng = random.Random(7)
    for inst in toy_suite[:8]:
        for _ in range(40):
            s = random_parity_walk(inst, rng)
            before = (list(s.prev_vessel), list(s.prev_port),
                      list(s.next_vessel), list(s.next_port))
            rebuild_pointers(s)
            after = (s.prev_vessel, s.prev_port, s.next_vessel, s.next_port)
            assert before == tuple(after)


def test_rebuild_empty(toy1):
    s = rebuild_pointers(Solution(toy1))
    assert s.prev_vessel == [] and s.next_port == []


def test_append_only_backpatches_next_pointers(toy_suite):
    rng = random.Random(11)
    inst = toy_suite[1]
    for _ in range(30):
        s = random_parity_walk(inst, rng, max_len=10)
        if not len(s):
            continue
        snapshot = (list(s.prev_vessel), list(s.prev_port),
                    list(s.next_vessel), list(s.next_port))
        vessel = rng.randrange(inst.n_vessels)
        port = rng.choice(inst.ports_of_kind(s.pending_kind(vessel)))
        s.append_call(Call(port, vessel))
        n = len(s) - 1
        for i in range(n):
            assert s.prev_vessel[i] == snapshot[0][i]
            assert s.prev_port[i] == snapshot[1][i]
            for arr, snap in ((s.next_vessel, snapshot[2]), (s.next_port, snapshot[3])):
                if arr[i] != snap[i]:
                    assert arr[i] == n and snap[i] is None


def test_commutation_disjoint_pair():
    inst = generate_toy(2, 2, 12)     # vessel 1 starts loaded at a consumer
    a = from_calls(inst, [(0, 0), (2, 1)])
    b = from_calls(inst, [(2, 1), (0, 0)])
    assert equivalent_under_commutation(a, b)
    assert equivalent_under_commutation(a, a)


def test_commutation_shared_resource_blocks():
    inst = generate_toy(3, 2, 12)     # both vessels start empty
    assert inst.vessels[1].initial_state == "empty"
    a = from_calls(inst, [(0, 0), (0, 1)])
    b = from_calls(inst, [(0, 1), (0, 0)])
    assert not equivalent_under_commutation(a, b)


def test_commutation_longer_chains():
    inst = generate_toy(3, 2, 12)
    a = from_calls(inst, [(0, 0), (0, 1), (1, 0), (2, 1)])
    b = from_calls(inst, [(0, 0), (0, 1), (2, 1), (1, 0)])   # disjoint swap
    c = from_calls(inst, [(0, 1), (0, 0), (1, 0), (2, 1)])   # same-port swap
    assert equivalent_under_commutation(a, b)
    assert not equivalent_under_commutation(a, c)
    assert not equivalent_under_commutation(a, from_calls(inst, [(0, 0), (1, 0)]))


def test_commutation_implies_equal_cost(toy_suite):
    rng = random.Random(3)
    for inst in toy_suite[:6]:
        for _ in range(30):
            s = random_parity_walk(inst, rng, max_len=10)
            calls = s.call_tuples()
            pairs = [i for i in range(len(calls) - 1)
                     if calls[i][0] != calls[i + 1][0]
                     and calls[i][1] != calls[i + 1][1]]
            if not pairs:
                continue
            i = rng.choice(pairs)
            swapped = calls[:i] + [calls[i + 1], calls[i]] + calls[i + 2:]
            other = from_calls(inst, swapped)
            assert equivalent_under_commutation(s, other)
            assert evaluate(s, inst).total_cost == evaluate(other, inst).total_cost


def test_dump_load_roundtrip(tmp_path, toy1):
    s = from_calls(toy1, [(0, 0), (1, 0)])
    evaluate(s, toy1)
    path = tmp_path / "sol.txt"
    dump_solution(s, path)
    loaded = load_solution(toy1, path)
    assert loaded.call_tuples() == s.call_tuples()
    # marker parsing
    path.write_text("0,0\n1,0 #truncated\n", encoding="utf-8")
    loaded = load_solution(toy1, path)
    assert loaded.call_tuples() == [(0, 0), (1, 0)]


def test_load_solution_rejects_garbage(tmp_path, toy1):
    path = tmp_path / "bad.txt"
    path.write_text("0;0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_solution(toy1, path)


def test_truncation_mask_reflects_eval(toy1):
    s = from_calls(toy1, [(0, 0), (1, 0), (0, 0), (1, 0), (0, 0)])
    assert s.truncation_mask is None
    ev = evaluate(s, toy1)
    assert s.truncation_mask == list(ev.truncated)
    assert s.truncation_mask[-1]


def test_from_calls_rejects_unresolved(toy1):
    with pytest.raises(ValueError):
        from_calls(toy1, [(5, 0)])
    with pytest.raises(ValueError):
        from_calls(toy1, [(0, 3)])
