import pytest

from mirpsolver import (BeamConfig, GreedyConfig, Solution,
                        complete_deterministic, evaluate, evaluate_full,
                        generate_toy, run_beam_search)
from mirpsolver.beam import BeamNode, SolutionPool, expand
from mirpsolver.greedy import score_partial

from conftest import SUITE_SPECS


def _root(inst, cfg):
    partial = Solution(inst)
    score, _best, _cost = score_partial(partial, inst, cfg.greedy, 0)
    return BeamNode(partial, score, 0)


def test_toy1_root_expansion_is_forced(toy1):
    cfg = BeamConfig(beam_width=10, max_children=4, greedy=GreedyConfig(q=1))
    children, completions = expand(_root(toy1, cfg), toy1, cfg)
    assert [c.partial.call_tuples() for c in children] == [[(0, 0)]]
    assert len(completions) == 1
    assert all(c.level == 1 for c in children)


def test_children_capped_at_w():
    inst = generate_toy(2, 2, 12)    # 2 vessels, 3 candidate calls at the root
    cfg = BeamConfig(beam_width=10, max_children=2, greedy=GreedyConfig(q=1))
    children, _ = expand(_root(inst, cfg), inst, cfg)
    assert len(children) == 2
    cfg_wide = BeamConfig(beam_width=10, max_children=9, greedy=GreedyConfig(q=1))
    children_wide, _ = expand(_root(inst, cfg_wide), inst, cfg_wide)
    assert len(children_wide) == 3
    assert [c.score for c in children] == sorted(c.score for c in children)


def test_saturated_node_has_no_children(toy1):
    done = complete_deterministic(Solution(toy1), toy1)
    cfg = BeamConfig(greedy=GreedyConfig(q=1))
    node = BeamNode(done, evaluate(done, toy1).total_cost, len(done))
    children, completions = expand(node, toy1, cfg)
    assert children == [] and completions == []


def test_degenerate_beam_equals_greedy(toy_suite):
    for spec, inst in zip(SUITE_SPECS, toy_suite):
        greedy_sol = complete_deterministic(Solution(inst), inst)
        greedy_cost = evaluate_full(greedy_sol, inst).total_cost
        out = run_beam_search(
            inst, BeamConfig(beam_width=1, max_children=1,
                             greedy=GreedyConfig(q=1), seed=spec[0]))
        assert out.best_cost == greedy_cost
        assert out.best.call_tuples() == greedy_sol.call_tuples()


def test_beam_never_worse_than_greedy(toy_suite):
    for inst in toy_suite[:8]:
        greedy_cost = evaluate_full(
            complete_deterministic(Solution(inst), inst), inst).total_cost
        out = run_beam_search(
            inst, BeamConfig(beam_width=10, max_children=2,
                             greedy=GreedyConfig(q=3), seed=1))
        assert out.best_cost <= greedy_cost
        pool_costs = [evaluate(s, inst).total_cost for s in out.pool]
        assert all(out.best_cost <= c for c in pool_costs)
        assert pool_costs == sorted(pool_costs)


def test_level_sizes_and_distinct_scores(toy_suite):
    for inst in toy_suite[:6]:
        cfg = BeamConfig(beam_width=3, max_children=2,
                         greedy=GreedyConfig(q=3), seed=2)
        out = run_beam_search(inst, cfg)
        per_level = {}
        for level, node, score, _pool in out.node_rows:
            per_level.setdefault(level, []).append(score)
        for level, scores in per_level.items():
            assert len(scores) <= cfg.beam_width
            assert len(set(scores)) == len(scores)


def test_beam_determinism(toy_suite):
    inst = toy_suite[3]
    cfg = BeamConfig(beam_width=10, max_children=2, greedy=GreedyConfig(q=3), seed=9)
    a = run_beam_search(inst, cfg)
    b = run_beam_search(inst, cfg)
    assert a.best_cost == b.best_cost
    assert a.best.call_tuples() == b.best.call_tuples()
    assert [s.call_tuples() for s in a.pool] == [s.call_tuples() for s in b.pool]
    assert a.node_rows == b.node_rows


def test_pool_dedups_and_caps():
    pool = SolutionPool(3)
    pool.offer("a", 500)
    pool.offer("b", 500)           # duplicate cost dropped
    pool.offer("c", 300)
    pool.offer("d", 400)
    pool.offer("e", 600)           # over capacity, worst
    assert [c for c, _s in pool.entries] == [300, 400, 500]
    pool.offer("f", 100)
    assert [c for c, _s in pool.entries] == [100, 300, 400]
    assert pool.best[0] == 100


def test_beam_stats_recorded(toy1):
    out = run_beam_search(toy1, BeamConfig(beam_width=5, max_children=2,
                                           greedy=GreedyConfig(q=3), seed=1))
    assert out.completed
    assert out.stats
    for st in out.stats:
        assert st.completions >= st.expansions
    assert out.stats[-1].pool_best == out.best_cost


def test_config_validation():
    with pytest.raises(ValueError):
        BeamConfig(beam_width=0).validate()
    with pytest.raises(ValueError):
        BeamConfig(max_children=0).validate()
