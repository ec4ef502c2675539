"""Acceptance suite: every criterion at its pinned tolerance, one printed
pass line per criterion.  Run with ``pytest tests/test_acceptance.py -v``.

Pinned configuration for the pipeline criteria: beam width 100, two
children per node, three greedy completions per score, and the tuned
ILS defaults (640 iterations, restore after 4 non-improving iterations,
2 perturbations, acceptance probabilities 0.79 -> 0.01).
"""

import csv
import random
import time
from dataclasses import replace
from statistics import mean

import pytest

from mirpsolver import (BeamConfig, GreedyConfig, IlsConfig, RunConfig,
                        Solution, complete_deterministic, complete_randomized,
                        evaluate, evaluate_full, evaluate_incremental,
                        from_calls, gap_percent, perturb, report,
                        run_on_instance, rvnd)
from mirpsolver.localsearch import NEIGHBORHOODS, enumerate_moves, try_apply
from mirpsolver.validator import check

from conftest import SUITE_SPECS, random_feasible_walk, random_parity_walk

SANDWICH_SEEDS = [1, 2, 3]

_T0 = time.monotonic()


def _pinned_config(seeds) -> RunConfig:
    return RunConfig(
        beam=BeamConfig(beam_width=100, max_children=2,
                        greedy=GreedyConfig(q=3, sigma_frac=0.25)),
        ils=IlsConfig(iterations=640, non_improving_limit=4, perturbations=2,
                      sa_p_initial=0.79, sa_p_final=0.01),
        stage="ils",
        seeds=list(seeds),
        time_limit_seconds=None,
    )


@pytest.fixture(scope="session")
def pipeline_records(toy1, toy_suite):
    cfg = _pinned_config(SANDWICH_SEEDS)
    return {inst.name: run_on_instance(inst, cfg) for inst in [toy1] + toy_suite}


def test_oracle_sandwich(toy1, toy_suite, oracle, pipeline_records):
    for inst in [toy1] + toy_suite:
        optimum = oracle[inst.name]
        record = pipeline_records[inst.name]
        for outcome in record.outcomes:
            for stage, result in outcome.stages.items():
                assert optimum <= result.cost, \
                    f"{inst.name} seed {outcome.seed} stage {stage} beat the oracle"
    print("ACCEPTANCE oracle-sandwich: PASS "
          f"({len(toy_suite) + 1} instances x {len(SANDWICH_SEEDS)} seeds x 3 stages)")


def test_pipeline_within_one_percent(toy_suite, oracle, pipeline_records):
    within = 0
    worst = 0.0
    for inst in toy_suite:
        optimum = oracle[inst.name]
        best = min(o.final_cost for o in pipeline_records[inst.name].outcomes)
        rel = 100.0 * (best - optimum) / optimum
        worst = max(worst, rel)
        if best <= optimum * 1.01:
            within += 1
    assert within >= 18, f"only {within}/20 instances within 1% of the oracle"
    print(f"ACCEPTANCE pipeline-within-1%: PASS ({within}/20, worst {worst:.2f}%)")


def test_evaluator_validator_agreement(toy_suite):
    rng = random.Random(977)
    count = 0
    cfg = IlsConfig(perturbations=2)
    while count < 10_000:
        inst = toy_suite[count % len(toy_suite)]
        kind = count % 3
        if kind == 0:
            sol = random_parity_walk(inst, rng, max_len=10)
        elif kind == 1:
            sol = random_feasible_walk(inst, rng, max_len=10)
        else:
            sol = perturb(complete_deterministic(Solution(inst), inst),
                          inst, cfg, rng)
        rep = check(sol, inst)
        assert rep.residuals_clean, f"residuals on {inst.name}: {sol.call_tuples()}"
        assert rep.matches_evaluator and rep.abs_difference <= 1, \
            f"objective mismatch on {inst.name}: {rep.abs_difference} cents"
        count += 1
    print("ACCEPTANCE evaluator-validator-agreement: PASS (10000 solutions, "
          "zero residuals, objective within 0.01)")


def test_incremental_equivalence(toy_suite):
    rng = random.Random(1009)
    count = 0
    attempt = 0
    while count < 10_000:
        attempt += 1
        inst = toy_suite[attempt % len(toy_suite)]
        sol = random_feasible_walk(inst, rng, max_len=10)
        evaluate(sol, inst)
        kind = NEIGHBORHOODS[rng.randrange(len(NEIGHBORHOODS))]
        moves = enumerate_moves(sol, kind, inst, filtered=False)
        if not moves:
            continue
        mutated = try_apply(sol, moves[rng.randrange(len(moves))], inst)
        if mutated is None:
            continue
        inc = evaluate_incremental(mutated, inst, mutated.valid_prefix)
        full = evaluate_full(mutated, inst)
        assert (inc.total_cost, inc.routing_cost, inc.penalty_cost,
                inc.reward_credit) == (full.total_cost, full.routing_cost,
                                       full.penalty_cost, full.reward_credit)
        assert inc.arrival == full.arrival
        assert inc.berth_start == full.berth_start
        assert inc.berth_end == full.berth_end
        assert inc.truncated == full.truncated
        assert inc.inventory == full.inventory
        assert inc.spot == full.spot
        count += 1
    print("ACCEPTANCE incremental-equivalence: PASS (10000 mutations, "
          "bit-identical results)")


def test_degeneracy_identities(toy_suite):
    from mirpsolver import run_beam_search
    for spec, inst in zip(SUITE_SPECS, toy_suite):
        greedy_sol = complete_deterministic(Solution(inst), inst)
        greedy_cost = evaluate_full(greedy_sol, inst).total_cost
        out = run_beam_search(inst, BeamConfig(
            beam_width=1, max_children=1, greedy=GreedyConfig(q=1), seed=spec[0]))
        assert out.best_cost == greedy_cost
        assert out.best.call_tuples() == greedy_sol.call_tuples()

    cfg = GreedyConfig(q=3, sigma_frac=0.0, randomize_port=True,
                       randomize_vessel=True)
    rng = random.Random(83)
    for inst in toy_suite:
        partial = random_feasible_walk(inst, rng, max_len=4)
        det = complete_deterministic(partial, inst)
        for seed in (1, 99):
            assert complete_randomized(partial, inst, cfg, seed).call_tuples() \
                == det.call_tuples()

    for inst in toy_suite[:5]:
        s = complete_deterministic(Solution(inst), inst)
        out = perturb(s, inst, IlsConfig(perturbations=0), random.Random(1))
        assert out is s
    print("ACCEPTANCE degeneracy-identities: PASS (beam(1,1,1)==greedy, "
          "zero-noise==deterministic, zero perturbations==identity)")


def test_stage_monotonicity(toy1, toy_suite, pipeline_records):
    for inst in [toy1] + toy_suite:
        for outcome in pipeline_records[inst.name].outcomes:
            assert outcome.stages["ils"].cost <= outcome.stages["ls"].cost \
                <= outcome.stages["bs"].cost
    rng = random.Random(107)
    for inst in toy_suite:
        for seed in (1, 2):
            s = random_feasible_walk(inst, rng, max_len=10)
            before = evaluate(s, inst).total_cost
            after = evaluate(rvnd(s, inst, seed), inst).total_cost
            assert after <= before
    print("ACCEPTANCE stage-monotonicity: PASS (ILS <= LS <= BS on every "
          "run; descent never increases cost)")


def test_commutation_invariance(toy_suite):
    rng = random.Random(109)
    # adjacent disjoint pairs need two vessels; single-vessel chains share
    # the vessel between every adjacent pair
    pool = [inst for inst in toy_suite if inst.n_vessels >= 2]
    done = 0
    attempt = 0
    while done < 1000:
        attempt += 1
        inst = pool[attempt % len(pool)]
        sol = random_parity_walk(inst, rng, max_len=12)
        calls = sol.call_tuples()
        pairs = [i for i in range(len(calls) - 1)
                 if calls[i][0] != calls[i + 1][0] and calls[i][1] != calls[i + 1][1]]
        if not pairs:
            continue
        i = rng.choice(pairs)
        swapped = calls[:i] + [calls[i + 1], calls[i]] + calls[i + 2:]
        a = evaluate_full(sol, inst)
        b = evaluate_full(from_calls(inst, swapped), inst)
        assert (a.total_cost, a.routing_cost, a.penalty_cost, a.reward_credit) \
            == (b.total_cost, b.routing_cost, b.penalty_cost, b.reward_credit)
        done += 1
    print("ACCEPTANCE commutation-invariance: PASS (1000 adjacent "
          "commutations, totals exactly unchanged)")


def test_gap_arithmetic_reproduction():
    assert gap_percent(40340.01, 40446.00) == -0.26
    assert gap_percent(33808.95, 33809.00) == 0.00
    assert f"{gap_percent(40340.01, 40446.00):.2f}" == "-0.26"
    assert f"{gap_percent(33808.95, 33809.00):.2f}" == "0.00"
    print("ACCEPTANCE gap-arithmetic: PASS (reference rows reproduce to "
          "two decimals)")


def _strip_time_columns(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    keep = [i for i, name in enumerate(header)
            if "Time" not in name and "Seconds" not in name]
    return [[row[i] for i in keep] for row in rows]


def test_determinism_serial_vs_parallel(tmp_path_factory, toy_suite):
    inst = toy_suite[2]
    cfg = replace(_pinned_config([1, 2, 3, 4]),
                  beam=BeamConfig(beam_width=10, max_children=2,
                                  greedy=GreedyConfig(q=3)),
                  ils=IlsConfig(iterations=60))
    serial = run_on_instance(inst, replace(cfg, workers=1))
    parallel = run_on_instance(inst, replace(cfg, workers=4))
    for a, b in zip(serial.outcomes, parallel.outcomes):
        assert a.seed == b.seed
        assert a.best_solution.call_tuples() == b.best_solution.call_tuples()
        assert {k: v.cost for k, v in a.stages.items()} \
            == {k: v.cost for k, v in b.stages.items()}
    dir_a = tmp_path_factory.mktemp("serial")
    dir_b = tmp_path_factory.mktemp("parallel")
    report([serial], dir_a, figures=False)
    report([parallel], dir_b, figures=False)
    for name in ("results.csv", "stages.csv", "plotdata.csv"):
        assert _strip_time_columns(dir_a / name) == _strip_time_columns(dir_b / name)
    print("ACCEPTANCE determinism: PASS (serial == parallel: best solutions "
          "and report CSVs, wall-time columns aside)")


def test_beam_value_over_pure_greedy(toy_suite):
    seeds = list(range(1, 11))
    beam_cfg = RunConfig(
        beam=BeamConfig(beam_width=10, max_children=2, greedy=GreedyConfig(q=3)),
        ils=IlsConfig(iterations=64), stage="ils", seeds=seeds,
        time_limit_seconds=None)
    greedy_cfg = replace(
        beam_cfg, beam=BeamConfig(beam_width=1, max_children=1,
                                  greedy=GreedyConfig(q=1)))
    stage_costs = {"bs": [], "ls": [], "ils": []}
    greedy_costs = {"bs": [], "ls": [], "ils": []}
    for inst in toy_suite:
        rec_beam = run_on_instance(inst, beam_cfg)
        rec_greedy = run_on_instance(inst, greedy_cfg)
        for o in rec_beam.outcomes:
            for st in stage_costs:
                stage_costs[st].append(o.stages[st].cost)
        for o in rec_greedy.outcomes:
            for st in greedy_costs:
                greedy_costs[st].append(o.stages[st].cost)
    improvements = {}
    for st in ("bs", "ls", "ils"):
        beam_mean = mean(stage_costs[st])
        greedy_mean = mean(greedy_costs[st])
        assert beam_mean <= greedy_mean, \
            f"stage {st}: beam mean {beam_mean} above greedy mean {greedy_mean}"
        improvements[st] = 100.0 * (beam_mean - greedy_mean) / greedy_mean
    print("ACCEPTANCE beam-value: PASS (mean improvement over pure greedy: "
          f"after BS {improvements['bs']:+.2f}%, after LS "
          f"{improvements['ls']:+.2f}%, after ILS {improvements['ils']:+.2f}%)")


def test_suite_runtime_budget():
    elapsed = time.monotonic() - _T0
    assert elapsed < 600.0, f"acceptance suite took {elapsed:.0f}s"
    print(f"ACCEPTANCE runtime: PASS ({elapsed:.0f}s < 600s)")
