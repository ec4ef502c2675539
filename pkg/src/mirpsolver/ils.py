"""Iterated local search over the beam-search incumbent.

Each iteration perturbs the current solution with random neighborhood
moves, descends with RVND, and accepts the candidate through a
simulated-annealing rule: a deterioration of ``delta_ref_frac`` times
the best cost is accepted with probability ``p(iter)``, which
interpolates linearly from the initial to the final probability across
the configured iterations.  That fixes the temperature schedule
``T(iter) = -delta_ref / ln(p(iter))``.  When the best solution has not
improved for more than ``non_improving_limit`` iterations, the current
solution is restored to the best and the counter resets.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass

from ._util import derive_seed
from .evaluator import evaluate
from .instance import Instance
from .localsearch import NEIGHBORHOODS, enumerate_moves, rvnd, try_apply
from .solution import Solution

log = logging.getLogger(__name__)


@dataclass
class IlsConfig:
    iterations: int = 640
    non_improving_limit: int = 4
    perturbations: int = 2
    sa_p_initial: float = 0.79
    sa_p_final: float = 0.01
    delta_ref_frac: float = 0.01
    seed: int = 0

    def validate(self) -> "IlsConfig":
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < self.sa_p_final <= self.sa_p_initial < 1.0):
            raise ValueError("need 0 < sa_p_final <= sa_p_initial < 1")
        if self.non_improving_limit < 1:
            raise ValueError("non_improving_limit must be >= 1")
        if self.perturbations < 0:
            raise ValueError("perturbations must be >= 0")
        return self


@dataclass
class IlsIterationRow:
    iteration: int
    current_cost: int
    best_cost: int
    accepted: bool
    temperature: float


@dataclass
class IlsOutcome:
    best: Solution
    best_cost: int
    completed: bool
    rows: list[IlsIterationRow]


def perturb(s: Solution, inst: Instance, cfg: IlsConfig, rng: random.Random) -> Solution:
    """Apply ``cfg.perturbations`` random moves: pick a neighborhood
    uniformly, then a uniformly random applicable move in it, skipping to
    another neighborhood when none applies.  A solution with no
    applicable move anywhere is returned unchanged."""
    cur = s
    for _ in range(cfg.perturbations):
        applied = False
        for kind in rng.sample(NEIGHBORHOODS, len(NEIGHBORHOODS)):
            moves = enumerate_moves(cur, kind, inst, filtered=False)
            rng.shuffle(moves)
            for m in moves:
                nxt = try_apply(cur, m, inst)
                if nxt is not None:
                    cur = nxt
                    applied = True
                    break
            if applied:
                break
        if not applied:
            log.debug("perturbation degenerate: no applicable move in any neighborhood")
            break
    return cur


def _acceptance_probability(iteration: int, cfg: IlsConfig) -> float:
    if cfg.iterations == 1:
        return cfg.sa_p_initial
    frac = (iteration - 1) / (cfg.iterations - 1)
    return cfg.sa_p_initial + (cfg.sa_p_final - cfg.sa_p_initial) * frac


def temperature(iteration: int, best_cost: int, cfg: IlsConfig) -> float:
    """Temperature making the reference deterioration acceptable with
    exactly p(iteration); nonpositive when no uphill move is acceptable."""
    delta_ref = cfg.delta_ref_frac * best_cost
    if delta_ref <= 0:
        return 0.0
    return -delta_ref / math.log(_acceptance_probability(iteration, cfg))


def run_ils_detailed(incumbent: Solution, inst: Instance, cfg: IlsConfig,
                     deadline=None) -> IlsOutcome:
    cfg.validate()
    rng = random.Random(cfg.seed)
    best = incumbent
    best_cost = evaluate(best, inst).total_cost
    cur, cur_cost = best, best_cost
    counter = 0
    rows: list[IlsIterationRow] = []
    completed = True
    for it in range(1, cfg.iterations + 1):
        if deadline is not None and deadline.exceeded():
            completed = False
            break
        cand = perturb(cur, inst, cfg, rng)
        cand = rvnd(cand, inst, derive_seed(cfg.seed, "rvnd", it))
        cand_cost = evaluate(cand, inst).total_cost
        delta = cand_cost - cur_cost
        temp = temperature(it, best_cost, cfg)
        if delta <= 0:
            accepted = True
        elif temp > 0:
            accepted = rng.random() < math.exp(-delta / temp)
        else:
            accepted = False
        if accepted:
            cur, cur_cost = cand, cand_cost
        if cur_cost < best_cost:
            best, best_cost = cur, cur_cost
            counter = 0
        else:
            counter += 1
            if counter > cfg.non_improving_limit:
                cur, cur_cost = best, best_cost
                counter = 0
        rows.append(IlsIterationRow(it, cur_cost, best_cost, accepted, temp))
    return IlsOutcome(best=best, best_cost=best_cost, completed=completed, rows=rows)


def run_ils(incumbent: Solution, inst: Instance, cfg: IlsConfig) -> Solution:
    """Best solution found; cost never exceeds the incumbent's."""
    return run_ils_detailed(incumbent, inst, cfg).best
