"""Beam search constructive phase.

Level-wise expansion from the empty solution: every beam node generates
up to ``max_children`` children, taking appendable calls in the
construction heuristic's preference order (so one child per node follows
the pure greedy trajectory and the search degenerates to plain greedy
when branching is disabled).  Each child is scored by the median of q
greedy completions, duplicate score keys are dropped level-wide (first
creation survives), and the best ``beam_width`` children form the next
level.  Throughout, the best completed solutions produced by the greedy
completions are kept in a fixed-size pool; the best pool entry is the
phase result.

Node expansions within a level are independent: every expansion derives
its seed from (config seed, level, parent index, child index), so a
parallel implementation would produce the identical beam.  Search stops
at the first level with no successors, or when the deadline fires
between levels (reported as incomplete).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._util import derive_seed
from .evaluator import evaluate
from .greedy import GreedyConfig, preference_ordered_candidates, score_partial
from .instance import Instance
from .solution import Call, Solution


@dataclass
class BeamConfig:
    beam_width: int = 10       # N: nodes kept per level
    max_children: int = 2      # w: children generated per node
    greedy: GreedyConfig = field(default_factory=GreedyConfig)
    seed: int = 0

    def validate(self) -> "BeamConfig":
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_children < 1:
            raise ValueError("max_children must be >= 1")
        self.greedy.validate()
        return self


@dataclass
class BeamNode:
    partial: Solution
    score: int      # cents, median of q completion costs
    level: int


class SolutionPool:
    """Fixed-size pool of the best completed solutions, deduplicated by
    exact cost so equal-cost rediscoveries do not crowd out variety."""

    def __init__(self, size: int):
        self.size = size
        self.entries: list[tuple[int, Solution]] = []
        self._costs: set[int] = set()

    def offer(self, sol: Solution, cost: int) -> None:
        if cost in self._costs:
            return
        if len(self.entries) >= self.size and cost >= self.entries[-1][0]:
            return
        self._costs.add(cost)
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid][0] < cost:
                lo = mid + 1
            else:
                hi = mid
        self.entries.insert(lo, (cost, sol))
        if len(self.entries) > self.size:
            dropped_cost, _ = self.entries.pop()
            self._costs.discard(dropped_cost)

    @property
    def best(self) -> tuple[int, Solution] | None:
        return self.entries[0] if self.entries else None

    def solutions(self) -> list[Solution]:
        return [s for _c, s in self.entries]


@dataclass
class LevelStats:
    level: int
    nodes: int
    expansions: int          # children scored at this level
    completions: int         # greedy completions run at this level
    pool_best: int | None    # cents


@dataclass
class BeamOutcome:
    best: Solution
    best_cost: int
    pool: list[Solution]
    completed: bool
    stats: list[LevelStats]
    node_rows: list[tuple[int, int, int, int | None]]  # level, node, score, pool_best


def expand(node: BeamNode, inst: Instance, cfg: BeamConfig, parent_index: int = 0,
           ) -> tuple[list[BeamNode], list[tuple[Solution, int]]]:
    """Generate and score up to ``max_children`` children of a node, taking
    appendable calls in construction-preference order; returns the children
    sorted by score plus the completed solutions seen while scoring.  A
    saturated node yields an empty child list."""
    children: list[BeamNode] = []
    completions: list[tuple[Solution, int]] = []
    level = node.level + 1
    cands = preference_ordered_candidates(node.partial, inst)[:cfg.max_children]
    for child_index, (p, v, _arr, _bs, _be) in enumerate(cands):
        child = node.partial.copy()
        child.append_call(Call(p, v))
        seed = derive_seed(cfg.seed, level, parent_index, child_index)
        score, best_sol, best_cost = score_partial(child, inst, cfg.greedy, seed)
        children.append(BeamNode(child, score, level))
        completions.append((best_sol, best_cost))
    children.sort(key=lambda n: n.score)    # stable: creation order breaks ties
    return children, completions


def run_beam_search(inst: Instance, cfg: BeamConfig, deadline=None) -> BeamOutcome:
    """Full beam search; returns the best completed solution and the pool.

    The empty root is scored too, so the pool always contains the plain
    deterministic greedy solution and the result can never be worse.
    """
    cfg.validate()
    pool = SolutionPool(cfg.beam_width)
    root = Solution(inst)
    root_score, root_best, root_cost = score_partial(
        root, inst, cfg.greedy, derive_seed(cfg.seed, 0, 0, 0))
    pool.offer(root_best, root_cost)
    beam = [BeamNode(root, root_score, 0)]
    stats: list[LevelStats] = []
    node_rows: list[tuple[int, int, int, int | None]] = []
    completed = True
    level = 0
    while beam:
        if deadline is not None and deadline.exceeded():
            completed = False
            break
        level += 1
        all_children: list[BeamNode] = []
        expansions = 0
        completions_run = 0
        for parent_index, node in enumerate(beam):
            kids, comps = expand(node, inst, cfg, parent_index)
            for sol, cost in comps:
                pool.offer(sol, cost)
            all_children.extend(kids)
            expansions += len(kids)
            completions_run += len(comps) * cfg.greedy.q
        seen: set[int] = set()
        survivors = []
        for child in all_children:
            if child.score in seen:
                continue
            seen.add(child.score)
            survivors.append(child)
        survivors.sort(key=lambda n: n.score)   # stable on creation order
        beam = survivors[:cfg.beam_width]
        best_entry = pool.best
        pool_best = best_entry[0] if best_entry else None
        stats.append(LevelStats(level, len(beam), expansions, completions_run, pool_best))
        for node_index, node in enumerate(beam):
            node_rows.append((level, node_index, node.score, pool_best))

    best_cost, best = pool.best   # pool is never empty: the root was scored
    evaluate(best, inst)
    return BeamOutcome(best=best, best_cost=best_cost, pool=pool.solutions(),
                       completed=completed, stats=stats, node_rows=node_rows)
