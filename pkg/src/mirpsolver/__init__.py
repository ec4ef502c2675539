"""Beam-search + iterated-local-search heuristic for the deterministic
single-product maritime inventory routing problem, with an independent
arc-flow model checker and a brute-force oracle for verification."""

from .beam import BeamConfig, BeamNode, expand, run_beam_search
from .evaluator import (EvalResult, evaluate, evaluate_full,
                        evaluate_incremental, gap_percent)
from .greedy import (GreedyConfig, complete_deterministic, complete_randomized,
                     score_partial)
from .harness import RunConfig, RunRecord, report, run, run_on_instance, sweep
from .ils import IlsConfig, perturb, run_ils, run_ils_detailed
from .instance import (Instance, Port, Vessel, VesselClass, generate_toy,
                       load_instance, save_instance)
from .localsearch import Move, apply_move, rvnd
from .solution import (Call, Solution, dump_solution, equivalent_under_commutation,
                       from_calls, load_solution, rebuild_pointers)
from .validator import (ArcFlow, ValidatorReport, brute_force_optimum, check,
                        schedule_to_arcflow)

__version__ = "0.1.0"

__all__ = [
    "ArcFlow", "BeamConfig", "BeamNode", "Call", "EvalResult", "GreedyConfig",
    "IlsConfig", "Instance", "Move", "Port", "RunConfig", "RunRecord",
    "Solution", "ValidatorReport", "Vessel", "VesselClass", "apply_move",
    "brute_force_optimum", "check", "complete_deterministic",
    "complete_randomized", "dump_solution", "equivalent_under_commutation",
    "evaluate", "evaluate_full", "evaluate_incremental", "expand", "from_calls",
    "gap_percent", "generate_toy", "load_instance", "load_solution", "perturb",
    "rebuild_pointers", "report", "run", "run_beam_search", "run_ils",
    "run_ils_detailed", "run_on_instance", "rvnd", "save_instance",
    "schedule_to_arcflow", "score_partial", "sweep",
]
