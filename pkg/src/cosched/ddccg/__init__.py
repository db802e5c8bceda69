from cosched.ddccg.brute import OracleResult, brute_force_oracle, first_stage_cost, first_stage_feasible
from cosched.ddccg.cuts import CutEntry, CutKind, CutPool, add_cuts
from cosched.ddccg.driver import CoSchedule, DdccgOptions, DdccgTrace, IterationRecord, run, tighten_wx
from cosched.ddccg.master import build_master
from cosched.ddccg.oracle import SPResult, solve_sp_oracle
from cosched.ddccg.recourse import WxValues
from cosched.ddccg.split import ProblemSplit, corner_scenarios, split_problem

__all__ = [
    "CoSchedule",
    "CutEntry",
    "CutKind",
    "CutPool",
    "DdccgOptions",
    "DdccgTrace",
    "IterationRecord",
    "OracleResult",
    "ProblemSplit",
    "SPResult",
    "WxValues",
    "add_cuts",
    "brute_force_oracle",
    "build_master",
    "corner_scenarios",
    "first_stage_cost",
    "first_stage_feasible",
    "run",
    "solve_sp_oracle",
    "split_problem",
    "tighten_wx",
]
