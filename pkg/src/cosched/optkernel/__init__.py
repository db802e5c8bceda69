from cosched.optkernel.branch_bound import BranchAndBoundOptions, solve_by_enumeration, solve_milp
from cosched.optkernel.duality import dualize_lp
from cosched.optkernel.lpformat import write_lp
from cosched.optkernel.model import (
    DEFAULT_TOLERANCES,
    ConstraintBlock,
    Constraint,
    LinearExpr,
    OptModel,
    OptSolution,
    Relation,
    Sense,
    Status,
    Tolerances,
    Variable,
    VarKind,
    add_block,
)
from cosched.optkernel.simplex import SimplexOptions, solve_lp
from cosched.optkernel.vertices import Polytope, enumerate_extreme_points


def solve(model: OptModel, options: BranchAndBoundOptions = BranchAndBoundOptions()) -> OptSolution:
    """Dispatch to the LP or MILP solver depending on the model's variables."""
    if model.is_mip:
        return solve_milp(model, options)
    return solve_lp(model, options.simplex)


__all__ = [
    "BranchAndBoundOptions",
    "Constraint",
    "ConstraintBlock",
    "DEFAULT_TOLERANCES",
    "LinearExpr",
    "OptModel",
    "OptSolution",
    "Polytope",
    "Relation",
    "Sense",
    "SimplexOptions",
    "Status",
    "Tolerances",
    "VarKind",
    "Variable",
    "add_block",
    "dualize_lp",
    "enumerate_extreme_points",
    "solve",
    "solve_by_enumeration",
    "solve_lp",
    "solve_milp",
    "write_lp",
]
