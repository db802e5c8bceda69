"""
LP dualization by the textbook sign rules.

General variable bounds are turned into rows first, so every primal variable
is nonnegative, nonpositive or free. Dual variables are named after the row
they price; dual rows are named after the primal variable.
"""
from __future__ import annotations

import math
from typing import Dict, List, Tuple

from cosched.errors import ModelError
from cosched.optkernel.model import LinearExpr, OptModel, Relation, Sense, VarKind

INF = math.inf

_Row = Tuple[Dict[str, float], Relation, float, str]


def _primal_rows(model: OptModel) -> Tuple[List[_Row], Dict[str, str]]:
    rows: List[_Row] = [(dict(c.terms), c.relation, c.rhs, c.name) for c in model.constraints]
    signs: Dict[str, str] = {}
    for var in model.variables.values():
        lo, hi = var.lb, var.ub
        if lo == 0.0:
            signs[var.name] = "nonneg"
            if hi < INF:
                rows.append(({var.name: 1.0}, Relation.LE, hi, f"ub[{var.name}]"))
        elif hi == 0.0 and lo == -INF:
            signs[var.name] = "nonpos"
        else:
            signs[var.name] = "free"
            if lo > -INF:
                rows.append(({var.name: 1.0}, Relation.GE, lo, f"lb[{var.name}]"))
            if hi < INF:
                rows.append(({var.name: 1.0}, Relation.LE, hi, f"ub[{var.name}]"))
    return rows, signs


def dualize_lp(model: OptModel, prefix: str = "y") -> OptModel:
    """Return the LP dual of a continuous model; dualizing twice gives back the primal."""
    if model.is_mip:
        raise ModelError("only continuous models can be dualized")
    rows, signs = _primal_rows(model)
    minimize = model.sense is Sense.MIN
    dual = OptModel(f"dual[{model.name}]")

    duals: List[LinearExpr] = []
    for _, relation, _, name in rows:
        nonneg = relation is (Relation.GE if minimize else Relation.LE)
        if relation is Relation.EQ:
            duals.append(dual.add_var(f"{prefix}[{name}]", VarKind.FREE))
        elif nonneg:
            duals.append(dual.add_var(f"{prefix}[{name}]", VarKind.CONTINUOUS, 0.0, INF))
        else:
            duals.append(dual.add_var(f"{prefix}[{name}]", VarKind.CONTINUOUS, -INF, 0.0))

    objective = LinearExpr.const(model.objective.constant)
    for y, (_, _, rhs, _) in zip(duals, rows):
        objective = objective + y * rhs
    dual.set_objective(objective, Sense.MAX if minimize else Sense.MIN)

    for name, sign in signs.items():
        lhs = LinearExpr.total(y * terms[name] for y, (terms, _, _, _) in zip(duals, rows) if name in terms)
        cost = model.objective.terms.get(name, 0.0)
        if sign == "free":
            dual.add_constraint(lhs.eq(cost, name=f"dual[{name}]"))
        elif (sign == "nonneg") == minimize:
            dual.add_constraint(lhs.le(cost, name=f"dual[{name}]"))
        else:
            dual.add_constraint(lhs.ge(cost, name=f"dual[{name}]"))
    return dual
