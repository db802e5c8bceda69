"""Plain-text export of an OptModel in CPLEX LP format."""
from __future__ import annotations

import math
from typing import Iterable, List, Tuple

from cosched.optkernel.model import OptModel, Relation, Sense, VarKind

_RELATION = {Relation.LE: "<=", Relation.GE: ">=", Relation.EQ: "="}


def lp_name(name: str) -> str:
    """Map internal names to LP-legal identifiers (brackets are not allowed)."""
    return name.replace("[", "(").replace("]", ")").replace(" ", "_")


def _number(value: float) -> str:
    return f"{value:.17g}"


def _terms(terms: Iterable[Tuple[str, float]]) -> str:
    parts: List[str] = []
    for name, coef in terms:
        if coef == 0.0:
            continue
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_number(abs(coef))} {lp_name(name)}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(model: OptModel) -> str:
    lines = [f"\\ Problem: {model.name}"]
    if model.objective.constant:
        lines.append(f"\\ Objective constant: {_number(model.objective.constant)}")
    lines.append("Minimize" if model.sense is Sense.MIN else "Maximize")
    lines.append(f" obj: {_terms(model.objective.terms.items())}")
    lines.append("Subject To")
    for row in model.constraints:
        lines.append(f" {lp_name(row.name)}: {_terms(row.terms)} {_RELATION[row.relation]} {_number(row.rhs)}")

    lines.append("Bounds")
    for var in model.variables.values():
        if var.kind is VarKind.BINARY:
            continue
        if var.lb == -math.inf and var.ub == math.inf:
            lines.append(f" {lp_name(var.name)} free")
        elif var.ub == math.inf:
            if var.lb != 0.0:
                lower = "-inf" if var.lb == -math.inf else _number(var.lb)
                lines.append(f" {lp_name(var.name)} >= {lower}")
        else:
            lower = "-inf" if var.lb == -math.inf else _number(var.lb)
            lines.append(f" {lower} <= {lp_name(var.name)} <= {_number(var.ub)}")

    binaries = model.binaries
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {lp_name(name)}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"
