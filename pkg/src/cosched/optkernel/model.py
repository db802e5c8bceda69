"""
Model container of the optimization kernel.

An OptModel is a list of named variables, linear constraints and a linear
objective. Expressions are built with LinearExpr, which supports the usual
arithmetic with numbers and other expressions, and turned into rows with
``le``/``ge``/``eq``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from cosched.errors import ModelError

INF = math.inf


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    FREE = "free"


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Tolerances:
    """Documented kernel tolerances; pass a modified copy to tighten or relax them."""

    feasibility: float = 1e-7
    optimality: float = 1e-7
    integrality: float = 1e-6


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind = VarKind.CONTINUOUS
    lb: float = 0.0
    ub: float = INF


Number = Union[int, float]


class LinearExpr:
    """Sparse linear expression: a mapping of variable names to coefficients plus a constant."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Optional[Mapping[str, float]] = None, constant: float = 0.0):
        self.terms: Dict[str, float] = {name: float(coef) for name, coef in terms.items()} if terms else {}
        self.constant = float(constant)

    @classmethod
    def var(cls, name: str, coef: float = 1.0) -> "LinearExpr":
        return cls({name: coef})

    @classmethod
    def const(cls, value: float) -> "LinearExpr":
        return cls(None, value)

    @classmethod
    def total(cls, items: Iterable["ExprLike"]) -> "LinearExpr":
        result = cls()
        for item in items:
            result._accumulate(item, 1.0)
        return result

    def copy(self) -> "LinearExpr":
        return LinearExpr(self.terms, self.constant)

    def add_term(self, name: str, coef: float) -> "LinearExpr":
        """Add ``coef * name`` in place and return self."""
        self.terms[name] = self.terms.get(name, 0.0) + float(coef)
        return self

    def _accumulate(self, other: "ExprLike", scale: float) -> None:
        if isinstance(other, LinearExpr):
            for name, coef in other.terms.items():
                self.terms[name] = self.terms.get(name, 0.0) + scale * coef
            self.constant += scale * other.constant
        else:
            self.constant += scale * float(other)

    def __add__(self, other: "ExprLike") -> "LinearExpr":
        result = self.copy()
        result._accumulate(other, 1.0)
        return result

    __radd__ = __add__

    def __sub__(self, other: "ExprLike") -> "LinearExpr":
        result = self.copy()
        result._accumulate(other, -1.0)
        return result

    def __rsub__(self, other: "ExprLike") -> "LinearExpr":
        return (-self) + other

    def __neg__(self) -> "LinearExpr":
        return self * -1.0

    def __mul__(self, scale: Number) -> "LinearExpr":
        if isinstance(scale, LinearExpr):
            raise ModelError("products of expressions are not linear")
        k = float(scale)
        return LinearExpr({name: k * coef for name, coef in self.terms.items()}, k * self.constant)

    __rmul__ = __mul__

    def value(self, values: Mapping[str, float]) -> float:
        return self.constant + sum(coef * values[name] for name, coef in self.terms.items())

    @property
    def is_constant(self) -> bool:
        return all(coef == 0.0 for coef in self.terms.values())

    def _row(self, other: "ExprLike", relation: Relation, name: Optional[str]) -> "Constraint":
        diff = self - other
        terms = tuple((n, c) for n, c in diff.terms.items() if c != 0.0)
        return Constraint(terms, relation, -diff.constant, name)

    def le(self, other: "ExprLike" = 0.0, name: Optional[str] = None) -> "Constraint":
        return self._row(other, Relation.LE, name)

    def ge(self, other: "ExprLike" = 0.0, name: Optional[str] = None) -> "Constraint":
        return self._row(other, Relation.GE, name)

    def eq(self, other: "ExprLike" = 0.0, name: Optional[str] = None) -> "Constraint":
        return self._row(other, Relation.EQ, name)

    def __repr__(self) -> str:
        parts = [f"{coef:+g}*{name}" for name, coef in self.terms.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return " ".join(parts)


ExprLike = Union[LinearExpr, Number]


@dataclass(frozen=True)
class Constraint:
    """One linear row ``sum(coef * var) relation rhs``."""

    terms: Tuple[Tuple[str, float], ...]
    relation: Relation
    rhs: float
    name: Optional[str] = None

    def named(self, name: str) -> "Constraint":
        return replace(self, name=name)

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(coef * values[n] for n, coef in self.terms)

    def violation(self, values: Mapping[str, float]) -> float:
        """Amount by which the row is violated (0 when satisfied)."""
        lhs = self.activity(values)
        if self.relation is Relation.LE:
            return max(0.0, lhs - self.rhs)
        if self.relation is Relation.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def satisfied(self, values: Mapping[str, float], tol: float = DEFAULT_TOLERANCES.feasibility) -> bool:
        return self.violation(values) <= tol * (1.0 + abs(self.rhs))


@dataclass
class ModelArrays:
    """Dense numeric view of an OptModel, in declaration order."""

    names: List[str]
    kinds: List[VarKind]
    c: np.ndarray
    constant: float
    A: np.ndarray
    relations: List[Relation]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    sense: Sense
    row_names: List[str]


class OptModel:
    """Generic linear model: variables, linear constraints and an objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: Dict[str, Variable] = {}
        self.constraints: List[Constraint] = []
        self.objective = LinearExpr()
        self.sense = Sense.MIN
        self._rows: Dict[str, Constraint] = {}

    def add_var(
        self,
        name: str,
        kind: VarKind = VarKind.CONTINUOUS,
        lb: Optional[float] = None,
        ub: Optional[float] = None,
    ) -> LinearExpr:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name!r}")
        if kind is VarKind.BINARY:
            default_lb, default_ub = 0.0, 1.0
        elif kind is VarKind.FREE:
            default_lb, default_ub = -INF, INF
        else:
            default_lb, default_ub = 0.0, INF
        self.variables[name] = Variable(
            name,
            kind,
            default_lb if lb is None else float(lb),
            default_ub if ub is None else float(ub),
        )
        return LinearExpr.var(name)

    def has_var(self, name: str) -> bool:
        return name in self.variables

    def row(self, name: str) -> Optional[Constraint]:
        return self._rows.get(name)

    def add_constraint(self, constraint: Constraint) -> Constraint:
        unknown = [n for n, _ in constraint.terms if n not in self.variables]
        if unknown:
            raise ModelError(f"constraint {constraint.name!r} references undeclared variables {unknown}")
        if constraint.name is None:
            constraint = constraint.named(f"c{len(self.constraints)}")
        if constraint.name in self._rows:
            raise ModelError(f"duplicate constraint name {constraint.name!r}")
        self._rows[constraint.name] = constraint
        self.constraints.append(constraint)
        return constraint

    def add_constraints(self, constraints: Iterable[Constraint]) -> None:
        for constraint in constraints:
            self.add_constraint(constraint)

    def set_objective(self, expr: ExprLike, sense: Sense = Sense.MIN) -> None:
        expr = expr if isinstance(expr, LinearExpr) else LinearExpr.const(expr)
        unknown = [n for n in expr.terms if n not in self.variables]
        if unknown:
            raise ModelError(f"objective references undeclared variables {unknown}")
        self.objective = expr.copy()
        self.sense = sense

    @property
    def binaries(self) -> List[str]:
        return [v.name for v in self.variables.values() if v.kind is VarKind.BINARY]

    @property
    def is_mip(self) -> bool:
        return any(v.kind is VarKind.BINARY for v in self.variables.values())

    def copy(self, name: Optional[str] = None) -> "OptModel":
        clone = OptModel(name or self.name)
        clone.variables = dict(self.variables)
        clone.constraints = list(self.constraints)
        clone.objective = self.objective.copy()
        clone.sense = self.sense
        clone._rows = dict(self._rows)
        return clone

    def violated(self, values: Mapping[str, float], tol: float = DEFAULT_TOLERANCES.feasibility) -> List[str]:
        """Names of rows and bounds that ``values`` break."""
        broken = [row.name for row in self.constraints if not row.satisfied(values, tol)]
        for var in self.variables.values():
            x = values[var.name]
            if x < var.lb - tol * (1.0 + abs(var.lb)) or x > var.ub + tol * (1.0 + abs(var.ub)):
                broken.append(f"bound:{var.name}")
        return broken

    def to_arrays(self) -> ModelArrays:
        names = list(self.variables)
        index = {name: j for j, name in enumerate(names)}
        A = np.zeros((len(self.constraints), len(names)))
        for i, row in enumerate(self.constraints):
            for name, coef in row.terms:
                A[i, index[name]] += coef
        c = np.zeros(len(names))
        for name, coef in self.objective.terms.items():
            c[index[name]] += coef
        return ModelArrays(
            names=names,
            kinds=[v.kind for v in self.variables.values()],
            c=c,
            constant=self.objective.constant,
            A=A,
            relations=[row.relation for row in self.constraints],
            b=np.array([row.rhs for row in self.constraints], dtype=float),
            lb=np.array([v.lb for v in self.variables.values()], dtype=float),
            ub=np.array([v.ub for v in self.variables.values()], dtype=float),
            sense=self.sense,
            row_names=[row.name for row in self.constraints],
        )


@dataclass
class OptSolution:
    status: Status
    values: Dict[str, float] = field(default_factory=dict)
    objective_value: float = math.nan
    dual_values: Dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def __getitem__(self, name: str) -> float:
        return self.values[name]


@dataclass
class ConstraintBlock:
    """Rows tagged by the model equation they implement, with the variables they introduce."""

    tag: str
    rows: List[Constraint] = field(default_factory=list)
    variables: List[Variable] = field(default_factory=list)

    def add(self, row: Constraint) -> None:
        self.rows.append(row)

    def declare(self, name: str, kind: VarKind = VarKind.CONTINUOUS, lb: float = 0.0, ub: float = INF) -> LinearExpr:
        self.variables.append(Variable(name, kind, lb, ub))
        return LinearExpr.var(name)

    def extend(self, other: "ConstraintBlock") -> None:
        self.rows.extend(other.rows)
        self.variables.extend(other.variables)


def add_block(model: OptModel, block: ConstraintBlock) -> None:
    """Declare the block's variables and append its rows; shared variables and identical rows are added once."""
    for var in block.variables:
        known = model.variables.get(var.name)
        if known is None:
            model.add_var(var.name, var.kind, var.lb, var.ub)
        elif known != var:
            raise ModelError(f"variable {var.name!r} declared twice with different kind or bounds")
    for row in block.rows:
        if row.name is not None and model.row(row.name) == row:
            continue
        model.add_constraint(row)
