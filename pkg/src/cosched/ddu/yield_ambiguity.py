"""
Yield ambiguity driven by which production lines run together.

The worst-case yield of a corrected option is its floor minus the deltas of
every active line combination, ``alpha = floor - sum(delta_k * AND_k(I))``.
Improving combinations carry negative deltas. Conjunctions of binaries are
linearized with ``and_linearize``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from cosched import naming
from cosched.errors import DomainError
from cosched.optkernel.model import ConstraintBlock, LinearExpr

logger = logging.getLogger(__name__)

OptionKey = Tuple[str, str]


@dataclass(frozen=True)
class YieldCombo:
    """A set of options whose joint operation shifts the yield of ``targets`` by ``-delta``."""

    members: Tuple[OptionKey, ...]
    delta: float
    targets: Tuple[OptionKey, ...] = ()

    @property
    def corrected(self) -> Tuple[OptionKey, ...]:
        return self.targets or self.members


@dataclass(frozen=True)
class YieldAmbiguity:
    alpha_floor: Mapping[OptionKey, float] = field(default_factory=dict)
    combos: Tuple[YieldCombo, ...] = ()
    corrected_set: Tuple[OptionKey, ...] = ()
    coupled_to: Tuple[str, ...] = ("I",)

    def __post_init__(self):
        for key, floor in self.alpha_floor.items():
            if not 0.0 <= floor <= 1.0:
                raise DomainError(f"yield floor of {key} must lie in [0, 1], got {floor}")
        for k, combo in enumerate(self.combos):
            if not combo.members:
                raise DomainError(f"combo {k} has no members")
            if abs(combo.delta) > 1.0:
                raise DomainError(f"combo {k} delta {combo.delta} exceeds 1 in magnitude")
        for key in self.corrected_set:
            deltas = [combo.delta for combo in self.combos_for(key)]
            worst = self.floor(key) - sum(d for d in deltas if d > 0.0)
            best = self.floor(key) - sum(d for d in deltas if d < 0.0)
            if worst < -1e-12 or best > 1.0 + 1e-12:
                raise DomainError(f"corrected yield of {key} leaves [0, 1] for some combo subset ({worst}, {best})")

    def floor(self, key: OptionKey) -> float:
        return float(self.alpha_floor.get(key, 1.0))

    def combos_for(self, key: OptionKey) -> List[YieldCombo]:
        return [combo for combo in self.combos if key in combo.corrected]

    def combo_indices_for(self, key: OptionKey) -> List[int]:
        return [k for k, combo in enumerate(self.combos) if key in combo.corrected]

    def max_drop(self, key: OptionKey) -> float:
        """Largest possible reduction below the floor (the d_max of the sampler bounds)."""
        return sum(combo.delta for combo in self.combos_for(key) if combo.delta > 0.0)

    def is_corrected(self, key: OptionKey) -> bool:
        return key in self.corrected_set


def and_linearize(var_set: Sequence[str], aux_name: str) -> ConstraintBlock:
    """Rows forcing ``aux`` to the product of binary ``var_set``."""
    if not var_set:
        raise DomainError("and_linearize needs at least one variable")
    block = ConstraintBlock("8c")
    aux = block.declare(aux_name, lb=0.0, ub=1.0)
    for i, name in enumerate(var_set):
        block.add(aux.le(LinearExpr.var(name), name=f"and_ub[{aux_name},{i}]"))
    block.add(aux.ge(LinearExpr.total(LinearExpr.var(n) for n in var_set) - (len(var_set) - 1), name=f"and_lb[{aux_name}]"))
    return block


def combo_active(combo: YieldCombo, active: Callable[[OptionKey], bool]) -> bool:
    return all(active(member) for member in combo.members)


def alpha_value(spec: Optional[YieldAmbiguity], key: OptionKey, active: Callable[[OptionKey], bool]) -> float:
    """Worst-case yield of ``key`` at an hour whose running options satisfy ``active``."""
    if spec is None or not spec.is_corrected(key):
        return 1.0
    drop = sum(combo.delta for combo in spec.combos_for(key) if combo_active(combo, active))
    return spec.floor(key) - drop


def _combo_aux(spec: YieldAmbiguity, hour: int, k: int, block: ConstraintBlock, declared: Dict[str, bool]) -> LinearExpr:
    name = naming.combo_aux(hour, k)
    if name not in declared:
        members = [naming.I(hour, n, p) for n, p in spec.combos[k].members]
        block.extend(and_linearize(members, name))
        declared[name] = True
    return LinearExpr.var(name)


def yield_bound_rows(spec: YieldAmbiguity, hour: int, workshop: str) -> ConstraintBlock:
    """Rows bounding alpha of every corrected option of ``workshop`` at ``hour``."""
    block = ConstraintBlock("8a")
    declared: Dict[str, bool] = {}
    for key in spec.corrected_set:
        if key[0] != workshop:
            continue
        a = block.declare(naming.alpha(hour, *key), lb=0.0, ub=1.0)
        correction = LinearExpr.total(
            _combo_aux(spec, hour, k, block, declared) * spec.combos[k].delta for k in spec.combo_indices_for(key)
        )
        block.add(a.ge(spec.floor(key) - correction, name=f"yield_lb[{hour},{key[0]},{key[1]}]"))
        block.add(a.le(1.0, name=f"yield_ub[{hour},{key[0]},{key[1]}]"))
    return block


def effective_output(
    spec: Optional[YieldAmbiguity],
    hour: int,
    key: OptionKey,
    output_qty: float,
    block: ConstraintBlock,
    declared: Dict[str, bool],
) -> LinearExpr:
    """
    Linear expression for ``alpha * output_qty * I`` at the worst-case yield.

    ``alpha * I`` expands to ``floor * I - sum(delta_k * AND(members_k + key))``;
    the auxiliary conjunctions are added to ``block`` once per name.
    """
    i_var = LinearExpr.var(naming.I(hour, *key))
    if spec is None or not spec.is_corrected(key):
        return i_var * output_qty
    expr = i_var * spec.floor(key)
    for k in spec.combo_indices_for(key):
        combo = spec.combos[k]
        if key in combo.members:
            aux = _combo_aux(spec, hour, k, block, declared)
        else:
            name = naming.combo_aux(hour, k, f"{key[0]},{key[1]}")
            if name not in declared:
                members = [naming.I(hour, n, p) for n, p in combo.members + (key,)]
                block.extend(and_linearize(members, name))
                declared[name] = True
            aux = LinearExpr.var(name)
        expr = expr - aux * combo.delta
    return expr * output_qty
