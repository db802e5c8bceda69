from typing import Union

from cosched.ddu.fr_moment import FrMomentModel, cantelli_bound, estimate_moments, fr_box, fr_delta
from cosched.ddu.idm import (
    LineState,
    ProductStructureIdm,
    ThetaInterval,
    idm_interval,
    record_visits,
    zeta_bounds,
    zeta_rows,
)
from cosched.ddu.special import inv_reg_inc_beta, norm_ppf, reg_inc_beta
from cosched.ddu.yield_ambiguity import YieldAmbiguity, YieldCombo, and_linearize, yield_bound_rows

DduSpec = Union[YieldAmbiguity, FrMomentModel, ProductStructureIdm]

__all__ = [
    "DduSpec",
    "FrMomentModel",
    "LineState",
    "ProductStructureIdm",
    "ThetaInterval",
    "YieldAmbiguity",
    "YieldCombo",
    "and_linearize",
    "cantelli_bound",
    "estimate_moments",
    "fr_box",
    "fr_delta",
    "idm_interval",
    "inv_reg_inc_beta",
    "norm_ppf",
    "record_visits",
    "reg_inc_beta",
    "yield_bound_rows",
    "zeta_bounds",
    "zeta_rows",
]
