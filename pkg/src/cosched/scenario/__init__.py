from cosched.scenario.fit import fit_ddu_params, fit_specs, specs_from_dict, specs_to_dict
from cosched.scenario.history import HistoryBundle, LineRecord, load_history, save_history
from cosched.scenario.montecarlo import McSummary, SamplerConfig, monte_carlo_eval
from cosched.scenario.synthetic import SyntheticConfig, engine_case_specs, gen_synthetic, planted_schedule

__all__ = [
    "HistoryBundle",
    "LineRecord",
    "McSummary",
    "SamplerConfig",
    "SyntheticConfig",
    "engine_case_specs",
    "fit_ddu_params",
    "fit_specs",
    "gen_synthetic",
    "load_history",
    "monte_carlo_eval",
    "planted_schedule",
    "save_history",
    "specs_from_dict",
    "specs_to_dict",
]
