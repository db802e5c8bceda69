"""
Text tables and plot-ready series for the command line.
"""
from __future__ import annotations

import io
from typing import Mapping, Optional, Sequence

import pandas as pd
from tabulate import tabulate

from cosched.factory.loader import Diagnostic
from cosched.factory.model import CostReport
from cosched.i18n.localization import LocalizationService, localization

TABLE_FORMAT = "github"


def comparison_rows(runs: Mapping[str, CostReport]) -> list:
    """One row per labelled run: power cost, main products, by-products, objective."""
    return [
        [label, report.purchase_cost, report.main_revenue, report.by_revenue, report.objective]
        for label, report in runs.items()
    ]


def comparison_headers(lang: LocalizationService = localization) -> list:
    return [
        lang.get_text("run"),
        lang.get_text("power_cost"),
        lang.get_text("main_products"),
        lang.get_text("by_products"),
        lang.get_text("objective"),
    ]


def comparison_table(runs: Mapping[str, CostReport], lang: LocalizationService = localization) -> str:
    return tabulate(comparison_rows(runs), headers=comparison_headers(lang), tablefmt=TABLE_FORMAT, floatfmt=".4f")


def cost_table(report: CostReport, lang: LocalizationService = localization) -> str:
    rows = [
        [lang.get_text("equipment_cost"), report.equipment_cost],
        [lang.get_text("degradation_cost"), report.degradation_cost],
        [lang.get_text("power_cost"), report.purchase_cost],
        [lang.get_text("fr_penalty"), report.fr_penalty],
        [lang.get_text("main_products"), report.main_revenue],
        [lang.get_text("by_products"), report.by_revenue],
        [lang.get_text("objective"), report.objective],
    ]
    return tabulate(rows, tablefmt=TABLE_FORMAT, floatfmt=".4f")


def hourly_table(report: CostReport, lang: LocalizationService = localization) -> str:
    hourly = report.hourly
    hours = range(len(hourly.get("consumption", [])))
    rows = [
        [h, hourly["consumption"][h], hourly["net_purchase"][h], hourly["soc"][h + 1]]
        for h in hours
    ]
    headers = [lang.get_text("hour"), lang.get_text("consumption"), lang.get_text("net_purchase"), lang.get_text("soc")]
    return tabulate(rows, headers=headers, tablefmt=TABLE_FORMAT, floatfmt=".3f")


def diagnostics_table(issues: Sequence[Diagnostic], lang: LocalizationService = localization) -> str:
    rows = [[lang.check_name(d.check), d.path, d.message] for d in issues]
    return tabulate(rows, headers=["check", "path", "message"], tablefmt=TABLE_FORMAT)


def summary_table(summary: Mapping[str, object], lang: LocalizationService = localization) -> str:
    rows = [
        [lang.get_text("mean"), summary["mean_objective"]],
        [lang.get_text("std"), summary["std_objective"]],
        ["q05", summary["q05"]],
        ["q95", summary["q95"]],
        [lang.get_text("violation_rate"), summary["fr_violation_rate"]],
    ]
    return tabulate(rows, tablefmt=TABLE_FORMAT, floatfmt=".4f")


def consumption_csv(runs: Mapping[str, CostReport], key: str = "consumption") -> str:
    """Hourly series of every run as CSV: one ``hour`` column, one column per run."""
    frame: Optional[pd.DataFrame] = None
    for label, report in runs.items():
        series = report.hourly.get(key, [])
        column = pd.DataFrame({"hour": range(len(series)), label: series})
        frame = column if frame is None else frame.merge(column, on="hour", how="outer")
    if frame is None:
        frame = pd.DataFrame({"hour": []})
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()
