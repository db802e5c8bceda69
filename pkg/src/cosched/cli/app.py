import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from cosched.cli import render
from cosched.ddccg.brute import DEFAULT_MAX_BINARIES, brute_force_oracle
from cosched.ddccg.driver import CoSchedule, DdccgOptions, DdccgTrace, run
from cosched.ddccg.oracle import CORNER_MODES
from cosched.ddu import DduSpec, FrMomentModel, ProductStructureIdm
from cosched.errors import CoschedError, ConsistencyError, IterationLimitExceeded, MissingRun, SchemaError
from cosched.factory.engine_case import build_engine_case
from cosched.factory.loader import dump_factory, load_factory, validate_factory
from cosched.factory.model import CostReport, FactoryGraph
from cosched.factory.simulate import simulate_schedule
from cosched.i18n.localization import LANG_ENV, localization
from cosched.scenario.fit import fit_specs, specs_from_dict, specs_to_dict
from cosched.scenario.history import load_history, save_history
from cosched.scenario.montecarlo import LOAD_LAWS, SamplerConfig, monte_carlo_eval
from cosched.scenario.synthetic import SyntheticConfig, engine_case_specs, gen_synthetic, planted_schedule
from cosched.utils.util import ensure_dir, read_json, write_json, write_jsonl

logger = logging.getLogger(__name__)

LOG_ENV = "COSCHED_LOG_LEVEL"
ENGINE = "engine"
GAMMA_SWEEP = (0.01, 0.02, 0.05, 0.10)

SCHEDULE_FILE = "schedule.json"
TRACE_FILE = "trace.jsonl"
SUMMARY_FILE = "summary.json"


def configure_logging() -> None:
    """Log to standard error at the level named by COSCHED_LOG_LEVEL (default WARNING)."""
    name = os.environ.get(LOG_ENV, "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


@dataclass
class RunConfig:
    command: str
    instance: Optional[str] = None
    history: Optional[str] = None
    ddu: Optional[str] = None
    schedule: Optional[str] = None
    runs: Tuple[str, ...] = ()
    epsilon: float = 1e-4
    gammas: Tuple[float, ...] = ()
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    fr_epsilon: Optional[float] = None
    max_iters: int = 200
    seed: int = 1
    out: str = "out"
    lenient: bool = False
    corners: str = "exact"
    timing: bool = True
    learn_structure: bool = False
    workers: Optional[int] = None
    samples: int = 1000
    load_law: str = "gaussian"
    max_binaries: int = DEFAULT_MAX_BINARIES
    workshops: int = 2
    options: int = 2
    horizon: int = 2
    intensity: float = 1.0
    lang: Optional[str] = None

    def check(self) -> None:
        """Raise on out-of-range numbers and on input paths that do not exist."""
        if not self.epsilon > 0.0:
            raise ConsistencyError(f"must be positive, got {self.epsilon}", "--epsilon")
        for g in self.gammas:
            if not 0.0 < g < 1.0:
                raise ConsistencyError(f"confidence must lie in (0, 1), got {g}", "--gamma")
        for flag, value in (("--gamma1", self.gamma1), ("--gamma2", self.gamma2)):
            if value is not None and value < 0.0:
                raise ConsistencyError(f"must be nonnegative, got {value}", flag)
        if self.fr_epsilon is not None and not 0.0 < self.fr_epsilon < 1.0:
            raise ConsistencyError(f"must lie in (0, 1), got {self.fr_epsilon}", "--fr-epsilon")
        if self.max_iters < 1:
            raise ConsistencyError(f"must be at least 1, got {self.max_iters}", "--max-iters")
        if self.samples < 1:
            raise ConsistencyError(f"must be at least 1, got {self.samples}", "--samples")
        paths = [self.history, self.ddu, self.schedule, *self.runs]
        if self.instance not in (None, ENGINE):
            paths.append(self.instance)
        for path in paths:
            if path is not None and not Path(path).exists():
                raise SchemaError(path, "file not found")


class CoschedApp:
    """Command-line front end: one subcommand per pipeline step."""

    def __init__(self):
        self.parser = None
        self.setup_parser()

    def setup_parser(self):
        """Setup the argument parser with every subcommand."""
        self.parser = argparse.ArgumentParser(
            prog="cosched", description="Robust co-scheduling of production and energy in a discrete-manufacturing plant."
        )
        self.parser.add_argument(
            "--lang", choices=localization.languages, help=f"language of report headers and check output (default: ${LANG_ENV} or en)"
        )
        self._subparsers = self.parser.add_subparsers(dest="command", required=True)
        self._create_validate_command()
        self._create_fit_command()
        self._create_solve_command()
        self._create_simulate_command()
        self._create_evaluate_command()
        self._create_oracle_command()
        self._create_report_command()
        self._create_generate_command()

    def _add_instance(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("instance", help=f"instance JSON file, or '{ENGINE}' for the bundled engine case")
        parser.add_argument("--lenient", action="store_true", help="warn about unknown keys instead of failing")
        parser.add_argument("--out", default="out", help="output directory")

    def _add_uncertainty(self, parser: argparse.ArgumentParser) -> None:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--history", help="history directory to fit the uncertainty models from")
        group.add_argument("--ddu", help="fitted uncertainty models (JSON from the fit command)")
        parser.add_argument("--gamma", type=float, nargs="+", default=None, help="IDM confidence; several values run a sweep")
        parser.add_argument("--gamma1", type=float, help="mean ambiguity of the load model")
        parser.add_argument("--gamma2", type=float, help="second-moment ambiguity of the load model")
        parser.add_argument("--fr-epsilon", type=float, dest="fr_epsilon", help="violation probability of the FR box")

    def _add_solver(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--epsilon", type=float, default=1e-4, help="absolute optimality gap")
        parser.add_argument("--max-iters", type=int, default=200, dest="max_iters")
        parser.add_argument("--corners", choices=CORNER_MODES, default="exact")
        parser.add_argument("--no-timing", action="store_false", dest="timing", help="write elapsed_ms = 0 in traces")
        parser.add_argument("--learn-structure", action="store_true", dest="learn_structure")
        parser.add_argument("--workers", type=int, default=None)

    def _create_validate_command(self):
        parser = self._subparsers.add_parser("validate", help="check an instance")
        self._add_instance(parser)

    def _create_fit_command(self):
        parser = self._subparsers.add_parser("fit", help="fit the uncertainty models from a history")
        self._add_instance(parser)
        self._add_uncertainty(parser)

    def _create_solve_command(self):
        parser = self._subparsers.add_parser("solve", help="solve the robust co-scheduling problem")
        self._add_instance(parser)
        self._add_uncertainty(parser)
        self._add_solver(parser)
        parser.add_argument("--sweep", action="store_true", help=f"sweep the IDM confidence over {list(GAMMA_SWEEP)}")

    def _create_simulate_command(self):
        parser = self._subparsers.add_parser("simulate", help="replay a solved schedule under its worst case")
        self._add_instance(parser)
        parser.add_argument("--schedule", required=True)

    def _create_evaluate_command(self):
        parser = self._subparsers.add_parser("evaluate", help="Monte Carlo evaluation of a solved schedule")
        self._add_instance(parser)
        self._add_uncertainty(parser)
        parser.add_argument("--schedule", required=True)
        parser.add_argument("-n", "--samples", type=int, default=1000)
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument("--load-law", choices=LOAD_LAWS, default="gaussian", dest="load_law")
        parser.add_argument("--workers", type=int, default=None)

    def _create_oracle_command(self):
        parser = self._subparsers.add_parser("oracle", help="exhaustive min-max-min optimum of a small instance")
        self._add_instance(parser)
        self._add_uncertainty(parser)
        parser.add_argument("--max-binaries", type=int, default=DEFAULT_MAX_BINARIES, dest="max_binaries")
        parser.add_argument("--corners", choices=CORNER_MODES, default="exact")

    def _create_report_command(self):
        parser = self._subparsers.add_parser("report", help="compare solved runs")
        parser.add_argument("runs", nargs="+", help="run directories holding schedule.json")
        parser.add_argument("--out", default="out")

    def _create_generate_command(self):
        parser = self._subparsers.add_parser("generate", help="write a seeded synthetic instance and history")
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument("--workshops", type=int, default=2)
        parser.add_argument("--options", type=int, default=2)
        parser.add_argument("--horizon", type=int, default=2)
        parser.add_argument("--intensity", type=float, default=1.0)
        parser.add_argument("--out", default="out")

    def parse(self, argv: Optional[Sequence[str]] = None) -> RunConfig:
        args = vars(self.parser.parse_args(argv))
        if args.pop("sweep", False):
            args["gamma"] = list(GAMMA_SWEEP)
        args["gammas"] = tuple(args.pop("gamma", None) or ())
        args["runs"] = tuple(args.pop("runs", ()) or ())
        fields = {f.name for f in dataclasses.fields(RunConfig)}
        config = RunConfig(**{k: v for k, v in args.items() if k in fields})
        config.check()
        return config

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Run one subcommand; returns the process exit status."""
        try:
            config = self.parse(argv)
            if config.lang is not None:
                localization.set_language(config.lang)
            handler = getattr(self, f"cmd_{config.command}")
            return handler(config)
        except CoschedError as e:
            logger.error("%s: %s", type(e).__name__, e)
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code
        except SystemExit as e:
            return int(e.code or 0)
        except Exception as e:
            logger.exception("internal error")
            print(f"internal error: {e}", file=sys.stderr)
            return 5

    def _graph(self, config: RunConfig) -> FactoryGraph:
        if config.instance == ENGINE:
            return build_engine_case()
        return load_factory(config.instance, config.lenient)

    def _specs(self, config: RunConfig, graph: FactoryGraph, gamma: Optional[float] = None) -> List[DduSpec]:
        if config.ddu is not None:
            specs = specs_from_dict(read_json(config.ddu))
        elif config.history is not None:
            specs = fit_specs(load_history(config.history, graph.horizon))
        elif config.instance == ENGINE:
            specs = engine_case_specs()
        else:
            specs = []
        return _override(specs, gamma, config)

    def cmd_validate(self, config: RunConfig) -> int:
        source = dump_factory(build_engine_case()) if config.instance == ENGINE else config.instance
        _, issues = validate_factory(source, config.lenient)
        out = ensure_dir(config.out)
        write_json(out / "diagnostics.json", [d.to_dict() for d in issues])
        failed = {d.check for d in issues}
        for check in localization.current_diagnostic_texts:
            if check in ("ok", "failed"):
                continue
            status = localization.check_name("failed" if check in failed else "ok")
            print(f"{localization.check_name(check)}: {status}")
        if issues:
            print(render.diagnostics_table(issues))
            print(localization.get_text("instance_bad").format(count=len(issues)))
            return 2
        print(localization.get_text("instance_ok"))
        return 0

    def cmd_fit(self, config: RunConfig) -> int:
        graph = self._graph(config)
        if config.history is None:
            raise SchemaError("--history", "the fit command needs a history directory")
        gamma = config.gammas[0] if config.gammas else None
        specs = self._specs(config, graph, gamma)
        path = write_json(Path(config.out) / "ddu.json", specs_to_dict(specs))
        print(localization.get_text("written").format(path=path))
        return 0

    def cmd_solve(self, config: RunConfig) -> int:
        graph = self._graph(config)
        options = DdccgOptions(
            epsilon=config.epsilon,
            max_iters=config.max_iters,
            corners=config.corners,
            learn_structure=config.learn_structure,
            timing=config.timing,
            workers=config.workers,
        )
        sweep = config.gammas if len(config.gammas) > 1 else (config.gammas[0] if config.gammas else None,)
        for gamma in sweep:
            out = Path(config.out) if len(sweep) == 1 else Path(config.out) / f"gamma_{gamma:g}"
            specs = self._specs(config, graph, gamma)
            try:
                co, trace = run(graph, specs, options)
            except IterationLimitExceeded as e:
                _write_solution(out, e.incumbent, e.trace)
                raise
            _write_solution(out, co, trace)
            print(localization.get_text("solved").format(objective=co.objective, gap=co.gap, iterations=trace.iterations))
        return 0

    def cmd_simulate(self, config: RunConfig) -> int:
        graph = self._graph(config)
        co = CoSchedule.from_dict(read_json(config.schedule))
        report = simulate_schedule(graph, co.schedule, co.dispatch, co.worst_case)
        write_json(Path(config.out) / "simulate.json", report.to_dict())
        print(render.cost_table(report))
        return 0

    def cmd_evaluate(self, config: RunConfig) -> int:
        graph = self._graph(config)
        specs = self._specs(config, graph, config.gammas[0] if config.gammas else None)
        co = CoSchedule.from_dict(read_json(config.schedule))
        summary = monte_carlo_eval(
            graph, co, specs, config.samples, config.seed, SamplerConfig(load_law=config.load_law), config.workers
        )
        write_json(Path(config.out) / SUMMARY_FILE, summary.to_dict())
        print(render.summary_table(summary.to_dict()))
        return 0

    def cmd_oracle(self, config: RunConfig) -> int:
        graph = self._graph(config)
        specs = self._specs(config, graph, config.gammas[0] if config.gammas else None)
        result = brute_force_oracle(graph, specs, config.max_binaries, config.corners)
        write_json(Path(config.out) / "oracle.json", result.to_dict())
        print(localization.get_text("oracle_value").format(value=result.value, count=result.evaluated))
        return 0

    def cmd_report(self, config: RunConfig) -> int:
        reports: Dict[str, CostReport] = {}
        details: Dict[str, object] = {}
        paths = [Path(run_dir) for run_dir in config.runs]
        for path, label in zip(paths, _run_labels(paths)):
            if not (path / SCHEDULE_FILE).exists():
                raise MissingRun(f"{path} has no {SCHEDULE_FILE}")
            doc = read_json(path / SCHEDULE_FILE)
            reports[label] = CostReport.from_dict(doc)
            entry = {"report": reports[label].to_dict(), "robust_objective": doc.get("robust_objective"), "gap": doc.get("gap")}
            if (path / SUMMARY_FILE).exists():
                entry["summary"] = read_json(path / SUMMARY_FILE)
            details[label] = entry
        out = ensure_dir(config.out)
        write_json(out / "report.json", {"runs": details, "columns": render.comparison_headers()})
        table = render.comparison_table(reports)
        (out / "report.txt").write_text(table + "\n", encoding="utf-8")
        (out / "consumption.csv").write_text(render.consumption_csv(reports), encoding="utf-8")
        print(table)
        return 0

    def cmd_generate(self, config: RunConfig) -> int:
        synthetic = SyntheticConfig(
            workshops=config.workshops,
            options_per_workshop=config.options,
            horizon=config.horizon,
            seed=config.seed,
            intensity=config.intensity,
        )
        graph, bundle = gen_synthetic(synthetic)
        out = ensure_dir(config.out)
        write_json(out / "instance.json", dump_factory(graph))
        save_history(bundle, out / "history")
        planted = planted_schedule(graph)
        write_json(out / "planted.json", {"horizon": planted.horizon, "active": [list(t) for t in planted.triplets()]})
        print(localization.get_text("written").format(path=out))
        return 0


def _run_labels(paths: Sequence[Path]) -> List[str]:
    """Directory names, or paths below the common parent when two names collide."""
    names = [path.name or str(path) for path in paths]
    if len(set(names)) == len(names):
        return names
    resolved = [path.resolve() for path in paths]
    root = Path(os.path.commonpath([str(p) for p in resolved]))
    labels = [p.relative_to(root).as_posix() for p in resolved]
    seen = set()
    for path, label in zip(paths, labels):
        if label in seen or label == ".":
            raise ConsistencyError(f"{path} cannot be told apart from another run", "runs")
        seen.add(label)
    return labels


def _override(specs: List[DduSpec], gamma: Optional[float], config: RunConfig) -> List[DduSpec]:
    """Apply the confidence and load-model flags to the matching models."""
    out: List[DduSpec] = []
    for spec in specs:
        if isinstance(spec, ProductStructureIdm) and gamma is not None:
            spec = dataclasses.replace(spec, gamma=gamma)
        elif isinstance(spec, FrMomentModel):
            changes = {"gamma1": config.gamma1, "gamma2": config.gamma2, "epsilon": config.fr_epsilon}
            changes = {k: v for k, v in changes.items() if v is not None}
            if changes:
                spec = dataclasses.replace(spec, **changes)
        out.append(spec)
    return out


def _write_solution(out: Path, co: Optional[CoSchedule], trace: Optional[DdccgTrace]) -> None:
    out = ensure_dir(out)
    if trace is not None:
        write_jsonl(out / TRACE_FILE, trace.jsonl())
    if co is None:
        return
    write_json(out / SCHEDULE_FILE, co.to_dict())
    write_json(
        out / "report.json",
        {
            "objective": co.objective,
            "gap": co.gap,
            "iterations": 0 if trace is None else trace.iterations,
            "report": co.report.to_dict(),
        },
    )
    text = render.cost_table(co.report) + "\n\n" + render.hourly_table(co.report) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    (out / "consumption.csv").write_text(render.consumption_csv({out.name or "run": co.report}), encoding="utf-8")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    return CoschedApp().run(argv)


def main():
    """Main entry point for the application."""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
