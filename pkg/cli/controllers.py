import logging
import sys
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from cli.services.experiment_service import ExperimentOrchestrator, plot_script
from config import settings
from core.errors import SingularSystemError
from models.schemas import RunConfig, SolveReportModel
from utils.files import atomic_write_text, model_to_json_text, write_frame_csv, write_json_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2
EXIT_SINGULAR = 3
EXIT_NOT_CONVERGED = 4


def _emit(model: BaseModel, out: Optional[str]) -> None:
    if out:
        write_json_model(model, out)
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(model_to_json_text(model))


def identities_handler(config: RunConfig) -> int:
    report = ExperimentOrchestrator(config).run_identities()
    _emit(report, config.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def region_handler(config: RunConfig) -> int:
    region_map, summary = ExperimentOrchestrator(config).run_region()
    if config.out is None:
        _emit(summary, None)
        return EXIT_OK
    out = Path(config.out)
    if region_map is None:
        write_json_model(summary, out.with_suffix(".json"))
        return EXIT_OK
    write_frame_csv(region_map.to_frame(), out)
    write_json_model(summary, out.with_suffix(".json"))
    if config.emit_plot_script:
        atomic_write_text(out.with_suffix(".gp"), plot_script(out, summary.kind))
    logger.info(f"[region] map written to {out}")
    return EXIT_OK


def solve_handler(config: RunConfig) -> int:
    orchestrator = ExperimentOrchestrator(config)
    try:
        F, report = orchestrator.run_solve()
    except SingularSystemError as exc:
        _emit(exc.report, config.out)
        return EXIT_SINGULAR
    if config.solution_out:
        write_frame_csv(orchestrator.solution_frame(F), config.solution_out)
    _emit(report, config.out)
    limit = 1.0 + settings.bound_tolerance
    violated = report.admissible and (report.ratio_l2 > limit or report.ratio_d > limit)
    return EXIT_VIOLATION if violated else EXIT_OK


def coercivity_handler(config: RunConfig) -> int:
    report = ExperimentOrchestrator(config).run_coercivity()
    _emit(report, config.out)
    return EXIT_VIOLATION if report.passed is False else EXIT_OK


def resolvent_handler(config: RunConfig) -> int:
    try:
        report = ExperimentOrchestrator(config).run_resolvent()
    except SingularSystemError as exc:
        logger.error(f"[resolvent] {exc}")
        if exc.report is not None:
            _emit(SolveReportModel(**exc.report.to_dict(), config=config.echo()), config.out)
        return EXIT_SINGULAR
    _emit(report, config.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def trace_norm_handler(config: RunConfig) -> int:
    _emit(ExperimentOrchestrator(config).run_trace_norm(), config.out)
    return EXIT_OK