import logging
import math
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from config import settings
from core.assembly import (
    BoundaryCondition,
    FormOperator,
    FormSpec,
    SolveReport,
    assemble,
    bound_family,
    estimate_trace_norm,
    form_batch,
    s_resolvent_apply,
    solve_weak,
)
from core.clifford import Multivector, Paravector
from core.errors import InvalidParamsError, SingularSystemError
from core.fields import (
    BoxDomain,
    Grid,
    GridFunction,
    PolyField,
    domain_extrema,
    grid_function_from_frame,
    grid_function_to_frame,
    poincare_constant_box,
    poly_left_mul,
)
from core.operators import dh_squared_formula, dirac_hyperbolic, identity_residuals
from core.regions import (
    RegionKind,
    RegionMap,
    RegionParams,
    SPoint,
    classify_spherical_geometry,
    continuity_constant,
    region_sample,
)
from models.schemas import (
    CLASSIFY,
    CoercivityReportModel,
    Command,
    GeometryReportModel,
    IdentityReportModel,
    IdentityResult,
    RegionSummaryModel,
    ResolventReportModel,
    RunConfig,
    SolveReportModel,
    TraceNormReportModel,
)
from utils.files import read_frame_csv
from workers.pool import ordered_map

logger = logging.getLogger(__name__)

NO_DRIFT_KEY = "hyperbolic_square_no_drift"


def faulted_dh_square(F: PolyField) -> PolyField:
    """Closed-form square with the e_n D_H term sign-flipped"""
    e_n = Multivector.generator(F.n, F.n)
    return dh_squared_formula(F) - 2.0 * poly_left_mul(e_n, dirac_hyperbolic(F))


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


class ExperimentOrchestrator:
    """Runs the multi-phase experiments behind each CLI command"""

    def __init__(self, config: RunConfig):
        self.config = config
        self._grid: Optional[Grid] = None
        self._trace_estimate: Optional[float] = None

    # ------------------------------------------------------------------
    # Shared setup
    # ------------------------------------------------------------------

    def domain(self) -> BoxDomain:
        return BoxDomain(tuple(self.config.lo), tuple(self.config.hi), self.config.geometry)

    def grid(self) -> Grid:
        if self._grid is None:
            self._grid = Grid(self.domain(), tuple(self.config.res))
        return self._grid

    def spec(self) -> FormSpec:
        c = self.config
        s = Paravector.from_slice(c.s0, c.s1, c.n)
        b = c.b_norm if c.bc is BoundaryCondition.ROBIN else None
        return FormSpec(c.geometry, c.bc, s, b)

    def trace_estimate(self) -> float:
        if self._trace_estimate is None:
            self._trace_estimate = estimate_trace_norm(self.grid())
        return self._trace_estimate

    def params(self) -> RegionParams:
        c = self.config
        domain = self.domain()
        box_m, box_M = domain_extrema(domain)
        m = c.m if c.m is not None else box_m
        M = c.M if c.M is not None else box_M

        derived = c.box_derived()
        if derived and c.command is Command.REGION and not (math.isclose(m, box_m) and math.isclose(M, box_M)):
            raise InvalidParamsError(
                f"m={m}, M={M} disagree with the extrema ({box_m}, {box_M}) of the box that "
                f"{', '.join(derived)} would be taken from"
            )

        c_p = None if c.c_p == "auto" else float(c.c_p)
        if c.needs_box_poincare():
            c_p = poincare_constant_box(domain)
        trace_norm = None if c.trace_norm == "estimate" else float(c.trace_norm)
        if c.needs_trace_estimate():
            trace_norm = c.trace_safety * self.trace_estimate()

        if c.command is Command.REGION and c.needs_box_poincare():
            logger.warning(f"[params] c_p not given; using the box value {c_p:.8g} for lo={c.lo}, hi={c.hi}")
        if c.needs_trace_estimate():
            logger.warning(
                f"[trace] trace_norm not given; using {c.trace_safety} x discrete estimate = {trace_norm:.8g} "
                f"for lo={c.lo}, hi={c.hi}"
            )
        return RegionParams(c.n, m, M, c.b_norm, trace_norm, c_p, c.robin_coeff_mode)

    def rhs(self, rng: np.random.Generator) -> GridFunction:
        if self.config.f_csv:
            return grid_function_from_frame(self.grid(), read_frame_csv(self.config.f_csv))
        return GridFunction.random(self.grid(), rng)

    # ------------------------------------------------------------------
    # identities
    # ------------------------------------------------------------------

    def run_identities(self) -> IdentityReportModel:
        c = self.config
        trials = c.trial_count
        tolerance = settings.identity_tolerance
        formula = faulted_dh_square if c.inject_fault else dh_squared_formula
        logger.info(f"[identities] n_list={c.n_list}, trials={trials}, inject_fault={c.inject_fault}")

        def check(task: Tuple[int, int]) -> Dict[str, float]:
            n, trial = task
            F = PolyField.random(n, 3, trial_rng(c.seed, n, trial))
            scale = 1.0 + F.max_abs_coeff()
            return {key: value / scale for key, value in identity_residuals(F, formula).items()}

        tasks = [(n, trial) for n in c.n_list for trial in range(trials)]
        results = ordered_map(check, tasks)

        worst: Dict[str, float] = {}
        for residuals in results:
            for key, value in residuals.items():
                worst[key] = max(worst.get(key, 0.0), value)

        no_drift = worst.pop(NO_DRIFT_KEY, None)
        identities = {key: IdentityResult(max_residual=value, passed=value <= tolerance) for key, value in worst.items()}
        passed = all(r.passed for r in identities.values())
        for key, result in identities.items():
            level = logging.INFO if result.passed else logging.ERROR
            logger.log(level, f"[identities] {key}: max residual {result.max_residual:.3e}")
        if no_drift is not None:
            logger.info(f"[identities] display without the 2*alpha*y*d_y term: max residual {no_drift:.3e}")

        return IdentityReportModel(
            n_list=c.n_list,
            trials=trials,
            seed=c.seed,
            tolerance=tolerance,
            inject_fault=c.inject_fault,
            identities=identities,
            no_drift_max_residual=no_drift,
            no_drift_variant_fails=None if no_drift is None else no_drift > tolerance,
            passed=passed,
            config=c.echo(),
        )

    # ------------------------------------------------------------------
    # region
    # ------------------------------------------------------------------

    def run_region(self) -> Tuple[Optional[RegionMap], RegionSummaryModel]:
        c = self.config
        params = self.params()
        geometry = None
        if c.kind == CLASSIFY or c.kind.startswith("spherical"):
            report = classify_spherical_geometry(params, c.geometry_res)
            geometry = GeometryReportModel(**report.to_dict())
        if c.kind == CLASSIFY:
            return None, RegionSummaryModel(kind=CLASSIFY, params=params.to_dict(), geometry=geometry, config=c.echo())

        region_map = region_sample(
            RegionKind(c.kind), params, (c.s0_min, c.s0_max), (c.s1_min, c.s1_max), (c.s0_res, c.s1_res)
        )
        summary = RegionSummaryModel(**region_map.summary(), geometry=geometry, config=c.echo())
        return region_map, summary

    # ------------------------------------------------------------------
    # solve
    # ------------------------------------------------------------------

    def _solve_model(self, report: SolveReport) -> SolveReportModel:
        return SolveReportModel(**report.to_dict(), config=self.config.echo())

    def run_solve(self) -> Tuple[GridFunction, SolveReportModel]:
        c = self.config
        grid = self.grid()
        params = self.params()
        logger.info(f"[solve] {c.geometry.value}/{c.bc.value} n={c.n} res={c.res} s=({c.s0}, {c.s1})")
        op = assemble(grid, self.spec())
        f = self.rhs(trial_rng(c.seed, 0))
        try:
            F, report = solve_weak(op, f, params)
        except SingularSystemError as exc:
            logger.error(f"[solve] {exc}", exc_info=True)
            exc.report = self._solve_model(exc.report)
            raise
        return F, self._solve_model(report)

    @staticmethod
    def solution_frame(F: GridFunction):
        return grid_function_to_frame(F)

    # ------------------------------------------------------------------
    # coercivity
    # ------------------------------------------------------------------

    def run_coercivity(self) -> CoercivityReportModel:
        c = self.config
        grid = self.grid()
        params = self.params()
        spec = self.spec()
        op = assemble(grid, spec)
        s = SPoint(c.s0, abs(c.s1))
        kind, constant, admissible, family = bound_family(spec.region_kind, params, s)
        continuity = continuity_constant(c.geometry, params, s)
        constrained = spec.bc is BoundaryCondition.DIRICHLET
        trials = c.trial_count
        logger.info(f"[coercivity] {kind.value}: K={constant:.8g}, family={family}, trials={trials}")
        if not admissible:
            logger.warning(f"[coercivity] s=({s.s0}, {s.s1}) is outside every certified region; no bound is checked")

        def draw(index: int) -> Tuple[np.ndarray, np.ndarray]:
            rng = trial_rng(c.seed, index)
            F = GridFunction.random(grid, rng, constrained=constrained)
            G = GridFunction.random(grid, rng, constrained=constrained)
            return F.vec(), G.vec()

        def measure(chunk: range) -> Tuple[np.ndarray, np.ndarray]:
            pairs = [draw(index) for index in chunk]
            batch = form_batch(op, np.column_stack([F for F, _ in pairs]), np.column_stack([G for _, G in pairs]))
            # the Poincare family bounds Sc q_s(F,F) by the D-seminorm alone
            energy = batch.seminorm_d_sq if family == "poincare" else batch.seminorm_d_sq + batch.norm_l2_sq
            ratios = batch.sc_diagonal / (constant * energy) if admissible else np.full(len(chunk), np.nan)
            return ratios, batch.cross_norm / (continuity * batch.cross_h1)

        size = max(settings.trial_batch_size, 1)
        chunks = [range(start, min(start + size, trials)) for start in range(0, trials, size)]
        results = ordered_map(measure, chunks)
        ratios = np.concatenate([r for r, _ in results]) if results else np.empty(0)
        continuity_ratios = np.concatenate([q for _, q in results]) if results else np.empty(0)

        min_ratio = float(ratios.min()) if admissible and ratios.size else None
        violations = 0
        if admissible:
            violations += int(np.sum(ratios < 1.0 - settings.bound_tolerance))
            violations += int(np.sum(continuity_ratios > 1.0 + settings.bound_tolerance))
        if violations:
            logger.error(f"[coercivity] {violations} bound violations")

        return CoercivityReportModel(
            kind=kind.value,
            s0=s.s0,
            s1=s.s1,
            constant=constant,
            admissible=admissible,
            bound_family=family,
            trials=trials,
            min_ratio=min_ratio,
            min_slack=None if min_ratio is None else min_ratio - 1.0,
            violations=violations,
            continuity_constant=continuity,
            max_continuity_ratio=float(continuity_ratios.max()) if continuity_ratios.size else None,
            params=params.to_dict(),
            passed=violations == 0 if admissible else None,
            config=c.echo(),
        )

    # ------------------------------------------------------------------
    # resolvent
    # ------------------------------------------------------------------

    def run_resolvent(self) -> ResolventReportModel:
        c = self.config
        grid = self.grid()
        params = self.params()
        spec = self.spec()
        op: FormOperator = assemble(grid, spec)
        trials = max(c.trial_count, 1)
        logger.info(f"[resolvent] {c.side.value} side, {trials} trials at res={c.res}")

        reports = []
        for index in range(trials):
            f = self.rhs(trial_rng(c.seed, index))
            _, report = s_resolvent_apply(c.side, spec.operator_kind, spec, f, op=op, params=params)
            reports.append(report)

        ratios = [r.ratio for r in reports if r.ratio is not None]
        first = reports[0].solve
        passed = all(r.within_bound() for r in reports) and all(r.solve.within_bounds() for r in reports)
        solve_l2 = [r.solve.ratio_l2 for r in reports if r.solve.ratio_l2 is not None]
        solve_d = [r.solve.ratio_d for r in reports if r.solve.ratio_d is not None]
        return ResolventReportModel(
            side=c.side.value,
            kind=spec.operator_kind.value,
            trials=trials,
            bound=reports[0].bound,
            ratios=ratios,
            max_ratio=max(ratios) if ratios else None,
            max_solve_ratio_l2=max(solve_l2) if solve_l2 else None,
            max_solve_ratio_d=max(solve_d) if solve_d else None,
            constant=first.constant,
            admissible=first.admissible,
            bound_family=first.bound_family,
            passed=passed,
            config=c.echo(),
        )

    # ------------------------------------------------------------------
    # trace-norm
    # ------------------------------------------------------------------

    def run_trace_norm(self) -> TraceNormReportModel:
        c = self.config
        estimate = self.trace_estimate()
        return TraceNormReportModel(
            res=list(self.grid().res),
            estimate=estimate,
            safety=c.trace_safety,
            safe_value=c.trace_safety * estimate,
            config=c.echo(),
        )


def plot_script(csv_path: Path, kind: str) -> str:
    """gnuplot script drawing the admissible set of a region CSV"""
    return "\n".join([
        f"# admissible region: {kind}",
        'set datafile separator ","',
        "set key autotitle columnhead",
        'set xlabel "s0"',
        'set ylabel "s1"',
        "set palette defined (0 'white', 1 'navy')",
        "set cbrange [0:1]",
        "unset colorbox",
        f"plot '{csv_path.name}' using 1:2:3 with points pt 5 ps 0.5 palette notitle",
        "",
    ])
