"""Command-line handler."""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config.settings import settings
from services.burgers import BurgersSolution, burgers_residual, hopf_cole, invariant_family
from services.heat import HeatCatalog, catalog_payload, validate_heat
from services.symmetry import (
    BASIS_NAMES,
    GBElement,
    PointTransformation,
    apply_point_transformation,
    check_heat_invariance,
    commutator_table,
)
from services.verify import Grid, Status
from tools.acceptance import run_selftest
from tools.export import export_samples
from tools.payloads import (
    ExitCode,
    build_operator,
    dump_json,
    exit_code_for,
    load_operator,
    load_solution,
    read_json,
    report_payload,
    solution_from_expression,
    verify_operator,
    verify_solution,
)
from utils.errors import ToolkitError, UsageError
from utils.logging_config import setup_logging
from utils.validators import Validators

logger = logging.getLogger(__name__)


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand."""
    default: Dict[str, Any] = {"default": argparse.SUPPRESS} if suppress else {}
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--grid", help="tmin,tmax,nt,xmin,xmax,nx", **default)
    parser.add_argument("--tol", type=float, help="Residual tolerance", **default)
    parser.add_argument("--exclusion-threshold", type=float, help="Pole exclusion threshold", **default)
    parser.add_argument("--seed", type=int, help="Seed for random sampling", **default)
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level on stderr",
        **default,
    )
    return parser


class CommandLine:
    """Argument parsing and one handler per subcommand."""

    def __init__(self) -> None:
        self.parser = self._build_parser()

    def _build_parser(self) -> argparse.ArgumentParser:
        common = _common_flags(suppress=True)
        parser = argparse.ArgumentParser(
            prog=settings.APP_NAME,
            description="Reduction operators and exact solutions of u_t + u*u_x + u_xx = 0",
            parents=[_common_flags(suppress=False)],
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
        commands = parser.add_subparsers(dest="command", required=True)

        catalog = commands.add_parser("catalog", parents=[common], help="List catalog entries")
        catalog.add_argument("kind", choices=["heat"])
        catalog.set_defaults(handler=self.handle_catalog)

        gen_heat = commands.add_parser("gen-heat", parents=[common], help="Check a heat solution")
        source = gen_heat.add_mutually_exclusive_group(required=True)
        source.add_argument("--label", help="Catalog label such as h3, e(1/2), trig(1,0), kernel")
        source.add_argument("--expr", help="Expression in t and x")
        gen_heat.set_defaults(handler=self.handle_gen_heat)

        hopf = commands.add_parser("hopf-cole", parents=[common], help="u = 2v_x/v")
        hopf.add_argument("--heat", required=True, help="Heat label or expression")
        hopf.set_defaults(handler=self.handle_hopf_cole)

        family = commands.add_parser("invariant-family", parents=[common], help="u = 2(c.v_x)/(c.v)")
        family.add_argument("--triple", required=True, help="l1,l2,l3")
        family.add_argument("--c", required=True, help="c1,c2,c3")
        family.set_defaults(handler=self.handle_invariant_family)

        make = commands.add_parser("make-operator", parents=[common], help="Construct a reduction operator")
        make.add_argument("--class", dest="operator_class", required=True, choices=["nogo", "lie", "singular", "trivial"])
        make.add_argument("--heat-triple", help="l1,l2,l3 (nogo)")
        make.add_argument("--representation", choices=["heat", "burgers"], default="heat")
        make.add_argument("--c", help="c0,c1,c2,c3,c4 (lie)")
        make.add_argument("--phi", help="Phi(t, x, u) (singular)")
        make.set_defaults(handler=self.handle_make_operator)

        verify_op = commands.add_parser("verify-operator", parents=[common], help="Check determining systems")
        verify_op.add_argument("--op", default="-", help="Operator JSON file, - for stdin")
        verify_op.add_argument("--against-solution", help="Solution JSON file checked for Q[u] = 0")
        verify_op.set_defaults(handler=self.handle_verify_operator)

        verify_sol = commands.add_parser("verify-solution", parents=[common], help="Check L[u] = 0")
        given = verify_sol.add_mutually_exclusive_group(required=True)
        given.add_argument("--expr", help="Expression in t and x")
        given.add_argument("--solution", help="Solution JSON file, - for stdin")
        verify_sol.set_defaults(handler=self.handle_verify_solution)

        lie = commands.add_parser("lie", parents=[common], help="Symmetry algebra and group")
        lie_commands = lie.add_subparsers(dest="lie_command", required=True)
        table = lie_commands.add_parser("commutator-table", parents=[common])
        table.set_defaults(handler=self.handle_commutator_table)
        transform = lie_commands.add_parser("transform", parents=[common])
        transform.add_argument("--params", required=True, help="alpha,beta,gamma,delta,kappa,mu0,mu1")
        transform.add_argument("--solution", required=True, help="Solution JSON file, - for stdin")
        transform.set_defaults(handler=self.handle_transform)
        invariance = lie_commands.add_parser("prop2-check", parents=[common])
        invariance.add_argument("--heat", required=True, help="Heat label or expression")
        invariance.add_argument("--element", required=True, help="c0,c1,c2,c3,c4")
        invariance.add_argument("--mu", default="0", help="Rational mu")
        invariance.set_defaults(handler=self.handle_heat_invariance)

        export = commands.add_parser("export", parents=[common], help="Sample a solution to CSV")
        sample = export.add_mutually_exclusive_group(required=True)
        sample.add_argument("--solution", help="Solution JSON file, - for stdin")
        sample.add_argument("--expr", help="Expression in t and x")
        export.add_argument("--output", required=True, help="CSV path")
        export.set_defaults(handler=self.handle_export)

        selftest = commands.add_parser("selftest", parents=[common], help="Run the acceptance suite")
        selftest.add_argument("--only", help="Comma-separated criterion numbers")
        selftest.set_defaults(handler=self.handle_selftest)

        return parser

    # Flag helpers

    @staticmethod
    def _require(check: Callable[..., Any], *values: Any) -> None:
        valid, error = check(*values)
        if not valid:
            raise UsageError(error)

    def _validate_globals(self, args: argparse.Namespace) -> None:
        if args.grid is not None:
            self._require(Validators.validate_grid_spec, args.grid)
        if args.tol is not None:
            self._require(Validators.validate_tolerance, args.tol)
        if args.exclusion_threshold is not None:
            self._require(Validators.validate_tolerance, args.exclusion_threshold)

    @staticmethod
    def _grid(args: argparse.Namespace, backward: bool = False) -> Optional[Grid]:
        """The grid the flags ask for, or None to let each object pick its default."""
        overrides = {}
        if args.exclusion_threshold is not None:
            overrides["exclusion_threshold"] = args.exclusion_threshold
        if args.grid is not None:
            return Grid.parse(args.grid, **overrides)
        if not overrides:
            return None
        grid = Grid(**overrides)
        return grid.backward() if backward else grid

    @staticmethod
    def _rationals(text: str, count: int) -> List[str]:
        CommandLine._require(Validators.validate_rationals, text, count)
        return Validators.split_list(text)

    @staticmethod
    def _emit(payload: Any) -> None:
        sys.stdout.write(dump_json(payload) + "\n")

    @staticmethod
    def _summary(text: str) -> None:
        sys.stderr.write(text + "\n")

    def _finish(self, payload: Dict[str, Any], status: Status, what: str) -> int:
        self._emit(payload)
        self._summary(f"{what}: {status.value}")
        return int(exit_code_for(status))

    # Handlers

    def handle_catalog(self, args: argparse.Namespace) -> int:
        entries = catalog_payload()
        self._emit({"heat": entries})
        self._summary(f"{len(entries)} heat solutions")
        return int(ExitCode.OK)

    def handle_gen_heat(self, args: argparse.Namespace) -> int:
        text = args.label if args.label is not None else Validators.sanitize_expression(args.expr)
        solution = HeatCatalog.get(text) if args.label is not None else HeatCatalog.resolve(text)
        report = validate_heat(solution, self._grid(args, solution.backward_time), args.tol)
        payload = {
            "heat": solution.model_dump(mode="json", include={"label", "expression", "singular_locus_hint"}),
            "report": report_payload(report),
        }
        return self._finish(payload, report.status, f"heat residual of {solution.label}")

    def _solution_result(self, solution: BurgersSolution, args: argparse.Namespace, **extra: Any) -> int:
        report = burgers_residual(solution, self._grid(args, solution.backward_time), args.tol)
        payload = {**extra, "solution": solution.model_dump(mode="json"), "report": report_payload(report)}
        return self._finish(payload, report.status, f"Burgers residual of {solution.expression}")

    def handle_hopf_cole(self, args: argparse.Namespace) -> int:
        heat = HeatCatalog.resolve(Validators.sanitize_expression(args.heat))
        return self._solution_result(hopf_cole(heat), args)

    def handle_invariant_family(self, args: argparse.Namespace) -> int:
        self._require(Validators.validate_heat_labels, args.triple)
        constants = self._rationals(args.c, 3)
        triple = HeatCatalog.triple(Validators.split_labels(args.triple))
        return self._solution_result(invariant_family(triple, *constants), args)

    def handle_make_operator(self, args: argparse.Namespace) -> int:
        heat_triple = None
        if args.heat_triple is not None:
            self._require(Validators.validate_heat_labels, args.heat_triple)
            heat_triple = Validators.split_labels(args.heat_triple)
        constants = self._rationals(args.c, 5) if args.c is not None else None
        phi = Validators.sanitize_expression(args.phi) if args.phi is not None else None
        operator = build_operator(args.operator_class, heat_triple, args.representation, constants, phi)
        self._emit({"operator": operator.payload()})
        self._summary(f"{operator.kind.value} operator: {operator}")
        return int(ExitCode.OK)

    def handle_verify_operator(self, args: argparse.Namespace) -> int:
        operator = load_operator(read_json(args.op))
        solution = load_solution(read_json(args.against_solution)) if args.against_solution else None
        result = verify_operator(operator, self._grid(args, operator.backward_time), args.tol, solution)
        return self._finish(result.model_dump(mode="json", exclude_none=True), result.status, f"{operator.kind.value} operator")

    def handle_verify_solution(self, args: argparse.Namespace) -> int:
        if args.expr is not None:
            solution = solution_from_expression(Validators.sanitize_expression(args.expr))
        else:
            solution = load_solution(read_json(args.solution))
        report = verify_solution(solution, self._grid(args, solution.backward_time), args.tol)
        payload = {"solution": solution.model_dump(mode="json"), "report": report_payload(report)}
        return self._finish(payload, report.status, f"Burgers residual of {solution.expression}")

    def handle_commutator_table(self, args: argparse.Namespace) -> int:
        table = commutator_table()
        self._emit(
            {
                "basis": list(BASIS_NAMES),
                "table": [[str(entry) for entry in row] for row in table],
                "coefficients": [[[str(c) for c in entry.coefficients] for entry in row] for row in table],
            }
        )
        self._summary("commutator table of P_t, D, K, P_x, G")
        return int(ExitCode.OK)

    def handle_transform(self, args: argparse.Namespace) -> int:
        params = self._rationals(args.params, 7)
        transformation = PointTransformation.of(*params)
        solution = load_solution(read_json(args.solution))
        image = apply_point_transformation(transformation, solution)
        return self._solution_result(image, args, transformation=[str(p) for p in transformation.params])

    def handle_heat_invariance(self, args: argparse.Namespace) -> int:
        element = GBElement.of(*self._rationals(args.element, 5))
        mu = self._rationals(args.mu, 1)[0]
        heat = HeatCatalog.resolve(Validators.sanitize_expression(args.heat))
        report = check_heat_invariance(heat, element, mu, self._grid(args, heat.backward_time), args.tol)
        payload = {"element": str(element), "mu": mu, **report.model_dump(mode="json", exclude_none=True)}
        return self._finish(payload, report.status, f"invariance correspondence for {element} on {heat.label}")

    def handle_export(self, args: argparse.Namespace) -> int:
        self._require(Validators.validate_output_path, args.output)
        if args.expr is not None:
            solution = solution_from_expression(Validators.sanitize_expression(args.expr))
        else:
            solution = load_solution(read_json(args.solution))
        result = export_samples(solution, self._grid(args, solution.backward_time), args.output)
        return self._finish(result.model_dump(mode="json"), result.status, f"exported {result.rows} rows")

    def handle_selftest(self, args: argparse.Namespace) -> int:
        numbers = None
        if args.only:
            self._require(Validators.validate_criteria, args.only)
            numbers = [int(n) for n in Validators.split_list(args.only)]
        report = run_selftest(args.seed, numbers)
        for criterion in report.criteria:
            self._summary(
                f"[{criterion.status.value:>12}] {criterion.number:>2}. {criterion.name} "
                f"({criterion.checks} checks, worst {criterion.worst_residual:.2e}, {criterion.seconds:.1f}s)"
            )
            for failure in criterion.failures:
                self._summary(f"{'':>16}{failure}")
        return self._finish(report.model_dump(mode="json"), report.status, "selftest")

    def run(self, argv: Sequence[str]) -> int:
        try:
            args = self.parser.parse_args(list(argv))
        except SystemExit as e:
            return int(e.code) if isinstance(e.code, int) else int(ExitCode.USAGE)

        if args.log_level:
            setup_logging(args.log_level)

        try:
            self._validate_globals(args)
            return args.handler(args)
        except (UsageError, ValidationError, OSError) as e:
            logger.debug(f"Usage error in {args.command}: {e}", exc_info=True)
            self._emit({"error": str(e), "type": type(e).__name__})
            self._summary(f"error: {e}")
            return int(ExitCode.USAGE)
        except ToolkitError as e:
            logger.error(f"{args.command} failed: {e}", exc_info=True)
            self._emit({"error": str(e), "type": type(e).__name__})
            self._summary(f"error: {e}")
            return int(ExitCode.FAIL)


def dispatch(argv: Sequence[str]) -> int:
    """Run one command line and return its exit code."""
    return CommandLine().run(argv)
