"""Command-line front end for the RSS localization bounds toolkit."""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml

from .geometry.ellipse import ConfidenceScale
from .propagation.nuisance import Nuisance
from .reporting.analysis import analyze_scenario, is_report, write_report
from .reporting.summary import write_markdown
from .reporting.svg import EllipseKind, render_svg
from .reporting.table import run_sweep, summarize_table, write_table
from .scenario.loader import load_scenario, parse_scenario, serialize_scenario
from .scenario.presets import PRESETS
from .scenario.schema import SCHEMA_TEXT
from .scenario.sweep import parse_values
from .utils.errors import (
    BelowReferenceDistanceError,
    BoundsError,
    DegenerateInputError,
    EmptyParameterVectorError,
    IllConditionedSubtractionError,
    InsufficientConvergenceError,
    NotPSDError,
    PreconditionViolationError,
    ScenarioParseError,
    ScenarioValidationError,
    SingularBlockError,
    SingularFimError,
    UnknownNodeIdError,
    UnknownParameterPathError,
)
from .utils.logger import get_logger, setup_logger
from .utils.progress import set_progress_enabled
from .utils.settings import SettingsLoader
from .utils.yaml_io import dump_yaml
from .verification.suites import SUITES, BoundVerifier

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_UNIDENTIFIABLE = 2
EXIT_VERIFICATION_FAILED = 3

_INPUT_ERRORS = (
    ScenarioParseError,
    ScenarioValidationError,
    UnknownParameterPathError,
    UnknownNodeIdError,
    BelowReferenceDistanceError,
    PreconditionViolationError,
    DegenerateInputError,
)
_UNIDENTIFIABLE_ERRORS = (
    SingularFimError,
    SingularBlockError,
    NotPSDError,
    EmptyParameterVectorError,
    IllConditionedSubtractionError,
)


def exit_code_for(error: BaseException) -> int:
    """Exit code of the CLI contract for an error."""
    if isinstance(error, _INPUT_ERRORS):
        return EXIT_INPUT_ERROR
    if isinstance(error, _UNIDENTIFIABLE_ERRORS):
        return EXIT_UNIDENTIFIABLE
    if isinstance(error, InsufficientConvergenceError):
        return EXIT_VERIFICATION_FAILED
    return EXIT_INPUT_ERROR


def _emit(text: str, out: Optional[Path]) -> None:
    """Write to a file, or to stdout when no file is given."""
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.info(f"Output saved: {out}")


def _split_ids(text: Optional[str]) -> List[str]:
    return [part.strip() for part in (text or '').split(',') if part.strip()]


class BoundsToolkit:
    """Runs the analyze, sweep, plot, verify and preset commands."""

    def __init__(self, config_path: Path = Path("config.yaml")):
        """
        Initialize toolkit.

        Args:
            config_path: Path to config.yaml
        """
        self.config_path = Path(config_path)
        self.settings = SettingsLoader(self.config_path)
        self.workers = self.settings.worker_count()
        self._default_k = self.settings.get('analysis', 'confidence_k', 1.0)
        logger.info(f"Initialized BoundsToolkit ({self.workers} worker(s))")

    def _load(self, path: Path):
        scenario = load_scenario(path, self.settings.get_section('model'), self._default_k)
        logger.info(f"Scenario: {scenario.n} anchors ({scenario.u} uncertain), {scenario.s} sources")
        return scenario

    def analyze(
        self,
        scenario_path: Path,
        out: Optional[Path] = None,
        node_ids: Sequence[str] = (),
        nuisance: Optional[str] = None,
        include_timing: bool = False,
        markdown: Optional[Path] = None
    ) -> Dict[str, Any]:
        """Write the AnalysisReport of a scenario file."""
        scenario = self._load(scenario_path)
        report = analyze_scenario(
            scenario,
            node_ids=node_ids,
            nuisance=Nuisance(nuisance) if nuisance else None,
            include_timing=include_timing,
        )
        if out is None:
            _emit(dump_yaml(report), None)
        else:
            write_report(report, out)
        if markdown is not None:
            write_markdown(report, markdown)
        return report

    def sweep(
        self,
        scenario_path: Path,
        axis: str,
        values: str,
        out: Optional[Path] = None,
        strict: bool = False
    ):
        """Write the sweep table of one axis."""
        scenario = self._load(scenario_path)
        table = run_sweep(scenario, axis, parse_values(values), strict=strict, workers=self.workers)
        if out is None:
            _emit(table.to_csv(index=False, float_format='%.17g', lineterminator='\n'), None)
        else:
            write_table(table, out)
        for node_id, stats in summarize_table(table).items():
            logger.info(f"  {node_id}: PEB {stats['peb_min_m']:.4g} .. {stats['peb_max_m']:.4g} m "
                        f"over {stats['points']} points")
        return table

    def plot(
        self,
        input_path: Path,
        out: Optional[Path] = None,
        k: Optional[float] = None,
        node_ids: Sequence[str] = (),
        ellipse: str = EllipseKind.BOTH.value
    ) -> str:
        """Render a report, or a scenario analyzed on the fly, as SVG."""
        with open(input_path, 'r', encoding='utf-8') as f:
            text = f.read()
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError:
            document = None
        if is_report(document):
            report = document
        else:
            report = analyze_scenario(parse_scenario(text, self.settings.get_section('model'), self._default_k))

        scale = k if k is not None else float(report['confidence_k'])
        svg = render_svg(report, scale, node_ids, EllipseKind(ellipse), self.settings.get_section('plot'))
        _emit(svg, out)
        return svg

    def verify(
        self,
        scenario_path: Path,
        suite: Optional[str] = None,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        confidence_p: Optional[float] = None,
        out: Optional[Path] = None
    ) -> Dict[str, Any]:
        """Run a verification suite and write its pass/fail report."""
        scenario = self._load(scenario_path)
        verifier = BoundVerifier(self.config_path, workers=self.workers)
        confidence = ConfidenceScale.from_probability(confidence_p) if confidence_p is not None else None
        result = verifier.run(
            scenario,
            suite or verifier.settings['suite'],
            trials=trials,
            seed=seed,
            confidence=confidence,
        )
        _emit(dump_yaml(result), out)
        return result

    def preset(self, name: str, out: Optional[Path] = None) -> str:
        """Write a ready-made scenario document."""
        if name not in PRESETS:
            raise ValueError(f"Unknown preset '{name}'; available: {', '.join(PRESETS)}")
        text = serialize_scenario(PRESETS[name]())
        _emit(text, out)
        return text


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="rss-bounds",
        description="Localization bounds (FIM, CRLB, Information/Error Ellipses, PEB) for RSS sources "
                    "with uncertain anchors",
        epilog="Exit codes: 0 success, 1 input error, 2 unidentifiable scenario, 3 verification failure. "
               "Worker count: RSSBOUNDS_WORKERS.",
    )
    parser.add_argument('--schema', action='store_true', help='Print the scenario schema and exit')
    parser.add_argument('--config', type=Path, default=Path('config.yaml'), help='Path to config file')
    parser.add_argument('--log-file', type=Path, default=None, help='Also write logs to this file')
    parser.add_argument('--verbose', action='store_true', help='Log at DEBUG level')
    parser.add_argument('--no-progress', action='store_true', help='Disable progress bars')

    commands = parser.add_subparsers(dest='command')

    analyze = commands.add_parser('analyze', help='Bounds of every unknown-position node')
    analyze.add_argument('scenario', type=Path)
    analyze.add_argument('--out', type=Path, default=None, help='Report file (stdout when omitted)')
    analyze.add_argument('--nodes', default=None, help='Comma-separated node ids to report')
    analyze.add_argument('--nuisance', choices=[n.value for n in Nuisance], default=None,
                         help='Also report the equivalent FIM for an unknown model parameter')
    analyze.add_argument('--include-timing', action='store_true', help='Record wall-clock time in the report')
    analyze.add_argument('--markdown', type=Path, default=None, help='Also write a markdown summary')

    sweep = commands.add_parser('sweep', help='Bounds over one swept parameter')
    sweep.add_argument('scenario', type=Path)
    sweep.add_argument('--axis', required=True, help='e.g. source.x, sources.s1.y, delta, n, model.gamma')
    sweep.add_argument('--values', required=True, help='"a,b,c" or inclusive "start:stop:step"')
    sweep.add_argument('--out', type=Path, default=None, help='CSV file (stdout when omitted)')
    sweep.add_argument('--strict', action='store_true', help='Fail on the first unusable sweep point')

    plot = commands.add_parser('plot', help='SVG of anchors, sources and ellipses')
    plot.add_argument('input', type=Path, help='Analysis report or scenario file')
    plot.add_argument('--out', type=Path, default=None, help='SVG file (stdout when omitted)')
    plot.add_argument('--k', type=float, default=None, help='Confidence scale (report value when omitted)')
    plot.add_argument('--nodes', default=None, help='Comma-separated node ids to draw')
    plot.add_argument('--ellipse', choices=[e.value for e in EllipseKind], default=EllipseKind.BOTH.value)

    verify = commands.add_parser('verify', help='Check the bounds against numerical oracles')
    verify.add_argument('scenario', type=Path)
    verify.add_argument('--suite', choices=SUITES, default=None)
    verify.add_argument('--trials', type=int, default=None)
    verify.add_argument('--seed', type=int, default=None)
    verify.add_argument('--confidence-p', type=float, default=None, help='P_e of the coverage check')
    verify.add_argument('--out', type=Path, default=None, help='Verification report (stdout when omitted)')

    preset = commands.add_parser('preset', help='Write a ready-made scenario')
    preset.add_argument('name', nargs='?', default=None, help=f"One of: {', '.join(PRESETS)}")
    preset.add_argument('--list', action='store_true', help='List preset names')
    preset.add_argument('--out', type=Path, default=None, help='Scenario file (stdout when omitted)')

    return parser


def run_command(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    """Dispatch parsed arguments; returns the exit code."""
    if args.schema:
        sys.stdout.write(SCHEMA_TEXT)
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_INPUT_ERROR
    if args.command == 'preset' and (args.list or args.name is None):
        sys.stdout.write('\n'.join(PRESETS) + '\n')
        return EXIT_OK

    toolkit = BoundsToolkit(args.config)
    if args.command == 'analyze':
        toolkit.analyze(args.scenario, args.out, _split_ids(args.nodes), args.nuisance,
                        args.include_timing, args.markdown)
    elif args.command == 'sweep':
        toolkit.sweep(args.scenario, args.axis, args.values, args.out, args.strict)
    elif args.command == 'plot':
        toolkit.plot(args.input, args.out, args.k, _split_ids(args.nodes), args.ellipse)
    elif args.command == 'verify':
        result = toolkit.verify(args.scenario, args.suite, args.trials, args.seed, args.confidence_p, args.out)
        if not result['passed']:
            logger.error(f"Verification suite '{result['suite']}' failed {result['failed_checks']} check(s)")
            return EXIT_VERIFICATION_FAILED
    elif args.command == 'preset':
        toolkit.preset(args.name, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logger("src", log_file=args.log_file, level=10 if args.verbose else 20)
    set_progress_enabled(not args.no_progress)

    start_time = time.perf_counter()
    try:
        code = run_command(args, parser)
    except BoundsError as e:
        code = exit_code_for(e)
        logger.error(str(e))
    except (ValueError, OSError) as e:
        code = EXIT_INPUT_ERROR
        logger.error(str(e))

    logger.debug(f"Finished in {time.perf_counter() - start_time:.3f} s with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
