"""
The ``urnlab`` command line.
"""
from __future__ import annotations

from datetime import datetime, timezone
from fractions import Fraction
from importlib import metadata
from json import JSONDecodeError
import argparse
import csv
import io
import json
import logging
import os
import sys

from attrs import define, field, frozen
from attrs.validators import gt, in_
from jsonschema.exceptions import best_match

from urnlab import _schemas
from urnlab._utils import (
    complex_pair,
    format_multi_index,
    log_factor,
    parse_integers,
    parse_numbers,
    real_number,
)
from urnlab.cone import cone_certificate
from urnlab.exceptions import (
    InvalidUrn,
    NotSmall,
    Reducible,
    UrnError,
)
from urnlab.moments import exact_moment_series
from urnlab.montecarlo import mc_standardized_moments
from urnlab.polynomials import MultiIndex, UPolynomial, phi_matrix
from urnlab.reduction import compute_power_sets, reduced_polynomial
from urnlab.spectral import ARITHMETIC_MODES, classify, decompose
from urnlab.urn import UrnSpec, simulate, validate
from urnlab.verify import run_acceptance

#: exit status for unreadable input and invalid specifications
EXIT_INPUT = 2
#: exit status when the urn's class precludes the request
EXIT_PRECLUDED = 3
#: exit status for failed checks
EXIT_FAILED = 1

COMMANDS = (
    "classify",
    "simulate",
    "phi-matrix",
    "qpoly",
    "cone",
    "moments",
    "verify",
)
_TABLES = {"simulate", "moments"}
_NEEDS_ALPHA = {"phi-matrix", "qpoly"}
_DEFAULT_NMAX = {"simulate": 1000, "moments": 1000, "verify": 2 ** 17}


class _CannotLoadFile(Exception):
    pass


class _InvalidOutput(Exception):
    pass


def _tolerance(instance, attribute, value):
    if not 0 < value < 1e-2:
        raise ValueError(f"{attribute.name} must be in (0, 1e-2), not {value}")


def _seed(instance, attribute, value):
    if not 0 <= value < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit value, not {value}")


def _default_threads() -> int:
    configured = os.environ.get("URNLAB_THREADS")
    if configured:
        return int(configured)
    return os.cpu_count() or 1


@frozen
class RunConfig:
    """
    One invocation of the command line, validated.
    """

    command: str = field(validator=in_(COMMANDS))
    input: str | None = None
    output: str | None = None
    format: str = field(default="json", validator=in_(("json", "csv")))
    seed: int = field(default=0, validator=_seed)
    threads: int = field(factory=_default_threads, validator=gt(0))
    n_max: int = field(default=1000, validator=gt(0))
    mc_samples: int = field(default=200_000, validator=gt(0))
    degree_cap: int = field(default=6, validator=gt(0))
    tolerance_eigen: float = field(default=1e-7, validator=_tolerance)
    arith: str = field(default="auto", validator=in_(ARITHMETIC_MODES))
    reproducible: bool = False
    verbosity: int = 0
    alpha: tuple[int, ...] | None = None
    point: tuple[float, ...] | None = None
    mode: str = field(default="exact", validator=in_(("exact", "mc")))
    w: tuple[float, ...] | None = None
    n: int = field(default=10_000, validator=gt(0))


@define
class _JSONFormatter:

    def document(self, document):
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    def table(self, header, rows):
        return self.document([dict(zip(header, row)) for row in rows])


@define
class _CSVFormatter:

    def document(self, document):
        raise ValueError("reports are only available as JSON")

    def table(self, header, rows):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()


@define
class _Outputter:

    _formatter = field()
    _stdout = field()
    _stderr = field()
    _path: str | None = field(default=None)

    @classmethod
    def from_config(cls, config, stdout, stderr):
        formatter = _CSVFormatter() if config.format == "csv" else (
            _JSONFormatter()
        )
        return cls(
            formatter=formatter,
            stdout=stdout,
            stderr=stderr,
            path=config.output,
        )

    def load(self, path, stdin):
        if path in (None, "-"):
            file, path = stdin, "<stdin>"
        else:
            try:
                file = open(path)  # noqa: SIM115, PTH123
            except FileNotFoundError as error:
                self.error(f"{path!r} does not exist.")
                raise _CannotLoadFile() from error
        try:
            return json.load(file)
        except JSONDecodeError as error:
            self.error(f"Failed to parse {path}: {error}")
            raise _CannotLoadFile() from error
        finally:
            if file is not stdin:
                file.close()

    def error(self, message):
        self._stderr.write(f"{message}\n")

    def _write(self, text):
        if self._path is None:
            self._stdout.write(text)
            return
        with open(self._path, "w", encoding="utf-8") as file:  # noqa: PTH123
            file.write(text)

    def document(self, schema, document):
        validator = _schemas.validator_for(schema)
        error = best_match(validator.iter_errors(document))
        if error is not None:
            self.error(
                f"Produced an invalid {schema} document: {error.message}",
            )
            raise _InvalidOutput() from error
        self._write(self._formatter.document(document))

    def table(self, header, rows):
        self._write(self._formatter.table(header, rows))


def _integers(text):
    try:
        return parse_integers(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not a comma-separated list of integers",
        ) from None


def _numbers(text):
    try:
        return parse_numbers(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not a comma-separated list of numbers",
        ) from None


_common = argparse.ArgumentParser(add_help=False)
_common.add_argument(
    "-i", "--input",
    help="a path to an urn specification (JSON); '-' reads standard input",
)
_common.add_argument(
    "-o", "--output",
    help="write the report to this path instead of standard output",
)
_common.add_argument(
    "--format",
    choices=["json", "csv"],
    help="""
        the report format. Tables (simulate, moments) default to csv,
        everything else is JSON only.
    """,
)
_common.add_argument("--seed", type=int, default=0, help="the random seed")
_common.add_argument(
    "--threads",
    type=int,
    help="""
        worker threads, by default $URNLAB_THREADS or the number of
        logical cores
    """,
)
_common.add_argument(
    "--nmax",
    type=int,
    dest="n_max",
    help="the largest number of draws (grid end for verify)",
)
_common.add_argument(
    "--mc-samples",
    type=int,
    default=200_000,
    help="the number of simulated trajectories",
)
_common.add_argument(
    "--degree-cap",
    type=int,
    default=6,
    help="the largest power degree to reduce or check",
)
_common.add_argument(
    "--tolerance-eigen",
    type=float,
    default=1e-7,
    help="the eigenvalue clustering tolerance in float mode",
)
_common.add_argument(
    "--arith",
    choices=ARITHMETIC_MODES,
    default="auto",
    help="exact rational or floating point arithmetic",
)
_common.add_argument(
    "--reproducible",
    action="store_true",
    help="omit the creation timestamp, so reports are byte-identical",
)
_common.add_argument(
    "-v", "--verbose",
    action="count",
    default=0,
    dest="verbosity",
    help="log more (repeat for debug output)",
)

parser = argparse.ArgumentParser(
    prog="urnlab",
    description="Balanced Polya urn analysis",
)
parser.add_argument(
    "--version",
    action="version",
    version=metadata.version("urnlab"),
)
_commands = parser.add_subparsers(dest="command", metavar="command")
_commands.add_parser(
    "classify",
    parents=[_common],
    help="spectral decomposition and classification",
)
_commands.add_parser(
    "simulate",
    parents=[_common],
    help="simulate one trajectory",
)
for _name, _help in [
    ("phi-matrix", "the transition operator below a power"),
    ("qpoly", "the reduced polynomial of a power"),
]:
    _commands.add_parser(_name, parents=[_common], help=_help).add_argument(
        "--alpha",
        type=_integers,
        help="the power, as comma-separated exponents",
    )
_commands.add_parser(
    "cone",
    parents=[_common],
    help="cone membership with a certificate",
).add_argument(
    "--point",
    type=_numbers,
    required=True,
    help="the point, as comma-separated coordinates",
)
_moments = _commands.add_parser(
    "moments",
    parents=[_common],
    help="exact or Monte Carlo moments",
)
_moments.add_argument("--alpha", type=_integers, help="the power for --exact")
_mode = _moments.add_mutually_exclusive_group()
_mode.add_argument(
    "--exact",
    action="store_const",
    const="exact",
    dest="mode",
    help="E u^alpha(X_n) from the exact moment recursion (the default)",
)
_mode.add_argument(
    "--mc",
    action="store_const",
    const="mc",
    dest="mode",
    help="standardized moments of w . X_n by simulation",
)
_verify = _commands.add_parser(
    "verify",
    parents=[_common],
    help="run the acceptance suite",
)
for _each in (_moments, _verify):
    _each.add_argument(
        "--w",
        type=_numbers,
        help="the observable direction, by default 1,-1,0,...",
    )
    _each.add_argument(
        "--n",
        type=int,
        default=10_000,
        help="the number of draws for Monte Carlo",
    )


def parse_args(args) -> RunConfig:
    arguments = vars(parser.parse_args(args=args or ["--help"]))
    command = arguments["command"]
    if command is None:
        parser.error("a command is required")
    if arguments.get("mode") is None:
        arguments["mode"] = "exact"
    if command in _NEEDS_ALPHA or (
        command == "moments" and arguments["mode"] == "exact"
    ):
        if arguments.get("alpha") is None:
            parser.error(f"{command} needs --alpha")
    if arguments["format"] is None:
        arguments["format"] = "csv" if command in _TABLES else "json"
    elif arguments["format"] == "csv" and command not in _TABLES:
        parser.error(f"{command} reports are only available as JSON")
    if arguments["n_max"] is None:
        arguments["n_max"] = _DEFAULT_NMAX.get(command, 1000)
    if arguments["threads"] is None:
        del arguments["threads"]
    try:
        return RunConfig(**arguments)
    except ValueError as error:
        parser.error(str(error))


def main(args=sys.argv[1:]):
    sys.exit(run(parse_args(args=args)))


def _envelope(config, spec=None):
    envelope = {
        "urnlab_version": metadata.version("urnlab"),
        "command": config.command,
    }
    if not config.reproducible:
        envelope["created"] = datetime.now(timezone.utc).isoformat(
            timespec="seconds",
        )
    if spec is not None:
        envelope["name"] = spec.name
    return envelope


def _plain(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    return value


def _classify(config, outputter, spec, dec):
    urn_class = classify(dec)
    outputter.document(
        "classify",
        {
            **_envelope(config, spec),
            "lambda": [complex_pair(each) for each in dec.eigenvalues],
            "class": urn_class.kind.value,
            "sigma2": None if urn_class.sigma2 is None else real_number(
                urn_class.sigma2,
            ),
            "d": urn_class.d,
            "nu": urn_class.nu,
            "v1": [real_number(each) for each in dec.v1],
            "m": real_number(spec.m),
            "arithmetic": "rational" if dec.exact else "float",
            "critical": [
                complex_pair(dec.eigenvalues[k]) for k in urn_class.critical
            ],
            "blocks": [
                {
                    "eigenvalue": complex_pair(block.eigenvalue),
                    "start": block.start,
                    "size": block.size,
                }
                for block in dec.blocks
            ],
        },
    )
    return 0


def _simulate(config, outputter, spec, dec):
    trajectory = simulate(spec, config.n_max, config.seed)
    outputter.table(
        ["n", *(f"x_{k + 1}" for k in range(spec.s))],
        [
            [state.n, *(_plain(each) for each in state.x)]
            for state in trajectory.states
        ],
    )
    return 0


def _check_alpha(config, dec):
    if len(config.alpha) != dec.s:
        raise ValueError(
            f"--alpha has {len(config.alpha)} entries for {dec.s} colours",
        )
    return MultiIndex(config.alpha)


def _phi_matrix(config, outputter, spec, dec):
    alpha = _check_alpha(config, dec)
    matrix = phi_matrix(alpha, dec, n_jobs=config.threads)
    outputter.document(
        "phi-matrix",
        {
            **_envelope(config, spec),
            "alpha": format_multi_index(alpha),
            "basis": [format_multi_index(beta) for beta in matrix.basis],
            "matrix": [
                [complex_pair(each) for each in row] for row in matrix.matrix
            ],
        },
    )
    return 0


def _qpoly(config, outputter, spec, dec):
    alpha = _check_alpha(config, dec)
    reduced = reduced_polynomial(alpha, dec, budget=config.degree_cap)
    sets = compute_power_sets(alpha, dec)
    outputter.document(
        "qpoly",
        {
            **_envelope(config, spec),
            "alpha": format_multi_index(alpha),
            "eigenvalue": complex_pair(reduced.eigenvalue),
            "nu": reduced.nu,
            "terms": [
                {
                    "power": format_multi_index(beta),
                    "coefficient": complex_pair(coefficient),
                }
                for beta, coefficient in reduced.Q
            ],
            "power_sets": {
                "A": [
                    format_multi_index(beta)
                    for beta in sorted(sets.A, key=MultiIndex.key)
                ],
                "K": [
                    format_multi_index(beta)
                    for beta in sorted(sets.K, key=MultiIndex.key)
                ],
            },
        },
    )
    return 0


def _cone(config, outputter, spec, dec):
    certificate = cone_certificate(config.point)
    outputter.document(
        "cone",
        {
            **_envelope(config),
            "point": list(config.point),
            "contained": certificate.contained,
            "violated_face": (
                None if certificate.violated_face is None
                else list(certificate.violated_face)
            ),
            "certificate": [
                {"edge": list(edge), "coefficient": coefficient}
                for edge, coefficient in sorted(
                    certificate.coefficients.items(),
                )
            ] if certificate.feasible else None,
        },
    )
    return 0


def _reference_growth(alpha, dec, urn_class):
    """
    The exponent of ``n`` and of ``log n`` bounding ``E u^alpha(X_n)``.
    """
    exponent = max(
        float(dec.arithmetic.real(alpha.inner(dec))), alpha.degree / 2,
    )
    if alpha.is_strictly_critical(dec):
        return exponent, urn_class.nu * alpha.degree / 2
    return exponent, 0


def _moments(config, outputter, spec, dec):
    if config.mode == "mc":
        return _mc_moments(config, outputter, spec, dec)
    alpha = _check_alpha(config, dec)
    urn_class = classify(dec)
    series = exact_moment_series(
        UPolynomial.monomial(alpha, dec.arithmetic),
        config.n_max,
        dec,
        arithmetic=config.arith,
    )
    exponent, log_exponent = _reference_growth(alpha, dec, urn_class)
    rows = []
    for n, value in zip(series.n, series.values):
        value = complex(value)
        reference = max(n, 1) ** exponent * log_factor(n, log_exponent)
        rows.append(
            [n, repr(value.real), repr(value.imag), repr(reference),
             repr(abs(value) / reference), ""],
        )
    outputter.table(["n", "re", "im", "reference", "ratio", "stderr"], rows)
    return 0


def _mc_moments(config, outputter, spec, dec):
    w = config.w or (1, -1, *[0] * (spec.s - 2))
    moments = mc_standardized_moments(
        spec,
        dec,
        w,
        config.n,
        config.mc_samples,
        config.seed,
        n_jobs=config.threads,
    )
    outputter.table(
        ["n", "k", "value", "reference", "stderr"],
        [
            [config.n, k, repr(value), reference, repr(stderr)]
            for k, value, reference, stderr in zip(
                moments.k, moments.values, moments.reference, moments.stderr,
            )
        ],
    )
    return 0


def _verify(config, outputter, spec, dec):
    report = run_acceptance(
        spec,
        dec,
        seed=config.seed,
        degree_cap=config.degree_cap,
        n_max=config.n_max,
        samples=config.mc_samples,
        mc_n=config.n,
        w=config.w,
        n_jobs=config.threads,
    )
    outputter.document(
        "verify",
        {
            **_envelope(config, spec),
            "class": report.urn_class.kind.value,
            "passed": report.passed,
            "checks": [check.to_json() for check in report.checks],
        },
    )
    for check in report.failures:
        outputter.error(f"check failed: {check.name}")
    return 0 if report.passed else EXIT_FAILED


_HANDLERS = {
    "classify": _classify,
    "simulate": _simulate,
    "phi-matrix": _phi_matrix,
    "qpoly": _qpoly,
    "cone": _cone,
    "moments": _moments,
    "verify": _verify,
}


def _configure_logging(verbosity, stream):
    handler = logging.StreamHandler(stream)
    handler.setFormatter(
        logging.Formatter("%(levelname)s %(name)s: %(message)s"),
    )
    logger = logging.getLogger("urnlab")
    logger.addHandler(handler)
    logger.setLevel(
        [logging.WARNING, logging.INFO, logging.DEBUG][min(verbosity, 2)],
    )
    return logger, handler


def run(config, stdout=sys.stdout, stderr=sys.stderr, stdin=sys.stdin):
    """
    Run one command, returning its exit status.
    """
    outputter = _Outputter.from_config(config, stdout=stdout, stderr=stderr)
    logger, handler = _configure_logging(config.verbosity, stderr)
    try:
        if config.command == "cone":
            return _cone(config, outputter, None, None)
        try:
            instance = outputter.load(config.input, stdin)
        except _CannotLoadFile:
            return EXIT_INPUT
        return _analyse(config, outputter, instance)
    except _InvalidOutput:
        return EXIT_FAILED
    finally:
        logger.removeHandler(handler)


def _analyse(config, outputter, instance):
    try:
        spec = UrnSpec.from_json(instance)
        validate(spec)
        dec = decompose(
            spec,
            arithmetic=config.arith,
            tolerance=config.tolerance_eigen,
        )
        return _HANDLERS[config.command](config, outputter, spec, dec)
    except Reducible as error:
        outputter.error(f"{type(error).__name__}: {error}")
        return EXIT_PRECLUDED
    except InvalidUrn as error:
        outputter.error(f"{type(error).__name__}: {error}")
        return EXIT_INPUT
    except NotSmall as error:
        outputter.error(f"{type(error).__name__}: {error}")
        return EXIT_PRECLUDED
    except (UrnError, ValueError) as error:
        outputter.error(f"{type(error).__name__}: {error}")
        return EXIT_FAILED
