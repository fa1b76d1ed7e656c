from contextlib import redirect_stderr
from importlib import metadata
from io import StringIO
from pathlib import Path
from unittest import TestCase, mock
import builtins
import json
import os
import subprocess
import sys
import tempfile

from attrs import evolve

from urnlab import cli
from urnlab.tests._fixtures import CRITICAL, LARGE, NEGATIVE, STRICTLY_SMALL


def fake_open(all_contents):
    def open(path, *args, **kwargs):
        if args or kwargs:
            return builtins.open(path, *args, **kwargs)
        contents = all_contents.get(path)
        if contents is None:
            raise FileNotFoundError(path)
        return StringIO(contents)
    return open


def spec_json(spec):
    return json.dumps(spec.to_json())


class TestCLI(TestCase):
    def run_cli(
        self, argv, files=None, stdin=None, exit_code=0, **override,
    ):
        config = evolve(cli.parse_args(argv), **override)

        self.assertFalse(hasattr(cli, "open"))
        cli.open = fake_open(files or {})
        try:
            stdout, stderr = StringIO(), StringIO()
            actual_exit_code = cli.run(
                config,
                stdin=StringIO(stdin or ""),
                stdout=stdout,
                stderr=stderr,
            )
        finally:
            del cli.open

        self.assertEqual(
            actual_exit_code, exit_code, msg=streams_message(stdout, stderr),
        )
        return stdout.getvalue(), stderr.getvalue()

    def run_json(self, argv, spec, **kwargs):
        stdout, stderr = self.run_cli(
            [*argv, "--reproducible"], stdin=spec_json(spec), **kwargs,
        )
        return json.loads(stdout), stderr

    def test_classify_critical(self):
        report, stderr = self.run_json(["classify"], CRITICAL)
        self.assertEqual(stderr, "")
        self.assertEqual(report["class"], "CriticallySmall")
        self.assertEqual((report["d"], report["nu"]), (0, 1))
        self.assertEqual(report["lambda"], [[1.0, 0.0], [0.5, 0.0]])
        self.assertEqual(report["sigma2"], 0.5)
        self.assertEqual(report["m"], 4)
        self.assertEqual(report["arithmetic"], "rational")
        self.assertEqual(report["name"], "critical")

    def test_classify_strictly_small(self):
        report, _ = self.run_json(["classify"], STRICTLY_SMALL)
        self.assertEqual(report["class"], "StrictlySmall")
        self.assertEqual(report["nu"], 0)
        self.assertAlmostEqual(report["sigma2"], 1 / 3)

    def test_classify_from_a_file(self):
        stdout, _ = self.run_cli(
            ["classify", "--input", "urn.json", "--reproducible"],
            files={"urn.json": spec_json(NEGATIVE)},
        )
        report = json.loads(stdout)
        self.assertEqual(report["v1"], [1 / 3, 2 / 3])
        self.assertEqual(report["lambda"], [[1.0, 0.0], [-2.0, 0.0]])

    def test_verify_large(self):
        stdout, stderr = self.run_cli(
            ["verify"],
            stdin=spec_json(LARGE),
            exit_code=cli.EXIT_PRECLUDED,
        )
        self.assertEqual(stdout, "")
        self.assertIn("NotSmall: urn is large", stderr)

    def test_moments_csv(self):
        stdout, _ = self.run_cli(
            ["moments", "--alpha", "1,0", "--nmax", "3"],
            stdin=spec_json(STRICTLY_SMALL),
        )
        lines = stdout.splitlines()
        self.assertEqual(lines[0], "n,re,im,reference,ratio,stderr")
        self.assertEqual(
            [line.split(",")[0] for line in lines[1:]], ["0", "1", "2", "3"],
        )
        self.assertAlmostEqual(float(lines[-1].split(",")[1]), 3 + 2 / 3)

    def test_moments_json(self):
        report, _ = self.run_json(
            ["moments", "--alpha", "1,0", "--nmax", "2", "--format", "json"],
            STRICTLY_SMALL,
        )
        self.assertEqual([row["n"] for row in report], [0, 1, 2])

    def test_moments_alpha_of_the_wrong_length(self):
        _, stderr = self.run_cli(
            ["moments", "--alpha", "1,0,0"],
            stdin=spec_json(STRICTLY_SMALL),
            exit_code=cli.EXIT_FAILED,
        )
        self.assertIn("--alpha has 3 entries for 2 colours", stderr)

    def test_simulate(self):
        stdout, _ = self.run_cli(
            ["simulate", "--nmax", "5", "--seed", "3"],
            stdin=spec_json(CRITICAL),
        )
        lines = stdout.splitlines()
        self.assertEqual(lines[0], "n,x_1,x_2")
        self.assertEqual(lines[1], "0,1,1")
        self.assertEqual(len(lines), 7)

    def test_simulate_is_seeded(self):
        argv = ["simulate", "--nmax", "50", "--seed", "8"]
        one, _ = self.run_cli(argv, stdin=spec_json(NEGATIVE))
        two, _ = self.run_cli(argv, stdin=spec_json(NEGATIVE))
        self.assertEqual(one, two)

    def test_qpoly(self):
        report, _ = self.run_json(["qpoly", "--alpha", "0,2"], CRITICAL)
        self.assertEqual(report["alpha"], "0,2")
        self.assertEqual(report["eigenvalue"], [1.0, 0.0])
        self.assertIn("0,2", {term["power"] for term in report["terms"]})

    def test_phi_matrix(self):
        report, _ = self.run_json(["phi-matrix", "--alpha", "0,2"], CRITICAL)
        self.assertEqual(report["alpha"], "0,2")
        size = len(report["basis"])
        self.assertEqual(len(report["matrix"]), size)
        self.assertTrue(all(len(row) == size for row in report["matrix"]))

    def test_cone_boundary(self):
        stdout, _ = self.run_cli(
            ["cone", "--point", "2,-1,0", "--reproducible"],
        )
        report = json.loads(stdout)
        self.assertTrue(report["contained"])
        self.assertIsNone(report["violated_face"])
        self.assertTrue(report["certificate"])

    def test_cone_outside(self):
        stdout, _ = self.run_cli(["cone", "--point", "0,-1,0"])
        report = json.loads(stdout)
        self.assertFalse(report["contained"])
        self.assertEqual(report["violated_face"], [1])
        self.assertIsNone(report["certificate"])

    def test_reproducible_reports_are_identical(self):
        one, _ = self.run_json(["classify"], CRITICAL)
        two, _ = self.run_json(["classify"], CRITICAL)
        self.assertEqual(one, two)
        self.assertNotIn("created", one)

    def test_reports_are_timestamped(self):
        stdout, _ = self.run_cli(["classify"], stdin=spec_json(CRITICAL))
        self.assertIn("created", json.loads(stdout))

    def test_version_in_the_envelope(self):
        report, _ = self.run_json(["classify"], CRITICAL)
        self.assertEqual(report["urnlab_version"], metadata.version("urnlab"))
        self.assertEqual(report["command"], "classify")

    def test_output_to_a_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "report.json"
            stdout, _ = self.run_cli(
                ["classify", "--reproducible"],
                stdin=spec_json(CRITICAL),
                output=str(path),
            )
            self.assertEqual(stdout, "")
            report = json.loads(path.read_text())
        self.assertEqual(report["class"], "CriticallySmall")

    def test_unparsable_input(self):
        stdout, stderr = self.run_cli(
            ["classify"], stdin="{", exit_code=cli.EXIT_INPUT,
        )
        self.assertEqual(stdout, "")
        self.assertTrue(stderr.startswith("Failed to parse <stdin>: "))

    def test_missing_input_file(self):
        _, stderr = self.run_cli(
            ["classify", "--input", "nope.json"], exit_code=cli.EXIT_INPUT,
        )
        self.assertEqual(stderr, "'nope.json' does not exist.\n")

    def test_schema_error(self):
        _, stderr = self.run_cli(
            ["classify"],
            stdin=json.dumps({"R": [[1, 2], [3]], "X0": [1, 1]}),
            exit_code=cli.EXIT_INPUT,
        )
        self.assertIn("SpecError: invalid urn specification", stderr)

    def test_not_balanced(self):
        _, stderr = self.run_cli(
            ["classify"],
            stdin=json.dumps({"R": [[2, 1], [1, 1]], "X0": [1, 1]}),
            exit_code=cli.EXIT_INPUT,
        )
        self.assertIn("NotBalanced", stderr)

    def test_not_tenable(self):
        _, stderr = self.run_cli(
            ["classify"],
            stdin=json.dumps({"R": [[-3, 4], [1, 0]], "X0": [1, 1]}),
            exit_code=cli.EXIT_INPUT,
        )
        self.assertIn("NotTenable", stderr)

    def test_reducible(self):
        _, stderr = self.run_cli(
            ["classify"],
            stdin=json.dumps({"R": [[2, 0], [0, 2]], "X0": [1, 1]}),
            exit_code=cli.EXIT_PRECLUDED,
        )
        self.assertIn("Reducible", stderr)

    def test_invalid_output_document(self):
        urn_spec = cli._schemas.validator_for("urn-spec")
        for argv, stdin in [
            (["classify"], spec_json(CRITICAL)),
            (["cone", "--point", "2,-1,0"], None),
        ]:
            with self.subTest(argv=argv), mock.patch.object(
                cli._schemas, "validator_for", return_value=urn_spec,
            ):
                stdout, stderr = self.run_cli(
                    argv, stdin=stdin, exit_code=cli.EXIT_FAILED,
                )
                self.assertEqual(stdout, "")
                self.assertTrue(
                    stderr.startswith("Produced an invalid "), stderr,
                )

    def test_verbose_logging_goes_to_stderr(self):
        _, stderr = self.run_cli(
            ["simulate", "--nmax", "3", "-vv"], stdin=spec_json(CRITICAL),
        )
        self.assertIn("DEBUG urnlab.urn: simulated 3 steps", stderr)


class TestParser(TestCase):
    def test_defaults(self):
        config = cli.parse_args(["classify"])
        self.assertEqual(config.command, "classify")
        self.assertEqual(config.format, "json")
        self.assertEqual(config.arith, "auto")
        self.assertEqual(config.seed, 0)
        self.assertIsNone(config.input)

    def test_tables_default_to_csv(self):
        self.assertEqual(cli.parse_args(["simulate"]).format, "csv")
        self.assertEqual(
            cli.parse_args(["moments", "--alpha", "1,0"]).format, "csv",
        )

    def test_verify_grid_defaults(self):
        config = cli.parse_args(["verify"])
        self.assertEqual(config.n_max, 2 ** 17)
        self.assertEqual(config.n, 10_000)

    def test_alpha(self):
        config = cli.parse_args(["qpoly", "--alpha", "0, 2,1"])
        self.assertEqual(config.alpha, (0, 2, 1))

    def test_mc_mode(self):
        config = cli.parse_args(["moments", "--mc", "--w", "1,-1"])
        self.assertEqual(config.mode, "mc")
        self.assertEqual(config.w, (1, -1))

    def test_threads_from_the_environment(self):
        with mock.patch.dict(os.environ, {"URNLAB_THREADS": "3"}):
            self.assertEqual(cli.parse_args(["classify"]).threads, 3)

    def test_explicit_threads(self):
        config = cli.parse_args(["classify", "--threads", "2"])
        self.assertEqual(config.threads, 2)

    def assertParserError(self, argv, message):
        stderr = StringIO()
        with redirect_stderr(stderr), self.assertRaises(SystemExit) as e:
            cli.parse_args(argv)
        self.assertEqual(e.exception.code, 2)
        self.assertIn(message, stderr.getvalue())

    def test_csv_reports(self):
        self.assertParserError(
            ["classify", "--format", "csv"],
            "classify reports are only available as JSON",
        )

    def test_alpha_required(self):
        self.assertParserError(["qpoly"], "qpoly needs --alpha")
        self.assertParserError(["moments"], "moments needs --alpha")

    def test_mc_needs_no_alpha(self):
        self.assertIsNone(cli.parse_args(["moments", "--mc"]).alpha)

    def test_malformed_alpha(self):
        self.assertParserError(
            ["qpoly", "--alpha", "1,x"],
            "'1,x' is not a comma-separated list of integers",
        )

    def test_out_of_range_tolerance(self):
        self.assertParserError(
            ["classify", "--tolerance-eigen", "0.5"],
            "tolerance_eigen must be in (0, 1e-2), not 0.5",
        )

    def test_negative_seed(self):
        self.assertParserError(
            ["classify", "--seed", "-1"],
            "seed must be an unsigned 64-bit value",
        )

    def test_exclusive_modes(self):
        self.assertParserError(
            ["moments", "--exact", "--mc"], "not allowed with argument",
        )

    def test_cone_needs_a_point(self):
        self.assertParserError(["cone"], "--point")


class TestCLIIntegration(TestCase):
    def test_version(self):
        version = subprocess.check_output(
            [sys.executable, "-W", "ignore", "-m", "urnlab", "--version"],
            stderr=subprocess.STDOUT,
        )
        self.assertEqual(
            version.decode("utf-8").strip(), metadata.version("urnlab"),
        )

    def test_no_arguments_shows_usage(self):
        output = subprocess.run(
            [sys.executable, "-m", "urnlab"],
            capture_output=True,
            check=False,
        )
        self.assertEqual(output.returncode, 0)
        self.assertIn(b"usage:", output.stdout)

    def test_exit_code_of_a_large_urn(self):
        output = subprocess.run(
            [sys.executable, "-m", "urnlab", "verify"],
            input=spec_json(LARGE).encode("utf-8"),
            capture_output=True,
            check=False,
        )
        self.assertEqual(output.returncode, 3)
        self.assertIn(b"urn is large", output.stderr)


def streams_message(stdout, stderr):
    return f"\n\nstdout:\n{stdout.getvalue()}\n\nstderr:\n{stderr.getvalue()}"
