"""
Tests for the command-line front end.

Commands are run in-process through ``run`` with a string buffer as stdout.
"""

import io

import pytest

from src.python.cli import COMPARE_COLUMNS, TAILS_COLUMNS, build_parser, run
from src.python.config import Settings


def _run(argv, settings=None):
    out = io.StringIO()
    status = run(argv, out=out, settings=settings)
    return status, out.getvalue()


def _pairs(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


class TestParser:
    """Test suite for argument parsing and exit codes"""

    def test_commands(self):
        parser = build_parser()
        args = parser.parse_args(["-vv", "tails", "--n", "10", "--z", "1:2:3"])
        assert args.command == "tails"
        assert args.verbose == 2
        assert list(args.z) == [1.0, 1.5, 2.0]

    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "two-point:b=" in capsys.readouterr().out

    def test_help_goes_to_result_stream(self, capsys):
        status, out = _run(["--help"])
        assert status == 0
        assert "two-point:b=" in out
        status, out = _run(["bound", "--help"])
        assert status == 0
        assert "--triple" in out
        assert capsys.readouterr().out == ""

    def test_usage_error(self, capsys):
        status, out = _run(["bound", "--n", "3"])
        assert status == 2
        assert out == ""
        err = capsys.readouterr().err
        assert "required" in err
        assert "spec grammar" in err

    def test_bad_grid(self):
        assert _run(["tails", "--n", "10", "--z", "3:1:5"])[0] == 2
        assert _run(["tails", "--n", "10", "--z", "1:2"])[0] == 2

    def test_bad_spec(self, capsys):
        argv = ["bound", "--dist", "gauss:s=1", "--n", "10", "--triple", "t1"]
        status, _ = _run(argv)
        assert status == 2
        assert "unknown distribution" in capsys.readouterr().err

    def test_computation_error(self, capsys):
        status, _ = _run(
            ["bound", "--dist", "student:d=3", "--n", "10", "--triple", "t1"]
        )
        assert status == 1
        assert "moment diverges" in capsys.readouterr().err

    def test_unknown_triple(self):
        argv = ["bound", "--dist", "two-point:b=2", "--n", "10", "--triple", "t9"]
        assert _run(argv)[0] == 1


class TestConstantsCommand:
    """Test suite for ``constants``"""

    def test_seed_table(self):
        status, out = _run(["constants", "--seed-table"])
        assert status == 0
        values = _pairs(out)
        assert values["row"] == "t1"
        assert values["A3_ceiled"] == "1.61"
        assert values["A3_published"] == "1.61"
        assert values["A6_published"] == "1.20"
        assert values["A6_ceiled"] == "1.20"

    def test_seed_table_iid(self):
        argv = ["constants", "--seed-table", "--weights", "1,2,1", "--be", "0.4785"]
        status, out = _run(argv)
        assert status == 0
        assert _pairs(out)["row"] == "t2iid2"

    def test_seed_table_without_row(self):
        assert _run(["constants", "--seed-table", "--weights", "1,5,1"])[0] == 1

    def test_optimize(self):
        settings = Settings(threads=1, quasi_random_seeds=4)
        status, out = _run(["constants", "--budget", "100"], settings)
        assert status == 0
        values = _pairs(out)
        assert float(values["objective"]) <= 1.61
        assert values["A3_case"] in {"1", "2", "3"}
        assert set(values) >= {"alpha", "eps4", "theta4", "A3", "A4", "A6"}


class TestBoundCommands:
    """Test suite for ``bound`` and ``truncate``"""

    def test_published_triple(self):
        argv = ["bound", "--dist", "two-point:b=1", "--n", "100", "--triple", "t4iid"]
        status, out = _run(argv)
        assert status == 0
        values = _pairs(out)
        assert values["family"] == "thm2"
        assert float(values["value"]) == pytest.approx(0.125)
        assert values["vacuous"] == "false"

    def test_custom_triple(self):
        argv = [
            "bound",
            "--dist",
            "moments:rho3=1,rho4=0,rho6=0",
            "--n",
            "4",
            "--A",
            "1,0,0",
            "--theorem",
            "iid",
        ]
        status, out = _run(argv)
        assert status == 0
        assert _pairs(out)["triple"] == "custom"
        assert float(_pairs(out)["value"]) == pytest.approx(0.5)

    def test_triple_and_constants_exclusive(self):
        argv = ["bound", "--dist", "two-point:b=1", "--n", "4"]
        assert _run(argv + ["--triple", "t1", "--A", "1,1,1"])[0] == 2

    def test_truncated_spec(self):
        argv = ["bound", "--dist", "student:d=3|trunc:b=5", "--n", "1000"]
        status, out = _run(argv + ["--triple", "t2"])
        assert status == 0
        values = _pairs(out)
        assert values["family"] == "thm1_truncated"
        assert values["a"] == "5"
        assert float(values["failure_mass"]) > 0.0

    def test_truncate(self):
        settings = Settings(threads=1, truncation_grid_points=8)
        argv = ["truncate", "--dist", "student:d=3", "--n", "10000"]
        status, out = _run(argv, settings)
        assert status == 0
        values = _pairs(out)
        assert values["b_star"] != "inf"
        assert values["family"] == "thm1_truncated"

    def test_truncate_moments_only(self):
        argv = ["truncate", "--dist", "moments:rho3=1.5,rho4=1,rho6=1", "--n", "100"]
        status, out = _run(argv + ["--triple", "t2"])
        assert status == 0
        values = _pairs(out)
        assert values["b_star"] == "inf"
        assert values["failure_mass"] == "0"
        assert values["vacuous"] == "false"


class TestTableCommands:
    """Test suite for the CSV commands"""

    def test_tails(self, capsys):
        status, out = _run(["tails", "--n", "10", "--z", "1:4:4"])
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == ",".join(TAILS_COLUMNS)
        assert len(lines) == 5
        assert lines[1].startswith("1,")
        assert lines[4].startswith("4,") and lines[4].endswith(",")
        assert "omitted" in capsys.readouterr().err

    def test_compare(self):
        settings = Settings(threads=1, truncation_grid_points=8)
        argv = ["compare", "--dist", "student", "--param-range", "5:6:2"]
        status, out = _run(argv + ["--n", "100"], settings)
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == ",".join(COMPARE_COLUMNS)
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[:3] == ["student", "5", "100"]
        # d = 5 has no sixth moment
        assert first[COMPARE_COLUMNS.index("thm")] == "inf"
        assert first[COMPARE_COLUMNS.index("thm_trunc_min")] != "inf"


class TestVerifyCommands:
    """Test suite for ``verify`` and ``selfcheck``"""

    def test_verify(self):
        settings = Settings(threads=1, simulation_block_cells=100_000)
        argv = ["verify", "--dist", "two-point:b=1", "--n", "100"]
        argv += ["--samples", "10000", "--seed", "3", "--triple", "t4iid"]
        status, out = _run(argv, settings)
        assert status == 0
        values = _pairs(out)
        assert values["passed"] == "true"
        assert values["seed"] == "3"

    def test_verify_sample_floor(self):
        argv = ["verify", "--dist", "two-point:b=1", "--n", "100"]
        argv += ["--samples", "10", "--triple", "t4iid"]
        assert _run(argv)[0] == 1

    @pytest.mark.slow
    def test_selfcheck(self):
        status, out = _run(["selfcheck"])
        assert status == 0
        values = _pairs(out)
        assert values["prop1_sup_equals_2C"] == "ok"
        assert values["row_t4iid"] == "ok"
        assert "FAIL" not in out
