"""Tests for the chunksim command line.

Commands are driven through ``main(argv)`` so exit codes, stdout and the
written reports can be checked without a subprocess.
"""

import pytest

from src.cli import EXIT_ERROR, EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, OUT_DIR_ENV, main

SMALL = [
    "--set", "llc.num_sets=1024",
    "--set", "controller.os_principal_sets=512",
    "--set", "controller.max_sets_per_domain=512",
    "--set", "domains.default_exclusive_sets=64",
]

SCENARIO = """\
REGISTER 1 EXCLUSIVE sets=4
SWITCH 1 1
ACCESS 0 0 R 0x1000
ACCESS 1 1 W 0x2000
BARRIER warm
ACCESS 0 0 R 0x1000
ACCESS 1 1 R 0x2000
"""


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "two_domains.txt"
    path.write_text(SCENARIO)
    return path


# ---------------------------------------------------------------------------
# sim
# ---------------------------------------------------------------------------


class TestSim:
    """Replay a scenario or generated workload and write a report."""

    def test_scenario_report(self, tmp_path, scenario, capsys):
        out = tmp_path / "out"
        code = main(["sim", "--scenario", str(scenario), "--out", str(out), *SMALL])
        assert code == EXIT_OK
        report = (out / "sim_chunked.csv").read_text()
        assert report.startswith("# chunkcache-simulator report\n# model: chunked\n")
        assert "warm,0,1,1,1.000000" in report
        assert str(out / "sim_chunked.csv") in capsys.readouterr().out

    def test_chunked_report_carries_overhead(self, tmp_path, scenario):
        assert main(["sim", "--scenario", str(scenario), "--out", str(tmp_path), *SMALL]) == EXIT_OK
        report = (tmp_path / "sim_chunked.csv").read_text()
        overhead = report.split("# [overhead]\n", 1)[1].splitlines()
        assert overhead[0] == "component,bits,kb"
        assert [row.split(",")[0] for row in overhead[1:]] == [
            "cst", "ectable", "tag_extra", "total", "pct_of_llc",
        ]

    def test_baseline_report_has_no_overhead(self, tmp_path, scenario):
        argv = ["sim", "--scenario", str(scenario), "--llc", "shared", "--out", str(tmp_path)]
        assert main([*argv, *SMALL]) == EXIT_OK
        assert "# [overhead]" not in (tmp_path / "sim_shared.csv").read_text()

    def test_generated_workload_json(self, tmp_path):
        code = main([
            "sim", "--generate", "working_set", "--length", "500", "--footprint", "64",
            "--did", "3", "--llc", "way", "--format", "json", "--out", str(tmp_path), *SMALL,
        ])
        assert code == EXIT_OK
        assert '"model": "way"' in (tmp_path / "sim_way.json").read_text()

    def test_byte_identical_reruns(self, tmp_path):
        argv = ["sim", "--generate", "mixed", "--length", "3000", "--seed", "5", *SMALL]
        assert main([*argv, "--out", str(tmp_path / "a")]) == EXIT_OK
        assert main([*argv, "--out", str(tmp_path / "b")]) == EXIT_OK
        first = (tmp_path / "a" / "sim_chunked.csv").read_bytes()
        assert first == (tmp_path / "b" / "sim_chunked.csv").read_bytes()

    def test_out_dir_from_environment(self, tmp_path, scenario, monkeypatch):
        monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
        assert main(["sim", "--scenario", str(scenario), *SMALL]) == EXIT_OK
        assert (tmp_path / "env" / "sim_chunked.csv").exists()


# ---------------------------------------------------------------------------
# attack / suite
# ---------------------------------------------------------------------------


class TestAttack:
    """Verdict line and exit status."""

    def test_chunked_passes(self, capsys):
        assert main(["attack", "--kind", "prime-probe", "--llc", "chunked", *SMALL]) == EXIT_OK
        assert "prime-probe on chunked: PASS (probe miss delta 0)" in capsys.readouterr().out

    def test_shared_fails(self, capsys):
        assert main(["attack", "--kind", "prime-probe", "--llc", "shared", *SMALL]) == EXIT_FAIL
        assert "prime-probe on shared: FAIL" in capsys.readouterr().out

    def test_occupancy_on_way(self, capsys):
        code = main(["attack", "--kind", "occupancy", "--llc", "way", *SMALL])
        assert code == EXIT_OK
        assert "occupancy on way: PASS" in capsys.readouterr().out


class TestSuiteCommand:
    def test_chunked(self, capsys):
        assert main(["suite", "--llc", "chunked", "--scenarios", "15"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("chunked: 15/15 PASS")

    def test_shared(self):
        assert main(["suite", "--llc", "shared", "--scenarios", "30"]) == EXIT_FAIL


# ---------------------------------------------------------------------------
# overhead / compare
# ---------------------------------------------------------------------------


class TestOverhead:
    def test_published_config(self, capsys):
        assert main(["overhead", "--paper-config"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Storage overhead (16 domains)" in out
        assert "386.01 KB" in out
        assert "2.36 % of 16 MB" in out

    def test_thirty_two_domains(self, capsys):
        assert main(["overhead", "--domains", "32", "--did-bits", "5"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Storage overhead (32 domains)" in out
        assert "3,670,176 bits" in out


class TestCompare:
    def test_side_by_side(self, tmp_path, scenario):
        code = main(["compare", "--scenario", str(scenario), "--out", str(tmp_path), *SMALL])
        assert code == EXIT_OK
        header = (tmp_path / "compare.csv").read_text().splitlines()[0]
        assert header == (
            "did,amat_chunked,amat_shared,amat_way,"
            "llc_miss_rate_chunked,llc_miss_rate_shared,llc_miss_rate_way"
        )


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class TestExitCodes:
    """Each failure class maps to its exit code with a one-line diagnostic."""

    def test_missing_input(self, capsys):
        assert main(["sim", *SMALL]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["sim", "--scenario", str(tmp_path / "none.txt")]) == EXIT_IO

    def test_bad_scenario(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("ACCESS 0 0 R 0x0\nJUMP 1\n")
        assert main(["sim", "--scenario", str(path), *SMALL]) == EXIT_ERROR
        err = capsys.readouterr().err
        assert "ScenarioError" in err
        assert "line 2, column 1" in err

    def test_invalid_override(self, scenario):
        code = main(["sim", "--scenario", str(scenario), "--set", "llc.num_sets=1000"])
        assert code == EXIT_ERROR

    def test_unknown_override_key(self, scenario, capsys):
        code = main(["sim", "--scenario", str(scenario), "--set", "llc.colour=1"])
        assert code == EXIT_ERROR
        assert "UNKNOWN_KEY" in capsys.readouterr().err

    def test_malformed_config_yaml(self, tmp_path, scenario, capsys):
        path = tmp_path / "broken.yaml"
        path.write_text("llc: {num_sets: [1024\n")
        assert main(["sim", "--scenario", str(scenario), "--config", str(path)]) == EXIT_ERROR
        err = capsys.readouterr().err
        assert err.startswith("chunksim: ")
        assert len(err.strip().splitlines()) == 1

    def test_malformed_override(self, scenario):
        with pytest.raises(SystemExit) as exc:
            main(["sim", "--scenario", str(scenario), "--set", "novalue"])
        assert exc.value.code == EXIT_USAGE

    def test_simulation_error(self, tmp_path, capsys):
        path = tmp_path / "wrong_core.txt"
        path.write_text("REGISTER 1 MAINSTREAM\nACCESS 0 1 R 0x0\n")
        assert main(["sim", "--scenario", str(path), *SMALL]) == EXIT_ERROR
        assert "CORE_DID_MISMATCH" in capsys.readouterr().err
