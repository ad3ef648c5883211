import csv
import io
import json
from pathlib import Path

import pytest

from ldbfn.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRegion:
    def test_showcase_with_feedback(self, capsys):
        code, out, _ = run_cli(capsys, "region", "--nc", "2", "--ns", "3", "--nr", "1", "--nf", "1")
        payload = json.loads(out)
        assert code == 0
        assert payload["equal"] is True
        assert payload["regime"] == "D"
        assert payload["outer_bound"]["corners"] == [[0, 0], [0, 2], [1, 2], [2, 1], [2, 0]]

    def test_showcase_without_feedback_is_unit_box(self, capsys):
        code, out, _ = run_cli(capsys, "region", "--nc", "2", "--ns", "3", "--nr", "1", "--nf", "0")
        payload = json.loads(out)
        assert code == 0
        assert payload["outer_bound"]["corners"] == [[0, 0], [0, 1], [1, 1], [1, 0]]

    def test_all_zero(self, capsys):
        code, out, _ = run_cli(capsys, "region", "--nc", "0", "--ns", "0", "--nr", "0")
        assert code == 0
        assert json.loads(out)["outer_bound"]["corners"] == [[0, 0]]

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["region", "--nc", "2"])
        assert exc.value.code == 2


class TestSimulate:
    def test_feedback_corner(self, capsys, tmp_path):
        trace = tmp_path / "run.trace"
        code, out, _ = run_cli(
            capsys, "simulate", "--nc", "2", "--ns", "3", "--nr", "1", "--nf", "1",
            "--r1", "2", "--r2", "1", "--blocks", "16", "--seed", "9",
            "--trace", str(trace),
        )
        payload = json.loads(out)
        assert code == 0
        assert payload["errors"] == 0
        assert payload["achieved"] == ["16/9", "8/9"]
        assert trace.read_text().startswith("# ldbfn trace v1")

    def test_infeasible_target_lists_halfspace(self, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--nc", "2", "--ns", "3", "--nr", "1", "--nf", "1",
            "--r1", "3", "--r2", "0",
        )
        assert code == 1
        assert "1*R1 + 0*R2 <= 2" in err

    def test_trivial_run(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--nc", "2", "--ns", "3", "--nr", "1", "--nf", "1",
            "--r1", "0", "--r2", "0", "--blocks", "8",
        )
        assert code == 0
        assert json.loads(out)["delivered_bits"] == [0, 0]


class TestSweep:
    def test_81_rows_all_true(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--max", "2")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert len(rows) == 81
        assert all(row["thm2_equal"] == "True" for row in rows)

    def test_header_contract(self, capsys):
        _, out, _ = run_cli(capsys, "sweep", "--max", "0")
        header = out.splitlines()[0]
        assert header == "nc,ns,nr,nf,regime,sum_capacity,net_gain,thm2_equal,corners"

    def test_oracle_column(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--max", "1", "--oracle")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert all(row["fm_oracle_equal"] == "True" for row in rows)

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        code, out, _ = run_cli(capsys, "sweep", "--max", "0", "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text().splitlines()[0].startswith("nc,ns,nr,nf")


class TestNetGain:
    def test_showcase_table(self, capsys):
        code, out, _ = run_cli(capsys, "netgain", "--nc", "6", "--ns", "3", "--nr", "1", "--nf-max", "2")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows[0] == ["nf", "sum_capacity", "r_f", "eta"]
        assert rows[1] == ["0", "2", "0", "-"]
        assert rows[2] == ["1", "4", "1", "2"]
        assert rows[3] == ["2", "6", "2", "2"]

    def test_feedback_irrelevant_when_relay_strong(self, capsys):
        _, out, _ = run_cli(capsys, "netgain", "--nc", "2", "--ns", "1", "--nr", "3", "--nf-max", "2")
        rows = list(csv.reader(io.StringIO(out)))
        assert [r[3] for r in rows[1:]] == ["-", "0", "0"]


class TestFmCheck:
    @pytest.mark.parametrize("name", [
        "regime_a_nc2_ns1_nr3.txt",
        "regime_b_nc1_ns2_nr3.txt",
        "regime_d_nc2_ns3_nr1_nf1.txt",
    ])
    def test_shipped_fixtures_verify_equal(self, capsys, name):
        code, out, _ = run_cli(capsys, "fm-check", "--system", str(FIXTURES / name))
        assert code == 0
        assert json.loads(out)["equal"] is True

    def test_corrupted_fixture_reports_unequal(self, capsys):
        code, out, _ = run_cli(capsys, "fm-check", "--system", str(FIXTURES / "corrupted_regime_a.txt"))
        payload = json.loads(out)
        assert code == 1
        assert payload["equal"] is False
        extra = {tuple(p) for p in payload["projection_integer_points"]} - {
            tuple(p) for p in payload["oracle_points"]
        }
        assert extra  # the projection gained unreachable integer points

    def test_parse_error_exit_two(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("nonsense line\n")
        code, _, err = run_cli(capsys, "fm-check", "--system", str(bad))
        assert code == 2
        assert "line 1" in err

    def test_missing_file_exit_two(self, capsys):
        code, _, _ = run_cli(capsys, "fm-check", "--system", "/nonexistent/x.txt")
        assert code == 2

    def test_empty_system_is_origin(self, capsys, tmp_path):
        fixture = tmp_path / "empty.txt"
        fixture.write_text("R1 = 0\nR2 = 0\n")
        code, out, _ = run_cli(capsys, "fm-check", "--system", str(fixture))
        payload = json.loads(out)
        assert code == 0
        assert payload["projection"]["corners"] == [[0, 0]]
        assert payload["oracle_points"] == [[0, 0]]
