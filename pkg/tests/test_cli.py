import csv
import io
import json
import subprocess
import sys

import pytest

from dampest.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestVarianceCurve:
    def test_minimum(self, capsys):
        code, out, _ = run(capsys, "variance-curve", "--alpha-max", "3")
        assert code == 0
        table = rows(out)
        best = min(table, key=lambda r: float(r["var_X"]))
        assert float(best["alpha"]) == pytest.approx(1.6, abs=0.05)
        assert float(best["var_X"]) == pytest.approx(0.22, abs=0.005)

    def test_first_row_is_vacuum(self, capsys):
        _, out, _ = run(capsys, "variance-curve", "--alpha-max", "0.1")
        first = rows(out)[0]
        assert first["alpha"] == "0"
        assert float(first["var_X"]) == pytest.approx(0.5, abs=1e-14)
        assert float(first["var_P_classII"]) == pytest.approx(0.5, abs=1e-14)

    def test_header(self, capsys):
        _, out, _ = run(capsys, "variance-curve", "--alpha-max", "0")
        assert out.splitlines()[0] == "alpha,var_X,var_P_classI,var_P_classII"

    def test_twelve_digits(self, capsys):
        _, out, _ = run(capsys, "variance-curve", "--alpha-min", "1.6", "--alpha-max", "1.6")
        value = out.splitlines()[1].split(",")[1]
        assert len(value.replace("0.", "", 1).lstrip("0")) <= 12
        assert float(value) == pytest.approx(0.221536, abs=1e-6)


class TestDampingCurve:
    def test_rows(self, capsys):
        code, out, _ = run(capsys, "damping-curve", "--kappa-max", "1", "--kappa-step", "0.25")
        assert code == 0
        table = rows(out)
        assert [r["kappa"] for r in table] == ["0", "0.25", "0.5", "0.75", "1"]
        assert table[0]["var_I"] == table[0]["var_II"]
        assert all(float(r["var_I"]) >= float(r["var_II"]) for r in table)

    def test_json(self, capsys):
        _, out, _ = run(capsys, "damping-curve", "--kappa-max", "0.1", "--format", "json")
        data = json.loads(out)
        assert len(data) == 3 and set(data[0]) == {"kappa", "var_I", "var_II"}


class TestImprovement:
    def test_table(self, capsys):
        code, out, _ = run(capsys, "improvement", "--n-tot-min", "10", "--n-tot-max", "20", "--n-tot-step", "10")
        assert code == 0
        table = rows(out)
        assert [r["n_tot"] for r in table] == ["10", "20"]
        last = table[-1]
        assert float(last["delta_I"]) > float(last["delta_II"]) > 0
        assert last["n_meas_I"] == "1" and last["feasible"] == "1"
        assert float(last["mse_III"]) == pytest.approx(0.1, rel=1e-10)


class TestOptimize:
    def test_class_I(self, capsys):
        code, out, _ = run(capsys, "optimize", "--class", "I", "--n-tot", "20", "--format", "json")
        assert code == 0
        (rec,) = json.loads(out)
        assert rec["n_meas_star"] == 1 and rec["mse_star"] < 0.1


class TestSimulate:
    args = ("simulate", "--class", "IV", "--n-tot", "9", "--runs", "2000", "--seed", "3")

    def test_consistent(self, capsys):
        code, out, err = run(capsys, *self.args)
        assert code == 0 and err == ""
        (rec,) = json.loads(out)
        assert rec["x0"] == pytest.approx(3.0)
        assert rec["analytic_mse"] == pytest.approx(2 / 9, rel=1e-10)
        assert rec["consistent"] is True

    def test_byte_identical(self, capsys):
        _, first, _ = run(capsys, *self.args)
        _, second, _ = run(capsys, *self.args)
        assert first == second

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        _, out, _ = run(capsys, *self.args, "--out", str(path))
        assert out == "" and json.loads(path.read_text())[0]["runs"] == 2000

    def test_nonlinear_regime_warns(self, capsys):
        _, _, err = run(capsys, "simulate", "--class", "IV", "--n-tot", "9", "--kappa", "0.5", "--runs", "50")
        assert "warning" in err
        _, _, err = run(capsys, "simulate", "--class", "IV", "--n-tot", "9", "--kappa", "0.5", "--runs", "50", "--no-warn")
        assert err == ""

    def test_infeasible_budget(self, capsys):
        code, _, err = run(capsys, "simulate", "--class", "II", "--alpha", "6", "--n-tot", "1", "--runs", "10")
        assert code == 2 and "infeasible" in err


class TestOracleCheck:
    def test_default_passes(self, capsys):
        code, out, _ = run(capsys, "oracle-check")
        assert code == 0
        assert all(r["passed"] == "1" for r in rows(out))

    def test_small_cutoff_fails(self, capsys):
        code, out, _ = run(capsys, "oracle-check", "--cutoff", "5")
        assert code == 1
        assert any(r["passed"] == "0" for r in rows(out))

    def test_single_check(self, capsys):
        code, out, _ = run(capsys, "oracle-check", "--check", "unitarity")
        assert code == 0 and [r["check"] for r in rows(out)] == ["unitarity"]

    def test_cutoff_cap(self, capsys):
        assert run(capsys, "oracle-check", "--cutoff", "500")[0] == 2


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            ["simulate", "--runs", "0"],
            ["simulate", "--kappa", "-1"],
            ["simulate", "--n-meas", "0"],
            ["damping-curve", "--kappa-step", "0"],
            ["variance-curve", "--alpha-min", "-1"],
            ["improvement", "--n-tot-min", "0"],
            ["oracle-check", "--cutoff", "1"],
        ],
    )
    def test_bad_values(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_argparse_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--class", "V"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "dampest", "damping-curve", "--kappa-max", "0"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines() == ["kappa,var_I,var_II", proc.stdout.splitlines()[1]]
