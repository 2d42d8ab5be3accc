import csv
import io
import json

import numpy as np
import pytest

from dualcert.cli import EXIT_ERROR, EXIT_FALSIFIED, EXIT_OK, main
from dualcert.model import predict, save_network
from dualcert.synth import random_inputs, random_network

from conftest import make_net


@pytest.fixture
def workspace(tmp_path):
    net = random_network(seed=42, input_dim=8, hidden_widths=[6, 5], output_dim=3,
                         activation="sigmoid")
    model = tmp_path / "model.json"
    save_network(net, model)
    xs = random_inputs(43, net, 4)
    rows = [[predict(net, x), *x] for x in xs]
    data = tmp_path / "inputs.csv"
    with open(data, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    return {"net": net, "model": str(model), "input": str(data), "dir": tmp_path}


def run(argv):
    return main(argv)


class TestVerifyCommand:
    def test_zero_radius_is_robust_exit_zero(self, workspace, capsys):
        code = run(["verify", "--model", workspace["model"], "--input", workspace["input"],
                    "--index", "0", "--eps", "0", "--samples", "50", "--out",
                    str(workspace["dir"] / "r.json")])
        assert code == EXIT_OK
        report = json.loads((workspace["dir"] / "r.json").read_text())
        assert report["format"] == "dualcert-report-v1"
        assert report["rows"][0]["status"] == "robust"

    def test_missing_model_exits_one_with_path(self, workspace, capsys):
        code = run(["verify", "--model", "/nonexistent/net.json", "--input", workspace["input"],
                    "--eps", "0.1"])
        assert code == EXIT_ERROR
        assert "/nonexistent/net.json" in capsys.readouterr().err

    def test_falsifiable_case_exits_three_with_witness(self, tmp_path):
        net = make_net(([[1.0]], [0.0], "tanh"), ([[1.0], [-1.0]], [0.0, 0.0], "linear"))
        model = tmp_path / "flip.json"
        save_network(net, model)
        data = tmp_path / "one.csv"
        data.write_text("0,0.5\n")
        out = tmp_path / "report.json"
        code = run(["verify", "--model", str(model), "--input", str(data),
                    "--eps", "1.0", "--samples", "100", "--out", str(out)])
        assert code == EXIT_FALSIFIED
        report = json.loads(out.read_text())
        row = report["rows"][0]
        assert row["status"] == "falsified"
        witness = np.array(row["counterexample"])
        assert predict(net, witness) != predict(net, np.array([0.5]))

    def test_bad_index_errors(self, workspace, capsys):
        code = run(["verify", "--model", workspace["model"], "--input", workspace["input"],
                    "--index", "99", "--eps", "0.1"])
        assert code == EXIT_ERROR

    def test_unknown_flag_errors(self, workspace):
        assert run(["verify", "--model", workspace["model"], "--frobnicate"]) == EXIT_ERROR


class TestCertifyCommand:
    def args(self, workspace, out, extra=()):
        return ["certify", "--model", workspace["model"], "--input", workspace["input"],
                "--count", "2", "--samples", "100", "--eps-max", "0.5", "--seed", "7",
                "--out", str(out), *extra]

    def test_count_one_single_row(self, workspace):
        out = workspace["dir"] / "c1.json"
        code = run(["certify", "--model", workspace["model"], "--input", workspace["input"],
                    "--count", "1", "--samples", "100", "--eps-max", "0.5", "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert len(report["rows"]) == 1
        assert report["aggregates"]["mean_bound"] == report["rows"][0]["certified_eps"]

    def test_deterministic_reports_without_timings(self, workspace):
        out1 = workspace["dir"] / "d1.json"
        out2 = workspace["dir"] / "d2.json"
        assert run(self.args(workspace, out1, ["--no-timings"])) == EXIT_OK
        assert run(self.args(workspace, out2, ["--no-timings"])) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_formats_carry_identical_numbers(self, workspace):
        outs = {}
        for fmt in ("json", "csv", "md"):
            path = workspace["dir"] / f"report.{fmt}"
            assert run(self.args(workspace, path, ["--no-timings", "--format", fmt])) == EXIT_OK
            outs[fmt] = path.read_text()
        report = json.loads(outs["json"])
        json_eps = [row["certified_eps"] for row in report["rows"]]

        reader = csv.DictReader(io.StringIO(
            "\n".join(l for l in outs["csv"].splitlines() if not l.startswith("#"))
        ))
        csv_eps = [float(r["certified_eps"]) for r in reader]
        assert csv_eps == [float(f"{v:.6g}") for v in json_eps]

        md_rows = [l for l in outs["md"].splitlines() if l.startswith("|")][2:]
        header = [h.strip() for h in outs["md"].splitlines()[0].strip("|").split("|")]
        idx = header.index("certified_eps")
        md_eps = [float(r.strip("|").split("|")[idx].strip()) for r in md_rows]
        assert md_eps == [float(f"{v:.6g}") for v in json_eps]

    def test_thread_env_does_not_change_rows(self, workspace, monkeypatch):
        out1 = workspace["dir"] / "t1.json"
        out2 = workspace["dir"] / "t2.json"
        assert run(self.args(workspace, out1, ["--no-timings"])) == EXIT_OK
        monkeypatch.setenv("DUALCERT_THREADS", "3")
        assert run(self.args(workspace, out2, ["--no-timings"])) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()


class TestBoundsCommand:
    def test_zero_radius_zero_width(self, workspace):
        out = workspace["dir"] / "b.json"
        code = run(["bounds", "--model", workspace["model"], "--input", workspace["input"],
                    "--index", "0", "--eps", "0", "--samples", "50", "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        for row in report["rows"]:
            assert row["u_over"] - row["l_over"] == pytest.approx(0.0, abs=1e-9)

    def test_dual_under_nested_in_over(self, workspace):
        out = workspace["dir"] / "b2.json"
        code = run(["bounds", "--model", workspace["model"], "--input", workspace["input"],
                    "--index", "1", "--eps", "0.05", "--samples", "200",
                    "--strategy", "dual-sample", "--out", str(out)])
        assert code == EXIT_OK
        for row in json.loads(out.read_text())["rows"]:
            assert row["l_over"] - 1e-12 <= row["l_under"] <= row["u_under"] <= row["u_over"] + 1e-12

    def test_single_strategy_omits_under(self, workspace):
        out = workspace["dir"] / "b3.json"
        run(["bounds", "--model", workspace["model"], "--input", workspace["input"],
             "--eps", "0.05", "--strategy", "single", "--out", str(out)])
        assert "l_under" not in json.loads(out.read_text())["rows"][0]


class TestCompareCommand:
    def test_single_vs_single_zero_improvement(self, workspace):
        out = workspace["dir"] / "cmp.json"
        code = run(["compare", "--model", workspace["model"], "--input", workspace["input"],
                    "--count", "2", "--strategies", "single,single", "--samples", "100",
                    "--eps-max", "0.5", "--out", str(out)])
        assert code == EXIT_OK
        rows = json.loads(out.read_text())["rows"]
        assert all(row["improvement_pct"] == 0.0 for row in rows)

    def test_dual_improves_over_single(self, workspace):
        out = workspace["dir"] / "cmp2.json"
        code = run(["compare", "--model", workspace["model"], "--input", workspace["input"],
                    "--count", "3", "--strategies", "single,dual-sample", "--samples", "500",
                    "--eps-max", "0.5", "--seed", "3", "--out", str(out)])
        assert code == EXIT_OK
        rows = {row["strategy"]: row for row in json.loads(out.read_text())["rows"]}
        assert rows["dual-sample"]["mean_bound"] >= rows["single"]["mean_bound"] - 1e-9
        assert rows["dual-sample"]["improvement_pct"] >= -1e-6

    def test_empty_instance_set_errors(self, workspace):
        code = run(["compare", "--model", workspace["model"], "--input", workspace["input"],
                    "--count", "0", "--strategies", "single"])
        assert code == EXIT_ERROR


class TestInputParsing:
    def test_malformed_csv(self, workspace, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2\n")
        code = run(["verify", "--model", workspace["model"], "--input", str(bad), "--eps", "0.1"])
        assert code == EXIT_ERROR

    def test_non_integer_labels_rejected(self, workspace, tmp_path):
        bad = tmp_path / "frac.csv"
        bad.write_text("0.5," + ",".join(["0.1"] * 8) + "\n")
        code = run(["verify", "--model", workspace["model"], "--input", str(bad), "--eps", "0.1"])
        assert code == EXIT_ERROR

    def test_wrong_feature_count_rejected(self, workspace, tmp_path):
        bad = tmp_path / "short.csv"
        bad.write_text("0,0.1,0.2\n")
        code = run(["verify", "--model", workspace["model"], "--input", str(bad), "--eps", "0.1"])
        assert code == EXIT_ERROR
