import math

import numpy as np
import pytest

from gkrr.cli import main
from gkrr.data import generate_synthetic, load_csv, write_csv


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def ten_point_file(tmp_path):
    # uniform 1-D grid on [0, 1]: l_max = 1
    x = np.linspace(0.0, 1.0, 10)
    path = tmp_path / "train.csv"
    lines = [f"{xi},{math.sin(2 * math.pi * xi)}" for xi in x]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestSelect:
    def test_jacobian_lambda_zero(self, capsys, ten_point_file):
        code, out, _ = run_cli(
            capsys, "select", "--input", str(ten_point_file),
            "--method", "jacobian", "--lambda", "0",
        )
        assert code == 0
        fields = dict(ln.split("=", 1) for ln in out.strip().splitlines())
        assert float(fields["sigma"]) == pytest.approx(math.sqrt(2) / (8 * math.pi), rel=1e-12)
        assert fields["method"] == "jacobian"
        assert fields["regime"] == "no-regularization"
        assert fields["clamped"] == "false"

    def test_silverman_zero_variance_exit_3(self, capsys, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("1,0\n1,1\n1,2\n")
        code, _, err = run_cli(
            capsys, "select", "--input", str(path), "--method", "silverman",
        )
        assert code == 3
        assert "variance" in err

    def test_cv_deterministic_output(self, capsys, tmp_path):
        data = generate_synthetic(25, 0.1, seed=3)
        src = tmp_path / "d.csv"
        write_csv(data, src)
        curve1 = tmp_path / "c1.csv"
        curve2 = tmp_path / "c2.csv"
        args = ["select", "--input", str(src), "--method", "cv", "--seed", "5",
                "--grid-size", "25"]
        code1, out1, _ = run_cli(capsys, *args, "--output", str(curve1))
        code2, out2, _ = run_cli(capsys, *args, "--output", str(curve2))
        assert code1 == code2 == 0
        assert out1 == out2
        assert curve1.read_bytes() == curve2.read_bytes()

    def test_missing_file_exit_2(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "select", "--input", str(tmp_path / "nope.csv"))
        assert code == 2
        assert "input error" in err

    def test_parse_error_exit_2(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,abc\n")
        code, _, err = run_cli(capsys, "select", "--input", str(path))
        assert code == 2
        assert "row 1, column 2" in err


class TestFitPredict:
    def test_interpolation_round_trip(self, capsys, tmp_path, ten_point_file):
        model_path = tmp_path / "model.csv"
        code, out, _ = run_cli(
            capsys, "fit", "--input", str(ten_point_file), "--lambda", "0",
            "--output", str(model_path),
        )
        assert code == 0

        feat_path = tmp_path / "query.csv"
        feat_path.write_text("\n".join(format(v, ".17g") for v in np.linspace(0, 1, 10)) + "\n")
        pred_path = tmp_path / "pred.csv"
        code, _, _ = run_cli(
            capsys, "predict", "--model", str(model_path), "--input", str(feat_path),
            "--output", str(pred_path),
        )
        assert code == 0
        preds = [float(v) for v in pred_path.read_text().split()]
        y = [math.sin(2 * math.pi * x) for x in np.linspace(0, 1, 10)]
        assert max(abs(a - b) for a, b in zip(preds, y)) <= 1e-6 * (max(map(abs, y)) + 1)

    def test_serialized_predictions_match_in_memory(self, capsys, tmp_path):
        from gkrr import krr

        data = generate_synthetic(15, 0.1, seed=6)
        src = tmp_path / "d.csv"
        write_csv(data, src)
        model_path = tmp_path / "m.csv"
        code, out, _ = run_cli(
            capsys, "fit", "--input", str(src), "--method", "jacobian",
            "--output", str(model_path),
        )
        assert code == 0
        sigma = float(dict(ln.split("=", 1) for ln in out.strip().splitlines())["sigma"])
        model = krr.fit(data, sigma, 1e-3)

        q = np.linspace(-5, 5, 20)
        feat_path = tmp_path / "q.csv"
        feat_path.write_text("\n".join(format(v, ".17g") for v in q) + "\n")
        pred_path = tmp_path / "p.csv"
        run_cli(capsys, "predict", "--model", str(model_path), "--input", str(feat_path),
                "--output", str(pred_path))
        preds = np.array([float(v) for v in pred_path.read_text().split()])
        expect = krr.predict(model, q.reshape(-1, 1))
        np.testing.assert_allclose(preds, expect, rtol=1e-12, atol=1e-15)

    def test_wrong_column_count_exit_2(self, capsys, tmp_path, ten_point_file):
        model_path = tmp_path / "model.csv"
        run_cli(capsys, "fit", "--input", str(ten_point_file), "--output", str(model_path))
        feat_path = tmp_path / "wide.csv"
        feat_path.write_text("0.1,0.2\n")
        code, _, err = run_cli(
            capsys, "predict", "--model", str(model_path), "--input", str(feat_path),
            "--output", str(tmp_path / "p.csv"),
        )
        assert code == 2
        assert "columns" in err

    def test_sigma_override(self, capsys, tmp_path, ten_point_file):
        model_path = tmp_path / "model.csv"
        code, out, _ = run_cli(
            capsys, "fit", "--input", str(ten_point_file), "--sigma", "0.25",
            "--output", str(model_path),
        )
        assert code == 0
        assert "sigma=0.25" in out


class TestSynth:
    def test_deterministic(self, capsys, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run_cli(capsys, "synth", "--n", "40", "--seed", "7", "--output", str(a))
        run_cli(capsys, "synth", "--n", "40", "--seed", "7", "--output", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_matches_library(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        run_cli(capsys, "synth", "--n", "12", "--seed", "3", "--output", str(path))
        d = load_csv(path)
        ref = generate_synthetic(12, 0.1, seed=3)
        np.testing.assert_array_equal(d.features, ref.features)
        np.testing.assert_array_equal(d.response, ref.response)


class TestSweep:
    def test_lambda_clamp_column_constant(self, capsys, tmp_path):
        from gkrr.bandwidth import lambda_threshold

        thr = lambda_threshold(12)
        values = ",".join(str(v) for v in [0.1 * thr, 0.9 * thr, 2 * thr, 20 * thr])
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            capsys, "sweep", "--axis", "lambda", "--values", values, "--n", "12",
            "--repeats", "3", "--test-size", "40", "--methods", "jacobian",
            "--seed", "2", "--output", str(out_path),
        )
        assert code == 0
        rows = [ln.split(",") for ln in out_path.read_text().strip().splitlines()[1:]]
        sig = [float(r[6]) for r in rows]
        assert sig[0] < sig[1] < sig[2]
        assert sig[2] == sig[3]

    def test_threads_byte_identical(self, capsys, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        base = ["sweep", "--axis", "n", "--values", "10,14", "--repeats", "4",
                "--test-size", "30", "--methods", "jacobian,silverman", "--seed", "1"]
        run_cli(capsys, *base, "--threads", "1", "--output", str(a))
        run_cli(capsys, *base, "--threads", "8", "--output", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_lambda_axis_requires_n(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "sweep", "--axis", "lambda", "--values", "0.1",
            "--output", str(tmp_path / "x.csv"),
        )
        assert code == 2
        assert "--n" in err


class TestJackknife:
    def test_basic_run(self, capsys, tmp_path):
        data = generate_synthetic(10, 0.1, seed=4)
        src = tmp_path / "d.csv"
        write_csv(data, src)
        out_path = tmp_path / "jk.csv"
        code, out, _ = run_cli(
            capsys, "jackknife", "--input", str(src), "--methods", "jacobian,silverman",
            "--eval-points", "7", "--output", str(out_path),
        )
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 1 + 7 * 2
        assert "method=jacobian" in out

    def test_holdout_reference_grid(self, capsys, tmp_path):
        data = generate_synthetic(12, 0.1, seed=5)
        src = tmp_path / "d.csv"
        write_csv(data, src)
        out_path = tmp_path / "jk.csv"
        code, _, _ = run_cli(
            capsys, "jackknife", "--input", str(src), "--methods", "jacobian",
            "--holdout", "0.5", "--output", str(out_path),
        )
        assert code == 0
        # half the rows reserved as the evaluation grid
        assert len(out_path.read_text().strip().splitlines()) == 1 + 6


class TestVerify:
    def test_prop1_pass_line(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--claim", "prop1", "--n", "10", "--p", "1",
            "--lambda", "0",
        )
        assert code == 0
        assert "violations=0" in out and out.strip().splitlines()[0].endswith("PASS")

    def test_prop3(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--claim", "prop3", "--sigma", "2.0")
        assert code == 0
        assert "PASS" in out

    def test_prop2_and_outputs(self, capsys, tmp_path):
        out_path = tmp_path / "report.csv"
        code, out, _ = run_cli(
            capsys, "verify", "--claim", "prop2", "--n", "8", "--trials", "10",
            "--output", str(out_path),
        )
        assert code == 0
        assert out_path.read_text().startswith("claim,trials,violations,worst_margin,seed")

    def test_bermanis(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--claim", "bermanis", "--n", "10", "--delta", "0.5",
            "--sigma", "0.2",
        )
        assert code == 0

    def test_prop4_narrow_kernel(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--claim", "prop4", "--n", "10", "--sigma", "0.05",
            "--lambda", "0",
        )
        assert code == 0
        assert "PASS" in out

    def test_prop4_irregular_cloud_reports(self, capsys):
        # p > 1 draws a seeded point cloud; the check measures and reports
        code, out, _ = run_cli(
            capsys, "verify", "--claim", "prop4", "--n", "12", "--p", "2",
            "--sigma", "0.1", "--seed", "3",
        )
        assert code == 0
        assert "worst_margin=" in out


class TestPlot:
    def test_deterministic_svg(self, capsys, tmp_path):
        sweep_path = tmp_path / "sweep.csv"
        run_cli(capsys, "sweep", "--axis", "n", "--values", "8,12", "--repeats", "3",
                "--test-size", "25", "--methods", "jacobian,cv", "--seed", "3",
                "--grid-size", "15", "--output", str(sweep_path))
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        code, _, _ = run_cli(capsys, "plot", "--input", str(sweep_path), "--output", str(a))
        assert code == 0
        run_cli(capsys, "plot", "--input", str(sweep_path), "--output", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().startswith("<svg")

    def test_bad_input_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "x.csv"
        bad.write_text("nope\n")
        code, _, _ = run_cli(capsys, "plot", "--input", str(bad),
                             "--output", str(tmp_path / "y.svg"))
        assert code == 2


class TestHelp:
    @pytest.mark.parametrize("sub,defaults", [
        ("select", ["0.001", "10", "100", "0.01", "0"]),
        ("sweep", ["100", "1000", "0.001"]),
        ("verify", ["0.5", "100", "1.0"]),
    ])
    def test_defaults_listed(self, sub, defaults, capsys):
        assert main([sub, "--help"]) == 0
        out = capsys.readouterr().out
        for d in defaults:
            assert f"default: {d}" in out
