import json
import math

import numpy as np
import pytest

from knndiv import sampleio
from knndiv.cli import EXIT_ESTIMATION, EXIT_INPUT, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def hand_files(tmp_path):
    x = tmp_path / "x.txt"
    y = tmp_path / "y.txt"
    sampleio.write_sample(x, np.array([[0.0], [1.0], [3.0]]))
    sampleio.write_sample(y, np.array([[0.5], [2.0]]))
    return str(x), str(y)


class TestSampleIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(50, 3)) * np.array([1e-8, 1.0, 1e12])
        path = tmp_path / "pts.txt"
        sampleio.write_sample(path, pts)
        back = sampleio.read_sample(path)
        assert back.shape == pts.shape
        assert np.array_equal(back, pts)

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "s.txt"
        path.write_text("# header\n\n1.5,2.5\n\n# mid\n3.0,4.0\n")
        assert sampleio.read_sample(path).tolist() == [[1.5, 2.5], [3.0, 4.0]]

    def test_parse_errors_carry_location(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.0,2.0\n1.0,oops\n")
        with pytest.raises(sampleio.SampleParseError) as err:
            sampleio.read_sample(path)
        assert err.value.line_number == 2

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "ragged.txt"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(sampleio.SampleParseError):
            sampleio.read_sample(path)

    def test_nonfinite_rejected(self, tmp_path):
        path = tmp_path / "inf.txt"
        path.write_text("1.0\ninf\n")
        with pytest.raises(sampleio.SampleParseError):
            sampleio.read_sample(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing\n")
        with pytest.raises(sampleio.SampleParseError):
            sampleio.read_sample(path)

    def test_orders(self, tmp_path):
        path = tmp_path / "orders.txt"
        path.write_text("1\n3\n2\n")
        assert sampleio.read_orders(path).tolist() == [1, 3, 2]
        path.write_text("0\n")
        with pytest.raises(sampleio.SampleParseError):
            sampleio.read_orders(path)


class TestEstimateKL:
    def test_hand_example(self, capsys, hand_files):
        x, y = hand_files
        code, out, _ = run(capsys, "estimate-kl", "--x", x, "--y", y,
                           "-k", "1", "-l", "1")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(-math.log(2.0), abs=1e-9)
        assert payload["n"] == 3 and payload["m"] == 2 and payload["d"] == 1

    def test_orders_file_matches_uniform(self, capsys, tmp_path, hand_files):
        x, y = hand_files
        orders = tmp_path / "orders.txt"
        orders.write_text("1\n1\n1\n")
        _, out_uniform, _ = run(capsys, "estimate-kl", "--x", x, "--y", y,
                                "-k", "1", "-l", "1")
        code, out_file, _ = run(capsys, "estimate-kl", "--x", x, "--y", y,
                                "--orders-k", str(orders), "--orders-l", str(orders))
        assert code == EXIT_OK
        a = json.loads(out_uniform)
        b = json.loads(out_file)
        assert a["value"] == b["value"]

    def test_byte_identical_reruns(self, capsys, hand_files):
        x, y = hand_files
        _, out1, _ = run(capsys, "estimate-kl", "--x", x, "--y", y, "-k", "1", "-l", "1")
        _, out2, _ = run(capsys, "estimate-kl", "--x", x, "--y", y, "-k", "1", "-l", "1")
        assert out1 == out2

    def test_missing_orders_is_input_error(self, capsys, hand_files):
        x, y = hand_files
        code, _, err = run(capsys, "estimate-kl", "--x", x, "--y", y)
        assert code == EXIT_INPUT and "error" in err

    def test_orders_length_mismatch(self, capsys, tmp_path, hand_files):
        x, y = hand_files
        orders = tmp_path / "orders.txt"
        orders.write_text("1\n1\n")
        code, _, err = run(capsys, "estimate-kl", "--x", x, "--y", y,
                           "--orders-k", str(orders), "-l", "1")
        assert code == EXIT_INPUT and "entries" in err

    def test_capacity_error_exit_3(self, capsys, hand_files):
        x, y = hand_files
        code, _, err = run(capsys, "estimate-kl", "--x", x, "--y", y,
                           "-k", "5", "-l", "1")
        assert code == EXIT_ESTIMATION and "error" in err

    def test_duplicates_exit_3_and_jitter_rescues(self, capsys, tmp_path):
        x = tmp_path / "dup.txt"
        y = tmp_path / "y.txt"
        sampleio.write_sample(x, np.array([[0.0], [0.0], [1.0]]))
        sampleio.write_sample(y, np.array([[0.5], [2.0]]))
        code, _, _ = run(capsys, "estimate-kl", "--x", str(x), "--y", str(y),
                         "-k", "1", "-l", "1")
        assert code == EXIT_ESTIMATION
        code, out, _ = run(capsys, "estimate-kl", "--x", str(x), "--y", str(y),
                           "-k", "1", "-l", "1", "--jitter", "1e-9", "--seed", "5")
        assert code == EXIT_OK
        assert math.isfinite(json.loads(out)["value"])

    def test_missing_file_exit_2(self, capsys, tmp_path):
        missing = str(tmp_path / "nope.txt")
        code = main(["estimate-kl", "--x", missing, "--y", missing,
                     "-k", "1", "-l", "1"])
        capsys.readouterr()
        assert code == EXIT_INPUT

    def test_bad_flag_exit_2(self, capsys, hand_files):
        x, y = hand_files
        code, _, _ = run(capsys, "estimate-kl", "--x", x, "--y", y,
                         "-k", "one", "-l", "1")
        assert code == EXIT_INPUT


class TestEstimateEntropy:
    def test_hand_example(self, capsys, tmp_path):
        x = tmp_path / "x.txt"
        sampleio.write_sample(x, np.array([[0.0], [2.0], [5.0]]))
        code, out, _ = run(capsys, "estimate-entropy", "--x", str(x), "-k", "1")
        assert code == EXIT_OK
        payload = json.loads(out)
        expect = (math.log(4.0) + math.log(4.0) + math.log(6.0)) / 3.0 + (
            math.log(2.0) + np.euler_gamma
        )
        assert payload["value"] == pytest.approx(expect, abs=1e-12)

    def test_missing_k(self, capsys, tmp_path):
        x = tmp_path / "x.txt"
        sampleio.write_sample(x, np.array([[0.0], [2.0]]))
        code, _, _ = run(capsys, "estimate-entropy", "--x", str(x))
        assert code == EXIT_INPUT


class TestCheckConditions:
    def test_table_output(self, capsys):
        code, out, _ = run(
            capsys, "check-conditions",
            "--model-p", "gauss:d=1;mu=0;cov=1",
            "--model-q", "gauss:d=1;mu=1;cov=1",
            "--budget", "2000",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0].startswith("functional")
        assert len([ln for ln in lines if ln.startswith(("K[", "Q[", "T[", "L["))]) == 9
        assert "stable-finite" in out
        assert lines[-1].startswith("#")

    def test_bad_model_exit_2(self, capsys):
        code, _, err = run(capsys, "check-conditions",
                           "--model-p", "gauss:d=1;mu=0",
                           "--model-q", "whatisthis:d=1")
        assert code == EXIT_INPUT


class TestExperimentConvergence:
    def test_csv_deterministic_and_declining_mse(self, capsys, tmp_path):
        argv = ["experiment-convergence",
                "--model-p", "gauss:d=1;mu=0;cov=1",
                "--model-q", "gauss:d=1;mu=1;cov=1",
                "-k", "1", "-l", "1",
                "--sizes", "100:100,400:400",
                "--trials", "8", "--seed", "3"]
        code, out1, _ = run(capsys, *argv)
        assert code == EXIT_OK
        _, out2, _ = run(capsys, *argv)
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert lines[0] == "# oracle=0.5"
        header = lines[1].split(",")
        assert header[:6] == ["n", "m", "mean_estimate", "bias", "variance", "mse"]
        rows = [dict(zip(header, ln.split(","))) for ln in lines[2:]]
        assert [int(r["n"]) for r in rows] == [100, 400]
        assert float(rows[1]["mse"]) < float(rows[0]["mse"])

    def test_json_format_and_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "conv.json"
        code, _, _ = run(capsys, "experiment-convergence",
                         "--model-p", "gauss:d=1;mu=0;cov=1",
                         "--model-q", "gauss:d=1;mu=0;cov=1",
                         "--sizes", "50:50", "--trials", "3", "--seed", "0",
                         "--format", "json", "--out", str(out_path))
        assert code == EXIT_OK
        payload = json.loads(out_path.read_text())
        assert payload["oracle"] == 0.0
        assert payload["rows"][0]["trials"] == 3

    def test_single_trial_warns(self, capsys):
        code, _, err = run(capsys, "experiment-convergence",
                           "--model-p", "gauss:d=1;mu=0;cov=1",
                           "--model-q", "gauss:d=1;mu=0;cov=1",
                           "--sizes", "50:50", "--trials", "1")
        assert code == EXIT_OK and "warning" in err

    def test_bad_sizes_exit_2(self, capsys):
        for sizes in ("100", "100:abc", "400:400,100:100"):
            code, _, _ = run(capsys, "experiment-convergence",
                             "--model-p", "gauss:d=1;mu=0;cov=1",
                             "--model-q", "gauss:d=1;mu=0;cov=1",
                             "--sizes", sizes)
            assert code == EXIT_INPUT, sizes

    def test_uniform_pair_uses_numeric_oracle(self, capsys):
        code, out, _ = run(capsys, "experiment-convergence",
                           "--model-p", "uniform:d=1;a=0;b=0.5",
                           "--model-q", "uniform:d=1;a=0;b=1",
                           "--sizes", "200:200", "--trials", "4",
                           "--oracle-budget", "10000")
        assert code == EXIT_OK
        oracle = float(out.splitlines()[0].split("=")[1])
        assert oracle == pytest.approx(math.log(2.0), abs=1e-9)


class TestDiagnoseLimitLaw:
    def test_json_output(self, capsys):
        code, out, _ = run(capsys, "diagnose-limit-law",
                           "--model-q", "uniform:d=1;a=0;b=1",
                           "--x-point", "0.5", "-l", "1", "-m", "500",
                           "--replicates", "300", "--seed", "1")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["rate"] == pytest.approx(2.0)
        assert 0.0 <= payload["p_value"] <= 1.0

    def test_bad_point_exit_2(self, capsys):
        code, _, _ = run(capsys, "diagnose-limit-law",
                         "--model-q", "uniform:d=1;a=0;b=1",
                         "--x-point", "zero", "-l", "1", "-m", "100")
        assert code == EXIT_INPUT

    def test_capacity_exit_3(self, capsys):
        code, _, _ = run(capsys, "diagnose-limit-law",
                         "--model-q", "uniform:d=1;a=0;b=1",
                         "--x-point", "0.5", "-l", "5", "-m", "2")
        assert code == EXIT_ESTIMATION
