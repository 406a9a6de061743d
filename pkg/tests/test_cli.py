import csv
import json
import math
import subprocess
import sys


def run_cli(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "mzphase.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
    )


def test_estimate_writes_run_and_meta(tmp_path):
    result = run_cli(
        "estimate",
        "--strategy", "go",
        "--phi-true", "2.6819",
        "--n", "15",
        "--grid-size", "512",
        "--seed", "7",
        "--out", "out",
        cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    payload = json.loads((tmp_path / "out" / "run.json").read_text())
    assert len(payload["steps"]) == 15
    assert payload["strategy"] == "go"
    meta = json.loads((tmp_path / "out" / "meta.json").read_text())
    assert meta["seed"] == 7
    # nothing outside the output directory
    created = {p.name for p in tmp_path.iterdir()}
    assert created == {"out"}


def test_estimate_final_estimate_within_own_confidence(tmp_path):
    result = run_cli(
        "estimate", "--strategy", "go", "--phi-true", "2.6819", "--n", "40",
        "--grid-size", "1024", "--seed", "7", "--out", "out", cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    payload = json.loads((tmp_path / "out" / "run.json").read_text())
    last = payload["steps"][-1]
    error = abs(math.remainder(last["estimate"] - 2.6819, 2 * math.pi))
    assert error <= 3.0 * last["sigma"]


def test_estimate_is_idempotent(tmp_path):
    args = (
        "estimate", "--strategy", "pgh", "--phi-true", "1.0", "--n", "8",
        "--grid-size", "256", "--seed", "12",
    )
    run_cli(*args, "--out", "a", cwd=tmp_path)
    run_cli(*args, "--out", "b", cwd=tmp_path)
    assert (tmp_path / "a" / "run.json").read_bytes() == (
        tmp_path / "b" / "run.json"
    ).read_bytes()


def test_estimate_snapshots(tmp_path):
    result = run_cli(
        "estimate", "--strategy", "go", "--phi-true", "0.5", "--n", "3",
        "--grid-size", "64", "--seed", "3", "--snapshots", "--out", "out",
        cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    snaps = sorted((tmp_path / "out" / "snapshots").iterdir())
    assert [p.name for p in snaps] == ["step_0001.csv", "step_0002.csv", "step_0003.csv"]
    header = snaps[0].read_text().splitlines()[0]
    assert header == "phi,weight"


def test_estimate_missing_strategy_is_config_error(tmp_path):
    result = run_cli("estimate", "--phi-true", "1.0", "--out", "out", cwd=tmp_path)
    assert result.returncode == 2
    assert "strategy" in result.stderr


def test_estimate_zero_probes_is_config_error(tmp_path):
    result = run_cli(
        "estimate", "--strategy", "go", "--phi-true", "1.0", "--n", "0",
        "--out", "out", cwd=tmp_path,
    )
    assert result.returncode == 2
    assert "n" in result.stderr


def test_unknown_config_key_rejected(tmp_path):
    (tmp_path / "config.json").write_text(json.dumps({"strategy": "go", "bogus": 1}))
    result = run_cli("estimate", "--config", "config.json", "--out", "out", cwd=tmp_path)
    assert result.returncode == 2
    assert "bogus" in result.stderr


def test_meta_round_trips_as_config(tmp_path):
    first = run_cli(
        "estimate", "--strategy", "go", "--phi-true", "2.0", "--n", "6",
        "--grid-size", "128", "--seed", "9", "--out", "one", cwd=tmp_path,
    )
    assert first.returncode == 0
    meta = tmp_path / "one" / "meta.json"
    second = run_cli(
        "estimate", "--config", str(meta), "--out", "two", cwd=tmp_path,
    )
    assert second.returncode == 0, second.stderr
    # same seed and settings reproduce the identical record
    assert (tmp_path / "one" / "run.json").read_bytes() == (
        tmp_path / "two" / "run.json"
    ).read_bytes()


def test_train_policy_deterministic_and_warns(tmp_path):
    args = (
        "train-policy", "--n", "6", "--swarm-size", "6", "--iterations", "10",
        "--fitness-samples", "60", "--seed", "4",
    )
    first = run_cli(*args, "--out", "a", cwd=tmp_path)
    assert first.returncode == 0, first.stderr
    assert "sharpness" in first.stdout
    run_cli(*args, "--out", "b", cwd=tmp_path)
    assert (tmp_path / "a" / "policy.json").read_bytes() == (
        tmp_path / "b" / "policy.json"
    ).read_bytes()

    long_run = run_cli(
        "train-policy", "--n", "51", "--swarm-size", "2", "--iterations", "1",
        "--fitness-samples", "5", "--seed", "1", "--out", "warn", cwd=tmp_path,
    )
    assert long_run.returncode == 0
    assert "50" in (long_run.stderr + long_run.stdout)


def test_train_policy_rejects_tiny_swarm(tmp_path):
    result = run_cli(
        "train-policy", "--n", "4", "--swarm-size", "1", "--out", "out", cwd=tmp_path
    )
    assert result.returncode == 2
    assert "swarm" in result.stderr


def test_benchmark_csv_shape(tmp_path):
    policy_run = run_cli(
        "train-policy", "--n", "6", "--swarm-size", "6", "--iterations", "10",
        "--fitness-samples", "60", "--seed", "4", "--out", "pol", cwd=tmp_path,
    )
    assert policy_run.returncode == 0
    result = run_cli(
        "benchmark",
        "--strategies", "go,pgh,policy",
        "--policy-file", "pol/policy.json",
        "--n", "6",
        "--m", "4",
        "--phases", "0.7,2.1",
        "--grid-size", "256",
        "--seed", "5",
        "--out", "bench",
        cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    with open(tmp_path / "bench" / "benchmark.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6  # 3 strategies x 2 phases
    strategies = {row["strategy"] for row in rows}
    assert strategies == {"go", "pgh", "policy"}
    sql = 1.0 / math.sqrt(6)
    assert all(float(row["sql"]) == sql for row in rows)
    with open(tmp_path / "bench" / "summary.csv", newline="") as fh:
        summary = list(csv.DictReader(fh))
    assert len(summary) == 3


def test_benchmark_channel_groups(tmp_path):
    result = run_cli(
        "benchmark",
        "--strategies", "pgh",
        "--n", "4",
        "--m", "3",
        "--phases", "2",
        "--channels", "ideal,depolarizing:0.1,depolarizing:0.25",
        "--grid-size", "128",
        "--seed", "6",
        "--out", "bench",
        cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    with open(tmp_path / "bench" / "benchmark.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    channels = {row["channel"] for row in rows}
    assert channels == {"ideal", "depolarizing:0.1", "depolarizing:0.25"}
    assert len(rows) == 6  # 3 channels x 2 phases
    crbs = {row["channel"]: float(row["crb"]) for row in rows}
    assert crbs["depolarizing:0.1"] == 1.0 / (0.9 * 2.0)


def test_plot_data_from_run_and_batch(tmp_path):
    run_cli(
        "estimate", "--strategy", "go", "--phi-true", "1.1", "--n", "5",
        "--grid-size", "128", "--seed", "2", "--out", "est", cwd=tmp_path,
    )
    run_cli(
        "benchmark", "--strategies", "go", "--n", "4", "--m", "3", "--phases", "2",
        "--grid-size", "128", "--seed", "3", "--out", "bench", cwd=tmp_path,
    )
    result = run_cli(
        "plot-data",
        "--inputs", "est/run.json", "bench/benchmark.csv",
        "--figure-id", "sigma-traces",
        "--out", "plot",
        cwd=tmp_path,
    )
    assert result.returncode == 0, result.stderr
    with open(tmp_path / "plot" / "plotdata.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {row["figure_id"] for row in rows} == {"sigma-traces"}
    series = {row["series"] for row in rows}
    assert "go:sigma_est" in series and "sql" in series and "go:ideal" in series
    # trajectory rows expose (k, sigma_est) points with an SQL reference
    sigma_rows = [row for row in rows if row["series"] == "go:sigma_est"]
    assert [row["x"] for row in sigma_rows] == ["1", "2", "3", "4", "5"]


def test_plot_data_empty_inputs_is_config_error(tmp_path):
    result = run_cli("plot-data", "--figure-id", "f", "--out", "plot", cwd=tmp_path)
    assert result.returncode == 2


def test_plot_data_malformed_input_is_runtime_error(tmp_path):
    (tmp_path / "broken.json").write_text("{not json")
    result = run_cli(
        "plot-data", "--inputs", "broken.json", "--figure-id", "f",
        "--out", "plot", cwd=tmp_path,
    )
    assert result.returncode == 3


def test_console_entry_point_runs(tmp_path):
    result = subprocess.run(
        ["mzphase", "estimate", "--strategy", "go", "--phi-true", "1.0",
         "--n", "2", "--grid-size", "64", "--seed", "1", "--out", "out"],
        cwd=tmp_path,
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
