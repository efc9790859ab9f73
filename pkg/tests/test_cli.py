import json

import numpy as np
import pytest

from gpbag.cli import main
from gpbag.harness import read_results


def write_csv(path, task="regression", n=40, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    if task == "regression":
        y = X[:, 0] * 2.0 - X[:, 1]
    else:
        y = (X[:, 0] + X[:, 1] > 0).astype(float)
    with open(path, "w") as fh:
        for xi, yi in zip(X, y):
            fh.write(",".join(f"{v}" for v in xi) + f",{yi}\n")
    return path


def run_args(data, out, *extra):
    return ["run", "--dataset", str(data), "--task", "regression",
            "--out", str(out), "--pop-size", "8", "--generations", "2",
            "--beta", "2", "--runs", "2", *extra]


class TestRun:
    def test_end_to_end(self, tmp_path, capsys):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        assert main(run_args(data, out)) == 0
        printed = capsys.readouterr().out
        assert "results:" in printed
        assert printed.count("toy segp") == 2
        records = read_results(out / "results.jsonl")
        assert [r["seed"] for r in records] == [0, 1]
        assert all(r["n_pop"] == 8 and r["generations"] == 2 for r in records)

    def test_no_linear_scaling_flag(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        assert main(run_args(data, out, "--no-linear-scaling",
                             "--runs", "1")) == 0
        [record] = read_results(out / "results.jsonl")
        assert record["use_scaling"] is False

    def test_beta_defaults_to_tenth_of_population(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        args = ["run", "--dataset", str(data), "--task", "regression",
                "--out", str(out), "--pop-size", "30", "--generations", "1",
                "--runs", "1"]
        assert main(args) == 0
        [record] = read_results(out / "results.jsonl")
        assert record["beta"] == 3

    def test_config_file_precedence(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(
            {"generations": 5, "pop_size": 12, "beta": 3, "runs": 1}
        ))
        args = ["run", "--dataset", str(data), "--task", "regression",
                "--out", str(out), "--config", str(cfg), "--generations", "2"]
        assert main(args) == 0
        [record] = read_results(out / "results.jsonl")
        assert record["generations"] == 2  # flag beats config
        assert record["n_pop"] == 12  # config beats default
        assert record["beta"] == 3

    def test_unknown_config_key(self, tmp_path, capsys):
        data = write_csv(tmp_path / "toy.csv")
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"populatino": 10}')
        args = run_args(data, tmp_path / "out", "--config", str(cfg))
        assert main(args) == 1
        assert "populatino" in capsys.readouterr().err

    def test_missing_dataset_exits_nonzero(self, tmp_path, capsys):
        args = run_args(tmp_path / "nope.csv", tmp_path / "out")
        assert main(args) == 1
        assert "error" in capsys.readouterr().err

    def test_named_dataset_without_cache_mentions_fetch(self, tmp_path, capsys):
        args = ["run", "--dataset", "asn", "--out", str(tmp_path / "out"),
                "--data-dir", str(tmp_path), "--pop-size", "8",
                "--generations", "1", "--runs", "1"]
        assert main(args) == 1
        assert "fetch" in capsys.readouterr().err

    def test_selection_flag_recorded(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        assert main(run_args(data, out, "--selection", "trunc-pwb",
                             "--runs", "1")) == 0
        [record] = read_results(out / "results.jsonl")
        assert record["selection"] == "trunc-pwb"

    def test_cgp_mode(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        assert main(run_args(data, out, "--mode", "cgp", "--runs", "1")) == 0
        [record] = read_results(out / "results.jsonl")
        assert record["mode"] == "cgp"
        assert record["selection"] == "plain-tournament"
        assert record["pruned_size"] == 1

    def test_log_flags_write_gen_logs(self, tmp_path):
        data = write_csv(tmp_path / "toy.csv")
        out = tmp_path / "out"
        assert main(run_args(data, out, "--log-diversity",
                             "--log-evolvability", "--runs", "1")) == 0
        log = out / "gen_logs" / "toy_segp_seed0.csv"
        assert log.exists()
        assert log.read_text().splitlines()[0].startswith("gen,slot,elite_loss")


class TestSummarizeAndCompare:
    def make_results(self, tmp_path):
        rng = np.random.default_rng(1)
        path = tmp_path / "results.jsonl"
        with open(path, "w") as fh:
            for mode, shift in (("segp", 0.0), ("cgp", 5.0)):
                for seed in range(12):
                    v = float(rng.normal() * 0.1 + 1.0 + shift)
                    fh.write(json.dumps({
                        "dataset": "toy", "mode": mode, "seed": seed,
                        "train_metric": v, "test_metric": v + 0.1,
                    }) + "\n")
        return path

    def test_summarize_prints_table(self, tmp_path, capsys):
        path = self.make_results(tmp_path)
        assert main(["summarize", "--in", str(path)]) == 0
        out = capsys.readouterr().out
        assert "dataset" in out and "median" in out
        assert out.count("toy") == 4  # 2 modes x train/test

    def test_summarize_accepts_directory(self, tmp_path, capsys):
        self.make_results(tmp_path)
        assert main(["summarize", "--in", str(tmp_path)]) == 0
        assert "toy" in capsys.readouterr().out

    def test_summarize_empty_file(self, tmp_path, capsys):
        path = tmp_path / "results.jsonl"
        path.write_text("")
        assert main(["summarize", "--in", str(path)]) == 1
        assert "empty" in capsys.readouterr().err

    def test_summarize_missing_file(self, tmp_path, capsys):
        assert main(["summarize", "--in", str(tmp_path / "nope.jsonl")]) == 1
        assert "error" in capsys.readouterr().err

    def test_compare_default_lower_wins(self, tmp_path, capsys):
        path = self.make_results(tmp_path)
        assert main(["compare", "--in", str(path)]) == 0
        out = capsys.readouterr().out
        assert "train  best: segp" in out
        assert "test   best: segp" in out

    def test_compare_higher_is_better(self, tmp_path, capsys):
        path = self.make_results(tmp_path)
        assert main(["compare", "--in", str(path),
                     "--higher-is-better"]) == 0
        assert "best: cgp" in capsys.readouterr().out


class TestFetchAndBudget:
    def test_fetch_file_url(self, tmp_path, capsys):
        raw = tmp_path / "raw.dat"
        raw.write_text("\n".join(
            " ".join(str(float(i + k)) for k in range(6)) for i in range(1503)
        ) + "\n")
        out = tmp_path / "data"
        args = ["fetch", "--name", "asn", "--out", str(out),
                "--url", raw.as_uri()]
        assert main(args) == 0
        assert str(out / "asn.csv") in capsys.readouterr().out
        assert (out / "asn.csv").exists()

    def test_fetch_unknown_name(self, tmp_path, capsys):
        args = ["fetch", "--name", "nope", "--out", str(tmp_path)]
        assert main(args) == 1
        assert "unknown dataset" in capsys.readouterr().err

    def test_match_budget(self, capsys):
        args = ["match-budget", "--beta", "2", "--ell", "2",
                "--generations", "10", "--pop-size", "10"]
        assert main(args) == 0
        assert capsys.readouterr().out.strip() == "100"
