"""Command-line behavior: determinism, config merging, exit codes."""

import csv
import json

import pytest

from delaybandits import cli
from delaybandits.seeding import run_seed


def read_rows_no_timing(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row.pop("wall_time_ms")
    return rows


def test_run_writes_expected_schema(tmp_path, capsys):
    out = tmp_path / "r.csv"
    rc = cli.main(["run", "--T", "64", "--seeds", "2", "--out", str(out)])
    assert rc == 0
    with open(out, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    assert header == list(cli.CSV_COLUMNS)
    assert len(rows) == 2
    assert "wrote 2 rows" in capsys.readouterr().out


def test_runs_are_deterministic_up_to_timing(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--T", "32", "--T", "64", "--seeds", "3", "--seed-base", "5"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert read_rows_no_timing(a) == read_rows_no_timing(b)


def test_worker_count_does_not_change_results(tmp_path):
    one, two = tmp_path / "w1.csv", tmp_path / "w2.csv"
    args = ["sweep", "--T", "32", "--T", "64", "--seeds", "2"]
    assert cli.main(args + ["--workers", "1", "--out", str(one)]) == 0
    assert cli.main(args + ["--workers", "2", "--out", str(two)]) == 0
    assert read_rows_no_timing(one) == read_rows_no_timing(two)


def test_rows_sorted_by_horizon_then_seed(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--T", "64", "--T", "32", "--seeds", "3", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    keys = [(int(r["T"]), int(r["seed"])) for r in rows]
    assert keys == sorted(keys)


def test_seeds_are_paired_across_horizons(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["sweep", "--T", "32", "--T", "64", "--seeds", "4",
                     "--seed-base", "9", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    by_t = {}
    for r in rows:
        by_t.setdefault(r["T"], set()).add(r["seed"])
    seeds_32, seeds_64 = by_t["32"], by_t["64"]
    assert seeds_32 == seeds_64
    assert seeds_32 == {str(run_seed(9, rep)) for rep in range(4)}


def test_config_file_supplies_defaults_and_flags_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# comment line\n"
        "adversary = paritytrap\n"
        "delay = parity\n"
        "learner = uniform\n"
        "T = 32,64\n"
        "seeds = 2\n"
        "m = 1\n"
        f"out = {tmp_path / 'c.csv'}\n"
    )
    assert cli.main(["sweep", "--config", str(cfg)]) == 0
    rows = read_rows_no_timing(tmp_path / "c.csv")
    assert len(rows) == 4
    assert all(r["adversary"] == "paritytrap+parity" for r in rows)
    # the flag beats the file
    override_out = tmp_path / "d.csv"
    assert cli.main(["sweep", "--config", str(cfg), "--seeds", "1",
                     "--out", str(override_out)]) == 0
    assert len(read_rows_no_timing(override_out)) == 2


def test_config_file_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("what is this line\n")
    assert cli.main(["run", "--config", str(bad)]) == 1
    unknown = tmp_path / "unk.cfg"
    unknown.write_text("frobnicate = 3\n")
    assert cli.main(["run", "--config", str(unknown)]) == 1


class TestUsageErrors:
    def test_run_requires_single_horizon(self, tmp_path):
        assert cli.main(["run", "--T", "32", "--T", "64",
                         "--out", str(tmp_path / "x.csv")]) == 1

    def test_unknown_choice_exits_one(self, tmp_path):
        assert cli.main(["run", "--adversary", "nonsense",
                         "--out", str(tmp_path / "x.csv")]) == 1

    def test_masking_delay_needs_walk_loss(self, tmp_path):
        assert cli.main(["run", "--adversary", "iid", "--delay", "statemachine",
                         "--out", str(tmp_path / "x.csv")]) == 1

    def test_parity_trap_is_two_armed(self, tmp_path):
        assert cli.main(["run", "--adversary", "paritytrap", "--delay", "parity",
                         "--K", "3", "--out", str(tmp_path / "x.csv")]) == 1

    def test_bad_epsilon_rejected(self, tmp_path):
        assert cli.main(["run", "--epsilon", "0.2",
                         "--out", str(tmp_path / "x.csv")]) == 1

    def test_unknown_verify_suite(self):
        assert cli.main(["verify", "nonsense"]) == 1


def test_io_error_exits_three(tmp_path):
    missing_dir = tmp_path / "nope" / "out.csv"
    assert cli.main(["run", "--T", "32", "--out", str(missing_dir)]) == 3
    assert cli.main(["analyze", str(tmp_path / "absent.csv")]) == 3


def test_fast_verify_suites_pass(capsys):
    assert cli.main(["verify", "splits", "kl", "wrapper", "walk"]) == 0
    out = capsys.readouterr().out
    assert "[pass]" in out
    assert "[FAIL]" not in out
    assert out.count("suite ") == 4


def test_analyze_emits_fit_json(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--adversary", "paritytrap", "--delay", "parity",
                     "--learner", "uniform", "--m", "1",
                     "--T", "64", "--T", "128", "--T", "256",
                     "--seeds", "4", "--out", str(out)]) == 0
    capsys.readouterr()
    rc = cli.main(["analyze", str(out), "--metric", "pseudo_regret"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["metric"] == "pseudo_regret"
    # uniform play on the trap loses about T/4 at odd rounds: near-linear
    assert 0.8 <= payload["alpha"] <= 1.2
    assert payload["r_squared"] > 0.9
    assert [t for t, _ in payload["points"]] == [64, 128, 256]


def test_analyze_bootstrap_interval(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--adversary", "paritytrap", "--delay", "parity",
                     "--learner", "uniform", "--m", "1",
                     "--T", "64", "--T", "128", "--T", "256",
                     "--seeds", "4", "--out", str(out)]) == 0
    capsys.readouterr()
    assert cli.main(["analyze", str(out), "--metric", "pseudo_regret",
                     "--bootstrap", "50"]) == 0
    payload = json.loads(capsys.readouterr().out)
    lo, hi = payload["alpha_ci_90"]
    assert lo <= payload["alpha"] <= hi


def test_analyze_missing_column_names_it(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("T,foo\n32,1.0\n64,2.0\n128,3.0\n")
    assert cli.main(["analyze", str(bad)]) == 1
    assert "policy_regret" in capsys.readouterr().err


def test_analyze_needs_three_horizons(tmp_path):
    thin = tmp_path / "thin.csv"
    thin.write_text("T,policy_regret\n32,1.0\n64,2.0\n")
    assert cli.main(["analyze", str(thin)]) == 1


def test_policy_regret_zero_reported_for_trap(tmp_path):
    out = tmp_path / "trap.csv"
    assert cli.main(["run", "--adversary", "paritytrap", "--delay", "parity",
                     "--learner", "uniform", "--m", "1", "--T", "100",
                     "--seeds", "3", "--out", str(out)]) == 0
    rows = read_rows_no_timing(out)
    assert all(float(r["policy_regret"]) == 0.0 for r in rows)
    assert all(r["d"] == "2" and r["tau"] == "1" for r in rows)
