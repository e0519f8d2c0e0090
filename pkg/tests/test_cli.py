import csv
import json

import pytest

from jumpga.algorithms import AlgorithmConfig
from jumpga.cli import SPECS, build_parser, main, options
from jumpga.experiments import runtime_campaign
from jumpga.fitness import FitnessSpec
from jumpga.theory import PlateauParams, equilibrium_s0, p_ell_table


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_predict_schema(capsys):
    code, out, _ = run_cli(capsys, "predict", "--n", 50, "--k", 5, "--mu", 20, "--chi", 1, "--pc", 0.01,
                           "--eps", 0.0125, "--seed", 1)
    assert code == 0
    rep = json.loads(out)
    for key in ("p_ell", "beta", "gamma", "S0", "C1", "C2", "alpha", "delta", "alpha_over_delta",
                "alpha_over_delta_bound", "tau0", "lambda_c_default", "precondition_flags", "opt_hit_bound",
                "jump_offset_success", "lower_bound_runtime"):
        assert key in rep
    params = PlateauParams(50, 5, 20, 1.0, 0.01)
    assert rep["S0"] == equilibrium_s0(params, p_ell_table(params))


def test_predict_special_eps_preset(capsys):
    code, out, _ = run_cli(capsys, "predict", "--n", 40, "--k", 2, "--mu", 30, "--pc", 0.001, "--seed", 1)
    rep = json.loads(out)
    flags = rep["precondition_flags"]
    assert code == 0 and rep["eps"] == 1 / 32 == flags["special_eps"]
    assert flags["special_floor_8epsk_zero"] is True


def test_predict_search(capsys):
    code, out, _ = run_cli(capsys, "predict", "--n", 30, "--k", 2, "--eps", 0.22, "--search", "true", "--mu", 2,
                           "--seed", 1)
    rep = json.loads(out)
    assert code == 0 and rep["constructive_search"]["violations"] == []
    assert rep["params"]["mu"] == rep["constructive_search"]["mu"]


def test_predict_invalid_params(capsys):
    code, _, err = run_cli(capsys, "predict", "--n", 10, "--k", 20, "--mu", 3, "--seed", 1)
    assert code == 2 and "k" in err


def test_drift_four_bit_fixture(capsys, tmp_path):
    csv_path = tmp_path / "drift.csv"
    code, out, _ = run_cli(capsys, "drift", "--n", 4, "--k", 2, "--mu", 2, "--algorithm", "ea", "--mutation", "paired",
                           "--ell", 1, "--members", "0011,0101", "--samples", 100000, "--exact", "true",
                           "--seed", 3, "--csv", csv_path)
    rep = json.loads(out)
    assert code == 0
    assert rep["report"]["predicted"] == pytest.approx(4.0)
    assert abs(rep["report"]["mean_next_S"] - 4.0) < 3 * rep["report"]["stderr"]
    assert rep["exact"] == 4.0 and rep["within_3sigma"] is True
    rows = list(csv.DictReader(open(csv_path, encoding="utf-8")))
    assert rows[0]["pass"] == "True"


def test_counterexample_sign(capsys):
    code, out, _ = run_cli(capsys, "counterexample", "--n", 5000, "--k", 100, "--mu", 40, "--samples", 20000,
                           "--seed", 4)
    rep = json.loads(out)
    assert code == 0
    assert rep["diversity"] == 3 * 10 * 40**2 // 4 == 12000
    assert rep["single_negative_3sigma"] is True


def test_runtime_matches_one_plus_one_ea(capsys):
    code, out, _ = run_cli(capsys, "runtime", "--family", "jump", "--n", 12, "--k", 2, "--algorithm", "ea", "--mu", 1,
                           "--repetitions", 5, "--seed", 9, "--threads", 2)
    rep = json.loads(out)
    cfg = AlgorithmConfig(FitnessSpec("jump", 12, k=2), mu=1, algorithm="ea", seed=9)
    direct = runtime_campaign(cfg, 5, 9)
    assert code == 0 and rep["evaluations"]["median"] == direct.evaluations().median
    assert rep["config_hash"] == cfg.config_hash()


def test_logged_config_reproduces_run(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "runtime", "--n", 12, "--k", 2, "--mu", 4, "--pc", 0.3, "--repetitions", 4,
                           "--seed", 5, "--csv", tmp_path / "a.csv")
    first = json.loads(out)
    cfg_path = tmp_path / "logged.cfg"
    cfg_path.write_text(first["config"] + "\n", encoding="utf-8")
    code2, out2, _ = run_cli(capsys, "runtime", "--config", cfg_path, "--csv", tmp_path / "b.csv")
    assert code == code2 == 0
    assert json.loads(out2) == first
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()


def test_flags_override_config_file(capsys, tmp_path):
    cfg_path = tmp_path / "c.cfg"
    cfg_path.write_text("# sweep base\nn = 12\nk = 2\nmu = 3\nrepetitions = 2\nseed = 1\nlambda-c = 4\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "runtime", "--config", cfg_path, "--mu", 5)
    rep = json.loads(out)
    assert code == 0 and "mu = 5" in rep["config"] and "lambda-c = 4" in rep["config"]


def test_unknown_config_key_is_rejected(capsys, tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("n = 12\ncolour = blue\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "runtime", "--config", cfg_path, "--mu", 2, "--seed", 1)
    assert code == 2 and "colour" in err


def test_unknown_flag_is_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["runtime", "--n", "12", "--colour", "blue"])
    assert exc.value.code == 2


def test_missing_required_flag(capsys):
    code, _, err = run_cli(capsys, "drift", "--n", 10, "--seed", 1)
    assert code == 2 and "--k" in err


def test_missing_seed_is_drawn_and_logged(capsys, caplog):
    with caplog.at_level("INFO", logger="jumpga"):
        code, _, _ = run_cli(capsys, "predict", "--n", 20, "--k", 2, "--mu", 4)
    assert code == 0 and "using seed=" in caplog.text


def test_io_error_exit_code(capsys, tmp_path):
    code, _, err = run_cli(capsys, "predict", "--n", 20, "--k", 2, "--mu", 4, "--seed", 1,
                           "--json", tmp_path / "missing" / "out.json")
    assert code == 1 and "I/O" in err


def test_strict_preconditions_list_violations(capsys):
    code, _, err = run_cli(capsys, "runtime", "--n", 30, "--k", 3, "--mu", 10, "--pc", 0.5, "--eps", 0.1,
                           "--strict", "true", "--seed", 1)
    assert code == 2
    for name in ("pc_bound", "mu_bound", "k_bound"):
        assert name in err


def test_equilibrium_subcommand(capsys, tmp_path):
    csv_path = tmp_path / "eq.csv"
    code, out, _ = run_cli(capsys, "equilibrium", "--n", 20, "--k", 3, "--mu", 5, "--algorithm", "ea",
                           "--burn-in", 5000, "--horizon", 50000, "--trials", 3, "--seed", 2, "--csv", csv_path)
    rep = json.loads(out)
    assert code == 0 and rep["trials"] == 3 and abs(rep["relative_error"]) < 0.1
    assert len(list(csv.DictReader(open(csv_path, encoding="utf-8")))) == 3


def test_hitprob_subcommand(capsys):
    code, out, _ = run_cli(capsys, "hitprob", "--n", 12, "--k", 3, "--samples", 200000, "--deltas", "1,3",
                           "--seed", 6)
    rep = json.loads(out)
    assert code == 0
    assert [item["d"] for item in rep["opt_hit"]] == [0, 1, 2, 3]
    assert all(item["pass"] for item in rep["opt_hit"] + rep["jump_offset"])


def test_help_lists_every_flag(capsys):
    parser = build_parser()
    for name in SPECS:
        sub = parser._subparsers._group_actions[0].choices[name]
        text = sub.format_help()
        for o in options(name):
            assert f"--{o.name}" in text
        assert "--config" in text
