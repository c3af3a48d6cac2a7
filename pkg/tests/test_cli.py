import json

from mixdag.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from mixdag.experiments import synthetic_standin_csv


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["exp", "nope"]) == EXIT_USAGE
    assert main(["exp", "shd", "--alphas", "2"]) == EXIT_USAGE
    assert main(["exp", "shd", "--k", "zero"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_gen_writes_files(tmp_path):
    out = tmp_path / "g"
    assert main(["gen", "--k", "2", "--nodes", "4", "--samples", "50", "--out", str(out)]) == EXIT_OK
    spec = json.loads((out / "spec.json").read_text())
    assert spec
    json.loads((out / "union_mag.json").read_text())
    lines = (out / "samples.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,x3,x4,component" and len(lines) == 51


def test_fci_on_generated_samples(tmp_path, capsys):
    out = tmp_path / "g"
    main(["gen", "--k", "2", "--nodes", "4", "--samples", "300", "--out", str(out)])
    capsys.readouterr()
    assert main(["fci", str(out / "samples.csv")]) == EXIT_OK
    pag = json.loads(capsys.readouterr().out)
    assert pag["nodes"] == ["x1", "x2", "x3", "x4"]


def test_data_errors(tmp_path):
    assert main(["fci", str(tmp_path / "missing.csv")]) == EXIT_DATA
    one = tmp_path / "one.csv"
    one.write_text("a\n1\n2\n")
    assert main(["fci", str(one)]) == EXIT_DATA
    assert main(["real", str(one)]) == EXIT_DATA


def test_verify_exit_codes(capsys):
    assert main(["verify", "--scale", "0.02"]) == EXIT_OK
    assert main(["verify", "--scale", "0.02", "--inject-bug"]) == EXIT_VERIFY
    assert "[FAIL]" in capsys.readouterr().out


def test_exp_with_plot(tmp_path):
    out = tmp_path / "e"
    args = ["exp", "varying", "--k", "2", "--nodes", "4", "--samples", "300", "--trials", "2", "--out", str(out), "--plot"]
    assert main(args) == EXIT_OK
    assert (out / "varying.csv").read_text().startswith("# mixdag kind=varying")
    assert (out / "varying.svg").read_text().startswith("<svg")


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 2, "n_nodes": 4, "n_samples": 300, "n_trials": 1, "alphas": [0.05, 0.1]}))
    assert main(["exp", "shd", "--config", str(cfg)]) == EXIT_OK
    assert len([l for l in capsys.readouterr().out.splitlines() if l[:1].isdigit()]) == 2
    assert main(["exp", "shd", "--config", str(cfg), "--alphas", "0.01"]) == EXIT_OK
    assert len([l for l in capsys.readouterr().out.splitlines() if l[:1].isdigit()]) == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["exp", "shd", "--config", str(cfg)]) == EXIT_USAGE


def test_real_writes_outputs(tmp_path):
    csv = synthetic_standin_csv(tmp_path / "s.csv", n_per_group=100, n_nodes=4)
    out = tmp_path / "r"
    assert main(["real", str(csv), "--subsamples", "3", "--out", str(out)]) == EXIT_OK
    assert (out / "pag.json").exists() and (out / "bidirected_ranking.csv").exists()
