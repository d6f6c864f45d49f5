import json

import pytest

from stochunify.cli.config import config_hash, load_config, parse_config_text, parse_value
from stochunify.cli.main import EXIT_CONFIG, main, run_subcommand
from stochunify.errors import ConfigError

QUICK_NELSON = ["n_particles=2000", "t_final=0.1", "free_samples=2", "free_grid_points=800",
                "continuity_points=[64, 128, 256]", "roundtrip_points=256", "roundtrip_states=1"]


def sets(pairs):
    out = []
    for p in pairs:
        out += ["--set", p]
    return out


def test_parse_values():
    assert parse_value("1e-3") == 1e-3
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("true") is True and parse_value("False") is False
    assert parse_value("z") == "z"
    text = "# comment\nseed = 3  # trailing\n\nbandwidth = 0.1\n"
    assert parse_config_text(text) == {"seed": 3, "bandwidth": 0.1}
    with pytest.raises(ConfigError):
        parse_config_text("no equals sign")


def test_config_errors_name_every_key():
    with pytest.raises(ConfigError) as exc:
        load_config("nelson", overrides={"n_particles": 0, "dt": -1.0, "bogus": 1})
    assert set(exc.value.problems) == {"n_particles", "dt", "bogus"}


def test_config_file_then_overrides(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("seed = 5\nn_walkers = 100\n")
    cfg = load_config("telegraph", path, {"seed": 6})
    assert cfg["seed"] == 6 and cfg["n_walkers"] == 100
    with pytest.raises(ConfigError):
        load_config("telegraph", tmp_path / "missing.txt")


def test_config_hash_is_stable():
    a = load_config("foam")
    assert config_hash("foam", a) == config_hash("foam", dict(reversed(list(a.items()))))
    assert config_hash("foam", a) != config_hash("foam", {**a, "seed": 1})
    assert len(config_hash("foam", a)) == 12


def test_zero_particles_exit_code(tmp_path, capsys):
    code = main(["nelson", "--out", str(tmp_path), "--set", "n_particles=0"])
    assert code == EXIT_CONFIG
    assert "n_particles" in capsys.readouterr().err


def test_bad_set_syntax(tmp_path):
    assert main(["foam", "--out", str(tmp_path), "--set", "seed"]) == EXIT_CONFIG
    assert main(["all", "--out", str(tmp_path), "--set", "seed=1"]) == EXIT_CONFIG


def test_output_layout_and_manifest(tmp_path, capsys):
    code = main(["foam", "--out", str(tmp_path)])
    assert code == 0
    cfg = load_config("foam")
    run_dir = tmp_path / "foam" / config_hash("foam", cfg)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["subcommand"] == "foam" and manifest["passed"] is True
    assert manifest["config_hash"] == run_dir.name
    assert all((run_dir / f).is_file() for f in manifest["outputs"])
    assert {a["criterion"] for a in manifest["assertions"]} == {13}
    assert "[PASS] foam criterion 13" in capsys.readouterr().out


def test_module_error_reports_config(tmp_path, capsys):
    bad = tmp_path / "foam.json"
    bad.write_text('{"faces": [{"id": "f", "w_plus": 1, "w_minus": 1}], "vertices": '
                   '[{"id": "v", "faces": ["f"], "table": {"+": 1}}]}')
    code, _, _ = run_subcommand("foam", tmp_path / "out", overrides={"foam_file": str(bad)})
    assert code == EXIT_CONFIG
    assert "misses" in capsys.readouterr().err


def test_failing_assertion_exits_nonzero(tmp_path):
    code = main(["network", "--out", str(tmp_path), "--set", "rate_rtol=1e-30"])
    assert code == 1


def test_nelson_determinism(tmp_path):
    args = sets(QUICK_NELSON)
    main(["nelson", "--out", str(tmp_path / "a")] + args)
    main(["nelson", "--out", str(tmp_path / "b")] + args)
    (dir_a,) = (tmp_path / "a" / "nelson").iterdir()
    (dir_b,) = (tmp_path / "b" / "nelson").iterdir()
    files = sorted(p.name for p in dir_a.iterdir() if p.name != "manifest.json")
    assert files == sorted(p.name for p in dir_b.iterdir() if p.name != "manifest.json")
    for name in files:
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes(), name
