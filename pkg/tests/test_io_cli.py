import json
import math

import numpy as np
import pytest

from mixbath import ConfigError, parse_config, parse_config_text
from mixbath import cli
from mixbath.io import bundled_configs, format_config, read_csv, write_csv

from conftest import reference

SYSTEM = """[system]
statistics = fermi
omega_mode = renormalized
frequency = 1.0
"""


def test_bundled_configs_cover_reference_families():
    names = bundled_configs()
    for fam in ("ff1f2", "bb1b2", "fb1f2", "bf1b2"):
        assert f"reference_{fam}.cfg" in names
        assert parse_config(f"reference_{fam}.cfg") == reference(fam)
    mixed = parse_config("reference_fb1f2.cfg")
    assert mixed.Omega == 1.0 and mixed.omega == pytest.approx(4.5)
    assert mixed.p == pytest.approx(2.0 / 3.0)


def test_comments_and_whitespace():
    text = SYSTEM.replace("frequency = 1.0", "  frequency=1.0   # in units of Omega") + """
# a bath
[bath.1]
statistics=bose
alpha = 0.1
gamma = 10
temperature = 1
"""
    sc = parse_config_text(text)
    assert sc.Omega == 1.0 and sc.baths[0].gamma == 10.0


def test_missing_temperature_names_section():
    text = SYSTEM + "[bath.1]\nstatistics = fermi\nalpha = 0.1\ngamma = 10\n"
    with pytest.raises(ConfigError, match=r"temperature.*bath\.1"):
        parse_config_text(text)


def test_duplicate_key_reports_position():
    text = SYSTEM + "[bath.1]\nstatistics = fermi\nalpha = 0.1\n  alpha = 0.2\n"
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.line == 8 and exc.value.column == 3


def test_unknown_key_and_section():
    with pytest.raises(ConfigError) as exc:
        parse_config_text(SYSTEM + "mu = 0.1\n")
    assert exc.value.line == 5
    with pytest.raises(ConfigError):
        parse_config_text(SYSTEM + "[reservoir]\n")
    with pytest.raises(ConfigError):
        parse_config_text(SYSTEM + "[bath.2]\nstatistics = fermi\nalpha = 0\ngamma = 1\ntemperature = 1\n")


def test_format_round_trip():
    sc = reference("bf1b2")
    assert parse_config_text(format_config(sc)) == sc
    bare = parse_config_text(format_config(sc, "bare"))
    assert math.isclose(bare.Omega, sc.Omega, rel_tol=1e-12)


def test_csv_full_precision(tmp_path):
    x = np.array([0.1, 1 / 3, 2.0 ** -40, 12345.678901234567])
    path = write_csv(tmp_path / "a.csv", ["t", "v"], [x, -x], "a.manifest.json")
    lines = path.read_text().splitlines()
    assert lines[0] == "# manifest: a.manifest.json" and lines[1] == "t,v"
    header, body = read_csv(path)
    assert header == ["t", "v"]
    assert np.array_equal(body[:, 0], x) and np.array_equal(body[:, 1], -x)


def test_cli_asymptote_markov(tmp_path, capsys):
    code = cli.main(["asymptote", "--config", "markov_bose.cfg", "--out", str(tmp_path)])
    assert code == 0
    assert "markov_limit = 0.581977" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "asymptote_markov_bose.manifest.json").read_text())
    assert manifest["results"]["markov_limit"] == pytest.approx(1 / (math.e - 1))
    assert manifest["scenario"]["system"]["omega_mode"] == "bare"


def test_cli_evolve_consistent_and_reproducible(tmp_path):
    args = ["evolve", "--config", "reference_ff1f2.cfg", "--t-max", "50", "--dt", "0.005",
            "--method", "diffusion"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    name = "evolve_reference_ff1f2_diffusion.csv"
    first = (tmp_path / "a" / name).read_bytes()
    assert first == (tmp_path / "b" / name).read_bytes()
    _, body = read_csv(tmp_path / "a" / name)
    manifest = json.loads((tmp_path / "a" / "evolve_reference_ff1f2_diffusion.manifest.json").read_text())
    assert manifest["outputs"][name] == ["t", "n"]
    assert len(manifest["derived"]["roots"]) == 4
    assert cli.main(["asymptote", "--config", "reference_ff1f2.cfg", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "asymptote_reference_ff1f2.manifest.json").read_text())
    assert abs(body[-1, 1] - report["results"]["n_inf_pure"]) <= 2e-3


def test_cli_transport_and_scan(tmp_path):
    assert cli.main(["transport", "--config", "reference_fb1f2.cfg", "--t-max", "2", "--dt", "0.01",
                     "--out", str(tmp_path)]) == 0
    header, body = read_csv(tmp_path / "transport_reference_fb1f2.csv")
    assert header[:3] == ["t", "lambda", "D"] and body.shape == (201, len(header))
    assert cli.main(["scan", "--config", "reference_ff1f2.cfg", "--parameter", "Omega",
                     "--values", "0.9:1.1:2", "--t-max", "20", "--dt", "0.01",
                     "--out", str(tmp_path)]) == 0
    text = (tmp_path / "scan_reference_ff1f2_Omega.csv").read_text().splitlines()
    assert text[1].startswith("value,stationary,mean,amplitude,frequency,cyclic_frequency")
    assert len(text) == 4


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["evolve", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 1
    assert cli.main(["bogus"]) == 1
    degenerate = tmp_path / "degenerate.cfg"
    degenerate.write_text(SYSTEM + "".join(
        f"[bath.{i}]\nstatistics = fermi\nalpha = 0\ngamma = 5\ntemperature = 1\n" for i in (1, 2)))
    assert cli.main(["asymptote", "--config", str(degenerate), "--out", str(tmp_path)]) == 2
    assert cli.main(["evolve", "--config", "reference_fb1f2.cfg", "--method", "closed-form",
                     "--out", str(tmp_path)]) == 1

    import mixbath.cli as cli_module
    from mixbath.verify import CheckResult
    monkeypatch.setattr(cli_module, "verify",
                        lambda quick, seed: (False, [CheckResult("x", failed=1)], 0.0))
    assert cli.main(["verify", "--quick", "--out", str(tmp_path)]) == 3
    assert (tmp_path / "verify_suite.manifest.json").exists()


def test_cli_verify_quick(tmp_path):
    assert cli.main(["verify", "--quick", "--out", str(tmp_path)]) == 0
