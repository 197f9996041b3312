import json
import math

import numpy as np
import pytest

from wwbreak import breakdown, cli, config
from wwbreak.config import RunConfig
from wwbreak.dynamics import SurfaceState
from wwbreak.errors import ConfigError
from wwbreak.spectral import Grid


# ------------------------------------------------------------ config

def test_empty_config_gives_defaults():
    cfg = config.parse_config("# nothing here\n\n")
    assert cfg == RunConfig()
    assert cfg.p == 3.0 and cfg.s == 2.5


def test_dimension_sets_exponent_defaults():
    cfg = config.parse_config("d = 2\nn = 16\n")
    assert cfg.p == 5.0 and cfg.s == 2.25


def test_p_constraint_cites_invariant_and_line():
    with pytest.raises(ConfigError) as info:
        config.parse_config("n = 64\np = 2\n")
    assert "p > 2d" in str(info.value)
    assert info.value.line == 2


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as info:
        config.parse_config("n = 64\n\nbogus = 1\n")
    assert info.value.line == 3 and "bogus" in str(info.value)


@pytest.mark.parametrize("text", ["n = 100", "dt = -1", "n = 64\nn = 32", "dealias = maybe",
                                  "M = 2", "scenario = tsunami", "n 64", "s = 1.2"])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        config.parse_config(text)


def test_parse_pi_and_alias():
    cfg = config.parse_config("L = 2pi\nT_final = 0.5\nZ_b = auto\nfilter = yes\n")
    assert cfg.L == pytest.approx(2 * math.pi) and cfg.T == 0.5 and cfg.Z_b is None and cfg.filter


def test_serialize_round_trip():
    cfg = RunConfig(n=128, dt=1 / 3 * 1e-2, T=0.7, M=40, Z_b=7.5, scenario="linear_wave(3, 1e-5)",
                    dealias=False, sample_stride=5)
    assert config.parse_config(config.serialize(cfg)) == cfg


def test_parse_scenario():
    assert config.parse_scenario("rest") == ("rest", {})
    name, params = config.parse_scenario("steep_cosine(amp=0.2)")
    assert name == "steep_cosine" and params == {"k": 1.0, "amp": 0.2, "lift": 3.0}
    with pytest.raises(ValueError):
        config.parse_scenario("rest(1)")
    with pytest.raises(ValueError):
        config.parse_scenario("linear_wave(q=1)")


def test_presets():
    g = Grid(1, 64)
    x = g.x[0]
    rest = config.preset("rest", g)
    assert np.all(rest.eta == 0) and np.all(rest.psi == 0)
    lw = config.preset("linear_wave(2, 1e-6)", g)
    assert np.abs(lw.eta - 1e-6 * np.cos(2 * x)).max() == 0 and np.all(lw.psi == 0)
    sc = config.preset("steep_cosine", g, g=4.0)
    assert np.abs(sc.psi - 3 * 0.35 * 2.0 * np.cos(x)).max() < 1e-15
    with pytest.raises(ConfigError):
        config.preset("nope", g)


def test_gaussian_images_periodic():
    # the image sum is periodic and smooth: a negligible spectral tail
    g = Grid(1, 128)
    hump = config.gaussian_images(g, 0.5, 0.3)
    assert hump.max() == pytest.approx(0.3, rel=1e-12)
    assert cli.spectral_tail(g, hump) <= 1e-12


# ------------------------------------------------------------ snapshots

def test_snapshot_round_trip_bit_exact(tmp_path, rng):
    g = Grid(2, 8, 3.0)
    s = SurfaceState(g, 0.123456789, rng.standard_normal(g.shape), rng.standard_normal(g.shape), 9.81)
    cli.write_snapshot(tmp_path / "s.txt", s)
    back = cli.read_snapshot(tmp_path / "s.txt")
    assert back.grid == g and back.t == s.t and back.g == s.g
    assert np.array_equal(back.eta, s.eta) and np.array_equal(back.psi, s.psi)


# ------------------------------------------------------------ runs

def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_rest_run(tmp_path):
    cfgp = write_cfg(tmp_path, "n = 32\nM = 12\ndt = 0.1\nT = 0.5\ng = 2\n")
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfgp, "--out", str(out)]) == 0
    rows = breakdown.read_report(out / "report.csv")
    assert len(rows) == 6
    assert all(s.ts_inf == pytest.approx(2.0, abs=1e-14) for s, _ in rows)
    meta = json.loads((out / "meta.json").read_text())
    assert meta["termination"] == "normal" and meta["exit_code"] == 0
    assert (out / "snapshot_final.txt").exists()


def test_cli_run_deterministic(tmp_path):
    text = "n = 32\nM = 12\ndt = 0.05\nT = 0.2\nscenario = steep_cosine(1, 0.1)\n"
    cfgp = write_cfg(tmp_path, text)
    for d in ("a", "b"):
        assert cli.main(["run", "--config", cfgp, "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a/report.csv").read_bytes() == (tmp_path / "b/report.csv").read_bytes()


def test_cli_sample_stride_and_preset(tmp_path):
    cfgp = write_cfg(tmp_path, "n = 32\nM = 12\ndt = 0.05\nT = 0.5\n")
    out = tmp_path / "o"
    code = cli.main(["run", "--config", cfgp, "--out", str(out), "--preset", "linear_wave(1, 1e-4)",
                     "--sample-stride", "5"])
    assert code == 0
    rows = breakdown.read_report(out / "report.csv")
    assert [round(s.t, 10) for s, _ in rows] == [0.0, 0.25, 0.5]


def test_cli_huge_dt_is_blow_up(tmp_path):
    cfgp = write_cfg(tmp_path, "n = 64\nM = 12\ndt = 2.0\nT = 200\nscenario = steep_cosine(1, 0.2)\n")
    out = tmp_path / "o"
    assert cli.main(["run", "--config", cfgp, "--out", str(out)]) == 4
    meta = json.loads((out / "meta.json").read_text())
    assert meta["termination"] == "blow-up-detected" and meta["blow_up_time"] is not None


def test_cli_bad_config_exit_2(tmp_path, capsys):
    cfgp = write_cfg(tmp_path, "n = 64\np = 2\n")
    assert cli.main(["run", "--config", cfgp, "--out", str(tmp_path / "o")]) == 2
    assert "p > 2d" in capsys.readouterr().err
    assert cli.main(["run"]) == 2
    assert cli.main(["check", "--suite", "nonexistent"]) == 2


def test_cli_io_error_exit_5(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 5
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfgp = write_cfg(tmp_path, "n = 32\nM = 8\nT = 0.01\ndt = 0.01\n")
    assert cli.main(["run", "--config", cfgp, "--out", str(blocker / "sub")]) == 5
    assert cli.main(["norms", "--input", str(blocker), "--besov", "1,2,2"]) == 5


def test_cli_norms(tmp_path, capsys):
    g = Grid(1, 64)
    s = SurfaceState(g, 0.0, np.cos(4 * g.x[0]), np.zeros(64))
    snap = tmp_path / "snap.txt"
    cli.write_snapshot(snap, s)
    assert cli.main(["norms", "--input", str(snap), "--besov", "1,inf,inf"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("eta B^1_inf,inf = ")
    assert float(out[0].split("=")[-1]) == pytest.approx(4.0, rel=1e-13)
    assert float(out[1].split("=")[-1]) == 0.0
    assert cli.main(["norms", "--input", str(snap), "--besov", "1,2"]) == 2


def test_check_suite_by_number(capsys):
    assert cli.main(["check", "--suite", "3"]) == 0
    assert capsys.readouterr().out.split()[:3] == ["[PASS]", "criterion", "3"]
