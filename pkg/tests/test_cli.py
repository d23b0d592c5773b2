import subprocess
import sys

import numpy as np
import pytest
import yaml

from casimir_graphene import ConfigError, IDEAL_METAL, LayerStack
from casimir_graphene.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from casimir_graphene.config import SUBCOMMANDS, load_config


def write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    return header, data


# -- config ----------------------------------------------------------------------


def test_defaults_for_every_subcommand():
    for sub in SUBCOMMANDS:
        cfg = load_config(sub)
        assert cfg.temperature == 300.0
        yaml.safe_load(cfg.effective_yaml())


def test_default_grids():
    a = load_config("fig3").separations()
    assert len(a) == 60 and a[0] == pytest.approx(10e-9) and a[-1] == pytest.approx(100e-9)
    a = load_config("fig4").separations()
    assert len(a) == 60 and a[0] == pytest.approx(20e-9) and a[-1] == pytest.approx(600e-9)


def test_override_and_bodies(tmp_path):
    p = write(
        tmp_path,
        "version: 1\nscenario: experiment\nseparations: {values_nm: [250, 300]}\n"
        "body2: {graphene: true, films: [{material: SiO2, thickness_nm: 2000}], substrate: Si_B_doped}\n",
    )
    cfg = load_config("experiment", p)
    np.testing.assert_allclose(cfg.separations(), [250e-9, 300e-9])
    plate = cfg.body("body2")
    assert plate.films[0][1] == pytest.approx(2e-6) and plate.graphene is not None
    assert cfg.body("body1").substrate.name == "Au"


def test_ideal_metal_body():
    cfg = load_config("pressure", text="version: 1\nbody1: {graphene: false, substrate: ideal_metal}\n")
    assert cfg.body("body1") == LayerStack(substrate=IDEAL_METAL)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("version: 1\nbogus: 3\n", "line 2: unknown key 'bogus'"),
        ("version: 1\ngraphene: {delta: 0.1}\n", "line 2: unknown key graphene.delta"),
        ("scenario: fig3\n", "version"),
        ("version: 2\n", "unsupported config version"),
        ("version: 1\nscenario: fig4\n", "not 'fig3'"),
        ("version: 1\ntemperature: hot\n", "temperature"),
        ("version: 1\nseparations: {min_nm: 50, max_nm: 10, count: 3}\n", "min_nm"),
        ("version: 1\nseparations: {values_nm: [30, 20]}\n", "increasing"),
        ("version: 1\nseparations: {min_nm: 1, max_nm: 10, count: 3, spacing: cubic}\n", "spacing"),
        ("version: 1\nbody1: {substrate: unobtainium}\n", "unknown material"),
        ("version: 1\nbody1: {films: [{material: SiO2}]}\n", "thickness_nm"),
        ("version: 1\ngraphene: {delta_eV: -1}\n", "mass gap"),
        ("version: 1\nmethod: guess\n", "method"),
        ("version: 1\ntolerance: {k_rtol: 2}\n", "k_rtol"),
        ("- 1\n- 2\n", "mapping"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        cfg = load_config("fig3", text=text)
        cfg.temperature
        cfg.separations()
        cfg.body("body1")
        cfg.graphene_params()
        cfg.method
        cfg.k_rtol


def test_materials_file_relative_to_config(tmp_path):
    write(tmp_path, "version: 1\nmaterials:\n  glass: {kind: constant, eps: 2.25}\n", "mats.yaml")
    p = write(tmp_path, "version: 1\nmaterials_file: mats.yaml\nbody1: {substrate: glass}\n")
    cfg = load_config("pressure", p)
    assert cfg.body("body1").substrate.value == 2.25


# -- CLI -----------------------------------------------------------------------------


def test_fig1_output(tmp_path):
    assert main(["fig1", "--out", str(tmp_path), "--gnuplot"]) == EXIT_OK
    header, data = read_csv(tmp_path / "fig1.csv")
    assert header == ["xi_over_xi1 [1]", "dT_Pi00_over_C [1]"]
    assert data.shape == (200, 2)
    assert np.all(np.diff(data[:, 1]) < 0)
    text = (tmp_path / "fig1.csv").read_text()
    assert "k_perp = 10.0 * xi_1 / c" in text
    assert (tmp_path / "fig1.gp").exists() and (tmp_path / "fig1.config.yaml").exists()


def test_pressure_vacuum_body(tmp_path):
    p = write(tmp_path, "version: 1\nbody2: {graphene: false, substrate: vacuum}\n")
    assert main(["pressure", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    _, data = read_csv(tmp_path / "pressure.csv")
    assert data[0, 2] == 0.0


def test_pressure_per_l(tmp_path):
    p = write(tmp_path, "version: 1\nseparations: {values_nm: [300]}\n")
    assert main(["pressure", "--config", str(p), "--out", str(tmp_path), "--tolerance", "1e-7"]) == EXIT_OK
    header, data = read_csv(tmp_path / "pressure.csv")
    assert header[1] == "l [1]"
    assert np.array_equal(data[:, 1], np.arange(len(data)))
    assert "pressure = -" in (tmp_path / "pressure.csv").read_text()
    eff = yaml.safe_load((tmp_path / "pressure.config.yaml").read_text())
    assert eff["tolerance"]["k_rtol"] == 1e-7 and eff["scenario"] == "pressure"


def test_responses(tmp_path):
    p = write(tmp_path, "version: 1\nresponses: {l_values: [0, 1], k: {min: 1e6, max: 1e8, count: 3}}\n")
    assert main(["responses", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "responses.csv")
    assert data.shape == (6, len(header))
    np.testing.assert_allclose(data[:, header.index("eps_par [1]")], 1 + data[:, header.index("alpha_par [1]")])
    assert np.all(np.isnan(data[:3, header.index("alpha_perp [1]")]))


def test_fig3_small_grid(tmp_path):
    p = write(tmp_path, "version: 1\nseparations: {values_nm: [60, 100]}\n")
    assert main(["fig3", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "fig3.csv")
    assert header[:3] == ["a [nm]", "dP1 [1]", "dP2 [1]"]
    assert np.all(data[:, 1] < 0) and np.all(data[:, 2] > 0)


def test_thermal_static_term_option(tmp_path):
    p = write(tmp_path, "version: 1\nseparations: {values_nm: [400]}\nthermal: {static_term: exact}\n")
    assert main(["thermal", "--config", str(p), "--out", str(tmp_path)]) == EXIT_OK
    header, data = read_csv(tmp_path / "thermal.csv")
    i = header.index
    assert data[0, i("total_effect [Pa]")] == pytest.approx(
        data[0, i("explicit_effect [Pa]")] + data[0, i("implicit_effect [Pa]")], rel=1e-10
    )
    bad = write(tmp_path, "version: 1\nthermal: {static_term: maybe}\n", "bad.yaml")
    assert main(["thermal", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "args",
    [
        ["fig4", "--config", "MISSING"],
        ["fig3", "--threads", "0"],
        ["fig3", "--tolerance", "5"],
    ],
)
def test_exit_code_config(tmp_path, args, capsys):
    args = [a if a != "MISSING" else str(tmp_path / "none.yaml") for a in args]
    assert main(args + ["--out", str(tmp_path)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert not list(tmp_path.glob("*.csv"))


def test_exit_code_numerical(tmp_path, monkeypatch):
    from casimir_graphene import cli
    from casimir_graphene.core import NumericalError

    def boom(cfg, threads=1, rtol=None):
        raise NumericalError("did not converge", l=3)

    monkeypatch.setitem(cli.RUNNERS, "pressure", boom)
    assert main(["pressure", "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_bad_config_line_reported(tmp_path, capsys):
    p = write(tmp_path, "version: 1\nseparations: {values_nm: [100]}\nfoo: 1\n")
    assert main(["pressure", "--config", str(p), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err


def test_console_script_runs(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "casimir_graphene.cli", "fig1", "--out", str(tmp_path)], capture_output=True, text=True
    )
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "fig1.csv").exists()
