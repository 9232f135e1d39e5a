"""Structure parsing, batch commands, report schema, CLI behavior."""

import json

import numpy as np
import pytest

from ddlpb.app import (RunConfig, exponential_fit, load_solute,
                       parse_structure, report_to_json, run_energy,
                       run_forces, run_gradcheck, run_sweep, sweep_to_csv)
from ddlpb.cli import main
from ddlpb.errors import ConfigurationError, ParseError
from ddlpb.solver import COULOMB_KCAL


def born_ref(q=1.0, r=2.0, eps2=78.54, kappa=0.104):
    return COULOMB_KCAL * 0.5 * q * q * (
        1.0 / (eps2 * (1.0 + kappa * r) * r) - 1.0 / r)


@pytest.fixture
def born_file(tmp_path):
    path = tmp_path / "born.xyzqr"
    path.write_text("0 0 0 1.0 2.0\n")
    return str(path)


@pytest.fixture
def diatomic_file(tmp_path):
    path = tmp_path / "pair.xyzqr"
    path.write_text("# a symmetric pair\n"
                    "0.0 0.0 0.0  0.5 1.8\n"
                    "2.2 0.0 0.0  0.5 1.8\n")
    return str(path)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_xyzqr_single_atom(born_file):
    centers, charges, radii = parse_structure(born_file, "xyzqr")
    assert centers.shape == (1, 3)
    assert charges[0] == 1.0 and radii[0] == 2.0


def test_xyzqr_probe_augmentation(born_file):
    cfg = RunConfig(input_path=born_file, input_format="xyzqr",
                    surface="sas")
    s = load_solute(cfg)
    assert abs(s.radii[0] - 3.4) < 1e-15  # 2.0 + 1.4 probe


def test_xyzqr_rejects_nan(tmp_path):
    p = tmp_path / "bad.xyzqr"
    p.write_text("0 0 nan 1.0 2.0\n")
    with pytest.raises(ParseError) as exc:
        parse_structure(str(p), "xyzqr")
    assert ":1" in str(exc.value)


def test_xyzqr_rejects_zero_radius(tmp_path):
    p = tmp_path / "bad.xyzqr"
    p.write_text("0 0 0 1.0 0.0\n")
    with pytest.raises(ParseError):
        parse_structure(str(p), "xyzqr")


PQR_BODY = """REMARK test structure
ATOM      1  N   VAL A   1      16.783  48.812  26.447 -0.3000 1.5500
ATOM      2  CA  VAL A   1      17.591  48.101  25.444  0.1000 1.7000
HETATM    3  O   HOH   501       1.000   2.000   3.000 -0.8340 1.2000
"""

PQR_NO_CHAIN = """ATOM      1  N   VAL     1      16.783  48.812  26.447 -0.3000 1.5500
ATOM      2  CA  VAL     1      17.591  48.101  25.444  0.1000 1.7000
"""


def test_pqr_with_and_without_chain(tmp_path):
    p1 = tmp_path / "a.pqr"
    p1.write_text(PQR_BODY)
    centers, charges, radii = parse_structure(str(p1), "pqr")
    assert centers.shape == (3, 3)
    assert abs(charges[2] + 0.834) < 1e-12
    assert abs(radii[0] - 1.55) < 1e-12
    p2 = tmp_path / "b.pqr"
    p2.write_text(PQR_NO_CHAIN)
    centers2, _, _ = parse_structure(str(p2), "pqr")
    assert np.allclose(centers2, centers[:2])


def test_pqr_strict_columns(tmp_path):
    p = tmp_path / "a.pqr"
    p.write_text(PQR_BODY)
    centers, charges, radii = parse_structure(str(p), "pqr",
                                              strict_columns=True)
    assert abs(centers[0, 0] - 16.783) < 1e-12
    assert abs(radii[1] - 1.70) < 1e-12


def test_pqr_malformed_line_reports_location(tmp_path):
    p = tmp_path / "a.pqr"
    p.write_text("ATOM 1 N VAL 1 16.7 48.8 26.4 bad 1.55\n")
    with pytest.raises(ParseError) as exc:
        parse_structure(str(p), "pqr")
    assert ":1" in str(exc.value)


def test_pqr_radius_and_probe(tmp_path):
    p = tmp_path / "a.pqr"
    p.write_text("ATOM 1 X RES 1 0.0 0.0 0.0 1.0 1.2\n")
    cfg = RunConfig(input_path=str(p), input_format="pqr", surface="sas")
    s = load_solute(cfg)
    assert abs(s.radii[0] - 2.6) < 1e-15


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigurationError):
        RunConfig(n_leb=100)
    with pytest.raises(ConfigurationError):
        RunConfig(input_format="xyz")
    with pytest.raises(ConfigurationError):
        RunConfig(mode="fast")
    cfg = RunConfig()
    assert cfg.probe_radius == 0.0 and cfg.pmax == cfg.lmax


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def test_energy_command_born(born_file):
    cfg = RunConfig(input_path=born_file, input_format="xyzqr",
                    tol=1e-8)
    rep = run_energy(cfg)
    assert abs(rep["energy_kcal_mol"] - born_ref()) < 1e-6 * abs(born_ref())
    assert rep["forces"] is None
    assert set(rep["timings"]) == {"init", "rhs", "primal", "adjoint",
                                   "forces"}
    assert rep["solver"]["final_increment"] <= 1e-8


def test_forces_command_antisymmetric_pair(diatomic_file):
    cfg = RunConfig(input_path=diatomic_file, input_format="xyzqr",
                    lmax=3, tol=1e-8)
    rep = run_forces(cfg)
    f = np.asarray(rep["forces"])
    assert f.shape == (2, 3)
    assert abs(f[0, 0] + f[1, 0]) < 1e-7 * abs(f[0, 0])
    assert np.max(np.abs(f[:, 1:])) < 1e-7 * abs(f[0, 0])
    assert all(rep["timings"][k] >= 0 for k in rep["timings"])


def test_deterministic_reports_are_byte_identical(diatomic_file):
    cfg = RunConfig(input_path=diatomic_file, input_format="xyzqr",
                    lmax=2, tol=1e-6, deterministic=True)
    a = report_to_json(run_forces(cfg))
    b = report_to_json(run_forces(cfg))
    assert a == b
    parsed = json.loads(a)
    assert parsed["timings"] == {k: 0.0 for k in parsed["timings"]}


def test_gradcheck_command(diatomic_file):
    cfg = RunConfig(input_path=diatomic_file, input_format="xyzqr",
                    lmax=2, n_leb=50, tol=1e-8, eta=0.2)
    rep = run_gradcheck(cfg, [1e-2, 1e-3])
    assert len(rep["rows"]) == 2
    assert rep["rows"][0]["rmsd"] > rep["rows"][1]["rmsd"]
    assert not rep["plateau_suspect"]
    with pytest.raises(ConfigurationError):
        run_gradcheck(cfg, [])


def test_sweep_command_fit(tmp_path):
    path = tmp_path / "four.xyzqr"
    path.write_text("0 0 0 0.6 1.6\n1.7 0.1 0 -0.4 1.5\n"
                    "0 1.5 0 0.3 1.4\n0.4 0.7 1.3 -0.5 1.5\n")
    cfg = RunConfig(input_path=str(path), input_format="xyzqr",
                    n_leb=110, tol=1e-7)
    rep = run_sweep(cfg, lmax_values=[2, 3, 4, 5, 6])
    assert rep["fit"] is not None
    assert rep["fit"]["r_squared"] > 0.9
    assert len(rep["relative_errors"]) == 5
    csv = sweep_to_csv(rep)
    assert csv.splitlines()[0] == "lmax,energy_kcal_mol"
    with pytest.raises(ConfigurationError):
        run_sweep(cfg, lmax_values=[2, 4])
    with pytest.raises(ConfigurationError):
        run_sweep(cfg, lmax_values=[2, 4, 6], pmax_values=[2, 4, 6])


def test_exponential_fit_degenerate_constant():
    a, b, c, r2 = exponential_fit([2, 4, 6, 8], [5.0, 5.0, 5.0, 5.0])
    assert a == 5.0 and b == 0.0


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_energy_roundtrip(born_file, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["energy", "--input", born_file, "--format", "xyzqr",
                 "--tol", "1e-8", "--output", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert abs(rep["energy_kcal_mol"] - born_ref()) < 1e-6 * abs(born_ref())
    err = capsys.readouterr().err
    assert "energy:" in err and "timings" in err


def test_cli_missing_file_exit_1(tmp_path):
    code = main(["energy", "--input", str(tmp_path / "nope.xyzqr"),
                 "--format", "xyzqr"])
    assert code == 1


def test_cli_parse_error_exit_1(tmp_path):
    p = tmp_path / "bad.xyzqr"
    p.write_text("0 0 0 1.0\n")
    assert main(["energy", "--input", str(p), "--format", "xyzqr"]) == 1


def test_cli_convergence_failure_exit_2(diatomic_file, monkeypatch):
    import ddlpb.app as appmod
    from ddlpb.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("no convergence")
    monkeypatch.setattr(appmod, "solve_primal", boom)
    code = main(["energy", "--input", diatomic_file, "--format", "xyzqr"])
    assert code == 2


def test_cli_gradcheck_bad_steps(diatomic_file):
    code = main(["gradcheck", "--input", diatomic_file, "--format", "xyzqr",
                 "--steps", "abc"])
    assert code == 1


def test_cli_config_file_and_flag_precedence(born_file, tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("lmax = 3\ntol = 1e-8\nformat = xyzqr\n")
    out = tmp_path / "r.json"
    code = main(["energy", "--input", born_file, "--config", str(cfgfile),
                 "--lmax", "4", "--output", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["lmax"] == 4          # flag wins
    assert rep["config"]["tol"] == 1e-8        # file applies


def test_cli_kappa_from_ionic_strength(born_file, tmp_path):
    out = tmp_path / "r.json"
    code = main(["energy", "--input", born_file, "--format", "xyzqr",
                 "--ionic-strength", "0.1", "--output", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert abs(rep["config"]["kappa"] - 0.104) < 5e-4


def test_cli_sweep_csv(tmp_path, born_file):
    csv = tmp_path / "sweep.csv"
    out = tmp_path / "r.json"
    code = main(["sweep", "--input", born_file, "--format", "xyzqr",
                 "--lmax-list", "2,4,6", "--tol", "1e-7",
                 "--csv", str(csv), "--output", str(out)])
    assert code == 0
    assert csv.read_text().startswith("lmax,energy_kcal_mol")
