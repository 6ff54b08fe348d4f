import csv
import logging
import math
from pathlib import Path

import pytest

from mcavqe.cli import main
from mcavqe.config import KB_OVER_J1, anisotropy_ratio, check_parameter_consistency, load_config, parse_config
from mcavqe.errors import ConfigurationError, UsageError
from mcavqe.model import FieldSpec, ModelParams
from mcavqe.runner import CSV_COLUMNS, emit_csv, run_sweep

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = """
[sweep]
kind = field_b
start = 1.0
stop = 1.4
step = 0.1
twins = {twins}
output_dir = {out}
emit_plots = {plots}

[optimizer]
n_restarts = 2
{extra}
"""


def small(tmp_path, twins=False, plots=False, extra=""):
    path = tmp_path / "run.ini"
    path.write_text(SMALL.format(out=tmp_path / "out", twins=twins, plots=plots, extra=extra))
    return path


def test_shipped_configs_parse_and_keep_reference_ratio():
    names = sorted(p.name for p in CONFIGS.glob("*.ini"))
    assert "default.ini" in names and len(names) >= 5
    for path in CONFIGS.glob("*.ini"):
        cfg = load_config(path)
        assert check_parameter_consistency(cfg.model)
        assert cfg.model == ModelParams()
    assert anisotropy_ratio(load_config(CONFIGS / "default.ini").model) == pytest.approx(KB_OVER_J1, abs=5e-10)


def test_default_config_recipe():
    cfg = load_config(CONFIGS / "default.ini")
    assert cfg.sweep.kind == "field_b" and cfg.twins
    fields = cfg.sweep.fields()
    assert len(fields) == 351 and fields[-1].magnitude == 3.5 and fields[0].plane == "fixed_b"


def test_angle_sweep_uses_radians_internally():
    cfg = parse_config("[sweep]\nkind = angle_bc\nfixed_magnitude = 1.5\nstart = 0\nstop = 90\nstep = 45\n")
    assert [f.alpha_h for f in cfg.sweep.fields()] == [0.0, math.pi / 4, math.pi / 2]
    assert all(f.magnitude == 1.5 for f in cfg.sweep.fields())


@pytest.mark.parametrize("text,field", [
    ("[sweep]\nstep = 0\n", "sweep.step"),
    ("[sweep]\nstart = 5\nstop = 1\n", "sweep.start"),
    ("[sweep]\nkind = angle_bc\n", "sweep.fixed_magnitude"),
    ("[sweep]\nkind = spiral\n", "sweep.kind"),
    ("[model]\nj1 = abc\n", "model.j1"),
    ("[model]\nbogus = 1\n", "model.bogus"),
    ("[optimizer]\nf_tol = 0\n", "optimizer"),
    ("[weird]\nx = 1\n", "weird"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigurationError, match=field.replace(".", r"\.")):
        parse_config(text)


def test_cli_exit_2_on_bad_config(tmp_path, caplog):
    path = tmp_path / "bad.ini"
    path.write_text("[sweep]\nstep = -1\n")
    with caplog.at_level(logging.ERROR):
        assert main(["sweep", str(path)]) == 2
    assert "sweep.step" in caplog.text
    assert main(["sweep", str(tmp_path / "missing.ini")]) == 2
    assert main(["no-such-command"]) == 2


def test_sweep_writes_csv_and_report(tmp_path):
    assert main(["sweep", str(small(tmp_path))]) == 0
    out = tmp_path / "out"
    rows = list(csv.reader((out / "field_b.csv").open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 6
    assert {r[-1] for r in rows[1:]} == {"true"}
    assert (out / "field_b_phases.json").exists()
    for r in rows[1:]:
        d = dict(zip(CSV_COLUMNS, r))
        parts = sum(float(d[k]) for k in ("e_j1", "e_j1p", "e_j2", "e_j2p", "e_zeeman", "e_mca"))
        assert parts == pytest.approx(float(d["e_total"]), abs=1e-9)


def test_sweep_is_byte_identical_and_seed_override(tmp_path):
    cfg = small(tmp_path, twins=True)
    assert main(["sweep", str(cfg), "--output-dir", str(tmp_path / "a"), "--seed", "7"]) == 0
    assert main(["sweep", str(cfg), "--output-dir", str(tmp_path / "b"), "--seed", "7"]) == 0
    assert (tmp_path / "a" / "field_b.csv").read_bytes() == (tmp_path / "b" / "field_b.csv").read_bytes()


def test_non_convergence_exits_3_with_partial_csv(tmp_path):
    assert main(["sweep", str(small(tmp_path, extra="max_evals = 20\npolish_rounds = 0"))]) == 3
    rows = list(csv.reader((tmp_path / "out" / "field_b.csv").open()))
    assert rows[0][-1] == "converged" and "false" in {r[-1] for r in rows[1:]}


def test_unwritable_output_exits_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["sweep", str(small(tmp_path)), "--output-dir", str(blocker / "sub")]) == 2


def test_plots_are_svg(tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["sweep", str(small(tmp_path, plots=True))]) == 0
    svgs = sorted(p.name for p in (tmp_path / "out").glob("*.svg"))
    assert svgs == ["field_b_energy.svg", "field_b_magnetization.svg", "field_b_torque.svg"]


def test_emit_csv_zero_field_row(tmp_path, params, zero_field):
    points, _ = run_sweep(params, [zero_field])
    path = emit_csv(points, tmp_path / "one.csv")
    row = dict(zip(CSV_COLUMNS, list(csv.reader(path.open()))[1]))
    assert row["e_total"] == "-38.30592"
    assert row["e_mca_per_site"] == "-0.00023"
    assert row["phase"] == "afm_chain"
    with pytest.raises(UsageError):
        emit_csv([], tmp_path / "empty.csv")
    assert not (tmp_path / "empty.csv").exists()


def test_ground_state_command(capsys):
    assert main(["ground-state"]) == 0
    out = capsys.readouterr().out
    assert "-38.305000000" in out and "-0.000230000" in out
    assert main(["ground-state", "--field", "3.5", "--plane", "fixed_b"]) == 0


def test_shot_demo_command(capsys):
    assert main(["shot-demo", "--repetitions", "5"]) == 0
    out = capsys.readouterr().out
    assert "exchange" in out and "mca" in out


def test_oracle_check_quick(capsys):
    assert main(["oracle-check", "--perturbations", "0"]) == 0
    assert "305.1" in capsys.readouterr().out


def test_threads_flag(tmp_path):
    assert main(["sweep", str(small(tmp_path)), "--threads", "0"]) == 2


def test_cold_mode_is_worker_independent(tmp_path):
    cfg = small(tmp_path)
    text = cfg.read_text().replace("[sweep]\n", "[sweep]\nmode = cold\n")
    cfg.write_text(text)
    assert main(["sweep", str(cfg), "--output-dir", str(tmp_path / "one")]) == 0
    assert main(["sweep", str(cfg), "--output-dir", str(tmp_path / "two"), "--threads", "2"]) == 0
    assert (tmp_path / "one" / "field_b.csv").read_bytes() == (tmp_path / "two" / "field_b.csv").read_bytes()
