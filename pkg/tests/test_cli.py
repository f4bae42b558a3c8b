import json

import numpy as np
import pytest

from exchange_qc.cli import EXIT_DATA, EXIT_FAILED, EXIT_OK, EXIT_SEARCH, EXIT_USAGE, main
from exchange_qc.schedule import ScheduleFile, load


@pytest.fixture(scope="module")
def cnot_schedule(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    out, rep = d / "cnot.schedule", d / "cnot.report.json"
    code = main(["synthesize", "--target", "cnot", "--mode", "serial", "--max-steps", "19",
                 "--restarts", "5000", "--seed", "42", "-o", str(out), "--report", str(rep)])
    return code, out, rep


def test_synthesize_cnot(cnot_schedule):
    code, out, rep = cnot_schedule
    assert code == EXIT_OK
    sched = load(out)
    assert len(sched.steps) == 19
    assert sched.metadata["seed"] == 42 and sched.metadata["success"] is True
    assert "tool_version" in sched.metadata and "objective" in sched.metadata
    assert "wall_time" not in json.loads(rep.read_text())


def test_synthesize_is_byte_deterministic(cnot_schedule, tmp_path):
    _, out, rep = cnot_schedule
    out2, rep2 = tmp_path / "b.schedule", tmp_path / "b.json"
    main(["synthesize", "--target", "cnot", "--max-steps", "19", "--restarts", "5000", "--seed", "42",
          "-o", str(out2), "--report", str(rep2)])
    assert out.read_bytes() == out2.read_bytes()
    assert rep.read_bytes() == rep2.read_bytes()


def test_verify_synthesized(cnot_schedule, capsys):
    _, out, _ = cnot_schedule
    assert main(["verify", str(out), "--json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and rep["f"] < 1e-12 and rep["residual"] < 6e-5


def test_verify_zero_schedule_fails(cnot_schedule, tmp_path, capsys):
    _, out, _ = cnot_schedule
    seq = load(out).to_sequence()
    zero = tmp_path / "zero.schedule"
    ScheduleFile.from_sequence(seq.with_times(np.zeros(19))).save(zero)
    assert main(["verify", str(zero), "--target", "cnot"]) == EXIT_FAILED
    assert "FAIL" in capsys.readouterr().out


def test_verify_perturbed_schedule(cnot_schedule, tmp_path, capsys):
    _, out, _ = cnot_schedule
    seq = load(out).to_sequence()
    pert = tmp_path / "pert.schedule"
    ScheduleFile.from_sequence(seq.with_times(seq.times + 1e-3)).save(pert)
    assert main(["verify", str(pert), "--target", "cnot", "--json"]) == EXIT_FAILED
    rep = json.loads(capsys.readouterr().out)
    assert not rep["checks"]["residual"]
    assert rep["checks"]["unitary"] and rep["checks"]["sector_conserved"]


def test_verify_threshold_flags(cnot_schedule):
    _, out, _ = cnot_schedule
    assert main(["verify", str(out), "--residual-max", "0"]) == EXIT_FAILED


def test_synthesize_two_steps_fails(tmp_path):
    out, rep = tmp_path / "two.schedule", tmp_path / "two.json"
    code = main(["synthesize", "--target", "cnot", "--mode", "serial", "--max-steps", "2", "--restarts", "40",
                 "-o", str(out), "--report", str(rep)])
    assert code == EXIT_SEARCH
    assert load(out).metadata["success"] is False
    assert json.loads(rep.read_text())["success"] is False


def test_synthesize_z_rotation(tmp_path):
    out = tmp_path / "rz.schedule"
    code = main(["synthesize", "--target", "rz:3.14159", "--mode", "serial", "--max-steps", "1", "-o", str(out)])
    assert code == EXIT_OK
    seq = load(out).to_sequence()
    assert len(seq) == 1 and seq.times[0] == pytest.approx(0.5, abs=1e-5)


@pytest.mark.parametrize("n,S,Sz,dim", [(3, "1/2", "1/2", 2), (6, "1", "1", 9), (2, "0", "0", 1)])
def test_sector_info(n, S, Sz, dim, capsys):
    assert main(["sector-info", str(n), S, Sz, "--json"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["dim"] == dim and len(out["checksum"]) == 16


def test_sector_info_invalid(capsys):
    assert main(["sector-info", "3", "3/2", "1"]) == EXIT_USAGE
    assert main(["sector-info", "4", "1/3", "1"]) == EXIT_USAGE


def test_single_qubit_command(tmp_path):
    out = tmp_path / "h.schedule"
    assert main(["single-qubit", "--target", "h", "--flavor", "parallel-3", "-o", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK


def test_bloch_axis_command(capsys):
    assert main(["bloch-axis", "1", "2"]) == EXIT_OK
    assert "120.000000000" in capsys.readouterr().out
    assert main(["bloch-axis", "2", "3"]) == EXIT_USAGE


def test_usage_errors(capsys):
    assert main(["synthesize", "--target", "toffoli"]) == EXIT_USAGE
    assert main(["synthesize", "--target", "cnot", "--restarts", "0"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["synthesize", "--target", "cnot", "--mode", "diagonal"])
    assert exc.value.code == EXIT_USAGE


def test_malformed_schedule(tmp_path):
    bad = tmp_path / "bad.schedule"
    bad.write_text("{ nope")
    assert main(["verify", str(bad), "--target", "cnot"]) == EXIT_DATA
    bad.write_text(json.dumps({"version": 1, "n_spins": 6, "mode": "serial", "layout": "line",
                               "steps": [[{"i": 0, "j": 3, "tau": "0.1"}]]}))
    assert main(["verify", str(bad), "--target", "cnot"]) == EXIT_DATA
    assert main(["verify", str(tmp_path / "absent.schedule"), "--target", "cnot"]) == EXIT_DATA


def test_verify_needs_target(tmp_path):
    path = tmp_path / "anon.schedule"
    path.write_text(json.dumps({"version": 1, "n_spins": 3, "mode": "serial", "layout": "line",
                                "steps": [[{"i": 0, "j": 1, "tau": "0.5"}]]}))
    assert main(["verify", str(path)]) == EXIT_USAGE
    assert main(["verify", str(path), "--target", "rz:3.141592653589793"]) == EXIT_OK
