import json
import math

import numpy as np
import pytest

from spintomo import (
    DensityMatrix,
    TwiceSpin,
    maximally_mixed,
    random_density,
    read_measurement_set,
    write_measurement_set,
)
from spintomo.cli import main


def write_state(path, rho):
    path.write_text(json.dumps(rho.to_json_dict(), indent=2) + "\n")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_exact_spin_half_isotropic(self, tmp_path, capsys):
        state = tmp_path / "state.json"
        out = tmp_path / "meas.json"
        write_state(state, maximally_mixed(1))
        code, _, _ = run(capsys, "simulate", state, "--out", out)
        assert code == 0
        meas = read_measurement_set(str(out))
        assert len(meas.records) == 4
        assert all(abs(r.p_s - 0.5) < 1e-12 for r in meas.records)

    def test_spin_one_grid_labels(self, tmp_path, capsys):
        state = tmp_path / "state.json"
        out = tmp_path / "meas.json"
        write_state(state, random_density(2, seed=1))
        code, _, _ = run(capsys, "simulate", state, "--out", out)
        assert code == 0
        meas = read_measurement_set(str(out))
        assert len(meas.records) == 9
        assert {(r.q, r.r_index) for r in meas.records} == {(q, r) for q in range(3) for r in range(3)}

    def test_shot_mode_byte_identical(self, tmp_path, capsys):
        state = tmp_path / "state.json"
        write_state(state, random_density(2, seed=7))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code, _, _ = run(capsys, "simulate", state, "--out", out, "--shots", 100000, "--seed", 13)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_seed_default(self, tmp_path, capsys, monkeypatch):
        state = tmp_path / "state.json"
        write_state(state, random_density(1, seed=3))
        monkeypatch.setenv("SPINTOMO_SEED", "77")
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code, _, _ = run(capsys, "simulate", state, "--out", out, "--shots", 1000)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unphysical_state_refused_for_shots(self, tmp_path, capsys):
        bad = DensityMatrix(
            twice_s=TwiceSpin(1), entries=np.array([[1.2, 0.0], [0.0, -0.2]], dtype=complex)
        )
        state = tmp_path / "state.json"
        write_state(state, bad)
        code, _, err = run(capsys, "simulate", state, "--out", tmp_path / "m.json", "--shots", 100)
        assert code == 2
        assert "unphysical" in err
        # exact mode still works: the forward map is linear
        code, _, _ = run(capsys, "simulate", state, "--out", tmp_path / "m.json")
        assert code == 0

    def test_missing_state_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "simulate", tmp_path / "nope.json", "--out", tmp_path / "m.json")
        assert code == 4

    def test_malformed_state_file(self, tmp_path, capsys):
        state = tmp_path / "state.json"
        state.write_text("{not json")
        code, _, _ = run(capsys, "simulate", state, "--out", tmp_path / "m.json")
        assert code == 2

    def test_bad_grid_flag(self, tmp_path, capsys):
        state = tmp_path / "state.json"
        write_state(state, maximally_mixed(2))
        code, _, err = run(capsys, "simulate", state, "--out", tmp_path / "m.json", "--r", 1.0)
        assert code == 2
        assert "duplicate circle radii" in err


class TestReconstruct:
    def test_round_trip_exact(self, tmp_path, capsys):
        rho = random_density(3, seed=5)
        state, meas, out, diag = (tmp_path / n for n in ("s.json", "m.json", "r.json", "d.json"))
        write_state(state, rho)
        assert run(capsys, "simulate", state, "--out", meas)[0] == 0
        code, _, _ = run(capsys, "reconstruct", meas, "--out", out, "--diagnostics", diag)
        assert code == 0
        rho_hat = DensityMatrix.from_json_dict(json.loads(out.read_text()))
        assert np.abs(rho_hat.entries - rho.entries).max() < 1e-8
        d = json.loads(diag.read_text())
        assert d["trace_defect"] < 1e-9 and d["hermiticity_defect"] < 1e-9
        assert len(d["block_condition"]) == 4 and not d["renormalized"]

    def test_reconstruct_to_stdout(self, tmp_path, capsys):
        state, meas = tmp_path / "s.json", tmp_path / "m.json"
        write_state(state, maximally_mixed(1))
        run(capsys, "simulate", state, "--out", meas)
        code, out_text, _ = run(capsys, "reconstruct", meas)
        assert code == 0
        rho_hat = DensityMatrix.from_json_dict(json.loads(out_text))
        assert np.abs(rho_hat.entries - 0.5 * np.eye(2)).max() < 1e-10

    def test_fermionic_zero_shift_exits_three(self, tmp_path, capsys):
        state, meas = tmp_path / "s.json", tmp_path / "m.json"
        write_state(state, random_density(1, seed=2))
        assert run(capsys, "simulate", state, "--out", meas, "--delta", 0.0)[0] == 0
        code, _, err = run(capsys, "reconstruct", meas, "--out", tmp_path / "r.json")
        assert code == 3
        assert "singular block m=1" in err

    def test_renormalize_gives_unit_trace(self, tmp_path, capsys):
        state, meas, out = tmp_path / "s.json", tmp_path / "m.json", tmp_path / "r.json"
        write_state(state, random_density(2, seed=9))
        run(capsys, "simulate", state, "--out", meas, "--shots", 500, "--seed", 3)
        code, _, _ = run(capsys, "reconstruct", meas, "--out", out, "--renormalize")
        assert code == 0
        rho_hat = DensityMatrix.from_json_dict(json.loads(out.read_text()))
        assert abs(np.trace(rho_hat.entries) - 1.0) < 1e-14

    def test_incomplete_measurement_exits_two(self, tmp_path, capsys):
        state, meas = tmp_path / "s.json", tmp_path / "m.json"
        write_state(state, random_density(2, seed=4))
        run(capsys, "simulate", state, "--out", meas)
        data = json.loads(meas.read_text())
        data["records"] = data["records"][:-1]
        meas.write_text(json.dumps(data))
        code, _, err = run(capsys, "reconstruct", meas, "--out", tmp_path / "r.json")
        assert code == 2
        assert "missing measurement" in err

    def test_multipole_mode_round_trip(self, tmp_path, capsys):
        rho = random_density(2, seed=8)
        state, meas, out = tmp_path / "s.json", tmp_path / "m.json", tmp_path / "r.json"
        write_state(state, rho)
        assert run(capsys, "simulate", state, "--out", meas, "--mode", "multipole")[0] == 0
        m = read_measurement_set(str(meas))
        assert m.mode == "multipole"
        assert len(m.records) == 3 * 5  # (2s+1) cones x (4s+1) azimuths
        code, _, _ = run(capsys, "reconstruct", meas, "--out", out)
        assert code == 0
        rho_hat = DensityMatrix.from_json_dict(json.loads(out.read_text()))
        assert np.abs(rho_hat.entries - rho.entries).max() < 1e-8


class TestFileFormats:
    def test_measurement_write_read_write_identical(self, tmp_path, capsys):
        state, meas = tmp_path / "s.json", tmp_path / "m.json"
        write_state(state, random_density(3, seed=6))
        run(capsys, "simulate", state, "--out", meas, "--shots", 2000, "--seed", 1)
        first = meas.read_bytes()
        again = tmp_path / "again.json"
        write_measurement_set(read_measurement_set(str(meas)), str(again))
        assert again.read_bytes() == first


class TestRoundtripCommand:
    def test_exact_mode_errors_small(self, capsys):
        code, out, _ = run(capsys, "roundtrip", "--twice-s", 4, "--trials", 5, "--seed", 2)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "trial,shots,max_abs_error,trace_defect,hermiticity_defect,min_eig"
        assert len(lines) == 6
        for line in lines[1:]:
            fields = line.split(",")
            assert int(fields[1]) == 0
            assert float(fields[2]) < 1e-8

    def test_row_count_matches_trials(self, capsys):
        code, out, _ = run(capsys, "roundtrip", "--twice-s", 1, "--trials", 20, "--seed", 0)
        assert code == 0
        assert len(out.strip().splitlines()) == 21

    def test_deterministic_output(self, capsys):
        a = run(capsys, "roundtrip", "--twice-s", 2, "--trials", 3, "--shots", 1000, "--seed", 5)
        b = run(capsys, "roundtrip", "--twice-s", 2, "--trials", 3, "--shots", 1000, "--seed", 5)
        assert a == b


class TestConditionCommand:
    def test_kappa_at_least_one(self, capsys):
        code, out, err = run(
            capsys, "condition", "--twice-s", 2, "--r-min", 1.2, "--r-max", 2.0, "--steps", 5
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "r,m,kappa"
        assert len(lines) == 1 + 5 * 3
        assert all(float(line.split(",")[2]) >= 1.0 for line in lines[1:])
        assert "recommended r" in err

    def test_r_near_one_excluded(self, capsys):
        code, out, err = run(
            capsys, "condition", "--twice-s", 1, "--r-min", 0.5, "--r-max", 1.5, "--steps", 3,
            "--delta", 0.5,
        )
        assert code == 0
        assert "skipping r=1.0" in err
        rows = out.strip().splitlines()[1:]
        assert all(abs(float(row.split(",")[0]) - 1.0) > 1e-6 for row in rows)

    def test_recommendation_deterministic(self, capsys):
        args = ("condition", "--twice-s", 3, "--r-min", 1.1, "--r-max", 1.8, "--steps", 8,
                "--delta", 0.25)
        assert run(capsys, *args) == run(capsys, *args)


class TestAppendixDemo:
    def test_spin_one_report(self, capsys):
        code, out, _ = run(capsys, "appendix-demo", "--twice-s", 2, "--seed", 0)
        assert code == 0
        assert "rank 7 of 9" in out
        assert "rank 9 of 9" in out
        assert "(full rank)" in out
        err_line = [l for l in out.splitlines() if "round trip" in l][0]
        assert float(err_line.rsplit("=", 1)[1]) < 1e-8
        pi0_line = [l for l in out.splitlines() if "Pi_0" in l][0]
        assert float(pi0_line.rsplit("=", 1)[1]) < 1e-12

    def test_spin_half(self, capsys):
        code, out, _ = run(capsys, "appendix-demo", "--twice-s", 1, "--seed", 1)
        assert code == 0
        assert "rank 3 of 4" in out and "rank 4 of 4" in out
