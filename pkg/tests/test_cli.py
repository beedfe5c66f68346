import json
import time

import pytest

import irs_spgm.audit as audit_mod
from irs_spgm.baselines import no_irs_rate
from irs_spgm.channel import draw_realization
from irs_spgm.cli import main
from irs_spgm.config import ConfigError, load_config, parse_config

MINIMAL = {"system": {"n_t": 2, "n_b": 1, "n_r": 2, "power_db": 10}, "seed": 11,
           "audit": {"instances": 2, "shapes": [[2, 1, 2]], "grid_levels": 32}}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


class TestConfig:
    def test_defaults_resolved(self):
        rc = parse_config({"system": {"n_t": 2, "n_b": 2, "n_r": 2}})
        assert rc.system.power_linear == pytest.approx(10.0)
        assert rc.rician.rician_factor_linear == pytest.approx(10.0)
        assert rc.rician.distance_m == 30.0 and rc.seed == 0

    def test_inf_rician(self):
        rc = parse_config({"system": {"n_t": 2, "n_b": 2, "n_r": 2}, "channel": {"rician_factor_db": "inf"}})
        assert rc.rician.pure_los
        assert rc.resolved()["channel"]["rician_factor_linear"] == "inf"

    @pytest.mark.parametrize("doc,path", [
        ({"system": {"n_t": 0, "n_b": 1, "n_r": 1}}, "system/n_t"),
        ({"system": {"n_t": 1, "n_b": 1, "n_r": 1, "colour": 3}}, "system"),
        ({"system": {"n_t": 1, "n_b": 1, "n_r": 1}, "solver": {"epsilon": -1}}, "solver/epsilon"),
        ({"system": {"n_t": 1, "n_b": 1}}, "system"),
        ({"system": {"n_t": 1, "n_b": 1, "n_r": 1}, "sweep": {"variable": "beta", "values": [1]}}, "sweep/variable"),
    ])
    def test_field_level_errors(self, doc, path):
        with pytest.raises(ConfigError) as exc:
            parse_config(doc)
        assert any(p == path for p, _ in exc.value.errors)

    def test_semantic_error(self):
        doc = {"system": {"n_t": 1, "n_b": 1, "n_r": 1},
               "sweep": {"variable": "power_db", "values": [10, 0]}}
        with pytest.raises(ConfigError, match="increasing"):
            parse_config(doc)

    def test_overrides(self, tmp_path):
        doc = dict(MINIMAL, sweep={"variable": "power_db", "values": [0], "trials": 50})
        rc = load_config(write(tmp_path, doc), trials_override=2, seed_override=5)
        assert rc.sweep.trials == 2 and rc.seed == 5 and rc.sweep.master_seed == 5


class TestSolve:
    def test_byte_stable(self, tmp_path):
        cfg = write(tmp_path, MINIMAL)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run("solve", "--config", cfg, "--out", a) == 0
        assert run("solve", "--config", cfg, "--out", b) == 0
        assert a.read_bytes() == b.read_bytes()
        doc = json.loads(a.read_text())
        res = doc["result"]
        assert len(res["phases"]) == 2
        assert all(len(row) == 1 and len(row[0]) == 2 for row in res["F"])
        for key in ("power_allocation", "singular_values", "r_hat", "r_tilde", "iterations", "converged"):
            assert key in res
        assert doc["config"]["seed"] == 11 and doc["audit"]["violations"] == []

    def test_disabled_irs_matches_direct_link(self, tmp_path):
        doc = json.loads(json.dumps(MINIMAL))
        doc["system"]["beta"] = 0.0
        out = tmp_path / "o.json"
        assert run("solve", "--config", write(tmp_path, doc), "--out", out) == 0
        res = json.loads(out.read_text())
        rc = parse_config(doc)
        real = draw_realization(rc.system, rc.rician, rc.seed)
        assert len(res["result"]["phases"]) == 2
        assert res["result"]["r_tilde"] == pytest.approx(no_irs_rate(real, rc.system), abs=1e-12)

    def test_full_size_instance(self, tmp_path):
        doc = {"system": {"n_t": 16, "n_b": 4, "n_r": 16, "power_db": 10}, "seed": 3}
        out = tmp_path / "o.json"
        assert run("solve", "--config", write(tmp_path, doc), "--out", out) == 0
        assert json.loads(out.read_text())["audit"]["violations"] == []

    def test_stdout(self, tmp_path, capsys):
        assert run("solve", "--config", write(tmp_path, MINIMAL)) == 0
        assert "r_tilde" in json.loads(capsys.readouterr().out)["result"]

    def test_non_convergence_still_exit_zero(self, tmp_path):
        doc = dict(MINIMAL, solver={"max_iter": 1, "epsilon": 1e-300})
        out = tmp_path / "o.json"
        assert run("solve", "--config", write(tmp_path, doc), "--out", out) == 0
        assert json.loads(out.read_text())["result"]["converged"] is False

    def test_schema_violation_exit_1(self, tmp_path, capsys):
        bad = {"system": {"n_t": 2, "n_b": 1, "n_r": -1}}
        assert run("solve", "--config", write(tmp_path, bad)) == 1
        assert "system/n_r" in capsys.readouterr().err

    def test_missing_and_malformed_files(self, tmp_path):
        assert run("solve", "--config", tmp_path / "nope.json") == 1
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run("solve", "--config", p) == 1
        assert run("frobnicate", "--config", p) == 1

    def test_unwritable_output_exit_3(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert run("solve", "--config", write(tmp_path, MINIMAL), "--out", blocker / "x.json") == 3


class TestSweep:
    def sweep_doc(self, **sw):
        base = {"variable": "power_db", "values": [0, 10], "trials": 1, "exhaustive_candidates": 100}
        base.update(sw)
        return dict(MINIMAL, sweep=base)

    def test_four_method_csv(self, tmp_path):
        out = tmp_path / "out"
        assert run("sweep", "--config", write(tmp_path, self.sweep_doc(trials=2)), "--out", out, "--workers", 1) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "method,sweep_value,trial,rate,iterations"
        assert {line.split(",")[0] for line in lines[1:]} == {"spgm_admm", "random_ps", "exhaustive_random", "no_irs"}
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["sweep"]["trials"] == 2 and "build" in summary

    def test_growth_summary(self, tmp_path):
        doc = self.sweep_doc(variable="n_r", values=[2, 4, 8, 16], methods=["spgm_admm", "no_irs"])
        doc["channel"] = {"rician_factor": "inf"}
        out = tmp_path / "out"
        assert run("sweep", "--config", write(tmp_path, doc), "--out", out, "--workers", 1) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["los_asymptote"]) == {"2", "4", "8", "16"}
        assert set(summary["quadratic_growth_deviation"]) == {"spgm_admm", "no_irs"}

    def test_smoke_is_fast(self, tmp_path):
        start = time.perf_counter()
        assert run("sweep", "--config", write(tmp_path, self.sweep_doc()), "--out", tmp_path / "o", "--workers", 1) == 0
        assert time.perf_counter() - start < 5.0

    def test_byte_stable_with_workers(self, tmp_path):
        cfg = write(tmp_path, self.sweep_doc(trials=3))
        assert run("sweep", "--config", cfg, "--out", tmp_path / "a", "--workers", 1) == 0
        assert run("sweep", "--config", cfg, "--out", tmp_path / "b", "--workers", 2) == 0
        for name in ("sweep.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_needs_sweep_section_and_out(self, tmp_path):
        assert run("sweep", "--config", write(tmp_path, MINIMAL), "--out", tmp_path / "o") == 1
        assert run("sweep", "--config", write(tmp_path, self.sweep_doc())) == 1

    def test_unwritable_out_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert run("sweep", "--config", write(tmp_path, self.sweep_doc()), "--out", blocker, "--workers", 1) == 3


class TestAudit:
    def test_default_battery_passes(self, tmp_path, capsys):
        doc = {"system": {"n_t": 2, "n_b": 1, "n_r": 2}, "audit": {"instances": 3}}
        assert run("audit", "--config", write(tmp_path, doc)) == 0
        assert "12 instances: 0 violation" in capsys.readouterr().out

    def test_injected_asymmetry(self, tmp_path, capsys):
        assert run("audit", "--config", write(tmp_path, MINIMAL), "--inject-fault", "hermitian") == 2
        out = capsys.readouterr().out
        assert "invariant=hermitian" in out and "seed=" in out

    def test_grid_oracle_runs_at_three_elements(self, tmp_path, monkeypatch):
        calls = []
        orig = audit_mod.grid_oracle

        def spy(real, cfg, levels):
            calls.append((real.n_r, levels))
            return orig(real, cfg, levels)

        monkeypatch.setattr(audit_mod, "grid_oracle", spy)
        doc = {"system": {"n_t": 2, "n_b": 2, "n_r": 3},
               "audit": {"instances": 2, "shapes": [[2, 2, 3], [2, 2, 5]], "grid_levels": 32}}
        assert run("audit", "--config", write(tmp_path, doc)) == 0
        assert calls == [(3, 32), (3, 32)]

    def test_report_file_stable(self, tmp_path):
        cfg = write(tmp_path, MINIMAL)
        assert run("audit", "--config", cfg, "--out", tmp_path / "a.json") == 0
        assert run("audit", "--config", cfg, "--out", tmp_path / "b.json") == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
