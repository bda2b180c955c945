import copy

import numpy as np
import pytest
import yaml

from tunnelctl import AU_TIME_FS, Grid1D, PROTON_MASS, WaveFunction, expectation, momentum_expectation
from tunnelctl import experiments as exp
from tunnelctl.errors import TunnelctlError
from tunnelctl.experiments import (
    build_initial_state_1d,
    build_initial_state_2d,
    momentum_for_energy,
    nuclear_kinetic_energy,
    nuclear_packet,
    point_key,
    run_point,
    run_scenario,
    run_sweep,
    scenario_config,
    sweep_points,
    width_for_energy,
)
from tunnelctl.grid import HARTREE_EV, fourier_forward
from tunnelctl.io import write_field

SMALL_GEOMETRY = {"n_z": 256, "z_min": -40.0, "z_max": 40.0}
SMALL_PROP = {"absorber_width": 10.0}


def small(name, **sections):
    sections.setdefault("geometry", {})
    sections["geometry"] = {**SMALL_GEOMETRY, **sections["geometry"]}
    sections["propagation"] = {**SMALL_PROP, **sections.get("propagation", {})}
    return scenario_config(name, **sections)


def small_2d(**initial):
    return scenario_config(
        "2d-fourstate-kn0",
        geometry={**SMALL_GEOMETRY, "n_z": 64, "n_r": 256, "r_min": 10.0, "r_max": 30.0},
        initial=initial,
        field={"kind": "none"},
        propagation={**SMALL_PROP, "t_final_fs": 0.2},
    )


class TestElectronicInitialState:
    def test_boost_momentum_r20(self):
        cfg = scenario_config("lct-R20", initial={"seed": 0.0})
        psi = build_initial_state_1d(cfg)
        assert momentum_expectation(psi) == pytest.approx(0.001, abs=1e-9)

    def test_zero_boost_is_real(self):
        cfg = scenario_config("lct-R20", initial={"seed": 0.0, "k_e": 0.0})
        amps = build_initial_state_1d(cfg).amplitudes
        assert np.max(np.abs(amps.imag)) <= 1e-12 * np.max(np.abs(amps.real))

    def test_boost_timescale(self):
        # crossing R = 20 bohr at k_e = 0.001 a.u. takes 2e4 a.u.
        assert 20.0 / 0.001 * AU_TIME_FS == pytest.approx(483.8, abs=0.1)

    def test_seed_population(self):
        from tunnelctl import target_projection

        cfg = scenario_config("lct-R20")
        psi = build_initial_state_1d(cfg)
        target = exp._target_pair(cfg, psi.grid).right.state
        # the R=20 tilted pair overlaps by 6e-5, which shifts the seed slightly
        assert target_projection(psi, target) == pytest.approx(0.003, abs=1e-4)

    @pytest.mark.filterwarnings("ignore:left/right overlap")
    def test_seed_warns_for_overlapping_pair(self):
        with pytest.warns(UserWarning, match="non-orthogonal"):
            build_initial_state_1d(small("lct-R10"))


class TestNuclearInitialState:
    def test_centre_and_momentum(self):
        psi = build_initial_state_2d(scenario_config("2d-fourstate-kn0"))
        rg = psi.grid.r_grid
        assert expectation(psi, rg.x[None, :]) == pytest.approx(20.0, abs=0.01)
        assert abs(momentum_expectation(psi, axis=1)) < 1e-9
        assert psi.norm2() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("sigma, k_n", [(0.31, 0.0), (0.31, 8.0), (0.5, -5.0), (1.0, 0.0)])
    def test_kinetic_energy_formula(self, sigma, k_n):
        rg = Grid1D(2048, 10.0, 30.0)
        chi = nuclear_packet(rg, 20.0, sigma, k_n)
        phi = fourier_forward(WaveFunction(chi, rg))
        t_num = np.sum(np.abs(phi) ** 2 * rg.k**2) * rg.dk / PROTON_MASS
        assert t_num == pytest.approx(nuclear_kinetic_energy(k_n, sigma), rel=1e-9)

    def test_sign_of_k_n(self):
        plus = build_initial_state_2d(small_2d(k_n=5.0))
        minus = build_initial_state_2d(small_2d(k_n=-5.0))
        p_plus = momentum_expectation(plus, axis=1)
        assert p_plus == pytest.approx(5.0, rel=1e-6)
        assert momentum_expectation(minus, axis=1) == pytest.approx(-p_plus, rel=1e-12)

    def test_edge_clipping_warns(self):
        with pytest.warns(UserWarning, match="clipped"):
            nuclear_packet(Grid1D(256, 10.0, 30.0), 11.0, 1.0, 0.0)


class TestEnergyAxes:
    def test_momentum_round_trip(self):
        for e in (0.05, 0.2):
            k = momentum_for_energy(e, 0.31, -1)
            assert k < 0
            assert nuclear_kinetic_energy(k, 0.31) * HARTREE_EV == pytest.approx(e, rel=1e-12)

    def test_below_floor_rejected(self):
        with pytest.raises(ValueError, match="below"):
            momentum_for_energy(0.03, 0.31, 1)

    def test_width_round_trip(self):
        s = width_for_energy(0.1)
        assert nuclear_kinetic_energy(0.0, s) * HARTREE_EV == pytest.approx(0.1, rel=1e-12)

    def test_sweep_points(self):
        base = scenario_config("2d-fourstate-kn0")
        pts = sweep_points(base, "momentum+", [0.1, 0.2])
        assert all(p["k_n"] > 0 and p["sigma"] == 0.31 for p in pts)
        pts = sweep_points(base, "width", [0.1, 0.2])
        assert pts[0]["sigma"] > pts[1]["sigma"] and all(p["k_n"] == 0 for p in pts)


class TestScenarioRuns:
    def test_deterministic_replay(self, tmp_path):
        cfg = small("four-state-R20", propagation={"t_final_fs": 2.0})
        a = run_scenario(cfg)
        b = run_scenario(copy.deepcopy(a.manifest["config"]))
        assert a.trace.table().tobytes() == b.trace.table().tobytes()
        assert a.psi.amplitudes.tobytes() == b.psi.amplitudes.tobytes()

    def test_manifest_contents(self):
        res = run_scenario(small("four-state-R20", propagation={"t_final_fs": 1.0}), write=False)
        m = res.manifest
        assert m["status"] == "ok" and m["stage"] == "done"
        assert m["code_version"]
        for key in ("pump_duration_fs", "dump_duration_fs", "pulses", "t1_fs", "t2_fs", "n_steps"):
            assert key in m["derived"]
        assert set(m["results"]) >= {"p_left", "p_right", "p_total", "ionization", "p_target"}

    def test_failure_stage_recorded(self, tmp_path):
        cfg = small_2d()
        cfg["field"]["kind"] = "lct"
        cfg["output"]["dir"] = str(tmp_path)
        with pytest.raises(TunnelctlError):
            run_scenario(cfg)
        m = yaml.safe_load((tmp_path / "manifest.yaml").read_text())
        assert m["status"] == "failed" and m["stage"] == "field"
        assert "fixed nuclei" in m["error"]

    def test_lct_recorded_replay(self, tmp_path):
        cfg = small("lct-R10", propagation={"t_final_fs": 2.0, "record_stride": 1},
                    field={"replay_unseeded": False})
        cfg["output"]["dir"] = str(tmp_path / "lct")
        closed = run_scenario(cfg)
        replay_cfg = copy.deepcopy(cfg)
        replay_cfg["field"]["kind"] = "recorded"
        replay_cfg["field"]["recorded"] = str(tmp_path / "lct" / "field.dat")
        replay_cfg["output"]["dir"] = None
        opened = run_scenario(replay_cfg, write=False)
        for key in ("p_left", "p_right", "p_total", "p_target"):
            assert opened.final[key] == pytest.approx(closed.final[key], abs=1e-6)

    def test_recorded_dt_mismatch(self, tmp_path):
        path = tmp_path / "f.dat"
        write_field(path, [0.0] * 10, 0.02)
        cfg = small("field-free-R10", field={"kind": "recorded", "recorded": str(path)},
                    propagation={"t_final_fs": 0.01})
        with pytest.raises(TunnelctlError, match="dt"):
            run_scenario(cfg, write=False)


class TestSweep:
    def test_point_key(self):
        a = small_2d()
        b = copy.deepcopy(a)
        b["output"]["dir"] = "elsewhere"
        assert point_key(a) == point_key(b)
        b["initial"]["k_n"] = 1.0
        assert point_key(a) != point_key(b)

    def test_cache_reused(self, tmp_path, monkeypatch):
        cfg = small_2d()
        first = run_point(cfg, tmp_path)
        assert first["status"] == "ok"
        assert len(list(tmp_path.glob("*.yaml"))) == 1

        def boom(*a, **k):
            raise AssertionError("cache miss")

        monkeypatch.setattr(exp, "run_scenario", boom)
        assert run_point(cfg, tmp_path) == first

    def test_trace_thinned_keeps_last_row(self):
        out = run_point(small("field-free-R10", propagation={"t_final_fs": 2.0, "record_stride": 1}),
                        trace_rows=7)
        t = out["trace"]["time"]
        assert len(t) <= 8
        assert t[-1] * AU_TIME_FS == pytest.approx(2.0, abs=0.01)

    def test_failure_isolated(self, monkeypatch):
        real = exp.run_scenario

        def flaky(cfg, write=True):
            if cfg["geometry"]["dims"] == 2 and cfg["initial"]["k_n"] > 3:
                raise FloatingPointError("synthetic blow-up")
            return real(cfg, write)

        monkeypatch.setattr(exp, "run_scenario", flaky)
        res = run_sweep(small_2d(), "momentum+", [0.05, 0.3], workers=1)
        assert res.rows[0]["status"] == "ok"
        assert res.rows[1]["status"].startswith("failed: FloatingPointError")
        assert "ratio_p_right" in res.rows[0] and "ratio_p_right" not in res.rows[1]
        assert len(res.column("p_right")) == 1
        assert "failed" in res.to_text()

    def test_reference_normalization(self):
        ref = {"status": "ok", "p_right": 0.5, "p_total": 0.9}
        res = run_sweep(small_2d(), "momentum-", [0.05], workers=1, reference=ref)
        row = res.rows[0]
        assert row["ratio_p_right"] == pytest.approx(row["p_right"] / 0.5)
        assert row["ratio_p_total"] == pytest.approx(row["p_total"] / 0.9)

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv("QWV_THREADS", "3")
        assert exp.default_workers() == 3
        monkeypatch.delenv("QWV_THREADS")
        assert exp.default_workers() == 1
