import math

import numpy as np
import pytest

from bfsmc import (BlowupError, Scenario, analyze, builtin_disturbance,
                   make_params, run, run_batch, step_rk4, write_csv)
from bfsmc.sim import expected_gain_trace


class TestStepRK4:
    def test_zero_field(self):
        x = np.array([1.0, -2.0])
        assert step_rk4(lambda t, x: np.zeros(2), 0.0, x, 0.3) == pytest.approx(x)

    def test_exponential_accuracy(self):
        out = step_rk4(lambda t, x: x, 0.0, 1.0, 0.1)
        assert abs(out - math.exp(0.1)) < 1e-7
        assert out == pytest.approx(1.10517091, abs=1e-7)

    def test_linear_chain_exact(self):
        out = step_rk4(lambda t, x: np.array([x[1], 0.0]), 0.0,
                       np.array([0.0, 1.0]), 0.5)
        assert out == pytest.approx([0.5, 1.0])

    def test_blowup_detection(self):
        with pytest.raises(BlowupError):
            step_rk4(lambda t, x: np.array([np.inf]), 0.0, np.array([1.0]), 0.1)


def _mini_scenario(**kw):
    base = dict(r=1, p=1.0, kappa=-0.5, gains=(1.0,),
                controller="pure_chain",
                disturbance=builtin_disturbance("zero"),
                z0=(1.0,), h=1e-3, horizon=2.0, seed=0, name="mini")
    base.update(kw)
    return Scenario(**base)


class TestRun:
    def test_pure_chain_converges_past_sqrt2(self, warm):
        traj = run(_mini_scenario(h=1e-4))
        after = traj.t >= math.sqrt(2.0) + 0.01
        assert np.all(traj.V[after] <= 1e-9)

    def test_open_loop_grows_without_crossing(self, warm):
        d = builtin_disturbance("affine_phi_sin_gamma")
        traj = run(_mini_scenario(r=3, kappa=-1.0 / 6.0, gains=(1.0, 3.0, 18.0),
                                  controller="open_loop", disturbance=d,
                                  z0=(1.0, 1.0, -1.0), horizon=5.0))
        assert traj.crossing() is None
        assert traj.z[-1, -1] > 10.0 * abs(traj.z[0, -1])
        assert np.all(np.diff(traj.z[:, -1]) > 0)  # phi > 0 drives z_r up

    def test_determinism_identical_bytes(self, warm, tmp_path):
        scenario = _mini_scenario(controller="case1", mu0=5.0, lam=0.2,
                                  disturbance=builtin_disturbance("zero"))
        blobs = []
        for i in range(2):
            traj = run(scenario)
            path = tmp_path / f"det_{i}.csv"
            write_csv(traj, path, 1)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]

    def test_crossing_refinement_tolerance(self, case1_traj):
        cross = case1_traj.crossing()
        g = cross.info["V"] - 0.5 * cross.info["bound"]
        assert -1e-6 * cross.info["bound"] <= g <= 0.0

    def test_pure_chain_energy_decrease(self, warm):
        # V non-increasing along the closed pure chain at every grid step
        traj = run(_mini_scenario(r=3, kappa=-1.0 / 6.0, gains=(1.0, 3.0, 18.0),
                                  z0=(1.0, 1.0, -1.0), h=1e-3, horizon=10.0))
        assert np.all(np.diff(traj.V) <= 1e-9)

    def test_gain_trace_matches_reconstruction(self, case1_traj):
        np.testing.assert_allclose(case1_traj.gains["L"],
                                   expected_gain_trace(case1_traj), rtol=1e-12)

    def test_grid_spacing(self, case1_traj):
        h = case1_traj.meta["h"]
        assert np.allclose(np.diff(case1_traj.t), h, rtol=0, atol=1e-12)
        assert case1_traj.t.size == round(case1_traj.meta["horizon"] / h) + 1

    def test_exactly_one_crossing_event(self, case1_traj):
        kinds = [e.kind for e in case1_traj.events]
        assert kinds.count("crossing") == 1


class TestBatch:
    def test_share_nothing_batch_matches_sequential(self, warm):
        scenarios = [_mini_scenario(horizon=0.5),
                     _mini_scenario(horizon=0.5, z0=(0.5,))]
        seq = [run(s) for s in scenarios]
        par = run_batch(scenarios, max_workers=2)
        for a, b in zip(seq, par):
            np.testing.assert_array_equal(a.z, b.z)


class TestAnalyze:
    def test_containment_report(self, case1_traj):
        report = analyze(case1_traj)
        assert report.containment_pass is True
        assert report.v_minus_bound_max < 0
        assert report.n_escapes == 0
        assert report.t_bar == case1_traj.crossing().time

    def test_gain_ratio_definition(self, case2_traj):
        report = analyze(case2_traj)
        t_bar = report.t_bar
        T = case2_traj.t[-1]
        span = T - t_bar
        early = (case2_traj.t >= t_bar) & (case2_traj.t <= t_bar + 0.25 * span)
        tail = case2_traj.t >= t_bar + 0.75 * span
        expected = case2_traj.gains["L2"][tail].max() / case2_traj.gains["L2"][early].max()
        assert report.gain_tail_ratio["L2"] == pytest.approx(expected, rel=1e-12)

    def test_no_crossing_report(self, anchor_traj):
        report = analyze(anchor_traj)
        assert report.t_bar is None
        assert report.containment_pass is None

    def test_text_rendering(self, case1_traj):
        text = analyze(case1_traj).to_text()
        assert "crossing" in text and "containment" in text
