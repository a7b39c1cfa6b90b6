import numpy as np
import pytest

from bfsmc import (BARRIER, SEARCHING, DomainError, GrowthGain, HostState,
                   control_host, gains_host, make_params)
from bfsmc.adapt_host import host_exponent

P3 = make_params(3, 1.0, -1.0 / 6.0)
P1 = make_params(1, 1.0, -0.5)


def test_host_exponent():
    assert host_exponent(P3) == pytest.approx(1.0 / 12.0)
    assert host_exponent(P1) == pytest.approx(0.25)


class TestGainsHost:
    def test_searching(self):
        growth = GrowthGain(l0=2.5, slope=0.0, exp_rate=0.0)
        L1, L2, state = gains_host(3.0, 1.0, growth, P3, HostState(epsilon=0.1))
        assert (L1, L2) == (2.5, 0.0)
        assert state.phase == SEARCHING

    def test_continuity_at_crossing(self):
        growth = GrowthGain(l0=1.0, slope=3.0, exp_rate=0.0)
        eps = 0.1
        t = 1.0
        before, _, _ = gains_host(t, 0.5 * eps * 1.0000001, growth, P3,
                                  HostState(epsilon=eps))
        after, L2, state = gains_host(t, 0.5 * eps, growth, P3,
                                      HostState(epsilon=eps))
        assert state.phase == BARRIER
        assert after == pytest.approx(before, rel=1e-6)
        assert after == pytest.approx(growth.ell(t), rel=1e-12)
        assert L2 == pytest.approx(2.0)

    def test_paper_cbar_arithmetic(self):
        # kappa = -1/6, l(t_bar) = 4: c_bar = 4 / 2^(1/12)
        growth = GrowthGain(l0=4.0, slope=0.0, exp_rate=0.0)
        _, _, state = gains_host(0.3, 0.05, growth, P3, HostState(epsilon=0.1))
        assert state.c_bar == pytest.approx(4.0 / 2.0 ** (1.0 / 12.0), rel=1e-12)
        assert state.c_bar == pytest.approx(3.7755, abs=1e-4)

    def test_epsilon_domain(self):
        with pytest.raises(DomainError):
            HostState(epsilon=0.0)


class TestControlHost:
    def test_searching_keeps_xi_frozen(self, pair_r3):
        growth = GrowthGain(l0=2.0, slope=0.0, exp_rate=0.0)
        state = HostState(epsilon=0.1)
        z = np.array([0.5, 0.4, -0.2])
        u, xi_dot, state = control_host(1.0, z, pair_r3, growth, state)
        assert state.phase == SEARCHING
        assert xi_dot == 0.0
        assert u == pytest.approx(2.0 * pair_r3.eval_ur(z), rel=1e-12)

    def test_pure_integral_action_at_origin(self, pair_r3):
        state = HostState(epsilon=0.1, phase=BARRIER, t_bar=0.0, c_bar=1.5,
                          xi=0.3)
        u, xi_dot, _ = control_host(0.0, np.zeros(3), pair_r3, GrowthGain(),
                                    state)
        assert u == pytest.approx(0.3)
        assert xi_dot == pytest.approx(0.0)

    def test_scalar_barrier_arithmetic(self, pair_r1):
        # eps = 1, V = 0.5: L_eps = 2; kappa = -1/2 so L1 = c_bar 2^(1/4);
        # dV = 2z = -sqrt(2) at z = -1/sqrt(2), so xi_dot = 2 sqrt(2)
        cbar = 1.3
        state = HostState(epsilon=1.0, phase=BARRIER, t_bar=0.0, c_bar=cbar)
        z = np.array([-1.0 / np.sqrt(2.0)])
        u, xi_dot, _ = control_host(0.0, z, pair_r1, GrowthGain(), state)
        assert xi_dot == pytest.approx(2.0 * np.sqrt(2.0), rel=1e-12)
        expected_u = cbar * 2.0 ** 0.25 * pair_r1.eval_ur(z)
        assert u == pytest.approx(expected_u, rel=1e-12)


class TestTrajectoryInvariants:
    def test_xi_zero_before_crossing(self, case2_traj):
        cross = case2_traj.crossing()
        before = case2_traj.t < cross.time
        assert np.max(np.abs(case2_traj.gains["xi"][before])) == 0.0

    def test_L2_is_exactly_the_barrier_factor(self, case2_traj):
        eps = case2_traj.meta["epsilon"]
        barrier = case2_traj.phase == 1
        expected = eps / (eps - case2_traj.V[barrier])
        np.testing.assert_allclose(case2_traj.gains["L2"][barrier], expected,
                                   rtol=1e-12)
        assert np.all(case2_traj.gains["L2"][barrier] >= 1.0)

    def test_searching_gains(self, case2_traj):
        searching = case2_traj.phase == 0
        assert np.all(case2_traj.gains["L2"][searching] == 0.0)

    def test_control_and_integral_continuity(self, case2_traj):
        h = case2_traj.meta["h"]
        # continuous signals: bounded step-to-step jumps (C = 2e4 covers the
        # crossing transient with a 2x margin on the recorded trace)
        assert np.max(np.abs(np.diff(case2_traj.u))) <= 2e4 * h
        assert np.max(np.abs(np.diff(case2_traj.gains["xi"]))) <= 5e2 * h

    def test_containment_after_crossing(self, case2_traj):
        cross = case2_traj.crossing()
        after = case2_traj.t >= cross.time
        assert np.all(case2_traj.V[after] < case2_traj.meta["epsilon"])
        assert not any(e.kind == "escape" for e in case2_traj.events)

    def test_gain_tail_is_bounded(self, case2_traj):
        from bfsmc import analyze
        report = analyze(case2_traj)
        assert report.gain_tail_ratio["L1"] <= 1.1
        assert report.gain_tail_ratio["L2"] <= 1.1
