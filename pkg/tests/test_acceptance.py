"""Acceptance criteria, one test per criterion, each printing a verdict line.

Tolerances are pinned here and nowhere else.  The expensive closed-loop runs
come from session fixtures in conftest so each scenario is integrated once.
"""
import dataclasses
import math
import time

import numpy as np
import pytest

from bfsmc import (analyze, builtin_disturbance, dilate, estimate_rho_bounds,
                   make_params, parse_scenario, run, validate_pair, write_csv)
from bfsmc.adapt_case1 import barrier_exponent
from bfsmc.sim import Scenario, expected_gain_trace
from conftest import scenario_path


def _verdict(n: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {n}: {detail}"


class TestCriterion1:
    def test_feedback_pair_suite(self, pair_r1, pair_r2, pair_r3):
        t0 = time.perf_counter()
        worst = {"hV": 0.0, "hu": 0.0, "euler": 0.0, "fd": 0.0, "sign": -1.0,
                 "rho_min": np.inf}
        for pair in (pair_r1, pair_r2, pair_r3):
            rep = validate_pair(pair, n_samples=1000, seed=0)
            worst["hV"] = max(worst["hV"], rep.homogeneity_V)
            worst["hu"] = max(worst["hu"], rep.homogeneity_ur)
            worst["euler"] = max(worst["euler"], rep.euler_residual)
            worst["fd"] = max(worst["fd"], rep.gradient_fd_residual)
            worst["sign"] = max(worst["sign"], rep.sign_violation)
            c_r, _ = estimate_rho_bounds(pair, 10_000, seed=0)
            worst["rho_min"] = min(worst["rho_min"], c_r)
        elapsed = time.perf_counter() - t0
        ok = (worst["hV"] <= 1e-6 and worst["hu"] <= 1e-6
              and worst["euler"] <= 1e-6 and worst["fd"] <= 1e-4
              and worst["sign"] <= 0.0 and worst["rho_min"] > 0.0
              and elapsed < 10.0)
        _verdict(1, ok,
                 f"homog V {worst['hV']:.2e}, homog u_r {worst['hu']:.2e}, "
                 f"euler {worst['euler']:.2e}, fd {worst['fd']:.2e}, "
                 f"sign {worst['sign']:.2e}, rho_min {worst['rho_min']:.3g}, "
                 f"runtime {elapsed:.2f}s")


class TestCriterion2:
    def test_scalar_exact_anchor(self, anchor_traj):
        below = np.abs(anchor_traj.z[:, 0]) <= 1e-6
        hit = bool(below.any())
        t_hit = float(anchor_traj.t[np.argmax(below)]) if hit else math.inf
        ok = hit and abs(t_hit - math.sqrt(2.0)) <= 2e-3
        _verdict(2, ok, f"|z| <= 1e-6 first at t = {t_hit:.6f}, "
                        f"sqrt(2) = {math.sqrt(2.0):.6f}, "
                        f"|diff| = {abs(t_hit - math.sqrt(2.0)):.2e} <= 2e-3")


class TestCriterion3:
    def test_finite_time_bound(self, pair_r3, warm):
        c_r, _ = estimate_rho_bounds(pair_r3, 10_000, seed=0)
        z0 = (1.0, 1.0, -1.0)
        V0 = pair_r3.eval_V(np.asarray(z0))
        kappa = pair_r3.params.kappa
        T_star = V0 ** (-kappa / 2.0) / ((-kappa / 2.0) * c_r)
        scenario = Scenario(r=3, p=1.0, kappa=kappa, gains=pair_r3.gains,
                            controller="pure_chain",
                            disturbance=builtin_disturbance("zero"),
                            z0=z0, h=1e-4, horizon=T_star, name="pure3")
        traj = run(scenario, pair=pair_r3)
        V_end = float(traj.V[-1])
        ok = V_end <= 1e-9
        _verdict(3, ok, f"c_r = {c_r:.4f}, V0 = {V0:.3f}, T* = {T_star:.2f}, "
                        f"V(T*) = {V_end:.3e} <= 1e-9")


class TestCriterion4:
    def test_case1_paper_example(self, case1_result):
        traj, elapsed = case1_result
        h = traj.meta["h"]
        cross = traj.crossing()
        checks = []
        checks.append(("finite crossing", cross is not None))
        after = traj.t >= cross.time
        contained = bool(np.all(traj.V[after] < traj.bound[after]))
        escapes = sum(1 for e in traj.events if e.kind == "escape")
        checks.append(("containment with zero escapes",
                       contained and escapes == 0))
        u_jump = float(np.max(np.abs(np.diff(traj.u))))
        checks.append((f"control continuity {u_jump:.3e} <= 1e3*h",
                       u_jump <= 1e3 * h))
        expected = expected_gain_trace(traj)
        gain_dev = float(np.max(np.abs(traj.gains["L"] - expected)
                                / np.maximum(expected, 1e-300)))
        checks.append((f"gain law trace dev {gain_dev:.1e}", gain_dev <= 1e-9))
        e1 = barrier_exponent(make_params(3, 1.0, traj.meta["kappa"]))
        left = cross.info["ell"]
        right = cross.info["c_bar"] * (cross.info["bound"]
                                       / (cross.info["bound"] - cross.info["V"])) ** e1
        cont_rel = abs(right - left) / left
        checks.append((f"gain continuity at t_bar {cont_rel:.1e} <= 1e-6",
                       cont_rel <= 1e-6))
        checks.append((f"runtime {elapsed:.1f}s < 60s", elapsed < 60.0))
        ok = all(flag for _, flag in checks)
        detail = (f"t_bar = {cross.time:.4f}; " if cross else "no crossing; ")
        detail += "; ".join(name for name, flag in checks if not flag) or "all checks hold"
        _verdict(4, ok, detail)


class TestCriterion5:
    def test_case2_paper_example(self, case2_traj):
        eps = case2_traj.meta["epsilon"]
        cross = case2_traj.crossing()
        after = case2_traj.t >= cross.time
        contained = bool(np.all(case2_traj.V[after] < eps))
        xi_pre = float(np.max(np.abs(case2_traj.gains["xi"][case2_traj.t < cross.time])))
        report = analyze(case2_traj)
        r1 = report.gain_tail_ratio["L1"]
        r2 = report.gain_tail_ratio["L2"]
        ok = contained and xi_pre == 0.0 and r1 <= 1.1 and r2 <= 1.1
        _verdict(5, ok, f"t_bar = {cross.time:.4f}, V < eps after t_bar: "
                        f"{contained}, xi pre-crossing max {xi_pre}, "
                        f"L1 tail/early {r1:.4f}, L2 tail/early {r2:.4f} (<= 1.1)")


class TestCriterion6:
    def test_gain_contrast(self, c1const_traj, case2_traj):
        rep_c1 = analyze(c1const_traj)
        ratio = rep_c1.gain_tail_ratio["L"]
        rep_host = analyze(case2_traj)
        host_ok = (rep_host.gain_tail_ratio["L1"] <= 1.1
                   and rep_host.gain_tail_ratio["L2"] <= 1.1
                   and rep_host.containment_pass)
        ok = ratio >= 2.0 and bool(host_ok) and rep_c1.containment_pass is True
        _verdict(6, ok, f"case1-const-mu gain ratio {ratio:.2f} >= 2, "
                        f"host gains bounded on the identical scenario: {host_ok}")


class TestCriterion7:
    def test_determinism_and_convergence(self, case1_traj, tmp_path, warm):
        base = parse_scenario(scenario_path("case1_example"))
        short = dataclasses.replace(base, horizon=2.0)
        blobs = []
        for i in range(2):
            t = run(short)
            path = tmp_path / f"det{i}.csv"
            write_csv(t, path, 1)
            blobs.append(path.read_bytes())
        identical = blobs[0] == blobs[1]
        half = dataclasses.replace(base, h=5e-5)
        traj_half = run(half)
        V_full = float(case1_traj.V[-1])
        V_half = float(traj_half.V[-1])
        rel = abs(V_half - V_full) / abs(V_full)
        ok = identical and rel < 0.01
        _verdict(7, ok, f"identical CSV bytes: {identical}; "
                        f"V(T) h=1e-4: {V_full:.6e}, h=5e-5: {V_half:.6e}, "
                        f"rel change {rel:.2%} < 1%")


class TestCriterion8:
    def test_margin_constant_fit(self, constmu_traj):
        report = analyze(constmu_traj)
        c1_hat = report.c1_hat
        ok = c1_hat is not None and c1_hat > 0.0
        # verify the fitted inequality V <= (1 - c1_hat * alpha) mu on the tail
        if ok:
            meta = constmu_traj.meta
            e1 = meta["gamma_r"] * (1.0 + 0.5 * meta["kappa"])
            T = constmu_traj.t[-1]
            window = constmu_traj.t >= 2.0 * T / 3.0
            alpha = constmu_traj.bound[window]  # phi_tilde == 1 here
            bound = (1.0 - c1_hat * alpha) * constmu_traj.bound[window]
            ok = bool(np.all(constmu_traj.V[window] <= bound + 1e-12))
        _verdict(8, ok, f"fitted margin constant = "
                        f"{c1_hat if c1_hat is not None else 'none'} > 0, "
                        f"inequality holds on final third: {ok}")
