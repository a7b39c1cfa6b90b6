"""Shared fixtures: compiled-kernel warmup and the expensive scenario runs.

The long closed-loop simulations are session-scoped so the module tests and
the acceptance suite share one run each.  Fixtures that feed timed acceptance
criteria record their own wall-clock duration.
"""
from __future__ import annotations

import time
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

from bfsmc import (Scenario, build_hong_pair, builtin_disturbance, make_params,
                   parse_scenario, run)


def scenario_path(name: str) -> Path:
    return Path(str(files("bfsmc").joinpath("scenarios", f"{name}.toml")))


@pytest.fixture(scope="session")
def warm():
    """Touch every compiled kernel once so timed sections exclude JIT."""
    params = make_params(1, 1.0, -0.5)
    pair = build_hong_pair(params, (1.0,), n_check=128)
    pair.eval_grad_V(np.array([0.5]))
    base = dict(r=1, p=1.0, kappa=-0.5, gains=(1.0,),
                disturbance=builtin_disturbance("zero"),
                z0=(1.0,), h=1e-3, horizon=0.05)
    run(Scenario(controller="case1", mu0=5.0, lam=0.0, **base))
    run(Scenario(controller="host", epsilon=5.0, **base))
    run(Scenario(controller="pure_chain", **base))
    run(Scenario(controller="open_loop", **base))
    return True


@pytest.fixture(scope="session")
def pair_r1(warm):
    """Closed-form scalar pair: V = z^2, u = -<2z>^(1/2)."""
    return build_hong_pair(make_params(1, 1.0, -0.5), (1.0,))


@pytest.fixture(scope="session")
def pair_r2(warm):
    return build_hong_pair(make_params(2, 1.0, -1.0 / 6.0), (1.0, 2.0))


@pytest.fixture(scope="session")
def pair_r3(warm):
    """The gain ladder used by the HOST scenarios."""
    return build_hong_pair(make_params(3, 1.0, -1.0 / 6.0), (1.0, 3.0, 18.0))


@pytest.fixture(scope="session")
def pair_r3_gentle(warm):
    """The gentle ladder of the confined case-1 scenario."""
    return build_hong_pair(make_params(3, 1.0, -1.0 / 6.0), (0.4, 1.2, 2.4))


def _timed_run(scenario):
    t0 = time.perf_counter()
    traj = run(scenario)
    return traj, time.perf_counter() - t0


@pytest.fixture(scope="session")
def case1_result(warm):
    """Criterion-4 scenario run plus its wall time (excluding pair screen)."""
    scenario = parse_scenario(scenario_path("case1_example"))
    return _timed_run(scenario)


@pytest.fixture(scope="session")
def case1_traj(case1_result):
    return case1_result[0]


@pytest.fixture(scope="session")
def case2_traj(warm):
    return run(parse_scenario(scenario_path("case2_example")))


@pytest.fixture(scope="session")
def c1const_traj(warm):
    return run(parse_scenario(scenario_path("case2_case1const")))


@pytest.fixture(scope="session")
def constmu_traj(warm):
    return run(parse_scenario(scenario_path("const_mu_example")))


@pytest.fixture(scope="session")
def anchor_traj(warm):
    return run(parse_scenario(scenario_path("anchor_r1")))
