"""Fixed-step closed-loop simulation, crossing detection, and trace analysis.

run() integrates one Scenario with classical RK4 at a fixed step, detecting
the first crossing V <= bound/2 between grid points and refining it by
bisection on sub-steps; the controller state machine advances only at step
boundaries.  Everything recorded lands in a Trajectory; analyze() computes
the containment/boundedness summary used by the CLI and the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .adapt_case1 import barrier_exponent
from .adapt_host import host_exponent
from .errors import BlowupError, DomainError, ScenarioError
from .feedback import FeedbackPair, build_hong_pair, tune_gains
from .hom_core import make_params
from .plant import Case1Class, Disturbance

CONTROLLER_KINDS = ("case1", "host", "pure_chain", "open_loop")


@dataclass(frozen=True)
class Scenario:
    r: int
    p: float
    kappa: float
    gains: object  # tuple of floats, or the string "tune"
    controller: str
    disturbance: Disturbance
    z0: tuple
    h: float
    horizon: float
    seed: int = 0
    mu0: Optional[float] = None
    lam: Optional[float] = None
    epsilon: Optional[float] = None
    l0: float = 1.0
    slope: float = 1.0
    exp_rate: float = 0.0
    output_csv: Optional[str] = None
    decimation: int = 1
    name: str = "scenario"

    def __post_init__(self):
        if self.controller not in CONTROLLER_KINDS:
            raise ScenarioError(f"unknown controller kind {self.controller!r}",
                                "controller", "kind")
        if self.h <= 0.0:
            raise ScenarioError("step h must be positive", "sim", "h")
        if self.horizon <= self.h:
            raise ScenarioError("horizon must exceed the step h", "sim", "horizon")
        if len(self.z0) != self.r:
            raise ScenarioError(f"z0 must have length r={self.r}", "sim", "z0")
        if self.controller == "case1" and (self.mu0 is None or self.lam is None):
            raise ScenarioError("case1 controller needs mu0 and lambda",
                                "controller")
        if self.controller == "host" and self.epsilon is None:
            raise ScenarioError("host controller needs epsilon", "controller")


@dataclass(frozen=True)
class Event:
    kind: str  # crossing | escape | blowup
    time: float
    info: dict = field(default_factory=dict)


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    V: np.ndarray
    bound: np.ndarray
    phase: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    gains: dict  # {"L": arr} or {"L1": arr, "L2": arr, "xi": arr}
    events: list
    meta: dict

    @property
    def r(self) -> int:
        return self.z.shape[1]

    @property
    def kind(self) -> str:
        return self.meta["controller"]

    def crossing(self) -> Optional[Event]:
        for e in self.events:
            if e.kind == "crossing":
                return e
        return None


def step_rk4(f, t: float, x, h: float):
    """One classical 4-stage Runge-Kutta step of x' = f(t, x)."""
    scalar = np.isscalar(x)
    x0 = np.atleast_1d(np.asarray(x, dtype=float))
    k1 = np.atleast_1d(np.asarray(f(t, x if scalar else x0), dtype=float))
    k2 = np.atleast_1d(np.asarray(f(t + 0.5 * h, _unwrap(x0 + 0.5 * h * k1, scalar)), dtype=float))
    k3 = np.atleast_1d(np.asarray(f(t + 0.5 * h, _unwrap(x0 + 0.5 * h * k2, scalar)), dtype=float))
    k4 = np.atleast_1d(np.asarray(f(t + h, _unwrap(x0 + h * k3, scalar)), dtype=float))
    for stage in (k1, k2, k3, k4):
        if not np.all(np.isfinite(stage)):
            raise BlowupError(f"non-finite stage value at t={t}")
    out = x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _unwrap(out, scalar)


def _unwrap(arr, scalar):
    return float(arr[0]) if scalar else arr


def build_scenario_pair(scenario: Scenario) -> FeedbackPair:
    params = make_params(scenario.r, scenario.p, scenario.kappa)
    if isinstance(scenario.gains, str):
        if scenario.gains != "tune":
            raise ScenarioError(f"gains must be a list or 'tune', got {scenario.gains!r}",
                                "pair", "gains")
        gains = tune_gains(params, seed=scenario.seed)
    else:
        gains = tuple(float(g) for g in scenario.gains)
    return build_hong_pair(params, gains, seed=scenario.seed)


def run(scenario: Scenario, pair: Optional[FeedbackPair] = None) -> Trajectory:
    """Integrate the closed loop on [0, horizon]; deterministic per scenario."""
    if pair is None:
        pair = build_scenario_pair(scenario)
    params = pair.params
    r = params.r
    wts = params.state_weights
    gains = np.asarray(pair.gains, dtype=float)
    q = params.p
    d = scenario.disturbance
    n = int(round(scenario.horizon / scenario.h))
    h = scenario.h
    z0 = np.asarray(scenario.z0, dtype=float)

    Z = np.empty((n + 1, r))
    V = np.empty(n + 1)
    B = np.empty(n + 1)
    PH = np.zeros(n + 1, dtype=np.int8)
    U = np.empty(n + 1)
    PHI = np.empty(n + 1)
    GAM = np.empty(n + 1)

    if scenario.controller == "case1":
        L = np.empty(n + 1)
        res = K.run_case1(z0, h, n, wts, gains, q, params.gamma_r, params.kappa,
                          scenario.mu0, scenario.lam, scenario.l0, scenario.slope,
                          scenario.exp_rate, d.code, d.prm, d.tab_t, d.tab_phi,
                          d.tab_gamma, K.QUAD_X, K.QUAD_W,
                          Z, V, B, PH, L, U, PHI, GAM)
        gain_cols = {"L": L}
    elif scenario.controller == "host":
        L1 = np.empty(n + 1)
        L2 = np.empty(n + 1)
        XI = np.empty(n + 1)
        res = K.run_host(z0, h, n, wts, gains, q, params.gamma_r, params.kappa,
                         scenario.epsilon, scenario.l0, scenario.slope,
                         scenario.exp_rate, d.code, d.prm, d.tab_t, d.tab_phi,
                         d.tab_gamma, K.QUAD_X, K.QUAD_W,
                         Z, V, B, PH, L1, L2, XI, U, PHI, GAM)
        gain_cols = {"L1": L1, "L2": L2, "xi": XI}
    else:
        L = np.empty(n + 1)
        open_loop = 1 if scenario.controller == "open_loop" else 0
        res = K.run_autonomous(z0, h, n, wts, gains, q, params.gamma_r, open_loop,
                               d.code, d.prm, d.tab_t, d.tab_phi, d.tab_gamma,
                               K.QUAD_X, K.QUAD_W,
                               Z, V, B, PH, L, U, PHI, GAM)
        gain_cols = {"L": L}

    nrec, tbar, cbar, v_tbar, b_tbar, l_tbar, escape_t, escape_v, blowup_t = res

    events = []
    if not math.isnan(tbar):
        events.append(Event("crossing", float(tbar), {
            "c_bar": float(cbar), "V": float(v_tbar),
            "bound": float(b_tbar), "ell": float(l_tbar)}))
    if not math.isnan(escape_t):
        events.append(Event("escape", float(escape_t), {"V": float(escape_v)}))
    if not math.isnan(blowup_t):
        events.append(Event("blowup", float(blowup_t), {}))

    sl = slice(0, nrec)
    meta = {
        "name": scenario.name,
        "controller": scenario.controller,
        "r": r,
        "p": params.p,
        "kappa": params.kappa,
        "gamma_r": params.gamma_r,
        "gains": tuple(float(g) for g in pair.gains),
        "mu0": scenario.mu0,
        "lambda": scenario.lam,
        "epsilon": scenario.epsilon,
        "l0": scenario.l0,
        "slope": scenario.slope,
        "exp_rate": scenario.exp_rate,
        "disturbance_id": d.catalog_id,
        "disturbance_params": dict(d.parameters),
        "h": h,
        "horizon": scenario.horizon,
        "seed": scenario.seed,
        "decimation": 1,
    }
    return Trajectory(t=h * np.arange(nrec), z=Z[sl].copy(), V=V[sl].copy(),
                      bound=B[sl].copy(), phase=PH[sl].copy(), u=U[sl].copy(),
                      phi=PHI[sl].copy(), gamma=GAM[sl].copy(),
                      gains={k: v[sl].copy() for k, v in gain_cols.items()},
                      events=events, meta=meta)


def run_batch(scenarios, max_workers: Optional[int] = None):
    """Share-nothing batch execution; order of results matches the input."""
    import concurrent.futures as cf
    import os
    if max_workers is None:
        max_workers = int(os.environ.get("BFSMC_THREADS", "0")) or (os.cpu_count() or 1)
    max_workers = max(1, min(max_workers, len(scenarios)))
    if max_workers == 1:
        return [run(s) for s in scenarios]
    with cf.ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, scenarios))


@dataclass(frozen=True)
class AnalysisReport:
    t_bar: Optional[float]
    c_bar: Optional[float]
    n_escapes: int
    n_blowups: int
    containment_pass: Optional[bool]
    v_minus_bound_max: Optional[float]
    v_minus_bound_min: Optional[float]
    gain_sup: dict
    gain_tail_ratio: dict
    c1_hat: Optional[float]
    u_jump_max: float

    def to_dict(self) -> dict:
        return {
            "t_bar": self.t_bar,
            "c_bar": self.c_bar,
            "n_escapes": self.n_escapes,
            "n_blowups": self.n_blowups,
            "containment_pass": self.containment_pass,
            "v_minus_bound_max": self.v_minus_bound_max,
            "v_minus_bound_min": self.v_minus_bound_min,
            "gain_sup": dict(self.gain_sup),
            "gain_tail_ratio": dict(self.gain_tail_ratio),
            "c1_hat": self.c1_hat,
            "u_jump_max": self.u_jump_max,
        }

    def to_text(self) -> str:
        lines = ["analysis summary"]
        if self.t_bar is None:
            lines.append("  crossing: none")
        else:
            lines.append(f"  crossing: t_bar = {self.t_bar:.9g}, c_bar = {self.c_bar:.9g}")
        if self.containment_pass is not None:
            verdict = "pass" if self.containment_pass else "FAIL"
            lines.append(f"  containment after t_bar: {verdict} "
                         f"(V - bound in [{self.v_minus_bound_min:.3e}, "
                         f"{self.v_minus_bound_max:.3e}], escapes: {self.n_escapes})")
        for name, sup in self.gain_sup.items():
            ratio = self.gain_tail_ratio.get(name)
            trend = f", tail/early windowed max = {ratio:.4g}" if ratio is not None else ""
            lines.append(f"  gain {name}: sup = {sup:.6g}{trend}")
        if self.c1_hat is not None:
            lines.append(f"  containment-margin constant estimate: {self.c1_hat:.6g}")
        lines.append(f"  control continuity: max step jump = {self.u_jump_max:.6g}")
        if self.n_blowups:
            lines.append(f"  blowups: {self.n_blowups}")
        return "\n".join(lines)


def analyze(traj: Trajectory) -> AnalysisReport:
    """Containment, gain-boundedness, and continuity summary of one trace."""
    cross = traj.crossing()
    t_bar = cross.time if cross else None
    c_bar = cross.info.get("c_bar") if cross else None
    n_escapes = sum(1 for e in traj.events if e.kind == "escape")
    n_blowups = sum(1 for e in traj.events if e.kind == "blowup")

    containment = None
    vmb_max = vmb_min = None
    if t_bar is not None and traj.t.size:
        after = traj.t >= t_bar
        if np.any(after):
            diff = traj.V[after] - traj.bound[after]
            vmb_max = float(diff.max())
            vmb_min = float(diff.min())
            containment = bool(vmb_max < 0.0 and n_escapes == 0)

    gain_sup = {k: float(np.max(np.abs(v))) if k == "xi" else float(np.max(v))
                for k, v in traj.gains.items() if v.size}
    gain_tail_ratio = {}
    if t_bar is not None and traj.t.size:
        T = float(traj.t[-1])
        span = T - t_bar
        if span > 0:
            early = (traj.t >= t_bar) & (traj.t <= t_bar + 0.25 * span)
            tail = traj.t >= t_bar + 0.75 * span
            for k, v in traj.gains.items():
                if k == "xi" or not (np.any(early) and np.any(tail)):
                    continue
                e_max = float(np.max(v[early]))
                t_max = float(np.max(v[tail]))
                gain_tail_ratio[k] = t_max / e_max if e_max > 0 else math.inf

    c1_hat = _fit_margin_constant(traj, t_bar)
    u_jump = float(np.max(np.abs(np.diff(traj.u)))) if traj.u.size > 1 else 0.0
    return AnalysisReport(t_bar=t_bar, c_bar=c_bar, n_escapes=n_escapes,
                          n_blowups=n_blowups, containment_pass=containment,
                          v_minus_bound_max=vmb_max, v_minus_bound_min=vmb_min,
                          gain_sup=gain_sup, gain_tail_ratio=gain_tail_ratio,
                          c1_hat=c1_hat, u_jump_max=u_jump)


def _fit_margin_constant(traj: Trajectory, t_bar) -> Optional[float]:
    """Largest constant C with V <= (1 - C a(t)) mu(t) on the final third,
    where a(t) = mu(t)/phi_tilde(t)^(1 + 1/e1).  Needs a declared envelope."""
    if traj.kind != "case1" or t_bar is None or not traj.t.size:
        return None
    meta = traj.meta
    if meta.get("disturbance_id") == "tabulated":
        return None
    from .plant import builtin_disturbance
    d = builtin_disturbance(meta["disturbance_id"], **meta["disturbance_params"])
    if not isinstance(d.declared_class, Case1Class):
        return None
    e1 = meta["gamma_r"] * (1.0 + 0.5 * meta["kappa"])
    T = float(traj.t[-1])
    window = traj.t >= max(t_bar, 2.0 * T / 3.0)
    if not np.any(window):
        return None
    phi_tilde = np.array([d.declared_class.phi_tilde(t) for t in traj.t[window]])
    alpha = traj.bound[window] / phi_tilde ** (1.0 + 1.0 / e1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (1.0 - traj.V[window] / traj.bound[window]) / alpha
    c = c[np.isfinite(c)]
    return float(c.min()) if c.size else None


def expected_gain_trace(traj: Trajectory) -> np.ndarray:
    """Recompute the case-1 gain column from (t, V) and the crossing event.

    Mirrors the gain law: l(t) while searching, the barrier form afterwards.
    Used to cross-check the recorded trace.
    """
    if traj.kind != "case1":
        raise DomainError("gain trace reconstruction is for case1 trajectories")
    meta = traj.meta
    e1 = meta["gamma_r"] * (1.0 + 0.5 * meta["kappa"])
    cross = traj.crossing()
    out = np.empty_like(traj.V)
    for i, t in enumerate(traj.t):
        if traj.phase[i] == 0:
            out[i] = (meta["l0"] + meta["slope"] * t) * math.exp(meta["exp_rate"] * t)
        else:
            out[i] = cross.info["c_bar"] * (traj.bound[i] / (traj.bound[i] - traj.V[i])) ** e1
    return out
