"""Case-1 barrier-adaptive continuous controller.

Two-phase gain: a growing gain l(t) while searching, then, after the first
time V drops to half the prescribed bound, a barrier gain
c_bar * (mu/(mu - V))^(gamma_r (1 + kappa/2)) whose constant c_bar is chosen
so the gain trace is continuous across the switch.  The control itself is
u = L(t, z) * u_r(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import BarrierBlowupError, DomainError
from .feedback import FeedbackPair
from .hom_core import HomogeneityParams

BARRIER_GUARD = 1e-9

SEARCHING = "searching"
BARRIER = "barrier"


@dataclass(frozen=True)
class MuSchedule:
    """Prescribed bound mu(t) = mu0 * exp(-lam * t); lam = 0 is constant."""

    mu0: float
    lam: float = 0.0

    def __post_init__(self):
        if self.mu0 <= 0.0:
            raise DomainError(f"mu0 must be positive, got {self.mu0}")
        if self.lam < 0.0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")

    def mu(self, t: float) -> float:
        return self.mu0 * math.exp(-self.lam * t)

    def mu_dot(self, t: float) -> float:
        return -self.lam * self.mu(t)


@dataclass(frozen=True)
class GrowthGain:
    """Searching-phase gain l(t) = (l0 + slope t) * exp(exp_rate t), l0 >= 1."""

    l0: float = 1.0
    slope: float = 1.0
    exp_rate: float = 0.0

    def __post_init__(self):
        if self.l0 < 1.0:
            raise DomainError(f"l0 must be >= 1, got {self.l0}")
        if self.slope < 0.0 or self.exp_rate < 0.0:
            raise DomainError("slope and exp_rate must be non-negative")

    def ell(self, t: float) -> float:
        return (self.l0 + self.slope * t) * math.exp(self.exp_rate * t)


@dataclass(frozen=True)
class Case1State:
    phase: str = SEARCHING
    t_bar: Optional[float] = None
    c_bar: Optional[float] = None


def barrier_exponent(params: HomogeneityParams) -> float:
    """The barrier-gain exponent gamma_r * (1 + kappa/2)."""
    return params.gamma_r * (1.0 + 0.5 * params.kappa)


def barrier_gain(mu: float, V: float) -> float:
    """mu / (mu - V) on [0, mu); trips the guard band near the boundary."""
    if mu <= 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    if V < 0.0:
        raise DomainError(f"V must be non-negative, got {V}")
    if V >= mu * (1.0 - BARRIER_GUARD):
        raise BarrierBlowupError(mu, V)
    return mu / (mu - V)


def adaptive_gain(t: float, V: float, schedule: MuSchedule, growth: GrowthGain,
                  params: HomogeneityParams,
                  state: Case1State) -> tuple[float, Case1State]:
    """Evaluate L(t, z) and advance the two-phase state machine.

    The searching-to-barrier transition fires at the first call with
    V <= mu(t)/2 (convention: t_bar = 0 when that already holds at t = 0);
    c_bar = l(t_bar) / 2^(gamma_r (1 + kappa/2)) makes L continuous there.
    """
    if V < 0.0:
        raise DomainError(f"V must be non-negative, got {V}")
    e1 = barrier_exponent(params)
    if state.phase == SEARCHING:
        if V <= 0.5 * schedule.mu(t):
            c_bar = growth.ell(t) / 2.0 ** e1
            state = Case1State(phase=BARRIER, t_bar=t, c_bar=c_bar)
        else:
            return growth.ell(t), state
    L = state.c_bar * barrier_gain(schedule.mu(t), V) ** e1
    return L, state


def control_case1(t: float, z, pair: FeedbackPair, schedule: MuSchedule,
                  growth: GrowthGain,
                  state: Case1State) -> tuple[float, Case1State]:
    """u = L(t, z) * u_r(z) with L from the adaptive gain."""
    V = pair.eval_V(np.asarray(z, dtype=float))
    L, state = adaptive_gain(t, V, schedule, growth, pair.params, state)
    return L * pair.eval_ur(z), state


def alpha_tilde(t: float, schedule: MuSchedule, phi_tilde: Callable[[float], float],
                params: HomogeneityParams) -> float:
    """Diagnostic mu(t) / phi_tilde(t)^(1 + 1/(gamma_r (1 + kappa/2)))."""
    e1 = barrier_exponent(params)
    return schedule.mu(t) / phi_tilde(t) ** (1.0 + 1.0 / e1)


@dataclass(frozen=True)
class ScheduleReport:
    """Grid checks of the schedule-validity conditions (report, not gate)."""

    mu_condition_ok: bool
    mu_condition_margin: float
    growth_condition_ok: bool
    ratio_first: float
    ratio_last: float
    horizon: float

    def to_text(self) -> str:
        lines = ["schedule validation report"]
        v = "ok" if self.mu_condition_ok else "FAIL"
        lines.append(
            f"  mu decrease condition (mu_dot > -(c_r/2) mu^(1+kappa/2)): "
            f"worst margin {self.mu_condition_margin:.3e}  {v}")
        v = "ok" if self.growth_condition_ok else "FAIL"
        lines.append(
            f"  growth divergence proxy (tail ratio increasing "
            f"{self.ratio_first:.3e} -> {self.ratio_last:.3e}): {v}")
        return "\n".join(lines)


def validate_schedules(schedule: MuSchedule, growth: GrowthGain,
                       phi_tilde: Callable[[float], float], c_r: float,
                       params: HomogeneityParams, horizon: float,
                       n_grid: int = 2001) -> ScheduleReport:
    """Check the mu decrease condition and the gain divergence condition.

    The divergence condition is checked as a finite-horizon proxy: the ratio
    l(t) mu(t)^e1 / phi_tilde(t)^(1+e1) must be non-decreasing over the last
    quarter of the horizon.  Failures are reported, not raised.
    """
    if c_r <= 0.0:
        raise DomainError(f"needs an estimated c_r > 0, got {c_r}")
    e1 = barrier_exponent(params)
    ts = np.linspace(0.0, horizon, n_grid)
    mus = np.array([schedule.mu(t) for t in ts])
    mu_dots = np.array([schedule.mu_dot(t) for t in ts])
    # mu_dot > -(c_r/2) mu^(1 + kappa/2), worst margin over the grid
    margin = float(np.min(mu_dots + 0.5 * c_r * mus ** (1.0 + 0.5 * params.kappa)))
    ratio = np.array([growth.ell(t) for t in ts]) * mus ** e1 \
        / np.array([phi_tilde(t) for t in ts]) ** (1.0 + e1)
    tail = ts >= 0.75 * horizon
    rtail = ratio[tail]
    increasing = bool(np.all(np.diff(rtail) >= -1e-12 * np.maximum(1e-300, rtail[:-1])))
    return ScheduleReport(
        mu_condition_ok=bool(margin > 0.0),
        mu_condition_margin=margin,
        growth_condition_ok=increasing,
        ratio_first=float(rtail[0]),
        ratio_last=float(rtail[-1]),
        horizon=horizon,
    )
