"""Case-2 adaptive higher-order super-twisting controller.

u = L1(t,z) u_r(z) + xi with xi_dot = -L2(t,z) dV/dz_r(z) and xi(0) = 0.
While searching, (L1, L2) = (l(t), 0), so xi stays identically zero; after
the first time V <= eps/2 the barrier factor L_eps = eps/(eps - V) drives
L1 = c_bar * L_eps^(-kappa/2) and L2 = L_eps, with
c_bar = l(t_bar) / 2^(-kappa/2) chosen for gain continuity at the switch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adapt_case1 import BARRIER, SEARCHING, GrowthGain, barrier_gain
from .errors import DomainError
from .feedback import FeedbackPair
from .hom_core import HomogeneityParams


@dataclass(frozen=True)
class HostState:
    epsilon: float
    phase: str = SEARCHING
    t_bar: Optional[float] = None
    c_bar: Optional[float] = None
    xi: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")


def host_exponent(params: HomogeneityParams) -> float:
    """The L1 barrier exponent -kappa/2."""
    return -0.5 * params.kappa


def gains_host(t: float, V: float, growth: GrowthGain,
               params: HomogeneityParams,
               state: HostState) -> tuple[float, float, HostState]:
    """Evaluate (L1, L2) and advance the phase machine."""
    if V < 0.0:
        raise DomainError(f"V must be non-negative, got {V}")
    eh = host_exponent(params)
    if state.phase == SEARCHING:
        if V <= 0.5 * state.epsilon:
            c_bar = growth.ell(t) / 2.0 ** eh
            state = HostState(epsilon=state.epsilon, phase=BARRIER,
                              t_bar=t, c_bar=c_bar, xi=state.xi)
        else:
            return growth.ell(t), 0.0, state
    L_eps = barrier_gain(state.epsilon, V)
    return state.c_bar * L_eps ** eh, L_eps, state


def control_host(t: float, z, pair: FeedbackPair, growth: GrowthGain,
                 state: HostState) -> tuple[float, float, HostState]:
    """Returns (u, xi_dot, state'); the caller integrates xi alongside z."""
    z = np.asarray(z, dtype=float)
    V = pair.eval_V(z)
    L1, L2, state = gains_host(t, V, growth, pair.params, state)
    dv_r = pair.eval_grad_V(z)[-1]
    u = L1 * pair.eval_ur(z) + state.xi
    return u, -L2 * dv_r, state
