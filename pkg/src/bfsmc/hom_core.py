"""Signed-power arithmetic, homogeneity weights, dilations, and the Euler field.

The weight family is p_i = p + (i-1)*kappa for i = 1..r+1 with kappa in
(-1, 0) and p in (0, 2); feasibility requires p_{r+1} > 0.  Everything else
in the package is built on these four primitives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleWeightsError


def signed_power(x: float, a: float) -> float:
    """|x|^a * sgn(x) for a > 0; maps 0 to exactly 0."""
    if a <= 0.0:
        raise DomainError(f"signed_power exponent must be positive, got {a}")
    if x > 0.0:
        return x ** a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@dataclass(frozen=True)
class HomogeneityParams:
    """Chain length, dilation exponent, base weight, and derived weights.

    weights[i] = p + i*kappa holds the r+1 weights p_1..p_{r+1};
    gamma_r = p_{r+1} / (2 - p_r) is the feedback output exponent.
    """

    r: int
    p: float
    kappa: float
    weights: tuple = field(repr=False)
    gamma_r: float = field(repr=False)

    @property
    def state_weights(self) -> np.ndarray:
        """Weights p_1..p_r of the state components, as an array."""
        return np.asarray(self.weights[:-1])

    @property
    def control_weight(self) -> float:
        """p_{r+1}, the homogeneity degree of the feedback."""
        return self.weights[-1]


def make_params(r: int, p: float, kappa: float) -> HomogeneityParams:
    """Build the weight family; rejects infeasible (r, p, kappa)."""
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise DomainError(f"chain length r must be an integer >= 1, got {r}")
    if not (0.0 < p < 2.0):
        raise DomainError(f"base weight p must lie in (0, 2), got {p}")
    if not (-1.0 < kappa < 0.0):
        raise DomainError(f"kappa must lie in (-1, 0), got {kappa}")
    weights = tuple(p + i * kappa for i in range(r + 1))
    if weights[-1] <= 0.0:
        raise InfeasibleWeightsError(
            f"p_(r+1) = p + r*kappa = {weights[-1]} must be positive"
        )
    gamma_r = weights[-1] / (2.0 - weights[-2])
    return HomogeneityParams(r=int(r), p=float(p), kappa=float(kappa),
                             weights=weights, gamma_r=gamma_r)


def dilate(eps: float, z, params: HomogeneityParams) -> np.ndarray:
    """Apply the dilation: component i is scaled by eps^{p_i}."""
    if eps <= 0.0:
        raise DomainError(f"dilation parameter must be positive, got {eps}")
    z = np.asarray(z, dtype=float)
    if z.shape != (params.r,):
        raise DomainError(f"state must have length r={params.r}, got shape {z.shape}")
    return eps ** params.state_weights * z


def euler_vector(z, params: HomogeneityParams) -> np.ndarray:
    """The Euler field D_p z = (p_1 z_1, ..., p_r z_r)."""
    z = np.asarray(z, dtype=float)
    if z.shape != (params.r,):
        raise DomainError(f"state must have length r={params.r}, got shape {z.shape}")
    return params.state_weights * z
