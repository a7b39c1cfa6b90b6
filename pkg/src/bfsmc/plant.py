"""The perturbed integrator chain and the disturbance catalog.

Disturbances are deterministic functions of time.  Each carries its declared
class: Case 1 pairs a known envelope phi_tilde >= 1 (non-decreasing) with an
unknown amplitude bound, Case 2 is a constant control gain with a Lipschitz
ratio phi/gamma.  The class bounds live in metadata for test oracles only;
the controllers never read them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ScenarioError

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class Case1Class:
    phi_tilde: Callable[[float], float]
    phi_m: Optional[float] = None  # oracle metadata, unknown to controllers


@dataclass(frozen=True)
class Case2Class:
    gamma_m: float
    psi_m: Optional[float] = None  # oracle metadata


@dataclass(frozen=True)
class Disturbance:
    gamma: Callable[[float], float]
    phi: Callable[[float], float]
    declared_class: object
    catalog_id: str
    parameters: dict = field(default_factory=dict)
    # numba dispatch data for the simulation kernels
    code: int = 2
    prm: np.ndarray = field(default_factory=lambda: _EMPTY)
    tab_t: np.ndarray = field(default_factory=lambda: _EMPTY)
    tab_phi: np.ndarray = field(default_factory=lambda: _EMPTY)
    tab_gamma: np.ndarray = field(default_factory=lambda: _EMPTY)


def rhs(t: float, z, u: float, d: Disturbance) -> np.ndarray:
    """Perturbed chain field: (z_2, ..., z_r, gamma(t) u + phi(t))."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 1:
        raise DomainError(f"state must be a non-empty vector, got shape {z.shape}")
    f = np.empty_like(z)
    f[:-1] = z[1:]
    f[-1] = d.gamma(t) * u + d.phi(t)
    return f


def _probe_case1(phi, phi_tilde, grid) -> float:
    """Check the envelope contract on a grid; returns the implied amplitude."""
    vals = np.array([phi_tilde(t) for t in grid])
    if np.any(vals < 1.0 - 1e-12):
        raise ScenarioError("phi_tilde must be lower bounded by 1", "disturbance")
    if np.any(np.diff(vals) < -1e-9 * np.maximum(1.0, vals[:-1])):
        raise ScenarioError("phi_tilde must be non-decreasing", "disturbance")
    ratios = np.array([abs(phi(t)) for t in grid]) / vals
    return float(ratios.max())


def _probe_case2(phi, gamma, grid) -> float:
    """Sampled difference quotients of psi = phi/gamma (Lipschitz probe)."""
    g0 = gamma(grid[0])
    for t in grid:
        if abs(gamma(t) - g0) > 1e-9 * max(1.0, abs(g0)):
            raise ScenarioError("Case 2 requires a constant control gain", "disturbance")
    psi = np.array([phi(t) / gamma(t) for t in grid])
    return float(np.max(np.abs(np.diff(psi) / np.diff(grid))))


def builtin_disturbance(catalog_id: str, probe_horizon: float = 30.0,
                        **parameters) -> Disturbance:
    """Instantiate a catalog disturbance with its declared class.

    Catalog:
      affine_phi_sin_gamma(a, b, c, d, omega): phi = a(1+bt),
          gamma = c + d sin(omega t); Case 1 with phi_tilde = 1 + bt.
      affine_phi_const_gamma(a, b, gamma): phi = a(1+bt), constant gamma;
          Case 2.
      zero: phi = 0, gamma = 1; Case 2.
      constant(phi0, gamma0): both constant; Case 1 with phi_tilde = 1.
      tabulated(t, phi, gamma[, phi_tilde], declared): linear interpolation.
    """
    grid = np.linspace(0.0, probe_horizon, 601)
    if catalog_id == "affine_phi_sin_gamma":
        a = float(parameters.pop("a", 3.0))
        b = float(parameters.pop("b", 4.0))
        c = float(parameters.pop("c", 3.0))
        d = float(parameters.pop("d", 0.5))
        omega = float(parameters.pop("omega", 5.0))
        _reject_extras(catalog_id, parameters)
        if c - abs(d) <= 0.0:
            raise ScenarioError("gamma must stay positive: need c > |d|", "disturbance")
        if b < 0.0:
            raise ScenarioError("phi slope b must be non-negative", "disturbance")
        phi = lambda t: a * (1.0 + b * t)  # noqa: E731
        gamma = lambda t: c + d * np.sin(omega * t)  # noqa: E731
        phi_tilde = lambda t: 1.0 + b * t  # noqa: E731
        phi_m = _probe_case1(phi, phi_tilde, grid)
        return Disturbance(gamma=gamma, phi=phi,
                           declared_class=Case1Class(phi_tilde=phi_tilde, phi_m=phi_m),
                           catalog_id=catalog_id,
                           parameters=dict(a=a, b=b, c=c, d=d, omega=omega),
                           code=0, prm=np.array([a, b, c, d, omega]))
    if catalog_id == "affine_phi_const_gamma":
        a = float(parameters.pop("a", 3.0))
        b = float(parameters.pop("b", 4.0))
        g = float(parameters.pop("gamma", 2.0))
        _reject_extras(catalog_id, parameters)
        if g <= 0.0:
            raise ScenarioError("constant gamma must be positive", "disturbance")
        phi = lambda t: a * (1.0 + b * t)  # noqa: E731
        gamma = lambda t: g  # noqa: E731
        psi_m = _probe_case2(phi, gamma, grid)
        return Disturbance(gamma=gamma, phi=phi,
                           declared_class=Case2Class(gamma_m=g, psi_m=psi_m),
                           catalog_id=catalog_id, parameters=dict(a=a, b=b, gamma=g),
                           code=1, prm=np.array([a, b, g]))
    if catalog_id == "zero":
        _reject_extras(catalog_id, parameters)
        return Disturbance(gamma=lambda t: 1.0, phi=lambda t: 0.0,
                           declared_class=Case2Class(gamma_m=1.0, psi_m=0.0),
                           catalog_id=catalog_id, code=2, prm=_EMPTY)
    if catalog_id == "constant":
        phi0 = float(parameters.pop("phi0", 1.0))
        gamma0 = float(parameters.pop("gamma0", 1.0))
        _reject_extras(catalog_id, parameters)
        if gamma0 <= 0.0:
            raise ScenarioError("gamma0 must be positive", "disturbance")
        phi_tilde = lambda t: 1.0  # noqa: E731
        return Disturbance(gamma=lambda t: gamma0, phi=lambda t: phi0,
                           declared_class=Case1Class(phi_tilde=phi_tilde, phi_m=abs(phi0)),
                           catalog_id=catalog_id,
                           parameters=dict(phi0=phi0, gamma0=gamma0),
                           code=3, prm=np.array([phi0, gamma0]))
    if catalog_id == "tabulated":
        return _tabulated(parameters, grid)
    raise ScenarioError(f"unknown disturbance id {catalog_id!r}", "disturbance", "id")


def _reject_extras(catalog_id, parameters):
    if parameters:
        raise ScenarioError(
            f"unknown parameter(s) for {catalog_id!r}: {sorted(parameters)}",
            "disturbance")


def _tabulated(parameters: dict, grid) -> Disturbance:
    declared = parameters.pop("declared", None)
    tt = np.asarray(parameters.pop("t"), dtype=float)
    pp = np.asarray(parameters.pop("phi"), dtype=float)
    gg = np.asarray(parameters.pop("gamma"), dtype=float)
    pt = parameters.pop("phi_tilde", None)
    _reject_extras("tabulated", parameters)
    if tt.ndim != 1 or tt.size < 2 or np.any(np.diff(tt) <= 0):
        raise ScenarioError("tabulated time grid must be strictly increasing",
                            "disturbance", "t")
    if pp.shape != tt.shape or gg.shape != tt.shape:
        raise ScenarioError("tabulated columns must share the time grid shape",
                            "disturbance")
    phi = lambda t, tt=tt, pp=pp: float(np.interp(t, tt, pp))  # noqa: E731
    gamma = lambda t, tt=tt, gg=gg: float(np.interp(t, tt, gg))  # noqa: E731
    probe = np.clip(grid, tt[0], tt[-1])
    if declared == "case1":
        if pt is None:
            raise ScenarioError("case1 tabulated disturbance needs a phi_tilde column",
                                "disturbance", "phi_tilde")
        ptv = np.asarray(pt, dtype=float)
        if ptv.shape != tt.shape:
            raise ScenarioError("phi_tilde column must share the time grid shape",
                                "disturbance", "phi_tilde")
        phi_tilde = lambda t, tt=tt, ptv=ptv: float(np.interp(t, tt, ptv))  # noqa: E731
        phi_m = _probe_case1(phi, phi_tilde, probe)
        declared_class = Case1Class(phi_tilde=phi_tilde, phi_m=phi_m)
    elif declared == "case2":
        psi_m = _probe_case2(phi, gamma, probe)
        declared_class = Case2Class(gamma_m=float(gg[0]), psi_m=psi_m)
    else:
        raise ScenarioError("tabulated disturbance must declare 'case1' or 'case2'",
                            "disturbance", "declared")
    return Disturbance(gamma=gamma, phi=phi, declared_class=declared_class,
                       catalog_id="tabulated",
                       parameters=dict(declared=declared, points=int(tt.size)),
                       code=4, prm=_EMPTY, tab_t=tt, tab_phi=pp, tab_gamma=gg)
