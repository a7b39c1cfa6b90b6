"""Homogeneous Lyapunov/feedback pairs: construction, constant estimation,
and the validation suite that is the binding contract for any pair used by
the controllers.

The constructed pair satisfies the strong feedback form
u_r = -l_r * signed_power(dV/dz_r, gamma_r) pointwise by construction; the
Lyapunov decrease constants (c_r, d_r) and the cross bound c_u are estimated
by seeded Monte Carlo on the level set {V = 1}, which suffices because the
sampled quantities are homogeneous of degree zero there.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import (DomainError, InvalidPairError, NumericError,
                     RejectedPairError, TuningFailureError)
from .hom_core import HomogeneityParams, make_params

_SCREEN_SAMPLES = 8192  # rho_min screen in build_hong_pair


@dataclass(frozen=True)
class PairConstants:
    c_r: float
    d_r: float
    c_u: float


@dataclass(frozen=True)
class FeedbackPair:
    """An adapted homogeneous feedback pair for the pure integrator chain."""

    params: HomogeneityParams
    gains: tuple
    estimated: Optional[PairConstants] = None

    def _arr(self):
        wts = np.asarray(self.params.weights[:-1])
        g = np.asarray(self.gains, dtype=float)
        return wts, g, self.params.p

    def eval_V(self, z) -> float:
        z = np.asarray(z, dtype=float)
        wts, g, q = self._arr()
        return K.pair_V(z, wts, g, q, K.QUAD_X, K.QUAD_W)

    def eval_grad_V(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        wts, g, q = self._arr()
        return K.pair_grad(z, wts, g, q, K.QUAD_X, K.QUAD_W)

    def eval_ur(self, z) -> float:
        z = np.asarray(z, dtype=float)
        wts, g, q = self._arr()
        return K.pair_ur(z, wts, g, q, self.params.gamma_r)

    def with_estimates(self, consts: PairConstants) -> "FeedbackPair":
        return replace(self, estimated=consts)


def _level_set_points(pair: FeedbackPair, n_samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = pair.params.r
    dirs = rng.standard_normal((n_samples, r))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0.0] = 1.0
    dirs /= norms[:, None]
    out = np.empty_like(dirs)
    wts, g, q = pair._arr()
    status = K.sample_level_set(dirs, wts, g, q, K.QUAD_X, K.QUAD_W, out)
    if status != 0:
        raise NumericError("level-set rescaling failed to converge")
    return out


def build_hong_pair(params: HomogeneityParams, gains, validate: bool = True,
                    n_check: int = _SCREEN_SAMPLES, seed: int = 0) -> FeedbackPair:
    """Construct the recursive pair for the given gains.

    With validate=True (the default) the pair is screened by level-set
    sampling and rejected when the sampled decrease rate is not strictly
    positive; controllers must only be fed screened pairs.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (params.r,):
        raise DomainError(f"need {params.r} gains, got shape {gains.shape}")
    if validate and np.any(gains <= 0.0):
        raise DomainError("controller gains must be positive")
    if np.any(gains < 0.0):
        raise DomainError("controller gains must be non-negative")
    pair = FeedbackPair(params=params, gains=tuple(gains))
    if validate:
        try:
            c_r, d_r = estimate_rho_bounds(pair, n_check, seed)
        except InvalidPairError as exc:
            raise RejectedPairError(
                f"gains {tuple(float(g) for g in gains)} rejected: {exc}") from exc
        pair = pair.with_estimates(PairConstants(c_r=c_r, d_r=d_r,
                                                 c_u=estimate_c_u(pair, n_check, seed)))
    return pair


def estimate_rho_bounds(pair: FeedbackPair, n_samples: int = 10_000,
                        seed: int = 0) -> tuple[float, float]:
    """Min/max of rho(z) = -<grad V, J_r z + u_r e_r>/V^{1+kappa/2} on {V=1}."""
    if n_samples < 100:
        raise DomainError(f"n_samples must be >= 100, got {n_samples}")
    zs = _level_set_points(pair, n_samples, seed)
    out = np.empty(n_samples)
    wts, g, q = pair._arr()
    K.rho_on_points(zs, wts, g, q, pair.params.gamma_r, pair.params.kappa,
                    K.QUAD_X, K.QUAD_W, out)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite rho sample")
    c_r = float(out.min())
    d_r = float(out.max())
    if c_r <= 0.0:
        raise InvalidPairError(
            f"sampled rho_min = {c_r:.6g} <= 0: not a strict Lyapunov pair")
    return c_r, d_r


def estimate_c_u(pair: FeedbackPair, n_samples: int = 10_000, seed: int = 0) -> float:
    """Max of |u_r * dV/dz_r| over {V = 1} (the degree-(2+kappa) cross bound)."""
    if n_samples < 100:
        raise DomainError(f"n_samples must be >= 100, got {n_samples}")
    zs = _level_set_points(pair, n_samples, seed)
    out = np.empty(n_samples)
    wts, g, q = pair._arr()
    K.urdv_on_points(zs, wts, g, q, pair.params.gamma_r, out)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite |u_r dV_r| sample")
    return float(out.max())


@dataclass(frozen=True)
class ValidationReport:
    """Worst-case residuals of the pair contract, with per-check verdicts."""

    homogeneity_V: float
    homogeneity_ur: float
    euler_residual: float
    gradient_fd_residual: float
    dilated_gradient_residual: float
    sign_violation: float
    rho_min: float
    rho_max: float
    n_samples: int
    seed: int
    tol_homogeneity: float = 1e-6
    tol_euler: float = 1e-6
    tol_gradient: float = 1e-4

    @property
    def checks(self) -> dict:
        return {
            "homogeneity_V": self.homogeneity_V <= self.tol_homogeneity,
            "homogeneity_ur": self.homogeneity_ur <= self.tol_homogeneity,
            "euler_relation": self.euler_residual <= self.tol_euler,
            "gradient_fd": self.gradient_fd_residual <= self.tol_gradient,
            "dilated_gradient": self.dilated_gradient_residual <= self.tol_homogeneity,
            "sign_condition": self.sign_violation <= 0.0,
            "rho_positive": self.rho_min > 0.0,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = {
            "homogeneity_V": self.homogeneity_V,
            "homogeneity_ur": self.homogeneity_ur,
            "euler_residual": self.euler_residual,
            "gradient_fd_residual": self.gradient_fd_residual,
            "dilated_gradient_residual": self.dilated_gradient_residual,
            "sign_violation": self.sign_violation,
            "rho_min": self.rho_min,
            "rho_max": self.rho_max,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "passed": self.passed,
        }
        d.update({f"check_{k}": v for k, v in self.checks.items()})
        return d

    def to_text(self) -> str:
        lines = ["pair validation report"]
        lines.append(f"  samples: {self.n_samples}   seed: {self.seed}")
        fmt = [
            ("V homogeneity (deg 2)", self.homogeneity_V, self.tol_homogeneity),
            ("u_r homogeneity (deg p_r+1)", self.homogeneity_ur, self.tol_homogeneity),
            ("Euler relation", self.euler_residual, self.tol_euler),
            ("gradient vs central FD", self.gradient_fd_residual, self.tol_gradient),
            ("dilated gradient identity", self.dilated_gradient_residual, self.tol_homogeneity),
        ]
        for name, res, tol in fmt:
            verdict = "ok" if res <= tol else "FAIL"
            lines.append(f"  {name:<28s} residual {res:.3e}  (tol {tol:.0e})  {verdict}")
        sv = "ok" if self.sign_violation <= 0.0 else "FAIL"
        lines.append(f"  {'sign condition u_r*dV_r <= 0':<28s} worst {self.sign_violation:.3e}  {sv}")
        rv = "ok" if self.rho_min > 0.0 else "FAIL"
        lines.append(f"  {'decrease rate rho':<28s} in [{self.rho_min:.6g}, {self.rho_max:.6g}]  {rv}")
        lines.append(f"  overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def validate_pair(pair: FeedbackPair, n_samples: int = 1000,
                  seed: int = 0) -> ValidationReport:
    """Run every pair-contract check; failures are reported, never raised."""
    rng = np.random.default_rng(seed)
    p = pair.params
    r = p.r
    wts = p.state_weights
    w_u = p.control_weight

    worst_hv = 0.0
    worst_hu = 0.0
    worst_euler = 0.0
    worst_grad = 0.0
    worst_dil = 0.0
    worst_sign = -np.inf
    for _ in range(n_samples):
        z = rng.standard_normal(r) * rng.uniform(0.3, 3.0)
        eps = rng.uniform(0.1, 10.0)
        v = pair.eval_V(z)
        if v <= 0.0:
            continue
        zd = eps ** wts * z
        # degree-2 homogeneity of V and degree-p_{r+1} homogeneity of u_r
        worst_hv = max(worst_hv, abs(pair.eval_V(zd) - eps ** 2 * v) / (eps ** 2 * v))
        u = pair.eval_ur(z)
        ud = pair.eval_ur(zd)
        if u != 0.0:
            worst_hu = max(worst_hu, abs(ud - eps ** w_u * u) / abs(eps ** w_u * u))
        g = pair.eval_grad_V(z)
        # Euler relation <grad V, D_p z> = 2 V
        worst_euler = max(worst_euler, abs(np.dot(g, wts * z) - 2.0 * v) / v)
        # dilated gradient identity
        gd = pair.eval_grad_V(zd)
        lhs = eps ** wts * gd
        rhs = eps ** 2 * g
        scale = max(1e-30, float(np.max(np.abs(rhs))))
        worst_dil = max(worst_dil, float(np.max(np.abs(lhs - rhs))) / scale)
        # sign condition u_r * dV_r <= 0
        worst_sign = max(worst_sign, u * g[-1])
        # central finite differences, skipping near-hyperplane samples
        if np.min(np.abs(z)) > 1e-2:
            fd = np.empty(r)
            good = True
            for i in range(r):
                step = 1e-6 * (1.0 + abs(z[i]))
                if abs(z[i]) <= step * 2.0:
                    good = False
                    break
                zp = z.copy()
                zm = z.copy()
                zp[i] += step
                zm[i] -= step
                fd[i] = (pair.eval_V(zp) - pair.eval_V(zm)) / (2.0 * step)
            if good:
                denom = np.maximum(np.abs(g), 1e-9 * max(1.0, float(np.max(np.abs(g)))))
                worst_grad = max(worst_grad, float(np.max(np.abs(fd - g) / denom)))

    try:
        rho_lo, rho_hi = estimate_rho_bounds(pair, max(1000, n_samples), seed)
    except InvalidPairError:
        # re-sample without the positivity gate to report honest bounds
        zs = _level_set_points(pair, max(1000, n_samples), seed)
        out = np.empty(zs.shape[0])
        wts_a, g_a, q = pair._arr()
        K.rho_on_points(zs, wts_a, g_a, q, p.gamma_r, p.kappa, K.QUAD_X, K.QUAD_W, out)
        rho_lo = float(out.min())
        rho_hi = float(out.max())

    return ValidationReport(
        homogeneity_V=worst_hv,
        homogeneity_ur=worst_hu,
        euler_residual=worst_euler,
        gradient_fd_residual=worst_grad,
        dilated_gradient_residual=worst_dil,
        sign_violation=worst_sign,
        rho_min=rho_lo,
        rho_max=rho_hi,
        n_samples=n_samples,
        seed=seed,
    )


DEFAULT_GAIN_LADDERS = {
    1: (1.0,),
    2: (1.0, 2.0),
    3: (1.0, 3.0, 18.0),
}


def default_gains(r: int) -> tuple:
    """Gain ladders known to screen positive for the bundled weight choices."""
    if r in DEFAULT_GAIN_LADDERS:
        return DEFAULT_GAIN_LADDERS[r]
    return tuple(3.0 ** i for i in range(r))


def tune_gains(params: HomogeneityParams, initial_gains=None,
               growth_factor: float = 2.0, max_doublings: int = 60,
               n_samples: int = 4096, seed: int = 0):
    """Grow gains until the sampled decrease rate is strictly positive.

    Tuning proceeds stage by stage: the leading j-gain subvector is itself a
    pair for the length-j chain, and rho_min is monotone-improving in the
    last gain of the strong feedback form, so each stage multiplies only its
    final gain by growth_factor until that subsystem screens positive.
    Growing the whole vector at once is not monotone (inflating the early
    gains reshapes V and can push rho_min negative), so it is not used.
    """
    if growth_factor <= 1.0:
        raise DomainError(f"growth_factor must exceed 1, got {growth_factor}")
    if initial_gains is None:
        initial_gains = default_gains(params.r)
    gains = [float(x) for x in initial_gains]
    if len(gains) != params.r:
        raise DomainError(f"need {params.r} initial gains, got {len(gains)}")
    if any(x <= 0.0 for x in gains):
        raise DomainError("initial gains must be positive")
    for j in range(1, params.r + 1):
        sub_params = make_params(j, params.p, params.kappa)
        for attempt in range(max_doublings + 1):
            sub = FeedbackPair(params=sub_params, gains=tuple(gains[:j]))
            try:
                estimate_rho_bounds(sub, n_samples, seed)
                break
            except InvalidPairError:
                if attempt == max_doublings:
                    raise TuningFailureError(
                        f"stage {j}: no positive rho_min within "
                        f"{max_doublings} growth steps")
                gains[j - 1] *= growth_factor
    return tuple(gains)
