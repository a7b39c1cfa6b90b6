"""Compiled numerical core: signed powers, tanh-sinh quadrature, the recursive
homogeneous Lyapunov/feedback pair, level-set sampling, and the fixed-step
closed-loop integrators.

Everything here is numba-compiled and operates on plain float64 arrays; the
public modules wrap these kernels with validated dataclasses.  The pair
construction is the recursive power-integrator design: with weights
p_j = p + (j-1)*kappa and q = p,

    xi_1 = <z_1>^(q/p_1),     xi_j = <z_j>^(q/p_j) + l_{j-1}^(q/p_j) xi_{j-1},
    zstar_j = -l_{j-1} <xi_{j-1}>^(p_j/q),
    W_j = integral_{zstar_j}^{z_j} < <s>^(q/p_j) - <zstar_j>^(q/p_j) >^((2-p_j)/q) ds,
    V = 2 * sum_j W_j,        u_r = -l_r <dV/dz_r>^(gamma_r),

where <x>^a denotes the signed power.  V is positive definite, C^1 and
homogeneous of degree 2; u_r is continuous of degree p_{r+1}; dV/dz_r has the
closed form 2 <xi_r>^((2-p_r)/q), so the feedback needs no quadrature.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# tanh-sinh (double exponential) quadrature nodes on (-1, 1)

def _tanh_sinh_nodes(step: float = 0.15, cutoff: float = 1e-18):
    kmax = int(np.ceil(5.0 / step))
    t = np.arange(-kmax, kmax + 1) * step
    half_pi_sinh = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(half_pi_sinh)
    w = step * 0.5 * np.pi * np.cosh(t) / np.cosh(half_pi_sinh) ** 2
    keep = w > cutoff
    return np.ascontiguousarray(x[keep]), np.ascontiguousarray(w[keep])


QUAD_X, QUAD_W = _tanh_sinh_nodes()


@njit(cache=True)
def spow(x, a):
    # signed power |x|^a sgn(x); 0 maps to 0 for every a > 0
    if x > 0.0:
        return x ** a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@njit(cache=True)
def _quad_piece(lo, hi, a, b, m, grad_mode, xs, ws):
    # integral over [lo, hi] of  <(<s>^a - b)>^m        (grad_mode == 0)
    #                         or |<s>^a - b|^(m-1)       (grad_mode == 1)
    c = 0.5 * (lo + hi)
    rad = 0.5 * (hi - lo)
    acc = 0.0
    if grad_mode == 0:
        for i in range(xs.size):
            s = c + rad * xs[i]
            acc += ws[i] * spow(spow(s, a) - b, m)
    else:
        for i in range(xs.size):
            s = c + rad * xs[i]
            v = spow(s, a) - b
            acc += ws[i] * abs(v) ** (m - 1.0)
    return rad * acc


@njit(cache=True)
def _quad(lo, hi, a, b, m, grad_mode, xs, ws):
    # oriented integral, split at the s = 0 kink of <s>^a when interior
    if lo == hi:
        return 0.0
    sign = 1.0
    if lo > hi:
        lo, hi = hi, lo
        sign = -1.0
    if lo < 0.0 < hi:
        return sign * (_quad_piece(lo, 0.0, a, b, m, grad_mode, xs, ws)
                       + _quad_piece(0.0, hi, a, b, m, grad_mode, xs, ws))
    return sign * _quad_piece(lo, hi, a, b, m, grad_mode, xs, ws)


# ---------------------------------------------------------------------------
# pair evaluation

@njit(cache=True)
def _stages(z, wts, gains, q, xi, zst, bb):
    r = z.size
    for j in range(r):
        a_j = q / wts[j]
        if j == 0:
            xi[0] = spow(z[0], a_j)
            zst[0] = 0.0
            bb[0] = 0.0
        else:
            lp = gains[j - 1] ** a_j
            bb[j] = -lp * xi[j - 1]
            zst[j] = -gains[j - 1] * spow(xi[j - 1], wts[j] / q)
            xi[j] = spow(z[j], a_j) + lp * xi[j - 1]


@njit(cache=True)
def pair_V(z, wts, gains, q, xs, ws):
    r = z.size
    xi = np.empty(r)
    zst = np.empty(r)
    bb = np.empty(r)
    _stages(z, wts, gains, q, xi, zst, bb)
    m0 = (2.0 - wts[0]) / q
    total = abs(z[0]) ** (m0 + 1.0) / (m0 + 1.0)
    for j in range(1, r):
        a_j = q / wts[j]
        m_j = (2.0 - wts[j]) / q
        total += _quad(zst[j], z[j], a_j, bb[j], m_j, 0, xs, ws)
    return 2.0 * total


@njit(cache=True)
def pair_grad(z, wts, gains, q, xs, ws):
    r = z.size
    xi = np.empty(r)
    zst = np.empty(r)
    bb = np.empty(r)
    _stages(z, wts, gains, q, xi, zst, bb)
    # I_k = m_k * oriented-integral of |<s>^{a_k} - b_k|^{m_k - 1}, k >= 1
    I = np.zeros(r)
    for k in range(1, r):
        a_k = q / wts[k]
        m_k = (2.0 - wts[k]) / q
        I[k] = m_k * _quad(zst[k], z[k], a_k, bb[k], m_k, 1, xs, ws)
    g = np.empty(r)
    for j in range(r):
        a_j = q / wts[j]
        m_j = (2.0 - wts[j]) / q
        gsum = spow(xi[j], m_j)
        d = a_j * abs(z[j]) ** (a_j - 1.0)  # d xi_j / d z_j
        for k in range(j + 1, r):
            a_k = q / wts[k]
            lp = gains[k - 1] ** a_k
            gsum += lp * d * I[k]
            d = lp * d
        g[j] = 2.0 * gsum
    return g


@njit(cache=True)
def pair_dV_last(z, wts, gains, q):
    # closed-form last gradient component 2 <xi_r>^{(2 - p_r)/q}
    r = z.size
    xi = spow(z[0], q / wts[0])
    for j in range(1, r):
        a_j = q / wts[j]
        xi = spow(z[j], a_j) + gains[j - 1] ** a_j * xi
    m_r = (2.0 - wts[r - 1]) / q
    return 2.0 * spow(xi, m_r)


@njit(cache=True)
def pair_ur(z, wts, gains, q, gamma_r):
    return -gains[z.size - 1] * spow(pair_dV_last(z, wts, gains, q), gamma_r)


# ---------------------------------------------------------------------------
# level-set sampling and constant estimation

@njit(cache=True)
def sample_level_set(dirs, wts, gains, q, xs, ws, out):
    """Rescale unit directions onto {V = 1} by a 1-D root solve in eps.

    Newton on g(eps) = V(dilate(eps, d)) - 1 with g'(eps) = 2 V / eps (Euler
    relation); the homogeneity-exact seed eps = V(d)^(-1/2) converges in one
    step.  Returns 0 on success, 1 on failure.
    """
    n, r = dirs.shape
    for i in range(n):
        v = pair_V(dirs[i], wts, gains, q, xs, ws)
        if not np.isfinite(v) or v <= 0.0:
            return 1
        eps = v ** -0.5
        converged = False
        for _ in range(30):
            for j in range(r):
                out[i, j] = eps ** wts[j] * dirs[i, j]
            vv = pair_V(out[i], wts, gains, q, xs, ws)
            if not np.isfinite(vv) or vv <= 0.0:
                return 1
            if abs(vv - 1.0) <= 1e-12:
                converged = True
                break
            eps -= (vv - 1.0) * eps / (2.0 * vv)
            if not np.isfinite(eps) or eps <= 0.0:
                return 1
        if not converged:
            return 1
    return 0


@njit(cache=True)
def rho_on_points(zs, wts, gains, q, gamma_r, kappa, xs, ws, out):
    # rho(z) = -<grad V, J_r z + u_r e_r> / V^{1 + kappa/2}
    n, r = zs.shape
    for i in range(n):
        z = zs[i]
        g = pair_grad(z, wts, gains, q, xs, ws)
        acc = 0.0
        for j in range(r - 1):
            acc += g[j] * z[j + 1]
        acc += g[r - 1] * pair_ur(z, wts, gains, q, gamma_r)
        v = pair_V(z, wts, gains, q, xs, ws)
        out[i] = -acc / v ** (1.0 + 0.5 * kappa)


@njit(cache=True)
def urdv_on_points(zs, wts, gains, q, gamma_r, out):
    # |u_r(z) * dV/dz_r(z)| per point
    n = zs.shape[0]
    for i in range(n):
        dv = pair_dV_last(zs[i], wts, gains, q)
        out[i] = abs(pair_ur(zs[i], wts, gains, q, gamma_r) * dv)


# ---------------------------------------------------------------------------
# disturbance dispatch (codes: 0 affine/sin, 1 affine/const, 2 zero,
# 3 constant, 4 tabulated)

@njit(cache=True)
def _phi_at(code, prm, tab_t, tab_phi, t):
    if code == 0 or code == 1:
        return prm[0] * (1.0 + prm[1] * t)
    if code == 2:
        return 0.0
    if code == 3:
        return prm[0]
    return np.interp(t, tab_t, tab_phi)


@njit(cache=True)
def _gamma_at(code, prm, tab_t, tab_gam, t):
    if code == 0:
        return prm[2] + prm[3] * np.sin(prm[4] * t)
    if code == 1:
        return prm[2]
    if code == 2:
        return 1.0
    if code == 3:
        return prm[1]
    return np.interp(t, tab_t, tab_gam)


# ---------------------------------------------------------------------------
# closed-loop integrators (classical RK4, gains/phase frozen per macro step)

@njit(cache=True)
def _gain_case1(t, z, phase, cbar, mu0, lam, l0, slope, erate, e1,
                wts, gains, q, xs, ws):
    # returns the adaptive gain, or -1.0 when the barrier guard trips
    if phase == 0:
        return (l0 + slope * t) * np.exp(erate * t)
    mu = mu0 * np.exp(-lam * t)
    v = pair_V(z, wts, gains, q, xs, ws)
    if v >= mu * (1.0 - 1e-9):
        return -1.0
    return cbar * (mu / (mu - v)) ** e1


@njit(cache=True)
def _rhs_case1(t, z, Lg, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam):
    r = z.size
    f = np.empty(r)
    for i in range(r - 1):
        f[i] = z[i + 1]
    u = Lg * pair_ur(z, wts, gains, q, gamma_r)
    f[r - 1] = _gamma_at(dcode, dprm, tab_t, tab_gam, t) * u \
        + _phi_at(dcode, dprm, tab_t, tab_phi, t)
    return f


@njit(cache=True)
def _step_case1(t, z, h, phase, cbar, mu0, lam, l0, slope, erate, e1,
                wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam,
                xs, ws):
    # one RK4 step; the state machine snapshot (phase, cbar) is frozen, V is
    # re-evaluated at each internal stage.  ok=False signals a barrier hit.
    L1 = _gain_case1(t, z, phase, cbar, mu0, lam, l0, slope, erate, e1, wts, gains, q, xs, ws)
    if L1 < 0.0:
        return z, False
    k1 = _rhs_case1(t, z, L1, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    z2 = z + 0.5 * h * k1
    L2 = _gain_case1(t + 0.5 * h, z2, phase, cbar, mu0, lam, l0, slope, erate, e1, wts, gains, q, xs, ws)
    if L2 < 0.0:
        return z, False
    k2 = _rhs_case1(t + 0.5 * h, z2, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    z3 = z + 0.5 * h * k2
    L3 = _gain_case1(t + 0.5 * h, z3, phase, cbar, mu0, lam, l0, slope, erate, e1, wts, gains, q, xs, ws)
    if L3 < 0.0:
        return z, False
    k3 = _rhs_case1(t + 0.5 * h, z3, L3, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    z4 = z + h * k3
    L4 = _gain_case1(t + h, z4, phase, cbar, mu0, lam, l0, slope, erate, e1, wts, gains, q, xs, ws)
    if L4 < 0.0:
        return z, False
    k4 = _rhs_case1(t + h, z4, L4, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), True


@njit(cache=True, nogil=True)
def run_case1(z0, h, nsteps, wts, gains, q, gamma_r, kappa,
              mu0, lam, l0, slope, erate,
              dcode, dprm, tab_t, tab_phi, tab_gam, xs, ws,
              Z, V, B, PH, L, U, PHI, GAM):
    """Integrate the barrier-adaptive loop; fills the record arrays.

    Returns (nrec, tbar, cbar, v_tbar, mu_tbar, l_tbar, escape_t, escape_v,
    blowup_t); times are nan when the event did not occur.
    """
    r = z0.size
    e1 = gamma_r * (1.0 + 0.5 * kappa)
    z = z0.copy()
    phase = 0
    tbar = np.nan
    cbar = np.nan
    v_tbar = np.nan
    mu_tbar = np.nan
    l_tbar = np.nan
    escape_t = np.nan
    escape_v = np.nan
    blowup_t = np.nan
    v0 = pair_V(z, wts, gains, q, xs, ws)
    if v0 <= 0.5 * mu0:  # crossing convention at t = 0
        phase = 1
        tbar = 0.0
        l_tbar = l0
        cbar = l0 / 2.0 ** e1
        v_tbar = v0
        mu_tbar = mu0
    nrec = 0
    for k in range(nsteps + 1):
        t = k * h
        mu = mu0 * np.exp(-lam * t)
        v = pair_V(z, wts, gains, q, xs, ws)
        if phase == 1 and v >= mu * (1.0 - 1e-9):
            escape_t = t
            escape_v = v
            break
        for i in range(r):
            Z[nrec, i] = z[i]
        V[nrec] = v
        B[nrec] = mu
        PH[nrec] = phase
        if phase == 0:
            Lk = (l0 + slope * t) * np.exp(erate * t)
        else:
            Lk = cbar * (mu / (mu - v)) ** e1
        L[nrec] = Lk
        U[nrec] = Lk * pair_ur(z, wts, gains, q, gamma_r)
        PHI[nrec] = _phi_at(dcode, dprm, tab_t, tab_phi, t)
        GAM[nrec] = _gamma_at(dcode, dprm, tab_t, tab_gam, t)
        nrec += 1
        if k == nsteps:
            break
        zn, ok = _step_case1(t, z, h, phase, cbar, mu0, lam, l0, slope, erate, e1,
                             wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi,
                             tab_gam, xs, ws)
        if not ok:
            escape_t = t
            escape_v = v
            break
        finite = True
        for i in range(r):
            if not np.isfinite(zn[i]):
                finite = False
        if not finite:
            blowup_t = t + h
            break
        if phase == 0:
            vn = pair_V(zn, wts, gains, q, xs, ws)
            mun = mu0 * np.exp(-lam * (t + h))
            if vn <= 0.5 * mun:
                # refine the crossing by bisection on sub-steps from (t, z)
                ta = t
                tb = t + h
                zb = zn
                vb = vn
                mub = mun
                for _ in range(200):
                    done_width = (tb - ta) <= 1e-3 * h
                    done_value = vb >= 0.5 * mub - 1e-10 * mub
                    if done_width and done_value:
                        break
                    if tb - ta < 8.0 * 2.2e-16 * max(1.0, tb):
                        break
                    tm = 0.5 * (ta + tb)
                    zm, _ok2 = _step_case1(t, z, tm - t, 0, cbar, mu0, lam, l0, slope,
                                           erate, e1, wts, gains, q, gamma_r, dcode,
                                           dprm, tab_t, tab_phi, tab_gam, xs, ws)
                    vm = pair_V(zm, wts, gains, q, xs, ws)
                    mum = mu0 * np.exp(-lam * tm)
                    if vm <= 0.5 * mum:
                        tb = tm
                        zb = zm
                        vb = vm
                        mub = mum
                    else:
                        ta = tm
                tbar = tb
                l_tbar = (l0 + slope * tbar) * np.exp(erate * tbar)
                cbar = l_tbar / 2.0 ** e1
                v_tbar = vb
                mu_tbar = mub
                phase = 1
                zn, ok = _step_case1(tbar, zb, (t + h) - tbar, 1, cbar, mu0, lam, l0,
                                     slope, erate, e1, wts, gains, q, gamma_r, dcode,
                                     dprm, tab_t, tab_phi, tab_gam, xs, ws)
                if not ok:
                    escape_t = tbar
                    escape_v = vb
                    break
        z = zn
    return nrec, tbar, cbar, v_tbar, mu_tbar, l_tbar, escape_t, escape_v, blowup_t


@njit(cache=True)
def _gains_host(t, x, phase, cbar, eps, l0, slope, erate, eh,
                wts, gains, q, xs, ws):
    if phase == 0:
        return (l0 + slope * t) * np.exp(erate * t), 0.0
    v = pair_V(x[:x.size - 1], wts, gains, q, xs, ws)
    if v >= eps * (1.0 - 1e-9):
        return -1.0, -1.0
    Leps = eps / (eps - v)
    return cbar * Leps ** eh, Leps


@njit(cache=True)
def _rhs_host(t, x, L1, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam):
    r = x.size - 1
    f = np.empty(r + 1)
    for i in range(r - 1):
        f[i] = x[i + 1]
    z = x[:r]
    u = L1 * pair_ur(z, wts, gains, q, gamma_r) + x[r]
    f[r - 1] = _gamma_at(dcode, dprm, tab_t, tab_gam, t) * u \
        + _phi_at(dcode, dprm, tab_t, tab_phi, t)
    f[r] = -L2 * pair_dV_last(z, wts, gains, q)
    return f


@njit(cache=True)
def _step_host(t, x, h, phase, cbar, eps, l0, slope, erate, eh,
               wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam,
               xs, ws):
    L1, L2 = _gains_host(t, x, phase, cbar, eps, l0, slope, erate, eh, wts, gains, q, xs, ws)
    if L1 < 0.0:
        return x, False
    k1 = _rhs_host(t, x, L1, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    x2 = x + 0.5 * h * k1
    L1, L2 = _gains_host(t + 0.5 * h, x2, phase, cbar, eps, l0, slope, erate, eh, wts, gains, q, xs, ws)
    if L1 < 0.0:
        return x, False
    k2 = _rhs_host(t + 0.5 * h, x2, L1, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    x3 = x + 0.5 * h * k2
    L1, L2 = _gains_host(t + 0.5 * h, x3, phase, cbar, eps, l0, slope, erate, eh, wts, gains, q, xs, ws)
    if L1 < 0.0:
        return x, False
    k3 = _rhs_host(t + 0.5 * h, x3, L1, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    x4 = x + h * k3
    L1, L2 = _gains_host(t + h, x4, phase, cbar, eps, l0, slope, erate, eh, wts, gains, q, xs, ws)
    if L1 < 0.0:
        return x, False
    k4 = _rhs_host(t + h, x4, L1, L2, wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi, tab_gam)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), True


@njit(cache=True, nogil=True)
def run_host(z0, h, nsteps, wts, gains, q, gamma_r, kappa,
             eps, l0, slope, erate,
             dcode, dprm, tab_t, tab_phi, tab_gam, xs, ws,
             Z, V, B, PH, L1A, L2A, XI, U, PHI, GAM):
    """Integrate the adaptive HOST loop with the integral state appended."""
    r = z0.size
    eh = -0.5 * kappa
    x = np.empty(r + 1)
    x[:r] = z0
    x[r] = 0.0  # integral state starts at zero
    phase = 0
    tbar = np.nan
    cbar = np.nan
    v_tbar = np.nan
    escape_t = np.nan
    escape_v = np.nan
    blowup_t = np.nan
    v0 = pair_V(z0, wts, gains, q, xs, ws)
    if v0 <= 0.5 * eps:
        phase = 1
        tbar = 0.0
        cbar = l0 / 2.0 ** eh
        v_tbar = v0
    l_tbar = l0 if phase == 1 else np.nan
    nrec = 0
    for k in range(nsteps + 1):
        t = k * h
        z = x[:r]
        v = pair_V(z, wts, gains, q, xs, ws)
        if phase == 1 and v >= eps * (1.0 - 1e-9):
            escape_t = t
            escape_v = v
            break
        for i in range(r):
            Z[nrec, i] = z[i]
        V[nrec] = v
        B[nrec] = eps
        PH[nrec] = phase
        if phase == 0:
            L1 = (l0 + slope * t) * np.exp(erate * t)
            L2 = 0.0
        else:
            Leps = eps / (eps - v)
            L1 = cbar * Leps ** eh
            L2 = Leps
        L1A[nrec] = L1
        L2A[nrec] = L2
        XI[nrec] = x[r]
        U[nrec] = L1 * pair_ur(z, wts, gains, q, gamma_r) + x[r]
        PHI[nrec] = _phi_at(dcode, dprm, tab_t, tab_phi, t)
        GAM[nrec] = _gamma_at(dcode, dprm, tab_t, tab_gam, t)
        nrec += 1
        if k == nsteps:
            break
        xn, ok = _step_host(t, x, h, phase, cbar, eps, l0, slope, erate, eh,
                            wts, gains, q, gamma_r, dcode, dprm, tab_t, tab_phi,
                            tab_gam, xs, ws)
        if not ok:
            escape_t = t
            escape_v = v
            break
        finite = True
        for i in range(r + 1):
            if not np.isfinite(xn[i]):
                finite = False
        if not finite:
            blowup_t = t + h
            break
        if phase == 0:
            vn = pair_V(xn[:r], wts, gains, q, xs, ws)
            if vn <= 0.5 * eps:
                ta = t
                tb = t + h
                xb = xn
                vb = vn
                for _ in range(200):
                    done_width = (tb - ta) <= 1e-3 * h
                    done_value = vb >= 0.5 * eps - 1e-10 * eps
                    if done_width and done_value:
                        break
                    if tb - ta < 8.0 * 2.2e-16 * max(1.0, tb):
                        break
                    tm = 0.5 * (ta + tb)
                    xm, _ok2 = _step_host(t, x, tm - t, 0, cbar, eps, l0, slope, erate,
                                          eh, wts, gains, q, gamma_r, dcode, dprm,
                                          tab_t, tab_phi, tab_gam, xs, ws)
                    vm = pair_V(xm[:r], wts, gains, q, xs, ws)
                    if vm <= 0.5 * eps:
                        tb = tm
                        xb = xm
                        vb = vm
                    else:
                        ta = tm
                tbar = tb
                l_tbar = (l0 + slope * tbar) * np.exp(erate * tbar)
                cbar = l_tbar / 2.0 ** eh
                v_tbar = vb
                phase = 1
                xn, ok = _step_host(tbar, xb, (t + h) - tbar, 1, cbar, eps, l0, slope,
                                    erate, eh, wts, gains, q, gamma_r, dcode, dprm,
                                    tab_t, tab_phi, tab_gam, xs, ws)
                if not ok:
                    escape_t = tbar
                    escape_v = vb
                    break
        x = xn
    return nrec, tbar, cbar, v_tbar, eps, l_tbar, escape_t, escape_v, blowup_t


@njit(cache=True, nogil=True)
def run_autonomous(z0, h, nsteps, wts, gains, q, gamma_r, open_loop,
                   dcode, dprm, tab_t, tab_phi, tab_gam, xs, ws,
                   Z, V, B, PH, L, U, PHI, GAM):
    """Pure chain (u = u_r(z), no disturbance) or open loop (u = 0)."""
    r = z0.size
    z = z0.copy()
    blowup_t = np.nan
    nrec = 0
    for k in range(nsteps + 1):
        t = k * h
        for i in range(r):
            Z[nrec, i] = z[i]
        V[nrec] = pair_V(z, wts, gains, q, xs, ws)
        B[nrec] = np.nan
        PH[nrec] = 0
        if open_loop == 1:
            L[nrec] = 0.0
            U[nrec] = 0.0
            PHI[nrec] = _phi_at(dcode, dprm, tab_t, tab_phi, t)
            GAM[nrec] = _gamma_at(dcode, dprm, tab_t, tab_gam, t)
        else:
            L[nrec] = 1.0
            U[nrec] = pair_ur(z, wts, gains, q, gamma_r)
            PHI[nrec] = 0.0
            GAM[nrec] = 1.0
        nrec += 1
        if k == nsteps:
            break
        # RK4 on the autonomous/open-loop field
        k1 = _auto_rhs(t, z, wts, gains, q, gamma_r, open_loop, dcode, dprm, tab_t, tab_phi, tab_gam)
        k2 = _auto_rhs(t + 0.5 * h, z + 0.5 * h * k1, wts, gains, q, gamma_r, open_loop, dcode, dprm, tab_t, tab_phi, tab_gam)
        k3 = _auto_rhs(t + 0.5 * h, z + 0.5 * h * k2, wts, gains, q, gamma_r, open_loop, dcode, dprm, tab_t, tab_phi, tab_gam)
        k4 = _auto_rhs(t + h, z + h * k3, wts, gains, q, gamma_r, open_loop, dcode, dprm, tab_t, tab_phi, tab_gam)
        zn = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        finite = True
        for i in range(r):
            if not np.isfinite(zn[i]):
                finite = False
        if not finite:
            blowup_t = t + h
            break
        z = zn
    return nrec, np.nan, np.nan, np.nan, np.nan, np.nan, np.nan, np.nan, blowup_t


@njit(cache=True)
def _auto_rhs(t, z, wts, gains, q, gamma_r, open_loop, dcode, dprm, tab_t, tab_phi, tab_gam):
    r = z.size
    f = np.empty(r)
    for i in range(r - 1):
        f[i] = z[i + 1]
    if open_loop == 1:
        f[r - 1] = _phi_at(dcode, dprm, tab_t, tab_phi, t)
    else:
        f[r - 1] = pair_ur(z, wts, gains, q, gamma_r)
    return f
