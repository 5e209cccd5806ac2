"""Face fluxes: HLLC and Rusanov for the inviscid part, an exact Riemann
solver used as an oracle, and second-order viscous/conductive fluxes.

All fluxes follow the convention ``dU/dt + div F = 0``; the viscous flux is
therefore the negated stress/heat-flux vector.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .core import GasModel, PrimitiveState, StateError, TransportCoeffs, primitive

HLLC = "hllc"
RUSANOV = "rusanov"
RIEMANN_SOLVERS = (HLLC, RUSANOV)


def physical_flux(w: np.ndarray, normal: int, gamma: float) -> np.ndarray:
    """Analytic Euler flux of primitive array ``w`` along axis ``normal``."""
    rho, vel, p = w[0], w[1:-1], w[-1]
    un = vel[normal]
    f = np.empty_like(w)
    f[0] = rho * un
    f[1:-1] = rho * un * vel
    f[1 + normal] += p
    energy = p / (gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=0)
    f[-1] = (energy + p) * un
    return f


@njit(inline="always")
def _hllc_face(wl, wr, normal, gamma, out):
    nv = wl.shape[0]
    last = nv - 1
    rl = wl[0]
    rr = wr[0]
    pl = wl[last]
    pr = wr[last]
    ul = wl[1 + normal]
    ur = wr[1 + normal]
    kel = 0.0
    ker = 0.0
    for d in range(nv - 2):
        kel += wl[1 + d] * wl[1 + d]
        ker += wr[1 + d] * wr[1 + d]
    el = pl / (gamma - 1.0) + 0.5 * rl * kel
    er = pr / (gamma - 1.0) + 0.5 * rr * ker
    cl = math.sqrt(gamma * pl / rl)
    cr = math.sqrt(gamma * pr / rr)
    # Einfeldt bounds from Roe averages
    sl_ = math.sqrt(rl)
    sr_ = math.sqrt(rr)
    wsum = sl_ + sr_
    ut = (sl_ * ul + sr_ * ur) / wsum
    q2 = 0.0
    for d in range(nv - 2):
        vd = (sl_ * wl[1 + d] + sr_ * wr[1 + d]) / wsum
        q2 += vd * vd
    ht = (sl_ * (el + pl) / rl + sr_ * (er + pr) / rr) / wsum
    ct = math.sqrt(max((gamma - 1.0) * (ht - 0.5 * q2), 0.0))
    sl = min(ul - cl, ut - ct)
    sr = max(ur + cr, ut + ct)
    ml = rl * (sl - ul)
    mr = rr * (sr - ur)
    sstar = (pr - pl + ul * ml - ur * mr) / (ml - mr)
    if sl >= 0.0:
        rho, un, p, e, s, side = rl, ul, pl, el, 0.0, 0
    elif sstar >= 0.0:
        rho, un, p, e, s, side = rl, ul, pl, el, sl, 0
    elif sr > 0.0:
        rho, un, p, e, s, side = rr, ur, pr, er, sr, 1
    else:
        rho, un, p, e, s, side = rr, ur, pr, er, 0.0, 1
    w = wl if side == 0 else wr
    # physical flux of the chosen side
    out[0] = rho * un
    for d in range(nv - 2):
        out[1 + d] = rho * un * w[1 + d]
    out[1 + normal] += p
    out[last] = (e + p) * un
    if s != 0.0:
        fac = rho * (s - un) / (s - sstar)
        out[0] += s * (fac - rho)
        for d in range(nv - 2):
            ustar = sstar if d == normal else w[1 + d]
            out[1 + d] += s * (fac * ustar - rho * w[1 + d])
        estar = fac * (e / rho + (sstar - un) * (sstar + p / (rho * (s - un))))
        out[last] += s * (estar - e)
    return sl, sr


@njit(inline="always")
def _rusanov_face(wl, wr, normal, gamma, out):
    nv = wl.shape[0]
    last = nv - 1
    rl = wl[0]
    rr = wr[0]
    pl = wl[last]
    pr = wr[last]
    ul = wl[1 + normal]
    ur = wr[1 + normal]
    kel = 0.0
    ker = 0.0
    for d in range(nv - 2):
        kel += wl[1 + d] * wl[1 + d]
        ker += wr[1 + d] * wr[1 + d]
    el = pl / (gamma - 1.0) + 0.5 * rl * kel
    er = pr / (gamma - 1.0) + 0.5 * rr * ker
    smax = max(abs(ul) + math.sqrt(gamma * pl / rl), abs(ur) + math.sqrt(gamma * pr / rr))
    out[0] = 0.5 * (rl * ul + rr * ur) - 0.5 * smax * (rr - rl)
    for d in range(nv - 2):
        out[1 + d] = 0.5 * (rl * ul * wl[1 + d] + rr * ur * wr[1 + d]) - 0.5 * smax * (rr * wr[1 + d] - rl * wl[1 + d])
    out[1 + normal] += 0.5 * (pl + pr)
    out[last] = 0.5 * ((el + pl) * ul + (er + pr) * ur) - 0.5 * smax * (er - el)
    return -smax, smax


@njit(parallel=True, cache=True)
def riemann_lines(wl, wr, normal, gamma, solver, flux):
    """Face fluxes for primitive face states of shape ``(nvar, nlines, nfaces)``.

    ``solver`` is 0 for HLLC and 1 for Rusanov.  Returns the number of faces
    whose input states were inadmissible or produced non-finite fluxes.
    """
    nv, nl, nf = wl.shape
    bad = 0
    for line in prange(nl):
        a = np.empty(nv)
        b = np.empty(nv)
        out = np.empty(nv)
        for f in range(nf):
            for v in range(nv):
                a[v] = wl[v, line, f]
                b[v] = wr[v, line, f]
            if not (a[0] > 0.0 and b[0] > 0.0 and a[nv - 1] > 0.0 and b[nv - 1] > 0.0):
                bad += 1
                for v in range(nv):
                    flux[v, line, f] = np.nan
                continue
            if solver == 0:
                lo, hi = _hllc_face(a, b, normal, gamma, out)
            else:
                lo, hi = _rusanov_face(a, b, normal, gamma, out)
            finite = math.isfinite(lo) and math.isfinite(hi)
            for v in range(nv):
                flux[v, line, f] = out[v]
                finite = finite and math.isfinite(out[v])
            if not finite:
                bad += 1
    return bad


def _state_array(s: PrimitiveState) -> np.ndarray:
    return s.as_array().reshape(-1, 1, 1)


def _single_face(left: PrimitiveState, right: PrimitiveState, normal: int, gas: GasModel, solver: int) -> np.ndarray:
    wl = np.ascontiguousarray(_state_array(left))
    wr = np.ascontiguousarray(_state_array(right))
    flux = np.empty_like(wl)
    if riemann_lines(wl, wr, normal, gas.gamma, solver, flux):
        raise StateError(f"Riemann solver failed for left={wl.ravel()}, right={wr.ravel()}")
    return flux[:, 0, 0]


def hllc_flux(left: PrimitiveState, right: PrimitiveState, normal: int, gas: GasModel) -> np.ndarray:
    """HLLC flux vector ``(mass, momentum..., energy)`` across a face normal to ``normal``."""
    return _single_face(left, right, normal, gas, 0)


def rusanov_flux(left: PrimitiveState, right: PrimitiveState, normal: int, gas: GasModel) -> np.ndarray:
    return _single_face(left, right, normal, gas, 1)


# ---------------------------------------------------------------------------
# exact Riemann solver (Toro, ch. 4)


class VacuumError(StateError):
    pass


def _pressure_function(p, rho, pk, ck, gamma):
    """Value and derivative of the shock/rarefaction branch for one side."""
    if p > pk:
        a = 2.0 / ((gamma + 1.0) * rho)
        b = (gamma - 1.0) / (gamma + 1.0) * pk
        root = math.sqrt(a / (p + b))
        return (p - pk) * root, root * (1.0 - 0.5 * (p - pk) / (p + b))
    ratio = p / pk
    f = 2.0 * ck / (gamma - 1.0) * (ratio ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * ck)
    return f, df


def star_state(rl, ul, pl, rr, ur, pr, gamma, tol=1e-14, max_iter=200):
    """Star-region pressure and velocity by safeguarded Newton iteration."""
    cl = math.sqrt(gamma * pl / rl)
    cr = math.sqrt(gamma * pr / rr)
    if 2.0 / (gamma - 1.0) * (cl + cr) <= ur - ul:
        raise VacuumError("initial data generate vacuum")
    du = ur - ul

    def residual(p):
        fl, dfl = _pressure_function(p, rl, pl, cl, gamma)
        fr, dfr = _pressure_function(p, rr, pr, cr, gamma)
        return fl + fr + du, dfl + dfr

    # two-rarefaction guess is exact when both waves are rarefactions
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / pl ** z + cr / pr ** z)) ** (1.0 / z)
    p = max(p, 1e-12 * min(pl, pr))
    lo, hi = 0.0, math.inf
    scale = max(pl, pr)
    for _ in range(max_iter):
        f, df = residual(p)
        if f > 0.0:
            hi = min(hi, p)
        else:
            lo = max(lo, p)
        step = f / df
        new = p - step
        if not (lo < new < hi):
            new = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * p if new >= hi else 0.5 * (lo + p)
        if abs(new - p) <= tol * scale:
            p = new
            break
        p = new
    f, _ = residual(p)
    fl, _ = _pressure_function(p, rl, pl, cl, gamma)
    fr, _ = _pressure_function(p, rr, pr, cr, gamma)
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    return p, u, abs(f)


def _sample(rl, ul, pl, rr, ur, pr, gamma, p_star, u_star, xi):
    g = gamma
    if xi <= u_star:
        rho, u, p, c = rl, ul, pl, math.sqrt(g * pl / rl)
        if p_star > p:
            s = u - c * math.sqrt((g + 1) / (2 * g) * p_star / p + (g - 1) / (2 * g))
            if xi <= s:
                return rho, u, p
            ratio = p_star / p
            return rho * (ratio + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * ratio + 1), u_star, p_star
        c_star = c * (p_star / p) ** ((g - 1) / (2 * g))
        if xi <= u - c:
            return rho, u, p
        if xi >= u_star - c_star:
            return rho * (p_star / p) ** (1 / g), u_star, p_star
        base = 2 / (g + 1) + (g - 1) / ((g + 1) * c) * (u - xi)
        return rho * base ** (2 / (g - 1)), 2 / (g + 1) * (c + (g - 1) / 2 * u + xi), p * base ** (2 * g / (g - 1))
    rho, u, p, c = rr, ur, pr, math.sqrt(g * pr / rr)
    if p_star > p:
        s = u + c * math.sqrt((g + 1) / (2 * g) * p_star / p + (g - 1) / (2 * g))
        if xi >= s:
            return rho, u, p
        ratio = p_star / p
        return rho * (ratio + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * ratio + 1), u_star, p_star
    c_star = c * (p_star / p) ** ((g - 1) / (2 * g))
    if xi >= u + c:
        return rho, u, p
    if xi <= u_star + c_star:
        return rho * (p_star / p) ** (1 / g), u_star, p_star
    base = 2 / (g + 1) - (g - 1) / ((g + 1) * c) * (u - xi)
    return rho * base ** (2 / (g - 1)), 2 / (g + 1) * (-c + (g - 1) / 2 * u + xi), p * base ** (2 * g / (g - 1))


def exact_riemann_solve(left: PrimitiveState, right: PrimitiveState, gas: GasModel, xi,
                        normal: int = 0) -> PrimitiveState:
    """Self-similar solution of the Riemann problem sampled at ``x/t = xi``.

    Transverse velocity components jump across the contact.
    """
    wl, wr = left.as_array(), right.as_array()
    rl, pl, rr, pr = wl[0], wl[-1], wr[0], wr[-1]
    ul, ur = wl[1 + normal], wr[1 + normal]
    p_star, u_star, _ = star_state(rl, ul, pl, rr, ur, pr, gas.gamma)
    xis = np.atleast_1d(np.asarray(xi, float))
    out = np.empty((wl.shape[0],) + xis.shape)
    for n, x in enumerate(xis):
        rho, u, p = _sample(rl, ul, pl, rr, ur, pr, gas.gamma, p_star, u_star, x)
        vel = (wl if x <= u_star else wr)[1:-1].copy()
        vel[normal] = u
        out[:, n] = np.concatenate([[rho], vel, [p]])
    if np.ndim(xi) == 0:
        out = out[:, 0]
    return primitive(out[0], out[1:-1], out[-1], gas)


# ---------------------------------------------------------------------------
# viscous fluxes


def _centered(a: np.ndarray, axis: int, dx: float) -> np.ndarray:
    n = a.shape[axis]
    hi = [slice(None)] * a.ndim
    lo = [slice(None)] * a.ndim
    hi[axis] = slice(2, n)
    lo[axis] = slice(0, n - 2)
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 1)
    # result keeps the input length; the outermost entries are unused
    return np.pad((a[tuple(hi)] - a[tuple(lo)]) / (2.0 * dx), pad)


def viscous_flux(w: np.ndarray, axis: int, dx, coeffs: TransportCoeffs, gas: GasModel) -> np.ndarray:
    """Viscous/conductive flux on the faces normal to ``axis``.

    ``w`` is a primitive array ``(nvar, m_0, ..., m_{d-1})`` whose outermost layer
    in every direction serves only as stencil support.  The result has ``m-1``
    faces along ``axis`` and ``m-2`` entries in every other direction.
    """
    ndim = w.shape[0] - 2
    dx = tuple(np.broadcast_to(np.asarray(dx, float), (ndim,)))
    eta, zeta, lam = coeffs.shear_viscosity, coeffs.bulk_viscosity, coeffs.conductivity
    spatial = w.shape[1:]

    def face(a):
        # face average along axis, interior trim along the others
        sl_l, sl_r = [], []
        for d in range(ndim):
            if d == axis:
                sl_l.append(slice(0, spatial[d] - 1))
                sl_r.append(slice(1, spatial[d]))
            else:
                sl_l.append(slice(1, spatial[d] - 1))
                sl_r.append(slice(1, spatial[d] - 1))
        return a[tuple(sl_l)], a[tuple(sl_r)]

    vel = w[1:-1]
    temp = w[-1] / (w[0] * gas.r_specific)
    # grad[k][m] = d u_k / d x_m on the faces
    grad = [[None] * ndim for _ in range(ndim)]
    vel_face = []
    for k in range(ndim):
        left, right = face(vel[k])
        vel_face.append(0.5 * (left + right))
        for m in range(ndim):
            if m == axis:
                grad[k][m] = (right - left) / dx[axis]
            else:
                cl, cr = face(_centered(vel[k], m, dx[m]))
                grad[k][m] = 0.5 * (cl + cr)
    tl, tr = face(temp)
    dtdn = (tr - tl) / dx[axis]
    div = sum(grad[k][k] for k in range(ndim))
    out = np.zeros((ndim + 2,) + dtdn.shape)
    work = np.zeros_like(dtdn)
    for k in range(ndim):
        tau = eta * (grad[k][axis] + grad[axis][k])
        if k == axis:
            tau = tau + (zeta - 2.0 * eta / 3.0) * div
        out[1 + k] = -tau
        work = work + tau * vel_face[k]
    out[-1] = -(work + lam * dtdn)
    return out
