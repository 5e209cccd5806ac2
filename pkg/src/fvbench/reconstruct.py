"""One-dimensional reconstruction of cell averages: WENO-Z (orders 3, 5, 7) and PPM.

Stencils put the stencil axis last.  For WENO with ``r`` substencils the
stencil holds ``2r-1`` averages ``q[i-r+1] .. q[i+r-1]``; the returned pair is
``(left, right)`` where ``left`` is the value at ``x[i+1/2]`` seen from cell
``i`` and ``right`` is the value at ``x[i-1/2]`` seen from cell ``i``.

Coefficient tables follow Jiang & Shu (1996) for r=2,3 and Balsara & Shu (2000)
for r=4.  The r=4 smoothness indicators are scaled by 1/240 so that every order
uses the same integral definition of beta.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numba
import numpy as np
from numba import njit, prange

EPSILON = 1e-40
ADAPT_EXPONENT = 2

PPM = 0  # kind code for the line kernels; WENO kinds are r = 2, 3, 4

_F = Fraction

# candidate interpolants at x[i+1/2], substencil k covers q[i-r+1+k] .. q[i+k]
FACE_COEFFS = {
    2: [[_F(-1, 2), _F(3, 2)],
        [_F(1, 2), _F(1, 2)]],
    3: [[_F(1, 3), _F(-7, 6), _F(11, 6)],
        [_F(-1, 6), _F(5, 6), _F(1, 3)],
        [_F(1, 3), _F(5, 6), _F(-1, 6)]],
    4: [[_F(-1, 4), _F(13, 12), _F(-23, 12), _F(25, 12)],
        [_F(1, 12), _F(-5, 12), _F(13, 12), _F(1, 4)],
        [_F(-1, 12), _F(7, 12), _F(7, 12), _F(-1, 12)],
        [_F(1, 4), _F(13, 12), _F(-5, 12), _F(1, 12)]],
}

OPTIMAL_WEIGHTS = {
    2: [_F(1, 3), _F(2, 3)],
    3: [_F(1, 10), _F(6, 10), _F(3, 10)],
    4: [_F(1, 35), _F(12, 35), _F(18, 35), _F(4, 35)],
}


def _outer(a, b):
    return [[x * y for y in b] for x in a]


def _add(*mats):
    n = len(mats[0])
    return [[sum(m[i][j] for m in mats) for j in range(n)] for i in range(n)]


def _scale(c, m):
    return [[c * x for x in row] for row in m]


def _js5_forms():
    # 13/12 (second difference)^2 + 1/4 (first-difference combination)^2
    second = [1, -2, 1]
    firsts = [[1, -4, 3], [1, 0, -1], [3, -4, 1]]
    return [_add(_scale(_F(13, 12), _outer(second, second)), _scale(_F(1, 4), _outer(f, f)))
            for f in firsts]


def _bs7_forms():
    # Balsara & Shu: beta_0 = u0(547u0 - 3882u1 + 4642u2 - 1854u3) + u1(7043u1 - 17246u2 + 7042u3)
    #                        + u2(11003u2 - 9402u3) + 2107u3^2      (u0 = q[i-3] ... u3 = q[i])
    upper = [
        [[547, -3882, 4642, -1854], [0, 7043, -17246, 7042], [0, 0, 11003, -9402], [0, 0, 0, 2107]],
        [[267, -1642, 1602, -494], [0, 2843, -5966, 1922], [0, 0, 3443, -2522], [0, 0, 0, 547]],
        [[547, -2522, 1922, -494], [0, 3443, -5966, 1602], [0, 0, 2843, -1642], [0, 0, 0, 267]],
        [[2107, -9402, 7042, -1854], [0, 11003, -17246, 4642], [0, 0, 7043, -3882], [0, 0, 0, 547]],
    ]
    forms = []
    for t in upper:
        forms.append([[_F(t[i][j] if i == j else (t[i][j] + t[j][i]), 2 if i != j else 1) / 240
                       for j in range(4)] for i in range(4)])
    return forms


# beta_k = s_k^T B_k s_k with s_k the r averages of substencil k
SMOOTHNESS_FORMS = {
    2: [[[_F(1), _F(-1)], [_F(-1), _F(1)]]] * 2,
    3: _js5_forms(),
    4: _bs7_forms(),
}


def _as_float(table) -> np.ndarray:
    return np.array(table, dtype=float)


_C = {r: _as_float(v) for r, v in FACE_COEFFS.items()}
_D = {r: _as_float(v) for r, v in OPTIMAL_WEIGHTS.items()}
_B = {r: _as_float(v) for r, v in SMOOTHNESS_FORMS.items()}

ORDERS = (2, 3, 4)
GAUSS_NODES = (-np.sqrt(3.0) / 6.0, np.sqrt(3.0) / 6.0)


class FacePair(NamedTuple):
    left: np.ndarray   # value at x[i+1/2]
    right: np.ndarray  # value at x[i-1/2]


def stencil_width(r: int) -> int:
    return 2 * r - 1


def _check(stencil: np.ndarray, r: int) -> np.ndarray:
    if r not in ORDERS:
        raise ValueError(f"substencil count must be one of {ORDERS}, got {r}")
    s = np.asarray(stencil, dtype=float)
    if s.shape[-1] != 2 * r - 1:
        raise ValueError(f"stencil width {s.shape[-1]} does not match r={r}")
    return s


def _substencils(s: np.ndarray, r: int) -> np.ndarray:
    """Stack ``(..., r, r)`` of substencil values."""
    return np.stack([s[..., k:k + r] for k in range(r)], axis=-2)


def smoothness_indicators(stencil, r: int) -> np.ndarray:
    """Return ``(..., r)`` smoothness indicators beta_0 .. beta_{r-1}."""
    s = _check(stencil, r)
    # the forms annihilate constants; working relative to the centre keeps
    # constant data at exactly zero
    sub = _substencils(s - s[..., r - 1:r], r)
    return np.maximum(np.einsum("...ki,kij,...kj->...k", sub, _B[r], sub), 0.0)


def wenoz_weights(beta, r: int, epsilon: float = EPSILON, a: int = ADAPT_EXPONENT,
                  optimal=None) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    d = _D[r] if optimal is None else np.asarray(optimal, dtype=float)
    tau = np.abs(beta[..., :1] - beta[..., r - 1:r])
    alpha = d * (1.0 + tau / (beta + epsilon)) ** a
    return alpha / alpha.sum(axis=-1, keepdims=True)


def _wenojs_weights(beta, r: int, epsilon: float = 1e-6, a: int = 2) -> np.ndarray:
    # classic Jiang-Shu weights; used only as a comparison baseline in tests
    alpha = _D[r] / (np.asarray(beta, float) + epsilon) ** a
    return alpha / alpha.sum(axis=-1, keepdims=True)


def candidate_values(stencil, r: int) -> FacePair:
    """Substencil interpolants ``(..., r)`` at both faces."""
    s = _check(stencil, r)
    sub = _substencils(s, r)
    left = np.einsum("kj,...kj->...k", _C[r], sub)
    # mirror: reversing the stencil maps substencil k onto r-1-k
    right = np.einsum("kj,...kj->...k", _C[r], _substencils(s[..., ::-1], r))[..., ::-1]
    return FacePair(left, right)


def weno_face_values(stencil, r: int, epsilon: float = EPSILON, a: int = ADAPT_EXPONENT) -> FacePair:
    s = _check(stencil, r)
    beta = smoothness_indicators(s, r)
    cand = candidate_values(s, r)
    w_left = wenoz_weights(beta, r, epsilon, a)
    w_right = wenoz_weights(beta, r, epsilon, a, optimal=_D[r][::-1])
    return FacePair((w_left * cand.left).sum(-1), (w_right * cand.right).sum(-1))


def _cell_moments(cells, degree: int) -> np.ndarray:
    """Averages of x**m over unit cells centred at ``cells`` (rows) for m <= degree."""
    m = np.arange(degree + 1)
    j = np.asarray(cells, float)[:, None]
    return ((j + 0.5) ** (m + 1) - (j - 0.5) ** (m + 1)) / (m + 1)


def point_coefficients(cells, xi: float) -> np.ndarray:
    """Weights mapping averages over ``cells`` to the interpolant's value at ``xi``."""
    a = _cell_moments(cells, len(cells) - 1)
    return np.linalg.solve(a.T, xi ** np.arange(len(cells)))


def point_weights(r: int, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Substencil coefficients ``(r, r)`` and linear weights ``(r,)`` at position ``xi``.

    ``xi`` is measured in cell widths from the centre of cell ``i``.
    """
    coeffs = np.array([point_coefficients(np.arange(-(r - 1) + k, k + 1), xi) for k in range(r)])
    full = point_coefficients(np.arange(-(r - 1), r), xi)
    embed = np.zeros((2 * r - 1, r))
    for k in range(r):
        embed[k:k + r, k] = coeffs[k]
    d, *_ = np.linalg.lstsq(embed, full, rcond=None)
    if np.abs(embed @ d - full).max() > 1e-12:
        raise ArithmeticError(f"no linear weights reproduce the full stencil at xi={xi}")
    if np.any(d < 0):
        raise ArithmeticError(f"negative linear weights at xi={xi}; splitting not implemented")
    return coeffs, d


def weno_point_values(stencil, r: int, xi: float, epsilon: float = EPSILON,
                      a: int = ADAPT_EXPONENT) -> np.ndarray:
    s = _check(stencil, r)
    coeffs, d = point_weights(r, xi)
    beta = smoothness_indicators(s, r)
    cand = np.einsum("kj,...kj->...k", coeffs, _substencils(s, r))
    return (wenoz_weights(beta, r, epsilon, a, optimal=d) * cand).sum(-1)


# ---------------------------------------------------------------------------
# PPM

PPM_C = 1.25


def _ppm_interface_np(qa, qb, qc, qd, limit: bool):
    qf = 7.0 / 12.0 * (qb + qc) - 1.0 / 12.0 * (qa + qd)
    if not limit:
        return qf
    d2 = 3.0 * (qb - 2.0 * qf + qc)
    d2l = qa - 2.0 * qb + qc
    d2r = qb - 2.0 * qc + qd
    same = (np.sign(d2) == np.sign(d2l)) & (np.sign(d2) == np.sign(d2r))
    d2lim = np.where(same, np.sign(d2) * np.minimum(np.abs(d2), PPM_C * np.minimum(np.abs(d2l), np.abs(d2r))), 0.0)
    return np.where((qf - qb) * (qc - qf) < 0.0, 0.5 * (qb + qc) - d2lim / 6.0, qf)


def ppm_face_values(stencil, limit: bool = True) -> FacePair:
    """PPM edge values of the centre cell of a 5-cell stencil.

    Fourth-order interface interpolation with the Colella-Sekora limiter,
    which keeps smooth extrema at full accuracy.
    """
    s = np.asarray(stencil, dtype=float)
    if s.shape[-1] != 5:
        raise ValueError("PPM needs a 5-cell stencil")
    q0, q1, q, q3, q4 = (s[..., j] for j in range(5))
    qm = _ppm_interface_np(q0, q1, q, q3, limit)
    qp = _ppm_interface_np(q1, q, q3, q4, limit)
    if not limit:
        return FacePair(qp, qm)
    extremum = ((qp - q) * (q - qm) <= 0.0) | ((q1 - q) * (q - q3) <= 0.0)
    d2 = 6.0 * (qm + qp - 2.0 * q)
    d2c = q1 - 2.0 * q + q3
    d2l = q0 - 2.0 * q1 + q
    d2r = q - 2.0 * q3 + q4
    sg = np.sign(d2)
    same = (sg == np.sign(d2c)) & (sg == np.sign(d2l)) & (sg == np.sign(d2r))
    d2lim = np.where(same, sg * np.minimum(np.abs(d2), PPM_C * np.minimum(np.minimum(np.abs(d2l), np.abs(d2r)), np.abs(d2c))), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d2 != 0.0, d2lim / np.where(d2 != 0.0, d2, 1.0), 0.0)
    qp_ext = q + (qp - q) * ratio
    qm_ext = q + (qm - q) * ratio
    over_p = np.abs(qp - q) >= 2.0 * np.abs(qm - q)
    over_m = np.abs(qm - q) >= 2.0 * np.abs(qp - q)
    qp_mon = np.where(over_p, q - 2.0 * (qm - q), qp)
    qm_mon = np.where(over_m, q - 2.0 * (qp - q), qm)
    return FacePair(np.where(extremum, qp_ext, qp_mon), np.where(extremum, qm_ext, qm_mon))


def ppm_point_values(stencil, xi: float, limit: bool = True) -> np.ndarray:
    """Value of the PPM parabola at ``xi`` (cell widths from the cell centre)."""
    s = np.asarray(stencil, dtype=float)
    qp, qm = ppm_face_values(s, limit)
    return _parabola(qm, qp, s[..., 2], xi + 0.5)


def _parabola(qm, qp, q, x):
    return qm + x * ((qp - qm) + (6.0 * q - 3.0 * (qm + qp)) * (1.0 - x))


# ---------------------------------------------------------------------------
# numba line kernels
#
# q has shape (nvar, nlines, npad) with g ghost cells at each end of every line.
# Face f of a line sits between padded cells g-1+f and g+f, f = 0 .. n.


@njit(inline="always")
def _zfac(tau, beta, eps, a):
    t = 1.0 + tau / (beta + eps)
    if a == 2:
        return t * t
    return t ** a


@njit(inline="always")
def _wz3(qm1, q0, qp1, eps, a):
    b0 = (q0 - qm1) * (q0 - qm1)
    b1 = (qp1 - q0) * (qp1 - q0)
    tau = abs(b0 - b1)
    z0 = _zfac(tau, b0, eps, a)
    z1 = _zfac(tau, b1, eps, a)
    c0l = -0.5 * qm1 + 1.5 * q0
    c1l = 0.5 * q0 + 0.5 * qp1
    c0r = 0.5 * qm1 + 0.5 * q0
    c1r = 1.5 * q0 - 0.5 * qp1
    al0 = z0 / 3.0
    al1 = 2.0 * z1 / 3.0
    ar0 = 2.0 * z0 / 3.0
    ar1 = z1 / 3.0
    left = (al0 * c0l + al1 * c1l) / (al0 + al1)
    right = (ar0 * c0r + ar1 * c1r) / (ar0 + ar1)
    return left, right


@njit(inline="always")
def _wz5(qm2, qm1, q0, qp1, qp2, eps, a):
    t = qm2 - 2.0 * qm1 + q0
    s = qm2 - 4.0 * qm1 + 3.0 * q0
    b0 = 13.0 / 12.0 * t * t + 0.25 * s * s
    t = qm1 - 2.0 * q0 + qp1
    s = qm1 - qp1
    b1 = 13.0 / 12.0 * t * t + 0.25 * s * s
    t = q0 - 2.0 * qp1 + qp2
    s = 3.0 * q0 - 4.0 * qp1 + qp2
    b2 = 13.0 / 12.0 * t * t + 0.25 * s * s
    tau = abs(b0 - b2)
    z0 = _zfac(tau, b0, eps, a)
    z1 = _zfac(tau, b1, eps, a)
    z2 = _zfac(tau, b2, eps, a)
    c0 = (2.0 * qm2 - 7.0 * qm1 + 11.0 * q0) / 6.0
    c1 = (-qm1 + 5.0 * q0 + 2.0 * qp1) / 6.0
    c2 = (2.0 * q0 + 5.0 * qp1 - qp2) / 6.0
    a0 = 0.1 * z0
    a1 = 0.6 * z1
    a2 = 0.3 * z2
    left = (a0 * c0 + a1 * c1 + a2 * c2) / (a0 + a1 + a2)
    c0 = (-qm2 + 5.0 * qm1 + 2.0 * q0) / 6.0
    c1 = (2.0 * qm1 + 5.0 * q0 - qp1) / 6.0
    c2 = (11.0 * q0 - 7.0 * qp1 + 2.0 * qp2) / 6.0
    a0 = 0.3 * z0
    a1 = 0.6 * z1
    a2 = 0.1 * z2
    right = (a0 * c0 + a1 * c1 + a2 * c2) / (a0 + a1 + a2)
    return left, right


@njit(inline="always")
def _wz7(u0, u1, u2, u3, u4, u5, u6, eps, a):
    # u3 is the centre cell
    # betas from values relative to the centre (exactly zero for constants)
    v0 = u0 - u3
    v1 = u1 - u3
    v2 = u2 - u3
    v4 = u4 - u3
    v5 = u5 - u3
    v6 = u6 - u3
    b0 = (v0 * (547.0 * v0 - 3882.0 * v1 + 4642.0 * v2)
          + v1 * (7043.0 * v1 - 17246.0 * v2) + 11003.0 * v2 * v2) / 240.0
    b1 = (v1 * (267.0 * v1 - 1642.0 * v2 - 494.0 * v4)
          + v2 * (2843.0 * v2 + 1922.0 * v4) + 547.0 * v4 * v4) / 240.0
    b2 = (v2 * (547.0 * v2 + 1922.0 * v4 - 494.0 * v5)
          + v4 * (2843.0 * v4 - 1642.0 * v5) + 267.0 * v5 * v5) / 240.0
    b3 = (v4 * (11003.0 * v4 - 17246.0 * v5 + 4642.0 * v6)
          + v5 * (7043.0 * v5 - 3882.0 * v6) + 547.0 * v6 * v6) / 240.0
    # rounding can leave tiny negative values for smooth data
    b0 = max(b0, 0.0)
    b1 = max(b1, 0.0)
    b2 = max(b2, 0.0)
    b3 = max(b3, 0.0)
    tau = abs(b0 - b3)
    z0 = _zfac(tau, b0, eps, a)
    z1 = _zfac(tau, b1, eps, a)
    z2 = _zfac(tau, b2, eps, a)
    z3 = _zfac(tau, b3, eps, a)
    c0 = (-3.0 * u0 + 13.0 * u1 - 23.0 * u2 + 25.0 * u3) / 12.0
    c1 = (u1 - 5.0 * u2 + 13.0 * u3 + 3.0 * u4) / 12.0
    c2 = (-u2 + 7.0 * u3 + 7.0 * u4 - u5) / 12.0
    c3 = (3.0 * u3 + 13.0 * u4 - 5.0 * u5 + u6) / 12.0
    a0 = z0 / 35.0
    a1 = 12.0 * z1 / 35.0
    a2 = 18.0 * z2 / 35.0
    a3 = 4.0 * z3 / 35.0
    left = (a0 * c0 + a1 * c1 + a2 * c2 + a3 * c3) / (a0 + a1 + a2 + a3)
    c0 = (u0 - 5.0 * u1 + 13.0 * u2 + 3.0 * u3) / 12.0
    c1 = (-u1 + 7.0 * u2 + 7.0 * u3 - u4) / 12.0
    c2 = (3.0 * u2 + 13.0 * u3 - 5.0 * u4 + u5) / 12.0
    c3 = (25.0 * u3 - 23.0 * u4 + 13.0 * u5 - 3.0 * u6) / 12.0
    a0 = 4.0 * z0 / 35.0
    a1 = 18.0 * z1 / 35.0
    a2 = 12.0 * z2 / 35.0
    a3 = z3 / 35.0
    right = (a0 * c0 + a1 * c1 + a2 * c2 + a3 * c3) / (a0 + a1 + a2 + a3)
    return left, right


@njit(inline="always")
def _sgn(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(inline="always")
def _ppm_iface(qa, qb, qc, qd, limit):
    qf = 7.0 / 12.0 * (qb + qc) - 1.0 / 12.0 * (qa + qd)
    if limit and (qf - qb) * (qc - qf) < 0.0:
        d2 = 3.0 * (qb - 2.0 * qf + qc)
        d2l = qa - 2.0 * qb + qc
        d2r = qb - 2.0 * qc + qd
        s = _sgn(d2)
        d2lim = 0.0
        if s == _sgn(d2l) and s == _sgn(d2r):
            d2lim = s * min(abs(d2), PPM_C * min(abs(d2l), abs(d2r)))
        qf = 0.5 * (qb + qc) - d2lim / 6.0
    return qf


@njit(inline="always")
def _ppm(q0, q1, q, q3, q4, limit):
    qm = _ppm_iface(q0, q1, q, q3, limit)
    qp = _ppm_iface(q1, q, q3, q4, limit)
    if not limit:
        return qp, qm
    if (qp - q) * (q - qm) <= 0.0 or (q1 - q) * (q - q3) <= 0.0:
        d2 = 6.0 * (qm + qp - 2.0 * q)
        d2c = q1 - 2.0 * q + q3
        d2l = q0 - 2.0 * q1 + q
        d2r = q - 2.0 * q3 + q4
        s = _sgn(d2)
        d2lim = 0.0
        if s == _sgn(d2c) and s == _sgn(d2l) and s == _sgn(d2r):
            d2lim = s * min(abs(d2), PPM_C * min(min(abs(d2l), abs(d2r)), abs(d2c)))
        if d2 != 0.0:
            ratio = d2lim / d2
            qp = q + (qp - q) * ratio
            qm = q + (qm - q) * ratio
        else:
            qp = q
            qm = q
    else:
        dp = qp - q
        dm = qm - q
        if abs(dp) >= 2.0 * abs(dm):
            qp = q - 2.0 * dm
        if abs(dm) >= 2.0 * abs(dp):
            qm = q - 2.0 * dp
    return qp, qm


@njit(inline="always")
def _pair(s, i, kind, eps, a, limit):
    """(value at i+1/2, value at i-1/2) from the stencil of cell ``i`` in array ``s``."""
    if kind == 3:
        return _wz5(s[i - 2], s[i - 1], s[i], s[i + 1], s[i + 2], eps, a)
    if kind == 2:
        return _wz3(s[i - 1], s[i], s[i + 1], eps, a)
    if kind == 4:
        return _wz7(s[i - 3], s[i - 2], s[i - 1], s[i], s[i + 1], s[i + 2], s[i + 3], eps, a)
    return _ppm(s[i - 2], s[i - 1], s[i], s[i + 1], s[i + 2], limit)


@njit(parallel=True, cache=True)
def reconstruct_lines(q, kind, eps, a, limit, g, q_left, q_right):
    """Fill face states ``q_left``/``q_right`` of shape ``(nvar, nlines, n+1)``."""
    nv, nl, npad = q.shape
    n = npad - 2 * g
    for job in prange(nv * nl):
        v = job // nl
        line = job % nl
        s = q[v, line]
        for i in range(g - 1, g + n + 1):
            lft, rgt = _pair(s, i, kind, eps, a, limit)
            if i < g + n:
                q_left[v, line, i - g + 1] = lft
            if i >= g:
                q_right[v, line, i - g] = rgt


@njit(inline="always")
def _beta_generic(s, i, r, forms, beta):
    if r == 3:
        a0, a1, a2, a3, a4 = s[i - 2], s[i - 1], s[i], s[i + 1], s[i + 2]
        beta[0] = 13.0 / 12.0 * (a0 - 2.0 * a1 + a2) ** 2 + 0.25 * (a0 - 4.0 * a1 + 3.0 * a2) ** 2
        beta[1] = 13.0 / 12.0 * (a1 - 2.0 * a2 + a3) ** 2 + 0.25 * (a1 - a3) ** 2
        beta[2] = 13.0 / 12.0 * (a2 - 2.0 * a3 + a4) ** 2 + 0.25 * (3.0 * a2 - 4.0 * a3 + a4) ** 2
        return
    if r == 2:
        beta[0] = (s[i] - s[i - 1]) ** 2
        beta[1] = (s[i + 1] - s[i]) ** 2
        return
    c = s[i]
    for k in range(r):
        acc = 0.0
        base = i - r + 1 + k
        for m in range(r):
            row = 0.0
            for j in range(r):
                row += forms[k, m, j] * (s[base + j] - c)
            acc += (s[base + m] - c) * row
        beta[k] = max(acc, 0.0)


@njit(parallel=True, cache=True)
def gauss_lines(q, kind, eps, a, limit, g, forms, coeffs, weights, out):
    """Values at the two Gauss nodes of every interior cell.

    ``out`` has shape ``(nvar, nlines, n, 2)``.  For WENO kinds ``coeffs`` is
    ``(2, r, r)`` and ``weights`` ``(2, r)``; both are ignored for PPM.
    """
    nv, nl, npad = q.shape
    n = npad - 2 * g
    for job in prange(nv * nl):
        v = job // nl
        line = job % nl
        s = q[v, line]
        if kind == PPM:
            for i in range(g, g + n):
                qp, qm = _ppm(s[i - 2], s[i - 1], s[i], s[i + 1], s[i + 2], limit)
                q6 = 6.0 * s[i] - 3.0 * (qm + qp)
                for node in range(2):
                    x = 0.5 + (2 * node - 1) * 0.28867513459481287
                    out[v, line, i - g, node] = qm + x * ((qp - qm) + q6 * (1.0 - x))
        else:
            _weno_gauss_line(s, kind, eps, a, g, n, forms, coeffs, weights, out[v, line])


@njit(inline="always")
def _weno_gauss_line(s, r, eps, a, g, n, forms, coeffs, weights, out):
    beta = np.empty(r)
    for i in range(g, g + n):
        _beta_generic(s, i, r, forms, beta)
        tau = abs(beta[0] - beta[r - 1])
        for node in range(2):
            num = 0.0
            den = 0.0
            for k in range(r):
                cand = 0.0
                base = i - r + 1 + k
                for j in range(r):
                    cand += coeffs[node, k, j] * s[base + j]
                alpha = weights[node, k] * _zfac(tau, beta[k], eps, a)
                num += alpha * cand
                den += alpha
            out[i - g, node] = num / den


def gauss_tables(kind: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(forms, coeffs, weights) arrays for :func:`gauss_lines`."""
    if kind == PPM:
        z = np.zeros((1, 1, 1))
        return z, z, np.zeros((1, 1))
    tables = [point_weights(kind, xi) for xi in GAUSS_NODES]
    coeffs = np.array([t[0] for t in tables])
    weights = np.array([t[1] for t in tables])
    return _B[kind].copy(), coeffs, weights


# ---------------------------------------------------------------------------
# characteristic-wise reconstruction of conserved variables


@njit(inline="always")
def _eigensystem(ul, ur, normal, gamma, lmat, rmat):
    """Left/right eigenvectors of the conserved flux Jacobian at the Roe average."""
    nv = ul.shape[0]
    ndim = nv - 2
    sl = np.sqrt(ul[0])
    sr = np.sqrt(ur[0])
    vel = np.empty(ndim)
    q2 = 0.0
    kel = 0.0
    ker = 0.0
    for d in range(ndim):
        vl = ul[1 + d] / ul[0]
        vr = ur[1 + d] / ur[0]
        kel += 0.5 * ul[0] * vl * vl
        ker += 0.5 * ur[0] * vr * vr
        vel[d] = (sl * vl + sr * vr) / (sl + sr)
        q2 += vel[d] * vel[d]
    pl = (gamma - 1.0) * (ul[nv - 1] - kel)
    pr = (gamma - 1.0) * (ur[nv - 1] - ker)
    hl = (ul[nv - 1] + pl) / ul[0]
    hr = (ur[nv - 1] + pr) / ur[0]
    h = (sl * hl + sr * hr) / (sl + sr)
    c = np.sqrt((gamma - 1.0) * (h - 0.5 * q2))
    un = vel[normal]
    b1 = (gamma - 1.0) / (c * c)
    for i in range(nv):
        for j in range(nv):
            lmat[i, j] = 0.0
            rmat[i, j] = 0.0
    last = nv - 1
    lmat[0, 0] = 0.5 * (0.5 * b1 * q2 + un / c)
    lmat[last, 0] = 0.5 * (0.5 * b1 * q2 - un / c)
    lmat[1, 0] = 1.0 - 0.5 * b1 * q2
    for d in range(ndim):
        lmat[0, 1 + d] = -0.5 * b1 * vel[d]
        lmat[last, 1 + d] = -0.5 * b1 * vel[d]
        lmat[1, 1 + d] = b1 * vel[d]
    lmat[0, 1 + normal] -= 0.5 / c
    lmat[last, 1 + normal] += 0.5 / c
    lmat[0, last] = 0.5 * b1
    lmat[last, last] = 0.5 * b1
    lmat[1, last] = -b1
    rmat[0, 0] = 1.0
    rmat[0, 1] = 1.0
    rmat[0, last] = 1.0
    for d in range(ndim):
        rmat[1 + d, 0] = vel[d]
        rmat[1 + d, 1] = vel[d]
        rmat[1 + d, last] = vel[d]
    rmat[1 + normal, 0] -= c
    rmat[1 + normal, last] += c
    rmat[last, 0] = h - un * c
    rmat[last, 1] = 0.5 * q2
    rmat[last, last] = h + un * c
    row = 2
    for d in range(ndim):
        if d == normal:
            continue
        lmat[row, 0] = -vel[d]
        lmat[row, 1 + d] = 1.0
        rmat[1 + d, row] = 1.0
        rmat[last, row] = vel[d]
        row += 1


def eigensystem(ul: np.ndarray, ur: np.ndarray, normal: int, gamma: float):
    """Python entry point to the Roe-average eigenvectors (used by tests)."""
    nv = ul.shape[0]
    lmat = np.empty((nv, nv))
    rmat = np.empty((nv, nv))
    _eigensystem_py(np.ascontiguousarray(ul, float), np.ascontiguousarray(ur, float), normal, gamma, lmat, rmat)
    return lmat, rmat


@njit(cache=True)
def _eigensystem_py(ul, ur, normal, gamma, lmat, rmat):
    _eigensystem(ul, ur, normal, gamma, lmat, rmat)


@njit(parallel=True, cache=True)
def reconstruct_lines_characteristic(u, kind, eps, a, limit, g, normal, gamma, q_left, q_right):
    """Like :func:`reconstruct_lines` but on conserved data projected per face."""
    nv, nl, npad = u.shape
    n = npad - 2 * g
    h = 3 if kind == PPM else kind - 1
    width = 2 * h + 2
    for line in prange(nl):
        lmat = np.empty((nv, nv))
        rmat = np.empty((nv, nv))
        w = np.empty((nv, width))
        ul = np.empty(nv)
        ur = np.empty(nv)
        cl = np.empty(nv)
        cr = np.empty(nv)
        for f in range(n + 1):
            i = g - 1 + f
            for v in range(nv):
                ul[v] = u[v, line, i]
                ur[v] = u[v, line, i + 1]
            _eigensystem(ul, ur, normal, gamma, lmat, rmat)
            for m in range(width):
                cell = i - h + m
                for v in range(nv):
                    acc = 0.0
                    for j in range(nv):
                        acc += lmat[v, j] * u[j, line, cell]
                    w[v, m] = acc
            for v in range(nv):
                lft, _ = _pair(w[v], h, kind, eps, a, limit)
                _, rgt = _pair(w[v], h + 1, kind, eps, a, limit)
                cl[v] = lft
                cr[v] = rgt
            for v in range(nv):
                accl = 0.0
                accr = 0.0
                for j in range(nv):
                    accl += rmat[v, j] * cl[j]
                    accr += rmat[v, j] * cr[j]
                q_left[v, line, f] = accl
                q_right[v, line, f] = accr


def set_threads(n: int | None) -> None:
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
