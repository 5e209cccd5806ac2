"""Method-of-lines finite-volume update.

Faces are visited dimension by dimension and the tendencies of all directions
are summed (unsplit).  Two face-flux quadratures are offered:

``midpoint``
    one reconstruction pair and one Riemann solve per face; cell averages are
    treated as point values, which makes the scheme second order overall.
``gauss2``
    the face-averaged states from the normal sweep are de-averaged to the 2
    (2D) or 2x2 (3D) Gauss nodes of each face by the same 1D reconstruction
    applied transversely; one Riemann solve per node.  Fourth order.

Time integration is the three-stage SSP Runge-Kutta method of Shu & Osher.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import reconstruct as rc
from .core import (
    EULER,
    INFLOW_OUTFLOW,
    PERIODIC,
    ConservedField,
    GasModel,
    StateError,
    TransportCoeffs,
    cons_to_prim,
)
from .flux import RIEMANN_SOLVERS, riemann_lines, viscous_flux

PPM = "ppm"
WENOZ3 = "weno-z3"
WENOZ5 = "weno-z5"
WENOZ7 = "weno-z7"
RECONSTRUCTIONS = (PPM, WENOZ3, WENOZ5, WENOZ7)
KIND = {PPM: rc.PPM, WENOZ3: 2, WENOZ5: 3, WENOZ7: 4}
HALF_WIDTH = {PPM: 2, WENOZ3: 1, WENOZ5: 2, WENOZ7: 3}

MIDPOINT = "midpoint"
GAUSS2 = "gauss2"
QUADRATURES = (MIDPOINT, GAUSS2)

PRIMITIVE = "primitive"
CONSERVED = "conserved"
CHARACTERISTIC = "characteristic"
VARIABLES = (PRIMITIVE, CONSERVED, CHARACTERISTIC)


@dataclass(frozen=True)
class WenoParams:
    epsilon: float = rc.EPSILON
    a: int = rc.ADAPT_EXPONENT

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.a) != self.a or self.a < 1:
            raise ValueError("a must be an integer >= 1")


@dataclass(frozen=True)
class SchemeConfig:
    reconstruction: str = WENOZ5
    face_quadrature: str = MIDPOINT
    weno_params: WenoParams = WenoParams()
    # None picks primitive for midpoint and conserved for gauss2
    reconstruction_variables: str | None = None
    riemann_solver: str = "hllc"
    ppm_limiter: bool = True

    def __post_init__(self):
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ValueError(f"reconstruction must be one of {RECONSTRUCTIONS}, got {self.reconstruction!r}")
        if self.face_quadrature not in QUADRATURES:
            raise ValueError(f"face_quadrature must be one of {QUADRATURES}, got {self.face_quadrature!r}")
        if self.reconstruction_variables not in VARIABLES + (None,):
            raise ValueError(f"reconstruction_variables must be one of {VARIABLES}")
        if self.riemann_solver not in RIEMANN_SOLVERS:
            raise ValueError(f"riemann_solver must be one of {RIEMANN_SOLVERS}")

    @property
    def variables(self) -> str:
        if self.reconstruction_variables is not None:
            return self.reconstruction_variables
        return CONSERVED if self.face_quadrature == GAUSS2 else PRIMITIVE

    @property
    def kind(self) -> int:
        return KIND[self.reconstruction]

    @property
    def label(self) -> str:
        return f"{self.reconstruction}/{self.face_quadrature}"


@dataclass
class StepStats:
    dt: float
    riemann_solves: int = 0
    reconstruction_calls: int = 0
    wall_time: float = 0.0


@dataclass
class OpCounter:
    """Accumulates work counts.

    ``reconstruction_calls`` counts 1D stencil evaluations that deliver a full
    state (all components): one per face for a normal sweep, one per cell line
    segment and side for each transverse de-averaging sweep.
    """

    riemann_solves: int = 0
    reconstruction_calls: int = 0


# ---------------------------------------------------------------------------
# ghost cells


def fill_ghosts(f: ConservedField) -> ConservedField:
    grid = f.grid
    g = grid.ghost_width
    u = f.data
    for d in range(grid.ndim):
        n = grid.cells[d]
        ax = d + 1

        def sl(a, b):
            idx = [slice(None)] * u.ndim
            idx[ax] = slice(a, b)
            return tuple(idx)

        if grid.boundary[d] == PERIODIC:
            if n < g:
                raise ValueError(f"periodic axis {d} has fewer cells ({n}) than ghost width ({g})")
            u[sl(0, g)] = u[sl(n, n + g)]
            u[sl(n + g, n + 2 * g)] = u[sl(g, 2 * g)]
        elif grid.boundary[d] == INFLOW_OUTFLOW:
            if d not in f.inflow:
                raise ValueError(f"axis {d} needs an inflow state for its Dirichlet boundary")
            state = np.asarray(f.inflow[d], float).reshape((-1,) + (1,) * grid.ndim)
            u[sl(0, g)] = state
            u[sl(n + g, n + 2 * g)] = u[sl(n + g - 1, n + g)]
        else:
            raise ValueError(f"unknown boundary {grid.boundary[d]!r}")
    return f


# ---------------------------------------------------------------------------
# hyperbolic tendencies


def _check_ghosts(f: ConservedField, cfg: SchemeConfig) -> None:
    need = HALF_WIDTH[cfg.reconstruction] + 1
    if f.grid.ghost_width < need:
        raise ValueError(f"{cfg.reconstruction} needs ghost_width >= {need}")


def _solver_code(cfg: SchemeConfig) -> int:
    return RIEMANN_SOLVERS.index(cfg.riemann_solver)


def _lines(a: np.ndarray, axis: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Move spatial ``axis`` last and flatten the others: ``(nvar, nlines, m)``."""
    moved = np.moveaxis(a, axis + 1, -1)
    others = moved.shape[1:-1]
    return np.ascontiguousarray(moved).reshape(a.shape[0], -1, moved.shape[-1]), others


def _locate_bad(wl: np.ndarray, wr: np.ndarray, flux: np.ndarray) -> str:
    bad = ~((wl[0] > 0) & (wr[0] > 0) & (wl[-1] > 0) & (wr[-1] > 0) & np.all(np.isfinite(flux), axis=0))
    idx = tuple(int(i) for i in np.argwhere(bad)[0])
    return f"(line, face)={idx}: left={wl[(slice(None),) + idx]}, right={wr[(slice(None),) + idx]}"


def _riemann(wl, wr, axis, gas, cfg, counter, where=""):
    flux = np.empty_like(wl)
    bad = riemann_lines(wl, wr, axis, gas.gamma, _solver_code(cfg), flux)
    if bad:
        raise StateError(f"{bad} inadmissible face states along axis {axis}{where}; first at {_locate_bad(wl, wr, flux)}")
    if counter is not None:
        counter.riemann_solves += wl.shape[1] * wl.shape[2]
    return flux


def _normal_sweep(q: np.ndarray, axis: int, cfg: SchemeConfig, gas: GasModel, g: int,
                  characteristic: bool) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    lines, others = _lines(q, axis)
    nv, nl, npad = lines.shape
    ql = np.empty((nv, nl, npad - 2 * g + 1))
    qr = np.empty_like(ql)
    p = cfg.weno_params
    if characteristic:
        rc.reconstruct_lines_characteristic(lines, cfg.kind, p.epsilon, p.a, cfg.ppm_limiter, g,
                                            axis, gas.gamma, ql, qr)
    else:
        rc.reconstruct_lines(lines, cfg.kind, p.epsilon, p.a, cfg.ppm_limiter, g, ql, qr)
    return ql, qr, others


def _to_primitive(q: np.ndarray, variables: str, gas: GasModel) -> np.ndarray:
    if variables == PRIMITIVE:
        return q
    try:
        return cons_to_prim(q, gas.gamma)
    except StateError as exc:
        raise StateError(f"reconstructed face state inadmissible: {exc}") from None


def hyperbolic_rhs_midpoint(f: ConservedField, cfg: SchemeConfig, gas: GasModel,
                            counter: OpCounter | None = None) -> np.ndarray:
    """Interior tendency ``(nvar, *cells)`` with one Riemann solve per face."""
    grid = f.grid
    _check_ghosts(f, cfg)
    g = grid.ghost_width
    variables = cfg.variables
    q = cons_to_prim(f.data, gas.gamma) if variables == PRIMITIVE else f.data
    rhs = np.zeros((grid.nvar,) + grid.cells)
    for d in range(grid.ndim):
        idx = [slice(None)] + [slice(None) if k == d else grid.interior[k] for k in range(grid.ndim)]
        ql, qr, others = _normal_sweep(q[tuple(idx)], d, cfg, gas, g, variables == CHARACTERISTIC)
        wl = _to_primitive(ql, variables, gas)
        wr = _to_primitive(qr, variables, gas)
        flux = _riemann(wl, wr, d, gas, cfg, counter)
        if counter is not None:
            counter.reconstruction_calls += ql.shape[1] * ql.shape[2]
        div = (flux[..., 1:] - flux[..., :-1]) / grid.dx[d]
        rhs -= np.moveaxis(div.reshape((grid.nvar,) + others + (grid.cells[d],)), -1, d + 1)
    return rhs


def _transverse(q: np.ndarray, axis: int, cfg: SchemeConfig, g: int, tables) -> np.ndarray:
    """De-average along spatial ``axis`` of ``q``; a trailing node axis of 2 is appended there.

    Returns an array where ``axis`` is replaced by the interior cells and a new
    axis of length 2 (the Gauss nodes) follows it.
    """
    lines, others = _lines(q, axis)
    nv, nl, npad = lines.shape
    n = npad - 2 * g
    out = np.empty((nv, nl, n, 2))
    p = cfg.weno_params
    forms, coeffs, weights = tables
    rc.gauss_lines(lines, cfg.kind, p.epsilon, p.a, cfg.ppm_limiter, g, forms, coeffs, weights, out)
    out = out.reshape((nv,) + others + (n, 2))
    # restore axis position: currently (..., n, 2) at the end
    return np.moveaxis(out, (-2, -1), (axis + 1, axis + 2))


def hyperbolic_rhs_gauss2(f: ConservedField, cfg: SchemeConfig, gas: GasModel,
                          counter: OpCounter | None = None) -> np.ndarray:
    """Interior tendency with Gauss-node face quadrature (2 nodes per transverse direction)."""
    grid = f.grid
    if grid.ndim == 1:
        return hyperbolic_rhs_midpoint(f, cfg, gas, counter)
    _check_ghosts(f, cfg)
    g = grid.ghost_width
    variables = cfg.variables
    q = cons_to_prim(f.data, gas.gamma) if variables == PRIMITIVE else f.data
    # transverse sweeps always act on conserved (or primitive) components
    transverse_vars = PRIMITIVE if variables == PRIMITIVE else CONSERVED
    tables = rc.gauss_tables(cfg.kind)
    nv = grid.nvar
    rhs = np.zeros((nv,) + grid.cells)
    for d in range(grid.ndim):
        ql, qr, others = _normal_sweep(q, d, cfg, gas, g, variables == CHARACTERISTIC)
        nf = ql.shape[2]
        if counter is not None:
            counter.reconstruction_calls += ql.shape[1] * nf
        tdims = [k for k in range(grid.ndim) if k != d]
        nodes = []
        for side in (ql, qr):
            # (nvar, P_t1[, P_t2], nf) with transverse axes in increasing order
            a = side.reshape((nv,) + others + (nf,))
            a = _transverse(a, 0, cfg, g, tables)  # (nvar, n_t1, 2[, P_t2], nf)
            if counter is not None:
                counter.reconstruction_calls += int(np.prod(a.shape[3:])) * a.shape[1]
            if len(tdims) == 2:
                a = _transverse(a, 2, cfg, g, tables)  # (nvar, n_t1, 2, n_t2, 2, nf)
                if counter is not None:
                    counter.reconstruction_calls += int(np.prod(a.shape[1:3])) * a.shape[3] * a.shape[-1]
            nodes.append(a)
        shape = nodes[0].shape
        wl = _to_primitive(np.ascontiguousarray(nodes[0]).reshape(nv, 1, -1), transverse_vars, gas)
        wr = _to_primitive(np.ascontiguousarray(nodes[1]).reshape(nv, 1, -1), transverse_vars, gas)
        flux = _riemann(wl, wr, d, gas, cfg, counter, " (gauss nodes)").reshape(shape)
        # average over node axes
        if len(tdims) == 1:
            face = flux.mean(axis=2)  # (nvar, n_t1, nf)
        else:
            face = flux.mean(axis=(2, 4))  # (nvar, n_t1, n_t2, nf)
        div = (face[..., 1:] - face[..., :-1]) / grid.dx[d]
        rhs -= np.moveaxis(div, -1, d + 1)
    return rhs


def hyperbolic_rhs(f: ConservedField, cfg: SchemeConfig, gas: GasModel,
                   counter: OpCounter | None = None) -> np.ndarray:
    if cfg.face_quadrature == GAUSS2:
        return hyperbolic_rhs_gauss2(f, cfg, gas, counter)
    return hyperbolic_rhs_midpoint(f, cfg, gas, counter)


# ---------------------------------------------------------------------------
# diffusion


def diffusive_rhs(f: ConservedField, coeffs: TransportCoeffs, gas: GasModel) -> np.ndarray:
    """Second-order centred viscous and conductive tendency (ghosts must be filled)."""
    grid = f.grid
    rhs = np.zeros((grid.nvar,) + grid.cells)
    if coeffs.inviscid:
        return rhs
    g = grid.ghost_width
    idx = (slice(None),) + tuple(slice(g - 1, g + n + 1) for n in grid.cells)
    w = cons_to_prim(f.data[idx], gas.gamma)
    for d in range(grid.ndim):
        flux = viscous_flux(w, d, grid.dx, coeffs, gas)
        lo = [slice(None)] * flux.ndim
        hi = [slice(None)] * flux.ndim
        lo[d + 1] = slice(0, -1)
        hi[d + 1] = slice(1, None)
        rhs -= (flux[tuple(hi)] - flux[tuple(lo)]) / grid.dx[d]
    return rhs


# ---------------------------------------------------------------------------
# time stepping


def stable_dt(f: ConservedField, cfl: float, coeffs: TransportCoeffs = EULER,
              gas: GasModel | None = None) -> float:
    """CFL-limited step: ``cfl * min dx_d / (|u_d| + c)``, also bounded by diffusion."""
    gas = gas or GasModel()
    grid = f.grid
    w = f.primitive(gas)
    rho, p = w[0], w[-1]
    c = np.sqrt(gas.gamma * p / rho)
    dt = math.inf
    for d in range(grid.ndim):
        speed = float(np.max(np.abs(w[1 + d]) + c))
        dt = min(dt, grid.dx[d] / speed)
    dt *= cfl
    if not coeffs.inviscid:
        diff = max(coeffs.shear_viscosity, coeffs.conductivity / gas.cv)
        if diff > 0:
            dxmin = min(grid.dx)
            dt = min(dt, dxmin * dxmin * float(rho.min()) / (2 * grid.ndim * diff))
    return dt


def tendency(f: ConservedField, cfg: SchemeConfig, gas: GasModel, coeffs: TransportCoeffs,
             counter: OpCounter | None = None) -> np.ndarray:
    fill_ghosts(f)
    rhs = hyperbolic_rhs(f, cfg, gas, counter)
    if not coeffs.inviscid:
        rhs += diffusive_rhs(f, coeffs, gas)
    return rhs


def ssp_rk3_step(f: ConservedField, dt: float, cfg: SchemeConfig, gas: GasModel,
                 coeffs: TransportCoeffs = EULER, counter: OpCounter | None = None) -> ConservedField:
    """One SSP-RK3 step; returns a new field at ``f.time + dt``."""
    u0 = f.interior.copy()
    work = f.copy()
    interior = work.interior
    stages = ((1.0, 0.0), (0.25, 0.75), (2.0 / 3.0, 1.0 / 3.0))
    for stage, (b, a0) in enumerate(stages, start=1):
        try:
            rhs = tendency(work, cfg, gas, coeffs, counter)
        except StateError as exc:
            raise StateError(f"t={f.time:.9g}, stage {stage}: {exc}") from None
        if stage == 1:
            interior[...] = u0 + dt * rhs
        else:
            interior[...] = a0 * u0 + b * (interior + dt * rhs)
    try:
        cons_to_prim(interior, gas.gamma)
    except StateError as exc:
        raise StateError(f"t={f.time + dt:.9g}, after step: {exc}") from None
    work.time = f.time + dt
    return work


class MaxStepsExceeded(RuntimeError):
    pass


def advance_to_time(f: ConservedField, t_end: float, cfg: SchemeConfig, gas: GasModel,
                    coeffs: TransportCoeffs = EULER, cfl: float = 0.5,
                    callbacks: Iterable[Callable[[ConservedField], None]] = (),
                    sample_interval: float | None = None, max_steps: int = 10_000_000,
                    dt_override: float | None = None) -> tuple[ConservedField, list[StepStats]]:
    """Integrate to ``t_end``, landing on it exactly.

    ``callbacks`` are called with the field at the start time, at every
    multiple of ``sample_interval`` past it (steps are clamped to land on those
    instants) and at ``t_end``.
    """
    if t_end < f.time:
        raise ValueError(f"t_end={t_end} precedes the field time {f.time}")
    callbacks = list(callbacks)
    t0 = f.time
    for cb in callbacks:
        cb(f)
    stats: list[StepStats] = []
    if t_end == f.time:
        return f, stats
    next_sample = t0 + sample_interval if sample_interval else math.inf
    k_sample = 1
    # relative tolerance for snapping onto sample instants
    snap = 1e-12 * max(abs(t_end), 1e-300)
    while f.time < t_end:
        if len(stats) >= max_steps:
            raise MaxStepsExceeded(f"{max_steps} steps taken without reaching t={t_end} (t={f.time})")
        dt = dt_override if dt_override is not None else stable_dt(f, cfl, coeffs, gas)
        if not dt > 0 or not math.isfinite(dt):
            raise StateError(f"non-positive time step {dt} at t={f.time}")
        target = min(t_end, next_sample)
        landing = f.time + dt >= target - snap
        if landing:
            dt = target - f.time
        counter = OpCounter()
        tic = _time.perf_counter()
        f = ssp_rk3_step(f, dt, cfg, gas, coeffs, counter)
        if landing:
            f.time = target
        stats.append(StepStats(dt, counter.riemann_solves, counter.reconstruction_calls,
                               _time.perf_counter() - tic))
        if landing and target == next_sample:
            k_sample += 1
            next_sample = t0 + k_sample * sample_interval
            if next_sample > t_end - snap:
                next_sample = math.inf
            if f.time < t_end:
                for cb in callbacks:
                    cb(f)
    for cb in callbacks:
        cb(f)
    return f, stats
