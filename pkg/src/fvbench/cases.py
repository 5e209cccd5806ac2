"""Initial conditions for the benchmark problems: convected vortex, Shu-Osher and decaying HIT."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    INFLOW_OUTFLOW,
    PERIODIC,
    CartesianGrid,
    ConservedField,
    GasModel,
    TransportCoeffs,
    prim_to_cons,
)

# 3-point Gauss-Legendre rule on [-1/2, 1/2]
_GL3_NODES = np.array([-math.sqrt(0.6) / 2, 0.0, math.sqrt(0.6) / 2])
_GL3_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


def cell_averages(grid: CartesianGrid, conserved_at: Callable[..., np.ndarray], quadrature: bool) -> np.ndarray:
    """Interior cell values of ``conserved_at(*coords)``.

    With ``quadrature`` the value is a 3-point tensor Gauss average over each
    cell; otherwise the cell-centre value is used.
    """
    centres = grid.mesh()
    if not quadrature:
        return conserved_at(*centres)
    out = 0.0
    dx = grid.dx
    for idx in np.ndindex(*(3,) * grid.ndim):
        w = np.prod([_GL3_WEIGHTS[i] for i in idx])
        pts = [c + _GL3_NODES[i] * h for c, i, h in zip(centres, idx, dx)]
        out = out + w * conserved_at(*pts)
    return out


# ---------------------------------------------------------------------------
# convected vortex


@dataclass(frozen=True)
class VortexParams:
    L: float = 0.01
    gamma_v: float = 0.11
    R_v: float = 0.001
    u0: float = 100.0
    T_ref: float = 300.0
    p_ref: float = 101320.0
    t_end: float = 5e-3

    def __post_init__(self):
        for name in ("L", "gamma_v", "R_v", "T_ref", "p_ref"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")


def vortex_grid(n: int, p: VortexParams = VortexParams(), ghost_width: int = 4) -> CartesianGrid:
    return CartesianGrid((n, n), (0.0, 0.0), (p.L, p.L), ghost_width, (PERIODIC, PERIODIC))


def vortex_primitive(x, y, p: VortexParams, gas: GasModel) -> np.ndarray:
    """Point values ``(rho, u, v, p)`` of the vortex centred in the box."""
    xv = yv = 0.5 * p.L
    dx, dy = x - xv, y - yv
    r2 = dx * dx + dy * dy
    g = np.exp(-r2 / (2 * p.R_v**2))
    # psi = Gamma exp(-r^2 / 2R^2)
    dpsi_dx = -p.gamma_v * dx / p.R_v**2 * g
    dpsi_dy = -p.gamma_v * dy / p.R_v**2 * g
    c = math.sqrt(gas.gamma * gas.r_specific * p.T_ref)
    pr = p.p_ref * np.exp(-0.5 * gas.gamma * (p.gamma_v / (c * p.R_v)) ** 2 * g * g)
    rho = pr / (gas.r_specific * p.T_ref)
    return np.stack([rho, p.u0 + dpsi_dy, p.u0 - dpsi_dx, pr])


def init_vortex(grid: CartesianGrid, p: VortexParams = VortexParams(), gas: GasModel = GasModel(),
                quadrature: bool = False) -> ConservedField:
    if grid.ndim != 2 or any(b != PERIODIC for b in grid.boundary):
        raise ValueError("the vortex case needs a 2D periodic grid")
    if not np.allclose(grid.hi, np.add(grid.lo, p.L)):
        raise ValueError(f"vortex grid must be a square of side L={p.L}")
    u = cell_averages(grid, lambda x, y: prim_to_cons(vortex_primitive(x, y, p, gas), gas.gamma), quadrature)
    return ConservedField.from_interior(grid, u)


# ---------------------------------------------------------------------------
# Shu-Osher


@dataclass(frozen=True)
class ShuOsherParams:
    lo: float = 0.0
    hi: float = 10.0
    x_jump: float = 1.0
    left: tuple[float, float, float] = (3.857143, 2.629369, 10.3333)
    amplitude: float = 0.2
    wavenumber: float = 5.0
    t_end: float = 1.2

    def __post_init__(self):
        if not self.lo < self.x_jump < self.hi:
            raise ValueError("jump must lie inside the domain")
        rho, _, pr = self.left
        if rho <= 0 or pr <= 0 or abs(self.amplitude) >= 1:
            raise ValueError("inadmissible Shu-Osher states")


def shu_osher_grid(n: int, p: ShuOsherParams = ShuOsherParams(), ghost_width: int = 4) -> CartesianGrid:
    return CartesianGrid((n,), (p.lo,), (p.hi,), ghost_width, (INFLOW_OUTFLOW,))


def shu_osher_primitive(x, p: ShuOsherParams) -> np.ndarray:
    x = np.asarray(x, float)
    left = x < p.x_jump
    rho = np.where(left, p.left[0], 1.0 + p.amplitude * np.sin(p.wavenumber * x))
    u = np.where(left, p.left[1], 0.0)
    pr = np.where(left, p.left[2], 1.0)
    return np.stack([rho, u, pr])


def init_shu_osher(grid: CartesianGrid, p: ShuOsherParams = ShuOsherParams(),
                   gas: GasModel = GasModel()) -> ConservedField:
    if grid.ndim != 1:
        raise ValueError("the Shu-Osher case is one-dimensional")
    u = prim_to_cons(shu_osher_primitive(grid.centers(0), p), gas.gamma)
    inflow = prim_to_cons(np.array(p.left, float), gas.gamma)
    return ConservedField.from_interior(grid, u, inflow={0: inflow})


# ---------------------------------------------------------------------------
# decaying homogeneous isotropic turbulence


@dataclass(frozen=True)
class HitParams:
    M_t0: float = 0.6
    Re0: float = 100.0
    k0: int = 4
    T0: float = 1200.0
    p0: float = 101325.0
    cp: float = 1173.0
    prandtl: float = 0.71
    seed: int = 0
    # resolution of the shared initial field; coarser grids get its Fourier truncation
    master_n: int = 128

    def __post_init__(self):
        if self.k0 < 1 or int(self.k0) != self.k0:
            raise ValueError("k0 must be an integer >= 1")
        if not 0 < self.M_t0 < 1:
            raise ValueError("M_t0 must lie in (0, 1)")
        if self.Re0 <= 0 or self.T0 <= 0 or self.p0 <= 0:
            raise ValueError("Re0, T0 and p0 must be positive")

    def gas(self) -> GasModel:
        return GasModel.from_cp(self.cp, prandtl=self.prandtl)

    @property
    def psi0(self) -> float:
        return 2.0 / self.k0

    def sound_speed(self) -> float:
        g = self.gas()
        return math.sqrt(g.gamma * g.r_specific * self.T0)

    def u_rms(self) -> float:
        return self.M_t0 * self.sound_speed() / math.sqrt(3.0)

    def density(self) -> float:
        return self.p0 / (self.gas().r_specific * self.T0)

    def transport(self) -> TransportCoeffs:
        eta = self.density() * self.psi0 * self.u_rms() / self.Re0
        return TransportCoeffs(shear_viscosity=eta, bulk_viscosity=0.0,
                               conductivity=eta * self.cp / self.prandtl)

    def tau(self) -> float:
        return self.psi0 / self.u_rms()


def wavenumbers(n: int, real: bool = True) -> list[np.ndarray]:
    """Integer wavenumber grids for an rfftn of an ``n**3`` box of side 2 pi."""
    k = np.fft.fftfreq(n, 1.0 / n)
    kz = np.fft.rfftfreq(n, 1.0 / n) if real else k
    return np.meshgrid(k, k, kz, indexing="ij")


def _project(uh: np.ndarray, kv: list[np.ndarray]) -> np.ndarray:
    k2 = sum(k * k for k in kv)
    k2 = np.where(k2 == 0, 1.0, k2)
    kdotu = sum(k * u for k, u in zip(kv, uh))
    return np.stack([u - k * kdotu / k2 for u, k in zip(uh, kv)])


def _nyquist_mask(n: int, kv: list[np.ndarray]) -> np.ndarray:
    return (np.abs(kv[0]) == n // 2) | (np.abs(kv[1]) == n // 2) | (np.abs(kv[2]) == n // 2)


def solenoidal_spectrum_field(n: int, k0: int, seed: int) -> np.ndarray:
    """Random divergence-free field ``(3, n, n, n)`` on [0, 2 pi)^3.

    Expected shell spectrum is proportional to k^4 exp(-2 (k/k0)^2); the
    amplitude is arbitrary (callers rescale).  Mean and Nyquist modes are zero.
    """
    if n < 4 * k0:
        raise ValueError(f"need n >= 4*k0, got n={n}, k0={k0}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3, n, n, n))
    uh = np.fft.rfftn(noise, axes=(1, 2, 3))
    kv = wavenumbers(n)
    kmag = np.sqrt(sum(k * k for k in kv))
    # white noise has a flat modal variance; E(k) ~ 4 pi k^2 |u_k|^2
    uh *= kmag * np.exp(-((kmag / k0) ** 2))
    uh = _project(uh, kv)
    uh[:, _nyquist_mask(n, kv)] = 0.0
    uh[:, 0, 0, 0] = 0.0
    return np.fft.irfftn(uh, s=(n, n, n), axes=(1, 2, 3))


def truncate_field(u: np.ndarray, n: int) -> np.ndarray:
    """Fourier truncation of a periodic ``(ncomp, m, m, m)`` field to ``n**3`` points."""
    m = u.shape[-1]
    if n == m:
        return u.copy()
    if n > m or n % 2:
        raise ValueError(f"cannot truncate {m}^3 to {n}^3")
    uh = np.fft.rfftn(u, axes=(1, 2, 3))
    h = n // 2
    keep = np.r_[0:h, m - h:m]
    sub = uh[:, keep][:, :, keep][..., : h + 1]
    sub = sub * (n / m) ** 3
    kv = wavenumbers(n)
    sub[:, _nyquist_mask(n, kv)] = 0.0
    return np.fft.irfftn(sub, s=(n, n, n), axes=(1, 2, 3))


def hit_grid(n: int, ghost_width: int = 4) -> CartesianGrid:
    return CartesianGrid.uniform(n, 3, 0.0, 2 * math.pi, ghost_width=ghost_width)


def hit_velocity(n: int, p: HitParams = HitParams()) -> np.ndarray:
    """Initial velocity at ``n**3`` points, rescaled to the target u_rms."""
    if n // 2 <= p.k0:
        raise ValueError(f"grid n={n} cannot represent k0={p.k0}")
    master = solenoidal_spectrum_field(max(n, p.master_n), p.k0, p.seed)
    u = truncate_field(master, n)
    rms = math.sqrt(np.mean(np.sum(u * u, axis=0)) / 3.0)
    return u * (p.u_rms() / rms)


def init_hit(grid: CartesianGrid, p: HitParams = HitParams(),
             gas: GasModel | None = None) -> tuple[ConservedField, TransportCoeffs, float]:
    gas = gas or p.gas()
    n = grid.cells[0]
    if grid.ndim != 3 or len(set(grid.cells)) != 1 or any(b != PERIODIC for b in grid.boundary):
        raise ValueError("HIT needs a cubic 3D periodic grid")
    if not np.allclose(np.subtract(grid.hi, grid.lo), 2 * math.pi):
        raise ValueError("HIT domain must have side 2 pi")
    vel = hit_velocity(n, p)
    w = np.empty((5,) + vel.shape[1:])
    w[0] = p.density()
    w[1:4] = vel
    w[4] = p.p0
    return ConservedField.from_interior(grid, prim_to_cons(w, gas.gamma)), p.transport(), p.tau()
