"""Gas model, state conversions, grids and field storage.

Conserved arrays carry the component axis first: ``(rho, rho*u_0, ..., rho*E)``
followed by the spatial axes.  Primitive arrays use the same layout with
``(rho, u_0, ..., p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

GAMMA = 1.4
CP = 1173.0
PRANDTL = 0.71

PERIODIC = "periodic"
INFLOW_OUTFLOW = "dirichlet-left+zero-gradient-right"
BOUNDARY_TAGS = (PERIODIC, INFLOW_OUTFLOW)


class StateError(ValueError):
    """Raised when a state leaves the admissible region (solver blow-up)."""


@dataclass(frozen=True)
class GasModel:
    gamma: float = GAMMA
    r_specific: float = CP * (GAMMA - 1.0) / GAMMA
    cp: float = CP
    cv: float = CP / GAMMA
    prandtl: float = PRANDTL

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.prandtl > 0.0:
            raise ValueError(f"prandtl must be positive, got {self.prandtl}")
        if abs(self.cp - self.gamma * self.cv) > 1e-12 * self.cp:
            raise ValueError("cp != gamma * cv")
        if abs(self.r_specific - (self.cp - self.cv)) > 1e-12 * self.cp:
            raise ValueError("r_specific != cp - cv")

    @classmethod
    def from_cp(cls, cp: float = CP, gamma: float = GAMMA, prandtl: float = PRANDTL) -> GasModel:
        cv = cp / gamma
        return cls(gamma=gamma, r_specific=cp - cv, cp=cp, cv=cv, prandtl=prandtl)


@dataclass(frozen=True)
class TransportCoeffs:
    shear_viscosity: float = 0.0
    bulk_viscosity: float = 0.0
    conductivity: float = 0.0

    def __post_init__(self):
        if self.shear_viscosity < 0 or self.conductivity < 0:
            raise ValueError("transport coefficients must be non-negative")

    @property
    def inviscid(self) -> bool:
        return self.shear_viscosity == 0.0 and self.conductivity == 0.0 and self.bulk_viscosity == 0.0


EULER = TransportCoeffs()


@dataclass
class PrimitiveState:
    """Primitive state; fields may be scalars or arrays of matching shape.

    ``velocity`` has the dimension index first.
    """

    density: np.ndarray
    velocity: np.ndarray
    pressure: np.ndarray
    temperature: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.density, float)[None],
                               np.atleast_1d(np.asarray(self.velocity, float)).reshape(-1, *np.shape(self.density)),
                               np.asarray(self.pressure, float)[None]])


@dataclass
class ConservedState:
    density: np.ndarray
    momentum: np.ndarray
    total_energy: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.density, float)[None],
                               np.atleast_1d(np.asarray(self.momentum, float)).reshape(-1, *np.shape(self.density)),
                               np.asarray(self.total_energy, float)[None]])

    @classmethod
    def from_array(cls, u: np.ndarray) -> ConservedState:
        return cls(u[0], u[1:-1], u[-1])


def _first_bad(mask: np.ndarray) -> tuple:
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if idx.size else ()


def cons_to_prim(u: np.ndarray, gamma: float, check: bool = True) -> np.ndarray:
    """Array form: conserved ``(nvar, ...)`` to primitive ``(rho, vel..., p)``."""
    rho = u[0]
    vel = u[1:-1] / rho
    e_int = u[-1] - 0.5 * np.sum(u[1:-1] * vel, axis=0)
    if check:
        bad = ~((rho > 0) & (e_int > 0))
        if np.any(bad):
            where = _first_bad(bad)
            raise StateError(
                f"inadmissible state at cell {where}: rho={np.asarray(rho)[where]!r}, "
                f"rho*e={np.asarray(e_int)[where]!r}, conserved={u[(slice(None),) + where]!r}"
            )
    w = np.empty_like(u)
    w[0] = rho
    w[1:-1] = vel
    w[-1] = (gamma - 1.0) * e_int
    return w


def prim_to_cons(w: np.ndarray, gamma: float, check: bool = True) -> np.ndarray:
    rho, p = w[0], w[-1]
    if check:
        bad = ~((rho > 0) & (p > 0))
        if np.any(bad):
            where = _first_bad(bad)
            raise StateError(f"inadmissible primitive state at cell {where}: {w[(slice(None),) + where]!r}")
    u = np.empty_like(w)
    u[0] = rho
    u[1:-1] = rho * w[1:-1]
    u[-1] = p / (gamma - 1.0) + 0.5 * rho * np.sum(w[1:-1] ** 2, axis=0)
    return u


def primitive_from_conserved(c: ConservedState, gas: GasModel) -> PrimitiveState:
    w = cons_to_prim(c.as_array(), gas.gamma)
    rho, p = w[0], w[-1]
    return PrimitiveState(rho, w[1:-1], p, p / (rho * gas.r_specific))


def conserved_from_primitive(p: PrimitiveState, gas: GasModel) -> ConservedState:
    return ConservedState.from_array(prim_to_cons(p.as_array(), gas.gamma))


def primitive(density, velocity, pressure, gas: GasModel) -> PrimitiveState:
    """Build a PrimitiveState with the temperature closed by the EOS."""
    density = np.asarray(density, float)
    pressure = np.asarray(pressure, float)
    return PrimitiveState(density, np.asarray(velocity, float), pressure,
                          pressure / (density * gas.r_specific))


def sound_speed(p: PrimitiveState, gas: GasModel):
    rho, pr = np.asarray(p.density), np.asarray(p.pressure)
    if np.any(rho <= 0) or np.any(pr <= 0):
        raise StateError("sound speed of an inadmissible state")
    return np.sqrt(gas.gamma * pr / rho)


@dataclass(frozen=True)
class CartesianGrid:
    cells: tuple[int, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    ghost_width: int = 4
    boundary: tuple[str, ...] = ()

    def __post_init__(self):
        ndim = len(self.cells)
        if not 1 <= ndim <= 3:
            raise ValueError(f"ndim must be 1..3, got {ndim}")
        if len(self.lo) != ndim or len(self.hi) != ndim:
            raise ValueError("lo/hi must match the number of dimensions")
        if any(n < 1 for n in self.cells):
            raise ValueError("cell counts must be positive")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("domain_hi must exceed domain_lo")
        if self.ghost_width < 1:
            raise ValueError("ghost_width must be >= 1")
        if not self.boundary:
            object.__setattr__(self, "boundary", (PERIODIC,) * ndim)
        if len(self.boundary) != ndim or any(b not in BOUNDARY_TAGS for b in self.boundary):
            raise ValueError(f"boundary tags must be one of {BOUNDARY_TAGS} per dimension")

    @classmethod
    def uniform(cls, n: int, ndim: int, lo: float, hi: float, **kw) -> CartesianGrid:
        return cls((n,) * ndim, (lo,) * ndim, (hi,) * ndim, **kw)

    @property
    def ndim(self) -> int:
        return len(self.cells)

    @property
    def nvar(self) -> int:
        return self.ndim + 2

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((h - l) / n for l, h, n in zip(self.lo, self.hi, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(n + 2 * self.ghost_width for n in self.cells)

    @property
    def interior(self) -> tuple[slice, ...]:
        g = self.ghost_width
        return tuple(slice(g, g + n) for n in self.cells)

    def centers(self, axis: int, ghosts: bool = False) -> np.ndarray:
        g = self.ghost_width if ghosts else 0
        n = self.cells[axis]
        dx = self.dx[axis]
        return self.lo[axis] + (np.arange(-g, n + g) + 0.5) * dx

    def mesh(self, ghosts: bool = False) -> list[np.ndarray]:
        return np.meshgrid(*[self.centers(d, ghosts) for d in range(self.ndim)], indexing="ij")


@dataclass
class ConservedField:
    grid: CartesianGrid
    data: np.ndarray
    time: float = 0.0
    # conserved state held by Dirichlet ghosts, keyed by axis
    inflow: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = (self.grid.nvar,) + self.grid.padded_shape
        if self.data.shape != expected:
            raise ValueError(f"data shape {self.data.shape} != {expected}")

    @classmethod
    def zeros(cls, grid: CartesianGrid, time: float = 0.0) -> ConservedField:
        return cls(grid, np.zeros((grid.nvar,) + grid.padded_shape), time)

    @classmethod
    def from_interior(cls, grid: CartesianGrid, u: np.ndarray, time: float = 0.0,
                      inflow: dict | None = None) -> ConservedField:
        f = cls.zeros(grid, time)
        f.data[(slice(None),) + grid.interior] = u
        if inflow:
            f.inflow = dict(inflow)
        return f

    @property
    def interior(self) -> np.ndarray:
        return self.data[(slice(None),) + self.grid.interior]

    def copy(self) -> ConservedField:
        return ConservedField(self.grid, self.data.copy(), self.time, dict(self.inflow))

    def primitive(self, gas: GasModel) -> np.ndarray:
        """Interior primitive array; raises StateError on inadmissible cells."""
        return cons_to_prim(self.interior, gas.gamma)

    def totals(self) -> np.ndarray:
        """Volume integral of every conserved component over the interior."""
        return self.interior.reshape(self.grid.nvar, -1).sum(axis=1) * self.grid.cell_volume

    def check(self, gas: GasModel | None = None) -> None:
        cons_to_prim(self.interior, (gas or GasModel()).gamma)


def relative_drift(before: Sequence[float], after: Sequence[float], scale: Sequence[float]) -> np.ndarray:
    """|after - before| normalised by a per-component magnitude (never zero)."""
    before, after, scale = (np.asarray(a, float) for a in (before, after, scale))
    return np.abs(after - before) / np.maximum(np.abs(scale), np.finfo(float).tiny)
