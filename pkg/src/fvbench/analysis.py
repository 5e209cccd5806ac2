"""Error norms, convergence fitting and turbulence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cases import wavenumbers
from .core import ConservedField


def _values(a) -> np.ndarray:
    return a.interior if isinstance(a, ConservedField) else np.asarray(a, float)


def l1_error(a, b) -> float:
    """Mean absolute difference over interior cells (fields or plain arrays).

    For multi-component fields the mean runs over cells per component and the
    components are summed.
    """
    if isinstance(a, ConservedField) and isinstance(b, ConservedField) and a.grid.cells != b.grid.cells:
        raise ValueError(f"grid mismatch: {a.grid.cells} vs {b.grid.cells}")
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise ValueError(f"shape mismatch: {va.shape} vs {vb.shape}")
    return float(np.mean(np.abs(va - vb)))


def coarsen_average(fine: np.ndarray, factor: int, ndim: int | None = None) -> np.ndarray:
    """Conservative restriction: mean over ``factor**ndim`` children.

    The trailing ``ndim`` axes are spatial (all of them when ``ndim`` is None).
    """
    fine = np.asarray(fine, float)
    ndim = fine.ndim if ndim is None else ndim
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    lead = fine.shape[: fine.ndim - ndim]
    spatial = fine.shape[fine.ndim - ndim:]
    if any(n % factor for n in spatial):
        raise ValueError(f"shape {spatial} not divisible by {factor}")
    shape = list(lead)
    for n in spatial:
        shape += [n // factor, factor]
    out = fine.reshape(shape)
    axes = tuple(len(lead) + 2 * k + 1 for k in range(ndim))
    return out.mean(axis=axes)


@dataclass
class ConvergenceReport:
    samples: list[tuple[int, float]]
    fitted_order: float = float("nan")
    fit_residual: float = float("nan")
    label: str = ""

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError("need at least two samples")
        ns = [n for n, _ in self.samples]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("resolutions must be strictly increasing")
        if np.isnan(self.fitted_order):
            self.fitted_order, self.fit_residual = fit_order(self.samples)

    def pairwise_orders(self) -> list[float]:
        return [float(np.log(e0 / e1) / np.log(n1 / n0))
                for (n0, e0), (n1, e1) in zip(self.samples, self.samples[1:])]


def fit_order(samples: Sequence[tuple[int, float]]) -> tuple[float, float]:
    """Least-squares slope of log(error) against log(1/N), with the rms log residual."""
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    n = np.array([s[0] for s in samples], float)
    e = np.array([s[1] for s in samples], float)
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError(f"errors must be positive and finite, got {e}")
    x, y = np.log(1.0 / n), np.log(e)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


# ---------------------------------------------------------------------------
# turbulence


def velocity(f: ConservedField) -> np.ndarray:
    u = f.interior
    return u[1:-1] / u[0]


def kinetic_energy(f: ConservedField | np.ndarray) -> float:
    """Volume average of u.u/2 (velocity based)."""
    u = velocity(f) if isinstance(f, ConservedField) else np.asarray(f)
    return float(0.5 * np.mean(np.sum(u * u, axis=0)))


def _check_cube(shape: tuple[int, ...]) -> int:
    if len(shape) != 3 or len(set(shape)) != 1:
        raise ValueError(f"spectral operators need a cubic 3D field, got {shape}")
    return shape[0]


def vorticity_spectral(f: ConservedField | np.ndarray, length: float = 2 * np.pi) -> np.ndarray:
    """Curl of the velocity by spectral differentiation on a periodic cube."""
    u = velocity(f) if isinstance(f, ConservedField) else np.asarray(f, float)
    if isinstance(f, ConservedField):
        length = f.grid.hi[0] - f.grid.lo[0]
    n = _check_cube(u.shape[1:])
    uh = np.fft.rfftn(u, axes=(1, 2, 3))
    kv = wavenumbers(n)
    kx, ky, kz = (k * (2 * np.pi / length) for k in kv)
    w = np.stack([1j * (ky * uh[2] - kz * uh[1]),
                  1j * (kz * uh[0] - kx * uh[2]),
                  1j * (kx * uh[1] - ky * uh[0])])
    if n % 2 == 0:
        # Nyquist modes have no consistent real derivative
        h = n // 2
        w[:, (np.abs(kv[0]) == h) | (np.abs(kv[1]) == h) | (kv[2] == h)] = 0.0
    return np.fft.irfftn(w, s=(n, n, n), axes=(1, 2, 3))


def enstrophy(f: ConservedField | np.ndarray) -> float:
    """Volume average of w.w."""
    w = vorticity_spectral(f)
    return float(np.mean(np.sum(w * w, axis=0)))


@dataclass
class SpectrumBins:
    shells: np.ndarray
    values: np.ndarray


def shell_spectrum(q: np.ndarray, all_shells: bool = False) -> SpectrumBins:
    """Shell-summed (1/2)|q_k|^2 over integer shells ``k-1/2 <= |k| < k+1/2``.

    ``q`` is ``(n, n, n)`` or ``(ncomp, n, n, n)``; normalisation is such that
    the sum over all modes equals the volume average of q.q/2.  Shells run
    from 0 to n/2; corner modes beyond that are dropped unless ``all_shells``
    is set, in which case shells extend to cover every mode (exact Parseval).
    """
    q = np.asarray(q, float)
    if q.ndim == 3:
        q = q[None]
    n = _check_cube(q.shape[1:])
    qh = np.fft.fftn(q, axes=(1, 2, 3)) / n**3
    energy = 0.5 * np.sum(np.abs(qh) ** 2, axis=0)
    kv = wavenumbers(n, real=False)
    kmag = np.sqrt(sum(k * k for k in kv))
    shell = np.floor(kmag + 0.5).astype(int).ravel()
    nshell = int(shell.max()) + 1 if all_shells else n // 2 + 1
    keep = shell < nshell
    values = np.bincount(shell[keep], weights=energy.ravel()[keep], minlength=nshell)
    return SpectrumBins(np.arange(nshell), values)


@dataclass
class TurbulenceSeries:
    times: list[float] = field(default_factory=list)
    kinetic_energy: list[float] = field(default_factory=list)
    enstrophy: list[float] = field(default_factory=list)
    mass_drift: list[float] = field(default_factory=list)

    def append(self, t_over_tau: float, ke: float, ens: float, drift: float = 0.0) -> None:
        if self.times and t_over_tau <= self.times[-1]:
            raise ValueError("times must increase")
        self.times.append(t_over_tau)
        self.kinetic_energy.append(ke)
        self.enstrophy.append(ens)
        self.mass_drift.append(drift)


def conservation_scale(f: ConservedField) -> np.ndarray:
    """Per-component magnitude used to normalise conservation drift.

    The total itself when it is not small against the L1 content of the
    component, otherwise the L1 content (zero-mean momentum in HIT).
    """
    u = f.interior.reshape(f.grid.nvar, -1)
    vol = f.grid.cell_volume
    total = np.abs(u.sum(axis=1)) * vol
    l1 = np.abs(u).sum(axis=1) * vol
    return np.where(total > 1e-3 * l1, total, l1)


def conservation_drift(initial: ConservedField, final: ConservedField) -> np.ndarray:
    """Relative change of every conserved total between two fields."""
    scale = np.maximum(conservation_scale(initial), np.finfo(float).tiny)
    return np.abs(final.totals() - initial.totals()) / scale
