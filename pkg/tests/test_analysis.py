
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvbench.analysis import (
    ConvergenceReport,
    TurbulenceSeries,
    coarsen_average,
    conservation_drift,
    enstrophy,
    fit_order,
    kinetic_energy,
    l1_error,
    shell_spectrum,
    vorticity_spectral,
)
from fvbench.cases import hit_grid
from fvbench.core import CartesianGrid, ConservedField, GasModel, prim_to_cons

GAS = GasModel()


def _mesh(n):
    x = 2 * np.pi * np.arange(n) / n
    return np.meshgrid(x, x, x, indexing="ij")


def _field_from_velocity(u):
    n = u.shape[-1]
    w = np.concatenate([np.ones((1,) + u.shape[1:]), u, np.ones((1,) + u.shape[1:])])
    return ConservedField.from_interior(hit_grid(n), prim_to_cons(w, GAS.gamma))


def test_l1_examples():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(16, 16))
    assert l1_error(a, a) == 0
    assert abs(l1_error(a, a + 0.3) - 0.3) < 1e-15
    b = a.copy()
    b[3, 4] += 2.0
    assert abs(l1_error(a, b) - 2.0 / 256) < 1e-15
    with pytest.raises(ValueError):
        l1_error(a, a[:8])


def test_l1_field_grid_mismatch():
    g1 = CartesianGrid((8,), (0.0,), (1.0,), 4, ("periodic",))
    g2 = CartesianGrid((16,), (0.0,), (1.0,), 4, ("periodic",))
    f1 = ConservedField.from_interior(g1, prim_to_cons(np.ones((3, 8)), 1.4))
    f2 = ConservedField.from_interior(g2, prim_to_cons(np.ones((3, 16)), 1.4))
    with pytest.raises(ValueError):
        l1_error(f1, f2)


def test_coarsen_examples():
    np.testing.assert_array_equal(coarsen_average(np.array([1.0, 3, 5, 7]), 2), [2.0, 6.0])
    np.testing.assert_array_equal(coarsen_average(np.full((8, 8), 2.5), 4), np.full((2, 2), 2.5))
    rng = np.random.default_rng(1)
    fine = rng.normal(size=(3, 16, 16))
    coarse = coarsen_average(fine, 4, ndim=2)
    assert coarse.shape == (3, 4, 4)
    np.testing.assert_allclose(coarse.sum(axis=(1, 2)) * 16, fine.sum(axis=(1, 2)), rtol=0, atol=1e-13)
    assert l1_error(coarsen_average(fine, 1, ndim=2), fine) == 0
    with pytest.raises(ValueError):
        coarsen_average(np.ones(6), 4)


def test_fit_order_examples():
    assert abs(fit_order([(64, 1e-2), (128, 2.5e-3), (256, 6.25e-4)])[0] - 2.0) < 1e-12
    slope, resid = fit_order([(64, 0.3), (128, 0.15)])
    assert abs(slope - 1.0) < 1e-12 and resid < 1e-12
    with pytest.raises(ValueError):
        fit_order([(64, 0.0), (128, 1.0)])
    with pytest.raises(ValueError):
        fit_order([(64, 1.0)])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-8, 1e2), min_size=2, max_size=6), st.floats(1e-6, 1e6))
def test_fit_order_scale_invariant(errors, scale):
    samples = [(16 * 2**k, e) for k, e in enumerate(errors)]
    a = fit_order(samples)
    b = fit_order([(n, e * scale) for n, e in samples])
    assert abs(a[0] - b[0]) < 1e-9 and abs(a[1] - b[1]) < 1e-9


def test_convergence_report_invariants():
    r = ConvergenceReport([(32, 1.0), (64, 0.25), (128, 0.0625)])
    assert abs(r.fitted_order - 2) < 1e-12
    np.testing.assert_allclose(r.pairwise_orders(), [2.0, 2.0])
    with pytest.raises(ValueError):
        ConvergenceReport([(32, 1.0)])
    with pytest.raises(ValueError):
        ConvergenceReport([(64, 1.0), (32, 0.5)])


def test_kinetic_energy_examples():
    assert kinetic_energy(np.zeros((3, 4, 4, 4))) == 0
    u = np.zeros((3, 4, 4, 4))
    u[0], u[1] = 0.6, 0.8
    assert abs(kinetic_energy(u) - 0.5) < 1e-15
    assert abs(kinetic_energy(_field_from_velocity(u)) - 0.5) < 1e-15


def test_vorticity_single_mode():
    n = 16
    x, y, z = _mesh(n)
    u = np.stack([np.zeros_like(x), np.sin(x), np.zeros_like(x)])
    w = vorticity_spectral(u)
    np.testing.assert_allclose(w[0], 0, atol=1e-12)
    np.testing.assert_allclose(w[1], 0, atol=1e-12)
    np.testing.assert_allclose(w[2], np.cos(x), atol=1e-12)
    assert abs(enstrophy(_field_from_velocity(u)) - 0.5) < 1e-12
    assert np.abs(vorticity_spectral(np.ones((3, n, n, n)))).max() < 1e-14
    assert enstrophy(np.full((3, n, n, n), 2.0)) < 1e-28


def test_vorticity_band_limited_and_divergence_free():
    n = 16
    x, y, z = _mesh(n)
    u = np.stack([np.sin(2 * y) * np.cos(3 * z), np.cos(x + z), np.sin(x) * np.sin(5 * y)])
    w = vorticity_spectral(u)
    exact = np.stack([
        5 * np.sin(x) * np.cos(5 * y) + np.sin(x + z),
        -3 * np.sin(2 * y) * np.sin(3 * z) - np.cos(x) * np.sin(5 * y),
        -np.sin(x + z) - 2 * np.cos(2 * y) * np.cos(3 * z),
    ])
    np.testing.assert_allclose(w, exact, atol=1e-12)
    wh = np.fft.fftn(w, axes=(1, 2, 3))
    k = np.fft.fftfreq(n, 1.0 / n)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    assert np.abs(kx * wh[0] + ky * wh[1] + kz * wh[2]).max() / n**3 < 1e-12


def test_spectrum_single_mode_shell():
    n = 16
    x, y, z = _mesh(n)
    q = np.cos(3 * x + 4 * y)
    s = shell_spectrum(q)
    assert len(s.shells) == n // 2 + 1
    assert abs(s.values[5] - 0.25) < 1e-14
    assert s.values.sum() - s.values[5] < 1e-28


@pytest.mark.parametrize("seed", range(3))
def test_parseval(seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(3, 12, 12, 12))
    s = shell_spectrum(q, all_shells=True)
    assert abs(s.values.sum() / (0.5 * np.mean(np.sum(q * q, axis=0))) - 1) < 1e-10
    assert np.all(s.values >= 0)


def test_enstrophy_parseval_against_vorticity_spectrum():
    rng = np.random.default_rng(5)
    n = 16
    uh = np.zeros((3, n, n, n // 2 + 1), complex)
    uh[:, :5, :5, :5] = rng.normal(size=(3, 5, 5, 5)) + 1j * rng.normal(size=(3, 5, 5, 5))
    u = np.fft.irfftn(uh, s=(n, n, n), axes=(1, 2, 3))
    w = vorticity_spectral(u)
    assert abs(2 * shell_spectrum(w, all_shells=True).values.sum() / enstrophy(u) - 1) < 1e-10


def test_series_times_increase():
    s = TurbulenceSeries()
    s.append(0.0, 1.0, 2.0)
    s.append(0.1, 0.9, 2.1)
    with pytest.raises(ValueError):
        s.append(0.1, 0.8, 2.2)


def test_conservation_drift_normalisation():
    grid = CartesianGrid((8,), (0.0,), (1.0,), 4, ("periodic",))
    w = np.stack([np.ones(8), np.array([1.0, -1] * 4), np.ones(8)])
    f = ConservedField.from_interior(grid, prim_to_cons(w, GAS.gamma))
    g = f.copy()
    g.interior[0, 0] += 1e-3
    g.interior[1, 0] += 1e-3
    d = conservation_drift(f, g)
    # mass: total 1, change 1e-3/8; momentum: total 0, scale is its L1 content 1
    assert abs(d[0] - 1.25e-4) < 1e-15
    assert abs(d[1] - 1.25e-4) < 1e-15
    assert d[2] == 0
