import numpy as np
import pytest

from stochunify.errors import DimensionError, DomainError
from stochunify.nelson import (
    DriftSpec,
    Ensemble,
    backward_step,
    empirical_density,
    fokker_planck_residual,
    forward_step,
    l1_distance,
    quantum_classical_transition,
    run_stationary,
    write_trajectories,
)
from stochunify.io import read_csv
from stochunify.numerics import ComplexField, Grid1D, RngStream
from stochunify.schrodinger import harmonic_ground_state

GRID = Grid1D.centered(8.0, 512)


def constant_drift(grid, v=0.0, u=0.0, sigma=1.0):
    n = grid.n_points
    return DriftSpec(np.full(n, v), np.full(n, u), grid, sigma)


def test_pure_diffusion_variance():
    ens = Ensemble.at_point(0.0, 100_000, RngStream(11))
    drift = constant_drift(GRID)
    ens = run_stationary(ens, drift, 0.01, 100)
    assert ens.time == pytest.approx(1.0)
    assert np.var(ens.positions) == pytest.approx(1.0, rel=0.03)


def test_backward_statistically_matches_forward_without_drift():
    drift = constant_drift(GRID)
    fwd = run_stationary(Ensemble.at_point(0.0, 50_000, RngStream(3)), drift, 0.01, 50)
    bwd = run_stationary(Ensemble.at_point(0.0, 50_000, RngStream(3)), drift, 0.01, 50, direction="backward")
    assert np.var(bwd.positions) == pytest.approx(np.var(fwd.positions), rel=0.05)
    # independent noise lanes
    assert not np.array_equal(fwd.positions, bwd.positions)


def test_rigid_translation():
    ens = Ensemble(np.linspace(-1, 1, 11), RngStream(0))
    out = forward_step(ens, constant_drift(GRID, v=0.7, sigma=0.0), 0.1)
    assert np.allclose(out.positions, ens.positions + 0.07, atol=1e-15)


def test_backward_translation_by_minus_u():
    ens = Ensemble(np.linspace(-1, 1, 11), RngStream(0))
    out = backward_step(ens, constant_drift(GRID, u=0.5, sigma=0.0), 0.1)
    # X(t - dt) = X(t) - (v - u) dt
    assert np.allclose(out.positions, ens.positions + 0.05, atol=1e-15)
    assert out.time == pytest.approx(-0.1)


def test_drift_averaging_property():
    rng = np.random.default_rng(0)
    v, u = rng.normal(size=GRID.n_points), rng.normal(size=GRID.n_points)
    d = DriftSpec(v, u, GRID, 1.0)
    assert np.allclose(0.5 * (d.forward_drift + d.backward_drift), v, rtol=0, atol=1e-15)
    assert np.allclose(0.5 * (d.forward_drift - d.backward_drift), u, rtol=0, atol=1e-15)


def test_reflection_and_wrapping_count_events():
    g = Grid1D(0.0, 1.0, 64)
    ens = Ensemble(np.array([0.95]), RngStream(0))
    out = forward_step(ens, DriftSpec(np.full(64, 1.0), np.zeros(64), g, 0.0), 0.1)
    assert out.boundary_events == 1
    assert g.x_min <= out.positions[0] <= g.x_max
    gp = Grid1D(0.0, 1.0, 64, periodic=True)
    out = forward_step(ens, DriftSpec(np.full(64, 1.0), np.zeros(64), gp, 0.0), 0.1)
    assert out.positions[0] == pytest.approx(0.05)


def test_ensemble_rejects_nonfinite():
    with pytest.raises(DomainError):
        Ensemble(np.array([0.0, np.nan]), RngStream(0))
    with pytest.raises(DomainError):
        forward_step(Ensemble.at_point(0.0, 3, RngStream(0)), constant_drift(GRID), 0.0)


def test_kde_single_atom():
    h = 0.3
    rho = empirical_density(Ensemble.at_point(0.0, 10, RngStream(0)), GRID, h)
    expected = np.exp(-0.5 * (GRID.x / h) ** 2) / np.sqrt(2 * np.pi * h**2)
    assert np.sum(rho) * GRID.dx == pytest.approx(1.0, abs=1e-9)
    assert np.max(np.abs(rho - expected)) < 1e-3


def test_kde_uniform_interior():
    g = Grid1D(-0.5, 1.5, 400)
    pos = np.random.default_rng(1).random(1_000_000)
    rho = empirical_density(pos, g, 0.02)
    interior = (g.x > 0.15) & (g.x < 0.85)
    assert np.all(np.abs(rho[interior] - 1.0) < 0.02)
    assert np.sum(rho) * g.dx == pytest.approx(1.0, abs=1e-9)


def test_kde_errors():
    with pytest.raises(DomainError):
        empirical_density(np.array([]), GRID, 0.1)
    with pytest.raises(DomainError):
        empirical_density(np.zeros(3), GRID, 0.0)


def heat_kernel(x, t):
    return np.exp(-x**2 / (2 * t)) / np.sqrt(2 * np.pi * t)


def test_fokker_planck_heat_kernel_and_negative_control():
    drift = constant_drift(GRID, sigma=1.0)
    dt = 1e-4
    r0, r1 = heat_kernel(GRID.x, 1.0), heat_kernel(GRID.x, 1.0 + dt)
    fwd = fokker_planck_residual(r0, r1, drift, dt, GRID.dx)
    bwd = fokker_planck_residual(r0, r1, drift, dt, GRID.dx, direction="backward")
    assert fwd < 1e-3
    assert bwd > 0.3
    with pytest.raises(DimensionError):
        fokker_planck_residual(r0[:-1], r1[:-1], drift, dt)
    with pytest.raises(DomainError):
        fokker_planck_residual(r0, r1, drift, dt, direction="sideways")


def test_stationary_harmonic_forward_and_backward():
    psi = harmonic_ground_state(GRID)
    drift = DriftSpec.from_wavefunction(psi)
    rho0 = psi.density
    for direction in ("forward", "backward"):
        ens = Ensemble.from_density(GRID, rho0, 50_000, RngStream(5))
        d0 = l1_distance(empirical_density(ens, GRID, 0.05), rho0, GRID.dx)
        ens = run_stationary(ens, drift, 1e-3, 500, direction=direction)
        d1 = l1_distance(empirical_density(ens, GRID, 0.05), rho0, GRID.dx)
        assert d1 < 3 * (d0 + 1 / np.sqrt(ens.n_particles))


def test_imbalance():
    plane = ComplexField(Grid1D(0.0, 2 * np.pi, 128, periodic=True),
                         np.exp(2j * Grid1D(0.0, 2 * np.pi, 128, periodic=True).x))
    assert quantum_classical_transition(DriftSpec.from_wavefunction(plane)) == pytest.approx(0.0, abs=1e-12)
    drift = DriftSpec.from_wavefunction(harmonic_ground_state(GRID))
    rho0 = np.exp(-GRID.x**2)
    oracle = np.sum(np.abs(GRID.x) * rho0) / np.sum(rho0)
    assert quantum_classical_transition(drift) == pytest.approx(oracle, rel=1e-6)
    assert quantum_classical_transition(drift) == pytest.approx(1 / np.sqrt(np.pi), rel=1e-3)
    # normalization is enforced
    assert quantum_classical_transition(drift, 7.0 * drift.rho) == pytest.approx(oracle, rel=1e-6)


def test_sigma_squared_is_hbar_over_m():
    drift = DriftSpec.from_wavefunction(harmonic_ground_state(GRID, hbar=2.0, mass=0.5), hbar=2.0, mass=0.5)
    assert drift.sigma**2 == pytest.approx(4.0)
    assert drift.diffusion == pytest.approx(2.0)


def test_determinism():
    psi = harmonic_ground_state(GRID)
    drift = DriftSpec.from_wavefunction(psi)
    a = run_stationary(Ensemble.from_density(GRID, psi.density, 5000, RngStream(9)), drift, 1e-3, 20)
    b = run_stationary(Ensemble.from_density(GRID, psi.density, 5000, RngStream(9)), drift, 1e-3, 20)
    assert np.array_equal(a.positions, b.positions)


def test_trajectory_export(tmp_path):
    path = write_trajectories(tmp_path / "traj.csv", [0.0, 0.1], np.arange(6.0).reshape(2, 3), thin=2)
    header, rows = read_csv(path)
    assert list(header) == ["particle_id", "t", "x"]
    assert len(rows) == 4
