from dataclasses import replace

import numpy as np
import pytest

from stochunify.errors import ConfigError, DimensionError
from stochunify.numerics import Grid1D
from stochunify.poisson_dirac import (
    RSDiracState,
    beta_matrix,
    default_rs_packet,
    helicity_sigma,
    massless_limit_study,
    rs_dirac_step,
    rs_hamiltonian,
)

GRID = Grid1D(-16.0, 16.0, 256, periodic=True)


def test_matrix_algebra():
    b = beta_matrix()
    assert np.array_equal(b @ b, np.eye(6))
    H = rs_hamiltonian(np.linspace(-3, 3, 7), 0.7)
    assert np.allclose(H, np.conj(np.swapaxes(H, -1, -2)))
    S = helicity_sigma()[:, :3, :3]
    # spin-1 algebra on the positive-helicity block
    assert np.allclose(S[0] @ S[1] - S[1] @ S[0], 1j * S[2])
    assert np.allclose(sum(s @ s for s in S), 2 * np.eye(3))
    assert np.allclose(helicity_sigma()[:, 3:, 3:], -S)


def test_component_count_enforced():
    with pytest.raises(DimensionError):
        RSDiracState(np.zeros((5, GRID.n_points)), GRID)


def test_massless_helicity_eigenmode_advects():
    env = np.exp(-GRID.x**2)
    # S_z eigenvector with eigenvalue +1 inside F+
    vec = np.array([1.0, 1j, 0.0]) / np.sqrt(2.0)
    state = RSDiracState.from_helicity(GRID, np.outer(vec, env), np.zeros((3, GRID.n_points)))
    shift = 32
    out = rs_dirac_step(state, shift * GRID.dx)
    expected = np.outer(vec, np.roll(env, shift))
    assert np.max(np.abs(out.f_plus - expected)) < 1e-10
    assert np.max(np.abs(out.f_minus)) < 1e-14


def test_zero_helicity_mode_is_stationary():
    env = np.exp(-GRID.x**2)
    state = RSDiracState.from_helicity(GRID, np.outer([0, 0, 1.0], env), np.outer([0, 0, 1.0], env))
    out = rs_dirac_step(state, 3.0, n_steps=4)
    assert np.allclose(out.components, state.components, atol=1e-12)


def test_massless_blocks_never_mix():
    state = RSDiracState.from_helicity(GRID, default_rs_packet(GRID).f_plus, np.zeros((3, GRID.n_points)))
    out = rs_dirac_step(state, 0.1, n_steps=20)
    assert np.max(np.abs(out.f_minus)) < 1e-14


def test_norm_conserved_with_mass():
    state = default_rs_packet(GRID, mass=0.8)
    out = rs_dirac_step(state, 0.05, n_steps=200)
    assert out.norm2() == pytest.approx(1.0, abs=1e-10)


def test_massless_limit_ladder():
    template = default_rs_packet(GRID)
    masses = [0.1 / 2**i for i in range(4)]
    rep = massless_limit_study(template, masses, 1.0)
    assert all(r == pytest.approx(2.0, abs=0.3) for r in rep["successive_ratios"])
    assert rep["monotone"] and rep["smallest_mass_bound_holds"]
    assert rep["fitted_order_in_mass"] == pytest.approx(1.0, abs=0.05)


def test_massless_limit_rejects_bad_ladders():
    template = default_rs_packet(GRID)
    with pytest.raises(ConfigError):
        massless_limit_study(template, [0.1, 0.2, 0.05], 1.0)
    with pytest.raises(ConfigError):
        massless_limit_study(template, [0.1, 0.05, 0.0], 1.0)
    with pytest.raises(ConfigError):
        massless_limit_study(template, [0.1, 0.05, 0.01], 1.0)


def test_zero_mass_run_is_advection():
    template = replace(default_rs_packet(GRID), mass=0.0)
    out = rs_dirac_step(template, 1.0)
    sig_z = helicity_sigma()[2]
    # each helicity eigencomponent shifts by its eigenvalue times c t
    w, V = np.linalg.eigh(sig_z)
    proj = V.conj().T @ template.components
    expected = np.zeros_like(proj)
    for i, lam in enumerate(np.round(w).astype(int)):
        k = GRID.wavenumbers()
        expected[i] = np.fft.ifft(np.fft.fft(proj[i]) * np.exp(-1j * lam * k * 1.0))
    assert np.allclose(V @ expected, out.components, atol=1e-12)
