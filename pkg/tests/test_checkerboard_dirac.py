from fractions import Fraction

import numpy as np
import pytest

from stochunify.errors import DomainError
from stochunify.numerics import Grid1D
from stochunify.poisson_dirac import (
    CheckerboardLattice,
    TelegraphState,
    WeylSpinor,
    checkerboard_propagate,
    checkerboard_vs_dirac,
    dirac_evolve,
    dirac_frequency,
    dirac_spectral_step,
    lattice_from_weyl,
    mixing_matrix,
    path_sum,
    telegraph_evolve,
    weyl_from_lattice,
    weyl_hamiltonian,
)
from stochunify.poisson_dirac.dirac import DiracSpectral, default_packet


def delta(n, i, value=1):
    out = np.array([0 * value] * n, dtype=object)
    out[i] = value
    return out


def test_zero_flip_is_pure_shift():
    lat = CheckerboardLattice(16, 5, 0.1)
    r, l = checkerboard_propagate(lat, delta(16, 3, 1.0).astype(float), np.zeros(16))
    assert r[8] == 1.0 and np.count_nonzero(r) == 1 and not l.any()
    assert lat.dx == pytest.approx(0.1)


def test_two_steps_symbolic():
    w = Fraction(1, 5)
    lat = CheckerboardLattice(8, 2, 1.0, flip_weight=w)
    r, l = checkerboard_propagate(lat, delta(8, 4, Fraction(1)), delta(8, 0, Fraction(0)))
    # RR ends at +2, RL and LR at 0, LL ends at 0 via right then left
    assert r[6] == (1 - w) ** 2
    assert l[4] == (1 - w) * w
    assert r[4] == w * w
    assert l[2] == 0
    pr, pl = path_sum(8, 2, w, 4, 0)
    assert list(pr) == list(r) and list(pl) == list(l)


@pytest.mark.parametrize("n_steps", [1, 5, 12])
def test_transfer_matrix_equals_path_sum(n_steps):
    w = Fraction(1, 3)
    n = 32
    lat = CheckerboardLattice(n, n_steps, 1.0, flip_weight=w)
    for comp in (0, 1):
        start = [delta(n, 10, Fraction(1)), delta(n, 0, Fraction(0))]
        if comp:
            start.reverse()
        r, l = checkerboard_propagate(lat, *start)
        pr, pl = path_sum(n, n_steps, w, 10, comp)
        assert list(pr) == list(r) and list(pl) == list(l)


def test_complex_weight_path_sum():
    w = 0.05j
    lat = CheckerboardLattice(16, 8, 1.0, flip_weight=w)
    r, l = checkerboard_propagate(lat, delta(16, 5, 1.0 + 0j).astype(complex), np.zeros(16, complex))
    pr, pl = path_sum(16, 8, w, 5, 0)
    assert np.allclose(r, pr.astype(complex), atol=1e-14)
    assert np.allclose(l, pl.astype(complex), atol=1e-14)


def test_mixing_matrix_properties():
    m = mixing_matrix(0.3)
    assert np.allclose(m.sum(axis=0), 1.0) and (m >= 0).all()
    u_first = mixing_matrix(0.2j)
    assert not np.allclose(u_first.conj().T @ u_first, np.eye(2))
    u_exact = mixing_matrix(0.2j, exact=True)
    assert np.allclose(u_exact.conj().T @ u_exact, np.eye(2), atol=1e-14)


def test_real_weight_matches_telegraph_pde():
    errs = []
    for n in (200, 400, 800):
        g = Grid1D(-2.0, 2.0, n, periodic=True)
        dt = g.dx
        steps = int(round(1.0 / dt))
        p0 = np.exp(-4 * g.x**2)
        p0 /= p0.sum() * g.dx
        lat = CheckerboardLattice.stochastic(n, steps, dt, 1.0)
        r, l = checkerboard_propagate(lat, p0, 0.5 * p0)
        ref = telegraph_evolve(TelegraphState(p0, 0.5 * p0, g, 1.0, 1.0), dt, steps)
        errs.append(np.abs(r - ref.p_plus).sum() * g.dx + np.abs(l - ref.p_minus).sum() * g.dx)
    assert errs[2] < errs[1] < errs[0]
    assert errs[0] / errs[2] == pytest.approx(4.0, rel=0.25)


def test_lattice_validation():
    with pytest.raises(DomainError):
        CheckerboardLattice(16, 0, 0.1)
    with pytest.raises(DomainError):
        CheckerboardLattice(16, 1, 0.1, mixing="magic")


def test_massless_weyl_advects_left():
    g = Grid1D(-16.0, 16.0, 256, periodic=True)
    env = np.exp(-g.x**2)
    s = WeylSpinor(env, np.zeros(256), g, mass=0.0)
    shift = 32
    out = dirac_evolve(s, shift * g.dx, 1)
    assert np.max(np.abs(out.psi_plus - np.roll(env, -shift))) < 1e-10
    assert np.max(np.abs(out.psi_minus)) < 1e-12


def test_spectral_norm_conserved():
    g = Grid1D(-16.0, 16.0, 256, periodic=True)
    s = default_packet(g)
    out = DiracSpectral(g, 1.0, 0.01).step(s, 10_000)
    assert out.norm2() == pytest.approx(1.0, abs=1e-10)


def test_single_mode_frequency():
    g = Grid1D(0.0, 2 * np.pi, 64, periodic=True)
    k, m = 3.0, 1.5
    H = weyl_hamiltonian(k, m)
    w, V = np.linalg.eigh(H)
    vec = V[:, 1]
    s = WeylSpinor(vec[0] * np.exp(1j * k * g.x), vec[1] * np.exp(1j * k * g.x), g, m)
    dt = 0.37
    out = dirac_spectral_step(s, dt)
    phase = np.angle(np.vdot(s.psi_plus, out.psi_plus) + np.vdot(s.psi_minus, out.psi_minus))
    omega = dirac_frequency(k, m)
    assert np.angle(np.exp(-1j * omega * dt)) == pytest.approx(phase, abs=1e-9)
    assert omega == pytest.approx(np.sqrt(m**2 + k**2))


def test_lattice_spinor_dictionary_roundtrip():
    g = Grid1D(-4.0, 4.0, 32, periodic=True)
    s = default_packet(g)
    s = WeylSpinor(s.psi_plus, s.psi_minus, g, 1.0, time=0.7)
    back = weyl_from_lattice(*lattice_from_weyl(s), g, 1.0, 0.7)
    assert np.allclose(back.psi_plus, s.psi_plus) and np.allclose(back.psi_minus, s.psi_minus)


def test_checkerboard_convergence_orders():
    first = checkerboard_vs_dirac(n_sites0=128, n_rungs=3)
    exact = checkerboard_vs_dirac(n_sites0=128, n_rungs=3, mixing="exact")
    assert first["fitted_order"] == pytest.approx(1.0, abs=0.2)
    assert exact["fitted_order"] == pytest.approx(2.0, abs=0.2)
    massless = checkerboard_vs_dirac(mass=0.0, n_sites0=64, n_rungs=2)
    assert max(massless["l2_errors"]) < 1e-10
