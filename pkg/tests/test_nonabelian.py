import logging

import numpy as np
import pytest

from stochunify.errors import DimensionError, DomainError
from stochunify.nonabelian import (
    LieField,
    gellmann_matrices,
    field_equation_residuals,
    lagrangian_density,
    lagrangian_trace_form,
    lie_valued_wave_equation,
    load_field,
    residual_report,
    rs_vector,
    save_field,
    scaled_field,
    structure_constants,
    total_norm2,
    weak_coupling_scaling,
    weak_field,
)
from stochunify.numerics import Grid1D
from stochunify.poisson_dirac import default_rs_packet, rs_dirac_step


def random_field(N, g, seed=0):
    alg = structure_constants(N)
    rng = np.random.default_rng(seed)
    return LieField(alg, rng.normal(size=(alg.dim, 3)), rng.normal(size=(alg.dim, 3)), g)


def test_su2_is_levi_civita():
    f = structure_constants(2).f
    eps = np.zeros((3, 3, 3))
    for (a, b, c), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[a, b, c] = s
    assert np.allclose(f, eps, atol=1e-15)


def test_su3_gellmann_values():
    f = structure_constants(3).f
    assert f[0, 1, 2] == pytest.approx(1.0)
    assert f[0, 3, 6] == pytest.approx(0.5)
    assert f[3, 4, 7] == pytest.approx(np.sqrt(3) / 2)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_algebra_identities(N):
    alg = structure_constants(N)
    assert alg.dim == N * N - 1
    assert alg.antisymmetry_residual() < 1e-12
    assert alg.jacobi_residual() < 1e-12
    assert alg.commutator_residual() < 1e-12
    T = alg.generators
    gram = np.einsum("aij,bji->ab", T, T)
    assert np.allclose(gram, 0.5 * np.eye(alg.dim))
    assert gellmann_matrices(N).shape == (alg.dim, N, N)


def test_rank_below_two_rejected():
    with pytest.raises(DomainError):
        structure_constants(1)


def test_rs_vector_zero_coupling():
    field = random_field(3, 0.0)
    rs = rs_vector(field)
    assert np.array_equal(rs.F_plus, field.E + 1j * field.B)
    assert np.array_equal(rs.F_minus, field.E - 1j * field.B)


def test_rs_vector_hand_example():
    field = LieField.zeros(2, g=1.0)
    E, B = field.E.copy(), field.B.copy()
    E[0] = [1, 0, 0]
    B[1] = [0, 1, 0]
    rs = rs_vector(LieField(field.algebra, E, B, 1.0))
    for sign, F in ((1, rs.F_plus), (-1, rs.F_minus)):
        assert np.allclose(F[0], [1, 0, 0])
        assert np.allclose(F[1], [0, sign * 1j, 0])
        assert np.allclose(F[2], [0, 0, 1])


def test_conjugation_and_swap_symmetry():
    rs = rs_vector(random_field(3, 0.4, seed=2))
    assert np.allclose(np.conj(rs.F_plus), rs.F_minus)
    assert lagrangian_density(rs, +1) == pytest.approx(lagrangian_density(rs, -1))


def test_bilinear_term_is_quadratic():
    field = random_field(2, 0.7, seed=3)
    for lam in (0.5, 2.0):
        scaled = rs_vector(scaled_field(field, lam))
        base = rs_vector(field)
        linear = lam * (field.E + 1j * field.B)
        assert np.allclose(scaled.F_plus - linear, lam**2 * (base.F_plus - (field.E + 1j * field.B)))


def test_unit_audit_warns(caplog):
    with caplog.at_level(logging.WARNING):
        rs_vector(random_field(2, 0.1), unit_audit=True)
    assert "natural units" in caplog.text


def test_lagrangian_examples():
    field = random_field(3, 0.0, seed=4)
    rs = rs_vector(field)
    assert lagrangian_density(rs) == pytest.approx(0.5 * (np.sum(field.E**2) + np.sum(field.B**2)))
    assert lagrangian_density(rs_vector(LieField.zeros(3))) == 0.0


@pytest.mark.parametrize("N", [2, 3])
def test_trace_form_is_half_index_form(N):
    rs = rs_vector(random_field(N, 0.3, seed=5))
    alg = structure_constants(N)
    for sign in (1, -1):
        ratio = lagrangian_trace_form(rs, alg, sign) / lagrangian_density(rs, sign)
        assert ratio == pytest.approx(0.5, abs=1e-12)


def test_vacuum_residuals_vanish():
    res = field_equation_residuals(LieField.zeros(3, g=0.5))
    assert res[1]["max"] == 0.0 and res[-1]["max"] == 0.0


def test_zero_coupling_residual_is_E():
    field = random_field(2, 0.0, seed=6)
    res = field_equation_residuals(field)
    for sign in (1, -1):
        assert np.allclose(res[sign]["dE"], field.E)


def test_weak_field_residual_scaling_is_cubic():
    # Re F = E + O(g^2), so the dL/dB expression cancels through O(g^2)
    # and the first surviving term is cubic in g.
    alg = structure_constants(2)
    E = np.random.default_rng(7).normal(size=(alg.dim, 3))
    for branch in (1, -1):
        rep = weak_coupling_scaling(alg, E, [1e-1, 1e-2, 1e-3, 1e-4], branch)
        assert rep["slope"] == pytest.approx(3.0, abs=0.05)


def test_weak_field_relation():
    alg = structure_constants(3)
    E = np.random.default_rng(8).normal(size=(alg.dim, 3))
    field = weak_field(alg, E, 0.01)
    for a in range(alg.dim):
        expected = 0.01 * sum(alg.f[a, b, c] * np.cross(E[b], E[c]) for b in range(8) for c in range(8))
        assert np.allclose(field.B[a], expected)


def test_residual_report_shape():
    rep = residual_report(random_field(2, 0.2))
    assert [r["branch"] for r in rep] == ["+", "-"]
    assert len(rep[0]["per_index_residuals"]["dE"]) == 3


def test_field_json_roundtrip(tmp_path):
    field = random_field(3, 0.25, seed=9)
    save_field(tmp_path / "f.json", field)
    back = load_field(tmp_path / "f.json")
    assert back.algebra.N == 3 and back.g == 0.25
    assert np.array_equal(back.E, field.E) and np.array_equal(back.B, field.B)


def test_field_shape_validation():
    alg = structure_constants(2)
    with pytest.raises(DimensionError):
        LieField(alg, np.zeros((2, 3)), np.zeros((3, 3)))


def test_wave_equation_decouples_indices():
    grid = Grid1D(-8.0, 8.0, 64, periodic=True)
    packet = default_rs_packet(grid, mass=0.3)
    zero = packet.__class__(np.zeros_like(packet.components), grid, mass=0.3)
    states = [zero, packet, zero]
    out = lie_valued_wave_equation(states, 0.05, 20)
    assert not out[0].components.any() and not out[2].components.any()
    assert total_norm2(out) == pytest.approx(total_norm2(states), abs=1e-10)
    ref = rs_dirac_step(packet, 0.05, 20)
    copies = lie_valued_wave_equation([packet] * 8, 0.05, 20)
    assert all(np.array_equal(c.components, ref.components) for c in copies)
