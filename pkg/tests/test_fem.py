import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import block_eig_mp, hat_mass_1d, hat_stiffness_1d
from specgap.errors import ParameterError
from specgap.fem import (PROBLEMS, Mesh1D, ProductSpace, ScalarSpace, alfven_sq,
                         assemble_block_operator, assemble_mhd, assemble_scalar_matrices,
                         assemble_schrodinger, block_space, exact_block_eigs, get_problem,
                         sound_sq)
from specgap.linalg import herm_gen_eig, herm_gen_eigvals

LAM1_PLUS = 10.969906246987077
LAM1_MINUS = 0.8996981541022814
TABLE1_GALERKIN = {2: 1.861045647858232, 4: 0.458746253205135,
                   8: 0.113442149493080, 16: 0.028273751580725}


def test_mass_closed_form():
    space = ScalarSpace(Mesh1D(0, 1, 2))
    m = assemble_scalar_matrices(space)
    h = 0.5
    assert np.allclose(np.diag(m), [h / 3, 2 * h / 3, h / 3], atol=1e-15)
    assert np.allclose(np.diag(m, 1), [h / 6, h / 6], atol=1e-15)


def test_stiffness_closed_form():
    space = ScalarSpace(Mesh1D(0, 1, 2))
    k = assemble_scalar_matrices(space, 1.0, "stiffness")
    assert np.allclose(np.diag(k), [2, 4, 2], atol=1e-14)
    assert np.allclose(np.diag(k, 1), [-2, -2], atol=1e-14)


def test_first_derivative_pattern():
    space = ScalarSpace(Mesh1D(0, 1, 6))
    d = assemble_scalar_matrices(space, 1.0, "first-derivative")
    assert np.allclose(d.sum(axis=1)[1:-1], 0, atol=1e-14)
    assert np.allclose(np.diag(d, 1), 0.5) and np.allclose(np.diag(d, -1), -0.5)
    # antisymmetric except for the boundary diagonal entries
    skew = d + d.T
    skew[0, 0] += 1.0
    skew[-1, -1] -= 1.0
    assert np.allclose(skew, 0, atol=1e-14)


@given(st.integers(1, 12), st.floats(0.1, 3))
def test_gauss_matches_closed_form_for_constants(n, c):
    space = ScalarSpace(Mesh1D(-1, 2, n), True, False)
    for kind in ("mass", "stiffness", "first-derivative"):
        closed = assemble_scalar_matrices(space, c, kind)
        gauss = assemble_scalar_matrices(space, lambda x: c + 0 * x, kind)
        assert np.allclose(closed, gauss, atol=1e-12)


@given(st.integers(1, 10))
def test_hat_matrices_against_oracle(n):
    space = ScalarSpace(Mesh1D(0, 2, n))
    h = 2 / n
    assert np.allclose(assemble_scalar_matrices(space), hat_mass_1d(n, h), atol=1e-14)
    assert np.allclose(assemble_scalar_matrices(space, 1.0, "stiffness"), hat_stiffness_1d(n, h), atol=1e-12)


def test_linear_coefficient_exact():
    """3-point Gauss integrates x * phi_i * phi_j exactly."""
    space = ScalarSpace(Mesh1D(0, 1, 1))
    m = assemble_scalar_matrices(space, lambda x: x)
    assert np.allclose(m, [[1 / 12, 1 / 12], [1 / 12, 1 / 4]], atol=1e-15)


@given(st.integers(1, 16), st.integers(1, 3), st.booleans(), st.booleans())
def test_mesh_nesting(n, levels, lo, hi):
    coarse = ScalarSpace(Mesh1D(0, 1, n), lo, hi)
    fine = coarse.refined(levels)
    if coarse.dim == 0:
        return
    r = coarse.prolongation(fine)
    xf = fine.mesh.nodes[fine.dofs]
    xc = coarse.mesh.nodes
    for j, node in enumerate(coarse.dofs):
        hat = np.interp(xf, xc, np.eye(n + 1)[node])
        assert np.max(np.abs(r[:, j] - hat)) <= 1e-14


def test_nesting_rejects_mismatch():
    coarse = ScalarSpace(Mesh1D(0, 1, 3))
    with pytest.raises(ParameterError):
        coarse.prolongation(ScalarSpace(Mesh1D(0, 1, 4)))
    with pytest.raises(ParameterError):
        coarse.prolongation(ScalarSpace(Mesh1D(0, 1, 6), True, False))


def test_product_space_layout():
    space = block_space(4)
    assert space.dims == [3, 5] and space.dim == 8
    assert space.block(1) == slice(3, 8)
    with pytest.raises(ParameterError):
        ProductSpace(())


# block operator ----------------------------------------------------------------

def test_exact_block_eigs_oracle():
    lo, hi = block_eig_mp(1)
    minus, plus = exact_block_eigs(1)
    assert plus == pytest.approx(float(hi), rel=1e-15)
    assert minus == pytest.approx(float(lo), rel=1e-14)
    assert plus == pytest.approx(LAM1_PLUS, abs=1e-14)
    assert minus == pytest.approx(LAM1_MINUS, abs=1e-14) and minus < 1


def test_exact_block_eigs_accumulate_at_one():
    minus = [exact_block_eigs(k)[0] for k in range(1, 51)]
    assert all(b > a for a, b in zip(minus, minus[1:]))
    assert all(m < 1 for m in minus) and 1 - minus[-1] < 1e-3
    for k in (2, 7, 30):
        lo, hi = block_eig_mp(k)
        assert exact_block_eigs(k) == pytest.approx((float(lo), float(hi)), rel=1e-13)


def test_exact_block_eigs_rejects():
    with pytest.raises(ParameterError):
        exact_block_eigs(0)


def test_block_rejects_single_element():
    with pytest.raises(ParameterError):
        assemble_block_operator(1)
    with pytest.raises(ParameterError):
        assemble_block_operator(0.3)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_block_galerkin_reference_distances(n):
    p = assemble_block_operator(1 / n)
    w = herm_gen_eigvals(p.s, p.m)
    assert np.min(np.abs(w - LAM1_PLUS)) == pytest.approx(TABLE1_GALERKIN[n], abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 8, 32])
def test_block_constant_pressure_is_exact(n):
    p = assemble_block_operator(1 / n)
    v = np.zeros(p.space.dim)
    v[p.space.block(1)] = 1.0
    assert np.max(np.abs(p.s @ v - 2.0 * p.m @ v)) <= 1e-12


def test_block_galerkin_monotone():
    d = []
    for n in (2, 4, 8, 16, 32, 64):
        p = assemble_block_operator(1 / n)
        d.append(np.min(np.abs(herm_gen_eigvals(p.s, p.m) - LAM1_PLUS)))
    assert all(b < a for a, b in zip(d, d[1:]))


def test_block_pollution_in_one_two():
    p = assemble_block_operator(1 / 64)
    w = herm_gen_eigvals(p.s, p.m)
    assert np.sum((w > 1.05) & (w < 1.95)) >= 5


# MHD ---------------------------------------------------------------------------

def test_mhd_speeds_sum_to_one():
    x = np.linspace(0, 1, 101)
    assert np.allclose(alfven_sq(x) + sound_sq(x), 1.0, atol=1e-15)


def test_mhd_hermitian_and_bands():
    p = assemble_mhd(1 / 256)
    assert np.linalg.norm(p.s - p.s.conj().T, 1) <= 1e-10 * np.linalg.norm(p.s, 1)
    w = herm_gen_eigvals(p.s, p.m)
    band1 = (w >= 7 / 64 - 1e-2) & (w <= 1 / 4 + 1e-2)
    band2 = (w >= 3 / 8 - 1e-2) & (w <= 7 / 8 + 1e-2)
    assert band1.sum() >= 100 and band2.sum() >= 100
    assert w[band1].min() == pytest.approx(7 / 64, abs=2e-3)
    assert w[band2].max() == pytest.approx(7 / 8, abs=1e-2)


# Schroedinger -------------------------------------------------------------------

def test_free_particle_lowest_eigenvalue():
    errs = []
    for n in (16, 32, 64):
        p = assemble_schrodinger((0.0, math.pi), lambda x: 0 * x, n)
        w = herm_gen_eigvals(p.s, p.m)
        errs.append(w[0] - 1.0)
    assert all(e > 0 for e in errs)
    assert errs[-1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_registry_and_pencils():
    assert set(PROBLEMS) >= {"block", "mhd", "schrodinger-line", "schrodinger-halfline"}
    for name in PROBLEMS:
        prob = get_problem(name)
        h = prob.length / 8 if name.startswith("schrodinger") else 1 / 8
        pen = prob.assemble(prob.space(h))
        assert np.linalg.norm(pen.s - pen.s.conj().T, 1) <= 1e-10 * np.linalg.norm(pen.s, 1)
        np.linalg.cholesky(pen.m)
    with pytest.raises(ParameterError):
        get_problem("nope")


def test_schrodinger_truncation_override():
    prob = get_problem("schrodinger-line", x_max=20.0)
    assert prob.domain == (-20.0, 20.0)
    assert prob.elements(prob.default_h) == 256
