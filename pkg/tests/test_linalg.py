import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import charpoly_eigenvalues
from specgap.errors import ParameterError, SolverError
from specgap.linalg import (GeneralPencil, HermitianPencil, general_gen_eig, herm_gen_eig,
                            herm_gen_eigvals, lexsort_complex, smallest_singular_value,
                            subspace_gap)

seeds = st.integers(0, 2**32 - 1)


def rand_herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def rand_hpd(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T + n * np.eye(n)


def test_herm_diag():
    w, _ = herm_gen_eig(np.diag([1.0, 2.0]))
    assert w == pytest.approx([1, 2])


def test_herm_scaling_cancels():
    w, _ = herm_gen_eig(np.diag([2.0, 1.0]), np.diag([2.0, 1.0]))
    assert w == pytest.approx([1, 1])


def test_herm_charpoly_oracle():
    rng = np.random.default_rng(11)
    s = rand_herm(rng, 6)
    w, _ = herm_gen_eig(s)
    ref = np.sort(charpoly_eigenvalues(s).real)
    assert np.max(np.abs(w - ref)) < 1e-8


@given(seeds, st.integers(1, 7))
def test_herm_residual_and_normalisation(seed, n):
    rng = np.random.default_rng(seed)
    s, m = rand_herm(rng, n), rand_hpd(rng, n)
    w, v = herm_gen_eig(s, m)
    assert np.all(np.diff(w) >= 0)
    ns, nm = np.linalg.norm(s, 2), np.linalg.norm(m, 2)
    for mu, x in zip(w, v.T):
        res = np.linalg.norm(s @ x - mu * m @ x)
        assert res <= 1e-10 * (ns + abs(mu) * nm) * np.linalg.norm(x)
        assert np.vdot(x, m @ x).real == pytest.approx(1.0, abs=1e-10)


@given(seeds)
def test_herm_congruence_invariance(seed):
    rng = np.random.default_rng(seed)
    s, m = rand_herm(rng, 5), rand_hpd(rng, 5)
    c = np.eye(5) + 0.3 * (rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))) / 5
    w1 = herm_gen_eigvals(s, m)
    w2 = herm_gen_eigvals(c.conj().T @ s @ c, c.conj().T @ m @ c)
    assert np.max(np.abs(w1 - w2)) <= 1e-10 * max(1.0, np.abs(w1).max())


def test_herm_rejects_indefinite_mass():
    with pytest.raises(SolverError):
        herm_gen_eig(np.eye(2), np.diag([1.0, -1.0]))


def test_pencil_rejects_nonhermitian():
    with pytest.raises(ParameterError):
        HermitianPencil(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(ParameterError):
        GeneralPencil(np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ParameterError):
        GeneralPencil(np.eye(2), np.eye(3))


def test_general_diag():
    w = general_gen_eig(np.diag([1 + 1j, 2]))
    assert w == pytest.approx([1 + 1j, 2])


def test_general_jordan_block():
    w = general_gen_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert w.size == 2
    assert w == pytest.approx([1, 1], abs=1e-7)


def test_general_explicit_inverse_oracle():
    rng = np.random.default_rng(3)
    t = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    m = rand_hpd(rng, 5)
    w = general_gen_eig(t, m)
    ref = charpoly_eigenvalues(np.linalg.inv(m) @ t)
    ref = ref[lexsort_complex(ref)]
    assert np.max(np.abs(w - ref)) < 1e-8


@given(seeds, st.integers(1, 6))
def test_general_residual_and_order(seed, n):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = rand_hpd(rng, n)
    w, x = general_gen_eig(t, m, vectors=True)
    assert list(lexsort_complex(w)) == list(range(n))
    nt, nm = np.linalg.norm(t, 2), np.linalg.norm(m, 2)
    for mu, v in zip(w, x.T):
        res = np.linalg.norm(t @ v - mu * m @ v)
        assert res <= 1e-10 * (nt + abs(mu) * nm) * np.linalg.norm(v)


@given(seeds)
def test_general_matches_hermitian(seed):
    rng = np.random.default_rng(seed)
    s, m = rand_herm(rng, 6), rand_hpd(rng, 6)
    w = general_gen_eig(s, m)
    assert np.max(np.abs(w.imag)) < 1e-8
    assert np.max(np.abs(np.sort(w.real) - herm_gen_eigvals(s, m))) < 1e-8


@pytest.mark.parametrize("a, expected", [(np.eye(3), 1.0), (np.diag([2.0, 0.5]), 0.5)])
def test_smallest_singular_value(a, expected):
    assert smallest_singular_value(a) == pytest.approx(expected, rel=1e-12)


def test_smallest_singular_value_gram_oracle():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    ref = math.sqrt(np.linalg.eigvalsh(a.conj().T @ a)[0])
    assert smallest_singular_value(a) == pytest.approx(ref, rel=1e-10)


@given(seeds)
def test_smallest_singular_value_inverse_norm(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert smallest_singular_value(a) * np.linalg.norm(np.linalg.inv(a), 2) == pytest.approx(1, abs=1e-8)


def test_subspace_gap_same_span():
    u = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]])
    assert subspace_gap(u, u @ np.array([[2.0, 1.0], [0.0, 3.0]]))[1] < 1e-14


def test_subspace_gap_orthogonal_lines():
    assert subspace_gap(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx((1.0, 1.0))


def test_subspace_gap_diagonal_line():
    d, _ = subspace_gap(np.array([1.0, 0.0]), np.array([1.0, 1.0]) / math.sqrt(2))
    assert d == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


def test_subspace_gap_weighted():
    # in the weight diag(1, 3), e1 and e2 are still orthogonal; e1 vs e1 + e2 has cos^2 = 1/4
    w = np.diag([1.0, 3.0])
    d, _ = subspace_gap(np.array([1.0, 0.0]), np.array([1.0, 1.0]), w)
    assert d == pytest.approx(math.sqrt(3) / 2, abs=1e-14)


def test_subspace_gap_rank_deficient():
    with pytest.raises(ParameterError):
        subspace_gap(np.array([[1.0, 2.0], [1.0, 2.0]]), np.eye(2))


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_subspace_gap_symmetric_and_bounded(seed, k, j):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((6, k)) + 1j * rng.standard_normal((6, k))
    v = rng.standard_normal((6, j)) + 1j * rng.standard_normal((6, j))
    w = rand_hpd(rng, 6)
    d_uv, g1 = subspace_gap(u, v, w)
    _, g2 = subspace_gap(v, u, w)
    assert 0 <= d_uv <= g1 <= 1
    assert g1 == pytest.approx(g2, abs=1e-12)
