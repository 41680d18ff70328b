"""Dense solver contracts: generalized eigenproblems, sigma_min, subspace gaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ParameterError, SolverError

HERMITIAN_RTOL = 1e-12


def _hermitian_defect(a):
    scale = max(np.linalg.norm(a, 1), 1.0)
    return np.linalg.norm(a - a.conj().T, 1) / scale


def _cholesky(m):
    try:
        return sla.cholesky(m, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError("mass matrix is not positive definite", dim=m.shape[0]) from exc


@dataclass(frozen=True)
class HermitianPencil:
    s: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        check_square(self.s, self.m)
        for name, a in (("s", self.s), ("m", self.m)):
            if _hermitian_defect(a) > HERMITIAN_RTOL:
                raise ParameterError(f"{name} is not Hermitian")

    @property
    def dim(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True)
class GeneralPencil:
    t: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        check_square(self.t, self.m)
        if _hermitian_defect(self.m) > HERMITIAN_RTOL:
            raise ParameterError("m is not Hermitian")

    @property
    def dim(self) -> int:
        return self.t.shape[0]


def check_square(*mats):
    n = mats[0].shape[0]
    for a in mats:
        if a.ndim != 2 or a.shape != (n, n):
            raise ParameterError(f"expected {n}x{n} matrices, got {a.shape}")


def lexsort_complex(w):
    """Indices ordering complex values by (Re, Im)."""
    w = np.asarray(w)
    return np.lexsort((w.imag, w.real))


def herm_gen_eig(s, m=None):
    """Ascending eigenvalues and M-orthonormal eigenvectors of S v = mu M v."""
    s = np.asarray(s)
    m = np.eye(s.shape[0]) if m is None else np.asarray(m)
    pencil = HermitianPencil(s, m)
    _cholesky(pencil.m)
    try:
        w, v = sla.eigh(pencil.s, pencil.m)
    except np.linalg.LinAlgError as exc:
        raise SolverError("Hermitian eigensolve failed", dim=pencil.dim) from exc
    return w, v


def herm_gen_eigvals(s, m=None):
    s = np.asarray(s)
    m = np.eye(s.shape[0]) if m is None else np.asarray(m)
    check_square(s, m)
    try:
        return sla.eigh(s, m, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError("Hermitian eigensolve failed", dim=s.shape[0]) from exc


def general_gen_eig(t, m=None, vectors=False):
    """Eigenvalues (and right eigenvectors) of T v = mu M v for HPD M.

    M is factored as L L^H and the standard problem L^-1 T L^-H is solved;
    eigenvalues come back in (Re, Im) lexicographic order with algebraic
    multiplicity.
    """
    t = np.asarray(t)
    m = np.eye(t.shape[0]) if m is None else np.asarray(m)
    pencil = GeneralPencil(t, m)
    low = _cholesky(pencil.m)
    c = sla.solve_triangular(low, pencil.t, lower=True)
    c = sla.solve_triangular(low, c.conj().T, lower=True).conj().T
    try:
        if vectors:
            w, y = np.linalg.eig(c)
        else:
            w = np.linalg.eigvals(c)
    except np.linalg.LinAlgError as exc:
        raise SolverError("eigensolve did not converge", dim=pencil.dim,
                          cond=np.linalg.cond(pencil.m)) from exc
    order = lexsort_complex(w)
    w = w[order]
    if not vectors:
        return w
    x = sla.solve_triangular(low.conj().T, y[:, order], lower=False)
    return w, x


def smallest_singular_value(a) -> float:
    """sigma_min(a); the reciprocal of the resolvent norm when a = T - z."""
    a = np.asarray(a)
    check_square(a)
    return float(sla.svdvals(a)[-1])


def _w_orthonormal(u, chol_upper, rank_tol=1e-10):
    x = chol_upper @ u
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= rank_tol * max(diag.max(), 1e-300):
        raise ParameterError("basis is rank deficient")
    return q


def subspace_gap(u, v, w=None):
    """(delta(span u, span v), gap) in the inner product <x, y>_w = y^H w x.

    delta is the largest distance from a unit vector of span u to span v; the
    gap is the symmetric maximum of both directed distances.
    """
    u = np.atleast_2d(np.asarray(u).T).T
    v = np.atleast_2d(np.asarray(v).T).T
    n = u.shape[0]
    if v.shape[0] != n:
        raise ParameterError("bases live in different dimensions")
    w = np.eye(n) if w is None else np.asarray(w)
    upper = _cholesky(w).conj().T
    qu = _w_orthonormal(u, upper)
    qv = _w_orthonormal(v, upper)

    def directed(qa, qb):
        resid = qa - qb @ (qb.conj().T @ qa)
        return min(float(sla.svdvals(resid)[0]), 1.0)

    d_uv = directed(qu, qv)
    return d_uv, max(d_uv, directed(qv, qu))
