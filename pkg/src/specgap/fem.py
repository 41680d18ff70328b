"""Piecewise-linear finite elements on uniform 1D meshes and the model problems.

Every problem is posed as a Hermitian pencil (S, M): S is the matrix of the
sesquilinear form a(phi_j, phi_i) and M the L2 Gram matrix of the basis, with
rows indexing test functions and columns trial functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import AssemblyError, ParameterError

# 3-point Gauss-Legendre on [0, 1]
_GAUSS_X = 0.5 + 0.5 * np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class Mesh1D:
    x_lo: float
    x_hi: float
    elements: int

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise ParameterError("need x_lo < x_hi")
        if self.elements < 1:
            raise ParameterError("need at least one element")

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / self.elements

    @property
    def nodes(self) -> np.ndarray:
        return self.x_lo + self.h * np.arange(self.elements + 1)

    def refined(self, levels: int) -> "Mesh1D":
        return Mesh1D(self.x_lo, self.x_hi, self.elements * 2**levels)


@dataclass(frozen=True)
class ScalarSpace:
    mesh: Mesh1D
    dirichlet_lo: bool = False
    dirichlet_hi: bool = False

    @property
    def dofs(self) -> np.ndarray:
        """Indices of retained mesh nodes."""
        lo = 1 if self.dirichlet_lo else 0
        hi = self.mesh.elements if self.dirichlet_hi else self.mesh.elements + 1
        return np.arange(lo, hi)

    @property
    def dim(self) -> int:
        return self.dofs.size

    def refined(self, levels: int) -> "ScalarSpace":
        return ScalarSpace(self.mesh.refined(levels), self.dirichlet_lo, self.dirichlet_hi)

    def prolongation(self, fine: "ScalarSpace") -> np.ndarray:
        """Coefficients of the coarse hat functions in the fine basis."""
        ratio, rem = divmod(fine.mesh.elements, self.mesh.elements)
        if rem or (fine.mesh.x_lo, fine.mesh.x_hi) != (self.mesh.x_lo, self.mesh.x_hi):
            raise ParameterError("meshes are not nested")
        if (fine.dirichlet_lo, fine.dirichlet_hi) != (self.dirichlet_lo, self.dirichlet_hi):
            raise ParameterError("boundary conditions differ")
        xf = np.arange(fine.mesh.elements + 1) / ratio  # fine nodes in coarse units
        full = np.maximum(0.0, 1.0 - np.abs(xf[:, None] - np.arange(self.mesh.elements + 1)[None, :]))
        return full[np.ix_(fine.dofs, self.dofs)]


@dataclass(frozen=True)
class ProductSpace:
    components: tuple

    def __post_init__(self):
        if not 1 <= len(self.components) <= 3:
            raise ParameterError("product spaces have 1 to 3 components")

    @property
    def dims(self):
        return [c.dim for c in self.components]

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.dims)])

    def refined(self, levels: int) -> "ProductSpace":
        return ProductSpace(tuple(c.refined(levels) for c in self.components))

    def prolongation(self, fine: "ProductSpace") -> np.ndarray:
        return sla.block_diag(*[c.prolongation(f) for c, f in zip(self.components, fine.components)])

    def block(self, i: int) -> slice:
        off = self.offsets
        return slice(off[i], off[i + 1])


def _element_values(mesh: Mesh1D, coeff):
    """Coefficient at the Gauss points of every element, shape (n, 3)."""
    x0 = mesh.nodes[:-1]
    xq = x0[:, None] + mesh.h * _GAUSS_X[None, :]
    vals = np.asarray(coeff(xq), dtype=complex) if callable(coeff) else None
    if vals is not None and vals.shape != xq.shape:
        vals = np.broadcast_to(vals, xq.shape)
    return vals


def assemble_scalar_matrices(space: ScalarSpace, coeff=1.0, kind: str = "mass",
                             trial: ScalarSpace | None = None) -> np.ndarray:
    """Matrix of int c * (test basis) * (trial basis) over the mesh.

    kind = "mass":             int c phi_j phi_i
           "stiffness":        int c phi_j' phi_i'
           "first-derivative": int c phi_j' phi_i
    Rows follow the test space `space`, columns the trial space (default the
    same).  Constant coefficients use exact element matrices, callables use
    3-point Gauss quadrature per element.
    """
    trial = space if trial is None else trial
    mesh = space.mesh
    if trial.mesh != mesh:
        raise ParameterError("test and trial spaces must share a mesh")
    n, h = mesh.elements, mesh.h
    # local[e, a, b]: test node a, trial node b of element e
    if callable(coeff):
        c = _element_values(mesh, coeff)
        phi = np.stack([1.0 - _GAUSS_X, _GAUSS_X])          # (2, 3)
        dphi = np.array([-1.0, 1.0]) / h                     # (2,)
        wq = _GAUSS_W * h
        if kind == "mass":
            local = np.einsum("eq,aq,bq,q->eab", c, phi, phi, wq)
        elif kind == "stiffness":
            local = np.einsum("eq,a,b,q->eab", c, dphi, dphi, wq)
        elif kind == "first-derivative":
            local = np.einsum("eq,aq,b,q->eab", c, phi, dphi, wq)
        else:
            raise ParameterError(f"unknown kind {kind!r}")
    else:
        c = complex(coeff)
        if kind == "mass":
            ref = np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0
        elif kind == "stiffness":
            ref = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
        elif kind == "first-derivative":
            ref = np.array([[-0.5, 0.5], [-0.5, 0.5]])
        else:
            raise ParameterError(f"unknown kind {kind!r}")
        local = np.broadcast_to(c * ref, (n, 2, 2))
    full = np.zeros((n + 1, n + 1), dtype=complex)
    e = np.arange(n)
    for a in range(2):
        for b in range(2):
            np.add.at(full, (e + a, e + b), local[:, a, b])
    out = full[np.ix_(space.dofs, trial.dofs)]
    if np.all(out.imag == 0):
        out = out.real.copy()
    return out


@dataclass(frozen=True)
class Pencil:
    """Assembled Hermitian pencil on a product space."""

    s: np.ndarray
    m: np.ndarray
    space: ProductSpace


def check_pencil(s, m, rtol=1e-10):
    scale = max(np.linalg.norm(s, 1), 1.0)
    if np.linalg.norm(s - s.conj().T, 1) > rtol * scale:
        raise AssemblyError("assembled form matrix is not Hermitian")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise AssemblyError("mass matrix is not positive definite") from exc


def mass_matrix(space: ProductSpace) -> np.ndarray:
    return sla.block_diag(*[assemble_scalar_matrices(c) for c in space.components])


def _elements_from_h(h, length=1.0) -> int:
    n = Fraction(length).limit_denominator(10**9) / Fraction(h).limit_denominator(10**9)
    if n.denominator != 1:
        raise ParameterError(f"mesh size {h} does not divide the interval length {length}")
    return int(n)


# ---------------------------------------------------------------------------
# block operator  [[-d2/dx2, -d/dx], [d/dx, 2]]  on (0, 1)

def block_space(n: int) -> ProductSpace:
    mesh = Mesh1D(0.0, 1.0, n)
    return ProductSpace((ScalarSpace(mesh, True, True), ScalarSpace(mesh)))


def assemble_block_space(space: ProductSpace) -> Pencil:
    """a(u, v) = int u1' v1' + int u2 v1' + int u1' v2 + 2 int u2 v2."""
    d0, d1 = space.components
    s11 = assemble_scalar_matrices(d0, 1.0, "stiffness")
    s21 = assemble_scalar_matrices(d1, 1.0, "first-derivative", trial=d0)
    s22 = 2.0 * assemble_scalar_matrices(d1)
    s = np.block([[s11, s21.T], [s21, s22]])
    m = mass_matrix(space)
    check_pencil(s, m)
    return Pencil(s, m, space)


def assemble_block_operator(h) -> Pencil:
    n = _elements_from_h(h)
    if n < 2:
        raise ParameterError("block operator needs at least two elements")
    return assemble_block_space(block_space(n))


def exact_block_eigs(k: int):
    """(lambda_k^-, lambda_k^+) of the block operator."""
    if k < 1:
        raise ParameterError("k must be a positive integer")
    q = (k * math.pi) ** 2
    root = math.sqrt((q + 2.0) ** 2 - 4.0 * q)
    plus = (2.0 + q + root) / 2.0
    # the pair has product q, which avoids cancellation in the minus root
    return q / plus, plus


# ---------------------------------------------------------------------------
# MHD slab operator on (0, 1), rho0 = k_perp = k_par = g = 1

MHD_K_PERP = 1.0
MHD_K_PAR = 1.0
MHD_G = 1.0


def alfven_sq(x):
    return 7.0 / 8.0 - np.asarray(x) / 2.0


def sound_sq(x):
    return 1.0 / 8.0 + np.asarray(x) / 2.0


def mhd_space(n: int) -> ProductSpace:
    mesh = Mesh1D(0.0, 1.0, n)
    return ProductSpace((ScalarSpace(mesh, True, True), ScalarSpace(mesh), ScalarSpace(mesh)))


def assemble_mhd_space(space: ProductSpace) -> Pencil:
    """Weak form of the 3x3 MHD operator matrix.

    The (1,2) entry -i k_perp (d/dx c - g) with c = va^2 + vs^2 acts as
    u2 -> -i k_perp ((c u2)' - g u2); integrating by parts against the
    Dirichlet component v1 gives i k_perp (int c u2 v1' + g int u2 v1), the
    adjoint of the (2,1) entry -i k_perp (c u1' + g u1).  The (1,3) and (3,1)
    entries are handled the same way with c replaced by vs^2.
    """
    kp, kl, g = MHD_K_PERP, MHD_K_PAR, MHD_G
    k2 = kp**2 + kl**2
    d0, d1, d2 = space.components

    def c_total(x):
        return alfven_sq(x) + sound_sq(x)

    s11 = (assemble_scalar_matrices(d0, c_total, "stiffness")
           + assemble_scalar_matrices(d0, lambda x: k2 * alfven_sq(x)))
    # rows: free components, columns: Dirichlet component
    s21 = -1j * kp * (assemble_scalar_matrices(d1, c_total, "first-derivative", trial=d0)
                      + g * assemble_scalar_matrices(d1, 1.0, trial=d0))
    s31 = -1j * kl * (assemble_scalar_matrices(d2, sound_sq, "first-derivative", trial=d0)
                      + g * assemble_scalar_matrices(d2, 1.0, trial=d0))
    s22 = assemble_scalar_matrices(d1, lambda x: k2 * alfven_sq(x) + kp**2 * sound_sq(x))
    s23 = assemble_scalar_matrices(d1, lambda x: kp * kl * sound_sq(x), trial=d2)
    s33 = assemble_scalar_matrices(d2, lambda x: kl**2 * sound_sq(x))
    s = np.block([
        [s11, s21.conj().T, s31.conj().T],
        [s21, s22, s23],
        [s31, s23.conj().T, s33],
    ])
    m = mass_matrix(space)
    check_pencil(s, m)
    return Pencil(s, m, space)


def assemble_mhd(h) -> Pencil:
    return assemble_mhd_space(mhd_space(_elements_from_h(h)))


# ---------------------------------------------------------------------------
# Schroedinger operators -u'' + V u with Dirichlet truncation

def schrodinger_space(domain, n: int) -> ProductSpace:
    mesh = Mesh1D(float(domain[0]), float(domain[1]), n)
    return ProductSpace((ScalarSpace(mesh, True, True),))


def assemble_schrodinger_space(space: ProductSpace, potential: Callable) -> Pencil:
    (comp,) = space.components
    s = assemble_scalar_matrices(comp, 1.0, "stiffness") + assemble_scalar_matrices(comp, potential)
    m = mass_matrix(space)
    check_pencil(s, m)
    return Pencil(s, m, space)


def assemble_schrodinger(domain, potential: Callable, n: int) -> Pencil:
    return assemble_schrodinger_space(schrodinger_space(domain, n), potential)


def periodic_line_potential(x):
    return np.cos(x) - np.exp(-np.asarray(x) ** 2)


def periodic_halfline_potential(x):
    return np.sin(x) - 40.0 / (1.0 + np.asarray(x) ** 2)


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class ProblemSpec:
    """A model problem: how to build trial spaces and assemble on them.

    `gap` is the default interval (a, b) handed to the perturbation run and
    `gap_eigenvalues` the known eigenvalues inside it (possibly approximate).
    """

    name: str
    domain: tuple
    space_builder: Callable
    assembler: Callable
    gap: tuple
    gap_eigenvalues: tuple = ()
    essential: tuple = ()
    reference_eigenvalues: tuple = ()
    notes: str = ""
    default_h: float = 1 / 16
    default_refinement: int = 4
    extra: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def elements(self, h) -> int:
        return _elements_from_h(h, self.length)

    def space(self, h) -> ProductSpace:
        return self.space_builder(self.elements(h))

    def assemble(self, space: ProductSpace) -> Pencil:
        return self.assembler(space)


def _block_problem():
    lam1_plus = exact_block_eigs(1)[1]
    return ProblemSpec(
        name="block",
        domain=(0.0, 1.0),
        space_builder=block_space,
        assembler=assemble_block_space,
        gap=(1.0, lam1_plus),
        gap_eigenvalues=(2.0,),
        essential=((1.0, 1.0),),
        reference_eigenvalues=(2.0, lam1_plus),
        default_h=1 / 16,
        default_refinement=6,
    )


def _mhd_problem():
    return ProblemSpec(
        name="mhd",
        domain=(0.0, 1.0),
        space_builder=mhd_space,
        assembler=assemble_mhd_space,
        gap=(0.25, 0.375),
        gap_eigenvalues=(0.279,),
        essential=((7 / 64, 0.25), (0.375, 0.875)),
        reference_eigenvalues=(0.279,),
        notes="gap eigenvalue is approximate (three digits)",
        default_h=1 / 64,
        default_refinement=4,
    )


def _schrodinger_problem(name, domain, potential, gap, gap_eigs, refs, default_h):
    return ProblemSpec(
        name=name,
        domain=domain,
        space_builder=lambda n: schrodinger_space(domain, n),
        assembler=lambda space: assemble_schrodinger_space(space, potential),
        gap=gap,
        gap_eigenvalues=gap_eigs,
        essential=((-0.37849, -0.34767), (0.5948, 0.918058), (1.29317, 2.28516)),
        reference_eigenvalues=refs,
        notes="domain truncated with Dirichlet ends",
        default_h=default_h,
        default_refinement=2,
        extra={"potential": potential},
    )


def schrodinger_line(x_max: float = 40.0) -> ProblemSpec:
    return _schrodinger_problem(
        "schrodinger-line", (-x_max, x_max), periodic_line_potential,
        gap=(-0.34767, 0.5948), gap_eigs=(0.37763,),
        refs=(-0.40961, 0.37763, 1.18216), default_h=x_max / 128,
    )


def schrodinger_halfline(x_max: float = 60.0) -> ProblemSpec:
    return _schrodinger_problem(
        "schrodinger-halfline", (0.0, x_max), periodic_halfline_potential,
        gap=(-0.34767, 0.5948), gap_eigs=(), refs=(), default_h=x_max / 192,
    )


def free_particle() -> ProblemSpec:
    """-u'' on (0, 1) with Dirichlet ends: eigenvalues (k pi)^2, nothing inside the gap."""
    return ProblemSpec(
        name="free",
        domain=(0.0, 1.0),
        space_builder=lambda n: schrodinger_space((0.0, 1.0), n),
        assembler=lambda space: assemble_schrodinger_space(space, lambda x: np.zeros_like(x)),
        gap=(math.pi**2, 4.0 * math.pi**2),
        reference_eigenvalues=tuple((k * math.pi) ** 2 for k in range(1, 4)),
        default_h=1 / 64,
        default_refinement=2,
    )


PROBLEMS = {
    "block": _block_problem,
    "free": free_particle,
    "mhd": _mhd_problem,
    "schrodinger-line": schrodinger_line,
    "schrodinger-halfline": schrodinger_halfline,
}


def get_problem(name: str, **overrides) -> ProblemSpec:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ParameterError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**overrides)
