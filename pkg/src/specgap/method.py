"""The perturbation method on nested finite element spaces.

A coarse space L_n sits inside a fine space L_k.  The orthogonal projection
P_n onto L_n is represented on L_k by its Gram matrix Pi, and the Galerkin
eigenvalues of A + iP_n on L_k are those of the pencil (S + i Pi, M).  Gap
eigenvalues lambda of A show up near lambda + i, away from the pollution
that sits on the real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import AssemblyError, DegenerateError, ParameterError, SolverError
from .fem import ProblemSpec, ProductSpace
from .geometry import (GapContext, gamma_distances, nonreal_eig_interval,
                       refined_eig_interval, tau_map)
from .linalg import general_gen_eig, herm_gen_eig, herm_gen_eigvals, subspace_gap

LIFTED = "lifted-candidate"
NEAR_REAL = "near-real"
NEAR_GAMMA = "near-gamma"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class NestedPair:
    coarse: ProductSpace
    fine: ProductSpace
    refinement: int

    def __post_init__(self):
        if self.refinement < 0:
            raise ParameterError("refinement must be non-negative")
        # raises when the meshes are not nested or the boundary flags differ
        self.prolongation()

    @classmethod
    def build(cls, problem: ProblemSpec, h_n, refinement: int) -> "NestedPair":
        coarse = problem.space(h_n)
        return cls(coarse, coarse.refined(refinement), refinement)

    def prolongation(self) -> np.ndarray:
        return self.coarse.prolongation(self.fine)


def projection_gram(pair: NestedPair, fine_mass: Optional[np.ndarray] = None) -> np.ndarray:
    """Pi = C^T M_n^{-1} C, with C = R^T M_k the coarse/fine cross mass matrix.

    R holds the coarse hat functions in the fine basis, so M_n = R^T M_k R.
    """
    from .fem import mass_matrix

    m_k = mass_matrix(pair.fine) if fine_mass is None else fine_mass
    if pair.refinement == 0:
        return np.array(m_k, copy=True)
    r = pair.prolongation()
    cross = r.T @ m_k
    m_n = cross @ r
    try:
        factor = sla.cho_factor(m_n, lower=True)
    except np.linalg.LinAlgError as exc:
        raise AssemblyError("coarse mass matrix is singular") from exc
    pi = cross.conj().T @ sla.cho_solve(factor, cross)
    return 0.5 * (pi + pi.conj().T)


@dataclass(frozen=True)
class PerturbedPencil:
    """(S + i Pi, M) on the fine space."""

    s: np.ndarray
    m: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        n = self.s.shape[0]
        if self.m.shape != (n, n) or self.pi.shape != (n, n):
            raise ParameterError("pencil matrices differ in shape")
        scale = max(np.linalg.norm(self.m, 1), 1e-300)
        if np.linalg.norm(self.pi - self.pi.conj().T, 1) > 1e-12 * scale:
            raise ParameterError("projection Gram matrix is not Hermitian")

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.s + 1j * self.pi

    def projection_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of (Pi, M); they lie in [0, 1] for an orthogonal projection."""
        return herm_gen_eigvals(self.pi, self.m)

    @classmethod
    def build(cls, problem: ProblemSpec, pair: NestedPair) -> "PerturbedPencil":
        fine = problem.assemble(pair.fine)
        return cls(fine.s, fine.m, projection_gram(pair, fine.m))


def perturbed_spectrum(pencil: PerturbedPencil) -> np.ndarray:
    """Galerkin eigenvalues of A + iP_n on the fine space, sorted by (Re, Im)."""
    return general_gen_eig(pencil.t, pencil.m)


@dataclass(frozen=True)
class Thresholds:
    lifted_imag: float = 0.5
    near_real_imag: float = 0.1
    gamma_tol_frac: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.near_real_imag < self.lifted_imag <= 1.0:
            raise ParameterError("need 0 <= near_real_imag < lifted_imag <= 1")
        if self.gamma_tol_frac < 0:
            raise ParameterError("gamma_tol_frac must be non-negative")

    def gamma_tol(self, ctx: GapContext) -> float:
        return self.gamma_tol_frac * (ctx.b - ctx.a)


@dataclass(frozen=True)
class ClassifiedEigenvalue:
    z: complex
    cls: str
    gamma_dist: float
    tau: complex
    enclosure: Optional[tuple] = None
    refined_enclosure: Optional[tuple] = None

    def as_dict(self) -> dict:
        return {
            "re": self.z.real, "im": self.z.imag, "class": self.cls,
            "gamma_dist": self.gamma_dist,
            "tau_re": self.tau.real, "tau_im": self.tau.imag,
            "enclosure": list(self.enclosure) if self.enclosure else None,
            "refined_enclosure": list(self.refined_enclosure) if self.refined_enclosure else None,
        }


def classify(eigs, ctx: GapContext, thresholds: Thresholds = Thresholds()) -> list:
    """Sort eigenvalues into lifted candidates, near-real points and near-Gamma points.

    Points with intermediate imaginary part that are also far from Gamma are
    labelled "unresolved" rather than forced into one of the three classes.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    dists = gamma_distances(ctx.region, eigs) if eigs.size else np.zeros(0)
    tol = thresholds.gamma_tol(ctx)
    out = []
    for z, dist in zip(eigs, dists):
        z = complex(z)
        if z.imag >= thresholds.lifted_imag:
            cls = LIFTED
        elif z.imag <= thresholds.near_real_imag:
            cls = NEAR_REAL
        elif dist <= tol:
            cls = NEAR_GAMMA
        else:
            cls = UNRESOLVED
        enclosure = refined = None
        if 0.0 <= z.imag <= 1.0:
            enclosure = nonreal_eig_interval(z)
            if len(ctx.lambdas) == 1 and ctx.a < z.real < ctx.b:
                refined = refined_eig_interval(z, ctx.a, ctx.b)
        out.append(ClassifiedEigenvalue(z, cls, float(dist), tau_map(z), enclosure, refined))
    return out


@dataclass(frozen=True)
class PerturbedSpectrum:
    problem: str
    h_n: float
    refinement: int
    gap: tuple
    coarse_dim: int
    fine_dim: int
    eigenvalues: list
    galerkin: np.ndarray
    thresholds: Thresholds = Thresholds()

    def by_class(self, cls: str) -> list:
        return [e for e in self.eigenvalues if e.cls == cls]

    def lifted(self) -> list:
        return self.by_class(LIFTED)

    def lifted_in_gap(self) -> list:
        a, b = self.gap
        return [e for e in self.lifted() if a < e.z.real < b]

    def values(self) -> np.ndarray:
        return np.array([e.z for e in self.eigenvalues])

    def imag_range(self):
        z = self.values()
        return float(z.imag.min()), float(z.imag.max())


def run_method(problem: ProblemSpec, h_n=None, refinement: Optional[int] = None,
               gap: Optional[Sequence[float]] = None,
               thresholds: Thresholds = Thresholds()) -> PerturbedSpectrum:
    """Assemble, solve and classify one perturbation run."""
    h_n = problem.default_h if h_n is None else h_n
    refinement = problem.default_refinement if refinement is None else refinement
    a, b = problem.gap if gap is None else gap
    lams = [x for x in problem.gap_eigenvalues if a < x < b]
    ctx = GapContext(a, b, tuple(lams))
    pair = NestedPair.build(problem, h_n, refinement)
    pencil = PerturbedPencil.build(problem, pair)
    eigs = perturbed_spectrum(pencil)
    galerkin = herm_gen_eigvals(pencil.s, pencil.m)
    return PerturbedSpectrum(
        problem=problem.name, h_n=float(h_n), refinement=refinement, gap=(a, b),
        coarse_dim=pair.coarse.dim, fine_dim=pair.fine.dim,
        eigenvalues=classify(eigs, ctx, thresholds), galerkin=galerkin,
        thresholds=thresholds,
    )


def band_clusters(values, max_spacing: float) -> list:
    """Group sorted real values into runs whose consecutive spacing is at most max_spacing."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    breaks = np.nonzero(np.diff(v) > max_spacing)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [v.size - 1]])
    return [(float(v[i]), float(v[j]), int(j - i + 1)) for i, j in zip(starts, ends)]


# ---------------------------------------------------------------------------
# convergence studies

def default_refinement(h) -> int:
    return 7 if h >= 1 / 8 - 1e-15 else 5


def fit_loglog_slope(h, dist, guard: bool = True, floor: float = 0.05):
    """Least-squares slope of log dist against log h.

    With at least four points the coarsest one is tested against the fit of
    the remaining points: it is dropped when its residual there exceeds both
    three times every other residual and `floor` (in log units, so 0.05 is
    about a 5% relative deviation).  A point included in the fit drags the
    line toward itself, so the test leaves it out.  Returns (slope, used)
    where used is a boolean mask over the inputs.
    """
    h = np.asarray(h, dtype=float)
    dist = np.asarray(dist, dtype=float)
    used = (dist > 0) & np.isfinite(dist)
    if used.sum() < 3:
        raise DegenerateError("need at least three positive distances for a slope fit")
    x, y = np.log(h), np.log(np.where(used, dist, 1.0))

    def fit(mask):
        return np.polyfit(x[mask], y[mask], 1)

    slope, _ = fit(used)
    if guard and used.sum() >= 4:
        idx = np.nonzero(used)[0]
        coarsest = idx[np.argmax(h[idx])]
        rest = used.copy()
        rest[coarsest] = False
        s_rest, c_rest = fit(rest)
        resid = np.abs(y - (s_rest * x + c_rest))
        if resid[coarsest] > max(3.0 * resid[rest].max(), floor):
            used = rest
            slope = s_rest
    return float(slope), used


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    refinement: int
    galerkin_dist: float
    perturbed_dist: float
    fine_dim: int


EPSILON_DEFS = {
    "epsilon": "L2 gap from the target eigenspace to the coarse trial space",
    "epsilon_form": "form-norm gap from the target eigenspace to the coarse trial space",
}


@dataclass(frozen=True)
class ConvergenceRecord:
    problem: str
    target: float
    rows: tuple
    galerkin_slope: float
    perturbed_slope: float
    galerkin_used: tuple
    perturbed_used: tuple
    epsilon_defs: dict = field(default_factory=lambda: dict(EPSILON_DEFS))


def nearest_distance(target: complex, eigs) -> float:
    eigs = np.asarray(eigs)
    return float(np.min(np.abs(eigs - target)))


def convergence_row(problem: ProblemSpec, target: float, h, refinement: int) -> ConvergenceRow:
    coarse = problem.assemble(problem.space(h))
    gal = herm_gen_eigvals(coarse.s, coarse.m)
    pair = NestedPair.build(problem, h, refinement)
    pencil = PerturbedPencil.build(problem, pair)
    pert = perturbed_spectrum(pencil)
    return ConvergenceRow(float(h), refinement, nearest_distance(target, gal),
                          nearest_distance(target + 1j, pert), pencil.dim)


def convergence_study(problem: ProblemSpec, target: float, hs: Sequence,
                      refinement: Optional[int] = None, guard: bool = True) -> ConvergenceRecord:
    """Galerkin and perturbed distances to target over a list of mesh sizes.

    refinement=None applies default_refinement per mesh size.
    """
    if len(hs) < 3:
        raise ParameterError("a convergence study needs at least three mesh sizes")
    rows = tuple(convergence_row(problem, target, h,
                                 default_refinement(h) if refinement is None else refinement)
                 for h in hs)
    h = [r.h for r in rows]
    gs, gu = fit_loglog_slope(h, [r.galerkin_dist for r in rows], guard)
    ps, pu = fit_loglog_slope(h, [r.perturbed_dist for r in rows], guard)
    return ConvergenceRecord(problem.name, float(target), rows, gs, ps,
                             tuple(bool(x) for x in gu), tuple(bool(x) for x in pu))


# ---------------------------------------------------------------------------
# subspace gaps

@dataclass(frozen=True)
class SubspaceGaps:
    epsilon: float
    epsilon_form: float
    lifted_gap: float
    lifted_eigenvalues: tuple
    reference_eigenvalues: tuple
    lower_bound: float


def _cluster(values, target, rtol=1e-8):
    values = np.asarray(values)
    d = np.abs(values - target)
    best = d.min()
    return np.nonzero(d <= best + rtol * max(1.0, abs(target)))[0]


def _inverse_iteration(t, m, mu, k, steps=3, seed=0):
    n = t.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    shift = mu
    for attempt in range(2):
        lu = sla.lu_factor(t - shift * m, check_finite=False)
        y = x
        ok = True
        for _ in range(steps):
            y = sla.lu_solve(lu, m @ y)
            if not np.all(np.isfinite(y)):
                ok = False
                break
            y, _ = np.linalg.qr(y)
        if ok:
            return y
        shift = mu + 1e-10 * max(1.0, abs(mu))
    raise SolverError("inverse iteration failed", dim=n)


def measure_subspace_gaps(problem: ProblemSpec, lam: float, h_n, refinement: int,
                          kappa: int = 1, reference: Optional[np.ndarray] = None) -> SubspaceGaps:
    """epsilon, the form-norm gap, and the form-norm gap of the lifted eigenspace.

    The reference eigenspace defaults to the fine-space Galerkin eigenvectors
    of the kappa eigenvalues nearest lam; pass `reference` (fine coefficient
    vectors, one per column) to use a known eigenspace instead.  The form
    norm uses S - (m - 1) M with m a lower bound for the fine Galerkin
    spectrum.
    """
    if kappa < 1:
        raise ParameterError("kappa must be positive")
    pair = NestedPair.build(problem, h_n, refinement)
    pencil = PerturbedPencil.build(problem, pair)
    w, v = herm_gen_eig(pencil.s, pencil.m)
    if reference is None:
        idx = _cluster(w, lam)
        if idx.size > kappa:
            raise ParameterError(
                f"Galerkin eigenvalue near {lam} has multiplicity {idx.size} > kappa={kappa}; "
                "supply the reference eigenspace explicitly")
        idx = np.argsort(np.abs(w - lam))[:kappa]
        ref = v[:, idx]
        ref_vals = tuple(float(x) for x in w[idx])
    else:
        ref = np.atleast_2d(np.asarray(reference).T).T
        if ref.shape != (pencil.dim, kappa):
            raise ParameterError(f"reference must have shape ({pencil.dim}, {kappa})")
        ref_vals = (float(lam),) * kappa
    lower = w[0] - 0.1 * max(abs(w[0]), 1.0)
    form = pencil.s - (lower - 1.0) * pencil.m
    form = 0.5 * (form + form.conj().T)
    r = pair.prolongation()
    eps, _ = subspace_gap(ref, r, pencil.m)
    eps_form, _ = subspace_gap(ref, r, form)

    pert = perturbed_spectrum(pencil)
    order = np.argsort(np.abs(pert - (lam + 1j)))[:kappa]
    mus = pert[order]
    lifted = _inverse_iteration(pencil.t, pencil.m, complex(np.mean(mus)), kappa)
    _, lifted_gap = subspace_gap(ref, lifted, form)
    return SubspaceGaps(float(eps), float(eps_form), float(lifted_gap),
                        tuple(complex(x) for x in mus), ref_vals, float(lower))
