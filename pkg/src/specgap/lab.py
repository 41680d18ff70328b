"""Matrix-scale experiments: random Hermitian matrices with a given spectrum,
Monte Carlo enclosure checks for A + iB, and the projection perturbation
A + iP at matrix size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateError, ParameterError
from .geometry import (GapContext, RegionParams, SpectrumModel, d_of_z, gamma_distance,
                       gamma_distances, region_constants, region_contains,
                       region_contains_many, swap,
                       violation_depth, x_set_contains, y_set_contains)
from .linalg import general_gen_eig, herm_gen_eig, smallest_singular_value, subspace_gap


def _rng(seed, *stream):
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian with the phases of R removed."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


@dataclass(frozen=True)
class PrescribedMatrix:
    matrix: np.ndarray
    spectrum: SpectrumModel
    seed: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def random_hermitian_with_spectrum(spec: SpectrumModel, seed: int, *stream) -> PrescribedMatrix:
    """Q diag(spec) Q^H with a seeded random unitary Q.

    Extra integers in `stream` select independent sub-streams of the seed.
    """
    vals = spec.values()
    q = random_unitary(vals.size, _rng(seed, *stream))
    mat = (q * vals[None, :]) @ q.conj().T
    return PrescribedMatrix(0.5 * (mat + mat.conj().T), spec, int(seed))


# ---------------------------------------------------------------------------
# enclosure of sigma(A + iB)

@dataclass(frozen=True)
class EigenRecord:
    trial: int
    z: complex
    in_x: bool
    in_y: bool
    in_rect: bool
    margin: float


@dataclass
class EnclosureReport:
    spec_a: SpectrumModel
    spec_b: SpectrumModel
    trials: int
    seed: int
    tol: float
    records: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.records if not (r.in_x and r.in_y and r.in_rect))

    @property
    def worst_margin(self) -> float:
        """Largest distance by which any eigenvalue sits outside X_A or Y_B."""
        return max((r.margin for r in self.records), default=0.0)


def enclosure_record(spec_a: SpectrumModel, spec_b: SpectrumModel, z: complex, trial: int,
                     tol: float) -> EigenRecord:
    in_x = x_set_contains(spec_a, spec_b.lo, spec_b.hi, z, tol)
    in_y = y_set_contains(spec_b, spec_a.lo, spec_a.hi, z, tol)
    in_rect = (spec_a.lo - tol <= z.real <= spec_a.hi + tol
               and spec_b.lo - tol <= z.imag <= spec_b.hi + tol)
    margin = max(violation_depth(spec_a, spec_b.lo, spec_b.hi, z),
                 violation_depth(spec_b, spec_a.lo, spec_a.hi, swap(z)))
    return EigenRecord(trial, complex(z), in_x, in_y, in_rect, margin)


def enclosure_trial(spec_a: SpectrumModel, spec_b: SpectrumModel, trials: int, seed: int,
                    tol: float = 1e-8) -> EnclosureReport:
    """Draw random A, B with the given spectra and test sigma(A + iB) against X_A and Y_B.

    Trial k uses the seed streams (seed, k, 0) for A and (seed, k, 1) for B.
    """
    if len(spec_a.eigenvalues) < 2 or len(spec_b.eigenvalues) < 2:
        raise ParameterError("both spectra need at least two distinct points")
    if spec_a.dim != spec_b.dim:
        raise ParameterError("A and B must have the same dimension")
    if trials < 0:
        raise ParameterError("trials must be non-negative")
    report = EnclosureReport(spec_a, spec_b, trials, int(seed), tol)
    for k in range(trials):
        a = random_hermitian_with_spectrum(spec_a, seed, k, 0).matrix
        b = random_hermitian_with_spectrum(spec_b, seed, k, 1).matrix
        for z in general_gen_eig(a + 1j * b):
            report.records.append(enclosure_record(spec_a, spec_b, complex(z), k, tol))
    return report


def diagonal_enclosure(spec_a: SpectrumModel, spec_b: SpectrumModel, tol: float = 1e-8) -> list:
    """Commuting case: A and B diagonal in the same basis, eigenvalues paired in order."""
    a, b = spec_a.values(), spec_b.values()
    if a.size != b.size:
        raise ParameterError("A and B must have the same dimension")
    return [enclosure_record(spec_a, spec_b, complex(x, y), -1, tol) for x, y in zip(a, b)]


def bt_family(u, v, b_minus: float, b_plus: float, t: float) -> np.ndarray:
    """B(t) = b- w1 w1^H + b+ w2 w2^H with w1 = sqrt(1-t) u + sqrt(t) v, w2 = sqrt(t) u - sqrt(1-t) v."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        raise ParameterError("u and v differ in length")
    gram = np.array([[np.vdot(u, u), np.vdot(u, v)], [np.vdot(v, u), np.vdot(v, v)]])
    if np.max(np.abs(gram - np.eye(2))) > 1e-10:
        raise ParameterError("u and v must be orthonormal")
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"t must lie in [0, 1], got {t}")
    w1 = math.sqrt(1.0 - t) * u + math.sqrt(t) * v
    w2 = math.sqrt(t) * u - math.sqrt(1.0 - t) * v
    return b_minus * np.outer(w1, w1.conj()) + b_plus * np.outer(w2, w2.conj())


def bt_sweep(a_minus: float, a_plus: float, b_minus: float, b_plus: float, points: int = 101):
    """Eigenvalues of diag(a-, a+) + i B(t) on a uniform t grid and their distance to Gamma."""
    p = RegionParams(a_minus, a_plus, b_minus, b_plus)
    a = np.diag([a_minus, a_plus]).astype(complex)
    u, v = np.eye(2)
    ts = np.linspace(0.0, 1.0, points)
    eigs = np.array([general_gen_eig(a + 1j * bt_family(u, v, b_minus, b_plus, t)) for t in ts])
    dists = gamma_distances(p, eigs.ravel()).reshape(eigs.shape)
    return ts, eigs, dists


# ---------------------------------------------------------------------------
# resolvent bound

@dataclass
class ResolventReport:
    samples: int = 0
    violations: int = 0
    worst_ratio: float = 0.0  # max of ||R(z)|| dist^4 / K over the samples
    pairs: int = 0

    def merge(self, other: "ResolventReport") -> "ResolventReport":
        return ResolventReport(self.samples + other.samples, self.violations + other.violations,
                               max(self.worst_ratio, other.worst_ratio), self.pairs + other.pairs)


def resolvent_bound_audit(a: PrescribedMatrix, b: PrescribedMatrix, gap: Sequence[float],
                          z_samples: int, seed: int, max_draws: int = 100000) -> ResolventReport:
    """Check ||(A + iB - z)^-1|| <= K / dist(z, Gamma)^4 on random z in U."""
    lo, hi = gap
    if b.spectrum.lo == b.spectrum.hi or len(b.spectrum.eigenvalues) < 2:
        raise ParameterError("B needs b- < b+")
    if np.any((a.spectrum.values() > lo) & (a.spectrum.values() < hi)):
        raise ParameterError(f"({lo}, {hi}) is not a gap of sigma(A)")
    b_lo, b_hi = b.spectrum.lo, b.spectrum.hi
    p = RegionParams(lo, hi, b_lo, b_hi)
    k = region_constants(lo, hi, max(abs(b_lo), abs(b_hi))).k
    t = a.matrix + 1j * b.matrix
    eye = np.eye(a.dim)
    rng = _rng(seed, 7)
    report = ResolventReport(pairs=1)
    draws = 0
    while report.samples < z_samples:
        draws += 4 * z_samples
        if draws > max_draws:
            raise DegenerateError("could not draw enough points inside U")
        z = rng.uniform(lo, hi, 4 * z_samples) + 1j * rng.uniform(b_lo, b_hi, 4 * z_samples)
        z = z[region_contains_many(p, z)]
        dists = gamma_distances(p, z)
        for zz, dist in zip(z, dists):
            if report.samples >= z_samples:
                break
            if dist <= 0.0:
                continue
            smin = smallest_singular_value(t - zz * eye)
            report.samples += 1
            bound = k / dist**4
            if not (smin > 0.0 and 1.0 / smin <= bound + 1e-6):
                report.violations += 1
            ratio = (1.0 / smin) / bound if smin > 0 else math.inf
            report.worst_ratio = max(report.worst_ratio, float(ratio))
    return report


def random_gap_pair(seed: int, index: int, dim: int = 5):
    """A random (A, B, gap) triple where (a, b) is a gap of sigma(A)."""
    rng = _rng(seed, index, 11)
    a_lo, width = rng.uniform(-2.0, 2.0), rng.uniform(0.5, 4.0)
    a_hi = a_lo + width
    n_below = int(rng.integers(1, dim))
    below = a_lo - rng.uniform(0.0, 3.0, n_below)
    below[0] = a_lo
    above = a_hi + rng.uniform(0.0, 3.0, dim - n_below)
    above[0] = a_hi
    spec_a = SpectrumModel.from_values(np.concatenate([below, above]))
    b_lo = rng.uniform(-1.5, 0.5)
    b_hi = b_lo + rng.uniform(0.1, 2.0)
    vals_b = rng.uniform(b_lo, b_hi, dim)
    vals_b[0], vals_b[-1] = b_lo, b_hi
    spec_b = SpectrumModel.from_values(vals_b)
    a = random_hermitian_with_spectrum(spec_a, seed, index, 0)
    b = random_hermitian_with_spectrum(spec_b, seed, index, 1)
    return a, b, (a_lo, a_hi)


def resolvent_campaign(pairs: int, z_samples: int, seed: int) -> ResolventReport:
    total = ResolventReport()
    for i in range(pairs):
        a, b, gap = random_gap_pair(seed, i)
        total = total.merge(resolvent_bound_audit(a, b, gap, z_samples, seed * 1000003 + i))
    return total


# ---------------------------------------------------------------------------
# two gaps

def two_gap_dimension_count(a: PrescribedMatrix, b: PrescribedMatrix, gap1: Sequence[float],
                            gap2: Sequence[float], tol: float = 1e-9) -> int:
    """Number of eigenvalues of A + iB in the region enclosed by g1 and f2.

    Under the hypothesis the gap regions are "wide", so the enclosed region is
    everything between the midlines of the two gaps that lies outside both U.
    """
    a1, b1 = gap1
    a2, b2 = gap2
    if not a1 < b1 <= a2 < b2:
        raise ParameterError("need a1 < b1 <= a2 < b2")
    vals = a.spectrum.values()
    for lo, hi in (gap1, gap2):
        if np.any((vals > lo) & (vals < hi)):
            raise ParameterError(f"({lo}, {hi}) is not a gap of sigma(A)")
    b_lo, b_hi = b.spectrum.lo, b.spectrum.hi
    if not min(b1 - a1, b2 - a2) > b_hi - b_lo:
        raise ParameterError("gap widths must exceed b+ - b-")
    p1 = RegionParams(a1, b1, b_lo, b_hi)
    p2 = RegionParams(a2, b2, b_lo, b_hi)
    count = 0
    for z in general_gen_eig(a.matrix + 1j * b.matrix):
        z = complex(z)
        if not (0.5 * (a1 + b1) < z.real < 0.5 * (a2 + b2)):
            continue
        if region_contains(p1, z) and gamma_distance(p1, z) > tol:
            continue
        if region_contains(p2, z) and gamma_distance(p2, z) > tol:
            continue
        count += 1
    return count


def spectral_count(spec: SpectrumModel, lo: float, hi: float) -> int:
    """rank E([lo, hi]) for a finite spectrum."""
    return sum(m for x, m in zip(spec.eigenvalues, spec.multiplicities) if lo <= x <= hi)


# ---------------------------------------------------------------------------
# projection perturbation A + iP

def orthogonal_projector(basis) -> np.ndarray:
    """Orthogonal projector onto the column span of `basis` (may be empty)."""
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.shape[1] == 0:
        return np.zeros((basis.shape[0],) * 2, dtype=complex)
    q, r = np.linalg.qr(basis)
    d = np.abs(np.diag(r))
    if d.min() <= 1e-12 * d.max():
        raise ParameterError("projection basis is rank deficient")
    p = q @ q.conj().T
    return 0.5 * (p + p.conj().T)


@dataclass(frozen=True)
class ProjectionSetup:
    a_matrix: np.ndarray
    p_matrix: np.ndarray
    delta: tuple
    e_delta: np.ndarray = field(init=False)
    eigvals: np.ndarray = field(init=False)
    eigvecs: np.ndarray = field(init=False)

    def __post_init__(self):
        p = self.p_matrix
        if np.linalg.norm(p @ p - p, 2) > 1e-12 or np.linalg.norm(p - p.conj().T, 2) > 1e-12:
            raise ParameterError("p_matrix is not an orthogonal projection")
        lo, hi = self.delta
        if not lo < hi:
            raise ParameterError("delta must be a non-empty interval")
        w, v = herm_gen_eig(self.a_matrix)
        inside = (w >= lo) & (w <= hi)
        e = v[:, inside] @ v[:, inside].conj().T
        object.__setattr__(self, "e_delta", 0.5 * (e + e.conj().T))
        object.__setattr__(self, "eigvals", w)
        object.__setattr__(self, "eigvecs", v)

    @property
    def dim(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def eps(self) -> float:
        """||(I - P) E(Delta)||."""
        resid = self.e_delta - self.p_matrix @ self.e_delta
        return float(np.linalg.norm(resid, 2))

    @property
    def kappa(self) -> int:
        lo, hi = self.delta
        return int(np.sum((self.eigvals >= lo) & (self.eigvals <= hi)))

    def gap_eigenvalues(self) -> np.ndarray:
        lo, hi = self.delta
        return self.eigvals[(self.eigvals >= lo) & (self.eigvals <= hi)]

    @property
    def t(self) -> np.ndarray:
        return self.a_matrix + 1j * self.p_matrix


@dataclass(frozen=True)
class CheckResult:
    status: str  # "pass", "fail" or "skipped"
    value: float = math.nan
    bound: float = math.nan
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def projection_resolvent_audit(setup: ProjectionSetup, ctx: GapContext, z: complex,
                               tol: float = 1e-8) -> CheckResult:
    """sigma_min(A + iP - z) >= d(z) - 3 ||(I - P) E(Delta)|| when the right side is positive."""
    if not region_contains(ctx.region, z):
        return CheckResult("skipped", detail="z outside U")
    eps = setup.eps
    d = d_of_z(ctx, z)
    if not d > 3.0 * eps:
        return CheckResult("skipped", bound=d - 3.0 * eps, detail="d(z) <= 3 eps")
    smin = smallest_singular_value(setup.t - z * np.eye(setup.dim))
    bound = d - 3.0 * eps
    return CheckResult("pass" if smin >= bound - tol else "fail", smin, bound)


def random_projection_setup(seed: int, index: int, dim: int = 8, gap=(0.0, 3.0)):
    """Random A with one eigenvalue in the gap and a projection P that nearly contains it."""
    rng = _rng(seed, index, 23)
    lo, hi = gap
    lam = rng.uniform(lo + 0.5, hi - 0.5)
    n_below = int(rng.integers(1, dim - 1))
    below = lo - rng.uniform(0.0, 3.0, n_below)
    above = hi + rng.uniform(0.0, 3.0, dim - 1 - n_below)
    spec = SpectrumModel.from_values(np.concatenate([below, [lam], above]))
    q = random_unitary(dim, rng)
    vals = spec.values()
    a = (q * vals[None, :]) @ q.conj().T
    a = 0.5 * (a + a.conj().T)
    j = int(np.nonzero(vals == lam)[0][0])
    others = [i for i in range(dim) if i != j]
    theta = 10.0 ** rng.uniform(-7.0, -4.0)
    tilt = q[:, others] @ (rng.standard_normal(dim - 1) + 1j * rng.standard_normal(dim - 1))
    tilt /= np.linalg.norm(tilt)
    target = math.cos(theta) * q[:, j] + math.sin(theta) * tilt
    extra = rng.standard_normal((dim, int(rng.integers(0, dim // 2)))) * (1 + 0j)
    p = orthogonal_projector(np.column_stack([target, extra]))
    return ProjectionSetup(a, p, (lo, hi)), GapContext(lo, hi, (lam,))


def projection_campaign(setups: int, z_per_setup: int, seed: int, max_draws: int = 10000):
    """Run the resolvent audit for A + iP on random admissible z.  Returns counts by status."""
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    worst = math.inf
    for i in range(setups):
        setup, ctx = random_projection_setup(seed, i)
        rng = _rng(seed, i, 29)
        done = draws = 0
        while done < z_per_setup and draws < max_draws:
            draws += 1
            z = complex(rng.uniform(ctx.a, ctx.b), rng.uniform(0.0, 1.0))
            res = projection_resolvent_audit(setup, ctx, z)
            if res.status == "skipped":
                continue
            done += 1
            counts[res.status] += 1
            worst = min(worst, res.value - res.bound)
        counts["skipped"] += z_per_setup - done
    return counts, worst


def exact_lift_check(setup: ProjectionSetup, rank_tol: float = 1e-8) -> CheckResult:
    """With (I - P) E(Delta) = 0 every gap eigenvalue lambda lifts to lambda + i exactly."""
    if setup.eps > 1e-12:
        raise ParameterError("need ||(I - P) E(Delta)|| <= 1e-12")
    lo, hi = setup.delta
    ctx_region = RegionParams(lo, hi, 0.0, 1.0)
    eigs = general_gen_eig(setup.t)
    scale = max(1.0, float(np.abs(setup.eigvals).max()))
    lams, mults = np.unique(np.round(setup.gap_eigenvalues(), 12), return_counts=True)
    eye = np.eye(setup.dim)
    for lam, mult in zip(lams, mults):
        target = lam + 1j
        err = float(np.min(np.abs(eigs - target)))
        if err > 1e-10 * scale:
            return CheckResult("fail", err, 1e-10, f"no eigenvalue at {target}")
        sv = np.linalg.svd(setup.t - target * eye, compute_uv=False)
        geo = int(np.sum(sv <= rank_tol * scale))
        if geo != mult:
            return CheckResult("fail", geo, mult, f"geometric multiplicity {geo} != {mult} at {target}")
    targets = lams + 1j
    for z in eigs:
        z = complex(z)
        if targets.size and np.min(np.abs(targets - z)) <= 1e-8 * scale:
            continue
        if region_contains(ctx_region, z) and gamma_distance(ctx_region, z) > 1e-6:
            return CheckResult("fail", abs(z), 0.0, f"stray eigenvalue {z} in U")
    return CheckResult("pass", 0.0, 0.0)


# ---------------------------------------------------------------------------
# superconvergence at matrix scale

def rotation_projection(eigvecs: np.ndarray, targets: Sequence[int], partners: Sequence[int],
                        extra: Sequence[int], theta: float) -> np.ndarray:
    """Projector onto {cos theta x_t + sin theta x_p} for paired (target, partner) plus extras.

    ||(I - P) E|| = sin theta when E projects onto the target vectors.
    """
    cols = [math.cos(theta) * eigvecs[:, t] + math.sin(theta) * eigvecs[:, p]
            for t, p in zip(targets, partners)]
    cols += [eigvecs[:, e] for e in extra]
    return orthogonal_projector(np.column_stack(cols))


@dataclass(frozen=True)
class RateReport:
    eps: tuple
    eig_errors: tuple
    subspace_gaps: tuple
    disc_counts: tuple
    disc_radius: float
    eig_slope: float
    gap_slope: float
    kappa: int


def _loglog_slope(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 3:
        raise DegenerateError("fewer than three usable points for a slope fit")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def disc_radius(setup_eigvals, lam: float, ctx: GapContext) -> float:
    """Half the distance from lambda + i to the other lifted points and to Gamma."""
    others = [abs(x - lam) for x in setup_eigvals if abs(x - lam) > 1e-12]
    near = min(others) if others else math.inf
    return 0.5 * min(near, gamma_distance(ctx.region, lam + 1j))


def superconvergence_probe(a: PrescribedMatrix, ctx: GapContext, lam: float,
                           thetas: Sequence[float], extra_count: int = 1) -> RateReport:
    """Perturbed eigenvalue error and form-norm eigenspace gap along a rotation family.

    Each target eigenvector of lam is rotated toward a distinct eigenvector
    outside the gap; `extra_count` further eigenvectors (outside the gap and
    not used as partners) are added to the projection range unchanged.
    """
    w, v = herm_gen_eig(a.matrix)
    tgt = [i for i in range(w.size) if abs(w[i] - lam) <= 1e-10 * max(1.0, abs(lam))]
    kappa = len(tgt)
    if kappa == 0:
        raise ParameterError(f"{lam} is not an eigenvalue of A")
    outside = [i for i in range(w.size) if not (ctx.a <= w[i] <= ctx.b)]
    if len(outside) < kappa + extra_count:
        raise ParameterError("not enough eigenvectors outside the gap for the rotation family")
    partners = outside[-kappa:]
    extra = outside[:extra_count]
    form = a.matrix - (w[0] - 1.0) * np.eye(w.size)
    ref = v[:, tgt]
    r = disc_radius(w, lam, ctx)
    eye = np.eye(w.size)
    eps_l, errs, gaps, counts = [], [], [], []
    for theta in thetas:
        p = rotation_projection(v, tgt, partners, extra, theta)
        setup_eps = float(np.linalg.norm((eye - p) @ ref @ ref.conj().T, 2))
        t = a.matrix + 1j * p
        mu, x = general_gen_eig(t, vectors=True)
        order = np.argsort(np.abs(mu - (lam + 1j)))[:kappa]
        errs.append(float(np.max(np.abs(mu[order] - (lam + 1j)))))
        gaps.append(subspace_gap(ref, x[:, order], form)[1])
        counts.append(int(np.sum(np.abs(mu - (lam + 1j)) < r)))
        eps_l.append(setup_eps)
    return RateReport(tuple(eps_l), tuple(errs), tuple(gaps), tuple(counts), r,
                      _loglog_slope(eps_l, errs), _loglog_slope(eps_l, gaps), kappa)


# ---------------------------------------------------------------------------
# small inequalities used by the property suites

def quadratic_form_residual(b: np.ndarray, u: np.ndarray) -> float:
    """(b- + b+) <Bu, u> - b- b+ ||u||^2 - ||Bu||^2; non-negative for Hermitian B."""
    w = np.linalg.eigvalsh(b)
    lo, hi = w[0], w[-1]
    bu = b @ u
    return float((lo + hi) * np.vdot(u, bu).real - lo * hi * np.vdot(u, u).real
                 - np.vdot(bu, bu).real)
