"""Curves f, g, regions U and Gamma, and the enclosure sets built from them.

A rectangle (alpha, beta) x (gamma, delta) of the complex plane carries two
curves f, g : [0, 1] -> C.  When the rectangle is "tall"
(beta - alpha <= delta - gamma) the curves are parametrised by their real
part and bulge vertically; otherwise ("wide") they are parametrised by the
imaginary part and bulge horizontally.  U is the open region cut out between
the curves and the rectangle edges, Gamma is the union of both curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, ParameterError

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RegionParams:
    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"non-finite rectangle {vals}")
        if not self.alpha < self.beta:
            raise ParameterError(f"need alpha < beta, got {self.alpha}, {self.beta}")
        if not self.gamma < self.delta:
            raise ParameterError(f"need gamma < delta, got {self.gamma}, {self.delta}")

    @property
    def tall(self) -> bool:
        return self.beta - self.alpha <= self.delta - self.gamma

    @property
    def wide(self) -> bool:
        return not self.tall

    def reflected(self) -> "RegionParams":
        return RegionParams(-self.beta, -self.alpha, self.gamma, self.delta)


def _curves(p: RegionParams, t):
    """Vectorised f(t), g(t) for an array of parameters t."""
    t = np.asarray(t, dtype=float)
    a, b, c, d = p.alpha, p.beta, p.gamma, p.delta
    if p.tall:
        x = a * (1.0 - t) + b * t
        rad = ((d - c) / 2.0) ** 2 + (x - a) * (x - b)
        root = np.sqrt(np.maximum(rad, 0.0))
        mid = (c + d) / 2.0
        return x + 1j * (mid - root), x + 1j * (mid + root)
    y = (1.0 - t) * c + t * d
    rad = ((b - a) / 2.0) ** 2 + (y - c) * (y - d)
    root = np.sqrt(np.maximum(rad, 0.0))
    mid = (a + b) / 2.0
    return (mid - root) + 1j * y, (mid + root) + 1j * y


def curve_point(p: RegionParams, t: float, branch: str = "f") -> complex:
    """Point f(t) or g(t) on Gamma."""
    if branch not in ("f", "g"):
        raise ParameterError(f"branch must be 'f' or 'g', got {branch!r}")
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"t must lie in [0, 1], got {t}")
    f, g = _curves(p, t)
    return complex(f if branch == "f" else g)


def curve_samples(p: RegionParams, samples: int):
    """Arrays (t, f(t), g(t)) on a uniform grid of `samples` points."""
    if samples < 2:
        raise ParameterError("need at least two samples")
    t = np.linspace(0.0, 1.0, samples)
    f, g = _curves(p, t)
    return t, f, g


def region_contains(p: RegionParams, z: complex) -> bool:
    """Exact membership in the open-ish region U (inequalities as defined)."""
    x, y = z.real, z.imag
    if p.tall:
        if not (p.alpha < x < p.beta):
            return False
        t = (x - p.alpha) / (p.beta - p.alpha)
        f, g = _curves(p, t)
        return bool((p.gamma <= y < f.imag) or (g.imag < y <= p.delta))
    if not (p.gamma <= y <= p.delta):
        return False
    s = (y - p.gamma) / (p.delta - p.gamma)
    f, g = _curves(p, s)
    return bool(f.real < x < g.real)


def region_contains_many(p: RegionParams, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    if p.tall:
        t = np.clip((x - p.alpha) / (p.beta - p.alpha), 0.0, 1.0)
        f, g = _curves(p, t)
        inside = (p.alpha < x) & (x < p.beta)
        return inside & (((p.gamma <= y) & (y < f.imag)) | ((g.imag < y) & (y <= p.delta)))
    s = np.clip((y - p.gamma) / (p.delta - p.gamma), 0.0, 1.0)
    f, g = _curves(p, s)
    inside = (p.gamma <= y) & (y <= p.delta)
    return inside & (f.real < x) & (x < g.real)


def gamma_distances(p: RegionParams, z, samples: int = 1025, tol: float = 1e-12,
                    chunk: int = 512) -> np.ndarray:
    """dist(z, Gamma) for an array of points.

    Dense sampling of both branches, then golden-section refinement of t on
    the bracket around the best sample, run in lockstep for all points.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if z.size > chunk:
        return np.concatenate([gamma_distances(p, z[i:i + chunk], samples, tol, chunk)
                               for i in range(0, z.size, chunk)])
    samples = max(int(samples), 1024)
    t = np.linspace(0.0, 1.0, samples)
    step = t[1] - t[0]
    f, g = _curves(p, t)
    best = np.full(z.shape, np.inf)
    for k, curve in enumerate((f, g)):
        dist = np.abs(z[:, None] - curve[None, :])
        i = np.argmin(dist, axis=1)
        lo = np.clip(t[i] - step, 0.0, 1.0)
        hi = np.clip(t[i] + step, 0.0, 1.0)

        def fun(s):
            return np.abs(z - _curves(p, s)[k])

        c = hi - INVPHI * (hi - lo)
        d = lo + INVPHI * (hi - lo)
        fc, fd = fun(c), fun(d)
        while np.max(hi - lo) > tol:
            left = fc < fd
            lo, hi = np.where(left, lo, c), np.where(left, d, hi)
            c = hi - INVPHI * (hi - lo)
            d = lo + INVPHI * (hi - lo)
            fc, fd = fun(c), fun(d)
        refined = np.minimum(fun(0.5 * (lo + hi)), dist[np.arange(z.size), i])
        best = np.minimum(best, refined)
    return best


def gamma_distance(p: RegionParams, z: complex) -> float:
    """min over both branches and t in [0, 1] of |z - curve(t)|."""
    return float(gamma_distances(p, [z])[0])


def boundary_identity_residual(p: RegionParams, z: complex) -> float:
    """Re z - (Im z - delta)(Im z - gamma)/(Re z - alpha) - beta.

    Zero on Gamma, negative in U, positive outside U and Gamma (for
    alpha < Re z <= beta inside the horizontal strip).
    """
    x, y = z.real, z.imag
    if x == p.alpha:
        raise DegenerateError("Re z equals alpha")
    return x - (y - p.delta) * (y - p.gamma) / (x - p.alpha) - p.beta


@dataclass(frozen=True)
class EnclosureConstants:
    r: float
    s: float
    k: float
    b_norm: float


def region_constants(a: float, b: float, b_norm: float) -> EnclosureConstants:
    if not a < b:
        raise ParameterError(f"need a < b, got {a}, {b}")
    if b_norm < 0:
        raise ParameterError("operator norm bound must be non-negative")
    r = max((b - a) / 2.0, b_norm)
    s = (r * r + 2.0 * r * (4.0 + 10.0 * b_norm) + 4.0 * b_norm**2) * (b - a)
    k = max(r**4, 2.0 * r**3, s)
    return EnclosureConstants(r=r, s=s, k=k, b_norm=b_norm)


@dataclass(frozen=True)
class SpectrumModel:
    """Finite spectrum with multiplicities; near-equal values are merged."""

    eigenvalues: tuple
    multiplicities: tuple

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.multiplicities):
            raise ParameterError("eigenvalues and multiplicities differ in length")
        if len(self.eigenvalues) == 0:
            raise ParameterError("empty spectrum")
        if any(m < 1 for m in self.multiplicities):
            raise ParameterError("multiplicities must be positive")
        if any(b <= a for a, b in zip(self.eigenvalues, self.eigenvalues[1:])):
            raise ParameterError("eigenvalues must be strictly increasing")

    @classmethod
    def from_values(cls, values, merge_tol: float = 1e-12) -> "SpectrumModel":
        vals = sorted(float(v) for v in values)
        if not vals:
            raise ParameterError("empty spectrum")
        eigs, mult = [vals[0]], [1]
        for v in vals[1:]:
            if v - eigs[-1] <= merge_tol:
                mult[-1] += 1
            else:
                eigs.append(v)
                mult.append(1)
        return cls(tuple(eigs), tuple(mult))

    @property
    def lo(self) -> float:
        return self.eigenvalues[0]

    @property
    def hi(self) -> float:
        return self.eigenvalues[-1]

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.repeat(np.array(self.eigenvalues), self.multiplicities)

    def gaps(self):
        return list(zip(self.eigenvalues, self.eigenvalues[1:]))


@dataclass(frozen=True)
class GapContext:
    a: float
    b: float
    lambdas: tuple = ()
    constants: EnclosureConstants = field(init=False)

    def __post_init__(self):
        lams = tuple(sorted(float(x) for x in self.lambdas))
        if not self.a < self.b:
            raise ParameterError(f"need a < b, got {self.a}, {self.b}")
        if any(not (self.a < x < self.b) for x in lams):
            raise ParameterError("gap eigenvalues must lie inside (a, b)")
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "constants", region_constants(self.a, self.b, 1.0))

    @property
    def region(self) -> RegionParams:
        return RegionParams(self.a, self.b, 0.0, 1.0)


def d_of_z(ctx: GapContext, z: complex) -> float:
    """min{dist(z, Gamma)^4 / K, dist(z, {lambda_j + i})}."""
    first = gamma_distance(ctx.region, z) ** 4 / ctx.constants.k
    if not ctx.lambdas:
        return first
    second = min(abs(z - (lam + 1j)) for lam in ctx.lambdas)
    return min(first, second)


def kato_interval(xi: float, eta: float, zeta: float):
    """Half-open interval (xi, eta + zeta^2/(eta - xi)] meeting the spectrum."""
    if not xi < eta:
        raise ParameterError(f"need xi < eta, got {xi}, {eta}")
    if zeta < 0:
        raise ParameterError("zeta must be non-negative")
    return xi, eta + zeta * zeta / (eta - xi)


def _check_unit_imag(z: complex):
    if not (0.0 <= z.imag <= 1.0):
        raise ParameterError(f"Im z must lie in [0, 1], got {z.imag}")


def nonreal_eig_interval(z: complex):
    """[Re z - w, Re z + w] with w = sqrt(Im z (1 - Im z))."""
    _check_unit_imag(z)
    w = math.sqrt(z.imag * (1.0 - z.imag))
    return z.real - w, z.real + w


def refined_eig_interval(z: complex, a_prime: float, b_prime: float):
    """Open interval containing the single eigenvalue of A in (a', b')."""
    _check_unit_imag(z)
    if not (a_prime < z.real < b_prime):
        raise ParameterError(f"Re z = {z.real} outside ({a_prime}, {b_prime})")
    q = z.imag * (1.0 - z.imag)
    return z.real - q / (b_prime - z.real), z.real + q / (z.real - a_prime)


def x_set_contains(spec: SpectrumModel, imag_lo: float, imag_hi: float, z: complex,
                   tol: float = 1e-10) -> bool:
    """Membership in X_A: the closed rectangle minus the gap regions U.

    A point inside some U but within `tol` of its boundary curve is kept.
    """
    if not imag_lo < imag_hi:
        raise ParameterError("need imag_lo < imag_hi")
    if not (spec.lo - tol <= z.real <= spec.hi + tol):
        return False
    if not (imag_lo - tol <= z.imag <= imag_hi + tol):
        return False
    for a, b in spec.gaps():
        p = RegionParams(a, b, imag_lo, imag_hi)
        if region_contains(p, z) and gamma_distance(p, z) > tol:
            return False
    return True


def swap(z: complex) -> complex:
    """Im z + i Re z."""
    return complex(z.imag, z.real)


def y_set_contains(spec_b: SpectrumModel, real_lo: float, real_hi: float, z: complex,
                   tol: float = 1e-10) -> bool:
    """Membership in Y_B via the swap z -> Im z + i Re z."""
    return x_set_contains(spec_b, real_lo, real_hi, swap(z), tol)


def violation_depth(spec: SpectrumModel, imag_lo: float, imag_hi: float, z: complex) -> float:
    """How far z sits outside X_A (0 when z belongs to it)."""
    depth = max(0.0, spec.lo - z.real, z.real - spec.hi, imag_lo - z.imag, z.imag - imag_hi)
    for a, b in spec.gaps():
        p = RegionParams(a, b, imag_lo, imag_hi)
        if region_contains(p, z):
            depth = max(depth, gamma_distance(p, z))
    return depth


def tau_map(z: complex) -> complex:
    """Fold a lifted eigenvalue back: Re z + (1 - Im z) i."""
    return complex(z.real, 1.0 - z.imag)
