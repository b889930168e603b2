"""Delta-calculus kernel K of the saddle tau = xi1^2 - xi2^2 on R^2.

KF(eta, nu) = int delta_2(xi + omega - eta - nu) delta_1(Q(xi) + Q(omega) - Q(eta) - Q(nu))
              F(xi, omega) dxi domega

With alpha = xi + omega = eta + nu and beta = xi - omega the momentum delta is
resolved exactly and the energy delta leaves the hyperbola
(beta1^2 - beta2^2)/2 = c, c = Q(eta - nu)/2.  On each branch the hyperbolic
parametrization beta = sqrt(2|c|) (+-cosh u, sinh u) (c > 0) or
sqrt(2|c|) (sinh u, +-cosh u) (c < 0) gives dl/|beta| = du exactly, so

KF = (1/4) sum_branches int F((alpha + beta)/2, (alpha - beta)/2) du,

truncated to |beta| <= B, i.e. |u| <= arccosh(B^2 / (2|c|)) / 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, SingularityError
from .grid import GridFunction
from .quadrature import integrate_grid, integrate_interval, simpson_weights

__all__ = [
    "EULER_GAMMA",
    "DELTA_CALCULUS_FACTOR",
    "SingularLevelWarning",
    "bessel_K0",
    "kg_closed",
    "HyperbolaSlice",
    "hyperbola_slice",
    "k_apply_line_integral",
    "truncated_k1",
    "truncated_kg_l2",
    "log_slopes",
    "DivergenceTable",
    "k1_divergence_table",
    "kg_l2_divergence_table",
    "reflection_R",
    "symmetric_decompose",
    "inner4",
    "pairing_grid",
    "k_pairing",
    "tensor_square",
    "tensor_square_grid",
    "gaussian_tensor",
    "smooth_test_function",
    "kernel_check_points",
]

EULER_GAMMA = 0.57721566490153286060651209008240243
# ||Tf||_4^4 = (2 pi)^3 <K(f x f), f x f> with the standard Dirac deltas
DELTA_CALCULUS_FACTOR = (2 * math.pi) ** 3


class SingularLevelWarning(RuntimeWarning):
    """The constraint level c = 0: |grad h| vanishes at beta = 0."""


# -- modified Bessel function K0 ----------------------------------------------

_SERIES_TERMS = 30
_CF_MAXIT = 10_000


def _k0_series(x):
    # K0 = -(ln(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k
    y = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        term = term * y / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        tail = tail + term * harmonic
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k0_steed(x):
    # Steed's algorithm for Temme's second continued fraction (order 0), x >= 2
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = np.full_like(x, -a1)
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _CF_MAXIT):
        a = a - 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        dels = q * delh
        s = np.where(done, s, s + dels)
        done |= np.abs(dels / s) < 1e-17
        if np.all(done):
            break
    return np.sqrt(math.pi / (2.0 * x)) * np.exp(-x) / s


def bessel_K0(x):
    """Modified Bessel function of the second kind, order zero, for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("K0 is defined for x > 0 (logarithmic singularity at 0)")
    flat = arr.ravel()
    out = np.empty_like(flat)
    small = flat <= 2.0
    if np.any(small):
        out[small] = _k0_series(flat[small])
    if np.any(~small):
        out[~small] = _k0_steed(flat[~small])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def _k0_grid(x):
    """K0 that returns +inf at 0 instead of raising; for grid sweeps."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.inf)
    pos = x > 0
    if np.any(pos):
        out[pos] = bessel_K0(x[pos])
    return out


def kg_closed(eta, nu):
    """K(g x g)(eta, nu) = (1/2) exp(-pi|eta+nu|^2/4) K0(pi |(eta1-nu1)^2 - (eta2-nu2)^2| / 4)."""
    eta = np.asarray(eta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    arg = 0.25 * math.pi * np.abs((eta[..., 0] - nu[..., 0]) ** 2 - (eta[..., 1] - nu[..., 1]) ** 2)
    if np.any(arg < 1e-300):
        raise SingularityError("(eta1-nu1)^2 = (eta2-nu2)^2: K(g x g) is +infinity there")
    s = eta + nu
    value = 0.5 * np.exp(-0.25 * math.pi * np.sum(s * s, axis=-1)) * bessel_K0(arg)
    return float(value) if np.ndim(value) == 0 else value


# -- hyperbola slices and the line integral ------------------------------------

@dataclass(frozen=True)
class HyperbolaSlice:
    """The curve {beta : (beta1^2 - beta2^2)/2 = level, |beta| <= cutoff}."""

    level: float
    cutoff: float

    @property
    def degenerate(self) -> bool:
        return self.level == 0.0

    @property
    def half_length(self) -> float:
        """Range of the branch parameter u (or log-radius extent for c = 0)."""
        if self.degenerate:
            return math.inf
        ratio = self.cutoff**2 / (2.0 * abs(self.level))
        return 0.5 * math.acosh(ratio) if ratio > 1.0 else 0.0

    @property
    def arcs(self) -> int:
        return 4 if self.degenerate else 2

    def points(self, u):
        """Branch points beta(u) for each arc; shape (arcs, len(u), 2)."""
        u = np.asarray(u, dtype=float)
        if self.degenerate:
            rays = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]) / math.sqrt(2.0)
            return rays[:, None, :] * u[None, :, None]
        r = math.sqrt(2.0 * abs(self.level))
        ch, sh = r * np.cosh(u), r * np.sinh(u)
        if self.level > 0:
            return np.stack([np.stack([ch, sh], -1), np.stack([-ch, sh], -1)])
        return np.stack([np.stack([sh, ch], -1), np.stack([sh, -ch], -1)])


def hyperbola_slice(eta, nu, cutoff: float) -> Tuple[np.ndarray, HyperbolaSlice]:
    eta = np.asarray(eta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    level = 0.5 * ((eta[0] - nu[0]) ** 2 - (eta[1] - nu[1]) ** 2)
    return eta + nu, HyperbolaSlice(float(level), float(cutoff))


def _call_F(F, alpha, beta):
    """F at xi = (alpha+beta)/2, omega = (alpha-beta)/2; beta has trailing axis 2."""
    xi = 0.5 * (alpha + beta)
    om = 0.5 * (alpha - beta)
    if isinstance(F, GridFunction):
        return F.interpolate(xi[..., 0], xi[..., 1], om[..., 0], om[..., 1])
    return np.asarray(F(xi[..., 0], xi[..., 1], om[..., 0], om[..., 1]), dtype=complex)


def k_apply_line_integral(F, eta, nu, cutoff: float = 12.0, nodes: int = 401) -> complex:
    """KF(eta, nu) truncated to |beta| <= cutoff, by Simpson's rule along each branch.

    ``F`` is a GridFunction on R^4 (interpolated multilinearly) or a callable
    F(xi1, xi2, omega1, omega2).  At the degenerate level c = 0 the integral
    diverges logarithmically unless F vanishes at beta = 0; a
    SingularLevelWarning is issued and +inf returned in that case.
    """
    if cutoff <= 0:
        raise DomainError("cutoff must be positive")
    if nodes < 3 or nodes % 2 == 0:
        raise DomainError("node count must be odd and >= 3")
    alpha, sl = hyperbola_slice(eta, nu, cutoff)
    if sl.degenerate:
        return _degenerate_line_integral(F, alpha, sl, nodes)
    U = sl.half_length
    if U == 0.0:
        return 0j
    u = np.linspace(-U, U, nodes)
    w = simpson_weights(nodes, u[1] - u[0])
    vals = _call_F(F, alpha, sl.points(u))
    return complex(0.25 * np.sum(vals * w[None, :]))


def _degenerate_line_integral(F, alpha, sl: HyperbolaSlice, nodes: int) -> complex:
    centre = _call_F(F, alpha, np.zeros((1, 2)))[0]
    if abs(centre) > 0:
        warnings.warn("constraint level c = 0: |grad h| = |beta| vanishes at the origin and "
                      "F(alpha/2, alpha/2) != 0, so KF diverges logarithmically",
                      SingularLevelWarning, stacklevel=3)
        return complex(math.inf)
    # F vanishes at beta = 0: rays with dl/|beta| = d(rho)/rho = d(log rho)
    v = np.linspace(math.log(sl.cutoff) - 60.0, math.log(sl.cutoff), nodes)
    w = simpson_weights(nodes, v[1] - v[0])
    vals = _call_F(F, alpha, sl.points(np.exp(v)))
    return complex(0.25 * np.sum(vals * w[None, :]))


def truncated_k1(eta, nu, cutoff: float) -> float:
    """K1(eta, nu) with |beta| <= cutoff; grows like log(cutoff)."""
    one = lambda a, b, c, d: np.ones(np.shape(a))
    return k_apply_line_integral(one, eta, nu, cutoff).real


def truncated_kg_l2(cutoff: float, tol=(1e-13, 1e-11)) -> float:
    """||Kg||_2^2 with the inner y-integral cut at y <= cutoff.

    (1/2) int_{|x| <= Y} K0(pi|x|/4)^2 (1/4) arccosh(Y/|x|) dx, which grows
    like (pi/4) log Y.
    """
    if not cutoff > 1:
        raise DomainError("cutoff must exceed 1")
    Y = float(cutoff)

    def integrand(x):
        return bessel_K0(0.25 * math.pi * x) ** 2 * np.arccosh(Y / x)

    # even integrand: (1/2)(1/4) * 2 * int_0^Y
    return 0.25 * integrate_interval(integrand, 0.0, Y, tol=tol).value.real


def log_slopes(cutoffs: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Successive slopes of value against log(cutoff)."""
    c = np.log(np.asarray(cutoffs, dtype=float))
    v = np.asarray(values, dtype=float)
    return np.diff(v) / np.diff(c)


@dataclass(frozen=True)
class DivergenceTable:
    """Values of a truncated divergent quantity against its cutoff."""

    cutoffs: Tuple[float, ...]
    values: Tuple[float, ...]

    @property
    def slopes(self) -> np.ndarray:
        return log_slopes(self.cutoffs, self.values)

    @property
    def mean_slope(self) -> float:
        return float(np.mean(self.slopes))

    @property
    def relative_dispersion(self) -> float:
        sl = self.slopes
        return float((sl.max() - sl.min()) / abs(sl.mean()))

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0))

    def rows(self) -> List[dict]:
        out = []
        slopes = [math.nan] + list(self.slopes)
        for B, v, sl in zip(self.cutoffs, self.values, slopes):
            out.append({"cutoff": B, "value": v, "log_slope": sl})
        return out


def k1_divergence_table(eta=(0.3, 0.1), nu=(-0.2, 0.5),
                        cutoffs: Sequence[float] = (8, 16, 32, 64)) -> DivergenceTable:
    values = tuple(truncated_k1(eta, nu, B) for B in cutoffs)
    return DivergenceTable(tuple(float(B) for B in cutoffs), values)


def kg_l2_divergence_table(cutoffs: Sequence[float] = (10, 20, 40, 80)) -> DivergenceTable:
    values = tuple(truncated_kg_l2(Y) for Y in cutoffs)
    return DivergenceTable(tuple(float(Y) for Y in cutoffs), values)


# -- reflection algebra ---------------------------------------------------------

def _check_reflection_grid(F: GridFunction):
    if F.n_axes != 4:
        raise DomainError("reflection acts on functions of four variables")
    if (F.counts[0] != F.counts[2] or abs(F.lower[0] - F.lower[2]) > 1e-14
            or abs(F.upper[0] - F.upper[2]) > 1e-14):
        raise DomainError("axes 1 and 3 must carry identical grids for the reflection")


def reflection_R(F: GridFunction) -> GridFunction:
    """R(F)(eta1, eta2, nu1, nu2) = F(nu1, eta2, eta1, nu2)."""
    _check_reflection_grid(F)
    return F.with_samples(np.transpose(F.samples, (2, 1, 0, 3)).copy())


def symmetric_decompose(F: GridFunction) -> Tuple[GridFunction, GridFunction]:
    RF = reflection_R(F)
    return (F + RF) * 0.5, (F - RF) * 0.5


def inner4(F: GridFunction, G: GridFunction) -> complex:
    """<F, G> = int F conj(G) by grid quadrature."""
    return integrate_grid(F.with_samples(F.samples * np.conj(G.samples)))


# -- the pairing <KF, F> ----------------------------------------------------------

# Offsetting the nu2 axis by h/6 keeps every node off the singular set
# |eta1-nu1| = |eta2-nu2| and cancels the leading O(h) error of sampling the
# logarithmic singularity (the lattice sum of log|k + theta| matches the
# integral when 2 sin(pi theta) = 1).
PAIRING_OFFSET = 1.0 / 6.0


def pairing_grid(n: int = 24, box: float = 2.0) -> Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[int, ...]]:
    """Default (lower, upper, counts) for pairing grids on R^4."""
    h = 2 * box / (n - 1)
    shift = PAIRING_OFFSET * h
    lower = (-box, -box, -box, -box + shift)
    upper = (box, box, box, box + shift)
    return lower, upper, (n, n, n, n)


def tensor_square(f, lower, upper, counts) -> GridFunction:
    """(f x f)(eta, nu) = f(eta) f(nu) sampled on a 4-D grid; f is a callable of (a, b)."""
    return GridFunction.from_callable(lambda a, b, c, d: f(a, b) * f(c, d), lower, upper, counts)


def tensor_square_grid(f: GridFunction, n: int = 24, box: float = 2.0) -> GridFunction:
    """f x f on the pairing grid, with f resampled by a cubic spline."""
    if f.n_axes != 2:
        raise DomainError("tensor square needs a function on R^2")
    return GridFunction.from_callable(
        lambda a, b, c, d: f.interpolate(a, b, order=3) * f.interpolate(c, d, order=3),
        *pairing_grid(n, box))


def gaussian_tensor(a, b, c, d):
    return np.exp(-0.5 * math.pi * (a * a + b * b + c * c + d * d))


def k_pairing(F: GridFunction, cutoff: float = 12.0, evaluator: Optional[Callable] = None,
              nodes: int = 101, batch: int = 4096, fourier_normalized: bool = True) -> float:
    """<KF, F> by grid quadrature of conj(F) KF, KF from hyperbola line integrals.

    The outer sum runs over the nodes of ``F`` with Simpson weights.  The inner
    line integrals sample ``evaluator`` when given (an exact callable for F),
    otherwise F itself by multilinear interpolation.  With
    ``fourier_normalized`` the result carries the (2 pi)^3 of the delta
    calculus, so that k_pairing(f x f) = ||Tf||_4^4.
    """
    if F.n_axes != 4:
        raise DomainError("pairing needs a function of four variables")
    if nodes < 3 or nodes % 2 == 0:
        raise DomainError("node count must be odd and >= 3")
    source = evaluator if evaluator is not None else F
    mesh = F.mesh()
    e1, e2, n1, n2 = (m.ravel() for m in mesh)
    weights = np.ones(1)
    for axis in range(4):
        weights = np.multiply.outer(weights, simpson_weights(F.counts[axis], F.spacing[axis]))
    weights = weights.ravel()
    conjF = np.conj(F.samples.ravel())
    active = np.nonzero((weights != 0) & (conjF != 0))[0]
    t = np.linspace(-1.0, 1.0, nodes)
    wt = simpson_weights(nodes, t[1] - t[0])
    total = 0j
    for start in range(0, len(active), batch):
        idx = active[start:start + batch]
        a1, a2 = e1[idx] + n1[idx], e2[idx] + n2[idx]
        level = 0.5 * ((e1[idx] - n1[idx]) ** 2 - (e2[idx] - n2[idx]) ** 2)
        if np.any(level == 0.0):
            raise SingularityError("a pairing node lies on the singular set; offset the grid")
        ratio = cutoff**2 / (2.0 * np.abs(level))
        U = np.where(ratio > 1.0, 0.5 * np.arccosh(np.maximum(ratio, 1.0)), 0.0)
        u = U[:, None] * t[None, :]
        r = np.sqrt(2.0 * np.abs(level))[:, None]
        ch, sh = r * np.cosh(u), r * np.sinh(u)
        pos = (level > 0)[:, None]
        alpha = np.stack([np.broadcast_to(a1[:, None], u.shape),
                          np.broadcast_to(a2[:, None], u.shape)], -1)
        # the two branches of the hyperbola
        branch_a = np.stack([np.where(pos, ch, sh), np.where(pos, sh, ch)], -1)
        branch_b = np.stack([np.where(pos, -ch, sh), np.where(pos, sh, -ch)], -1)
        vals = _call_F(source, alpha, branch_a) + _call_F(source, alpha, branch_b)
        kf = 0.25 * (vals @ wt) * U
        total += np.sum(weights[idx] * conjF[idx] * kf)
    value = total.real
    return value * DELTA_CALCULUS_FACTOR if fourier_normalized else value


def smooth_test_function(seed: int, n: int = 16, box: float = 2.0, terms: int = 4) -> GridFunction:
    """Seeded complex F on R^4: a Gaussian envelope times random plane-wave cosines.

    Not R-symmetric in general; sampled on the pairing grid.
    """
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    freqs = rng.normal(size=(terms, 4))

    def fn(a, b, c, d):
        x = np.stack([a, b, c, d])
        out = np.zeros(np.shape(a), dtype=complex)
        for amp, k in zip(amps, freqs):
            out += amp * np.cos(np.tensordot(k, x, 1))
        return gaussian_tensor(a, b, c, d) * out

    return GridFunction.from_callable(fn, *pairing_grid(n, box))


def kernel_check_points(seed: int, count: int = 10, radius: float = 1.5,
                        min_level: float = 1e-2) -> np.ndarray:
    """Seeded (eta, nu) pairs in [-radius, radius]^4 away from the singular set; shape (count, 4)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        pt = rng.uniform(-radius, radius, 4)
        if abs((pt[0] - pt[2]) ** 2 - (pt[1] - pt[3]) ** 2) > min_level:
            out.append(pt)
    return np.array(out)
