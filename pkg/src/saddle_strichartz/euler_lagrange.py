"""First variation of the Strichartz quotient at the Gaussian.

Three independent non-criticality witnesses live here:

* ``criticality_residual``: the normalized Euler-Lagrange left-hand side is
  not constant in (r+, r-) = (|xi+|^2, |xi-|^2);
* ``moment`` / ``diagonal_moment``: the derivative moments at the origin, all
  of which would vanish at a critical point;
* ``first_variation``: Psi'(0) for explicit perturbations, by an exact
  pairing against the EL weight and, for p = 2, by finite differences of the
  discretized quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateChangeError, DomainError
from .exponents import Signature, admissible_range, critical_exponent, kappa, strichartz_q
from .grid import GridFunction
from .quadrature import integrate_grid, integrate_line, principal_half_power

__all__ = [
    "MomentReport",
    "CriticalityReport",
    "FirstVariation",
    "el_weight",
    "el_weight_many",
    "el_lhs_normalized",
    "el_lhs_constant",
    "criticality_residual",
    "A_of_s",
    "B_of_s",
    "moment",
    "moments",
    "phi_inverse",
    "gamma_inverse",
    "diagonal_moment",
    "diagonal_moments",
    "project_orthogonal",
    "first_variation",
    "first_variation_fd",
    "perturbation_dictionary",
    "first_variation_witness",
]

NONZERO_FACTOR = 10.0


@dataclass
class MomentReport:
    k: int
    value: complex
    abs_error: float

    @property
    def nonzero_at_tolerance(self) -> bool:
        return abs(self.value) > NONZERO_FACTOR * self.abs_error


@dataclass
class CriticalityReport:
    lambda_estimate: complex
    residual: float
    combined_error: float
    sample_points: List[Tuple[float, float]]
    values: List[complex] = field(default_factory=list)
    witness_k: Optional[int] = None

    @property
    def witnessed(self) -> bool:
        return self.residual > NONZERO_FACTOR * self.combined_error


def _exponents(p: float, sig: Signature) -> Tuple[int, float]:
    d = sig.d
    lo, hi = admissible_range(d)
    if not lo < p < hi:
        raise DomainError(f"p={p} outside the admissible range ({lo}, {hi}) for d={d}")
    return d, strichartz_q(p, d)


def _decay(d: int, q: float) -> float:
    """Algebraic decay rate of every s- or t-integrand below."""
    return d * (q - 2) / 2.0


def _master(s, q: float, sig: Signature):
    """(1+4s^2)^(-d(q-2)/4) ((1+2is)/(q-1+2is))^(d+/2) ((1-2is)/(q-1-2is))^(d-/2)."""
    s = np.asarray(s, dtype=float)
    d = sig.d
    plus = principal_half_power((1 + 2j * s) / (q - 1 + 2j * s), sig.d_plus)
    minus = principal_half_power((1 - 2j * s) / (q - 1 - 2j * s), sig.d_minus)
    return (1 + 4 * s * s) ** (-d * (q - 2) / 4.0) * plus * minus


def _moment_kernel(s, p: float, q: float, d: int):
    s = np.asarray(s, dtype=float)
    return ((p / d) ** 2 + s * s * (q - p) ** 2) / ((q - 1) ** 2 + 4 * s * s)


# -- Euler-Lagrange weight ----------------------------------------------------

def el_weight_many(xi, p: float, sig: Signature, tol=None):
    """EL weight at many points at once; ``xi`` has shape (m, d).

    Returns (values, abs_errors), both of shape (m,).  The t-integrand is the
    one of the Euler-Lagrange equation before any change of variables.
    """
    d, q = _exponents(p, sig)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != d:
        raise DomainError(f"points have {xi.shape[1]} coordinates, signature needs {d}")
    sq = xi * xi
    Q = sq @ sig.signs
    signs = sig.signs

    def integrand(t):
        t = t[:, None]
        pref = (0.25 + t * t / math.pi**2) ** (-d * (q - 2) / 4.0)
        expo = -1j * t * Q[None, :]
        ratio = 1.0 + 0j
        for k in range(d):
            num = 0.5 + 1j * signs[k] * t / math.pi
            den = 0.5 * (q - 1) + 1j * signs[k] * t / math.pi
            ratio = ratio * principal_half_power(num / den, 1)
            expo = expo - sq[None, :, k] * (math.pi**2 + 4 * t * t) / (4 * math.pi * den)
        return pref * ratio * np.exp(expo)

    res = integrate_line(integrand, tol=tol, decay=_decay(d, q))
    return np.atleast_1d(res.value), np.atleast_1d(res.abs_error_estimate)


def el_weight(xi, p: float, sig: Signature, tol=None) -> complex:
    values, _ = el_weight_many(np.reshape(xi, (1, -1)), p, sig, tol)
    return complex(values[0])


def el_lhs_constant(p: float, sig: Signature) -> float:
    """el_weight(xi) = el_lhs_constant * exp(-pi (p-1)|xi|^2/2) * el_lhs_normalized(r+, r-)."""
    d, q = _exponents(p, sig)
    return math.pi * 4.0 ** (d * (q - 2) / 4.0)


# -- normalized left-hand side -------------------------------------------------

def _lhs_integrand(q, p, sig, r_plus, r_minus):
    d = sig.d
    r_plus = np.atleast_1d(np.asarray(r_plus, dtype=float))
    r_minus = np.atleast_1d(np.asarray(r_minus, dtype=float))
    lead = -2.0 * p / d

    def integrand(s):
        s = s[:, None]
        a_plus = (lead + 2j * s * (q - p)) / (q - 1 + 2j * s)
        a_minus = (lead - 2j * s * (q - p)) / (q - 1 - 2j * s)
        expo = -0.5 * math.pi * (r_plus[None, :] * a_plus + r_minus[None, :] * a_minus)
        return _master(s, q, sig) * np.exp(expo)

    return integrand


def el_lhs_normalized(r_plus: float, r_minus: float, p: float, sig: Signature,
                      tol=None, return_error: bool = False):
    """Left-hand side of the normalized Euler-Lagrange identity at (r+, r-).

    Constant in (r+, r-) iff the Gaussian satisfies the EL equation.
    """
    if r_plus < 0 or r_minus < 0:
        raise DomainError("r+ and r- are squared radii and must be >= 0")
    d, q = _exponents(p, sig)
    res = integrate_line(_lhs_integrand(q, p, sig, r_plus, r_minus), tol=tol, decay=_decay(d, q))
    value, err = complex(np.ravel(res.value)[0]), float(np.ravel(res.abs_error_estimate)[0])
    return (value, err) if return_error else value


def criticality_residual(p: float, sig: Signature, samples: Sequence[Tuple[float, float]],
                         tol=None, k_max: int = 5) -> CriticalityReport:
    """Spread of the normalized EL left-hand side over sample points.

    A residual above ten times the combined quadrature error shows that no
    constant lambda can satisfy the identity, i.e. g is not critical.
    """
    samples = [(float(a), float(b)) for a, b in samples]
    if not samples:
        raise DomainError("need at least one sample point")
    if any(a < 0 or b < 0 for a, b in samples):
        raise DomainError("sample radii must be >= 0")
    d, q = _exponents(p, sig)
    pts = [(0.0, 0.0)] + [s for s in samples if s != (0.0, 0.0)]
    rp = np.array([a for a, _ in pts])
    rm = np.array([b for _, b in pts])
    res = integrate_line(_lhs_integrand(q, p, sig, rp, rm), tol=tol, decay=_decay(d, q))
    values = np.atleast_1d(res.value)
    errors = np.atleast_1d(res.abs_error_estimate)
    origin = values[0]
    scale = abs(origin)
    deviations = np.abs(values - origin) / scale
    residual = float(deviations.max()) if len(values) > 1 else 0.0
    # |dL|/|L0| error: both terms, plus the relative error of the normalization
    combined = float(np.max((errors + errors[0]) / scale + deviations * errors[0] / scale))
    witness = None
    for report in moments(k_max, p, sig, tol=tol):
        if report.nonzero_at_tolerance:
            witness = report.k
            break
    return CriticalityReport(complex(origin), residual, combined, pts,
                             [complex(v) for v in values], witness)


# -- moment sequences -----------------------------------------------------------

def A_of_s(s, p: float, sig: Signature):
    """Real part of the master integrand; even in s."""
    d, q = _exponents(p, sig)
    value = _master(s, q, sig).real
    return float(value) if np.ndim(value) == 0 else value


def B_of_s(s, p: float, sig: Signature):
    d, q = _exponents(p, sig)
    value = _moment_kernel(s, p, q, d) * _master(s, q, sig).real
    return float(value) if np.ndim(value) == 0 else value


def moments(k_max: int, p: float, sig: Signature, tol=None) -> List[MomentReport]:
    """M_1 .. M_kmax from one shared quadrature."""
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    d, q = _exponents(p, sig)
    ks = np.arange(1, k_max + 1)

    def integrand(s):
        kern = _moment_kernel(s, p, q, d)[:, None] ** ks[None, :]
        return kern * _master(s, q, sig)[:, None]

    res = integrate_line(integrand, tol=tol, decay=_decay(d, q))
    return [MomentReport(int(k), complex(v), float(e))
            for k, v, e in zip(ks, np.atleast_1d(res.value), np.atleast_1d(res.abs_error_estimate))]


def moment(k: int, p: float, sig: Signature, tol=None) -> MomentReport:
    """k-th mixed derivative moment of the normalized EL identity at the origin."""
    if k < 1:
        raise DomainError("moment index must be >= 1")
    return moments(k, p, sig, tol)[-1]


def phi_inverse(s, p: float, d: int):
    """(p^2/d^2 + s^2 (q-p)^2) / ((q-1)^2 + 4 s^2); degenerate at p = p_d."""
    lo, hi = admissible_range(d)
    if not lo < p < hi:
        raise DomainError(f"p={p} outside ({lo}, {hi})")
    if abs(p - critical_exponent(d)) <= 1e-9:
        raise DegenerateChangeError(
            f"p={p} is the critical exponent p_{d}; the change of variables is constant")
    value = _moment_kernel(s, p, strichartz_q(p, d), d)
    return float(value) if np.ndim(value) == 0 else value


def gamma_inverse(s, kappa_value: float):
    """(s^2 - kappa^2)/(s^2 + kappa^2), a bijection (0, inf) -> (-1, 1)."""
    if not kappa_value > 0:
        raise DomainError("kappa must be positive")
    s = np.asarray(s, dtype=float)
    k2 = kappa_value * kappa_value
    value = (s * s - k2) / (s * s + k2)
    return float(value) if np.ndim(value) == 0 else value


def diagonal_moments(k_max: int, d: int, sig: Signature, tol=None) -> List[MomentReport]:
    if sig.d != d:
        raise DomainError(f"signature dimension {sig.d} differs from d={d}")
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    p_d = critical_exponent(d)
    q_d = strichartz_q(p_d, d)
    kap = kappa(d)
    ks = np.arange(1, k_max + 1)

    def integrand(s):
        kern = gamma_inverse(s, kap)[:, None] ** ks[None, :]
        return kern * _master(s, q_d, sig)[:, None]

    res = integrate_line(integrand, tol=tol, decay=_decay(d, q_d))
    return [MomentReport(int(k), complex(v), float(e))
            for k, v, e in zip(ks, np.atleast_1d(res.value), np.atleast_1d(res.abs_error_estimate))]


def diagonal_moment(k: int, d: int, sig: Signature, tol=None) -> MomentReport:
    """Moment of the EL identity along the diagonal r+ = r- at p = p_d."""
    if k < 1:
        raise DomainError("moment index must be >= 1")
    return diagonal_moments(k, d, sig, tol)[-1]


# -- perturbations and the first variation -------------------------------------

def _gaussian_power(phi: GridFunction, p: float) -> np.ndarray:
    r2 = sum(c * c for c in phi.mesh())
    return np.exp(-0.5 * math.pi * (p - 1) * r2)


def project_orthogonal(phi: GridFunction, p: float) -> GridFunction:
    """Remove the component of phi along g^(p-1) so that int g^(p-1) phi = 0."""
    w = _gaussian_power(phi, p)
    num = integrate_grid(phi * w)
    den = integrate_grid(phi.with_samples(w * w))
    return phi.with_samples(phi.samples - (num / den.real) * w)


def first_variation(phi: GridFunction, p: float, sig: Signature, tol=None,
                    return_error: bool = False):
    """Psi'(0) in reduced normalization: Re int conj(phi) * el_weight.

    The true derivative is this value times (2 pi)^d ||Tg||_q^(1-q) / ||g||_p.
    The EL weight depends on xi only through the squares xi_k^2, so it is
    evaluated once per distinct tuple of squared coordinates.
    """
    if phi.n_axes != sig.d:
        raise DomainError("phi must live on a grid matching the signature dimension")
    mesh = phi.mesh()
    sq = np.stack([np.round(c * c, 14).ravel() for c in mesh], axis=1)
    unique, inverse = np.unique(sq, axis=0, return_inverse=True)
    values, errors = el_weight_many(np.sqrt(unique), p, sig, tol)
    weight = values[np.ravel(inverse)].reshape(phi.counts)
    err = errors[np.ravel(inverse)].reshape(phi.counts)
    pairing = integrate_grid(phi.with_samples(np.conj(phi.samples) * weight)).real
    bound = integrate_grid(phi.with_samples(np.abs(phi.samples) * err)).real
    return (float(pairing), float(abs(bound))) if return_error else float(pairing)


@dataclass
class FirstVariation:
    label: str
    pairing: float
    pairing_error: float
    finite_difference: Optional[float]

    @property
    def discrepancy(self) -> float:
        if self.finite_difference is None:
            return math.nan
        return abs(self.pairing - self.finite_difference)

    @property
    def relative_discrepancy(self) -> float:
        return self.discrepancy / abs(self.pairing)

    @property
    def combined_error(self) -> float:
        extra = 0.0 if self.finite_difference is None else self.discrepancy
        return self.pairing_error + extra

    @property
    def witnessed(self) -> bool:
        return abs(self.pairing) > NONZERO_FACTOR * self.combined_error


def first_variation_fd(phi: GridFunction, sig: Signature, eps: float = 1e-4,
                       config=None) -> float:
    """Psi'(0) for p = 2 by central differences of the discretized quotient.

    Psi(eps) = Lambda(g + eps phi)^(1/4) is evaluated with the slice machinery
    of the extremizer search; one Richardson step combines eps and eps/2.  The
    result is returned in the reduced normalization of ``first_variation``.
    """
    from .extremizer_search import SliceConfig, strichartz_norm4

    if sig != Signature(1, 1) and sig != Signature(1, 1).flipped():
        raise DomainError("finite-difference path is implemented for the d=2 saddle")
    config = config or SliceConfig()
    g = phi.with_samples(_gaussian_power(phi, 2.0))

    def psi(e):
        f = g + phi * e
        n4 = strichartz_norm4(f, config)
        norm2 = float(np.sum(np.abs(f.samples) ** 2) * np.prod(f.spacing))
        return n4 ** 0.25 / math.sqrt(norm2)

    def central(h):
        return (psi(h) - psi(-h)) / (2 * h)

    derivative = (4 * central(eps / 2) - central(eps)) / 3
    n4_g = strichartz_norm4(g, config)
    norm_g = math.sqrt(float(np.sum(np.abs(g.samples) ** 2) * np.prod(g.spacing)))
    return derivative * norm_g * n4_g ** 0.75 / (2 * math.pi) ** 2


def perturbation_dictionary(box: float = 6.0, n: int = 64, p: float = 2.0):
    """Low-order profiles times the Gaussian envelope, projected orthogonal to g^(p-1).

    Returns a list of (label, GridFunction).
    """
    profiles = [
        ("xi1^2", lambda a, b: a * a),
        ("xi2^2", lambda a, b: b * b),
        ("xi1^2-xi2^2", lambda a, b: a * a - b * b),
        ("|xi|^2", lambda a, b: a * a + b * b),
        ("|xi|^4", lambda a, b: (a * a + b * b) ** 2),
        ("xi1^2*xi2^2", lambda a, b: a * a * b * b),
        ("xi1^4", lambda a, b: a**4),
    ]
    out = []
    for label, prof in profiles:
        phi = GridFunction.symmetric(
            lambda a, b, prof=prof: prof(a, b) * np.exp(-0.5 * math.pi * (a * a + b * b)), box, n)
        out.append((label, project_orthogonal(phi, p)))
    return out


def first_variation_witness(sig: Signature = Signature(1, 1), p: float = 2.0, box: float = 6.0,
                            n: int = 64, fd: bool = True, tol=None) -> List[FirstVariation]:
    """Evaluate Psi'(0) over the perturbation dictionary, both paths when p = 2."""
    results = []
    for label, phi in perturbation_dictionary(box, n, p):
        pairing, err = first_variation(phi, p, sig, tol=tol, return_error=True)
        fd_value = first_variation_fd(phi, sig) if (fd and p == 2.0 and sig.d == 2) else None
        results.append(FirstVariation(label, pairing, err, fd_value))
    return results
