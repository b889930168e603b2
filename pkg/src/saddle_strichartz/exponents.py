"""Exponent algebra on the Strichartz scaling line and the quadratic form Q."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from .errors import DomainError, ParaboloidSignatureError

__all__ = [
    "Signature",
    "ExponentTriple",
    "dual_exponent",
    "strichartz_q",
    "admissible_range",
    "critical_exponent",
    "critical_exponent_bisection",
    "kappa",
    "eval_Q",
]


@dataclass(frozen=True)
class Signature:
    """Sign pattern of Q(xi) = sum_j sigma_j xi_j^2 with d_plus (+1) and d_minus (-1).

    The stored sign vector is always ordered (+1, ..., +1, -1, ..., -1).
    """

    d_plus: int
    d_minus: int

    def __post_init__(self):
        if int(self.d_plus) != self.d_plus or int(self.d_minus) != self.d_minus:
            raise DomainError("sign counts must be integers")
        if self.d_plus < 0 or self.d_minus < 0:
            raise DomainError("sign counts must be non-negative")
        if self.d_plus == 0 or self.d_minus == 0:
            raise ParaboloidSignatureError(
                f"signature ({self.d_plus},{self.d_minus}) is a paraboloid; "
                "only hyperbolic forms (both signs present) are supported"
            )

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> "Signature":
        signs = list(signs)
        if any(s not in (1, -1) for s in signs):
            raise DomainError("signs must be +1 or -1")
        return cls(sum(1 for s in signs if s == 1), sum(1 for s in signs if s == -1))

    @property
    def d(self) -> int:
        return self.d_plus + self.d_minus

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0] * self.d_plus + [-1.0] * self.d_minus)

    def flipped(self) -> "Signature":
        """Signature of -Q."""
        return Signature(self.d_minus, self.d_plus)

    def canonical(self) -> Tuple["Signature", bool]:
        """Return the representative with d_plus >= d_minus and whether Q was negated."""
        if self.d_plus >= self.d_minus:
            return self, False
        return self.flipped(), True


def dual_exponent(p: float) -> float:
    if not p > 1:
        raise DomainError(f"dual exponent needs p > 1, got {p}")
    return p / (p - 1.0)


def strichartz_q(p: float, d: int) -> float:
    """Output exponent q = (d+2) p' / d forced by dilation invariance."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    return (d + 2) * dual_exponent(p) / d


def admissible_range(d: int) -> Tuple[float, float]:
    """Open interval (1, 2(d+1)/d) of input exponents p."""
    if d < 2:
        raise DomainError(f"hyperbolic forms need d >= 2, got {d}")
    return 1.0, 2.0 * (d + 1) / d


def _check_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise DomainError(f"critical exponent needs an integer d >= 2, got {d}")


def critical_exponent(d: int) -> float:
    """p_d, where (p/d)/(q-p) and (q-1)/2 coincide."""
    _check_dim(d)
    disc = (d * d - 8 * d - 4) ** 2 + 32 * d**3
    return (-d * d + 8 * d + 4 + math.sqrt(disc)) / (8 * d)


def _critical_gap(p: float, d: int) -> float:
    q = strichartz_q(p, d)
    return (p / d) / (q - p) - (q - 1.0) / 2.0


def critical_exponent_bisection(d: int, iterations: int = 200) -> float:
    """Root of (p/d)/(q(p)-p) - (q(p)-1)/2 on (2, 2(d+1)/d) by plain bisection.

    Independent of the closed form; used as a cross-check.
    """
    _check_dim(d)
    lo, hi = 2.0, 2.0 * (d + 1) / d
    # gap(2) = -2/d < 0 and gap -> +inf at the right end
    hi = math.nextafter(hi, lo)
    while _critical_gap(hi, d) <= 0:
        hi = 0.5 * (hi + 2.0 * (d + 1) / d)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _critical_gap(mid, d) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kappa(d: int) -> float:
    """kappa_d = (q_d - 1)/2 at p = p_d."""
    return (strichartz_q(critical_exponent(d), d) - 1.0) / 2.0


@dataclass(frozen=True)
class ExponentTriple:
    d: int
    p: float
    p_prime: float
    q: float
    kappa: Optional[float] = None

    @classmethod
    def from_p(cls, p: float, d: int) -> "ExponentTriple":
        lo, hi = admissible_range(d)
        if not lo < p < hi:
            raise DomainError(f"p={p} outside the admissible range ({lo}, {hi}) for d={d}")
        kap = kappa(d) if abs(p - critical_exponent(d)) <= 1e-9 else None
        return cls(d, float(p), dual_exponent(p), strichartz_q(p, d), kap)

    def __post_init__(self):
        lo, hi = admissible_range(self.d)
        if not lo < self.p < hi:
            raise DomainError(f"p={self.p} outside ({lo}, {hi})")
        if abs(self.p_prime - self.p / (self.p - 1)) > 1e-12 * self.p_prime:
            raise DomainError("p_prime is not the dual of p")
        if abs(self.q - (self.d + 2) * self.p_prime / self.d) > 1e-12 * self.q:
            raise DomainError("q is off the scaling line")
        if not self.q > self.p:
            raise DomainError("q must exceed p")


def eval_Q(sig: Signature, xi) -> float:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != sig.d:
        raise DomainError(f"point has {xi.shape[-1]} coordinates, signature needs {sig.d}")
    value = np.sum(sig.signs * xi**2, axis=-1)
    return float(value) if xi.ndim == 1 else value
