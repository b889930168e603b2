"""Extension of the L^2-normalized Gaussian, in closed form and by quadrature."""

from __future__ import annotations

import math

import numpy as np

from .errors import DivergenceError, DomainError, ResolutionError
from .exponents import Signature
from .grid import GridFunction
from .quadrature import integrate_grid, integrate_line, principal_half_power, simpson_weights

__all__ = [
    "gaussian",
    "gaussian_grid",
    "extension_gaussian_closed",
    "extension_abs_gaussian",
    "extension_numeric",
    "gaussian_strichartz_norm",
    "gaussian_strichartz_norm_grid",
]


def gaussian(xi) -> np.ndarray:
    """g(xi) = exp(-pi |xi|^2 / 2); the last axis indexes coordinates."""
    xi = np.asarray(xi, dtype=float)
    return np.exp(-0.5 * math.pi * np.sum(xi * xi, axis=-1))


def gaussian_grid(box: float = 6.0, n: int = 128, n_axes: int = 2) -> GridFunction:
    return GridFunction.symmetric(lambda *c: np.exp(-0.5 * math.pi * sum(x * x for x in c)),
                                  box, n, n_axes)


def _as_point(sig: Signature, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sig.d:
        raise DomainError(f"x has {x.shape[-1]} coordinates, signature needs {sig.d}")
    return x


def extension_gaussian_closed(sig: Signature, x, t):
    """Tg(x, t) as a product of one-dimensional Fresnel-Gaussian factors.

    ``x`` may carry leading batch axes; ``t`` broadcasts against them.
    """
    x = _as_point(sig, x)
    t = np.asarray(t, dtype=float)
    value = 1.0 + 0j
    for k, sigma in enumerate(sig.signs):
        base = 0.5 - 1j * sigma * t / math.pi
        value = value * principal_half_power(base, -1) * np.exp(-x[..., k] ** 2 / (4 * math.pi * base))
    return complex(value) if np.ndim(value) == 0 else value


def extension_abs_gaussian(d: int, x, t):
    """|Tg(x, t)|; the same for every signature of dimension d."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.shape[-1] != d:
        raise DomainError(f"x has {x.shape[-1]} coordinates, expected {d}")
    r2 = np.sum(x * x, axis=-1)
    value = (0.25 + t * t / math.pi**2) ** (-d / 4.0) * np.exp(
        -math.pi * r2 / (2.0 * (math.pi**2 + 4.0 * t * t)))
    return float(value) if np.ndim(value) == 0 else value


def _nyquist_check(f: GridFunction, x, t):
    for j, (lo, hi, h) in enumerate(zip(f.lower, f.upper, f.spacing)):
        reach = abs(x[j]) + 2.0 * abs(t) * max(abs(lo), abs(hi))
        if reach > math.pi / h:
            raise ResolutionError(
                f"axis {j}: phase frequency {reach:.4g} exceeds Nyquist {math.pi / h:.4g}; "
                "refine the grid or reduce |x|, |t|")


def extension_numeric(f: GridFunction, sig: Signature, x, t: float) -> complex:
    """Tf(x, t) = int exp(i x.xi + i t Q(xi)) f(xi) dxi by Simpson quadrature on f's grid."""
    if f.n_axes != sig.d:
        raise DomainError("grid dimension does not match the signature")
    x = np.asarray(x, dtype=float).reshape(sig.d)
    _nyquist_check(f, x, t)
    # separable phase: one 1-D factor per axis, then weighted contraction
    values = f.samples
    for axis, (grid_axis, sigma) in enumerate(zip(f.axes, sig.signs)):
        factor = np.exp(1j * (x[axis] * grid_axis + t * sigma * grid_axis**2))
        factor = factor * simpson_weights(f.counts[axis], f.spacing[axis])
        values = np.tensordot(factor, values, axes=([0], [0]))
    return complex(values)


def _check_q(d: int, q: float):
    threshold = 2.0 * (d + 1) / d
    if not q > threshold:
        raise DivergenceError(f"||Tg||_q diverges for q <= 2(d+1)/d = {threshold}")


def gaussian_strichartz_norm(d: int, q: float, tol=(1e-14, 1e-14)) -> float:
    """||Tg||_q^q, with the Gaussian x-integral done in closed form."""
    _check_q(d, q)

    def integrand(t):
        w = math.pi**2 + 4.0 * t * t
        return (w / (4 * math.pi**2)) ** (-d * q / 4.0) * (2.0 * w / q) ** (d / 2.0)

    return float(integrate_line(integrand, tol=tol, decay=d * (q - 2) / 2.0).value.real)


def gaussian_strichartz_norm_grid(sig: Signature, q: float, n_space: int = 41,
                                  n_time: int = 64, y_box: float = 5.0) -> float:
    """||Tg||_q^q by a 3-D grid quadrature of |Tg|^q for d = 2.

    The grid is uniform in similarity coordinates: t = (pi/2) tan(theta) with a
    midpoint rule in theta, and x = y * sqrt((pi^2 + 4 t^2)/pi) with Simpson in y.
    |Tg| is taken from the complex product formula, not the modulus identity.
    For d = 2 the theta-integrand behaves like cos(theta)^(q-4), so the rule is
    meant for q >= 4 (it is exact in theta at q = 4).
    """
    if sig.d != 2:
        raise DomainError("grid route implemented for d = 2")
    _check_q(2, q)
    theta = -0.5 * math.pi + (np.arange(n_time) + 0.5) * math.pi / n_time
    t = 0.5 * math.pi * np.tan(theta)
    y = np.linspace(-y_box, y_box, n_space)
    wy = simpson_weights(n_space, y[1] - y[0])
    scale = np.sqrt((math.pi**2 + 4 * t * t) / math.pi)
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    total = 0.0
    for tk, sk, thk in zip(t, scale, theta):
        x = np.stack([Y1 * sk, Y2 * sk], axis=-1)
        val = np.abs(extension_gaussian_closed(sig, x, tk)) ** q
        jac = sk * sk * 0.5 * math.pi / math.cos(thk) ** 2
        total += float(wy @ val @ wy) * jac
    return total * math.pi / n_time
