"""Adaptive real-line quadrature, principal half-integer powers, grid quadrature.

The line and half-line integrators compactify with s = tan(theta).  Near the
poles theta = +-pi/2 the panels are parametrized by delta = pi/2 - |theta|
(so s = cot(delta)), which keeps full floating-point resolution while the
adaptive bisection chases an algebraic tail into the endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from .errors import BranchCutError, BudgetExceededError, DomainError

__all__ = [
    "QuadratureResult",
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
    "DEFAULT_BUDGET",
    "integrate_line",
    "integrate_halfline",
    "integrate_interval",
    "principal_half_power",
    "simpson_weights",
    "integrate_grid",
]

DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10
DEFAULT_BUDGET = 1_000_000

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    W_GAUSS[_i] = _w
    W_GAUSS[14 - _i] = _w
W_GAUSS[7] = _WG[3]

# panels narrower than this (in the local coordinate) are never split
_MIN_WIDTH = 1e-60


@dataclass
class QuadratureResult:
    value: Union[complex, np.ndarray]
    abs_error_estimate: Union[float, np.ndarray]
    evaluations: int

    def __iter__(self):
        return iter((self.value, self.abs_error_estimate))


Patch = Callable[[np.ndarray], np.ndarray]


def _adaptive(patches: Sequence[Tuple[Patch, float, float]], abs_tol, rel_tol, max_evals,
              initial_panels=4) -> QuadratureResult:
    """Globally adaptive G7-K15 over a union of coordinate patches.

    Each patch is (g, a, b) where g already includes the Jacobian of its map.
    All panels selected in a round are evaluated in one vectorized call per patch.
    """
    a_list, b_list, pid_list = [], [], []
    for k, (_, a, b) in enumerate(patches):
        edges = np.linspace(a, b, initial_panels + 1)
        a_list.append(edges[:-1])
        b_list.append(edges[1:])
        pid_list.append(np.full(initial_panels, k))
    a = np.concatenate(a_list)
    b = np.concatenate(b_list)
    pid = np.concatenate(pid_list)

    def evaluate(a, b, pid):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x = mid[:, None] + half[:, None] * NODES[None, :]
        vals = None
        for k, (g, _, _) in enumerate(patches):
            sel = pid == k
            if not np.any(sel):
                continue
            fx = np.asarray(g(x[sel].ravel()))
            fx = fx.reshape((int(sel.sum()), 15) + fx.shape[1:])
            if vals is None:
                vals = np.zeros((len(a), 15) + fx.shape[2:], dtype=complex)
            vals[sel] = fx
        if not np.all(np.isfinite(vals)):
            raise DomainError("integrand returned non-finite values")
        extra = (slice(None),) + (None,) * (vals.ndim - 2)
        kron = np.tensordot(vals, W_KRONROD, axes=([1], [0])) * half[extra]
        gauss = np.tensordot(vals, W_GAUSS, axes=([1], [0])) * half[extra]
        return kron, np.abs(kron - gauss)

    val, err = evaluate(a, b, pid)
    evals = 15 * len(a)
    frozen = np.zeros(len(a), dtype=bool)
    while True:
        total = val.sum(axis=0)
        total_err = err.sum(axis=0)
        target = np.maximum(abs_tol, rel_tol * np.abs(total))
        ratio = total_err / target
        if np.all(ratio <= 1.0):
            break
        # per-panel share of the worst component's tolerance
        score = err / target
        score = score.reshape(len(a), -1).max(axis=1)
        score[frozen] = 0.0
        if not np.any(score > 0):
            break
        order = np.argsort(-score, kind="stable")
        cumulative = np.cumsum(score[order])
        excess = score.sum() - 0.5
        n_split = int(np.searchsorted(cumulative, excess) + 1)
        n_split = max(1, min(n_split, len(order)))
        chosen = np.sort(order[:n_split])
        chosen = chosen[score[chosen] > 0]
        if evals + 30 * len(chosen) > max_evals:
            best = QuadratureResult(_scalarize(total), _scalarize_err(total_err), evals)
            raise BudgetExceededError(
                f"quadrature budget of {max_evals} evaluations exceeded "
                f"(estimate {best.value}, error {best.abs_error_estimate})", best)
        ca, cb, cp = a[chosen], b[chosen], pid[chosen]
        cm = 0.5 * (ca + cb)
        too_narrow = (cb - ca) < _MIN_WIDTH * np.maximum(1.0, np.abs(cm))
        if np.any(too_narrow):
            frozen[chosen[too_narrow]] = True
            chosen, ca, cb, cp, cm = (chosen[~too_narrow], ca[~too_narrow], cb[~too_narrow],
                                      cp[~too_narrow], cm[~too_narrow])
            if len(chosen) == 0:
                continue
        na = np.concatenate([ca, cm])
        nb = np.concatenate([cm, cb])
        npid = np.concatenate([cp, cp])
        nval, nerr = evaluate(na, nb, npid)
        evals += 15 * len(na)
        keep = np.ones(len(a), dtype=bool)
        keep[chosen] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        pid = np.concatenate([pid[keep], npid])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        frozen = np.concatenate([frozen[keep], np.zeros(len(na), dtype=bool)])
        # deterministic panel order (by patch, then position)
        order = np.lexsort((a, pid))
        a, b, pid, val, err, frozen = a[order], b[order], pid[order], val[order], err[order], frozen[order]
    total = val.sum(axis=0)
    return QuadratureResult(_scalarize(total), _scalarize_err(err.sum(axis=0)), evals)


def _scalarize(v):
    v = np.asarray(v)
    return complex(v) if v.ndim == 0 else v


def _scalarize_err(e):
    e = np.asarray(e)
    return float(e) if e.ndim == 0 else e


def _tol(tol):
    if tol is None:
        return DEFAULT_ABS_TOL, DEFAULT_REL_TOL
    return float(tol[0]), float(tol[1])


def _vector_jac(f, s, jac):
    fs = np.asarray(f(s))
    extra = (slice(None),) + (None,) * (fs.ndim - 1)
    return fs * jac[extra]


def _center_patch(f):
    def g(theta):
        s = np.tan(theta)
        return _vector_jac(f, s, 1.0 + s * s)
    return g


def _tail_patch(f, sign):
    def g(delta):
        # s = cot(delta), ds = d(delta) / sin(delta)^2
        sd = np.sin(delta)
        s = sign * np.cos(delta) / sd
        return _vector_jac(f, s, 1.0 / (sd * sd))
    return g


def _power_tail_patch(f, sign, alpha):
    m = 1.0 / (alpha - 1.0)

    def g(w):
        # s = w^(-m) maps a |s|^(-alpha) tail to a bounded integrand in w
        s = w ** (-m)
        return _vector_jac(f, sign * s, m * s / w)
    return g


def _tail_start(alpha):
    # far enough out that O(1/s) corrections vanish, near enough that w stays normal
    return 10.0 ** min(100.0, 250.0 / (alpha - 1.0))


def _power_tail_remainder(f, sign, alpha):
    # beyond |s| = S the integrand is C |s|^(-alpha) (1 + O(1/s))
    S = _tail_start(alpha)
    return np.asarray(f(np.array([sign * S])))[0] * S / (alpha - 1.0)


def _line_patches(integrand, signs, decay):
    q = math.pi / 4
    lo = -q if -1.0 in signs else 0.0
    patches = [(_center_patch(integrand), lo, q)]
    remainder = 0.0
    for sign in signs:
        if decay is None:
            patches.append((_tail_patch(integrand, sign), 0.0, q))
        else:
            w_min = _tail_start(decay) ** (-(decay - 1.0))
            patches.append((_power_tail_patch(integrand, sign, decay), w_min, 1.0))
            remainder = remainder + _power_tail_remainder(integrand, sign, decay)
    return patches, remainder


def _check_decay(decay):
    if decay is not None and not decay > 1.0:
        raise DomainError(f"decay exponent must exceed 1 for convergence, got {decay}")


def _with_remainder(res: QuadratureResult, remainder) -> QuadratureResult:
    if np.all(np.asarray(remainder) == 0):
        return res
    value = np.asarray(res.value) + remainder
    return QuadratureResult(_scalarize(value), res.abs_error_estimate, res.evaluations + 2)


def integrate_line(integrand: Callable[[np.ndarray], np.ndarray], tol=None,
                   max_evals: int = DEFAULT_BUDGET, decay: Optional[float] = None) -> QuadratureResult:
    """Integral of a vectorized integrand over the real line.

    ``integrand`` maps a 1-D array of abscissae to values of shape (n,) or
    (n, ...); a vector-valued integrand shares one subdivision tree.
    ``tol`` is ``(abs_tol, rel_tol)``.  When the integrand is known to decay
    like |s|^(-decay), passing ``decay`` switches the tails to a map that
    stays regular even for decay close to 1.
    """
    abs_tol, rel_tol = _tol(tol)
    _check_decay(decay)
    patches, remainder = _line_patches(integrand, (-1.0, 1.0), decay)
    return _with_remainder(_adaptive(patches, abs_tol, rel_tol, max_evals), remainder)


def integrate_halfline(integrand, tol=None, max_evals: int = DEFAULT_BUDGET,
                       decay: Optional[float] = None) -> QuadratureResult:
    """Integral over (0, infinity)."""
    abs_tol, rel_tol = _tol(tol)
    _check_decay(decay)
    patches, remainder = _line_patches(integrand, (1.0,), decay)
    return _with_remainder(_adaptive(patches, abs_tol, rel_tol, max_evals), remainder)


def integrate_interval(integrand, a: float, b: float, tol=None,
                       max_evals: int = DEFAULT_BUDGET) -> QuadratureResult:
    """Integral over the finite interval (a, b); endpoints are never sampled."""
    abs_tol, rel_tol = _tol(tol)
    if not b > a:
        raise DomainError("integrate_interval needs a < b")
    return _adaptive([(integrand, float(a), float(b))], abs_tol, rel_tol, max_evals, initial_panels=8)


def principal_half_power(z, m: int):
    """z**(m/2) on the principal branch (cut along the closed negative real axis)."""
    z = np.asarray(z, dtype=complex)
    on_cut = (z.imag == 0) & (z.real <= 0)
    if np.any(on_cut):
        raise BranchCutError("principal half power undefined on the closed negative real axis")
    root = np.sqrt(z)
    m = int(m)
    out = root ** abs(m) if m else np.ones_like(root)
    if m < 0:
        out = 1.0 / out
    return complex(out) if out.ndim == 0 else out


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights; a closing 3/8 panel handles even n. Exact for cubics."""
    if n < 3:
        raise DomainError(f"grid quadrature needs at least 3 points per axis, got {n}")
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    if m >= 3:
        w[:m:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m - 1] -= 1.0
        w[:m] *= h / 3.0
    if n % 2 == 0:
        w[n - 4:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


def integrate_grid(F) -> complex:
    """Composite Simpson quadrature of a GridFunction over its box."""
    values = np.asarray(F.samples)
    for axis in reversed(range(values.ndim)):
        w = simpson_weights(F.counts[axis], F.spacing[axis])
        values = np.tensordot(values, w, axes=([axis], [0]))
    return complex(values)
