"""Gradient ascent for Lambda(f) = ||Tf||_4^4 / ||f||_2^4 on the saddle tau = xi1^2 - xi2^2.

||Tf||_4^4 is evaluated over the whole time axis without truncation by
splitting it at |t| = t_split:

* near field, |t| <= t_split: Tf(., t) is the Fourier transform of
  f exp(itQ), one FFT per slice on a zero-padded grid;
* far field, |t| > t_split: with tau = 1/(4t) the exact identity
  ``int |Tf(x,t)|^4 dx = 4 pi^4 t^-2 ||v_tau||_4^4`` holds, where
  v_tau = F^-1[f^ exp(-i tau Q(k))].  Substituting tau turns the tail into
  16 pi^4 int_{|tau| < 1/(4 t_split)} ||v_tau||_4^4 d tau, a compact integral.

Both time integrals use Simpson's rule over the slices; the spatial sums use
the spectrally accurate uniform (trapezoid) rule, and so does ||f||_2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, ResolutionError
from .grid import GridFunction
from .quadrature import simpson_weights

__all__ = [
    "SliceConfig",
    "AscentReport",
    "extension_slices",
    "strichartz_norm4",
    "lambda_functional",
    "lambda_gradient",
    "ascend",
    "l2_inner",
    "l2_norm",
]

SADDLE_SIGNS = (1.0, -1.0)


@dataclass(frozen=True)
class SliceConfig:
    t_split: float = 0.5
    slices: int = 65  # per field, odd
    padding: int = 2

    def __post_init__(self):
        if self.t_split <= 0:
            raise DomainError("t_split must be positive")
        if self.slices < 3 or self.slices % 2 == 0:
            raise DomainError("slice count must be odd and >= 3")
        if self.padding < 1:
            raise DomainError("padding factor must be >= 1")

    @property
    def tau_split(self) -> float:
        return 1.0 / (4.0 * self.t_split)


def _check_saddle_grid(f: GridFunction):
    if f.n_axes != 2:
        raise DomainError("the saddle search works with functions on R^2")
    h = f.spacing
    if abs(h[0] - h[1]) > 1e-12 * h[0] or f.counts[0] != f.counts[1]:
        raise DomainError("the saddle search needs a square grid")


def l2_inner(f: GridFunction, g: GridFunction) -> complex:
    """<f, g> = sum f conj(g) h^2 (uniform rule)."""
    return complex(np.vdot(g.samples, f.samples) * np.prod(f.spacing))


def l2_norm(f: GridFunction) -> float:
    return math.sqrt(float(np.sum(np.abs(f.samples) ** 2) * np.prod(f.spacing)))


class _SliceOperator:
    """Linear maps f -> Tf(., t) (near field) and f -> v_tau (far field) and adjoints."""

    def __init__(self, f: GridFunction, config: SliceConfig):
        _check_saddle_grid(f)
        self.n = f.counts[0]
        self.h = f.spacing[0]
        self.N = config.padding * self.n
        self.config = config
        xi = f.axes
        X1, X2 = np.meshgrid(xi[0], xi[1], indexing="ij")
        self.Q = X1 * X1 - X2 * X2
        k = 2 * math.pi * np.fft.fftfreq(self.N, d=self.h)
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        self.Qk = K1 * K1 - K2 * K2
        self.dx = 2 * math.pi / (self.N * self.h)
        reach = max(max(abs(lo), abs(hi)) for lo, hi in zip(f.lower, f.upper))
        limit = math.pi / self.h
        if 2 * config.t_split * reach > limit:
            raise ResolutionError(
                f"near-field slices need 2 t_split L = {2 * config.t_split * reach:.3g} "
                f"<= pi/h = {limit:.3g}")
        self.t = np.linspace(-config.t_split, config.t_split, config.slices)
        self.tau = np.linspace(-config.tau_split, config.tau_split, config.slices)
        self.wt = simpson_weights(config.slices, self.t[1] - self.t[0])
        self.wtau = simpson_weights(config.slices, self.tau[1] - self.tau[0])

    def _pad(self, a):
        out = np.zeros((self.N, self.N), dtype=complex)
        out[: self.n, : self.n] = a
        return out

    def near(self, f, t):
        return self.h * self.h * self.N * self.N * np.fft.ifft2(self._pad(f * np.exp(1j * t * self.Q)))

    def near_adjoint(self, G, t):
        return self.h * self.h * np.fft.fft2(G)[: self.n, : self.n] * np.exp(-1j * t * self.Q)

    def far(self, f, tau):
        return np.fft.ifft2(np.fft.fft2(self._pad(f)) * np.exp(-1j * tau * self.Qk))

    def far_adjoint(self, G, tau):
        return np.fft.ifft2(np.fft.fft2(G) * np.exp(1j * tau * self.Qk))[: self.n, : self.n]

    def norm4(self, f):
        near = sum(w * np.sum(np.abs(self.near(f, t)) ** 4) for t, w in zip(self.t, self.wt))
        far = sum(w * np.sum(np.abs(self.far(f, tau)) ** 4) for tau, w in zip(self.tau, self.wtau))
        return float(near * self.dx**2 + 16 * math.pi**4 * far * self.h**2)

    def norm4_gradient(self, f):
        """Gradient of ||Tf||_4^4 for the real inner product Re <., .>_{L^2}."""
        grad = np.zeros_like(f, dtype=complex)
        for t, w in zip(self.t, self.wt):
            T = self.near(f, t)
            grad += (w * self.dx**2) * self.near_adjoint(np.abs(T) ** 2 * T, t)
        grad /= self.h**2
        for tau, w in zip(self.tau, self.wtau):
            v = self.far(f, tau)
            grad += (16 * math.pi**4 * w) * self.far_adjoint(np.abs(v) ** 2 * v, tau)
        return 4.0 * grad


def extension_slices(f: GridFunction, t_samples: Sequence[float], padding: int = 2):
    """Tf on the FFT-conjugate x-grid for each requested t.

    Returns ``(x, values)`` with x the sorted 1-D x-axis (same on both axes)
    and values of shape (len(t), N, N).  Each slice is one zero-padded FFT of
    f(xi) exp(i t Q(xi)) including the exact phase of the box offset.
    """
    _check_saddle_grid(f)
    n = f.counts[0]
    h = f.spacing[0]
    N = padding * n
    reach = max(max(abs(lo), abs(hi)) for lo, hi in zip(f.lower, f.upper))
    x = np.fft.fftshift(2 * math.pi * np.fft.fftfreq(N, d=h))
    out = np.empty((len(t_samples), N, N), dtype=complex)
    xi = f.axes
    X1, X2 = np.meshgrid(xi[0], xi[1], indexing="ij")
    Q = X1 * X1 - X2 * X2
    offset = np.exp(1j * x * f.lower[0])[:, None] * np.exp(1j * x * f.lower[1])[None, :]
    for i, t in enumerate(t_samples):
        if 2 * abs(t) * reach > math.pi / h:
            raise ResolutionError(f"slice t={t}: 2|t|L = {2 * abs(t) * reach:.3g} > pi/h = {math.pi / h:.3g}")
        a = np.zeros((N, N), dtype=complex)
        a[:n, :n] = f.samples * np.exp(1j * t * Q)
        out[i] = np.fft.fftshift(np.fft.ifft2(a)) * (N * N * h * h) * offset
    return x, out


def strichartz_norm4(f: GridFunction, config: Optional[SliceConfig] = None) -> float:
    """||Tf||_{L^4(R^3)}^4 over the full time axis."""
    config = config or SliceConfig()
    return _SliceOperator(f, config).norm4(f.samples)


def lambda_functional(f: GridFunction, config: Optional[SliceConfig] = None) -> float:
    norm = l2_norm(f)
    if norm == 0:
        raise DomainError("Lambda is undefined for f = 0")
    return strichartz_norm4(f, config) / norm**4


def _lambda_and_gradient(f: GridFunction, op: _SliceOperator):
    norm2 = l2_norm(f) ** 2
    if norm2 == 0:
        raise DomainError("Lambda is undefined for f = 0")
    n4 = op.norm4(f.samples)
    grad = op.norm4_gradient(f.samples)
    grad = (grad - 4.0 * (n4 / norm2) * f.samples) / norm2**2
    return n4 / norm2**2, f.with_samples(grad)


def lambda_gradient(f: GridFunction, config: Optional[SliceConfig] = None) -> GridFunction:
    """Gradient of Lambda for the real L^2 inner product Re <u, v>.

    (4/||f||^4) [T*(|Tf|^2 Tf) - (||Tf||_4^4/||f||^2) f], with T* the exact
    adjoint of the discretized (near + far field) extension.
    """
    op = _SliceOperator(f, config or SliceConfig())
    return _lambda_and_gradient(f, op)[1]


@dataclass
class AscentReport:
    iterations: int
    lambda_trace: List[float]
    final_f: GridFunction
    gradient_norm_final: float
    steps: List[float] = field(default_factory=list)
    gradient_norms: List[float] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def lambda_initial(self) -> float:
        return self.lambda_trace[0]

    @property
    def lambda_final(self) -> float:
        return self.lambda_trace[-1]

    @property
    def improved_over_gaussian(self) -> bool:
        return self.lambda_final > self.lambda_initial * (1 + 1e-3)

    @property
    def relative_gain(self) -> float:
        return self.lambda_final / self.lambda_initial - 1.0

    def jsonl(self) -> str:
        rows = []
        for i, lam in enumerate(self.lambda_trace):
            rows.append(json.dumps({
                "iteration": i,
                "lambda": lam,
                "step": self.steps[i - 1] if i > 0 else 0.0,
                "gradient_norm": self.gradient_norms[i],
            }, sort_keys=True))
        return "\n".join(rows) + "\n"


def ascend(f0: GridFunction, max_iters: int = 200, step0: float = 0.05, tol: float = 1e-9,
           config: Optional[SliceConfig] = None, max_backtracks: int = 40) -> AscentReport:
    """Projected gradient ascent of Lambda on the unit L^2 sphere.

    Each trial point is f + step * ||f|| * grad/||grad||, renormalized; a step is
    accepted only if Lambda does not decrease, otherwise it is halved.
    ``step0`` is the initial move relative to ||f||.  Iteration stops when
    an accepted step increases Lambda by less than ``tol`` (relative), when no
    ascent step can be found, or at ``max_iters``.
    """
    config = config or SliceConfig()
    norm = l2_norm(f0)
    if norm == 0:
        raise DomainError("cannot ascend from f = 0")
    f = f0 * (1.0 / norm)
    op = _SliceOperator(f, config)
    lam, grad = _lambda_and_gradient(f, op)
    gnorm = l2_norm(grad)
    trace, steps, gnorms = [lam], [], [gnorm]
    step = step0
    reason = "iteration cap"
    if not math.isfinite(tol) or max_iters <= 0:
        reason = "tolerance reached" if not math.isfinite(tol) else "iteration cap"
        return AscentReport(0, trace, f, gnorm, steps, gnorms, reason)
    for it in range(max_iters):
        if gnorm == 0:
            reason = "zero gradient"
            break
        direction = grad * (1.0 / gnorm)
        accepted = False
        for _ in range(max_backtracks):
            trial = f + direction * step
            trial = trial * (1.0 / l2_norm(trial))
            lam_trial = op.norm4(trial.samples)
            if not math.isfinite(lam_trial):
                raise FloatingPointError(f"non-finite Lambda at iteration {it}; grid resolution lost")
            if lam_trial >= lam:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            reason = "no ascent step"
            break
        gain = (lam_trial - lam) / lam
        f = trial
        lam, grad = _lambda_and_gradient(f, op)
        gnorm = l2_norm(grad)
        trace.append(lam)
        steps.append(step)
        gnorms.append(gnorm)
        step = min(2.0 * step, 1.0)
        if gain < tol:
            reason = "tolerance reached"
            break
    return AscentReport(len(trace) - 1, trace, f, gnorm, steps, gnorms, reason)
