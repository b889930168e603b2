"""Uniformly sampled complex functions on boxes, and their text serialization.

File format (shared by every module and the CLI)::

    # gridfunction v1
    # axes <n>
    # axis <k> <lower> <upper> <count>      (one line per axis, C order)
    index,re,im
    0,<re>,<im>
    ...

Floats are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import DomainError

__all__ = ["GridFunction", "read_gridfunction", "write_gridfunction"]

_MAGIC = "# gridfunction v1"


@dataclass
class GridFunction:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    samples: np.ndarray

    def __post_init__(self):
        self.lower = tuple(float(v) for v in self.lower)
        self.upper = tuple(float(v) for v in self.upper)
        self.samples = np.asarray(self.samples, dtype=complex)
        if not (len(self.lower) == len(self.upper) == self.samples.ndim):
            raise DomainError("axis metadata does not match the sample array")
        for lo, hi, n in zip(self.lower, self.upper, self.samples.shape):
            if n < 3:
                raise DomainError(f"need at least 3 samples per axis, got {n}")
            if not hi > lo:
                raise DomainError("each axis needs lower < upper")

    @classmethod
    def from_callable(cls, fn: Callable[..., np.ndarray], lower: Sequence[float],
                      upper: Sequence[float], counts: Sequence[int]) -> "GridFunction":
        """Sample ``fn(*coordinate_arrays)`` on the uniform grid."""
        for n in counts:
            if n < 3:
                raise DomainError(f"need at least 3 samples per axis, got {n}")
        axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(lower, upper, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(tuple(lower), tuple(upper), np.broadcast_to(fn(*mesh), mesh[0].shape))

    @classmethod
    def symmetric(cls, fn, box: float, n: int, n_axes: int = 2) -> "GridFunction":
        return cls.from_callable(fn, [-box] * n_axes, [box] * n_axes, [n] * n_axes)

    @property
    def n_axes(self) -> int:
        return self.samples.ndim

    @property
    def counts(self) -> Tuple[int, ...]:
        return self.samples.shape

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for lo, hi, n in zip(self.lower, self.upper, self.counts))

    @property
    def axes(self):
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.counts)]

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.lower, self.upper, samples)

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.counts == other.counts
                and np.allclose(self.lower, other.lower, rtol=0, atol=1e-14)
                and np.allclose(self.upper, other.upper, rtol=0, atol=1e-14))

    def interpolate(self, *coords, order: int = 1) -> np.ndarray:
        """Spline interpolation at arbitrary points; zero outside the box.

        ``order=1`` (the default) is multilinear; ``order=3`` is a cubic spline.
        """
        coords = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        shape = coords[0].shape
        index = np.stack([((c - lo) / h).ravel()
                          for c, lo, h in zip(coords, self.lower, self.spacing)])
        re = ndimage.map_coordinates(self.samples.real, index, order=order, mode="constant", cval=0.0)
        im = ndimage.map_coordinates(self.samples.imag, index, order=order, mode="constant", cval=0.0)
        return (re + 1j * im).reshape(shape)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self.with_samples(self.samples + other.samples)
        return self.with_samples(self.samples + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self.with_samples(self.samples - other.samples)
        return self.with_samples(self.samples - other)

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            self._check(c)
            return self.with_samples(self.samples * c.samples)
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)

    def _check(self, other):
        if not self.same_grid(other):
            raise DomainError("grid functions live on different grids")


def write_gridfunction(F: GridFunction, target: Union[str, Path, io.TextIOBase, None] = None) -> str:
    lines = [_MAGIC, f"# axes {F.n_axes}"]
    for k, (lo, hi, n) in enumerate(zip(F.lower, F.upper, F.counts)):
        lines.append(f"# axis {k} {lo!r} {hi!r} {n}")
    lines.append("index,re,im")
    flat = F.samples.ravel()
    lines.extend(f"{i},{float(v.real)!r},{float(v.imag)!r}" for i, v in enumerate(flat))
    text = "\n".join(lines) + "\n"
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)
    return text


def read_gridfunction(source: Union[str, Path, io.TextIOBase]) -> GridFunction:
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise DomainError("not a gridfunction file")
    n_axes = int(lines[1].split()[2])
    lower, upper, counts = [], [], []
    for k in range(n_axes):
        parts = lines[2 + k].split()
        if parts[:3] != ["#", "axis", str(k)]:
            raise DomainError(f"malformed axis header: {lines[2 + k]!r}")
        lower.append(float(parts[3]))
        upper.append(float(parts[4]))
        counts.append(int(parts[5]))
    body = lines[3 + n_axes:]
    total = int(np.prod(counts))
    if len(body) != total:
        raise DomainError(f"expected {total} rows, found {len(body)}")
    data = np.empty(total, dtype=complex)
    for row in body:
        i, re, im = row.split(",")
        data[int(i)] = complex(float(re), float(im))
    return GridFunction(tuple(lower), tuple(upper), data.reshape(counts))
