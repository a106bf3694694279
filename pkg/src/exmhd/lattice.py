"""Periodic lattice on a flat n-torus with a constant diagonal metric.

Scalar fields are plain ``numpy`` arrays of shape ``box.dims`` (row-major,
sample ``i`` on axis ``a`` sits at ``x = i * L_a / N_a``).  All derivatives
are Fourier multipliers.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

MIN_DIM = 2
MAX_DIM = 6


def _workers() -> int:
    raw = os.environ.get("EXMHD_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class BoxSpec:
    """Lattice geometry: dimension, points per axis, periods and metric."""

    n: int
    dims: tuple[int, ...]
    lengths: tuple[float, ...]
    metric: tuple[float, ...]

    def __post_init__(self):
        if not MIN_DIM <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {self.n}")
        for name in ("dims", "lengths", "metric"):
            if len(getattr(self, name)) != self.n:
                raise ValueError(f"{name} must have {self.n} entries")
        for N in self.dims:
            if N < 8 or N % 2:
                raise ValueError(f"axis count must be even and >=8, got {N}")
        if any(not (L > 0 and math.isfinite(L)) for L in self.lengths):
            raise ValueError("lengths must be positive")
        if any(not (g > 0 and math.isfinite(g)) for g in self.metric):
            raise ValueError("metric coefficients must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.lengths, self.dims))

    @property
    def cell_volume(self) -> float:
        """Coordinate volume of one lattice cell, prod(L_i / N_i)."""
        return math.prod(self.spacing)

    @property
    def sqrt_g(self) -> float:
        return math.sqrt(math.prod(self.metric))

    @property
    def coord_volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def volume(self) -> float:
        """Riemannian volume of the torus."""
        return self.sqrt_g * self.coord_volume

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        out = []
        for a, (N, L) in enumerate(zip(self.dims, self.lengths)):
            shape = [1] * self.n
            shape[a] = N
            out.append((np.arange(N) * (L / N)).reshape(shape))
        return out

    def mesh(self) -> list[np.ndarray]:
        return [np.broadcast_to(x, self.dims) for x in self.coords()]

    # -- spectral tables (rfftn layout: last axis is half-spectrum) --------

    @cached_property
    def int_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer mode numbers per axis, shaped for broadcasting."""
        ks = []
        for a, N in enumerate(self.dims):
            if a == self.n - 1:
                k = np.arange(N // 2 + 1, dtype=float)
            else:
                k = np.fft.fftfreq(N, d=1.0 / N)
            shape = [1] * self.n
            shape[a] = k.size
            ks.append(k.reshape(shape))
        return tuple(ks)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Physical wavenumbers 2*pi*k/L_a."""
        return tuple(2 * np.pi * k / L for k, L in zip(self.int_wavenumbers, self.lengths))

    @cached_property
    def derivative_multipliers(self) -> tuple[np.ndarray, ...]:
        """i*k_a with the Nyquist coefficient zeroed."""
        out = []
        for k, kint, N in zip(self.wavenumbers, self.int_wavenumbers, self.dims):
            kk = np.where(np.abs(kint) == N // 2, 0.0, k)
            out.append(1j * kk)
        return tuple(out)

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        """Fourier symbol of sum_i g^ii d_i^2 built from the derivative multipliers.

        Using the same Nyquist-free multipliers as ``d`` keeps the discrete
        Laplacian equal to the composition of the discrete first derivatives.
        """
        s = 0.0
        for m, g in zip(self.derivative_multipliers, self.metric):
            s = s + (m * m).real / g
        return np.broadcast_to(s, self.spectral_shape).copy()

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.spectral_shape, dtype=bool)
        for kint, N in zip(self.int_wavenumbers, self.dims):
            mask &= np.abs(kint) <= N / 3
        return mask

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return self.dims[:-1] + (self.dims[-1] // 2 + 1,)


def build_box(n, dims, lengths=None, metric=None) -> BoxSpec:
    """Validate and build a :class:`BoxSpec`. Defaults: ``L_i = 2*pi``, identity metric."""
    dims = tuple(int(N) for N in dims)
    if lengths is None:
        lengths = [2 * np.pi] * len(dims)
    if metric is None:
        metric = [1.0] * len(dims)
    return BoxSpec(int(n), dims, tuple(float(L) for L in lengths), tuple(float(g) for g in metric))


def zeros(box: BoxSpec) -> np.ndarray:
    return np.zeros(box.dims)


def _axes(box: BoxSpec):
    return tuple(range(-box.n, 0))


def fft(box: BoxSpec, f: np.ndarray) -> np.ndarray:
    """Real FFT over the trailing ``n`` axes (leading axes are batched)."""
    return sfft.rfftn(f, axes=_axes(box), workers=_workers())


def ifft(box: BoxSpec, fh: np.ndarray) -> np.ndarray:
    return sfft.irfftn(fh, s=box.dims, axes=_axes(box), workers=_workers())


def spectral_partial(box: BoxSpec, f: np.ndarray, axis: int) -> np.ndarray:
    """Spectral derivative of ``f`` along ``axis`` (Nyquist mode dropped)."""
    if not 0 <= axis < box.n:
        raise IndexError(f"axis {axis} out of range for n={box.n}")
    return ifft(box, fft(box, f) * box.derivative_multipliers[axis])


def gradient(box: BoxSpec, f: np.ndarray, axes=None) -> dict[int, np.ndarray]:
    """Several partial derivatives of one field from a single forward FFT."""
    fh = fft(box, f)
    axes = range(box.n) if axes is None else axes
    return {a: ifft(box, fh * box.derivative_multipliers[a]) for a in axes}


def integrate(box: BoxSpec, f) -> float:
    """Integral against the Riemannian volume, sum(f) * sqrt(g) * cell volume."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return float(f) * box.volume
    return float(np.sum(f)) * box.sqrt_g * box.cell_volume


def mean(box: BoxSpec, f: np.ndarray) -> float:
    return float(np.mean(f))


def dealias(box: BoxSpec, f: np.ndarray) -> np.ndarray:
    """Zero every Fourier mode with ``|k_i| > N_i / 3`` on some axis.

    Leading axes of ``f`` beyond the lattice shape are treated as a batch.
    """
    return ifft(box, fft(box, f) * box.dealias_mask)


def laplacian(box: BoxSpec, f: np.ndarray) -> np.ndarray:
    """sum_i g^ii d_i^2 f."""
    return ifft(box, fft(box, f) * box.laplacian_symbol)
