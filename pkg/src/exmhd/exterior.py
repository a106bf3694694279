"""Exterior algebra and calculus for differential forms on the periodic lattice.

A k-form stores one lattice field per strictly increasing multi-index, in
lexicographic order, as the coefficient of ``dx^I``.  Full antisymmetric
tensors never appear here.

The squared norm follows the full-tensor convention ``|B|^2 = B_ij B^ij``,
so ``norm2`` carries a ``k!`` factor relative to summing increasing-index
components.  The pointwise inner product used for ``<w, e> = int w ^ *e``
does not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import lattice
from .lattice import BoxSpec


# ---------------------------------------------------------------------------
# multi-index bookkeeping


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing k-tuples drawn from range(n), lexicographic."""
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def index_of(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {I: pos for pos, I in enumerate(multi_indices(n, k))}


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(n, k, l):
    rows = []
    idx = index_of(n, k + l)
    for a, I in enumerate(multi_indices(n, k)):
        for b, K in enumerate(multi_indices(n, l)):
            s = perm_sign(I + K)
            if s:
                rows.append((idx[tuple(sorted(I + K))], a, b, s))
    return tuple(rows)


@lru_cache(maxsize=None)
def _interior_table(n, k):
    # (out index I, axis j, source index of sorted(jI), sign)
    rows = []
    src = index_of(n, k)
    for o, I in enumerate(multi_indices(n, k - 1)):
        for j in range(n):
            if j in I:
                continue
            s = perm_sign((j,) + I)
            rows.append((o, j, src[tuple(sorted((j,) + I))], s))
    return tuple(rows)


@lru_cache(maxsize=None)
def _d_table(n, k):
    # (out index J, axis j, source index of J without j, sign)
    rows = []
    src = index_of(n, k)
    for o, J in enumerate(multi_indices(n, k + 1)):
        for p, j in enumerate(J):
            rest = J[:p] + J[p + 1:]
            rows.append((o, j, src[rest], (-1) ** p))
    return tuple(rows)


@lru_cache(maxsize=None)
def _star_table(n, k):
    # (source I, target complement J, sign of the shuffle I J)
    idx = index_of(n, n - k)
    rows = []
    for a, I in enumerate(multi_indices(n, k)):
        J = tuple(i for i in range(n) if i not in I)
        rows.append((a, idx[J], perm_sign(I + J), I))
    return tuple(rows)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class KForm:
    """Degree-k form: ``comps[p]`` is the coefficient of ``dx^I`` for the p-th index."""

    box: BoxSpec
    degree: int
    comps: np.ndarray

    def __post_init__(self):
        n, k = self.box.n, self.degree
        if not 0 <= k <= n:
            raise ValueError(f"degree {k} out of range for n={n}")
        expect = (math.comb(n, k),) + self.box.dims
        if self.comps.shape != expect:
            raise ValueError(f"component array has shape {self.comps.shape}, expected {expect}")

    @property
    def indices(self):
        return multi_indices(self.box.n, self.degree)

    def __getitem__(self, I) -> np.ndarray:
        if isinstance(I, (int, np.integer)):
            return self.comps[I]
        return self.comps[index_of(self.box.n, self.degree)[tuple(I)]]

    def _check(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        if other.box != self.box or other.degree != self.degree:
            raise ValueError("forms must share box and degree")
        return True

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KForm(self.box, self.degree, self.comps + other.comps)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KForm(self.box, self.degree, self.comps - other.comps)

    def __mul__(self, c):
        if isinstance(c, np.ndarray) and c.shape == self.box.dims:
            return KForm(self.box, self.degree, self.comps * c[None])
        return KForm(self.box, self.degree, self.comps * c)

    __rmul__ = __mul__

    def __neg__(self):
        return KForm(self.box, self.degree, -self.comps)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.comps))) if self.comps.size else 0.0

    def copy(self) -> "KForm":
        return KForm(self.box, self.degree, self.comps.copy())


@dataclass(frozen=True, eq=False)
class VecField:
    """Vector field by contravariant components ``comps[i] = X^i``."""

    box: BoxSpec
    comps: np.ndarray

    def __post_init__(self):
        expect = (self.box.n,) + self.box.dims
        if self.comps.shape != expect:
            raise ValueError(f"vector field has shape {self.comps.shape}, expected {expect}")

    def __getitem__(self, i):
        return self.comps[i]


def zero_form(box: BoxSpec, k: int) -> KForm:
    return KForm(box, k, np.zeros((math.comb(box.n, k),) + box.dims))


def constant_form(box: BoxSpec, k: int, coeffs) -> KForm:
    """Form with spatially constant coefficients (one per increasing index)."""
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    comps = np.empty((math.comb(box.n, k),) + box.dims)
    comps[...] = coeffs.reshape((-1,) + (1,) * box.n)
    return KForm(box, k, comps)


def basis_form(box: BoxSpec, I, scale=1.0) -> KForm:
    """``scale * dx^I`` for an increasing index tuple ``I``."""
    k = len(I)
    f = zero_form(box, k)
    f.comps[index_of(box.n, k)[tuple(I)]] = scale
    return f


def scalar_form(box: BoxSpec, f) -> KForm:
    return KForm(box, 0, np.asarray(f, dtype=float).reshape((1,) + box.dims).copy())


def from_components(box: BoxSpec, k: int, comps) -> KForm:
    return KForm(box, k, np.stack([np.broadcast_to(c, box.dims) for c in comps]).astype(float))


def _maybe_dealias(box, arr, flag):
    if not flag:
        return arr
    return lattice.dealias(box, arr)


# ---------------------------------------------------------------------------
# algebra


def wedge_comps(a: np.ndarray, b: np.ndarray, n: int, k: int, l: int) -> np.ndarray:
    """Wedge on raw component stacks ``(C(n,k), ...)`` and ``(C(n,l), ...)``."""
    out = np.zeros((math.comb(n, k + l),) + a.shape[1:])
    for o, i, j, s in _wedge_table(n, k, l):
        if s > 0:
            out[o] += a[i] * b[j]
        else:
            out[o] -= a[i] * b[j]
    return out


def wedge(a: KForm, b: KForm, dealias: bool = False) -> KForm:
    """Exterior product ``a ^ b``."""
    if a.box != b.box:
        raise ValueError("forms live on different boxes")
    n, k, l = a.box.n, a.degree, b.degree
    if k + l > n:
        raise ValueError(f"wedge degree {k}+{l} exceeds n={n}")
    out = wedge_comps(a.comps, b.comps, n, k, l)
    return KForm(a.box, k + l, _maybe_dealias(a.box, out, dealias))


def wedge_power(B: KForm, m: int, dealias: bool = False) -> KForm:
    """m-fold wedge of a 2-form; ``m = 0`` gives the constant 0-form 1."""
    if B.degree != 2:
        raise ValueError("wedge_power expects a 2-form")
    if 2 * m > B.box.n:
        raise ValueError(f"B^{m} exceeds dimension {B.box.n}")
    out = scalar_form(B.box, np.ones(B.box.dims))
    for _ in range(m):
        out = wedge(out, B, dealias=dealias)
    return out


def interior_comps(X: np.ndarray, w: np.ndarray, n: int, k: int) -> np.ndarray:
    out = np.zeros((math.comb(n, k - 1),) + w.shape[1:])
    for o, j, src, s in _interior_table(n, k):
        if s > 0:
            out[o] += X[j] * w[src]
        else:
            out[o] -= X[j] * w[src]
    return out


def interior(X: VecField, w: KForm, dealias: bool = False) -> KForm:
    """Contraction ``i_X w``: (i_X w)_I = sum_j X^j w_{jI}."""
    if w.degree < 1:
        raise ValueError("interior product of a 0-form is undefined")
    if X.box != w.box:
        raise ValueError("vector field and form live on different boxes")
    out = interior_comps(X.comps, w.comps, w.box.n, w.degree)
    return KForm(w.box, w.degree - 1, _maybe_dealias(w.box, out, dealias))


def star_comps(w: np.ndarray, n: int, k: int, metric) -> np.ndarray:
    sqrt_g = math.sqrt(math.prod(metric))
    out = np.zeros((math.comb(n, n - k),) + w.shape[1:])
    for a, J, s, I in _star_table(n, k):
        inv = 1.0
        for i in I:
            inv /= metric[i]
        out[J] = (s * sqrt_g * inv) * w[a]
    return out


def star(w: KForm) -> KForm:
    """Hodge star for the constant diagonal metric."""
    n, k = w.box.n, w.degree
    return KForm(w.box, n - k, star_comps(w.comps, n, k, w.box.metric))


def sharp(u: KForm) -> VecField:
    if u.degree != 1:
        raise ValueError("sharp expects a 1-form")
    g = np.asarray(u.box.metric).reshape((-1,) + (1,) * u.box.n)
    return VecField(u.box, u.comps / g)


def flat(X: VecField) -> KForm:
    g = np.asarray(X.box.metric).reshape((-1,) + (1,) * X.box.n)
    return KForm(X.box, 1, X.comps * g)


def _inverse_metric_weights(metric, n: int, k: int, ndim: int) -> np.ndarray:
    w = np.array([math.prod(1.0 / metric[i] for i in I) for I in multi_indices(n, k)])
    return w.reshape((-1,) + (1,) * ndim)


def norm2_comps(w: np.ndarray, n: int, k: int, metric) -> np.ndarray:
    wts = _inverse_metric_weights(metric, n, k, w.ndim - 1)
    return math.factorial(k) * np.sum(wts * w**2, axis=0)


def norm2(w: KForm) -> np.ndarray:
    """Pointwise ``|w|^2 = w_{i1..ik} w^{i1..ik}`` (full-tensor sum, hence the k!)."""
    return norm2_comps(w.comps, w.box.n, w.degree, w.box.metric)


def pointwise_inner(a: KForm, b: KForm) -> np.ndarray:
    """Pointwise inner product with ``a ^ *b = <a, b> dV`` (no k! factor)."""
    if a.degree != b.degree:
        raise ValueError("inner product needs equal degrees")
    wts = _inverse_metric_weights(a.box.metric, a.box.n, a.degree, a.box.n)
    return np.sum(wts * a.comps * b.comps, axis=0)


def inner(a: KForm, b: KForm) -> float:
    """L2 inner product ``int a ^ *b``."""
    return lattice.integrate(a.box, pointwise_inner(a, b))


def integrate_top(w: KForm) -> float:
    """Integral of an n-form: its raw ``dx^1^..^dx^n`` coefficient, no sqrt(g)."""
    if w.degree != w.box.n:
        raise ValueError("only top-degree forms integrate")
    return float(np.sum(w.comps[0])) * w.box.cell_volume


# ---------------------------------------------------------------------------
# calculus


def d(w: KForm) -> KForm:
    """Exterior derivative via spectral partials."""
    box = w.box
    n, k = box.n, w.degree
    if k >= n:
        raise ValueError("exterior derivative of a top-degree form")
    wh = lattice.fft(box, w.comps)
    out = np.zeros((math.comb(n, k + 1),) + box.spectral_shape, dtype=complex)
    mult = box.derivative_multipliers
    for o, j, src, s in _d_table(n, k):
        if s > 0:
            out[o] += mult[j] * wh[src]
        else:
            out[o] -= mult[j] * wh[src]
    out = lattice.ifft(box, out)
    return KForm(box, k + 1, out)


def codifferential(w: KForm) -> KForm:
    """``delta w = (-1)^(n(k+1)+1) * d * w``; equals the formal adjoint of ``d``."""
    n, k = w.box.n, w.degree
    if k < 1:
        raise ValueError("codifferential of a 0-form")
    sign = (-1) ** (n * (k + 1) + 1)
    out = star(d(star(w)))
    return out if sign > 0 else -out


def lie(X: VecField, w: KForm, dealias: bool = False) -> KForm:
    """Lie derivative by Cartan's formula ``i_X d w + d i_X w``."""
    n, k = w.box.n, w.degree
    out = None
    if k < n:
        out = interior(X, d(w), dealias=dealias)
    if k >= 1:
        term = d(interior(X, w, dealias=dealias))
        out = term if out is None else out + term
    return out


def divergence(X: VecField) -> np.ndarray:
    """div X = sum_i d_i X^i (constant metric)."""
    out = np.zeros(X.box.dims)
    for i in range(X.box.n):
        out += lattice.spectral_partial(X.box, X.comps[i], i)
    return out


def dealias_form(w: KForm) -> KForm:
    return KForm(w.box, w.degree, _maybe_dealias(w.box, w.comps, True))
