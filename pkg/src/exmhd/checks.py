"""Self-check suites behind the ``identities`` and ``oracle`` commands."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exterior as ext
from . import hodge, oracle
from .exterior import KForm, VecField
from .lattice import BoxSpec, build_box, ifft


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<48s} residual={self.residual:.3e}  tol={self.tol:.0e}"


def random_band_limited(box: BoxSpec, rng: np.random.Generator, count: int, kmax: int = 3) -> np.ndarray:
    """``count`` random fields whose modes satisfy ``|k_i| <= kmax``."""
    mask = np.ones(box.spectral_shape, dtype=bool)
    for kint in box.int_wavenumbers:
        mask &= np.abs(kint) <= kmax
    # draw only the retained coefficients; irfftn supplies the conjugate half
    fh = np.zeros((count,) + box.spectral_shape, dtype=complex)
    m = int(mask.sum())
    fh[:, mask] = rng.standard_normal((count, m)) + 1j * rng.standard_normal((count, m))
    out = ifft(box, fh)
    return out / np.max(np.abs(out))


def random_form(box, rng, k, kmax=3) -> KForm:
    return KForm(box, k, random_band_limited(box, rng, math.comb(box.n, k), kmax))


def random_vec(box, rng, kmax=3) -> VecField:
    return VecField(box, random_band_limited(box, rng, box.n, kmax))


def _rel(x: KForm | np.ndarray, scale: float) -> float:
    arr = x.comps if isinstance(x, KForm) else x
    return float(np.max(np.abs(arr))) / max(scale, 1e-300)


def identity_suite(n_list=(2, 3, 4, 5), points: int = 16, seed: int = 0, tol: float = 1e-10) -> list[CheckResult]:
    """d d = 0, ** sign, graded anticommutativity, Leibniz, i_X i_X = 0, adjointness, star reference."""
    rng = np.random.default_rng(seed)
    results = []
    for n in n_list:
        N = points
        for label, metric in (("id", [1.0] * n), ("diag4", [4.0] + [1.0] * (n - 1))):
            box = build_box(n, [N] * n, metric=metric)
            tag = f"n={n} {label}"
            kmax = max(1, N // 6)
            for k in range(0, n - 1):
                w = random_form(box, rng, k, kmax)
                results.append(CheckResult(f"{tag} d(d w)=0 k={k}", _rel(ext.d(ext.d(w)), w.max_abs()), tol))
            for k in range(0, n + 1):
                w = random_form(box, rng, k, kmax)
                ss = ext.star(ext.star(w))
                sign = (-1) ** (k * (n - k))
                results.append(CheckResult(f"{tag} **w=(-1)^(k(n-k))w k={k}", _rel(ss - w * sign, w.max_abs()), tol))
            for k in range(0, n + 1):
                I = tuple(range(k))
                got = ext.star(ext.basis_form(box, I))
                J = tuple(range(k, n))
                want = ext.basis_form(box, J, box.sqrt_g / math.prod(metric[i] for i in I))
                results.append(CheckResult(f"{tag} *dx^I reference k={k}", _rel(got - want, 1.0), tol))
            for k in range(1, n):
                l = min(n - k, 2)
                a, b = random_form(box, rng, k, kmax), random_form(box, rng, l, kmax)
                lhs = ext.wedge(a, b)
                rhs = ext.wedge(b, a) * ((-1) ** (k * l))
                results.append(CheckResult(f"{tag} a^b=(-1)^(kl) b^a k={k} l={l}", _rel(lhs - rhs, 1.0), tol))
                if k + l < n:
                    lhs = ext.d(ext.wedge(a, b))
                    rhs = ext.wedge(ext.d(a), b) + ext.wedge(a, ext.d(b)) * ((-1) ** k)
                    results.append(CheckResult(f"{tag} Leibniz k={k} l={l}", _rel(lhs - rhs, max(lhs.max_abs(), 1.0)), tol))
            X = random_vec(box, rng, kmax)
            for k in range(2, n + 1):
                w = random_form(box, rng, k, kmax)
                ii = ext.interior(X, ext.interior(X, w))
                results.append(CheckResult(f"{tag} i_X i_X w=0 k={k}", _rel(ii, w.max_abs()), tol))
            for k in range(0, n):
                a, b = random_form(box, rng, k, kmax), random_form(box, rng, k + 1, kmax)
                lhs = ext.inner(ext.d(a), b)
                rhs = ext.inner(a, ext.codifferential(b))
                scale = max(abs(lhs), math.sqrt(ext.inner(a, a) * ext.inner(b, b)))
                results.append(CheckResult(f"{tag} <da,b>=<a,delta b> k={k}", abs(lhs - rhs) / scale, tol))
    return results


def hodge_suite(cases=((3, 1), (3, 2), (4, 2), (5, 2)), points: int = 12, seed: int = 1, tol: float = 1e-10) -> list[CheckResult]:
    """Reconstruction, orthogonality and harmonic dimension of the decomposition."""
    rng = np.random.default_rng(seed)
    results = []
    for n, k in cases:
        N = points if n <= 4 else 8
        box = build_box(n, [N] * n, metric=[2.0] + [1.0] * (n - 1))
        tag = f"n={n} k={k}"
        w = random_form(box, rng, k, max(1, N // 6))
        w = w + ext.constant_form(box, k, rng.standard_normal(math.comb(n, k)))
        parts = hodge.hodge_decompose(w)
        norm = math.sqrt(ext.inner(w, w))
        results.append(CheckResult(f"{tag} reconstruction", _rel(parts.total() - w, w.max_abs()), tol))
        pairs = [("exact", "coexact"), ("exact", "harmonic"), ("coexact", "harmonic")]
        worst = max(abs(ext.inner(getattr(parts, p), getattr(parts, q))) for p, q in pairs) / norm**2
        results.append(CheckResult(f"{tag} pairwise orthogonality", worst, tol))
        harm = []
        for _ in range(2 * math.comb(n, k)):
            sample = random_form(box, rng, k, 1) + ext.constant_form(box, k, rng.standard_normal(math.comb(n, k)))
            h = hodge.hodge_decompose(sample).harmonic
            harm.append(h.comps.reshape(h.comps.shape[0], -1)[:, 0])
        rank = np.linalg.matrix_rank(np.array(harm), tol=1e-8)
        results.append(CheckResult(f"{tag} harmonic dimension {rank} vs C(n,k)={math.comb(n, k)}", float(rank != math.comb(n, k)), 0.0))
    return results


def oracle_suite(n_list=(2, 3, 4, 5, 6), samples: int = 100, seed: int = 2, tol: float = 1e-12) -> list[CheckResult]:
    """Pointwise algebra against dense antisymmetric tensors at random points."""
    rng = np.random.default_rng(seed)
    results = []
    for n in n_list:
        metric = list(rng.uniform(0.5, 4.0, n))
        for k in range(0, n + 1):
            a = rng.standard_normal((math.comb(n, k), samples))
            Ta = oracle.to_dense(a.T, n, k)
            want = oracle.star(Ta, n, k, metric)
            got = ext.star_comps(a, n, k, metric).T
            results.append(CheckResult(f"n={n} k={k} star", _rel(got - want, max(1.0, np.abs(want).max())), tol))
            want = oracle.norm2(Ta, k, metric)
            got = ext.norm2_comps(a, n, k, metric)
            results.append(CheckResult(f"n={n} k={k} norm2", _rel(got - want, max(1.0, np.abs(want).max())), tol))
            if k >= 1:
                X = rng.standard_normal((n, samples))
                want = oracle.interior(X.T, Ta, n, k)
                got = ext.interior_comps(X, a, n, k).T
                results.append(CheckResult(f"n={n} k={k} interior", _rel(got - want, max(1.0, np.abs(want).max())), tol))
            for l in range(0, n - k + 1):
                b = rng.standard_normal((math.comb(n, l), samples))
                want = oracle.wedge(Ta, oracle.to_dense(b.T, n, l), n, k, l)
                got = ext.wedge_comps(a, b, n, k, l).T
                results.append(CheckResult(f"n={n} k={k} l={l} wedge", _rel(got - want, max(1.0, np.abs(want).max())), tol))
    return results
