"""Hodge decomposition on the closed flat torus.

There is no boundary, so the decomposition is exact + coexact + harmonic,
and harmonic forms are exactly the constant-coefficient ones.  Every
Poisson solve uses the mean-zero convention; harmonic content is split off
first and handled separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lattice
from .exterior import KForm, codifferential, constant_form, d, inner, multi_indices, basis_form
from .lattice import BoxSpec


@dataclass(frozen=True, eq=False)
class HodgeParts:
    exact: KForm
    coexact: KForm
    harmonic: KForm

    def total(self) -> KForm:
        return self.exact + self.coexact + self.harmonic


def _inverse_laplacian_hat(box: BoxSpec, fh: np.ndarray) -> np.ndarray:
    sym = box.laplacian_symbol
    safe = np.where(sym == 0.0, 1.0, sym)
    return np.where(sym == 0.0, 0.0, fh / safe)


def poisson(box: BoxSpec, f: np.ndarray) -> np.ndarray:
    """Mean-zero solution ``p`` of ``sum_i g^ii d_i^2 p = f``.

    Raises ``ValueError`` when ``f`` has a nonzero mean (no periodic solution).
    """
    f = np.asarray(f, dtype=float)
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    if abs(float(np.mean(f))) > 1e-10 * max(scale, 1e-300) and scale > 0:
        raise ValueError("nonzero mean: periodic Poisson problem has no solution")
    return lattice.ifft(box, _inverse_laplacian_hat(box, lattice.fft(box, f)))


def _green(w: KForm) -> KForm:
    """Componentwise inverse of the Hodge Laplacian on the non-harmonic modes."""
    # Hodge Laplacian = -(sum g^ii d_i^2) componentwise on a flat torus.
    box = w.box
    out = -lattice.ifft(box, _inverse_laplacian_hat(box, lattice.fft(box, w.comps)))
    return KForm(box, w.degree, out)


def harmonic_part(w: KForm) -> KForm:
    """Spatial mean of each component (the projection onto constant forms)."""
    means = w.comps.reshape(w.comps.shape[0], -1).mean(axis=1)
    return constant_form(w.box, w.degree, means)


def hodge_decompose(w: KForm) -> HodgeParts:
    """Split ``w = d(alpha) + delta(beta) + harmonic`` for ``0 < k < n``."""
    n, k = w.box.n, w.degree
    if k in (0, n):
        raise ValueError(f"decomposition needs 0 < k < n, got k={k}, n={n}")
    harm = harmonic_part(w)
    G = _green(w - harm)
    exact = d(codifferential(G))
    coexact = codifferential(d(G))
    return HodgeParts(exact, coexact, harm)


def harmonic_basis(box: BoxSpec, k: int) -> list[KForm]:
    """The ``C(n, k)`` constant forms ``dx^I``, normalised in L2."""
    out = []
    for I in multi_indices(box.n, k):
        e = basis_form(box, I)
        out.append(e * (1.0 / math.sqrt(inner(e, e))))
    return out


def vector_potential(B: KForm, tol: float = 1e-9) -> tuple[KForm, KForm]:
    """Coulomb-gauge potential: returns ``(A, xi)`` with ``B = dA + xi``, ``delta A = 0``.

    ``xi`` is the harmonic (constant) part of ``B``.
    """
    if B.degree != 2:
        raise ValueError("vector_potential expects a 2-form")
    if B.box.n > 2:
        scale = max(B.max_abs(), 1e-300)
        if d(B).max_abs() > tol * scale:
            raise ValueError("input 2-form is not closed")
    xi = harmonic_part(B)
    A = codifferential(_green(B - xi))
    return A, xi


def leray_project(u: KForm) -> KForm:
    """Remove the exact part of a 1-form; coexact and harmonic parts are kept."""
    if u.degree != 1:
        raise ValueError("leray_project expects a 1-form")
    G = _green(u - harmonic_part(u))
    return u - d(codifferential(G))
