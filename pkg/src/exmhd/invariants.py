"""Conserved functionals of ideal MHD on the torus, sampled into reports.

Form integrals (top-degree forms such as ``u ^ B^m``) use the raw
``dx^1 ^ .. ^ dx^n`` coefficient; metric integrals (mass, energy, momenta,
Casimirs weighted by the mass form) carry ``sqrt(g)``.  Mixing the two up
double-counts ``sqrt(g)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lattice
from .exterior import KForm, d, integrate_top, norm2, wedge, wedge_power
from .hodge import harmonic_basis
from .lattice import BoxSpec
from .mhd import Closure, MhdState, field_strength, induced_B, speed

SYMMETRY_TOL = 1e-6


def default_battery() -> dict:
    """Test functions standing in for an arbitrary f."""
    return {
        "id": lambda t: t,
        "sq": lambda t: t * t,
        "cube": lambda t: t * t * t,
        "cos": np.cos,
    }


@dataclass(frozen=True)
class ReportFlags:
    mhd: bool = True
    symmetric_axis: int | None = None


@dataclass
class InvariantReport:
    """One sample of every functional that applies to the run."""

    t: float
    N: float
    H: float
    P: tuple
    C: float | None = None
    M: float | None = None
    Hf: float | None = None
    ortho: tuple | None = None
    W: dict | None = None
    E: dict | None = None
    Pms: dict | None = None
    Q: dict | None = None
    maxu: float = 0.0
    maxB: float = 0.0
    minrho: float = 0.0

    def items(self) -> list[tuple[str, float]]:
        out = [("t", self.t), ("N", self.N), ("H", self.H)]
        out += [(f"P{i + 1}", p) for i, p in enumerate(self.P)]
        for name in ("C", "M", "Hf"):
            val = getattr(self, name)
            if val is not None:
                out.append((name, val))
        if self.ortho is not None:
            out += [(f"ortho{j + 1}", r) for j, r in enumerate(self.ortho)]
        for name in ("W", "E", "Pms", "Q"):
            fam = getattr(self, name)
            if fam is not None:
                out += [(f"{name}_{key}", val) for key, val in fam.items()]
        out += [("maxu", self.maxu), ("maxB", self.maxB), ("minrho", self.minrho)]
        return out

    def columns(self) -> list[str]:
        return [k for k, _ in self.items()]

    def values(self) -> list[float]:
        return [v for _, v in self.items()]

    def as_dict(self) -> dict[str, float]:
        return dict(self.items())


def relative_drift(start: float, end: float, eps: float = 1e-8) -> float:
    """``|end - start| / |start|``, or the absolute drift when ``|start| < eps``."""
    scale = abs(start)
    return abs(end - start) / scale if scale >= eps else abs(end - start)


# ---------------------------------------------------------------------------
# functionals


def total_mass(state: MhdState) -> float:
    return lattice.integrate(state.box, state.rho)


def total_energy(state: MhdState, closure: Closure) -> float:
    """Kinetic + internal + magnetic energy, ``|B|^2 = B_ij B^ij``."""
    rho = state.rho
    B = induced_B(state)
    dens = (0.5 * norm2(state.u) + closure.internal_energy(rho)) * rho + norm2(B) / (4.0 * closure.mu0)
    return lattice.integrate(state.box, dens)


def total_momentum(state: MhdState) -> np.ndarray:
    box = state.box
    return np.array([lattice.integrate(box, state.u.comps[i] / box.metric[i] * state.rho) for i in range(box.n)])


def _check_closed(beta: KForm, tol=1e-9):
    if beta.degree < beta.box.n:
        scale = max(beta.max_abs(), 1e-300)
        res = d(beta).max_abs()
        if res > tol * scale:
            raise ValueError(f"2-form is not closed (|d beta| = {res:.2e})")


def odd_helicity(alpha: KForm, beta: KForm, m: int, check: bool = True) -> float:
    """``int alpha ^ beta^m`` on a torus of dimension ``2m + 1``."""
    n = alpha.box.n
    if n % 2 == 0 or n != 2 * m + 1:
        raise ValueError(f"helicity needs odd n = 2m+1, got n={n}, m={m}")
    if check:
        _check_closed(beta)
    return integrate_top(wedge(alpha, wedge_power(beta, m)))


def density_ratio(beta: KForm, rho: np.ndarray) -> np.ndarray:
    """Pointwise ``beta^m / nu`` for even ``n = 2m``."""
    box = beta.box
    if box.n % 2:
        raise ValueError("Casimir ratio needs even n")
    top = wedge_power(beta, box.n // 2)
    return top.comps[0] / (rho * box.sqrt_g)


def even_casimir(beta: KForm, rho: np.ndarray, f) -> float:
    """``int f(beta^m / nu) nu`` for ``n = 2m``."""
    if np.min(rho) <= 0:
        raise ValueError("density must be positive")
    q = density_ratio(beta, rho)
    return lattice.integrate(beta.box, f(q) * rho)


def symmetry_residual(box: BoxSpec, fields, axis: int) -> float:
    """Largest ``|d_axis f|`` over the given scalar fields."""
    res = 0.0
    for f in fields:
        res = max(res, float(np.max(np.abs(lattice.spectral_partial(box, f, axis)))))
    return res


def state_symmetry_residual(state: MhdState, axis: int) -> float:
    fields = [state.rho, *state.u.comps, *state.A.comps]
    return symmetry_residual(state.box, fields, axis)


def symmetric_casimir(box: BoxSpec, s: np.ndarray, rho: np.ndarray, axis: int, f, index: int = 0) -> float:
    """``int_Sigma f(s) sigma`` over the slice ``x^axis = const``.

    ``sigma = rho dV_Sigma`` with ``dV_Sigma ^ dx^axis = dV``, so the slice
    measure carries the full ``sqrt(g)``.
    """
    res = symmetry_residual(box, [s, rho], axis)
    scale = max(1.0, float(np.max(np.abs(s))), float(np.max(np.abs(rho))))
    if res > SYMMETRY_TOL * scale:
        raise ValueError(f"fields depend on x^{axis + 1} (residual {res:.2e}); not a symmetric state")
    s_sl = np.take(s, index, axis=axis)
    r_sl = np.take(rho, index, axis=axis)
    cell = math.prod(h for i, h in enumerate(box.spacing) if i != axis)
    return float(np.sum(f(s_sl) * r_sl)) * box.sqrt_g * cell


def orthogonality(B: KForm, m: int) -> np.ndarray:
    """Residuals ``int gamma_j ^ B^m`` against the normalised harmonic 1-forms."""
    n = B.box.n
    if n != 2 * m + 1:
        raise ValueError(f"orthogonality needs n = 2m+1, got n={n}, m={m}")
    Bm = wedge_power(B, m)
    return np.array([integrate_top(wedge(g, Bm)) for g in harmonic_basis(B.box, 1)])


# ---------------------------------------------------------------------------


def report(state: MhdState, closure: Closure, battery: dict | None = None, flags: ReportFlags | None = None) -> InvariantReport:
    """Evaluate every functional applicable to the dimension, mode and symmetry."""
    battery = default_battery() if battery is None else battery
    flags = flags or ReportFlags()
    box = state.box
    n = box.n
    m = n // 2
    B = induced_B(state)
    w = d(state.u)
    rep = InvariantReport(
        t=state.t,
        N=total_mass(state),
        H=total_energy(state, closure),
        P=tuple(float(p) for p in total_momentum(state)),
        maxu=float(np.max(speed(state.u))),
        maxB=float(np.max(field_strength(B))),
        minrho=float(np.min(state.rho)),
    )
    if n % 2:
        if flags.mhd:
            rep.C = odd_helicity(state.u, B, m, check=False)
            rep.M = odd_helicity(state.A, B, m, check=False)
        rep.Hf = odd_helicity(state.u, w, m, check=False)
        if flags.mhd:
            rep.ortho = tuple(float(r) for r in orthogonality(B, m))
    else:
        if flags.mhd:
            q = density_ratio(B, state.rho)
            rep.W = {k: lattice.integrate(box, f(q) * state.rho) for k, f in battery.items()}
        q = density_ratio(w, state.rho)
        rep.E = {k: lattice.integrate(box, f(q) * state.rho) for k, f in battery.items()}
    ax = flags.symmetric_axis
    if ax is not None:
        if flags.mhd:
            rep.Pms = {k: symmetric_casimir(box, state.A.comps[ax], state.rho, ax, f) for k, f in battery.items()}
        rep.Q = {k: symmetric_casimir(box, state.u.comps[ax], state.rho, ax, f) for k, f in battery.items()}
    return rep
