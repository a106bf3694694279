"""Magneto-hydrostatic equilibrium fixtures and their residuals.

Nothing here solves for equilibria; the module only builds known
candidates and measures how well they satisfy ``dh = -(1/rho0) i_J B``
with ``dB = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exterior import KForm, VecField, d, from_components, interior, scalar_form, star, flat
from .lattice import BoxSpec
from .mhd import current


@dataclass(frozen=True, eq=False)
class MhsCandidate:
    B: KForm
    h: np.ndarray
    rho0: float = 1.0
    mu0: float = 1.0


def mhs_residual(c: MhsCandidate, eps: float = 1e-300) -> tuple[float, float]:
    """Force-balance and closedness residuals, scaled by a magnetic-pressure gradient."""
    box = c.B.box
    J = current(c.B, c.mu0)
    force = d(scalar_form(box, c.h)) + interior(J, c.B) * (1.0 / c.rho0)
    scale = max(c.B.max_abs() ** 2 / (c.mu0 * c.rho0 * min(box.lengths)), eps)
    closure = d(c.B).max_abs() if c.B.degree < box.n else 0.0
    return force.max_abs() / scale, closure / scale


def abc_field(box: BoxSpec, a: float, b: float, c: float) -> VecField:
    """Single-mode field with ``curl v = v`` on the 2*pi-periodic 3-torus."""
    x1, x2, x3 = box.mesh()
    v = np.stack([
        a * np.sin(x3) + c * np.cos(x2),
        b * np.sin(x1) + a * np.cos(x3),
        c * np.sin(x2) + b * np.cos(x1),
    ])
    return VecField(box, v)


def beltrami3(box: BoxSpec, a=1.0, b=1.0, c=1.0, rho0=1.0, mu0=1.0) -> MhsCandidate:
    """Force-free fixture ``B = i_v dV`` with ``v`` an eigenfield of curl."""
    if box.n != 3:
        raise ValueError("beltrami3 needs n = 3")
    if any(g != 1.0 for g in box.metric) or any(abs(L - 2 * np.pi) > 1e-12 for L in box.lengths):
        raise ValueError("beltrami3 needs the identity metric and periods 2*pi")
    v = abc_field(box, a, b, c)
    B = star(flat(v))
    return MhsCandidate(B, np.zeros(box.dims), rho0, mu0)


def slab2(box: BoxSpec, profile=None, h0=1.0, rho0=1.0, mu0=1.0) -> MhsCandidate:
    """Pressure-balanced slab ``B = b(x^1) dx^1 ^ dx^2``.

    ``h = h0 - |B|^2 / (4 mu0 rho0)``, i.e. ``h0 - b^2 / (2 mu0 rho0)`` with the
    full-tensor norm (plus the metric factor for non-identity metrics).
    """
    if box.n != 2:
        raise ValueError("slab2 needs n = 2")
    if profile is None:
        profile = lambda x: 1.0 + 0.3 * np.sin(x)
    x1 = box.mesh()[0]
    bvals = np.asarray(profile(x1), dtype=float) * np.ones(box.dims)
    B = from_components(box, 2, [bvals])
    mag = 2.0 * bvals**2 / (box.metric[0] * box.metric[1])
    h = h0 - mag / (4.0 * mu0 * rho0)
    return MhsCandidate(B, h, rho0, mu0)


def as_state(c: MhsCandidate):
    """Static MHD state (u = 0, rho = rho0) whose magnetic field is ``c.B``.

    The potential comes from the Coulomb-gauge solve; any constant part of
    ``B`` rides along as the harmonic background.
    """
    from .exterior import zero_form
    from .hodge import vector_potential
    from .mhd import MhdState

    box = c.B.box
    A, xi = vector_potential(c.B)
    if xi.max_abs() <= 1e-14 * max(1.0, c.B.max_abs()):
        xi = None
    return MhdState(0.0, np.full(box.dims, c.rho0), zero_form(box, 1), A, xi)
