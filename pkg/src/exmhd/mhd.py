"""Time evolution of ideal MHD written with differential forms.

The state carries the mass density, the velocity 1-form and the magnetic
potential 1-form ``A`` in Weyl gauge (scalar potential fixed to zero), so
``B = dA (+ xi)`` is closed to rounding at every step.  ``xi`` is an
optional constant harmonic 2-form; it never changes because Lie advection
only adds exact forms to ``B``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import lattice
from .exterior import (
    KForm,
    VecField,
    codifferential,
    d,
    interior,
    norm2,
    scalar_form,
    sharp,
    zero_form,
)
from .hodge import leray_project
from .lattice import BoxSpec

CLOSURE_KINDS = ("incompressible", "isothermal", "polytropic")


class DensityError(RuntimeError):
    """Raised when the density stops being strictly positive."""


class NonFiniteError(RuntimeError):
    """Raised when a step produces NaN or inf."""


@dataclass(frozen=True)
class Closure:
    """Barotropic thermodynamic closure.

    ``kind`` is one of ``incompressible`` (uses ``rho0``), ``isothermal``
    (uses ``c``) or ``polytropic`` (uses ``K`` and ``gamma``).
    """

    kind: str = "isothermal"
    rho0: float = 1.0
    c: float = 1.0
    K: float = 1.0
    gamma: float = 5.0 / 3.0
    mu0: float = 1.0

    def __post_init__(self):
        if self.kind not in CLOSURE_KINDS:
            raise ValueError(f"unknown closure {self.kind!r}; expected one of {CLOSURE_KINDS}")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.kind == "incompressible" and self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if self.kind == "isothermal" and self.c <= 0:
            raise ValueError("sound speed c must be positive")
        if self.kind == "polytropic" and (self.K <= 0 or self.gamma <= 1):
            raise ValueError("polytropic closure needs K > 0 and gamma > 1")

    @property
    def incompressible(self) -> bool:
        return self.kind == "incompressible"

    def enthalpy(self, rho):
        """Primitive ``h~(rho)`` with ``dh~ = dP / rho``."""
        if self.kind == "isothermal":
            return self.c**2 * np.log(rho)
        if self.kind == "polytropic":
            return self.K * self.gamma / (self.gamma - 1) * rho ** (self.gamma - 1)
        return np.zeros_like(rho)

    def internal_energy(self, rho):
        """``U(rho)`` with ``(rho U)' = h~``; the incompressible constant is 0."""
        if self.kind == "isothermal":
            return self.c**2 * (np.log(rho) - 1.0)
        if self.kind == "polytropic":
            return self.K / (self.gamma - 1) * rho ** (self.gamma - 1)
        return np.zeros_like(rho)

    def sound_speed(self, rho) -> float:
        if self.kind == "isothermal":
            return self.c
        if self.kind == "polytropic":
            return float(np.max(np.sqrt(self.K * self.gamma * rho ** (self.gamma - 1))))
        return 0.0


@dataclass(frozen=True, eq=False)
class MhdState:
    t: float
    rho: np.ndarray
    u: KForm
    A: KForm
    xi: KForm | None = None

    @property
    def box(self) -> BoxSpec:
        return self.u.box

    def replace(self, **kw) -> "MhdState":
        return replace(self, **kw)


def induced_B(state: MhdState) -> KForm:
    """``B = dA`` plus the harmonic background, if any."""
    B = d(state.A)
    return B if state.xi is None else B + state.xi


def current(B: KForm, mu0: float = 1.0) -> VecField:
    """``J = (delta B)^sharp / mu0``."""
    J = sharp(codifferential(B))
    return VecField(J.box, J.comps / mu0)


def field_strength(B: KForm) -> np.ndarray:
    """Pointwise magnitude ``sqrt(|B|^2 / 2)``; equals ``|b|`` for n = 3."""
    return np.sqrt(0.5 * norm2(B))


def speed(u: KForm) -> np.ndarray:
    return np.sqrt(norm2(u))


def check_density(rho: np.ndarray, t: float = float("nan")):
    rmin = float(np.min(rho))
    if not rmin > 0:
        raise DensityError(f"non-positive density {rmin:.3e} at t={t:.6g}")


def rhs(state: MhdState, closure: Closure, euler: bool = False):
    """Time derivatives ``(rho_dot, u_dot, A_dot)``; quadratic products dealiased."""
    box = state.box
    rho = state.rho
    check_density(rho, state.t)
    uv = sharp(state.u)
    adv = interior(uv, d(state.u), dealias=True)

    lorentz = None
    if not euler:
        B = induced_B(state)
        J = current(B, closure.mu0)
        ijb = interior(J, B, dealias=True)
        if closure.incompressible:
            lorentz = ijb * (1.0 / closure.rho0)
        else:
            inv_rho = lattice.dealias(box, 1.0 / rho)
            lorentz = KForm(box, 1, lattice.dealias(box, ijb.comps * inv_rho[None]))
        A_dot = -interior(uv, B, dealias=True)
    else:
        A_dot = zero_form(box, 1)

    if closure.incompressible:
        force = -adv if lorentz is None else -(adv + lorentz)
        u_dot = leray_project(force)
        rho_dot = np.zeros(box.dims)
    else:
        ke = 0.5 * np.sum(state.u.comps * uv.comps, axis=0)
        bern = lattice.dealias(box, ke + closure.enthalpy(rho))
        u_dot = -(adv + d(scalar_form(box, bern)))
        if lorentz is not None:
            u_dot = u_dot - lorentz
        mom = lattice.dealias(box, rho[None] * uv.comps)
        mh = lattice.fft(box, mom)
        acc = np.zeros(box.spectral_shape, dtype=complex)
        for i in range(box.n):
            acc += box.derivative_multipliers[i] * mh[i]
        rho_dot = -lattice.ifft(box, acc)
    return rho_dot, u_dot, A_dot


def cfl_limit(state: MhdState, closure: Closure, safety: float = 0.4) -> float:
    """Largest stable step estimate ``safety * dx_min / (|u| + c_s + v_A)``."""
    box = state.box
    dx = min(h * math.sqrt(g) for h, g in zip(box.spacing, box.metric))
    rho_min = closure.rho0 if closure.incompressible else float(np.min(state.rho))
    vmax = float(np.max(speed(state.u)))
    cs = closure.sound_speed(state.rho)
    vA = float(np.max(field_strength(induced_B(state)))) / math.sqrt(closure.mu0 * rho_min)
    total = vmax + cs + vA
    return math.inf if total == 0 else safety * dx / total


def _combine(state: MhdState, dt, k) -> MhdState:
    rho_dot, u_dot, A_dot = k
    return MhdState(
        state.t,
        state.rho + dt * rho_dot,
        KForm(state.box, 1, state.u.comps + dt * u_dot.comps),
        KForm(state.box, 1, state.A.comps + dt * A_dot.comps),
        state.xi,
    )


def rk4_step(state: MhdState, closure: Closure, dt: float, euler: bool = False, check_cfl: bool = True) -> MhdState:
    """One classical Runge-Kutta step; returns a new state."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if check_cfl:
        lim = cfl_limit(state, closure)
        if dt > lim:
            warnings.warn(f"dt={dt:.3g} exceeds CFL estimate {lim:.3g}", RuntimeWarning, stacklevel=2)
    k1 = rhs(state, closure, euler)
    k2 = rhs(_combine(state, dt / 2, k1), closure, euler)
    k3 = rhs(_combine(state, dt / 2, k2), closure, euler)
    k4 = rhs(_combine(state, dt, k3), closure, euler)
    w = dt / 6.0
    rho = state.rho + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    u = state.u.comps + w * (k1[1].comps + 2 * k2[1].comps + 2 * k3[1].comps + k4[1].comps)
    A = state.A.comps + w * (k1[2].comps + 2 * k2[2].comps + 2 * k3[2].comps + k4[2].comps)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u)) and np.all(np.isfinite(A))):
        raise NonFiniteError(f"non-finite values after step to t={state.t + dt:.6g}")
    box = state.box
    return MhdState(state.t + dt, rho, KForm(box, 1, u), KForm(box, 1, A), state.xi)


# ---------------------------------------------------------------------------
# initial data


@dataclass
class InitOptions:
    """Knobs for :func:`make_initial`.

    ``kmax`` bounds the integer mode numbers per axis (default ``N_i // 4``);
    inside that band amplitudes fall off as ``exp(-|k|^2 / (2 k_decay^2))``.
    ``symmetric_axis`` is 0-based.
    """

    u_amp: float = 0.1
    B_amp: float = 0.1
    rho_mean: float = 1.0
    rho_eps: float = 0.1
    kmax: int | None = None
    k_decay: float = 1.5
    symmetric_axis: int | None = None
    euler_only: bool = False
    incompressible: bool = False


def random_field(box: BoxSpec, rng: np.random.Generator, opts: InitOptions) -> np.ndarray:
    """Band-limited random scalar field with unit max-abs."""
    noise = rng.standard_normal(box.dims)
    fh = lattice.fft(box, noise)
    ksq = 0.0
    mask = np.ones(box.spectral_shape, dtype=bool)
    for a, (kint, N) in enumerate(zip(box.int_wavenumbers, box.dims)):
        kmax = N // 4 if opts.kmax is None else min(opts.kmax, N // 4)
        mask &= np.abs(kint) <= kmax
        if opts.symmetric_axis == a:
            mask &= kint == 0
        ksq = ksq + kint**2
    env = np.exp(-ksq / (2.0 * opts.k_decay**2))
    f = lattice.ifft(box, fh * mask * env)
    peak = float(np.max(np.abs(f)))
    return f / peak if peak > 0 else f


def make_initial(box: BoxSpec, closure: Closure, seed: int, options: InitOptions | None = None) -> MhdState:
    """Reproducible random band-limited initial state."""
    opts = options or InitOptions()
    if opts.symmetric_axis is not None and not 0 <= opts.symmetric_axis < box.n:
        raise ValueError("symmetric_axis out of range")
    if not 0 <= opts.rho_eps <= 0.2:
        raise ValueError("rho_eps must lie in [0, 0.2]")
    rng = np.random.default_rng(seed)
    fluct = random_field(box, rng, opts)
    ucomps = np.stack([random_field(box, rng, opts) for _ in range(box.n)])
    Acomps = np.stack([random_field(box, rng, opts) for _ in range(box.n)])

    incompressible = opts.incompressible or closure.incompressible
    if incompressible:
        rho = np.full(box.dims, closure.rho0 if closure.incompressible else opts.rho_mean)
    else:
        rho = opts.rho_mean * (1.0 + opts.rho_eps * fluct)

    u = KForm(box, 1, ucomps)
    if incompressible:
        u = leray_project(u)
    vmax = float(np.max(speed(u)))
    u = u * (opts.u_amp / vmax) if vmax > 0 else u

    if opts.euler_only or opts.B_amp == 0:
        A = zero_form(box, 1)
    else:
        A = KForm(box, 1, Acomps)
        bmax = float(np.max(field_strength(d(A))))
        A = A * (opts.B_amp / bmax) if bmax > 0 else A
    return MhdState(0.0, rho, u, A)


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunResult:
    reports: list = field(default_factory=list)
    final: MhdState | None = None


def run(config, initial: MhdState | None = None, on_snapshot=None) -> RunResult:
    """Advance a :class:`~exmhd.config.SimConfig` to ``t_end``.

    Invariants are sampled at t=0, every ``report_every`` steps and at the
    final step.  ``on_snapshot(step, state)`` fires every ``snapshot_every``
    steps when that is positive.
    """
    from .invariants import ReportFlags, default_battery, report

    box = config.build_box()
    closure = config.closure
    euler = config.mode == "euler"
    state = initial if initial is not None else make_initial(box, closure, config.seed, config.init_options())
    flags = ReportFlags(mhd=not euler, symmetric_axis=config.symmetric_axis)
    battery = default_battery()

    nsteps = int(round(config.t_end / config.dt)) if config.t_end > 0 else 0
    result = RunResult()
    result.reports.append(report(state, closure, battery, flags))
    if on_snapshot and config.snapshot_every > 0:
        on_snapshot(0, state)
    for step in range(1, nsteps + 1):
        state = rk4_step(state, closure, config.dt, euler=euler)
        if step % config.report_every == 0 or step == nsteps:
            result.reports.append(report(state, closure, battery, flags))
        if on_snapshot and config.snapshot_every > 0 and step % config.snapshot_every == 0:
            on_snapshot(step, state)
    result.final = state
    return result
