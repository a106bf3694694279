
import numpy as np
import pytest

from exmhd import exterior as E
from exmhd import lattice as L
from exmhd import mhd
from exmhd.equilibria import as_state, beltrami3
from exmhd.lattice import build_box
from exmhd.mhd import Closure, InitOptions, MhdState


# -- closure -------------------------------------------------------------------


@pytest.mark.parametrize("closure", [Closure("isothermal", c=1.7), Closure("polytropic", K=0.8, gamma=1.4)])
def test_internal_energy_primitive(closure):
    # (rho U)' = h~, by central differences
    rho = np.linspace(0.5, 2.0, 7)
    eps = 1e-6
    F = lambda r: r * closure.internal_energy(r)
    deriv = (F(rho + eps) - F(rho - eps)) / (2 * eps)
    assert np.allclose(deriv, closure.enthalpy(rho), rtol=1e-8)


@pytest.mark.parametrize("closure", [Closure("isothermal", c=1.7), Closure("polytropic", K=0.8, gamma=1.4)])
def test_enthalpy_is_dp_over_rho(closure):
    P = (lambda r: closure.c**2 * r) if closure.kind == "isothermal" else (lambda r: closure.K * r**closure.gamma)
    rho, eps = np.linspace(0.5, 2.0, 7), 1e-6
    dh = (closure.enthalpy(rho + eps) - closure.enthalpy(rho - eps)) / (2 * eps)
    dP = (P(rho + eps) - P(rho - eps)) / (2 * eps)
    assert np.allclose(dh, dP / rho, rtol=1e-7)


@pytest.mark.parametrize("kw", [dict(kind="bogus"), dict(kind="isothermal", c=0.0), dict(kind="polytropic", gamma=1.0), dict(mu0=-1.0)])
def test_closure_validation(kw):
    with pytest.raises(ValueError):
        Closure(**kw)


# -- field helpers ---------------------------------------------------------------


def _static(box, A=None, rho=1.0):
    A = E.zero_form(box, 1) if A is None else A
    return MhdState(0.0, np.full(box.dims, rho), E.zero_form(box, 1), A)


def test_induced_B_zero(box3):
    assert mhd.induced_B(_static(box3)).max_abs() == 0.0


def test_induced_B_of_sine(box2):
    x1, _ = box2.mesh()
    A = E.from_components(box2, 1, [np.zeros(box2.dims), np.sin(x1)])
    B = mhd.induced_B(_static(box2, A))
    assert np.max(np.abs(B.comps[0] - np.cos(x1))) <= 1e-12


def test_induced_B_closed(box3, rng):
    s = mhd.make_initial(box3, Closure(), 3)
    assert E.d(mhd.induced_B(s)).max_abs() <= 1e-11


def test_current_of_constant_field(box3):
    assert np.all(mhd.current(E.constant_form(box3, 2, [1, 2, 3])).comps == 0)


def test_current_of_beltrami(box3):
    c = beltrami3(box3, 1.0, 0.5, 0.25)
    J = mhd.current(c.B, mu0=2.0)
    b = np.stack([c.B.comps[2], -c.B.comps[1], c.B.comps[0]])
    assert np.max(np.abs(J.comps - b / 2.0)) <= 1e-11


def test_current_linear(box3, rng):
    from exmhd.checks import random_form

    B1, B2 = E.d(random_form(box3, rng, 1)), E.d(random_form(box3, rng, 1))
    lhs = mhd.current(B1 * 2.0 + B2 * -3.0).comps
    rhs = 2.0 * mhd.current(B1).comps - 3.0 * mhd.current(B2).comps
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(1.0, np.abs(lhs).max())


# -- rhs -------------------------------------------------------------------------


def test_rhs_static_state_is_zero(box3):
    s = _static(box3, E.zero_form(box3, 1))
    for closure in (Closure("isothermal"), Closure("incompressible")):
        rd, ud, Ad = mhd.rhs(s, closure)
        assert np.max(np.abs(rd)) == 0 and ud.max_abs() <= 1e-15 and Ad.max_abs() == 0


def test_rhs_force_free(box3):
    s = as_state(beltrami3(box3))
    for closure in (Closure("isothermal"), Closure("incompressible")):
        _, ud, Ad = mhd.rhs(s, closure)
        assert ud.max_abs() <= 1e-10
        assert Ad.max_abs() == 0.0


def test_rhs_rejects_nonpositive_density(box2):
    s = _static(box2)
    s = s.replace(rho=s.rho - 2.0)
    with pytest.raises(mhd.DensityError):
        mhd.rhs(s, Closure())


class TrigField:
    """Sum of a few Fourier modes, evaluable anywhere in space."""

    def __init__(self, rng, n, amp, offset=0.0, kmax=1):
        self.terms = []
        for _ in range(3):
            k = rng.integers(-kmax, kmax + 1, n)
            self.terms.append((k.astype(float), amp * rng.uniform(-1, 1), rng.uniform(0, 2 * np.pi)))
        self.offset = offset

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.offset + sum(a * np.cos(np.tensordot(k, x, axes=(0, 0)) + ph) for k, a, ph in self.terms)


def _fd(f, x, axis, h=1e-3):
    e = np.zeros_like(x)
    e[axis] = h
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)


def _oracle_rhs(rho, u, A, metric, closure, x):
    """Index-notation ideal MHD evaluated with 4th-order finite differences."""
    n = len(metric)
    g = np.asarray(metric)
    B = lambda i, j: (lambda y: _fd(A[j], y, i) - _fd(A[i], y, j))
    up = [u[i](x) / g[i] for i in range(n)]
    r = rho(x)
    rho_dot = -sum(_fd(lambda y, i=i: rho(y) * u[i](y) / g[i], x, i) for i in range(n))
    bern = lambda y: 0.5 * sum(u[j](y) ** 2 / g[j] for j in range(n)) + closure.enthalpy(rho(y))
    J = []
    for i in range(n):
        J.append(-sum(_fd(B(j, i), x, j, h=2e-3) / (g[j] * g[i]) for j in range(n)) / closure.mu0)
    u_dot, A_dot = [], []
    for i in range(n):
        adv = sum(up[j] * (_fd(u[i], x, j) - _fd(u[j], x, i)) for j in range(n))
        lor = sum(J[j] * B(j, i)(x) for j in range(n)) / r
        u_dot.append(-adv - _fd(bern, x, i) - lor)
        A_dot.append(-sum(up[j] * B(j, i)(x) for j in range(n)))
    return rho_dot, np.array(u_dot), np.array(A_dot)


@pytest.mark.parametrize("n, metric", [(3, [2.0, 1.0, 0.5]), (2, [1.0, 1.0]), (4, [1.0, 1.5, 1.0, 0.8])])
def test_rhs_matches_finite_difference_oracle(n, metric):
    rng = np.random.default_rng(7 + n)
    box = build_box(n, [16] * n, metric=metric)
    closure = Closure("isothermal", c=1.3, mu0=1.5)
    rho = TrigField(rng, n, 0.03, offset=1.0)
    u = [TrigField(rng, n, 0.1) for _ in range(n)]
    A = [TrigField(rng, n, 0.1) for _ in range(n)]
    X = np.stack(box.mesh())
    state = MhdState(0.0, rho(X), E.from_components(box, 1, [f(X) for f in u]), E.from_components(box, 1, [f(X) for f in A]))
    rd, ud, Ad = mhd.rhs(state, closure)
    idx = (3, 5, 7, 2)[:n]
    x0 = np.array([X[(a,) + idx] for a in range(n)])
    ord_, oud, oAd = _oracle_rhs(rho, u, A, metric, closure, x0)
    assert abs(rd[idx] - ord_) <= 1e-6
    assert np.max(np.abs(ud.comps[(slice(None),) + idx] - oud)) <= 1e-6
    assert np.max(np.abs(Ad.comps[(slice(None),) + idx] - oAd)) <= 1e-6


def test_rhs_incompressible_is_divergence_free(box3):
    closure = Closure("incompressible", rho0=1.2)
    s = mhd.make_initial(box3, closure, 5, InitOptions(B_amp=0.5))
    _, ud, _ = mhd.rhs(s, closure)
    assert E.codifferential(ud).max_abs() <= 1e-11


def test_euler_mode_drops_lorentz(box2):
    closure = Closure()
    s = mhd.make_initial(box2, closure, 1, InitOptions(euler_only=True))
    assert s.A.max_abs() == 0.0
    _, _, Ad = mhd.rhs(s, closure, euler=True)
    assert Ad.max_abs() == 0.0


# -- time stepping ---------------------------------------------------------------


def test_rk4_tiny_step_is_nearly_identity(box2):
    closure = Closure()
    s = mhd.make_initial(box2, closure, 2)
    s2 = mhd.rk4_step(s, closure, 1e-14)
    assert np.max(np.abs(s2.rho - s.rho)) <= 1e-14
    assert (s2.u - s.u).max_abs() <= 1e-14
    assert s2.t == pytest.approx(1e-14)


def test_rk4_does_not_mutate_input(box2):
    closure = Closure()
    s = mhd.make_initial(box2, closure, 2)
    before = s.u.comps.copy()
    mhd.rk4_step(s, closure, 1e-3)
    assert np.array_equal(before, s.u.comps)


def test_rk4_rejects_bad_dt(box2):
    with pytest.raises(ValueError):
        mhd.rk4_step(mhd.make_initial(box2, Closure(), 0), Closure(), 0.0)


def test_rk4_warns_on_cfl_violation(box2):
    s = mhd.make_initial(box2, Closure(), 0)
    with pytest.warns(RuntimeWarning, match="CFL"):
        mhd.rk4_step(s, Closure(), 0.5)


def test_rk4_self_convergence_order():
    box = build_box(2, [32, 32])
    closure = Closure()
    s0 = mhd.make_initial(box, closure, 4)

    def advance(dt, T=0.4):
        s = s0
        for _ in range(int(round(T / dt))):
            s = mhd.rk4_step(s, closure, dt)
        return np.concatenate([s.rho.ravel(), s.u.comps.ravel(), s.A.comps.ravel()])

    a, b, c = advance(0.04), advance(0.02), advance(0.01)
    ratio = np.max(np.abs(a - b)) / np.max(np.abs(b - c))
    assert 14 <= ratio <= 18


def test_frozen_advection_of_potential():
    # Euler-free check: constant u, B = dA with A = sin(x^1) dx^2 translates rigidly.
    box = build_box(2, [16, 16])
    x1, x2 = box.mesh()
    c = 0.3
    u = E.constant_form(box, 1, [c, 0.0])
    A = E.from_components(box, 1, [np.zeros(box.dims), np.sin(x1)])
    s = MhdState(0.0, np.ones(box.dims), u, A)

    def advect_only(state):
        B = mhd.induced_B(state)
        return -E.interior(E.sharp(state.u), B, dealias=True)

    dt, T = 0.01, 0.5
    for _ in range(int(round(T / dt))):
        k1 = advect_only(s)
        k2 = advect_only(s.replace(A=s.A + k1 * (dt / 2)))
        k3 = advect_only(s.replace(A=s.A + k2 * (dt / 2)))
        k4 = advect_only(s.replace(A=s.A + k3 * dt))
        s = s.replace(A=s.A + (k1 + k2 * 2 + k3 * 2 + k4) * (dt / 6))
    # A_2 obeys A_t + c dA_2/dx^1 = 0 and A_1 picks up the matching gauge term
    exact = np.sin(x1 - c * T)
    assert np.max(np.abs(s.A.comps[1] - exact)) <= 1e-8
    B = mhd.induced_B(s)
    assert np.max(np.abs(B.comps[0] - np.cos(x1 - c * T))) <= 1e-8


# -- initial data ------------------------------------------------------------------


def test_make_initial_deterministic(box3):
    a = mhd.make_initial(box3, Closure(), 11)
    b = mhd.make_initial(box3, Closure(), 11)
    assert np.array_equal(a.rho, b.rho)
    assert np.array_equal(a.u.comps, b.u.comps)
    assert np.array_equal(a.A.comps, b.A.comps)


def test_make_initial_bounds(box3):
    s = mhd.make_initial(box3, Closure(), 3, InitOptions(u_amp=0.1, B_amp=0.2, rho_eps=0.1))
    assert 0.9 - 1e-12 <= s.rho.min() and s.rho.max() <= 1.1 + 1e-12
    assert np.max(mhd.speed(s.u)) == pytest.approx(0.1)
    assert np.max(mhd.field_strength(mhd.induced_B(s))) == pytest.approx(0.2)


def test_make_initial_band_limited(box3):
    s = mhd.make_initial(box3, Closure(), 3)
    fh = L.fft(box3, s.u.comps[0])
    for a, kint in enumerate(box3.int_wavenumbers):
        far = np.abs(kint) > box3.dims[a] // 4
        assert np.max(np.abs(np.where(far, fh, 0))) <= 1e-12 * np.abs(fh).max()


def test_make_initial_symmetric_axis(box3):
    s = mhd.make_initial(box3, Closure(), 3, InitOptions(symmetric_axis=2))
    for f in [s.rho, *s.u.comps, *s.A.comps]:
        assert np.max(np.abs(L.spectral_partial(box3, f, 2))) <= 1e-13


def test_make_initial_incompressible(box3):
    closure = Closure("incompressible", rho0=2.0)
    s = mhd.make_initial(box3, closure, 3)
    assert np.all(s.rho == 2.0)
    assert E.codifferential(s.u).max_abs() <= 1e-11


def test_make_initial_euler_only(box3):
    assert mhd.make_initial(box3, Closure(), 3, InitOptions(euler_only=True)).A.max_abs() == 0.0


def test_cfl_limit_formula(box2):
    s = mhd.make_initial(box2, Closure(c=2.0), 3, InitOptions(u_amp=0.5, B_amp=0.0))
    dx = 2 * np.pi / 16
    assert mhd.cfl_limit(s, Closure(c=2.0)) == pytest.approx(0.4 * dx / (0.5 + 2.0))
