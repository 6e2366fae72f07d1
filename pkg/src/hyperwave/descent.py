"""Descent operators between odd space dimensions, their integral-kernel
inverses, the composite reduction to the 1-d wave equation, and the free
radial wave propagator built from it.

States in d dimensions are even two-component half-grid functions; the
composite descent lands on the odd module of the 1-d machinery.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from . import coeffs
from .grids import Grid, GridFunction, StateVector, odd_state_norm, weighted_state_norm
from .halfwave import evolve_S1
from .jets import Taylor, jet_seed
from .model import HEIGHT

__all__ = [
    "apply_Ld",
    "apply_L1",
    "descent_step",
    "descent_step_inverse",
    "descent_full",
    "descent_full_inverse",
    "apply_Ld_series",
    "apply_L1_series",
    "descent_full_series",
    "intertwining_residual",
    "stepwise_intertwining_residual",
    "evolve_free_wave",
    "direct_fd_oracle",
    "fd_oracle_series",
    "FDWaveResult",
    "descent_norm_ratio",
    "t22_bound_ratio",
]


def _dim(d):
    return int(getattr(d, "d", d))


def apply_Ld(d, state: StateVector) -> StateVector:
    """Free radial wave generator in d dimensions on even half-grid states."""
    d = _dim(d)
    grid = state.grid
    eta = grid.eta
    c = coeffs.wave_coeffs(d, eta)
    f1, f2 = state.f1.values, state.f2.values
    f1p = grid.deriv_half(f1, "even")
    f1pp = grid.deriv_half(f1p, "odd")
    f2p = grid.deriv_half(f2, "even")
    row2 = c.c11 * f1p + c.c12 * f1pp + c.c20 * f2 + c.c21 * f2p
    return StateVector(
        GridFunction(grid, f2.copy(), "even"), GridFunction(grid, row2, "even")
    )


def apply_L1(state: StateVector) -> StateVector:
    """1-d wave generator on odd full-grid states.

    Repeated collocation derivatives carry boundary roundoff, so the output
    parity is enforced structurally rather than asserted.
    """
    grid = state.grid
    y = grid.y
    c11 = coeffs.c11_fn(1, y)
    c12 = coeffs.c12_fn(y)
    c20 = coeffs.c20_fn(1, y)
    c21 = coeffs.c21_fn(y)
    f1 = state.f1.full()
    f2 = state.f2.full()
    f1p = grid.D @ f1
    row2 = c11 * f1p + c12 * (grid.D @ f1p) + c20 * f2 + c21 * (grid.D @ f2)
    return StateVector(
        GridFunction(grid, grid.restrict(f2), "odd"),
        GridFunction(grid, grid.restrict(row2), "odd"),
    )


def descent_step(d, state: StateVector) -> StateVector:
    """One descent step d -> d-2 (or the terminal 3 -> 1 multiplication)."""
    d = _dim(d)
    if d < 3 or d % 2 == 0:
        raise ValueError(f"descent steps need odd d >= 3, got d={d}")
    grid = state.grid
    if state.f1.parity != "even":
        raise ValueError("descent input must be an even radial state")
    if d == 3:
        eta = grid.eta
        return StateVector(
            GridFunction(grid, eta * state.f1.values, "odd"),
            GridFunction(grid, eta * (state.f2.values - state.f1.values), "odd"),
        )
    eta = grid.eta
    c1 = coeffs.c1_fn(eta)
    c2 = coeffs.c2_fn(eta)
    ld = apply_Ld(d, state)
    out1 = (d - 2.0) * state.f1.values + c1 * grid.deriv_half(state.f1.values, "even") + c2 * ld.f1.values
    out2 = (d - 2.0) * state.f2.values + c1 * grid.deriv_half(state.f2.values, "even") + c2 * ld.f2.values
    return StateVector(GridFunction(grid, out1, "even"), GridFunction(grid, out2, "even"))


def _scaled_integral(grid: Grid, g_full, weight, power, quad_order=None):
    """At each positive node eta: integral_0^1 weight(t*eta) t^power g(t*eta) dt."""
    if quad_order is None:
        quad_order = grid.N + 16
    tq, wq = leggauss(quad_order)
    tq = 0.5 * (tq + 1.0)
    wq = 0.5 * wq
    pts = np.outer(grid.eta, tq)
    flat = pts.ravel()
    gv = grid.interpolate(np.asarray(g_full), flat).reshape(pts.shape)
    wv = weight(flat).reshape(pts.shape) if weight is not None else 1.0
    return (gv * wv * tq**power) @ wq


def descent_step_inverse(d, state: StateVector) -> StateVector:
    """Inverse of one descent step, by the integrated-by-parts kernel form.

    The homogeneous-solution coefficients vanish for smooth targets, so the
    particular solution built from the kernel weights is the inverse.
    """
    d = _dim(d)
    grid = state.grid
    eta = grid.eta
    if d == 3:
        if state.f1.parity != "odd":
            raise ValueError("the 3 -> 1 inverse expects an odd pair")
        g1p = grid.D @ state.f1.full()
        g2p = grid.D @ state.f2.full()
        f1 = _scaled_integral(grid, g1p, None, 0)
        f2 = _scaled_integral(grid, g1p + g2p, None, 0)
        return StateVector(GridFunction(grid, f1, "even"), GridFunction(grid, f2, "even"))
    if state.f1.parity != "even":
        raise ValueError("descent inverses for d > 3 expect even pairs")
    h = HEIGHT.h(eta)
    g1_full = state.f1.full()
    g2_full = state.f2.full()
    J11 = _scaled_integral(grid, g1_full, lambda x: t11w(d, x), d - 3)
    J12 = _scaled_integral(grid, g1_full, lambda x: t12w(d, x), d - 3)
    J21 = _scaled_integral(grid, g2_full, coeffs.t21_fn, d - 3)
    J22 = _scaled_integral(grid, g2_full, coeffs.t22_fn, d - 3)
    S = np.sqrt(2.0 + eta * eta)
    local = (3.0 - 2.0 * S) / (S - 1.0) * state.f1.values
    f1 = -h * J11 + J12 - h * J21 + J22
    f2 = -(d - 3.0) * h * J11 + (d - 2.0) * J12 + local - (d - 3.0) * h * J21 + (d - 2.0) * J22
    return StateVector(GridFunction(grid, f1, "even"), GridFunction(grid, f2, "even"))


def t11w(d, x):
    return coeffs.t11_fn(d, x)


def t12w(d, x):
    return coeffs.t12_fn(d, x)


def descent_full(d, state: StateVector) -> StateVector:
    """Composite descent D_3 o D_5 o ... o D_d onto the odd 1-d module."""
    d = _dim(d)
    out = state
    for dd in range(d, 1, -2):
        out = descent_step(dd, out)
    return out


def descent_full_inverse(d, state: StateVector) -> StateVector:
    d = _dim(d)
    out = state
    for dd in range(3, d + 1, 2):
        out = descent_step_inverse(dd, out)
    return out


# ----------------------------------------------------------------------
# Taylor-series pipeline
#
# The intertwining identities stack up to d - 1 derivatives; evaluating them
# through collocation matrices amplifies roundoff by ~N^2 per derivative and
# drowns the residual.  Carrying truncated Taylor expansions of the data
# through the same operator formulas keeps every derivative exact, so the
# residuals below are meaningful at the 1e-10 level.


def apply_Ld_series(d, F1, F2, x):
    c11 = coeffs.c11_fn(d, x)
    c12 = coeffs.c12_fn(x)
    c20 = coeffs.c20_fn(d, x)
    c21 = coeffs.c21_fn(x)
    F1p = F1.deriv()
    return F2, c11 * F1p + c12 * F1p.deriv() + c20 * F2 + c21 * F2.deriv()


def apply_L1_series(F1, F2, x):
    return apply_Ld_series(1, F1, F2, x)


def descent_step_series(d, F1, F2, x):
    if d == 3:
        return x * F1, x * (F2 - F1)
    c1 = coeffs.c1_fn(x)
    c2 = coeffs.c2_fn(x)
    L1c, L2c = apply_Ld_series(d, F1, F2, x)
    out1 = (d - 2.0) * F1 + c1 * F1.deriv() + c2 * L1c
    out2 = (d - 2.0) * F2 + c1 * F2.deriv() + c2 * L2c
    return out1, out2


def descent_full_series(d, F1, F2, x):
    for dd in range(d, 1, -2):
        F1, F2 = descent_step_series(dd, F1, F2, x)
    return F1, F2


def _series_pair_norm(grid, F1, F2, k):
    total = 0.0
    for j in range(k + 1):
        total += np.sqrt(max(grid.quad_full(F1.derivative_values(j) ** 2), 0.0))
    for j in range(k):
        total += np.sqrt(max(grid.quad_full(F2.derivative_values(j) ** 2), 0.0))
    return total


def intertwining_residual(d, f1, f2, grid: Grid, k=1):
    """Relative residual of D_d L_d v - D_d v = L_1 D_d v on smooth data.

    f1, f2 are callables generic over Taylor input (see `jets`); the whole
    identity is evaluated in series arithmetic on the full grid and measured
    in the odd-module H^k x H^(k-1) norm, relative to the d-dimensional norm
    of the data.
    """
    d = _dim(d)
    order = d + k + 1
    x = jet_seed(grid.y, order)
    F1, F2 = f1(x), f2(x)
    L1c, L2c = apply_Ld_series(d, F1, F2, x)
    lhs1, lhs2 = descent_full_series(d, L1c, L2c, x)
    dv1, dv2 = descent_full_series(d, F1, F2, x)
    rhs1, rhs2 = apply_L1_series(dv1, dv2, x)
    R1 = lhs1 - dv1 - rhs1
    R2 = lhs2 - dv2 - rhs2
    m = (d - 1) // 2
    K = k + (d - 3) // 2
    W1, W2 = x**m * F1, x**m * F2
    denom = 0.0
    for j in range(K + 1):
        denom += np.sqrt(max(grid.quad_full(W1.derivative_values(j) ** 2), 0.0))
    for j in range(K):
        denom += np.sqrt(max(grid.quad_full(W2.derivative_values(j) ** 2), 0.0))
    return _series_pair_norm(grid, R1, R2, k) / denom


def stepwise_intertwining_residual(d, f1, f2, grid: Grid, k=1):
    """Relative residual of the single-step identity D_d L_d = L_{d-2} D_d
    (with the extra lower-order term at d = 3)."""
    d = _dim(d)
    order = k + 5
    x = jet_seed(grid.y, order)
    F1, F2 = f1(x), f2(x)
    L1c, L2c = apply_Ld_series(d, F1, F2, x)
    lhs1, lhs2 = descent_step_series(d, L1c, L2c, x)
    dv1, dv2 = descent_step_series(d, F1, F2, x)
    rhs1, rhs2 = apply_Ld_series(d - 2, dv1, dv2, x)
    if d == 3:
        rhs1, rhs2 = rhs1 + dv1, rhs2 + dv2
    R1 = lhs1 - rhs1
    R2 = lhs2 - rhs2
    scale = _series_pair_norm(grid, lhs1, lhs2, k) + _series_pair_norm(grid, rhs1, rhs2, k)
    return _series_pair_norm(grid, R1, R2, k) / scale


def evolve_free_wave(d, state: StateVector, ds) -> StateVector:
    """Free radial wave propagator e^{ds} D_d^{-1} S_1(ds) D_d."""
    d = _dim(d)
    down = descent_full(d, state)
    evolved = evolve_S1(down, ds)
    up = descent_full_inverse(d, evolved)
    scale = np.exp(float(ds))
    up.f1.values *= scale
    up.f2.values *= scale
    return up


class FDWaveResult:
    """Finite-difference reference solution on its uniform staggered grid."""

    def __init__(self, r, v1, v2):
        self.r = r
        self.v1 = v1
        self.v2 = v2
        self._s1 = CubicSpline(r, v1)
        self._s2 = CubicSpline(r, v2)

    def eval(self, eta):
        return self._s1(eta), self._s2(eta)


def _upwind_deriv(f, dr, speed, ghost):
    """Second-order upwind-biased derivative on a staggered uniform grid.

    `ghost` supplies two mirror values below the origin.  Rightward speeds
    use backward stencils (the outflow side at eta = R needs no closure);
    leftward speeds occur only away from the right boundary.
    """
    ext = np.concatenate([ghost, f, [0.0, 0.0]])
    m = f.size
    j = np.arange(2, m + 2)
    backward = (3.0 * ext[j] - 4.0 * ext[j - 1] + ext[j - 2]) / (2 * dr)
    forward = (-3.0 * ext[j] + 4.0 * ext[j + 1] - ext[j + 2]) / (2 * dr)
    # the two phantom cells above eta = R are never selected: speeds at the
    # top of the grid are positive (outflow), which picks `backward` there
    return np.where(speed >= 0.0, backward, forward)


def _fd_run(d, f1, f2, s_end, R, m, cfl, record=None):
    """March the characteristic first-order form of the radial wave system.

    Variables are v and the rescaled half-wave fields W1, W2 (the Cartesian
    d'Alembert fields dt u +- dr u composed with the coordinate map, times
    e^{-s}), which satisfy autonomous transport equations with speeds
    h_pm/h_pm' and a dimensional coupling; v itself integrates alongside.
    `record` requests (v, d_s v) snapshots at the given times.
    """
    dr = R / m
    r = (np.arange(m) + 0.5) * dr
    h = HEIGHT.h(r)
    dh = HEIGHT.dh(r)
    hp, hm = r + h, r - h
    hpd, hmd = 1.0 + dh, 1.0 - dh
    lam1 = hp / hpd
    lam2 = hm / hmd
    u_scale = r * dh - h
    couple = u_scale * (d - 1.0) / (2.0 * r)
    speed = np.max(np.maximum(np.abs(lam1), np.abs(lam2)))
    dt = cfl * dr / speed
    nsteps = int(np.ceil(s_end / dt))
    dt = s_end / nsteps

    # initial half-wave fields from (v, d_s v); d_eta v by 4th-order FD
    v0 = f1(r)
    vs0 = f2(r)
    vx = np.concatenate([v0[1::-1], v0, v0[-1:-3:-1]])
    jj = np.arange(2, m + 2)
    dv0 = (-vx[jj + 2] + 8 * vx[jj + 1] - 8 * vx[jj - 1] + vx[jj - 2]) / (12 * dr)
    dv0[-2:] = (3 * v0[-2:] - 4 * np.roll(v0, 1)[-2:] + np.roll(v0, 2)[-2:]) / (2 * dr)
    W1 = (hmd * vs0 + hm * dv0) / u_scale
    W2 = (hpd * vs0 + hp * dv0) / u_scale

    def rhs(state):
        v, w1, w2 = state
        dw1 = _upwind_deriv(w1, dr, lam1, ghost=w2[1::-1])
        dw2 = _upwind_deriv(w2, dr, lam2, ghost=w1[1::-1])
        src = couple * (w1 - w2)
        return (
            -(h * (w1 + w2) + r * (w1 - w2)) / 2.0,
            (-hp * dw1 + src) / hpd - w1,
            (-hm * dw2 + src) / hmd - w2,
        )

    def snapshot(state):
        v, w1, w2 = state
        return v.copy(), -(h * (w1 + w2) + r * (w1 - w2)) / 2.0

    state = (v0, W1, W2)
    targets = sorted(set(np.round(np.asarray(record) / dt).astype(int))) if record is not None else []
    shots = {}
    if record is not None and 0 in targets:
        shots[0] = snapshot(state)
    for step in range(1, nsteps + 1):
        k1 = rhs(state)
        s2 = tuple(u + 0.5 * dt * k for u, k in zip(state, k1))
        k2 = rhs(s2)
        s3 = tuple(u + 0.5 * dt * k for u, k in zip(state, k2))
        k3 = rhs(s3)
        s4 = tuple(u + dt * k for u, k in zip(state, k3))
        k4 = rhs(s4)
        state = tuple(
            u + (dt / 6.0) * (a + 2 * b + 2 * c + e)
            for u, a, b, c, e in zip(state, k1, k2, k3, k4)
        )
        if record is not None and step in targets:
            shots[step] = snapshot(state)
    v, vs = snapshot(state)
    if record is not None:
        series = [shots[k] for k in sorted(shots)]
        return r, v, vs, series
    return r, v, vs


def direct_fd_oracle(d, f1, f2, s_end, R, m=400, cfl=0.4, richardson=True) -> FDWaveResult:
    """Upwinded method-of-lines reference for the radial wave evolution in
    similarity coordinates, from callable initial data (v, d_s v); optionally
    Richardson-extrapolated for the leading O(dr^2) error."""
    d = _dim(d)
    r, v1, v2 = _fd_run(d, f1, f2, s_end, R, m, cfl)
    if not richardson:
        return FDWaveResult(r, v1, v2)
    r2, w1, w2 = _fd_run(d, f1, f2, s_end, R, 2 * m, cfl)
    fine1 = CubicSpline(r2, w1)(r)
    fine2 = CubicSpline(r2, w2)(r)
    return FDWaveResult(r, (4 * fine1 - v1) / 3.0, (4 * fine2 - v2) / 3.0)


def fd_oracle_series(d, f1, f2, s_values, R, m=300, cfl=0.4):
    """Snapshots (r, [(v, d_s v), ...]) of the reference solution at the
    requested times; no extrapolation."""
    d = _dim(d)
    s_values = np.asarray(s_values, dtype=float)
    r, _, _, series = _fd_run(d, f1, f2, float(s_values[-1]), R, m, cfl, record=s_values)
    return r, series


def descent_norm_ratio(d, state: StateVector, k=1):
    """Ratio of the descended odd-module norm to the d-dimensional norm."""
    d = _dim(d)
    down = descent_full(d, state)
    return odd_state_norm(down, k) / weighted_state_norm(state, k + (d - 3) // 2, d)


def t22_bound_ratio(d, g2: GridFunction, k=2):
    """Empirical constant in the second-component kernel bound."""
    d = _dim(d)
    grid = g2.grid
    eta = grid.eta
    h = HEIGHT.h(eta)
    g2_full = g2.full()
    J21 = _scaled_integral(grid, g2_full, coeffs.t21_fn, d - 3)
    J22 = _scaled_integral(grid, g2_full, coeffs.t22_fn, d - 3)
    out = GridFunction(grid, -(d - 3.0) * h * J21 + (d - 2.0) * J22, "even")
    from .grids import weighted_sobolev_norm

    return weighted_sobolev_norm(out, k, d) / weighted_sobolev_norm(g2, k - 1, d - 2)
