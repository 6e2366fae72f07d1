"""One-dimensional machinery: half-wave decomposition, the transport vector
fields, exact characteristic evolution of the half-waves, and the rescaled
wave propagator on the odd module.

Half-wave pairs (v-, v+) live on the full [-R, R] grid and satisfy the
reflection constraint v-(-y) = -v+(y).  The transport evolution is exact:
values are pulled back along characteristics h_pm(z) = e^{-ds} h_pm(y),
which for forward evolution never leave [-R, R] once R >= 1/2.
"""

from dataclasses import dataclass

import numpy as np

from .grids import Grid, GridFunction, StateVector, hpm_inner, sobolev_norm_full
from .model import HEIGHT, HeightFunction

__all__ = [
    "HalfWaveState",
    "apply_L_pm",
    "apply_D_pm",
    "halfwave_decompose",
    "halfwave_recompose",
    "evolve_halfwave",
    "evolve_halfwave_mol",
    "halfwave_flow",
    "evolve_S1",
    "halfwave_energy",
    "halfwave_norm",
    "transport_pde_residual",
    "mode_halfwave",
    "dalembert_oracle",
    "dalembert_state",
]


@dataclass
class HalfWaveState:
    """Pair of half-wave grid functions with the reflection constraint."""

    grid: Grid
    vm: np.ndarray
    vp: np.ndarray

    def __post_init__(self):
        self.vm = np.asarray(self.vm, dtype=float)
        self.vp = np.asarray(self.vp, dtype=float)
        n = 2 * self.grid.N
        if self.vm.shape != (n,) or self.vp.shape != (n,):
            raise ValueError("half-wave components must be full-grid arrays")

    def constraint_defect(self):
        return float(np.max(np.abs(self.vm[::-1] + self.vp)))

    def require_constraint(self, tol=1e-10):
        defect = self.constraint_defect()
        scale = max(1.0, float(np.max(np.abs(self.vm))), float(np.max(np.abs(self.vp))))
        if defect > tol * scale:
            raise ValueError(f"half-wave reflection constraint violated by {defect:.3e}")
        return self


def apply_L_pm(grid: Grid, f_full, sign, height: HeightFunction = HEIGHT):
    """Transport vector field L_pm f = -(y pm h)/(1 pm h') f'."""
    f = np.asarray(f_full, dtype=float)
    y = grid.y
    s = float(sign)
    return -(y + s * height.h(y)) / (1.0 + s * height.dh(y)) * (grid.D @ f)


def apply_D_pm(grid: Grid, f_full, sign, height: HeightFunction = HEIGHT):
    """Commuting vector field D_pm f = f'/(1 pm h')."""
    f = np.asarray(f_full, dtype=float)
    return (grid.D @ f) / (1.0 + float(sign) * height.dh(grid.y))


def halfwave_decompose(state: StateVector, height: HeightFunction = HEIGHT) -> HalfWaveState:
    """Form half-waves from an odd two-component state."""
    if state.f1.parity != "odd" or state.f2.parity != "odd":
        raise ValueError("half-wave decomposition acts on odd states")
    grid = state.grid
    y = grid.y
    h = height.h(y)
    dh = height.dh(y)
    den = y * dh - h
    f1p = grid.D @ state.f1.full()
    f2 = state.f2.full()
    vm = ((y + h) * f1p + (1.0 + dh) * f2) / den
    vp = ((y - h) * f1p + (1.0 - dh) * f2) / den
    return HalfWaveState(grid, vm, vp).require_constraint()


def halfwave_recompose(w: HalfWaveState, height: HeightFunction = HEIGHT) -> StateVector:
    """Invert the half-wave map back to an odd state."""
    w.require_constraint()
    grid = w.grid
    y = grid.y
    h = height.h(y)
    dh = height.dh(y)
    integrand = -(1.0 - dh) * w.vm + (1.0 + dh) * w.vp
    f1_full = 0.5 * grid.antiderivative(integrand)
    f2_full = 0.5 * ((y - h) * w.vm - (y + h) * w.vp)
    return StateVector(
        GridFunction.from_full(grid, f1_full, "odd", tol=1e-9),
        GridFunction.from_full(grid, f2_full, "odd", tol=1e-9),
    )


def _pullback(grid: Grid, ds, height: HeightFunction):
    """Characteristic feet z_pm at time s for data at time s - ds.

    Forward evolution only: backward feet leave the grid (characteristics
    are outflowing for R >= 1/2), so interior feet staying inside is an
    asserted property rather than an extension fallback.
    """
    if ds < 0:
        raise ValueError("the half-wave evolution is a forward semigroup (ds >= 0)")
    shrink = np.exp(-float(ds))
    zp = height.hp_inverse(shrink * height.hp(grid.y))
    zm = height.hm_inverse(shrink * height.hm(grid.y))
    pad = 1e-12 * grid.R
    if np.any(np.abs(zp) > grid.R + pad) or np.any(np.abs(zm) > grid.R + pad):
        raise AssertionError("characteristic foot left the grid; R >= 1/2 should prevent this")
    lim = grid.R
    return np.clip(zm, -lim, lim), np.clip(zp, -lim, lim)


def evolve_halfwave(w: HalfWaveState, ds, height: HeightFunction = HEIGHT) -> HalfWaveState:
    """Exact transport of a half-wave state by ds (spectral off-grid reads)."""
    zm, zp = _pullback(w.grid, ds, height)
    return HalfWaveState(w.grid, w.grid.interpolate(w.vm, zm), w.grid.interpolate(w.vp, zp))


def evolve_halfwave_mol(w: HalfWaveState, ds, dt=1e-3, height: HeightFunction = HEIGHT):
    """Method-of-lines RK4 integration of the transport fields.

    Exists solely as an independent oracle for the exact characteristic
    evolution; the production path has no step-size constraint.
    """
    if ds < 0:
        raise ValueError("the half-wave evolution is a forward semigroup (ds >= 0)")
    grid = w.grid
    nsteps = max(int(np.ceil(ds / dt)), 1)
    h = ds / nsteps
    vm, vp = w.vm.copy(), w.vp.copy()

    def rhs(m, p):
        return apply_L_pm(grid, m, -1, height), apply_L_pm(grid, p, +1, height)

    for _ in range(nsteps):
        k1m, k1p = rhs(vm, vp)
        k2m, k2p = rhs(vm + 0.5 * h * k1m, vp + 0.5 * h * k1p)
        k3m, k3p = rhs(vm + 0.5 * h * k2m, vp + 0.5 * h * k2p)
        k4m, k4p = rhs(vm + h * k3m, vp + h * k3p)
        vm = vm + (h / 6.0) * (k1m + 2 * k2m + 2 * k3m + k4m)
        vp = vp + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    return HalfWaveState(grid, vm, vp)


def halfwave_flow(fm, fp, ds, height: HeightFunction = HEIGHT):
    """Exact transport acting on callables; returns evaluators at time ds."""
    shrink = np.exp(-float(ds))

    def vm(y):
        return fm(height.hm_inverse(shrink * height.hm(np.asarray(y, dtype=float))))

    def vp(y):
        return fp(height.hp_inverse(shrink * height.hp(np.asarray(y, dtype=float))))

    return vm, vp


def evolve_S1(state: StateVector, ds, height: HeightFunction = HEIGHT) -> StateVector:
    """Rescaled wave propagator on the odd module: e^{-ds} A^{-1} S(ds) A."""
    w = evolve_halfwave(halfwave_decompose(state, height), ds, height)
    out = halfwave_recompose(w, height)
    scale = np.exp(-float(ds))
    out.f1.values *= scale
    out.f2.values *= scale
    return out


def halfwave_energy(w: HalfWaveState, sign, s=0.0, height: HeightFunction = HEIGHT):
    """Rescaled transport energy e^{-s} (v_pm | v_pm)_{h_pm'}."""
    v = w.vp if sign > 0 else w.vm
    return float(np.exp(-s) * hpm_inner(w.grid, v, v, sign, height))


def halfwave_norm(w: HalfWaveState, k, height: HeightFunction = HEIGHT):
    """Sum over j <= k-1 of the weighted L^2 norms of D_pm^j v_pm."""
    total = 0.0
    gm, gp = w.vm.copy(), w.vp.copy()
    for _ in range(k):
        total += np.sqrt(max(hpm_inner(w.grid, gm, gm, -1, height), 0.0))
        total += np.sqrt(max(hpm_inner(w.grid, gp, gp, +1, height), 0.0))
        gm = apply_D_pm(w.grid, gm, -1, height)
        gp = apply_D_pm(w.grid, gp, +1, height)
    return float(total)


def transport_pde_residual(w0: HalfWaveState, ds=0.5, step=1e-4, height: HeightFunction = HEIGHT):
    """Residual of (1 pm h') d_s v + (y pm h) d_y v = 0 along the evolution,
    with the s-derivative taken by central differences.  Validates the sign
    and exponent convention of the characteristic pull-back."""
    grid = w0.grid
    plus = evolve_halfwave(w0, ds + step, height)
    minus = evolve_halfwave(w0, ds - step, height)
    mid = evolve_halfwave(w0, ds, height)
    y = grid.y
    h = height.h(y)
    dh = height.dh(y)
    res = 0.0
    for sign, vdot, v in (
        (-1.0, (plus.vm - minus.vm) / (2 * step), mid.vm),
        (+1.0, (plus.vp - minus.vp) / (2 * step), mid.vp),
    ):
        r = (1.0 + sign * dh) * vdot + (y + sign * h) * (grid.D @ v)
        res = max(res, float(np.max(np.abs(r))))
    return res


def mode_halfwave(lam, cminus=1.0, height: HeightFunction = HEIGHT):
    """Separated-solution data |h_pm|^(-lam) with the reflection constraint."""

    def fm(y):
        return cminus * np.abs(height.hm(np.asarray(y, dtype=float))) ** (-lam)

    def fp(y):
        return -cminus * np.abs(height.hp(np.asarray(y, dtype=float))) ** (-lam)

    return fm, fp


# ----------------------------------------------------------------------
# d'Alembert oracle


def _default_primitive(gfun):
    from numpy.polynomial.legendre import leggauss

    tq, wq = leggauss(48)

    def prim(b):
        b = np.asarray(b, dtype=float)
        half = 0.5 * b
        pts = half[..., None] * (tq + 1.0)
        return np.sum(gfun(pts) * wq, axis=-1) * half

    return prim


def dalembert_oracle(f, g, T, s, y, g_primitive=None, height: HeightFunction = HEIGHT):
    """Exact 1-d wave solution with odd data (f, g), evaluated along the
    similarity coordinates: u(t, x) with (t, x) = eta_T(s, y)."""
    y = np.asarray(y, dtype=float)
    t = T + np.exp(-s) * height.h(y)
    x = np.exp(-s) * y
    prim = g_primitive if g_primitive is not None else _default_primitive(g)
    return 0.5 * (f(x + t) + f(x - t)) + 0.5 * (prim(x + t) - prim(x - t))


def dalembert_state(grid: Grid, f, df, g, T, s, g_primitive=None, height: HeightFunction = HEIGHT):
    """Exact odd state (v, d_s v) of the 1-d wave at hyperboloidal time s."""
    y = grid.y
    es = np.exp(-s)
    t = T + es * height.h(y)
    x = es * y
    prim = g_primitive if g_primitive is not None else _default_primitive(g)
    v = 0.5 * (f(x + t) + f(x - t)) + 0.5 * (prim(x + t) - prim(x - t))
    ut = 0.5 * (df(x + t) - df(x - t)) + 0.5 * (g(x + t) + g(x - t))
    ux = 0.5 * (df(x + t) + df(x - t)) + 0.5 * (g(x + t) - g(x - t))
    vs = -es * (height.h(y) * ut + y * ux)
    return StateVector(
        GridFunction.from_full(grid, v, "odd", tol=1e-9),
        GridFunction.from_full(grid, vs, "odd", tol=1e-9),
    )
