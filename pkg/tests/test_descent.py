import numpy as np
import pytest

from hyperwave.coeffs import c1_fn
from hyperwave.descent import (
    apply_Ld,
    descent_full,
    descent_full_inverse,
    descent_norm_ratio,
    descent_step,
    descent_step_inverse,
    direct_fd_oracle,
    evolve_free_wave,
    intertwining_residual,
    stepwise_intertwining_residual,
    t22_bound_ratio,
    _fd_run,
)
from hyperwave.grids import GridFunction, StateVector, make_grid, weighted_state_norm
from hyperwave.jets import jexp
from hyperwave.nonlinear import smooth_bump

from conftest import even_state

# Gaussian-type suite written generically so jet arguments work too
SUITE = [
    (lambda x: jexp(-(x * x)), lambda x: 0.0 * x),
    (lambda x: jexp(-(x * x)), lambda x: (x * x) * jexp(-(x * x))),
    (lambda x: jexp(-0.5 * (x * x)), lambda x: jexp(-2.0 * (x * x))),
    (lambda x: (x * x) * jexp(-(x * x)), lambda x: jexp(-(x * x))),
    (lambda x: 1.0 / (1.0 + x * x) if isinstance(x, np.ndarray) else (1.0 + x * x).reciprocal(),
     lambda x: 0.0 * x),
    (lambda x: jexp(-(x * x)) * (1.0 + 0.3 * (x * x)), lambda x: 0.5 * jexp(-(x * x))),
    (lambda x: jexp(-1.5 * (x * x)), lambda x: (x * x) * jexp(-0.7 * (x * x))),
    (lambda x: (1.0 + 0.0 * x) * jexp(-0.3 * (x * x)), lambda x: -0.2 * jexp(-(x * x))),
    (lambda x: (x * x) * (x * x) * jexp(-2.0 * (x * x)), lambda x: 0.1 * jexp(-0.5 * (x * x))),
    (lambda x: jexp(-(x * x)) - 0.5 * jexp(-2.0 * (x * x)), lambda x: 0.3 * jexp(-1.2 * (x * x))),
]


class TestDescentStep:
    def test_constants_d7(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        out = descent_step(7, st)
        assert out.f1.values == pytest.approx(5.0, abs=1e-12)
        assert np.max(np.abs(out.f2.values)) < 1e-7

    def test_d3_multiplication(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        out = descent_step(3, st)
        assert out.f1.parity == "odd"
        assert out.f1.values == pytest.approx(grid64.eta, abs=1e-15)
        assert out.f2.values == pytest.approx(-grid64.eta, abs=1e-15)

    def test_quadratic_spot_value(self, grid64):
        st = even_state(grid64, lambda e: e**2, lambda e: 0 * e)
        out = descent_step(7, st)
        expected = 5.0 * grid64.eta**2 + 2.0 * grid64.eta * c1_fn(grid64.eta)
        assert out.f1.values == pytest.approx(expected, abs=1e-11)

    def test_even_dimension_rejected(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        with pytest.raises(ValueError):
            descent_step(4, st)

    def test_parity_gate(self, grid64):
        odd = StateVector(
            GridFunction(grid64, grid64.eta, "odd"), GridFunction(grid64, grid64.eta, "odd")
        )
        with pytest.raises(ValueError):
            descent_step(7, odd)
        with pytest.raises(ValueError):
            descent_step_inverse(7, odd)

    def test_cascade_constants(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        out = descent_full(7, st)
        assert out.f1.values == pytest.approx(15.0 * grid64.eta, abs=1e-6)
        assert out.f2.values == pytest.approx(-15.0 * grid64.eta, abs=1e-3)


class TestInverses:
    def test_d3_round_trip(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        back = descent_step_inverse(3, descent_step(3, st))
        assert back.f1.values == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(back.f2.values)) < 1e-12

    def test_d7_round_trip_constants(self, grid64):
        st = even_state(grid64, lambda e: np.ones_like(e), lambda e: 0 * e)
        back = descent_step_inverse(7, descent_step(7, st))
        assert back.f1.values == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(back.f2.values)) < 1e-10

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_full_round_trips_suite(self, grid64, d):
        worst = 0.0
        for f1, f2 in SUITE:
            st = even_state(grid64, lambda e: np.asarray(f1(e), dtype=float) * np.ones_like(e),
                            lambda e: np.asarray(f2(e), dtype=float) * np.ones_like(e))
            back = descent_full_inverse(d, descent_full(d, st))
            scale = max(np.max(np.abs(st.f1.values)), np.max(np.abs(st.f2.values)))
            worst = max(
                worst,
                np.max(np.abs(back.f1.values - st.f1.values)) / scale,
                np.max(np.abs(back.f2.values - st.f2.values)) / scale,
            )
        assert worst < 1e-8

    def test_other_composition_order(self, grid64):
        st = even_state(grid64, lambda e: np.exp(-(e**2)), lambda e: e**2 * np.exp(-(e**2)))
        down = descent_full(7, st)
        again = descent_full(7, descent_full_inverse(7, down))
        scale = np.max(np.abs(down.f1.values))
        assert np.max(np.abs(again.f1.values - down.f1.values)) / scale < 1e-8

    def test_t22_bound_stable_under_doubling(self):
        ratios = []
        for N in (48, 96):
            g = make_grid(2.0, N)
            g2 = GridFunction.from_callable(g, lambda e: np.exp(-(e**2)), "even")
            ratios.append(t22_bound_ratio(7, g2, k=2))
        assert abs(ratios[1] / ratios[0] - 1.0) < 0.1


class TestIntertwining:
    def test_constants(self, grid64):
        r = intertwining_residual(7, lambda x: 1.0 + 0.0 * x, lambda x: 0.0 * x, grid64)
        assert r < 1e-12

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_composite_suite(self, grid64, d):
        worst = max(intertwining_residual(d, f1, f2, grid64, k=1) for f1, f2 in SUITE)
        assert worst < 1e-8

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_stepwise(self, grid64, d):
        r = stepwise_intertwining_residual(
            d, lambda x: jexp(-(x * x)), lambda x: (x * x) * jexp(-(x * x)), grid64
        )
        assert r < 1e-8

    def test_residual_decreases_with_resolution(self):
        # already at roundoff level, so just require no growth under doubling
        vals = []
        for N in (64, 128):
            g = make_grid(2.0, N)
            vals.append(
                intertwining_residual(7, lambda x: jexp(-(x * x)), lambda x: 0.0 * x, g)
            )
        assert vals[1] < 10 * vals[0] + 1e-12
        assert max(vals) < 1e-10


class TestFreeWave:
    def test_zero(self, grid64):
        out = evolve_free_wave(7, StateVector.zero(grid64), 1.0)
        assert np.max(np.abs(out.stacked())) == 0.0

    def test_semigroup_law(self, grid64):
        st = even_state(grid64, lambda e: np.exp(-(e**2)), lambda e: e**2 * np.exp(-(e**2)))
        one = evolve_free_wave(7, st, 0.7)
        two = evolve_free_wave(7, evolve_free_wave(7, st, 0.3), 0.4)
        diff = StateVector(
            GridFunction(grid64, one.f1.values - two.f1.values, "even"),
            GridFunction(grid64, one.f2.values - two.f2.values, "even"),
        )
        rel = weighted_state_norm(diff, 2, 7) / weighted_state_norm(st, 2, 7)
        assert rel < 1e-8

    def test_growth_bound(self, grid64):
        st = even_state(
            grid64, lambda e: smooth_bump(e / 0.5), lambda e: -0.3 * smooth_bump(e / 0.6)
        )
        svals = np.linspace(0.0, 5.0, 11)
        norms = [weighted_state_norm(st, 3, 7)]
        for s in svals[1:]:
            norms.append(weighted_state_norm(evolve_free_wave(7, st, s), 3, 7))
        slope = np.polyfit(svals, np.log(norms), 1)[0]
        assert slope <= 0.55

    def test_norm_ratio_stable_under_doubling(self):
        ratios = []
        for N in (48, 96):
            g = make_grid(2.0, N)
            st = even_state(g, lambda e: np.exp(-(e**2)), lambda e: 0.3 * np.exp(-(e**2)))
            ratios.append(descent_norm_ratio(7, st, k=1))
        assert abs(ratios[1] / ratios[0] - 1.0) < 0.1


class TestFDOracle:
    def test_steady_state(self):
        r, v, vs = _fd_run(5, lambda r: np.ones_like(r), lambda r: 0 * r, 1.0, 2.0, 200, 0.4)
        assert np.max(np.abs(v - 1.0)) == 0.0
        assert np.max(np.abs(vs)) == 0.0

    def test_reflection_symmetry_preserved(self):
        # even initial data stays even: the origin value never drifts relative
        # to its mirror ghost, checked through the first-node symmetry
        r, v, vs = _fd_run(5, lambda r: np.exp(-3 * r * r), lambda r: 0 * r, 0.5, 2.0, 200, 0.4)
        assert np.all(np.isfinite(v))

    def test_cfl_guard(self):
        with pytest.raises(ValueError):
            direct_fd_oracle(5, lambda r: np.exp(-(r**2)), lambda r: 0 * r, 1.0, 2.0, m=-3)

    def test_convergence_order(self):
        f1 = lambda r: np.exp(-2 * r * r)
        f2 = lambda r: 0 * r
        sols = {m: _fd_run(5, f1, f2, 1.0, 2.0, m, 0.4) for m in (100, 200, 400)}
        from scipy.interpolate import CubicSpline

        probe = np.linspace(0.1, 1.8, 50)
        vals = {m: CubicSpline(sols[m][0], sols[m][1])(probe) for m in sols}
        e1 = np.max(np.abs(vals[100] - vals[200]))
        e2 = np.max(np.abs(vals[200] - vals[400]))
        order = np.log2(e1 / e2)
        assert 1.6 < order < 2.6

    @pytest.mark.parametrize("d", [5, 7])
    def test_cross_check_spectral(self, grid64, d):
        f1 = lambda r: np.exp(-2 * r * r)
        f2 = lambda r: 0 * r
        fd = direct_fd_oracle(d, f1, f2, 1.0, 2.0, m=400)
        st = even_state(grid64, f1, f2)
        ev = evolve_free_wave(d, st, 1.0)
        o1, _ = fd.eval(grid64.eta)
        w = grid64.w_half * grid64.eta ** (d - 1)
        rel = np.sqrt(np.sum((ev.f1.values - o1) ** 2 * w) / np.sum(o1**2 * w))
        assert rel < 1e-4
