import numpy as np
import pytest

from hyperwave.grids import (
    GridFunction,
    StateVector,
    extension_eval,
    extension_operator,
    hardy_check,
    hpm_inner,
    integral_op_T,
    make_grid,
    radial_sobolev_norm_oracle,
    sobolev_norm_full,
    weighted_sobolev_norm,
)


class TestGridBasics:
    def test_no_origin_node(self, grid64):
        assert np.min(np.abs(grid64.y)) > 1e-3
        assert grid64.eta.size == 64
        assert np.all(np.diff(grid64.eta) > 0)
        assert grid64.eta[0] > 0 and grid64.eta[-1] == 2.0

    def test_small_radius_rejected(self):
        with pytest.raises(ValueError):
            make_grid(0.4, 32)

    def test_too_few_nodes_rejected(self):
        with pytest.raises(ValueError):
            make_grid(2.0, 4)

    def test_differentiation_exactness(self, grid64):
        for k in range(1, 9):
            err = np.max(np.abs(grid64.D @ grid64.y**k - k * grid64.y ** (k - 1)))
            scale = max(1.0, np.max(np.abs(k * grid64.y ** (k - 1))))
            assert err / scale < 1e-10

    def test_const_derivative_annihilated_full_sector(self, grid64):
        assert np.max(np.abs(grid64.D @ np.ones(128))) < 1e-12

    def test_odd_sector_constant_not_annihilated(self, grid64):
        assert np.max(np.abs(grid64.deriv_half(np.ones(64), "odd"))) > 0.1

    def test_quadrature_polynomial_exactness(self, grid64):
        # exact through degree 2N - 1; odd degrees integrate to zero, so
        # compare those against the scale of the absolute integrand
        for p in (0, 2, 6, 40, 62):
            exact = 2.0 * 2.0 ** (p + 1) / (p + 1)
            assert grid64.quad_full(grid64.y**p) == pytest.approx(exact, rel=1e-12)
        for p in (7, 63):
            scale = 2.0 * 2.0 ** (p + 1) / (p + 1)
            assert abs(grid64.quad_full(grid64.y**p)) < 1e-12 * scale

    def test_half_quadrature(self, grid64):
        assert grid64.quad_half(grid64.eta**6) == pytest.approx(2.0**7 / 7.0, rel=1e-13)

    def test_interpolation(self, grid64):
        pts = np.array([-1.7, -0.3, 0.0, 0.123, 1.999, grid64.y[5]])
        got = grid64.interpolate(np.sin(grid64.y), pts)
        assert got == pytest.approx(np.sin(pts), abs=1e-13)

    def test_antiderivative(self, grid64):
        F = grid64.antiderivative(np.cos(grid64.y))
        assert np.max(np.abs(F - np.sin(grid64.y))) < 1e-13
        F5 = grid64.antiderivative(grid64.y**5)
        assert np.max(np.abs(F5 - grid64.y**6 / 6.0)) < 1e-12

    def test_parity_derivatives(self, grid64):
        eta = grid64.eta
        even = np.exp(-(eta**2))
        assert grid64.deriv_half(even, "even") == pytest.approx(-2 * eta * even, abs=1e-11)
        odd = eta**3 - eta
        assert grid64.deriv_half(odd, "odd") == pytest.approx(3 * eta**2 - 1, abs=1e-10)


class TestGridFunction:
    def test_parity_validation(self, grid64):
        vals = np.sin(grid64.y)  # odd
        GridFunction.from_full(grid64, vals, "odd")
        with pytest.raises(ValueError):
            GridFunction.from_full(grid64, vals, "even")

    def test_round_trip_full(self, grid64):
        gf = GridFunction.from_callable(grid64, lambda e: np.cos(e), "even")
        assert grid64.parity_defect(gf.full(), "even") == 0.0

    def test_state_vector_grid_mismatch(self, grid64, grid96):
        a = GridFunction.from_callable(grid64, np.cos, "even")
        b = GridFunction.from_callable(grid96, np.cos, "even")
        with pytest.raises(ValueError):
            StateVector(a, b)

    def test_stacked_round_trip(self, grid64, rng):
        vec = rng.standard_normal(128)
        st = StateVector.from_stacked(grid64, vec)
        assert st.stacked() == pytest.approx(vec)


class TestNorms:
    def test_flat_function_exact(self):
        g1 = make_grid(1.0, 48)
        one = GridFunction.from_callable(g1, lambda e: np.ones_like(e), "even")
        assert weighted_sobolev_norm(one, 0, 1) == pytest.approx(np.sqrt(2.0), rel=1e-13)
        assert weighted_sobolev_norm(one, 0, 3) == pytest.approx(np.sqrt(2.0 / 3.0), rel=1e-13)

    def test_monotone_in_k(self, grid64):
        gf = GridFunction.from_callable(grid64, lambda e: np.exp(-(e**2)), "even")
        norms = [weighted_sobolev_norm(gf, k, 5) for k in range(4)]
        assert np.all(np.diff(norms) > 0)

    def test_monotone_in_radius(self):
        vals = {}
        for R in (1.0, 2.0):
            g = make_grid(R, 64)
            gf = GridFunction.from_callable(g, lambda e: np.exp(-(e**2)), "even")
            vals[R] = weighted_sobolev_norm(gf, 1, 5)
        assert vals[2.0] > vals[1.0]

    def test_resolution_gate(self, grid64):
        gf = GridFunction.from_callable(grid64, lambda e: np.exp(-(e**2)), "even")
        with pytest.raises(ValueError):
            weighted_sobolev_norm(gf, 12, 5)

    @pytest.mark.parametrize("d", [3, 5, 7])
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_equivalence_ratio_stable_under_doubling(self, d, k):
        fhat = lambda r: np.exp(-(np.asarray(r) ** 2))
        d1 = lambda r: -2 * r * np.exp(-(r**2))
        d2 = lambda r: (4 * r**2 - 2) * np.exp(-(r**2))
        oracle = radial_sobolev_norm_oracle(fhat, k, d, 2.0, derivs=(d1, d2))
        ratios = []
        for N in (48, 96):
            g = make_grid(2.0, N)
            gf = GridFunction.from_callable(g, fhat, "even")
            ratios.append(oracle / weighted_sobolev_norm(gf, k, d))
        assert abs(ratios[1] / ratios[0] - 1.0) < 0.1
        assert 0.05 < ratios[0] < 50.0

    def test_oracle_matches_exact_l2(self):
        # || 1 ||_{L^2(B_R^3)} = sqrt(4 pi R^3 / 3)
        val = radial_sobolev_norm_oracle(lambda r: np.ones_like(np.asarray(r)), 0, 3, 1.0,
                                         derivs=(lambda r: 0.0 * r, lambda r: 0.0 * r))
        assert val == pytest.approx(np.sqrt(4.0 * np.pi / 3.0), rel=1e-10)


class TestHpmInner:
    def test_constant(self):
        g1 = make_grid(1.0, 48)
        one = np.ones(96)
        assert hpm_inner(g1, one, one, +1) == pytest.approx(2.0, rel=1e-13)
        assert hpm_inner(g1, one, one, -1) == pytest.approx(2.0, rel=1e-13)

    def test_positivity(self, grid64, rng):
        f = rng.standard_normal(128)
        assert hpm_inner(grid64, f, f, +1) > 0

    def test_reflection_relation(self, grid64):
        f = np.exp(-((grid64.y - 0.4) ** 2))
        plus = hpm_inner(grid64, f, f, +1)
        minus = hpm_inner(grid64, f[::-1], f[::-1], -1)
        assert plus == pytest.approx(minus, rel=1e-12)


class TestExtension:
    def test_zero(self, grid64):
        big, vals = extension_operator(grid64, np.zeros(128), 2)
        assert np.max(np.abs(vals)) == 0.0

    def test_agreement_and_support(self):
        g1 = make_grid(1.0, 48)
        big, vals = extension_operator(g1, g1.y**2, 2)
        inner = np.abs(big.y) <= 1.0
        assert vals[inner] == pytest.approx(big.y[inner] ** 2, abs=1e-13)
        assert np.max(np.abs(vals[np.abs(big.y) >= 1.9])) == 0.0

    def test_seam_smoothness(self):
        # one-sided second derivatives agree across the seam for f = x^2
        g1 = make_grid(1.0, 48)

        def E(x):
            return extension_eval(g1, g1.y**2, 2, np.atleast_1d(x))[0]

        h = 1e-3
        left = (2 * E(1.0) - 5 * E(1 - h) + 4 * E(1 - 2 * h) - E(1 - 3 * h)) / h**2
        right = (2 * E(1.0) - 5 * E(1 + h) + 4 * E(1 + 2 * h) - E(1 + 3 * h)) / h**2
        assert abs(left - right) < 1e-8

    def test_compact_support_identity(self):
        from hyperwave.nonlinear import smooth_bump

        g1 = make_grid(1.0, 64)
        f = smooth_bump(g1.y / 0.4)
        zeros = (np.zeros(4), np.zeros(4))
        big, vals = extension_operator(g1, f, 3, endpoint_derivs=zeros)
        outer = np.abs(big.y) > 1.0
        assert np.max(np.abs(vals[outer])) < 1e-4

    def test_outer_norm_controlled(self):
        g1 = make_grid(1.0, 64)
        f = np.cos(3 * g1.y) * np.exp(-0.3 * g1.y**2)
        big, vals = extension_operator(g1, f, 2)
        out_norm = sobolev_norm_full(big, vals * (np.abs(big.y) > 1.0), 0)
        annulus = f * (np.abs(g1.y) > 0.5)
        in_norm = sobolev_norm_full(g1, annulus, 0)
        assert out_norm < 20.0 * in_norm


class TestHardyAndIntegralOp:
    def test_hardy_example(self):
        g1 = make_grid(1.0, 48)
        lhs, rhs = hardy_check(g1, g1.y**2, -1.0)
        assert lhs == pytest.approx(np.sqrt(2.0 / 3.0), rel=1e-12)
        assert rhs == pytest.approx(2.0 * np.sqrt(2.0 / 3.0), rel=1e-12)
        assert lhs <= rhs

    def test_hardy_suite(self, grid64):
        for fvals in (grid64.y**2, grid64.y**3, grid64.y**2 * np.exp(-grid64.y**2)):
            for s in (-0.8, -1.0):
                lhs, rhs = hardy_check(grid64, fvals, s)
                assert lhs <= 4.0 * rhs

    def test_hardy_gate(self, grid64):
        with pytest.raises(ValueError):
            hardy_check(grid64, grid64.y**2, 0.0)

    def test_integral_op_closed_form(self, grid64):
        got = integral_op_T(grid64, np.ones(128), 3, 3)
        assert got == pytest.approx(grid64.y / 4.0, abs=1e-13)

    def test_integral_op_linear(self, grid64):
        assert np.max(np.abs(integral_op_T(grid64, np.zeros(128), 2, 3))) == 0.0

    def test_integral_op_gate(self, grid64):
        with pytest.raises(ValueError):
            integral_op_T(grid64, np.ones(128), 4, 2)

    def test_integral_op_bounded(self, grid64, rng):
        f = np.cos(2 * grid64.y) * np.exp(-0.5 * grid64.y**2)
        Tf = integral_op_T(grid64, f, 2, 2, phi=lambda x: 1.0 / (1.0 + x**2))
        assert sobolev_norm_full(grid64, Tf, 2) <= 10.0 * sobolev_norm_full(grid64, f, 2)
