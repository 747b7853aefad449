import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dunklb2.dunkl import (
    FDControl,
    alternating_polys,
    apply_T1,
    density_L,
    density_L_orbit_values,
    density_L_values,
    dunkl_kernel,
    dunkl_kernel_prop2,
    eigen_residual,
    gbf_combination,
    group_elements,
    shift_constants,
)
from dunklb2.errors import DegenerateInputError
from dunklb2.gbf import (
    Multiplicity,
    _orbit_points,
    chamber_rule,
    convex_hull_contains,
    gbf,
    gbf_fixed,
    hull_integral,
)

X0, Y0 = (0.6, 0.2), (1.5, 0.7)
# D_k(X0, Y0) from the shift formula with exact x-derivatives (Bessel derivative
# rule) and tanh-sinh quadrature in mpmath; no finite differences involved
FROZEN_KERNEL = {(1.0, 1.0): 1.29362939890884, (1.5, 0.8): 1.26010924395599}

coord = st.floats(-2.0, 2.0)


def ones(a, b):
    return np.ones_like(a)


class TestGroup:
    def test_order_and_names(self):
        g = group_elements()
        assert [w.name for w in g] == ["σ1", "σ2", "σ3", "σ4", "r", "r²", "r³", "id"]
        assert g[0].matrix.tolist() == [[-1, 0], [0, 1]]
        assert g[-1].matrix.tolist() == [[1, 0], [0, 1]]

    def test_products(self):
        m = {w.name: w.matrix for w in group_elements()}
        assert np.array_equal(m["r"] @ m["r"], m["r²"])
        assert np.array_equal(np.linalg.matrix_power(m["r"], 4), m["id"])
        assert group_elements()[2].apply((3.0, 5.0)) == (5.0, 3.0)

    def test_closure_and_orthogonality(self):
        mats = [w.matrix for w in group_elements()]
        keys = {tuple(a.ravel()) for a in mats}
        for a in mats:
            assert np.array_equal(a @ a.T, np.eye(2, dtype=int))
            for b in mats:
                assert tuple((a @ b).ravel()) in keys

    @given(coord, coord)
    def test_characters(self, x1, x2):
        ref = (0.83, 0.27)
        for w in group_elements():
            for i in range(3):
                chi = alternating_polys(w.apply(ref))[i] / alternating_polys(ref)[i]
                assert chi in (-1.0, 1.0)
                assert alternating_polys(w.apply((x1, x2)))[i] == pytest.approx(
                    chi * alternating_polys((x1, x2))[i], abs=1e-12)


class TestAlternating:
    def test_values(self):
        assert alternating_polys((1, 1)) == (0, 1, 0)
        assert alternating_polys((2, 1)) == (3, 2, 6)

    @given(coord, coord)
    def test_sigma3_sign(self, x1, x2):
        assert alternating_polys((x2, x1))[0] == -alternating_polys((x1, x2))[0]


class TestShiftConstants:
    def test_printed_values(self):
        c = shift_constants((1, 1), variant="printed")
        assert (c.d1, c.d2) == pytest.approx((2 / 15, 8 / 15))
        assert c.d3 == pytest.approx(1 / 630)
        c = shift_constants((0.5, 0.5), variant="printed")
        assert (c.d1, c.d2, c.d3) == pytest.approx((1 / 3, 4 / 3, 1 / 120))

    def test_corrected_d3(self):
        assert shift_constants((1, 1)).d3 == pytest.approx(2 / 315)
        assert shift_constants((1, 1)).d1 == pytest.approx(2 / 15)

    @given(st.floats(0.01, 10.0), st.floats(0.01, 10.0))
    def test_positive(self, k1, k2):
        for variant in ("corrected", "printed"):
            c = shift_constants((k1, k2), variant)
            assert c.d1 > 0 and c.d2 > 0 and c.d3 > 0

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            shift_constants((1, 1), "other")


class TestApplyT1:
    K = (1.3, 0.7)

    def test_constant(self):
        assert abs(apply_T1(lambda p: 1.0, (0.5, 0.2), self.K)) < 1e-12

    def test_x1(self):
        assert apply_T1(lambda p: p[0], (0.5, 0.2), self.K) == pytest.approx(1 + 2 * 2.0, abs=1e-10)

    def test_x2(self):
        assert abs(apply_T1(lambda p: p[1], (0.5, 0.2), self.K)) < 1e-10

    @pytest.mark.parametrize("x", [(0.0, 1.0), (0.5, 0.5), (0.5, -0.5004)])
    def test_mirror(self, x):
        with pytest.raises(DegenerateInputError):
            apply_T1(lambda p: 1.0, x, self.K)

    def test_fd_control(self):
        with pytest.raises(ValueError):
            FDControl(0.0, 1e-3)
        with pytest.raises(ValueError):
            FDControl(1e-4, -1.0)
        c = FDControl.default((3.0, 4.0))
        assert (c.h, c.mirror_margin) == pytest.approx((6e-4, 6e-3))


class TestShiftRoute:
    def test_combination_at_origin(self):
        assert gbf_combination((0, 0), Y0, (1, 1)) == pytest.approx(2.0, abs=1e-12)

    def test_combination_symmetric(self):
        a = gbf_combination(X0, Y0, (1.2, 0.9))
        assert a == pytest.approx(gbf_combination(Y0, X0, (1.2, 0.9)), rel=1e-10)

    @pytest.mark.parametrize("k", sorted(FROZEN_KERNEL))
    def test_frozen(self, k):
        assert dunkl_kernel_prop2(X0, Y0, k) == pytest.approx(FROZEN_KERNEL[k], rel=1e-8)

    def test_symmetric(self):
        a = dunkl_kernel_prop2(X0, Y0, (1, 1))
        assert a == pytest.approx(dunkl_kernel_prop2(Y0, X0, (1, 1)), abs=2e-5)

    def test_small_k(self):
        val = dunkl_kernel_prop2((0.3, 0.1), (1.0, 0.4), (0.01, 0.01))
        assert val == pytest.approx(math.exp(0.34), rel=5e-2)

    def test_y1_zero(self):
        with pytest.raises(DegenerateInputError):
            dunkl_kernel_prop2(X0, (0.0, 1.0), (1, 1))

    def test_printed_d3_breaks_eigen_equation(self):
        # the kernel built with the literal d3 is not an eigenfunction of T_1
        k = Multiplicity(1, 1)
        h = 1e-3
        ctrl = FDControl(h, 1e-3)

        def kernel(variant):
            c = shift_constants(k, variant)
            sy = alternating_polys(Y0)

            def G(p):
                sp = alternating_polys(p)
                val = 2 * gbf_fixed(p, Y0, k, 64)
                for d, i, s in ((c.d1, 0, (1, 0)), (c.d2, 1, (0, 1)), (c.d3, 2, (1, 1))):
                    val += 0.25 * d * sp[i] * sy[i] * gbf_fixed(p, Y0, k.shifted(*s), 64)
                return val
            return lambda p: (apply_T1(G, p, k, ctrl) + Y0[0] * G(p)) / (2 * Y0[0])

        res = {v: abs(apply_T1(kernel(v), X0, k, ctrl) - Y0[0] * kernel(v)(X0))
               for v in ("printed", "corrected")}
        assert res["printed"] > 1e-3
        assert res["corrected"] < 1e-5


class TestDensityL:
    def test_outside(self):
        assert density_L((2, 1), (3, 0), (1, 1)).value == 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            density_L((1, 1), (0.1, 0.1), (1, 1))

    def test_pointwise_matches_vectorized(self):
        z = (0.4, -0.3)
        a = density_L((2, 1), z, (1, 1)).value
        b = density_L_values((2, 1), (1, 1), np.array([z[0]]), np.array([z[1]]), 48, 32)[0]
        assert a == pytest.approx(b, rel=1e-9)

    @pytest.mark.parametrize("variant", ["corrected", "printed"])
    @pytest.mark.parametrize("y,k", [((2.0, 1.0), (1, 1)), ((1.0, 0.3), (0.7, 2.2))])
    def test_orbit_matches_images(self, y, k, variant):
        z1, z2, _ = chamber_rule(y, 8)
        orbit = density_L_orbit_values(y, k, z1, z2, 12, 12, variant)
        direct = np.stack([density_L_values(y, k, a, b, 12, 12, variant)
                           for a, b in _orbit_points(z1, z2)])
        assert np.max(np.abs(orbit - direct)) <= 1e-13 * np.max(np.abs(direct))

    @pytest.mark.parametrize("kind", ["L", "L_printed"])
    def test_prefactor(self, kind):
        # x = 0: the integral of L is 2 y1, with no rescaling
        total = hull_integral(kind, (2, 1), (1, 1), ones, 1e-6).value
        assert total == pytest.approx(4.0, rel=1e-5)

    def test_positivity(self):
        y, k = (2.0, 1.0), (1, 1)
        g = np.linspace(-2, 2, 15)
        pts = np.array([(a, b) for a in g for b in g if convex_hull_contains(y, (a / 0.95, b / 0.95))])
        vals = density_L_values(y, k, pts[:, 0], pts[:, 1], 32, 24)
        assert np.all(vals >= -1e-6 * np.max(np.abs(vals)))

    def test_negative_y1_sign(self):
        # L changes sign with y1 so that L / (2 y1) stays a positive density
        z = np.array([0.3]), np.array([0.2])
        a = density_L_values((2, 1), (1, 1), *z)[0]
        b = density_L_values((-2, 1), (1, 1), -z[0], z[1])[0]
        assert b == pytest.approx(-a, rel=1e-10)


class TestKernel:
    def test_trivial(self):
        assert dunkl_kernel((0, 0), Y0, (1, 1)).value == 1.0
        assert dunkl_kernel(X0, (0, 0), (1, 1)).value == 1.0

    @pytest.mark.parametrize("k", sorted(FROZEN_KERNEL))
    def test_frozen(self, k):
        res = dunkl_kernel(X0, Y0, k, tol=1e-7)
        assert res.converged
        assert res.value == pytest.approx(FROZEN_KERNEL[k], abs=2e-5 * (1 + FROZEN_KERNEL[k]))
        assert res.value == pytest.approx(dunkl_kernel_prop2(X0, Y0, k), abs=2e-5 * (1 + res.value))

    def test_symmetric(self):
        a = dunkl_kernel(X0, Y0, (1, 1)).value
        assert a == pytest.approx(dunkl_kernel(Y0, X0, (1, 1)).value, abs=2e-5)

    def test_group_average(self):
        k = (1, 1)
        vals = [dunkl_kernel(X0, w.apply(Y0), k).value for w in group_elements()]
        assert np.mean(vals) == pytest.approx(gbf(X0, Y0, k).value, abs=1e-4)
        assert all(0 < v <= max(math.exp(X0[0] * a + X0[1] * b)
                                for a, b in (w.apply(Y0) for w in group_elements())) for v in vals)

    def test_equivariance(self):
        k = (1, 1)
        ref = dunkl_kernel(X0, Y0, k).value
        for w in group_elements():
            assert dunkl_kernel(w.apply(X0), w.apply(Y0), k).value == pytest.approx(ref, rel=1e-12)

    def test_even_part(self):
        k = (1, 1)
        even = dunkl_kernel(X0, Y0, k).value + dunkl_kernel(X0, (-Y0[0], -Y0[1]), k).value
        assert even == pytest.approx(gbf_combination(X0, Y0, k), abs=2e-5)

    def test_shift_identity_C1(self):
        k = Multiplicity(1, 1)
        ref = (0.9, 0.2)
        lhs = 0.0
        for w in group_elements():
            chi = alternating_polys(w.apply(ref))[0] / alternating_polys(ref)[0]
            lhs += chi * dunkl_kernel(X0, w.apply(Y0), k).value
        rhs = (shift_constants(k).d1 * alternating_polys(X0)[0] * alternating_polys(Y0)[0]
               * gbf(X0, Y0, k.shifted(1, 0)).value)
        assert lhs == pytest.approx(rhs, abs=2e-4)

    def test_y1_zero_uses_swap(self):
        # eigenvalue y1 = 0 in the e1 direction
        y, k = (0.0, 1.2), (1, 1)
        val = dunkl_kernel(X0, y, k).value
        assert 0 < val
        t1 = apply_T1(lambda p: dunkl_kernel(p, y, k).value, X0, k, FDControl(1e-3, 1e-3))
        assert abs(t1) < 1e-5

    def test_small_gamma_dispatch(self):
        val = dunkl_kernel((0.3, 0.1), (1.0, 0.4), (0.01, 0.01)).value
        assert val == pytest.approx(math.exp(0.34), rel=5e-2)

    def test_irregular_y(self):
        with pytest.raises(DegenerateInputError):
            dunkl_kernel(X0, (1.0, 1.0), (1, 1))


class TestEigenResidual:
    def test_standard_point(self):
        assert eigen_residual(X0, Y0, (1, 1), tol=1e-7, ctrl=FDControl(1e-4, 1e-3)) <= 1e-3

    def test_small_k(self):
        assert eigen_residual((0.3, 0.1), (1.0, 0.4), (0.01, 0.01)) <= 1e-3 * 5e-2

    def test_second_order(self):
        r = [eigen_residual(X0, Y0, (1, 1), ctrl=FDControl(h, 1e-3)) for h in (0.08, 0.04)]
        assert r[0] / r[1] == pytest.approx(4.0, rel=0.1)
