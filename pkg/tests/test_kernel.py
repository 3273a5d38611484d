import math

import numpy as np
import pytest

import transonic.kernel as K
from transonic.grid import Symmetry, make_grid
from transonic.kernel import (
    FAR_FIELD_SLOPE,
    KernelSymbolParams,
    decay_scan,
    dispersion_roots,
    integral_scan,
    kernel_fft,
    kernel_fourier_eval,
    kernel_residue_eval,
    symbol_eval,
)


class TestSymbol:
    def test_origin(self):
        p = KernelSymbolParams.normalized(0.2)
        assert symbol_eval(p, 0.0, 0.0) == 0.0

    def test_unit_point(self):
        p = KernelSymbolParams.normalized(0.3)
        assert symbol_eval(p, 1.0, 0.0) == pytest.approx(2.0)

    def test_gp_preset_coefficients(self):
        p = KernelSymbolParams.gp(0.1)
        # xi1^4 + (2 sqrt2 - e^2) xi1^2 + 2 xi2^2 + 2 e^2 xi1^2 xi2^2 + e^4 xi2^4
        val = symbol_eval(p, 1.3, 0.7)
        e2 = 0.01
        expect = (
            1.3**4
            + (2 * math.sqrt(2) - e2) * 1.3**2
            + 2 * 0.7**2
            + 2 * e2 * 1.3**2 * 0.7**2
            + e2**2 * 0.7**4
        )
        assert val == pytest.approx(expect, rel=1e-14)

    def test_factorization_random_sample(self):
        for eps in (0.1, 0.2, 0.5):
            p = KernelSymbolParams.normalized(eps)
            rng = np.random.default_rng(1)
            x1 = rng.uniform(-3 / eps, 3 / eps, 10_000)
            x2 = rng.uniform(-3 / eps, 3 / eps, 10_000)
            a, b, _ = K._roots_ab(p, x1)
            fact = eps**4 * (x2**2 + a) * (x2**2 + b)
            direct = symbol_eval(p, x1, x2)
            assert np.max(np.abs(fact.real - direct) / np.abs(direct)) <= 1e-11
            assert np.max(np.abs(fact.imag)) <= 1e-11 * np.max(direct)

    def test_coefficient_guard(self):
        with pytest.raises(ValueError):
            KernelSymbolParams(0.1, 1.0, -1.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            KernelSymbolParams.normalized(0.6)


class TestDispersionRoots:
    def test_branch_point_value(self):
        dr = dispersion_roots(0.1)
        e2 = 0.01
        expect = (1 - 2 * e2 + 2 * math.sqrt(1 - e2 + e2 * e2)) / (3 * e2)
        assert dr.c_eps**2 == pytest.approx(expect, rel=1e-14)
        assert dr.c_eps**2 == pytest.approx(99.0025, abs=3e-3)
        assert abs(dr.c_eps**2 - (1 / e2 - 1)) == pytest.approx(0.0025, abs=1e-4)

    def test_root_identities(self):
        for eps in (0.1, 0.2, 0.4):
            dr = dispersion_roots(eps)
            p = dr.params
            rng = np.random.default_rng(2)
            xi = rng.uniform(-3 / eps, 3 / eps, 10_000)
            a, b, D = K._roots_ab(p, xi)
            e4 = eps**4
            assert np.max(np.abs(e4 * a * b - (xi**4 + xi**2)) / (xi**4 + xi**2)) <= 1e-11
            assert np.max(np.abs(e4 * (a + b) - (1 + eps**2 * xi**2)) / (1 + eps**2 * xi**2)) <= 1e-11
            rhs = (1 + eps**2 * xi**2) ** 2 - 4 * e4 * (xi**2 + xi**4)
            assert np.max(np.abs(D**2 - rhs) / (np.abs(rhs) + 1e-30)) <= 1e-9

    def test_root_is_root(self):
        dr = dispersion_roots(0.2)
        assert abs(dr.D(dr.c_eps)) <= 1e-10
        inside = np.linspace(-0.99 * dr.c_eps, 0.99 * dr.c_eps, 101)
        assert np.all(np.real(dr.D(inside)) > 0)
        assert np.max(np.abs(np.imag(dr.D(inside)))) == 0.0

    def test_eps_guard(self):
        with pytest.raises(ValueError):
            dispersion_roots(0.0)

    def test_reduced_profile_limits(self):
        dr = dispersion_roots(0.1)
        assert np.real(dr.M(1, 1e-4)) == pytest.approx(1.0, abs=1e-5)
        assert np.real(dr.M(1, -1e-4)) == pytest.approx(-1.0, abs=1e-5)
        assert abs(dr.M(2, 1e-4)) <= 2e-4
        assert abs(dr.M(3, 1e-4)) <= 2e-8


class TestKernelFft:
    def test_discrete_delta(self):
        # applying the discrete symbol to the pole-zeroed kernel gives the
        # grid delta minus its mean
        p = KernelSymbolParams.normalized(0.2)
        g = make_grid(64, 64, 10, 10)
        fld = kernel_fft(p, g, 0, 0)
        kx = g.kx
        ky = 2 * np.pi * np.fft.fftfreq(g.ny, d=g.dy)
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        denom = symbol_eval(p, KX, KY)
        applied = np.real(np.fft.ifft2(np.fft.fft2(fld.values) * denom))
        i0 = g.nx // 2  # the x = y = 0 node
        j0 = g.ny // 2
        expect_peak = g.nx * g.ny / (4 * g.Lx * g.Ly) - 1 / (4 * g.Lx * g.Ly)
        assert applied[i0, j0] == pytest.approx(expect_peak, rel=1e-10)
        off = applied.copy()
        off[i0, j0] = -1 / (4 * g.Lx * g.Ly)
        assert np.max(np.abs(off + 1 / (4 * g.Lx * g.Ly))) <= 1e-10 * expect_peak

    def test_parity_tags(self):
        p = KernelSymbolParams.normalized(0.2)
        g = make_grid(64, 64, 10, 10)
        assert kernel_fft(p, g, 1, 0).symmetry is Symmetry.ODD_X_EVEN_Y
        assert kernel_fft(p, g, 1, 1).symmetry is Symmetry.ODD_X_ODD_Y
        assert kernel_fft(p, g, 0, 2).symmetry is Symmetry.EVEN_X_EVEN_Y

    def test_unsupported_order(self):
        p = KernelSymbolParams.normalized(0.2)
        g = make_grid(32, 32, 5, 5)
        with pytest.raises(ValueError):
            kernel_fft(p, g, 2, 2)


class TestResidueRoute:
    def test_parity_relations(self):
        p = KernelSymbolParams.normalized(0.2)
        v = kernel_residue_eval(p, 2, 0, 3.0, 2.0)
        assert kernel_residue_eval(p, 2, 0, -3.0, 2.0) == pytest.approx(v, rel=1e-12)
        w = kernel_residue_eval(p, 1, 0, 3.0, 2.0)
        assert kernel_residue_eval(p, 1, 0, -3.0, 2.0) == pytest.approx(-w, rel=1e-12)

    def test_odd_y_orders_vanish_on_axis(self):
        p = KernelSymbolParams.normalized(0.2)
        for mn in ((0, 1), (1, 1), (0, 3)):
            assert kernel_residue_eval(p, *mn, 3.0, 0.0) == 0.0

    def test_origin_rejected(self):
        p = KernelSymbolParams.normalized(0.2)
        with pytest.raises(ValueError):
            kernel_residue_eval(p, 1, 0, 0.0, 0.0)

    def test_axis_first_derivative_bounded(self):
        # r |K_(1,0)| stays bounded along the axis
        p = KernelSymbolParams.normalized(0.2)
        vals = [x * kernel_residue_eval(p, 1, 0, x, 0.0) for x in (1.0, 2.0, 5.0, 10.0, 20.0, 40.0)]
        assert max(abs(v) for v in vals) <= 0.5
        assert abs(vals[-1] - vals[-2]) <= 0.05 * abs(vals[-1])

    @pytest.mark.parametrize("mn,xy", [((1, 0), (3.0, 2.0)), ((2, 0), (2.0, 1.0)), ((1, 0), (5.0, 0.0))])
    def test_cross_route_agreement(self, mn, xy):
        m, n = mn
        p = KernelSymbolParams.normalized(0.2)
        vr = kernel_residue_eval(p, m, n, *xy)
        x1max = 500.0 if m == 2 else 150.0
        vf = kernel_fourier_eval(p, m, n, *xy, refine=2, xi1_max=x1max)
        assert vf == pytest.approx(vr, rel=2e-4)

    def test_gp_preset_supported(self):
        p = KernelSymbolParams.gp(0.2)
        v = kernel_residue_eval(p, 1, 0, 3.0, 2.0)
        vf = kernel_fourier_eval(p, 1, 0, 3.0, 2.0, refine=2, xi1_max=150.0)
        assert vf == pytest.approx(v, rel=2e-4)

    @pytest.mark.slow
    def test_brute_force_2d_quadrature(self):
        # nested adaptive quadrature of the plane integral, fully independent
        # of both production routes
        from scipy import integrate

        p = KernelSymbolParams.normalized(0.2)
        x, y = 0.3125, 1.796875

        def inner(xi1):
            f = lambda xi2: xi1 * xi2 / symbol_eval(p, xi1, xi2)
            v1, _ = integrate.quad(f, 0, 200, weight="sin", wvar=y, limit=2000)
            v2, _ = integrate.quad(f, 200, np.inf, weight="sin", wvar=y, limit=2000)
            return v1 + v2

        pts = np.concatenate([np.linspace(1e-6, 50, 4001), np.linspace(50, 400, 1401)[1:]])
        vals = np.array([inner(t) for t in pts])
        brute = np.trapezoid(vals * np.sin(x * pts), pts) / np.pi**2
        vr = kernel_residue_eval(p, 1, 1, x, y)
        assert brute == pytest.approx(vr, rel=1e-6)


class TestScans:
    def test_far_field_slopes(self):
        p = KernelSymbolParams.normalized(0.2)
        radii = np.geomspace(10, 60, 10)
        rep = decay_scan(p, 2, 0, radii, (0.35, 0.8, 1.2))
        assert rep.bound_slope == FAR_FIELD_SLOPE[(2, 0)]
        assert all(s <= -1.35 for s in rep.fitted_slope_per_ray)
        rep10 = decay_scan(p, 1, 0, radii, (0.35, 0.8, 1.2))
        assert all(-1.25 <= s <= -0.9 for s in rep10.fitted_slope_per_ray)

    def test_near_origin_mode(self):
        p = KernelSymbolParams.normalized(0.2)
        radii = np.geomspace(1e-3, 0.5, 8)
        rep = decay_scan(p, 1, 0, radii, (0.6,))
        # r|K_(1,0)| <= C near the origin: slope no steeper than -1 (modulo fit noise)
        assert rep.fitted_slope_per_ray[0] >= -1.1

    @pytest.mark.slow
    def test_integral_scan_bounded(self):
        p = KernelSymbolParams.normalized(0.2)
        vals = {r: integral_scan(p, 1, 0, r) for r in (1.0, 2.0, 4.0, 8.0)}
        ratios = [vals[r] / r for r in (1.0, 2.0, 4.0, 8.0)]
        # value/r bounded: growth per doubling stays modest and shrinking
        assert ratios[3] / ratios[2] <= 1.5
        assert ratios[3] / ratios[2] <= ratios[2] / ratios[1] + 0.05
        small = [integral_scan(p, 1, 0, r, shells=10) for r in (0.25, 0.5, 1.0)]
        assert small[0] <= small[1] <= small[2]

    @pytest.mark.slow
    def test_integral_scan_mixed_order(self):
        p = KernelSymbolParams.normalized(0.2)
        vals = {r: integral_scan(p, 1, 1, r) for r in (1.0, 2.0, 4.0, 8.0)}
        ratios = [vals[r] / math.sqrt(r) for r in (1.0, 2.0, 4.0, 8.0)]
        assert max(ratios) <= 2.0 * ratios[0]
        assert ratios[3] <= 1.1 * ratios[2]
