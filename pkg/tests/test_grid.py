import math

import numpy as np
import pytest

from transonic.errors import GridMismatch, NonZeroMean, SymmetryViolation
from transonic.grid import (
    RealField2D,
    Symmetry,
    antiderivative_x,
    constant,
    dealias,
    derivative,
    l2_norm,
    make_grid,
    product_dealiased,
    symmetrize,
    weighted_sup,
    zeros,
)
from transonic.io import read_field, write_field
from transonic.lump import LumpParams, lump_derivative, lump_eval, sample_lump


class TestMakeGrid:
    def test_default_spacing(self):
        g = make_grid(256, 256, 40, 40)
        assert g.dx == pytest.approx(0.3125)

    def test_smallest_legal(self):
        g = make_grid(16, 16, 1, 1)
        assert g.nx == 16 and g.Ly == 1.0

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            make_grid(100, 64, 40, 40)

    def test_rejects_nonpositive_halfwidth(self):
        with pytest.raises(ValueError):
            make_grid(64, 64, 0.0, 40)

    def test_points_and_wavenumbers(self):
        g = make_grid(32, 32, 5, 5)
        assert g.x[0] == -5.0
        assert g.x[1] - g.x[0] == pytest.approx(2 * 5 / 32)
        assert g.kx[1] == pytest.approx(math.pi / 5)


class TestDerivative:
    def test_exact_mode(self):
        g = make_grid(64, 64, 7, 7)
        f = RealField2D(g, np.sin(np.pi * g.X / g.Lx), Symmetry.ODD_X_EVEN_Y)
        d = derivative(f, 1, 0)
        expected = (np.pi / g.Lx) * np.cos(np.pi * g.X / g.Lx)
        assert np.max(np.abs(d.values - expected)) < 1e-12
        assert d.symmetry is Symmetry.EVEN_X_EVEN_Y

    def test_parity_bookkeeping(self):
        g = make_grid(32, 32, 5, 5)
        f = zeros(g, Symmetry.ODD_X_EVEN_Y)
        assert derivative(f, 1, 0).symmetry is Symmetry.EVEN_X_EVEN_Y
        assert derivative(f, 0, 1).symmetry is Symmetry.ODD_X_ODD_Y
        assert derivative(f, 1, 1).symmetry is Symmetry.EVEN_X_ODD_Y

    def test_commutes(self, rand_field):
        g = make_grid(64, 64, 9, 9)
        f = rand_field(g, Symmetry.NONE, seed=3)
        a = derivative(derivative(f, 1, 0), 0, 1)
        b = derivative(f, 1, 1)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_order_guard(self):
        g = make_grid(32, 32, 5, 5)
        with pytest.raises(ValueError):
            derivative(zeros(g), 5, 0)

    def test_fourth_derivative_matches_closed_form(self):
        # resolution floor: dx ~ 0.08 and a box large enough that the seam
        # kink of the sampled lump stays below the target
        p = LumpParams.from_epsilon(0.0)
        g = make_grid(2048, 2048, 80, 80)
        q = sample_lump(p, g)
        d4 = derivative(q, 4, 0)
        exact = lump_derivative(p, 4, 0, g.X, g.Y)
        interior = (np.abs(g.X) < 10) & (np.abs(g.Y) < 10)
        rel = np.max(np.abs(d4.values - exact)[interior]) / np.max(np.abs(exact))
        assert rel <= 1e-6

    def test_fourth_derivative_default_grid_level(self):
        # frozen truncation level of the default configuration
        p = LumpParams.from_epsilon(0.0)
        g = make_grid(512, 512, 40, 40)
        q = sample_lump(p, g)
        d4 = derivative(q, 4, 0)
        exact = lump_derivative(p, 4, 0, g.X, g.Y)
        interior = (np.abs(g.X) < 10) & (np.abs(g.Y) < 10)
        rel = np.max(np.abs(d4.values - exact)[interior]) / np.max(np.abs(exact))
        assert rel <= 2e-5


class TestAntiderivative:
    def test_exact_mode(self):
        g = make_grid(64, 64, 7, 7)
        prof = np.cos(np.pi * g.Y / g.Ly)
        f = RealField2D(g, np.cos(np.pi * g.X / g.Lx) * prof, Symmetry.EVEN_X_EVEN_Y)
        a = antiderivative_x(f)
        expected = (g.Lx / np.pi) * np.sin(np.pi * g.X / g.Lx) * prof
        assert np.max(np.abs(a.values - expected)) < 1e-12
        assert a.symmetry is Symmetry.ODD_X_EVEN_Y

    def test_roundtrip_removes_x_mean(self, rand_field):
        g = make_grid(64, 64, 9, 9)
        f = rand_field(g, Symmetry.NONE, seed=11)
        d = derivative(f, 1, 0)
        back = antiderivative_x(d)
        target = f.values - f.values.mean(axis=0, keepdims=True)
        assert np.max(np.abs(back.values - target)) < 1e-12

    def test_recovers_sampled_lump(self):
        # spectral derivative of the sampled lump has exactly zero line means,
        # so the antiderivative recovers the lump minus its x-mean
        p = LumpParams.from_epsilon(0.0)
        g = make_grid(512, 512, 40, 40)
        q = sample_lump(p, g)
        back = antiderivative_x(derivative(q, 1, 0))
        target = q.values - q.values.mean(axis=0, keepdims=True)
        assert np.max(np.abs(back.values - target)) <= 1e-6

    def test_nonzero_mean_rejected(self):
        g = make_grid(32, 32, 5, 5)
        with pytest.raises(NonZeroMean):
            antiderivative_x(constant(g, 1.0))


class TestProduct:
    def test_identity_factor(self, rand_field):
        g = make_grid(64, 64, 9, 9)
        f = constant(g, 1.0)
        h = rand_field(g, Symmetry.NONE, seed=4)
        prod = product_dealiased(f, h)
        assert np.max(np.abs(prod.values - dealias(h).values)) < 1e-13

    def test_parity_product(self, rand_field):
        g = make_grid(64, 64, 9, 9)
        f = rand_field(g, Symmetry.ODD_X_EVEN_Y, seed=5)
        h = rand_field(g, Symmetry.ODD_X_EVEN_Y, seed=6)
        assert product_dealiased(f, h).symmetry is Symmetry.EVEN_X_EVEN_Y

    def test_lump_square_value(self):
        # x = 1 must be a grid node; expected value frozen from the closed
        # form.  The dealiased square of the sampled lump carries the box-seam
        # truncation of the slowly-decaying tail (~ dx q(L)/L, first order),
        # so the tolerance is the measured level of this configuration and a
        # refinement halves the defect.
        p = LumpParams.from_epsilon(0.0)
        expected = float(lump_eval(p, 1.0, 0.0)) ** 2  # 1.8839840974...
        errs = []
        for n, L in ((512, 32), (1024, 32)):
            g = make_grid(n, n, L, L)
            q = sample_lump(p, g)
            sq = product_dealiased(q, q)
            i = int(round((1.0 + g.Lx) / g.dx))
            j = int(round((0.0 + g.Ly) / g.dy))
            errs.append(abs(float(sq.values[i, j]) - expected))
            # the raw pointwise square matches the oracle to rounding
            assert q.values[i, j] ** 2 == pytest.approx(expected, rel=1e-13)
        assert errs[0] <= 3e-4
        assert errs[1] <= 0.6 * errs[0]

    def test_grid_mismatch(self):
        a = zeros(make_grid(32, 32, 5, 5))
        b = zeros(make_grid(32, 32, 6, 5))
        with pytest.raises(GridMismatch):
            product_dealiased(a, b)


class TestNorms:
    def test_weighted_sup_zero(self):
        g = make_grid(32, 32, 5, 5)
        assert weighted_sup(zeros(g), 2.0, 0.1) == 0.0

    def test_weighted_sup_exact_cancellation(self):
        g = make_grid(128, 128, 20, 20)
        f = RealField2D(g, (1.0 + g.r) ** -2.0)
        assert weighted_sup(f, 2.0, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_weighted_sup_lump_bounded(self):
        p = LumpParams.from_epsilon(0.0)
        vals = []
        for L, n in ((40, 512), (80, 1024)):
            g = make_grid(n, n, L, L)
            vals.append(weighted_sup(sample_lump(p, g), 1.0, 0.0))
        assert vals[0] > 0
        assert abs(vals[1] - vals[0]) / vals[0] < 0.05  # stable under doubling

    def test_l2_norm_area(self):
        g = make_grid(16, 16, 1, 1)
        assert l2_norm(constant(g, 1.0)) == pytest.approx(2.0)

    def test_l2_self_convergence(self):
        # quadrature self-convergence on the closed-form derivative field
        p = LumpParams.from_epsilon(0.0)
        vals = []
        for n in (256, 512):
            g = make_grid(n, n, 40, 40)
            vals.append(l2_norm(sample_lump(p, g, 1, 0)))
        assert abs(vals[1] - vals[0]) / vals[0] < 0.01

    def test_monotone_under_domination(self, rand_field):
        g = make_grid(64, 64, 9, 9)
        f = rand_field(g, Symmetry.NONE, seed=8)
        big = RealField2D(g, 2.0 * np.abs(f.values))
        assert weighted_sup(big, 1.5, 0.1) >= weighted_sup(f, 1.5, 0.1)
        assert l2_norm(big) >= l2_norm(f)


class TestSymmetryTags:
    def test_violation_detected(self):
        g = make_grid(32, 32, 5, 5)
        vals = np.zeros((32, 32))
        vals[3, 4] = 1.0
        with pytest.raises(SymmetryViolation):
            RealField2D(g, vals, Symmetry.ODD_X_EVEN_Y)

    def test_symmetrize_projects(self, rand_field):
        g = make_grid(32, 32, 5, 5)
        f = rand_field(g, Symmetry.NONE, seed=9)
        s = symmetrize(f, Symmetry.ODD_X_ODD_Y)
        assert s.symmetry is Symmetry.ODD_X_ODD_Y

    def test_fields_are_immutable(self):
        g = make_grid(32, 32, 5, 5)
        f = zeros(g)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestIO:
    def test_roundtrip(self, tmp_path, rand_field):
        g = make_grid(32, 64, 5, 7)
        f = rand_field(g, Symmetry.ODD_X_EVEN_Y, seed=10)
        binp = write_field(tmp_path, "sample", f)
        back = read_field(binp)
        assert back.grid.same_as(g)
        assert back.symmetry is f.symmetry
        assert np.array_equal(back.values, f.values)

    def test_sidecar_layout(self, tmp_path):
        import json

        g = make_grid(32, 32, 5, 5)
        write_field(tmp_path, "z", zeros(g))
        meta = json.loads((tmp_path / "z.json").read_text())
        assert set(meta) == {"nx", "ny", "Lx", "Ly", "symmetry", "quantity-name"}
        assert meta["quantity-name"] == "z"
