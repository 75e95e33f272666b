"""Built-in functions, gradients, line restrictions, convexity checks."""

import math

import numpy as np
import pytest

from heisconvex.core import HPoint, HorizontalVector, exp_horizontal
from heisconvex.funcs import (
    ParsedFn,
    Quadratic,
    SqNorm,
    SqNormT,
    Wang,
    check_h_convexity,
    make_function,
)

E = HPoint.origin(1)


class TestEval:
    def test_sqnorm_ignores_t(self):
        assert SqNorm(1)(HPoint.of(3, 4, 7)) == 25.0

    def test_wang_branch_values(self):
        w = Wang()
        r = 1.7
        assert w(HPoint.of(0, r, 5.0)) == pytest.approx(2 * r ** (4 / 3), rel=1e-14)
        assert w(HPoint.of(r, 0, -2.0)) == pytest.approx(r**4, rel=1e-14)
        assert w(HPoint.of(0, 0, 9.0)) == 0.0

    def test_wang_continuous_across_branch(self):
        # approach the seam |y| = |x|^3 from both branches: the limits agree
        # with the common seam value 2.5 x^4
        w = Wang()
        for x in (0.3, 0.9, 1.4):
            y = x**3
            seam = 2.5 * x**4
            for side in (-1.0, 1.0):
                prev_gap = math.inf
                for eps in (1e-6, 1e-9, 1e-12):
                    val = w(HPoint.of(x, y * (1 + side * eps), 0))
                    gap = abs(val - seam)
                    assert gap <= prev_gap + 1e-15
                    prev_gap = gap
                assert prev_gap <= 1e-9 * max(1.0, seam)

    def test_quad_requires_psd(self):
        with pytest.raises(ValueError):
            Quadratic([[1.0, 0.0], [0.0, -1.0]])

    def test_quad_value(self):
        q = Quadratic(np.diag([1.0, 4.0]))
        assert q(HPoint.of(2, 3, 5)) == 2 * 2 + 4 * 9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            SqNorm(2)(HPoint.of(1, 2, 3))

    def test_make_function_variants(self):
        assert make_function({"builtin": "sqnorm_t", "n": 2}).n == 2
        assert make_function({"expr": "x1^4", "n": 1}).name.startswith("expr:")
        with pytest.raises(ValueError):
            make_function({"builtin": "nope"})
        with pytest.raises(ValueError):
            make_function({"builtin": "wang", "n": 2})


class TestGradients:
    def test_sqnorm_gradient(self):
        g = SqNorm(1).horizontal_gradient(HPoint.of(1.5, -2.0, 3.0))
        np.testing.assert_allclose(g.as_array(), [3.0, -4.0])

    def test_sqnorm_t_vector_field_example(self):
        g = SqNormT(1).horizontal_gradient(HPoint.of(1, 1, 1))
        np.testing.assert_allclose(g.as_array(), [6.0, -2.0])

    @pytest.mark.parametrize(
        "f",
        [SqNorm(1), SqNormT(1), Quadratic(np.diag([1.0, 3.0])), Wang()],
        ids=lambda f: f.name,
    )
    def test_fd_matches_analytic(self, f):
        rng = np.random.default_rng(0)
        for _ in range(25):
            x, y, t = rng.uniform(-3, 3, 3)
            if f.name == "wang" and abs(abs(y) - abs(x) ** 3) < 0.05:
                continue  # second derivatives jump on the branch seam
            p = HPoint.of(x, y, t)
            ga = f.horizontal_gradient(p).as_array()
            gf = f._fd_gradients(p.x, p.y, np.asarray(p.t)).reshape(-1)
            np.testing.assert_allclose(gf, ga, rtol=0, atol=1e-6 * max(1, np.abs(ga).max()))

    def test_parsed_gradient_is_horizontal(self):
        # d/dalpha f(p o exp(alpha e_x)) picks up the 2 y d/dt term
        f = ParsedFn("x1^2 + y1^2 + t^2", 1)
        p = HPoint.of(1, 1, 1)
        g = f.horizontal_gradient(p).as_array()
        np.testing.assert_allclose(g, [6.0, -2.0], atol=1e-6)


class TestRestrictToLine:
    def test_sqnorm_is_quadratic_along_lines(self):
        line = SqNorm(1).restrict_to_line(E, HorizontalVector([1], [0]))
        alphas = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(line(alphas), alphas**2, atol=1e-14)

    def test_sqnorm_t_along_horizontal_line_through_e(self):
        u = HorizontalVector([1 / math.sqrt(2)], [1 / math.sqrt(2)])
        line = SqNormT(1).restrict_to_line(E, u)
        alphas = np.linspace(-3, 3, 11)
        np.testing.assert_allclose(line(alphas), alphas**2, atol=1e-12)

    def test_midpoint_convexity_along_restrictions(self):
        rng = np.random.default_rng(1)
        for f in (SqNorm(1), SqNormT(1), Wang()):
            p = HPoint.of(*rng.uniform(-2, 2, 3))
            v = rng.standard_normal(2)
            line = f.restrict_to_line(p, HorizontalVector(v[:1], v[1:]))
            for _ in range(20):
                a, b = rng.uniform(-2, 2, 2)
                mid = line(0.5 * (a + b))
                assert mid <= 0.5 * (line(a) + line(b)) + 1e-10

    def test_zero_direction_rejected(self):
        with pytest.raises(ValueError):
            SqNorm(1).restrict_to_line(E, HorizontalVector.zero(1))


class TestConvexityCheck:
    def test_sqnorm_clean(self):
        assert check_h_convexity(SqNorm(1), 100, 8, seed=0).ok

    def test_wang_clean(self):
        assert check_h_convexity(Wang(), 100, 8, seed=0).ok

    def test_concave_flagged(self):
        rep = check_h_convexity(ParsedFn("-(x1^2)", 1), 100, 8, seed=0)
        assert not rep.ok
        assert rep.max_defect > 0

    def test_parsed_matches_builtin(self):
        f = SqNorm(1)
        g = ParsedFn("x1^2 + y1^2", 1)
        rng = np.random.default_rng(2)
        pts = rng.uniform(-5, 5, (1000, 3))
        vals_f = f.values(pts[:, :1], pts[:, 1:2], pts[:, 2])
        vals_g = g.values(pts[:, :1], pts[:, 1:2], pts[:, 2])
        np.testing.assert_allclose(vals_f, vals_g, atol=1e-12)


class TestWangGradientSeam:
    def test_gradient_continuous_across_seam(self):
        w = Wang()
        for x in (0.5, 1.0, 1.5):
            inner = w.horizontal_gradient(HPoint.of(x, x**3 * (1 - 1e-10), 0)).as_array()
            outer = w.horizontal_gradient(HPoint.of(x, x**3 * (1 + 1e-10), 0)).as_array()
            np.testing.assert_allclose(inner, outer, rtol=1e-6)
