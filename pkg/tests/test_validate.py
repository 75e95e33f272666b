"""Closed-form oracle consistency and the implication-chain suite."""

import math

import numpy as np
import pytest

from heisconvex.core import HPoint, group_mul, random_gauge_ball_points
from heisconvex.funcs import ParsedFn, SqNorm, Wang
from heisconvex.hnsections import Budget, certified_probes, hn_contains
from heisconvex.sections import h_section_boundary, section_spec
from heisconvex.validate import (
    AgreementReport,
    ChainConfig,
    chain_suite,
    closed_form_t_max,
    eta,
    example_agreement,
    example_oracle,
)

E = HPoint.origin(1)


class TestClosedForms:
    def test_profile_checkpoints(self):
        assert closed_form_t_max(1.0, 0.0) == pytest.approx(math.sqrt(3.0), abs=1e-15)
        assert closed_form_t_max(1.0, 2.0) == pytest.approx(3.0 * math.sqrt(3.0), abs=1e-14)
        assert closed_form_t_max(1.0, 3.0) == 0.0

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            closed_form_t_max(1.0, 3.5)
        with pytest.raises(ValueError):
            closed_form_t_max(0.0, 0.0)

    def test_eta_endpoints(self):
        p0 = eta(1.0, 0.0)
        assert p0.point.allclose(HPoint.of(3, 0, 0), tol=1e-12)
        assert p0.d == 3.0 and p0.t == pytest.approx(0.0, abs=1e-15)
        p1 = eta(1.0, -2.0 * math.pi / 3.0)
        assert abs(p1.point.x[0]) < 1e-12 and abs(p1.point.y[0]) < 1e-12
        assert p1.point.t == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_eta_max_height(self):
        p = eta(1.0, -math.pi / 3.0)
        assert p.t == pytest.approx(3.0 * math.sqrt(3.0), abs=1e-12)
        assert p.d == pytest.approx(2.0, abs=1e-12)

    def test_theta_sweep_consistency(self):
        # d(th) = sqrt(r)(1 + 2cos th), t(th) = 4r sqrt(1-cos)sqrt(1+cos)(1+cos),
        # and t(th) = t_max(r, d(th)); all three at 1e-9 across the sweep
        for r in (1.0, 0.37, 4.2):
            worst = 0.0
            for th in np.linspace(-2.0 * math.pi / 3.0, 0.0, 1000):
                p = eta(r, th)
                c = math.cos(th)
                worst = max(
                    worst,
                    abs(p.d - math.sqrt(r) * (1 + 2 * c)),
                    abs(p.t - 4 * r * math.sqrt(1 - c) * math.sqrt(1 + c) * (1 + c)),
                    abs(p.t - closed_form_t_max(r, p.d)),
                )
            assert worst <= 1e-9 * max(1.0, r)

    def test_t_maximised_at_minus_pi_third(self):
        r = 2.3
        grid = np.linspace(-2.0 * math.pi / 3.0, 0.0, 4001)
        ts = [eta(r, th).t for th in grid]
        assert max(ts) <= 3 * math.sqrt(3.0) * r + 1e-6
        assert max(ts) >= 3 * math.sqrt(3.0) * r - 1e-6

    def test_theta_domain(self):
        with pytest.raises(ValueError):
            eta(1.0, 0.5)


class TestSectionIdentity:
    def test_boundary_radii_sqrt_s_at_random_centers(self):
        f = SqNorm(1)
        rng = np.random.default_rng(0)
        for center in random_gauge_ball_points(rng, 1, 10, 5.0):
            for s in (0.5, 1.0, 4.0):
                b = h_section_boundary(f, section_spec(f, center, s), 90)
                np.testing.assert_allclose(b.radii, math.sqrt(s), atol=1e-9)

    def test_left_translation_identity(self):
        f = SqNorm(1)
        rng = np.random.default_rng(1)
        xi0 = HPoint.of(0.8, -0.5, 1.2)
        for zeta, _ in certified_probes(f, E, 1.0, 8, rng):
            translated = group_mul(xi0, zeta)
            a = hn_contains(f, xi0, 1.0, translated, Budget.quick()).is_in
            b = hn_contains(f, E, 1.0, zeta, Budget.quick()).is_in
            assert a == b


class TestOracle:
    def test_matches_closed_form(self):
        assert example_oracle(E, 1.0, HPoint.of(0, 0, 1.7))
        assert not example_oracle(E, 1.0, HPoint.of(0, 0, 1.8))
        assert example_oracle(E, 1.0, HPoint.of(3, 0, 0))
        assert not example_oracle(E, 1.0, HPoint.of(3.01, 0, 0))

    def test_translation_invariant(self):
        center = HPoint.of(1, 2, -3)
        probe = group_mul(center, HPoint.of(0, 0, 1.0))
        assert example_oracle(center, 1.0, probe)


class TestAgreement:
    def test_interior_grid_fully_in(self):
        rep = example_agreement(
            grid=(9, 9), rho_span=2.0, t_span=1.0, band=1e-2, budget=Budget.quick()
        )
        assert rep.rate == 1.0
        assert rep.false_in == 0

    def test_small_mixed_grid(self):
        rep = example_agreement(grid=(21, 21), band=1e-2, budget=Budget.quick())
        assert rep.rate >= 0.99
        assert rep.false_in == 0

    def test_parallel_matches_serial(self):
        kw = dict(grid=(7, 7), rho_span=3.2, t_span=5.5, band=1e-2, budget=Budget.quick())
        a = example_agreement(jobs=1, **kw)
        b = example_agreement(jobs=2, **kw)
        assert a == b


@pytest.fixture(scope="module")
def small_cfg():
    return ChainConfig(
        convexity_points=80,
        convexity_dirs=6,
        round_heights=(1e-3, 1.0, 1e3),
        round_centers=1,
        slope_samples=2,
        slope_r_grid=(0.25, 1.0, 4.0, 10.0),
        engulfing_pairs=600,
        engulfing_samples=10,
        hn_centers=2,
        hn_probes=3,
        quasi_triples=4,
        n_dirs=180,
        budget=Budget.quick(),
    )


class TestChainSuite:
    def test_sqnorm_all_pass(self, small_cfg):
        rep = chain_suite(SqNorm(1), small_cfg)
        assert rep.all_pass, [(s.name, s.status, s.note) for s in rep.stages]
        assert all(h for _, _, h in rep.implications)

    def test_wang_designed_failure(self, small_cfg):
        rep = chain_suite(Wang(), small_cfg)
        assert set(rep.failed) == {"round-sections", "slope"}
        assert rep.stage("engulfing").status == "pass"
        assert rep.stage("hn-engulfing").status == "skip"
        assert rep.stage("quasimetric").status == "skip"

    def test_concave_fails_at_convexity(self, small_cfg):
        rep = chain_suite(ParsedFn("-(x1^2)", 1), small_cfg)
        assert rep.stage("convexity").status == "fail"
        assert all(
            s.status == "skip" for s in rep.stages if s.name != "convexity"
        )
