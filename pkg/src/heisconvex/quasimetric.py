"""The quasi-metric induced by mutual H^n-section membership.

    d_f(xi, xi') = inf { s > 0 : xi in S(xi', s) and xi' in S(xi, s) },

where S is the three-hop H^n-section of f.  The infimum is approximated
from above: bisection runs on the monotone predicate "both memberships are
certified IN", the reported value is the certified upper end of the final
bracket, and the witnesses at that height travel with the result.  The
predicate is symmetric by construction, so d_f(xi, xi') and d_f(xi', xi)
are equal exactly.

Because each membership query is itself a budgeted search, distance
precision trades directly against runtime; the default relative tolerance
of 1e-3 keeps a query at a few dozen membership searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HPoint, gauge_dist, group_mul, random_points
from .funcs import HConvexFn
from .hnsections import Budget, Witness, certified_probes, hn_contains

__all__ = [
    "QuasiDistance",
    "BracketCapError",
    "d_phi",
    "quasi_triangle_constant",
    "ball_contains",
    "ball_sandwich_check",
    "BallSandwichReport",
]

BRACKET_CAP = 2.0**60
BRACKET_FLOOR = 2.0**-60


@dataclass(frozen=True)
class QuasiDistance:
    """A certified bracket around the mutual-membership infimum.

    ``value`` equals ``s_hi`` (sound from above): mutual membership is
    certified at s_hi, while at s_lo at least one direction came back OUT
    at the search resolution.
    """

    value: float
    s_lo: float
    s_hi: float
    witness_fwd: Witness | None
    witness_bwd: Witness | None

    def __post_init__(self):
        if not (self.s_lo <= self.value and self.value <= self.s_hi * (1 + 1e-15)):
            raise ValueError("bracket must contain the value")


class BracketCapError(ArithmeticError):
    """Mutual membership unreachable below the bracket cap."""


def d_phi(
    f: HConvexFn,
    xi: HPoint,
    xi_prime: HPoint,
    rel_tol: float = 1e-3,
    budget: Budget | None = None,
) -> QuasiDistance:
    """Quasi-distance between xi and xi' with a certified bisection bracket.

    Witnesses found at larger heights re-certify instantly at every larger
    height, which keeps the bisection predicate monotone in s.
    """
    budget = budget or Budget.default()
    if gauge_dist(xi, xi_prime) == 0.0:
        return QuasiDistance(0.0, 0.0, 0.0, None, None)

    state = {"fwd": (), "bwd": ()}

    def mutual(s: float) -> bool:
        res_f = hn_contains(f, xi, s, xi_prime, budget, seed_witnesses=state["fwd"])
        if not res_f.is_in:
            return False
        res_b = hn_contains(f, xi_prime, s, xi, budget, seed_witnesses=state["bwd"])
        if not res_b.is_in:
            return False
        state["fwd"] = (res_f.witness,) + state["fwd"][:3]
        state["bwd"] = (res_b.witness,) + state["bwd"][:3]
        return True

    s_hi = 1.0
    while not mutual(s_hi):
        s_hi *= 2.0
        if s_hi > BRACKET_CAP:
            raise BracketCapError(
                f"no mutual membership below s = {BRACKET_CAP}: unbounded growth"
            )
    s_lo = s_hi / 2.0
    if s_hi == 1.0:
        s_lo = 1.0
        while mutual(s_lo):
            s_hi = s_lo
            s_lo /= 2.0
            if s_lo < BRACKET_FLOOR:
                break
    # geometric bisection to the relative tolerance
    while s_hi > s_lo * (1.0 + rel_tol) and s_lo > BRACKET_FLOOR:
        mid = math.sqrt(s_lo * s_hi)
        if mutual(mid):
            s_hi = mid
        else:
            s_lo = mid
    # re-query both ends so the bracket is certified, not inherited
    assert mutual(s_hi), "bracket upper end failed to re-certify"
    w_fwd = state["fwd"][0] if state["fwd"] else None
    w_bwd = state["bwd"][0] if state["bwd"] else None
    return QuasiDistance(s_hi, s_lo, s_hi, w_fwd, w_bwd)


def ball_contains(
    f: HConvexFn,
    xi: HPoint,
    r: float,
    xi_prime: HPoint,
    rel_tol: float = 1e-3,
    budget: Budget | None = None,
) -> bool:
    """Whether xi' lies in the open quasi-metric ball B(xi, r)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    return d_phi(f, xi, xi_prime, rel_tol, budget).value < r


def quasi_triangle_constant(
    f: HConvexFn,
    n_triples: int = 50,
    seed: int = 0,
    box_radius: float = 5.0,
    rel_tol: float = 1e-3,
    budget: Budget | None = None,
    spread_range: tuple[float, float] = (0.2, 2.0),
) -> float:
    """Sampled quasi-triangle constant.

    H_est = max over triples of d(xi, zeta) / (d(xi, eta) + d(eta, zeta)),
    with triples built from a base point and two log-uniform gauge-scale
    offsets so both near and far regimes appear.  A running max: doubling
    the sample count can only increase it.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_triples):
        bx, by, bt = random_points(rng, f.n, 1, box_radius)
        xi = HPoint(bx[0], by[0], float(bt[0]))
        eta = _offset_point(rng, xi, spread_range)
        zeta = _offset_point(rng, eta, spread_range)
        d_xz = d_phi(f, xi, zeta, rel_tol, budget).value
        d_xe = d_phi(f, xi, eta, rel_tol, budget).value
        d_ez = d_phi(f, eta, zeta, rel_tol, budget).value
        denom = d_xe + d_ez
        if denom <= 0.0 or d_xz <= 0.0:
            continue
        worst = max(worst, d_xz / denom)
    return worst


def _offset_point(rng, base: HPoint, spread_range) -> HPoint:
    n = base.n
    g = rng.standard_normal(2 * n + 1)
    x, y, t = g[:n], g[n : 2 * n], g[-1]
    h2 = float(x @ x + y @ y)
    nrm = (h2 * h2 + t * t) ** 0.25
    lam = math.exp(rng.uniform(math.log(spread_range[0]), math.log(spread_range[1]))) / nrm
    off = HPoint(x * lam, y * lam, t * lam * lam)
    return group_mul(base, off)


@dataclass(frozen=True)
class BallSandwichReport:
    """Outcome of the section / ball / section sandwich audit."""

    center: HPoint
    r: float
    H_est: float
    left_checked: int
    right_checked: int
    left_defects: tuple  # certified section members not in the ball
    right_defects: tuple  # ball members not certified in the section

    @property
    def ok(self) -> bool:
        return not self.left_defects and not self.right_defects


def ball_sandwich_check(
    f: HConvexFn,
    xi: HPoint,
    r: float,
    H_est: float,
    probes: int = 50,
    seed: int = 0,
    rel_tol: float = 1e-3,
    budget: Budget | None = None,
) -> BallSandwichReport:
    """Audit S(xi, r / (2 H)) <= B(xi, r) <= S(xi, r) by certified probes.

    Left: certified members of the small section must be inside the ball.
    Right: probes the quasi-distance accepts into the ball must re-certify
    as members of the full-height section.
    """
    if not (r > 0 and H_est > 0):
        raise ValueError("radius and quasi-triangle constant must be positive")
    budget = budget or Budget.default()
    rng = np.random.default_rng(seed)
    left_defects = []
    right_defects = []

    inner = certified_probes(f, xi, r / (2.0 * H_est), probes, rng)
    for zeta, _w in inner:
        d = d_phi(f, xi, zeta, rel_tol, budget)
        if not d.value < r:
            left_defects.append((zeta, d.value))

    accepted = 0
    for zeta, _w in certified_probes(f, xi, r, probes, rng, max_frac=0.9):
        d = d_phi(f, xi, zeta, rel_tol, budget)
        if d.value >= r:
            continue  # not a ball member; out of scope for the right inclusion
        accepted += 1
        res = hn_contains(f, xi, r, zeta, budget)
        if not res.is_in:
            right_defects.append((zeta, d.value))
    return BallSandwichReport(
        xi, r, H_est, len(inner), accepted, tuple(left_defects), tuple(right_defects)
    )
