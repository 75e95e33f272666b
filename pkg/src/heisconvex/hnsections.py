"""Three-hop H^n-sections: witness search, engulfing, and boundary profiles.

A point xi' belongs to the H^n-section of f at (xi0, s) when there are
intermediate points xi1, xi2 with

    xi1 in S^H(xi0, s),   xi2 in S^H(xi1, s),   xi' in S^H(xi2, s),

i.e. three consecutive horizontal hops whose excesses all stay strictly
below the height.  Membership is decided by a budgeted search that is
one-sided by design: an IN verdict always carries a witness re-verified
against the exact inequalities, an OUT verdict only means no witness was
found at this resolution.

Search layout (per the module defaults): hop 1 scans a direction x radius
grid of S^H(xi0, s); for each candidate xi1 the hop-2 points must lie on the
plane-pair trace of (xi1, xi'), a line for n = 1, which is scanned in a
1-parameter grid and refined around the best near-misses.  Cheap seed
witnesses (three-segment decompositions of xi0^{-1} o xi' and the
equal-angle family) are tried first, so comfortably interior queries never
pay for the grid.  For n > 1 the trace is a (2n-1)-dimensional slice probed
by low-discrepancy sampling; that path is exposed but experimental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import (
    HPoint,
    HorizontalVector,
    decomposition_candidates,
    exp_from_many,
    exp_horizontal,
    exp_many,
    gauge_dist,
    gauge_norm,
    group_inv,
    group_mul,
    on_horizontal_plane,
    random_points,
    trace_many,
)
from .funcs import HConvexFn
from .sections import excess_values, h_section_radii, m_M, section_spec

__all__ = [
    "Budget",
    "Witness",
    "HnMembership",
    "DiamondViolationError",
    "hn_contains",
    "verify_witness",
    "reverse_witness",
    "certified_probes",
    "check_E_HnK",
    "EHnKReport",
    "triple_union_inclusion",
    "TripleUnionReport",
    "hn_boundary_profile",
]

MEMBERSHIP_MARGIN = 1e-12  # relative margin that a found witness must clear


@dataclass(frozen=True)
class Budget:
    """Sampling budget of the membership search."""

    hop1_dirs: int = 64
    hop1_radii: int = 16
    trace_samples: int = 128
    refine_rounds: int = 3
    near_miss_keep: int = 8
    tighten: float = 4.0

    @staticmethod
    def quick() -> "Budget":
        return Budget(32, 8, 64, 2, 6)

    @staticmethod
    def default() -> "Budget":
        return Budget()

    @staticmethod
    def thorough() -> "Budget":
        # x2 per sampled axis: x8 total work
        return Budget(128, 32, 256, 4, 12)

    @staticmethod
    def preset(name: str) -> "Budget":
        try:
            return {"quick": Budget.quick, "default": Budget.default,
                    "thorough": Budget.thorough}[name]()
        except KeyError:
            raise ValueError(f"unknown budget preset {name!r}") from None


@dataclass(frozen=True)
class Witness:
    """Intermediate points certifying three-hop membership."""

    xi1: HPoint
    xi2: HPoint
    hop_excesses: tuple[float, float, float]

    @property
    def max_excess(self) -> float:
        return max(self.hop_excesses)


@dataclass(frozen=True)
class HnMembership:
    verdict: Literal["IN", "OUT_AT_RESOLUTION"]
    witness: Witness | None
    budget_used: dict = field(default_factory=dict)

    @property
    def is_in(self) -> bool:
        return self.verdict == "IN"


class DiamondViolationError(ArithmeticError):
    """A hop pair violates the point-swap condition at the given constant."""


# ---------------------------------------------------------------------------
# witness verification
# ---------------------------------------------------------------------------


def _plane_tol(*ts: float) -> float:
    return 1e-9 * max(1.0, *(abs(t) for t in ts))


def verify_witness(
    f: HConvexFn, xi0: HPoint, s: float, xi_prime: HPoint, w: Witness
) -> bool:
    """Exact recomputation of the three memberships behind a witness."""
    if not on_horizontal_plane(xi0, w.xi1, _plane_tol(xi0.t, w.xi1.t)):
        return False
    if not on_horizontal_plane(w.xi1, w.xi2, _plane_tol(w.xi1.t, w.xi2.t)):
        return False
    if not on_horizontal_plane(w.xi2, xi_prime, _plane_tol(w.xi2.t, xi_prime.t)):
        return False
    for base, pt in ((xi0, w.xi1), (w.xi1, w.xi2), (w.xi2, xi_prime)):
        v = pt.pr1() - base.pr1()
        p = f.horizontal_gradient(base)
        e = float(excess_values(f, base, p, v[None, :])[0])
        if not e < s:
            return False
    return True


def _hop_excesses(f, xi0, xi1, xi2, xi_prime) -> tuple[float, float, float]:
    out = []
    for base, pt in ((xi0, xi1), (xi1, xi2), (xi2, xi_prime)):
        v = pt.pr1() - base.pr1()
        p = f.horizontal_gradient(base)
        out.append(float(excess_values(f, base, p, v[None, :])[0]))
    return tuple(out)


def _try_witness(f, xi0, s, xi_prime, xi1, xi2) -> Witness | None:
    """Accept (xi1, xi2) if all hops clear the height with a small margin."""
    for base, pt in ((xi0, xi1), (xi1, xi2), (xi2, xi_prime)):
        if not on_horizontal_plane(base, pt, _plane_tol(base.t, pt.t)):
            return None
    e = _hop_excesses(f, xi0, xi1, xi2, xi_prime)
    if max(e) < s * (1.0 - MEMBERSHIP_MARGIN):
        return Witness(xi1, xi2, e)
    return None


# ---------------------------------------------------------------------------
# membership search
# ---------------------------------------------------------------------------


def _seed_witnesses(f, xi0, s, xi_prime):
    """Cheap witness candidates: direct hop and decomposition seeds."""
    zeta = group_mul(group_inv(xi0), xi_prime)
    out = []
    for hops in decomposition_candidates(zeta):
        xi1 = exp_horizontal(xi0, hops[0])
        xi2 = exp_horizontal(xi1, hops[1])
        out.append((xi1, xi2))
    if on_horizontal_plane(xi0, xi_prime, _plane_tol(xi0.t, xi_prime.t)):
        out.append((xi_prime, xi_prime))
    return out


def _radius_fractions(count: int) -> np.ndarray:
    """Hop-1 radius fractions, denser towards the boundary.

    Near-boundary witnesses are what tight membership queries need, so a
    geometric tail approaching 1 is always included.
    """
    tail = np.array([0.97, 0.99, 0.997, 0.999, 0.9997, 0.9999])
    if count <= tail.size:
        return 1.0 - np.power(2.0, -np.arange(1, count + 1, dtype=float))
    core = np.linspace(0.1, 0.94, count - tail.size)
    return np.concatenate([core, tail])


def hn_contains(
    f: HConvexFn,
    xi0: HPoint,
    s: float,
    xi_prime: HPoint,
    budget: Budget | None = None,
    seed_witnesses: tuple[Witness, ...] = (),
) -> HnMembership:
    """Budgeted three-hop membership query.

    ``seed_witnesses`` lets callers (the quasi-metric bisection) re-certify
    previously found witnesses first, which keeps verdicts monotone in s.
    """
    if not s > 0:
        raise ValueError(f"height must be positive, got {s}")
    budget = budget or Budget.default()
    used = {"seeds": 0, "grid": 0, "refined": 0}

    for w in seed_witnesses:
        cand = _try_witness(f, xi0, s, xi_prime, w.xi1, w.xi2)
        if cand is not None:
            return HnMembership("IN", cand, used)

    if gauge_dist(xi0, xi_prime) <= 1e-12 * max(1.0, gauge_norm(xi0)):
        return HnMembership("IN", Witness(xi0, xi0, (0.0, 0.0, 0.0)), used)

    for xi1, xi2 in _seed_witnesses(f, xi0, s, xi_prime):
        used["seeds"] += 1
        cand = _try_witness(f, xi0, s, xi_prime, xi1, xi2)
        if cand is not None:
            return HnMembership("IN", cand, used)

    if xi0.n == 1:
        return _grid_search_n1(f, xi0, s, xi_prime, budget, used)
    return _slice_search_general(f, xi0, s, xi_prime, budget, used)


def _grid_search_n1(f, xi0, s, xi_prime, budget, used):
    p0 = f.horizontal_gradient(xi0)
    thetas = np.linspace(0.0, 2.0 * math.pi, budget.hop1_dirs, endpoint=False)
    fracs = _radius_fractions(budget.hop1_radii)
    taus = np.linspace(-1.0, 1.0, budget.trace_samples)

    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    spec = section_spec(f, xi0, s)
    radii = h_section_radii(f, spec, dirs, rel_tol=1e-8)
    fallback = 8.0 * max(gauge_dist(xi0, xi_prime), math.sqrt(s), 1.0)
    radii = np.where(np.isfinite(radii), radii, fallback)
    r_bar = float(np.max(radii))
    tau_span = 4.0 * r_bar

    th_grid, fr_grid = np.meshgrid(thetas, fracs, indexing="ij")
    cand = _evaluate_candidates(
        f, xi0, p0, s, xi_prime,
        th_grid.ravel(), fr_grid.ravel() * np.repeat(radii, fracs.size),
        taus * tau_span,
    )
    used["grid"] = cand.count
    if cand.witness is not None:
        return HnMembership("IN", cand.witness, used)

    # refinement around the best near-misses
    d_theta = 2.0 * math.pi / budget.hop1_dirs
    d_len = r_bar / max(budget.hop1_radii, 1)
    d_tau = 2.0 * tau_span / budget.trace_samples
    best = cand.top(budget.near_miss_keep)
    local = np.linspace(-1.0, 1.0, 5)
    for _ in range(budget.refine_rounds):
        ths, lens, ts_ = [], [], []
        for th0, len0, tau0, _score in best:
            t_loc, l_loc, u_loc = np.meshgrid(
                th0 + local * d_theta, np.maximum(len0 + local * d_len, 0.0),
                tau0 + local * d_tau, indexing="ij",
            )
            ths.append(t_loc.ravel())
            lens.append(l_loc.ravel())
            ts_.append(u_loc.ravel())
        cand = _evaluate_candidates(
            f, xi0, p0, s, xi_prime,
            np.concatenate(ths), np.concatenate(lens), np.concatenate(ts_),
            paired_tau=True,
        )
        used["refined"] += cand.count
        if cand.witness is not None:
            return HnMembership("IN", cand.witness, used)
        best = cand.top(budget.near_miss_keep)
        d_theta /= budget.tighten
        d_len /= budget.tighten
        d_tau /= budget.tighten
    return HnMembership("OUT_AT_RESOLUTION", None, used)


class _CandidateSet:
    """Evaluated hop-1/hop-2 candidates with scores for refinement."""

    def __init__(self, witness, scores, thetas, lens, taus, count):
        self.witness = witness
        self._scores = scores
        self._thetas = thetas
        self._lens = lens
        self._taus = taus
        self.count = count

    def top(self, k: int):
        order = np.argsort(self._scores)[:k]
        return [
            (float(self._thetas[i]), float(self._lens[i]), float(self._taus[i]),
             float(self._scores[i]))
            for i in order
        ]


def _evaluate_candidates(f, xi0, p0, s, xi_prime, thetas, hop1_lens, taus,
                         paired_tau: bool = False):
    """Evaluate the three hop conditions over candidate coordinates (n=1).

    Candidates are (theta, hop1 length) pairs each combined with every tau
    (grid mode), or pointwise triples when ``paired_tau`` is set.
    Returns a _CandidateSet whose witness is set iff some candidate clears
    all three conditions.
    """
    thetas = np.asarray(thetas, dtype=float)
    hop1_lens = np.asarray(hop1_lens, dtype=float)
    V1 = np.stack([np.cos(thetas), np.sin(thetas)], axis=1) * hop1_lens[:, None]
    e1 = np.asarray(excess_values(f, xi0, p0, V1))
    X1, Y1, T1 = exp_many(xi0, V1)
    f1 = f.values(X1, Y1, T1)
    P1 = f.grad_many(X1, Y1, T1)

    normals, offsets = trace_many(X1, Y1, T1, xi_prime)
    nn = np.linalg.norm(normals, axis=1)
    ok_trace = nn > 1e-14 * max(1.0, abs(xi_prime.t))
    nn_safe = np.where(ok_trace, nn, 1.0)
    foot = normals * (offsets / (nn_safe * nn_safe))[:, None]
    perp = np.stack([-normals[:, 1], normals[:, 0]], axis=1) / nn_safe[:, None]

    if paired_tau:
        W = foot + perp * np.asarray(taus, dtype=float)[:, None]
        e1_b, f1_b, P1_b = e1, f1, P1
        X1_b, Y1_b, T1_b = X1, Y1, T1
        ok_b = ok_trace
        th_b, len_b, tau_b = thetas, hop1_lens, np.asarray(taus, dtype=float)
    else:
        taus = np.asarray(taus, dtype=float)
        W = foot[:, None, :] + perp[:, None, :] * taus[None, :, None]
        W = W.reshape(-1, 2)
        rep = taus.size
        e1_b = np.repeat(e1, rep)
        f1_b = np.repeat(f1, rep)
        P1_b = np.repeat(P1, rep, axis=0)
        X1_b = np.repeat(X1, rep, axis=0)
        Y1_b = np.repeat(Y1, rep, axis=0)
        T1_b = np.repeat(T1, rep)
        ok_b = np.repeat(ok_trace, rep)
        th_b = np.repeat(thetas, rep)
        len_b = np.repeat(hop1_lens, rep)
        tau_b = np.tile(taus, thetas.size)

    X2, Y2, T2 = exp_from_many(X1_b, Y1_b, T1_b, W)
    e2 = f.values(X2, Y2, T2) - f1_b - np.sum(P1_b * W, axis=-1)
    Q2 = f.grad_many(X2, Y2, T2)
    delta = np.concatenate([xi_prime.x - X2, xi_prime.y - Y2], axis=-1)
    fp = f(xi_prime)
    e3 = fp - f.values(X2, Y2, T2) - np.sum(Q2 * delta, axis=-1)

    s_ok = s * (1.0 - MEMBERSHIP_MARGIN)
    e_all = np.stack([e1_b, e2, e3], axis=0)
    e_all = np.where(np.isfinite(e_all), e_all, np.inf)
    feasible = ok_b & np.all(e_all < s_ok, axis=0)
    witness = None
    if np.any(feasible):
        margin = np.where(feasible, np.max(e_all, axis=0), np.inf)
        i = int(np.argmin(margin))
        xi1 = HPoint(X1_b[i], Y1_b[i], float(T1_b[i]))
        xi2 = HPoint(X2[i], Y2[i], float(T2[i]))
        witness = Witness(
            xi1, xi2, (float(e1_b[i]), float(e2[i]), float(e3[i]))
        )
    score = np.where(ok_b, np.max(e_all - s, axis=0), np.inf)
    return _CandidateSet(witness, score, th_b, len_b, tau_b, int(e2.size))


def _slice_search_general(f, xi0, s, xi_prime, budget, used):
    """n > 1 fallback: low-discrepancy probing of the (2n-1)-dim trace slice.

    Experimental: exposed for completeness, calibrated far less than the
    n = 1 line search.
    """
    from .sections import sphere_directions

    n = xi0.n
    p0 = f.horizontal_gradient(xi0)
    dirs = sphere_directions(n, budget.hop1_dirs)
    spec = section_spec(f, xi0, s)
    radii = h_section_radii(f, spec, dirs, rel_tol=1e-8)
    fallback = 8.0 * max(gauge_dist(xi0, xi_prime), math.sqrt(s), 1.0)
    radii = np.where(np.isfinite(radii), radii, fallback)
    fracs = _radius_fractions(budget.hop1_radii)
    r_bar = float(np.max(radii))

    rng = np.random.default_rng(12345)  # fixed: deterministic probing pattern
    for frac in fracs[::-1]:
        V1 = dirs * (radii * frac)[:, None]
        e1 = np.asarray(excess_values(f, xi0, p0, V1))
        X1, Y1, T1 = exp_many(xi0, V1)
        f1 = f.values(X1, Y1, T1)
        P1 = f.grad_many(X1, Y1, T1)
        normals, offsets = trace_many(X1, Y1, T1, xi_prime)
        nn = np.linalg.norm(normals, axis=1)
        for i in range(dirs.shape[0]):
            if e1[i] >= s or nn[i] <= 1e-14 * max(1.0, abs(xi_prime.t)):
                continue
            unit = normals[i] / nn[i]
            foot = unit * (offsets[i] / nn[i])
            frame = _complement_basis(unit)
            coeffs = rng.uniform(-1.0, 1.0, (budget.trace_samples, 2 * n - 1))
            W = foot[None, :] + (coeffs * (2.0 * r_bar)) @ frame
            xi1 = HPoint(X1[i], Y1[i], float(T1[i]))
            X2, Y2, T2 = exp_from_many(X1[i], Y1[i], T1[i], W)
            f2 = f.values(X2, Y2, T2)
            e2 = f2 - float(f1[i]) - W @ P1[i]
            Q2 = f.grad_many(X2, Y2, T2)
            delta = np.concatenate([xi_prime.x - X2, xi_prime.y - Y2], axis=-1)
            e3 = f(xi_prime) - f2 - np.sum(Q2 * delta, axis=-1)
            used["grid"] += int(e2.size)
            s_ok = s * (1.0 - MEMBERSHIP_MARGIN)
            good = (e2 < s_ok) & (e3 < s_ok) & np.isfinite(e2) & np.isfinite(e3)
            if np.any(good):
                j = int(np.argmax(np.where(good, -np.maximum(e2, e3), -np.inf)))
                xi2 = HPoint(X2[j], Y2[j], float(T2[j]))
                w = _try_witness(f, xi0, s, xi_prime, xi1, xi2)
                if w is not None:
                    return HnMembership("IN", w, used)
    return HnMembership("OUT_AT_RESOLUTION", None, used)


def _complement_basis(unit: np.ndarray) -> np.ndarray:
    d = unit.shape[0]
    q, _ = np.linalg.qr(np.column_stack([unit, np.eye(d)]))
    return q[:, 1:d].T


# ---------------------------------------------------------------------------
# witness reversal (point-swap consistency)
# ---------------------------------------------------------------------------


def reverse_witness(
    f: HConvexFn,
    xi0: HPoint,
    s: float,
    xi_prime: HPoint,
    w: Witness,
    K_prime: float,
) -> Witness:
    """Reverse a three-hop chain through the point-swap condition.

    If each hop pair satisfies the swap at K', the chain xi' -> xi2 -> xi1
    -> xi0 certifies xi0 in the section of xi' at height K' s.  A hop pair
    violating the swap raises DiamondViolationError with its defect.
    """
    if not K_prime >= 1.0:
        raise ValueError("K' must be at least 1")
    hops = ((xi0, w.xi1), (w.xi1, w.xi2), (w.xi2, xi_prime))
    back = []
    for base, pt in hops:
        q = f.horizontal_gradient(pt)
        delta = base.pr1() - pt.pr1()
        e_back = f(base) - f(pt) - float(q.as_array() @ delta)
        if not e_back < K_prime * s * (1.0 + 1e-12):
            raise DiamondViolationError(
                f"hop reversal excess {e_back} exceeds K's = {K_prime * s}"
            )
        back.append(e_back)
    return Witness(w.xi2, w.xi1, (back[2], back[1], back[0]))


# ---------------------------------------------------------------------------
# certified probes and engulfing over H^n-sections
# ---------------------------------------------------------------------------


def certified_probes(
    f: HConvexFn,
    xi: HPoint,
    s: float,
    count: int,
    rng: np.random.Generator,
    max_frac: float = 0.95,
) -> list[tuple[HPoint, Witness]]:
    """Random certified members of the H^n-section at (xi, s).

    Chains three hops, each a random fraction of the section radius in a
    random direction from the previous point; the chain itself is the
    witness, so every returned probe is IN by construction.
    """
    out = []
    for _ in range(count):
        pts = [xi]
        excesses = []
        for _hop in range(3):
            base = pts[-1]
            u = rng.standard_normal(2 * f.n)
            u /= np.linalg.norm(u)
            spec = section_spec(f, base, s)
            r = float(h_section_radii(f, spec, u[None, :], rel_tol=1e-8)[0])
            if not math.isfinite(r):
                r = math.sqrt(s)
            frac = rng.uniform(0.0, max_frac)
            v = HorizontalVector(u[: f.n] * r * frac, u[f.n :] * r * frac)
            pts.append(exp_horizontal(base, v))
            p = f.horizontal_gradient(base)
            excesses.append(
                float(excess_values(f, base, p, (v.as_array())[None, :])[0])
            )
        w = Witness(pts[1], pts[2], tuple(excesses))
        out.append((pts[3], w))
    return out


@dataclass(frozen=True)
class EHnKReport:
    """Engulfing audit over H^n-sections.

    ``violations`` holds probes proven outside by the supplied oracle;
    ``inconclusive`` holds probes the search could not certify either way
    (an OUT at resolution is never a proof).
    """

    K: float
    checked: int
    violations: tuple
    inconclusive: tuple

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def check_E_HnK(
    f: HConvexFn,
    K: float,
    n_centers: int = 4,
    probes_per_center: int = 8,
    seed: int = 0,
    box_radius: float = 3.0,
    s_range: tuple[float, float] = (0.25, 4.0),
    budget: Budget | None = None,
    oracle=None,
) -> EHnKReport:
    """Sampled engulfing over H^n-sections.

    Draws (xi, s), picks xi' as a certified member of the section, and
    requires every other certified probe to be IN the section of xi' at
    height K s.  ``oracle(center, height, point) -> bool`` may resolve
    probes the search leaves inconclusive (used by the closed-form example).
    """
    if not K > 1:
        raise ValueError("engulfing constant must exceed 1")
    budget = budget or Budget.default()
    rng = np.random.default_rng(seed)
    checked = 0
    violations = []
    inconclusive = []
    for _ in range(n_centers):
        X, Y, T = random_points(rng, f.n, 1, box_radius)
        xi = HPoint(X[0], Y[0], float(T[0]))
        s = float(np.exp(rng.uniform(math.log(s_range[0]), math.log(s_range[1]))))
        probes = certified_probes(f, xi, s, probes_per_center + 1, rng)
        xi_p, _ = probes[0]
        for zeta, _w in probes[1:]:
            checked += 1
            res = hn_contains(f, xi_p, K * s, zeta, budget)
            if res.is_in:
                continue
            if oracle is not None and oracle(xi_p, K * s, zeta) is False:
                violations.append((xi, s, xi_p, zeta))
            else:
                inconclusive.append((xi, s, xi_p, zeta))
    return EHnKReport(K, checked, tuple(violations), tuple(inconclusive))


# ---------------------------------------------------------------------------
# triple-union inclusions against tilde balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TripleUnionReport:
    samples: int
    max_hop_norm_defect: float  # inclusion (a): hop norms beyond r
    max_excess_defect: float  # inclusion (b): hop excess beyond M(., r)
    defects: tuple

    @property
    def ok(self) -> bool:
        return len(self.defects) == 0


def triple_union_inclusion(
    f: HConvexFn,
    xi: HPoint,
    r: float,
    samples: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
    n_dirs: int = 720,
) -> TripleUnionReport:
    """Sampled two-sided inclusion between hop unions and the tilde ball.

    (a) chains whose hop i stays in S^H(., m(., r)) must have every hop of
    Euclidean norm <= r (hence land in the tilde ball of radius r);
    (b) chains of hops with norm <= r must have every hop excess at most
    M(base, r) at its own base point.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    defects = []
    worst_norm = 0.0
    worst_excess = 0.0
    for k in range(samples):
        # (a): hops sampled inside the m(., r)-sections
        base = xi
        for hop in range(3):
            m_here = m_M(f, base, r, n_dirs=n_dirs).m
            u = rng.standard_normal(2 * f.n)
            u /= np.linalg.norm(u)
            spec = section_spec(f, base, m_here)
            rad = float(h_section_radii(f, spec, u[None, :], rel_tol=1e-8)[0])
            frac = rng.uniform(0.0, 1.0 - 1e-9)
            v = HorizontalVector(u[: f.n] * rad * frac, u[f.n :] * rad * frac)
            norm_defect = v.norm - r
            worst_norm = max(worst_norm, norm_defect)
            if norm_defect > tol * max(1.0, r):
                defects.append(("hop-norm", k, hop, norm_defect))
            base = exp_horizontal(base, v)
        # (b): hops sampled in the radius-r ball, excess checked against M
        base = xi
        for hop in range(3):
            M_here = m_M(f, base, r, n_dirs=n_dirs).M
            u = rng.standard_normal(2 * f.n)
            u /= np.linalg.norm(u)
            length = r * rng.uniform(0.0, 1.0)
            v = HorizontalVector(u[: f.n] * length, u[f.n :] * length)
            p = f.horizontal_gradient(base)
            e = float(excess_values(f, base, p, v.as_array()[None, :])[0])
            excess_defect = e - M_here
            worst_excess = max(worst_excess, excess_defect)
            if excess_defect > tol * max(1.0, M_here):
                defects.append(("hop-excess", k, hop, excess_defect))
            base = exp_horizontal(base, v)
    return TripleUnionReport(samples, worst_norm, worst_excess, tuple(defects))


# ---------------------------------------------------------------------------
# boundary profile (n = 1)
# ---------------------------------------------------------------------------


def hn_boundary_profile(
    f: HConvexFn,
    xi0: HPoint,
    s: float,
    rho_grid,
    budget: Budget | None = None,
    t_tol: float = 1e-4,
    t_start: float | None = None,
) -> list[tuple[float, float]]:
    """IN/OUT transition height t_sup(rho) of the section at (xi0, s), n=1.

    For each rho, bisects on t >= 0 for the membership transition of the
    point xi0 o (rho, 0, t).  Soundness of the search makes the reported
    value a certified lower bound of the true supremum within t_tol.
    """
    if f.n != 1:
        raise ValueError("the boundary profile is implemented for n=1")
    budget = budget or Budget.default()
    out = []
    t_hi0 = t_start if t_start is not None else 6.0 * s
    for rho in rho_grid:
        rho = float(rho)

        def member(t_val: float) -> bool:
            probe = group_mul(xi0, HPoint(np.array([rho]), np.array([0.0]), t_val))
            return hn_contains(f, xi0, s, probe, budget).is_in

        if not member(0.0):
            out.append((rho, 0.0))
            continue
        t_lo, t_hi = 0.0, t_hi0
        grow = 0
        while member(t_hi) and grow < 30:
            t_lo = t_hi
            t_hi *= 2.0
            grow += 1
        while t_hi - t_lo > t_tol:
            mid = 0.5 * (t_lo + t_hi)
            if member(mid):
                t_lo = mid
            else:
                t_hi = mid
        out.append((rho, 0.5 * (t_lo + t_hi)))
    return out
