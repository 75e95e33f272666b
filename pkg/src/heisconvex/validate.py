"""Closed-form oracle for the archetypal example, and the implication chain.

For f(x, y, t) = x^2 + y^2 on H^1 every H-section is a gauge-ball slice of
radius sqrt(s), and the closure of the three-hop section at (e, r) is the
tilde ball of hop radius sqrt(r), with explicit boundary

    |t| <= sqrt(3 r + 2 rho sqrt(r) - rho^2) (sqrt(r) + rho),
    rho = |(x, y)| in [0, 3 sqrt(r)].

The boundary is swept by the equal-angle three-hop points

    eta(theta) = (sqrt(r)(1 + cos th + cos 2th), sqrt(r)(sin th + sin 2th),
                  -4 r sin th (1 + cos th)),        th in [-2pi/3, 0],

whose horizontal distance is d(th) = sqrt(r)(1 + 2 cos th).  These closed
forms are treated as ground truth; the membership search is the system
under test.  ``chain_suite`` strings the whole pipeline together and checks
the implication chain  round sections => controlled slope => horizontal
engulfing => three-hop engulfing => quasi-metric behaves, at sampled scale.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engulfing as eng
from . import hnsections as hns
from . import quasimetric as qm
from . import sections as sec
from .core import HPoint, closed_form_t_bound, group_mul
from .funcs import HConvexFn, SqNorm, check_h_convexity, make_function

__all__ = [
    "ProfilePoint",
    "closed_form_t_max",
    "eta",
    "example_oracle",
    "AgreementReport",
    "example_agreement",
    "StageResult",
    "ChainConfig",
    "ChainReport",
    "chain_suite",
]


@dataclass(frozen=True)
class ProfilePoint:
    """A boundary point of the example's three-hop section at height r."""

    theta: float
    point: HPoint
    d: float
    t: float


def closed_form_t_max(r: float, rho: float) -> float:
    """Height of the example's section boundary over horizontal distance rho.

    ``r`` is the section height; hops have radius sqrt(r) and reach
    rho <= 3 sqrt(r).
    """
    if not r > 0:
        raise ValueError("height must be positive")
    return closed_form_t_bound(math.sqrt(r), rho)


def eta(r: float, theta: float) -> ProfilePoint:
    """Equal-angle boundary point of the example section at height r."""
    if not (-2.0 * math.pi / 3.0 - 1e-12 <= theta <= 1e-12):
        raise ValueError(f"theta = {theta} outside [-2pi/3, 0]")
    sr = math.sqrt(r)
    x = sr * (1.0 + math.cos(theta) + math.cos(2.0 * theta))
    y = sr * (math.sin(theta) + math.sin(2.0 * theta))
    t = -4.0 * r * math.sin(theta) * (1.0 + math.cos(theta))
    d = sr * (1.0 + 2.0 * math.cos(theta))
    return ProfilePoint(theta, HPoint.of(x, y, t), d, t)


def example_oracle(center: HPoint, s: float, point: HPoint) -> bool:
    """Closed-form membership of the example's section closure (n = 1)."""
    zeta = group_mul(HPoint(-center.x, -center.y, -center.t), point)
    rho = float(np.hypot(zeta.x[0], zeta.y[0]))
    sr = math.sqrt(s)
    if rho > 3.0 * sr:
        return False
    return abs(zeta.t) <= closed_form_t_max(s, rho)


# ---------------------------------------------------------------------------
# grid agreement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AgreementReport:
    total: int
    excluded: int
    compared: int
    agreements: int
    disagreements: tuple  # (rho, t, oracle_in, search_in)
    false_in: int  # search certified a point the oracle excludes

    @property
    def rate(self) -> float:
        return self.agreements / self.compared if self.compared else 1.0


def _boundary_curve(s: float, samples: int = 2000) -> np.ndarray:
    thetas = np.linspace(-2.0 * math.pi / 3.0, 0.0, samples)
    pts = np.array([[eta(s, th).d, eta(s, th).t] for th in thetas])
    return pts


def _classify_rows(args):
    """Worker: search-classify one chunk of grid rows (picklable)."""
    fn_spec, s, rho_vals, t_vals, budget_tuple = args
    f = make_function(fn_spec)
    budget = hns.Budget(*budget_tuple)
    e = HPoint.origin(1)
    out = np.zeros((len(rho_vals), len(t_vals)), dtype=bool)
    for i, rho in enumerate(rho_vals):
        for j, t in enumerate(t_vals):
            probe = HPoint.of(rho, 0.0, t)
            out[i, j] = hns.hn_contains(f, e, s, probe, budget).is_in
    return out


def example_agreement(
    s: float = 1.0,
    grid: tuple[int, int] = (101, 101),
    rho_span: float = 3.2,
    t_span: float = 5.5,
    band: float = 1e-2,
    budget: hns.Budget | None = None,
    jobs: int = 1,
    max_disagreements: int = 200,
) -> AgreementReport:
    """Classify a (rho, t) grid by closed form vs membership search.

    Points within ``band`` of the analytic boundary curve are excluded from
    the comparison (the search is one-sided there by design).  ``jobs`` > 1
    classifies row chunks in parallel processes; results are identical to
    the sequential run because every grid point is independent.
    """
    from scipy.spatial import cKDTree

    budget = budget or hns.Budget.default()
    n_rho, n_t = grid
    rho_vals = np.linspace(0.0, rho_span * math.sqrt(s), n_rho)
    t_vals = np.linspace(0.0, t_span * s, n_t)

    curve = _boundary_curve(s)
    tree = cKDTree(curve)
    rr, tt = np.meshgrid(rho_vals, t_vals, indexing="ij")
    pts = np.stack([rr.ravel(), tt.ravel()], axis=1)
    dist, _ = tree.query(pts)
    excluded = (dist.reshape(n_rho, n_t) <= band)

    sr = math.sqrt(s)
    oracle = np.zeros((n_rho, n_t), dtype=bool)
    for i, rho in enumerate(rho_vals):
        if rho >= 3.0 * sr:
            continue
        oracle[i] = t_vals < closed_form_t_max(s, rho)

    fn_spec = {"builtin": "sqnorm", "n": 1}
    budget_tuple = (
        budget.hop1_dirs, budget.hop1_radii, budget.trace_samples,
        budget.refine_rounds, budget.near_miss_keep, budget.tighten,
    )
    if jobs > 1:
        chunks = np.array_split(np.arange(n_rho), min(jobs * 4, n_rho))
        payloads = [
            (fn_spec, s, rho_vals[idx].tolist(), t_vals.tolist(), budget_tuple)
            for idx in chunks if idx.size
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_classify_rows, payloads))
        search = np.concatenate(parts, axis=0)
    else:
        search = _classify_rows((fn_spec, s, rho_vals.tolist(), t_vals.tolist(), budget_tuple))

    compare = ~excluded
    agree = (oracle == search) & compare
    disagreements = []
    for i, j in zip(*np.nonzero(compare & (oracle != search))):
        if len(disagreements) >= max_disagreements:
            break
        disagreements.append(
            (float(rho_vals[i]), float(t_vals[j]), bool(oracle[i, j]), bool(search[i, j]))
        )
    false_in = int(np.sum(search & ~oracle & compare))
    return AgreementReport(
        total=n_rho * n_t,
        excluded=int(excluded.sum()),
        compared=int(compare.sum()),
        agreements=int(agree.sum()),
        disagreements=tuple(disagreements),
        false_in=false_in,
    )


# ---------------------------------------------------------------------------
# the implication chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageResult:
    name: str
    status: str  # "pass" | "fail" | "skip" | "error"
    constants: dict
    violations: tuple
    seconds: float
    note: str = ""


@dataclass(frozen=True)
class ChainConfig:
    seed: int = 0
    box_radius: float = 5.0
    convexity_points: int = 200
    convexity_dirs: int = 8
    round_heights: tuple = (1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0)
    round_centers: int = 3
    round_floor: float = 0.1
    slope_r_grid: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    slope_samples: int = 6
    slope_cap: float = 50.0
    slope_growth_cap: float = 10.0
    engulfing_pairs: int = 2000
    engulfing_samples: int = 25
    hn_centers: int = 3
    hn_probes: int = 6
    quasi_triples: int = 12
    n_dirs: int = 360
    budget: hns.Budget = field(default_factory=hns.Budget.default)


@dataclass(frozen=True)
class ChainReport:
    function: str
    stages: tuple[StageResult, ...]
    implications: tuple  # (antecedent, consequent, honored)

    def stage(self, name: str) -> StageResult:
        for st in self.stages:
            if st.name == name:
                return st
        raise KeyError(name)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.stages if s.status == "fail")

    @property
    def all_pass(self) -> bool:
        return all(s.status == "pass" for s in self.stages)


def _est(value) -> dict:
    return {"value": value, "provenance": "est"}


def chain_suite(f: HConvexFn, config: ChainConfig | None = None) -> ChainReport:
    """Run the full pipeline and audit the implication chain.

    Stage order is fixed for report readability: convexity, round sections,
    controlled slope, horizontal engulfing, three-hop engulfing, quasi-metric.
    The three-hop and quasi-metric stages are skipped when round sections
    already failed: without them the theory gives no prediction there, so a
    red stage would not be evidence of anything.  A failed convexity stage
    short-circuits everything downstream.
    """
    cfg = config or ChainConfig()
    stages: list[StageResult] = []

    def run_stage(name, fn, skip_reason=None):
        if skip_reason is not None:
            stages.append(StageResult(name, "skip", {}, (), 0.0, skip_reason))
            return None
        t0 = time.perf_counter()
        try:
            status, constants, violations, note = fn()
        except (ArithmeticError, ValueError) as exc:
            stages.append(
                StageResult(name, "error", {}, (), time.perf_counter() - t0, str(exc))
            )
            return None
        stages.append(
            StageResult(name, status, constants, violations, time.perf_counter() - t0, note)
        )
        return status

    # 1. convexity
    def stage_convexity():
        rep = check_h_convexity(
            f, cfg.convexity_points, cfg.convexity_dirs, cfg.seed, cfg.box_radius
        )
        status = "pass" if rep.ok else "fail"
        return status, {"max_defect": _est(rep.max_defect)}, rep.violations[:20], ""

    convex_ok = run_stage("convexity", stage_convexity) == "pass"

    # 2. round sections
    def stage_round():
        rng = np.random.default_rng(cfg.seed + 1)
        from .core import random_points

        xs, ys, ts = random_points(rng, f.n, cfg.round_centers, cfg.box_radius)
        centers = [HPoint.origin(f.n)] + [
            HPoint(xs[i], ys[i], float(ts[i])) for i in range(cfg.round_centers)
        ]
        worst = math.inf
        table = []
        for xi in centers:
            for s in cfg.round_heights:
                r_in, r_out, ratio = sec.round_constants(f, xi, float(s), cfg.n_dirs)
                worst = min(worst, ratio)
                table.append((s, ratio))
        status = "pass" if worst >= cfg.round_floor else "fail"
        note = "" if status == "pass" else (
            f"min section ratio {worst:.4g} below the desk-scale floor {cfg.round_floor}"
        )
        return status, {"K0_est": _est(worst)}, tuple(table), note

    round_status = "skip"
    if convex_ok:
        round_status = run_stage("round-sections", stage_round)
    else:
        run_stage("round-sections", None, skip_reason="convexity failed")
    round_ok = round_status == "pass"

    # 3. controlled slope
    def stage_slope():
        k1 = sec.slope_constant(
            f, cfg.slope_samples, cfg.slope_r_grid, cfg.seed + 2,
            cfg.box_radius, cfg.n_dirs,
        )
        origin = HPoint.origin(f.n)
        per_r = []
        for r in cfg.slope_r_grid:
            prof = sec.m_M(f, origin, float(r), n_dirs=cfg.n_dirs)
            per_r.append((float(r), prof.M / prof.m))
        ratios = [v for _, v in per_r]
        growth = max(ratios) / min(ratios)
        status = "pass" if (k1 <= cfg.slope_cap and growth <= cfg.slope_growth_cap) else "fail"
        note = "" if status == "pass" else (
            f"K1_est {k1:.4g} (cap {cfg.slope_cap}), growth over r-grid {growth:.4g}"
        )
        return status, {"K1_est": _est(k1)}, tuple(per_r), note

    if convex_ok:
        slope_status = run_stage("slope", stage_slope)
    else:
        run_stage("slope", None, skip_reason="convexity failed")
        slope_status = "skip"
    slope_ok = slope_status == "pass"

    # 4. horizontal engulfing
    kpp_box = {}

    def stage_engulfing():
        kpp = eng.estimate_Kpp(f, cfg.engulfing_pairs, cfg.seed + 3, cfg.box_radius)
        K = eng.derived_K(kpp)
        kpp_box["kpp"], kpp_box["K"] = kpp, K
        dia = eng.check_diamond(
            f, kpp * (1.0 + 1e-6) if kpp > 1 else 1.0 + 1e-6,
            samples=cfg.engulfing_samples * 4, seed=cfg.seed + 4,
            box_radius=cfg.box_radius,
        )
        ehk = eng.check_EHK(
            f, K, samples=cfg.engulfing_samples, seed=cfg.seed + 5,
            box_radius=cfg.box_radius,
        )
        mono = eng.check_h_monotone(f, cfg.engulfing_pairs, cfg.seed + 6, cfg.box_radius)
        bad = dia.violations + ehk.violations
        status = "pass" if (not bad and mono >= -1e-9) else "fail"
        constants = {
            "Kpp_est": _est(kpp),
            "K_derived": _est(K),
            "monotonicity_min": _est(mono),
        }
        return status, constants, tuple(bad[:20]), ""

    if convex_ok:
        eng_status = run_stage("engulfing", stage_engulfing)
    else:
        run_stage("engulfing", None, skip_reason="convexity failed")
        eng_status = "skip"
    eng_ok = eng_status == "pass"

    # 5. three-hop engulfing (needs the round-section prerequisite)
    def stage_hn():
        K_hn = eng.derived_K(kpp_box["kpp"]) ** 2
        oracle = example_oracle if isinstance(f, SqNorm) and f.n == 1 else None
        rep = hns.check_E_HnK(
            f, K_hn, cfg.hn_centers, cfg.hn_probes, cfg.seed + 7,
            min(cfg.box_radius, 3.0), budget=cfg.budget, oracle=oracle,
        )
        status = "pass" if rep.ok else "fail"
        constants = {
            "K_hn": _est(K_hn),
            "inconclusive": {"value": len(rep.inconclusive), "provenance": "est"},
        }
        return status, constants, rep.violations, ""

    if not convex_ok:
        run_stage("hn-engulfing", None, skip_reason="convexity failed")
    elif not round_ok:
        run_stage(
            "hn-engulfing", None,
            skip_reason="round sections failed: no three-hop engulfing prediction",
        )
    elif eng_status != "pass":
        run_stage("hn-engulfing", None, skip_reason="horizontal engulfing failed")
    else:
        run_stage("hn-engulfing", stage_hn)

    # 6. quasi-metric
    def stage_quasi():
        rng = np.random.default_rng(cfg.seed + 8)
        probes = hns.certified_probes(f, HPoint.origin(f.n), 1.0, 3, rng)
        sym_gap = 0.0
        for zeta, _w in probes:
            a = qm.d_phi(f, HPoint.origin(f.n), zeta, budget=cfg.budget)
            b = qm.d_phi(f, zeta, HPoint.origin(f.n), budget=cfg.budget)
            sym_gap = max(sym_gap, abs(a.value - b.value))
        H = qm.quasi_triangle_constant(
            f, cfg.quasi_triples, cfg.seed + 9, budget=cfg.budget
        )
        status = "pass" if (math.isfinite(H) and H > 0 and sym_gap == 0.0) else "fail"
        return status, {"H_est": _est(H), "symmetry_gap": _est(sym_gap)}, (), ""

    if not convex_ok:
        run_stage("quasimetric", None, skip_reason="convexity failed")
    elif not round_ok:
        run_stage(
            "quasimetric", None,
            skip_reason="round sections failed: quasi-metric not predicted",
        )
    else:
        run_stage("quasimetric", stage_quasi)

    by_name = {s.name: s.status for s in stages}
    implications = []
    for ante, cons in (
        ("round-sections", "slope"),
        ("slope", "engulfing"),
        ("engulfing", "hn-engulfing"),
        ("hn-engulfing", "quasimetric"),
    ):
        # an implication is only testable when both sides actually ran
        if by_name.get(ante) == "pass" and by_name.get(cons) in ("pass", "fail"):
            implications.append((ante, cons, by_name.get(cons) == "pass"))
    return ChainReport(f.name, tuple(stages), tuple(implications))
