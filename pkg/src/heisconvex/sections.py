"""H-sections as radial boundaries, slope functionals m/M, and constants.

The H-section of f at xi0 with height s is the open sublevel set, inside the
horizontal plane of xi0, of the recentred function

    excess(q) = f(q) - f(xi0) - p . (Pr1(q) - Pr1(xi0)),     p = grad_H f(xi0).

Along a horizontal ray q = xi0 o exp(rho u) the excess is convex in rho and
vanishes to first order at rho = 0, so for strictly H-convex f the boundary
radius in each direction u is the unique root of excess = s; sections are
represented as direction -> radius tables (star-shaped boundaries).

m(xi, r) and M(xi, r) are the min and max of the excess over the sphere of
Euclidean radius r inside the plane of xi (which is exactly the gauge sphere
of radius r intersected with the plane).  From them the module estimates the
geometry's characteristic constants: the round-section ratio, the slope
constant K1, the doubling constants B1, B2, B4 and the doubling exponent
gamma.  All estimates are extremal statistics of finite samples and are
labelled "est" downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HPoint, HorizontalVector, exp_many, on_horizontal_plane, random_points
from .funcs import HConvexFn

__all__ = [
    "UNBOUNDED",
    "HSectionSpec",
    "RadialBoundary",
    "SlopeProfile",
    "DoublingReport",
    "ConstantsReport",
    "constants_report",
    "NonMonotoneExcessError",
    "UnboundedSectionError",
    "DegenerateSlopeError",
    "excess",
    "excess_values",
    "section_spec",
    "h_section_radius",
    "h_section_radii",
    "h_section_boundary",
    "sphere_directions",
    "m_M",
    "round_constants",
    "slope_constant",
    "doubling_report",
    "verify_m_monotone",
]

UNBOUNDED = math.inf
RADIUS_CAP = 1e9


class NonMonotoneExcessError(ArithmeticError):
    """Excess decreased along a ray: the input is not H-convex there."""


class UnboundedSectionError(ArithmeticError):
    """A section escapes to the bracket cap (affine direction)."""


class DegenerateSlopeError(ArithmeticError):
    """m vanished where a positive minimum slope was required."""


@dataclass(frozen=True)
class HSectionSpec:
    """Center, gradient at the center, and height of an H-section."""

    center: HPoint
    p: HorizontalVector
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"section height must be positive, got {self.s}")


def section_spec(f: HConvexFn, center: HPoint, s: float) -> HSectionSpec:
    return HSectionSpec(center, f.horizontal_gradient(center), s)


@dataclass(frozen=True)
class RadialBoundary:
    """Star-shaped boundary: unit directions (m, 2n) and radii (m,).

    A radius of inf marks a direction in which the excess never reaches the
    height (unbounded section).
    """

    directions: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "directions", np.asarray(self.directions, dtype=float))
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        if self.directions.shape[0] != self.radii.shape[0]:
            raise ValueError("directions and radii must have equal length")
        self.directions.setflags(write=False)
        self.radii.setflags(write=False)

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.radii)))

    @property
    def r_min(self) -> float:
        return float(np.min(self.radii))

    @property
    def r_max(self) -> float:
        return float(np.max(self.radii))


@dataclass(frozen=True)
class SlopeProfile:
    """Extremes of the excess on the radius-r sphere inside the plane of xi."""

    center: HPoint
    r: float
    m: float
    M: float
    argmin_dir: np.ndarray
    argmax_dir: np.ndarray


@dataclass(frozen=True)
class DoublingReport:
    B1_est: float
    B2_est: float
    B4_est: float
    gamma_est: int
    n_samples: int
    r_grid: tuple


@dataclass(frozen=True)
class ConstantsReport:
    """Bundle of the sampled section constants.

    Each entry is an extremal statistic of a finite sample (a lower bound of
    the corresponding supremum, or an upper bound of the infimum for K0_est
    and B4_est); none is claimed exact.
    """

    K0_est: float  # min sampled round-section ratio, in (0, 1]
    K1_est: float  # max sampled M/m
    B1_est: float
    B2_est: float
    B4_est: float
    gamma_est: int
    n_centers: int
    heights: tuple
    r_grid: tuple


# ---------------------------------------------------------------------------
# excess
# ---------------------------------------------------------------------------


def excess_values(f: HConvexFn, center: HPoint, p: HorizontalVector, V: np.ndarray):
    """Excess of f at center o exp(v) for rows v of V (shape (..., 2n))."""
    X, Y, T = exp_many(center, V)
    base = float(f.values(center.x, center.y, np.asarray(center.t)))
    return f.values(X, Y, T) - base - V @ p.as_array()


def excess(
    f: HConvexFn,
    center: HPoint,
    p: HorizontalVector,
    q: HPoint,
    tol: float = 1e-9,
) -> float:
    """f(q) - f(center) - p.(Pr1(q) - Pr1(center)) for q on the plane of center.

    Nonnegative when p is the horizontal gradient of an H-convex f.
    """
    if not on_horizontal_plane(center, q, tol * max(1.0, abs(center.t), abs(q.t))):
        raise ValueError("q does not lie on the horizontal plane of the center")
    v = q.pr1() - center.pr1()
    return float(excess_values(f, center, p, v[None, :])[0])


# ---------------------------------------------------------------------------
# boundary radii
# ---------------------------------------------------------------------------


def sphere_directions(n: int, m: int) -> np.ndarray:
    """m quasi-uniform unit directions in R^{2n}.

    Uniform angular grid for n = 1; a scrambled-free Sobol sequence mapped
    through the Gaussian for n > 1 (deterministic).
    """
    if m < 1:
        raise ValueError("need at least one direction")
    if n == 1:
        theta = np.linspace(0.0, 2.0 * math.pi, m, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    from scipy.special import ndtri
    from scipy.stats import qmc

    sob = qmc.Sobol(d=2 * n, scramble=False)
    k = max(4, int(math.ceil(math.log2(m + 4))))
    u = sob.random_base2(k)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    g = g[norms > 1e-9]  # the 0 and (0.5, ..) points map to the origin
    g = g[:m]
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def h_section_radii(
    f: HConvexFn,
    spec: HSectionSpec,
    dirs: np.ndarray,
    rel_tol: float = 1e-10,
    cap: float = RADIUS_CAP,
) -> np.ndarray:
    """Boundary radius of the section along each unit direction (vectorised).

    Bracket doubling followed by bisection; inf where the bracket exceeds
    ``cap``.  Raises NonMonotoneExcessError if the excess decreases
    materially along a ray, which signals a non-convex input.
    """
    dirs = np.asarray(dirs, dtype=float)
    m = dirs.shape[0]
    s = spec.s

    def vals(radii):
        return np.asarray(excess_values(f, spec.center, spec.p, dirs * radii[:, None]))

    lo = np.zeros(m)
    hi = np.full(m, max(1.0, math.sqrt(s)))
    cur = vals(hi)
    # the tolerance grows with the radius so finite-difference gradient noise
    # (which drifts linearly along the ray) cannot masquerade as concavity
    def neg_tol(radii):
        return 1e-9 * (max(1.0, s) + radii)

    if np.any(cur < -neg_tol(hi)):
        raise NonMonotoneExcessError("negative excess along a ray: input not H-convex")
    active = (cur < s) & (hi <= cap)
    for _ in range(64):
        if not np.any(active):
            break
        lo = np.where(active, hi, lo)
        hi = np.where(active, 2.0 * hi, hi)
        new = vals(hi)
        if np.any(active & (new < cur - neg_tol(hi))):
            raise NonMonotoneExcessError(
                "excess decreased along a ray: input not H-convex"
            )
        cur = np.where(active, new, cur)
        active = active & (cur < s) & (hi <= cap)
    unbounded = cur < s
    # bisection on the monotone excess
    for _ in range(200):
        gap = hi - lo
        done = gap <= rel_tol * np.maximum(hi, 1e-300)
        if bool(np.all(done | unbounded)):
            break
        mid = 0.5 * (lo + hi)
        below = vals(mid) < s
        lo = np.where(~done & ~unbounded & below, mid, lo)
        hi = np.where(~done & ~unbounded & ~below, mid, hi)
    out = 0.5 * (lo + hi)
    out[unbounded] = UNBOUNDED
    return out


def h_section_radius(
    f: HConvexFn,
    spec: HSectionSpec,
    u: HorizontalVector,
    rel_tol: float = 1e-10,
    cap: float = RADIUS_CAP,
) -> float:
    """Boundary radius along one unit direction; inf when unbounded."""
    nu = u.norm
    if not math.isclose(nu, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"direction must be a unit vector, |u| = {nu}")
    return float(h_section_radii(f, spec, u.as_array()[None, :], rel_tol, cap)[0])


def h_section_boundary(
    f: HConvexFn,
    spec: HSectionSpec,
    n_dirs: int = 720,
    rel_tol: float = 1e-10,
    cap: float = RADIUS_CAP,
) -> RadialBoundary:
    if n_dirs < 4:
        raise ValueError("need at least 4 directions")
    dirs = sphere_directions(spec.center.n, n_dirs)
    return RadialBoundary(dirs, h_section_radii(f, spec, dirs, rel_tol, cap))


# ---------------------------------------------------------------------------
# m / M on spheres
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_extremum(fn, lo: float, hi: float, sign: float, iters: int) -> float:
    """Abscissa of the golden-section minimum of sign*fn on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = sign * fn(c), sign * fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = sign * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = sign * fn(d)
    return 0.5 * (a + b)


def m_M(
    f: HConvexFn,
    xi: HPoint,
    r: float,
    n_dirs: int = 720,
    refine_iters: int = 60,
) -> SlopeProfile:
    """Min/max of the excess over {xi o exp(v) : |v| = r}.

    Grid seeding over quasi-uniform directions plus local golden-section
    refinement over angles.  For n = 1 the top three local minima/maxima of
    the circle grid are each refined; for n > 1 refinement rotates the best
    direction towards each coordinate axis.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    p = f.horizontal_gradient(xi)
    n = xi.n
    if n == 1:
        theta = np.linspace(0.0, 2.0 * math.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        vals = np.asarray(excess_values(f, xi, p, dirs * r))

        def circ(th):
            v = np.array([[math.cos(th) * r, math.sin(th) * r]])
            return float(excess_values(f, xi, p, v)[0])

        step = 2.0 * math.pi / n_dirs
        best = [(float(vals[i]), theta[i]) for i in _local_extrema(vals, minimum=True)]
        m_val, m_th = math.inf, 0.0
        for _, th0 in sorted(best)[:3]:
            th = _golden_extremum(circ, th0 - step, th0 + step, +1.0, refine_iters)
            val = circ(th)
            if val < m_val:
                m_val, m_th = val, th
        best = [(-float(vals[i]), theta[i]) for i in _local_extrema(vals, minimum=False)]
        M_val, M_th = -math.inf, 0.0
        for _, th0 in sorted(best)[:3]:
            th = _golden_extremum(circ, th0 - step, th0 + step, -1.0, refine_iters)
            val = circ(th)
            if val > M_val:
                M_val, M_th = val, th
        dmin = np.array([math.cos(m_th), math.sin(m_th)])
        dmax = np.array([math.cos(M_th), math.sin(M_th)])
        return SlopeProfile(xi, r, m_val, M_val, dmin, dmax)

    dirs = sphere_directions(n, max(n_dirs, 2000))
    vals = np.asarray(excess_values(f, xi, p, dirs * r))
    m_dir = _refine_on_sphere(f, xi, p, r, dirs[int(np.argmin(vals))], +1.0, refine_iters)
    M_dir = _refine_on_sphere(f, xi, p, r, dirs[int(np.argmax(vals))], -1.0, refine_iters)
    m_val = float(excess_values(f, xi, p, m_dir[None, :] * r)[0])
    M_val = float(excess_values(f, xi, p, M_dir[None, :] * r)[0])
    return SlopeProfile(xi, r, m_val, M_val, m_dir, M_dir)


def _local_extrema(vals: np.ndarray, minimum: bool) -> np.ndarray:
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    if minimum:
        return np.flatnonzero((vals <= left) & (vals <= right))
    return np.flatnonzero((vals >= left) & (vals >= right))


def _refine_on_sphere(f, xi, p, r, u0, sign, iters) -> np.ndarray:
    """Coordinate-wise angular refinement of sign-minimisation around u0."""
    u = np.array(u0, dtype=float)
    dim = u.shape[0]
    span = math.pi / 16.0
    for _ in range(3):
        for k in range(dim):
            w = np.zeros(dim)
            w[k] = 1.0
            w -= (w @ u) * u
            nw = np.linalg.norm(w)
            if nw < 1e-12:
                continue
            w /= nw

            def on_angle(phi, u=u, w=w):
                d = math.cos(phi) * u + math.sin(phi) * w
                return float(excess_values(f, xi, p, d[None, :] * r)[0])

            phi = _golden_extremum(on_angle, -span, span, sign, iters)
            u = math.cos(phi) * u + math.sin(phi) * w
            u /= np.linalg.norm(u)
        span /= 4.0
    return u


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def round_constants(
    f: HConvexFn, xi: HPoint, s: float, n_dirs: int = 720
) -> tuple[float, float, float]:
    """(R_in, R_out, ratio) of the section at (xi, s).

    R_out is the largest boundary radius, R_in the smallest; any K0 up to
    ratio = R_in / R_out makes the round-section sandwich hold for this
    particular section.
    """
    boundary = h_section_boundary(f, section_spec(f, xi, s), n_dirs)
    if not boundary.bounded:
        raise UnboundedSectionError(f"section at height {s} is unbounded")
    r_in, r_out = boundary.r_min, boundary.r_max
    return r_in, r_out, r_in / r_out


def slope_constant(
    f: HConvexFn,
    n_samples: int = 20,
    r_grid=(0.25, 0.5, 1.0, 2.0, 4.0),
    seed: int = 0,
    box_radius: float = 10.0,
    n_dirs: int = 720,
    min_m: float = 1e-14,
) -> float:
    """K1 estimate: max over samples of M(xi, r) / m(xi, r)."""
    rng = np.random.default_rng(seed)
    xs, ys, ts = random_points(rng, f.n, n_samples, box_radius)
    worst = 0.0
    for i in range(n_samples):
        xi = HPoint(xs[i], ys[i], ts[i])
        for r in r_grid:
            prof = m_M(f, xi, float(r), n_dirs=n_dirs)
            if prof.m <= min_m * max(1.0, abs(prof.M)):
                raise DegenerateSlopeError(
                    f"m(xi, {r}) = {prof.m} at {xi}: affine direction"
                )
            worst = max(worst, prof.M / prof.m)
    return worst


def doubling_report(
    f: HConvexFn,
    n_samples: int = 10,
    r_grid=(0.25, 0.5, 1.0, 2.0),
    seed: int = 0,
    box_radius: float = 5.0,
    n_dirs: int = 720,
    gamma_cap: int = 16,
    tol: float = 1e-9,
) -> DoublingReport:
    """Sampled doubling constants of m and M and the doubling exponent.

    B1 = max M(2r)/M(r), B2 = max m(2r)/m(r), B4 = min m(2r)/m(r); gamma is
    the least integer >= 1 with M(xi, r) <= m(xi, 2^gamma r) across the
    sample.
    """
    rng = np.random.default_rng(seed)
    xs, ys, ts = random_points(rng, f.n, n_samples, box_radius)
    b1, b2 = 0.0, 0.0
    b4 = math.inf
    profiles: list[tuple[HPoint, float, float]] = []  # (xi, r, M(xi, r))
    m_cache: dict[tuple[int, float], float] = {}

    def m_at(i: int, xi: HPoint, r: float) -> float:
        key = (i, r)
        if key not in m_cache:
            m_cache[key] = m_M(f, xi, r, n_dirs=n_dirs).m
        return m_cache[key]

    for i in range(n_samples):
        xi = HPoint(xs[i], ys[i], ts[i])
        for r in r_grid:
            p1 = m_M(f, xi, float(r), n_dirs=n_dirs)
            p2 = m_M(f, xi, 2.0 * float(r), n_dirs=n_dirs)
            m_cache[(i, float(r))] = p1.m
            m_cache[(i, 2.0 * float(r))] = p2.m
            if p1.m <= 0.0 or p1.M <= 0.0:
                raise DegenerateSlopeError(f"zero slope at {xi}, r={r}")
            b1 = max(b1, p2.M / p1.M)
            b2 = max(b2, p2.m / p1.m)
            b4 = min(b4, p2.m / p1.m)
            profiles.append((xi, float(r), p1.M))

    gamma = None
    for g in range(1, gamma_cap + 1):
        ok = True
        for idx, (xi, r, M_r) in enumerate(profiles):
            i = idx // len(r_grid)
            m_big = m_at(i, xi, (2.0**g) * r)
            if M_r > m_big * (1.0 + tol):
                ok = False
                break
        if ok:
            gamma = g
            break
    if gamma is None:
        raise ArithmeticError(f"no doubling exponent up to {gamma_cap}")
    return DoublingReport(b1, b2, b4, gamma, n_samples, tuple(r_grid))


def constants_report(
    f: HConvexFn,
    n_centers: int = 5,
    heights=(0.1, 1.0, 10.0),
    r_grid=(0.25, 0.5, 1.0, 2.0),
    seed: int = 0,
    box_radius: float = 5.0,
    n_dirs: int = 360,
) -> ConstantsReport:
    """One-stop sampled estimate of K0, K1, and the doubling constants."""
    rng = np.random.default_rng(seed)
    xs, ys, ts = random_points(rng, f.n, n_centers, box_radius)
    k0 = math.inf
    for i in range(n_centers):
        xi = HPoint(xs[i], ys[i], float(ts[i]))
        for s in heights:
            k0 = min(k0, round_constants(f, xi, float(s), n_dirs)[2])
    k1 = slope_constant(f, n_centers, r_grid, seed + 1, box_radius, n_dirs)
    dbl = doubling_report(f, max(n_centers // 2, 2), r_grid[:2], seed + 2,
                          box_radius, n_dirs)
    return ConstantsReport(
        k0, k1, dbl.B1_est, dbl.B2_est, dbl.B4_est, dbl.gamma_est,
        n_centers, tuple(heights), tuple(r_grid),
    )


def verify_m_monotone(
    f: HConvexFn, xi: HPoint, r_grid, tol: float = 1e-12, n_dirs: int = 720
) -> tuple[bool, list]:
    """Check that r -> m(xi, r) is strictly increasing on the grid."""
    rs = sorted(float(r) for r in r_grid)
    ms = [m_M(f, xi, r, n_dirs=n_dirs).m for r in rs]
    defects = [
        (rs[i], rs[i + 1], ms[i], ms[i + 1])
        for i in range(len(rs) - 1)
        if not ms[i + 1] > ms[i] + tol * max(1.0, abs(ms[i]))
    ]
    return len(defects) == 0, defects
