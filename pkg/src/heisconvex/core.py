"""Heisenberg group arithmetic and horizontal-plane geometry.

The group H^n is R^n x R^n x R in exponential coordinates, with product

    (x, y, t) o (x', y', t') = (x + x', y + y', t + t' + 2(x'.y - x.y')),

anisotropic dilations delta_lam(x, y, t) = (lam x, lam y, lam^2 t), and the
gauge norm N(x, y, t) = ((|x|^2 + |y|^2)^2 + t^2)^(1/4).  The horizontal
plane through xi0 = (x0, y0, t0) is

    H_{xi0} = { (x, y, t) : t = t0 + 2(y0.x - x0.y) },

the plane spanned at xi0 by the horizontal vector fields
X_j = d/dx_j + 2 y_j d/dt and Y_j = d/dy_j - 2 x_j d/dt.  Every point can be
written as a product of at most three horizontal exponentials; this module
computes such three-segment decompositions and the associated "tilde" balls
(all points reachable by three hops of bounded Euclidean norm).

All values are immutable and all operations pure, so everything here is safe
to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "HPoint",
    "HorizontalVector",
    "PlaneTrace",
    "Decomposition3",
    "DimensionMismatchError",
    "group_mul",
    "group_inv",
    "dilate",
    "gauge_norm",
    "gauge_dist",
    "exp_horizontal",
    "on_horizontal_plane",
    "plane_trace",
    "decompose3",
    "decomposition_candidates",
    "recompose3",
    "tilde_ball_contains",
    "closed_form_t_bound",
    "random_points",
    "random_gauge_ball_points",
    "empirical_decomposition_constant",
]

DEFAULT_TOL = 1e-9

Strategy = Literal["coordinate", "minmax"]


class DimensionMismatchError(ValueError):
    """Operands live in Heisenberg groups of different dimension n."""


def _as_vec(v, name: str) -> np.ndarray:
    # copy: the frozen wrappers must not alias (or freeze) caller buffers
    arr = np.array(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d real vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point xi = (x, y, t) of H^n with n-vectors x, y and scalar t."""

    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vec(self.x, "x"))
        object.__setattr__(self, "y", _as_vec(self.y, "y"))
        object.__setattr__(self, "t", float(self.t))
        if self.x.shape != self.y.shape:
            raise DimensionMismatchError(
                f"x and y must have equal length, got {self.x.shape} vs {self.y.shape}"
            )
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @staticmethod
    def origin(n: int = 1) -> "HPoint":
        return HPoint(np.zeros(n), np.zeros(n), 0.0)

    @staticmethod
    def of(*coords: float) -> "HPoint":
        """Build from flat coordinates (x_1..x_n, y_1..y_n, t)."""
        vals = [float(c) for c in coords]
        if len(vals) < 3 or len(vals) % 2 == 0:
            raise ValueError("need 2n+1 coordinates")
        n = (len(vals) - 1) // 2
        return HPoint(np.array(vals[:n]), np.array(vals[n : 2 * n]), vals[-1])

    def pr1(self) -> np.ndarray:
        """Projection onto the first layer: (x, y) as a 2n-vector."""
        return np.concatenate([self.x, self.y])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.t]])

    def allclose(self, other: "HPoint", tol: float = 1e-12) -> bool:
        return gauge_dist(self, other) <= tol

    def __repr__(self) -> str:
        return f"HPoint(x={self.x.tolist()}, y={self.y.tolist()}, t={self.t})"


@dataclass(frozen=True, eq=False)
class HorizontalVector:
    """A horizontal direction v = (a, b) in V_1, identified with R^{2n}."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_vec(self.a, "a"))
        object.__setattr__(self, "b", _as_vec(self.b, "b"))
        if self.a.shape != self.b.shape:
            raise DimensionMismatchError("a and b must have equal length")
        self.a.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def norm(self) -> float:
        return float(math.hypot(np.linalg.norm(self.a), np.linalg.norm(self.b)))

    @staticmethod
    def zero(n: int = 1) -> "HorizontalVector":
        return HorizontalVector(np.zeros(n), np.zeros(n))

    @staticmethod
    def from_array(v) -> "HorizontalVector":
        arr = _as_vec(v, "v")
        if arr.shape[0] % 2 != 0:
            raise ValueError("horizontal vector needs an even number of components")
        n = arr.shape[0] // 2
        return HorizontalVector(arr[:n], arr[n:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    def scaled(self, c: float) -> "HorizontalVector":
        return HorizontalVector(c * self.a, c * self.b)

    def __repr__(self) -> str:
        return f"HorizontalVector(a={self.a.tolist()}, b={self.b.tolist()})"


@dataclass(frozen=True)
class PlaneTrace:
    """Pullback of H_{base} \\cap H_{other} to the v-coordinates of H_{base}.

    Represents the solution set {v in R^{2n} : normal.v = offset}, i.e. the
    horizontal vectors v such that ``other`` lies on the horizontal plane of
    base o exp(v).  ``kind`` is "identical" when the equation degenerates to
    0 = 0, "empty" when it degenerates to 0 = c with c != 0; otherwise
    "proper".  For n = 1 a proper trace is a line in the plane of ``base``.
    """

    base: HPoint
    normal: HorizontalVector
    offset: float
    kind: Literal["proper", "identical", "empty"]


@dataclass(frozen=True)
class Decomposition3:
    """Three horizontal hops whose exponentials compose to a target point."""

    v1: HorizontalVector
    v2: HorizontalVector
    v3: HorizontalVector
    max_norm: float

    def hops(self) -> tuple[HorizontalVector, HorizontalVector, HorizontalVector]:
        return (self.v1, self.v2, self.v3)


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------


def _check_same_n(p: HPoint, q: HPoint) -> None:
    if p.n != q.n:
        raise DimensionMismatchError(f"dimension mismatch: n={p.n} vs n={q.n}")


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    """Group product p o q."""
    _check_same_n(p, q)
    t = p.t + q.t + 2.0 * (float(q.x @ p.y) - float(p.x @ q.y))
    return HPoint(p.x + q.x, p.y + q.y, t)


def group_inv(p: HPoint) -> HPoint:
    """Group inverse; group_mul(p, group_inv(p)) is the neutral element."""
    return HPoint(-p.x, -p.y, -p.t)


def dilate(lam: float, p: HPoint) -> HPoint:
    """Anisotropic dilation delta_lam(x, y, t) = (lam x, lam y, lam^2 t)."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return HPoint(lam * p.x, lam * p.y, lam * lam * p.t)


def gauge_norm(p: HPoint) -> float:
    """Gauge norm ((|x|^2 + |y|^2)^2 + t^2)^(1/4)."""
    h2 = float(p.x @ p.x + p.y @ p.y)
    return (h2 * h2 + p.t * p.t) ** 0.25


def gauge_dist(p: HPoint, q: HPoint) -> float:
    """Koranyi-Cygan metric d_g(p, q) = N(q^{-1} o p); a genuine metric."""
    _check_same_n(p, q)
    dx = p.x - q.x
    dy = p.y - q.y
    dt = p.t - q.t - 2.0 * (float(p.x @ q.y) - float(q.x @ p.y))
    h2 = float(dx @ dx + dy @ dy)
    return (h2 * h2 + dt * dt) ** 0.25


def exp_horizontal(p: HPoint, v: HorizontalVector) -> HPoint:
    """p o exp(v) for horizontal v = (a, b); the result lies on H_p."""
    if p.n != v.n:
        raise DimensionMismatchError(f"dimension mismatch: n={p.n} vs n={v.n}")
    t = p.t + 2.0 * (float(v.a @ p.y) - float(p.x @ v.b))
    return HPoint(p.x + v.a, p.y + v.b, t)


def plane_height(p0: HPoint, x: np.ndarray, y: np.ndarray):
    """t-value of the plane H_{p0} above the first-layer point (x, y)."""
    return p0.t + 2.0 * (x @ p0.y - p0.x @ y)


def on_horizontal_plane(p0: HPoint, p: HPoint, tol: float = DEFAULT_TOL) -> bool:
    """Whether p lies on H_{p0} up to |t|-residual tol; symmetric in (p0, p)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _check_same_n(p0, p)
    return abs(p.t - plane_height(p0, p.x, p.y)) <= tol


def plane_trace(p0: HPoint, p1: HPoint, tol: float = 1e-12) -> PlaneTrace:
    """Linear trace of the plane pair (H_{p0}, H_{p1}) in H_{p0} coordinates.

    Writing candidate points as zeta = p0 o exp(v), the condition
    p1 in H_zeta (equivalently zeta in H_{p1}) is the single linear equation
    normal.v = offset returned here.  A proper trace is a line exactly when
    n = 1; for n > 1 the solution set is a (2n-1)-dimensional hyperplane of
    H_{p0}, and callers that need a curve must slice it themselves.
    """
    _check_same_n(p0, p1)
    normal = np.concatenate([2.0 * (p0.y - p1.y), 2.0 * (p1.x - p0.x)])
    offset = p1.t - p0.t - 2.0 * (float(p0.y @ p1.x) - float(p0.x @ p1.y))
    scale = max(
        1.0,
        float(np.max(np.abs(p0.pr1()), initial=0.0)),
        float(np.max(np.abs(p1.pr1()), initial=0.0)),
    )
    kind: Literal["proper", "identical", "empty"]
    if float(np.linalg.norm(normal)) <= tol * scale:
        kind = "identical" if abs(offset) <= tol * scale * scale else "empty"
    else:
        kind = "proper"
    return PlaneTrace(p0, HorizontalVector.from_array(normal), offset, kind)


# ---------------------------------------------------------------------------
# batch helpers (arrays of points); used by the search modules
# ---------------------------------------------------------------------------


def exp_many(p0: HPoint, V: np.ndarray):
    """Vectorised p0 o exp(v) over rows of V (shape (..., 2n)).

    Returns coordinate arrays (X, Y, T) with X, Y of shape (..., n).
    """
    n = p0.n
    a, b = V[..., :n], V[..., n:]
    X = p0.x + a
    Y = p0.y + b
    T = p0.t + 2.0 * (a @ p0.y - b @ p0.x)
    return X, Y, T


def exp_from_many(X: np.ndarray, Y: np.ndarray, T: np.ndarray, V: np.ndarray):
    """Vectorised p o exp(v) where the base points themselves are arrays."""
    n = X.shape[-1]
    a, b = V[..., :n], V[..., n:]
    T2 = T + 2.0 * (np.sum(a * Y, axis=-1) - np.sum(X * b, axis=-1))
    return X + a, Y + b, T2


def trace_many(X1, Y1, T1, target: HPoint):
    """Vectorised plane_trace of array base points against one target.

    Returns (normals, offsets); rows with ~zero normal are degenerate.
    """
    normals = np.concatenate([2.0 * (Y1 - target.y), 2.0 * (target.x - X1)], axis=-1)
    offsets = target.t - T1 - 2.0 * (Y1 @ target.x - X1 @ target.y)
    return normals, offsets


# ---------------------------------------------------------------------------
# three-segment decomposition
# ---------------------------------------------------------------------------


def recompose3(v1: HorizontalVector, v2: HorizontalVector, v3: HorizontalVector) -> HPoint:
    """exp(v1) o exp(v2) o exp(v3)."""
    e = HPoint.origin(v1.n)
    return exp_horizontal(exp_horizontal(exp_horizontal(e, v1), v2), v3)


def _complex_parts(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x + 1j * y


def _hops_from_complex(ws, u: np.ndarray, n: int) -> list[HorizontalVector]:
    """Lift complex scalar hops w_i along the complex unit direction u."""
    out = []
    for w in ws:
        z = w * u
        out.append(HorizontalVector(np.real(z), np.imag(z)))
    return out


def _decomposition(hops: list[HorizontalVector]) -> Decomposition3:
    mn = max(h.norm for h in hops)
    return Decomposition3(hops[0], hops[1], hops[2], mn)


def _equal_angle_hops(rho: float, t: float, u: np.ndarray, n: int) -> list[HorizontalVector] | None:
    """Three equal-norm hops at equal consecutive angles reaching (rho*u, t).

    The planar triple v_k = r_h * (cos((k-1)th), sin((k-1)th)) has endpoint
    norm r_h (1 + 2 cos th) and vertical displacement -4 r_h^2 sin th (1+cos th);
    solving the pair (rho, t) pins (r_h, th) and the whole triple is then
    rotated onto the target direction.  Degenerate cases: t ~ 0 gives three
    collinear thirds, rho ~ 0 the equilateral configuration.
    """
    scale = max(rho, math.sqrt(abs(t)), 1.0)
    if abs(t) <= 1e-30 * scale * scale:
        if rho == 0.0:
            return [HorizontalVector.zero(n)] * 3
        w = rho / 3.0
        return _hops_from_complex([w, w, w], u, n)
    sign = 1.0 if t > 0 else -1.0
    if rho <= 1e-30 * scale:
        r_h = math.sqrt(abs(t) / math.sqrt(3.0))
        th = -2.0 * math.pi / 3.0 * sign
        ws = [r_h * complex(math.cos(k * th), math.sin(k * th)) for k in range(3)]
        return _hops_from_complex(ws, u, n)

    def t_reach(r_h: float) -> float:
        # vertical reach of the equal-angle family at hop radius r_h
        c = (rho / r_h - 1.0) / 2.0
        c = min(1.0, max(-0.5, c))
        return 4.0 * r_h * r_h * math.sqrt(1.0 - c * c) * (1.0 + c)

    lo = rho / 3.0
    hi = max(rho, math.sqrt(abs(t)))
    for _ in range(200):
        if t_reach(hi) >= abs(t):
            break
        hi *= 2.0
    else:
        return None
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if t_reach(mid) < abs(t):
            lo = mid
        else:
            hi = mid
    r_h = hi
    c = min(1.0, max(-0.5, (rho / r_h - 1.0) / 2.0))
    th = -sign * math.acos(c)
    # canonical endpoint direction is angle th; rotate it onto the real axis
    rot = complex(math.cos(th), math.sin(th)).conjugate()
    ws = [r_h * complex(math.cos(k * th), math.sin(k * th)) * rot for k in range(3)]
    return _hops_from_complex(ws, u, n)


def _coordinate_hops(target: HPoint, alpha: float) -> list[HorizontalVector]:
    """The closed hop family v1 = a e_{x1}, v2 = b e_{y1}, v3 = remainder.

    The pair (a, b) = (x1 - alpha, c/(2 alpha) - y1) with c = t + 2 x1 y1
    solves t = 2 b x1 - 2 a y1 - 2 a b for every alpha != 0.
    """
    n = target.n
    x1, y1 = float(target.x[0]), float(target.y[0])
    c = target.t + 2.0 * x1 * y1
    a = x1 - alpha
    b = c / (2.0 * alpha) - y1
    v1 = np.zeros(2 * n)
    v1[0] = a
    v2 = np.zeros(2 * n)
    v2[n] = b
    rest = np.concatenate([target.x, target.y]) - v1 - v2
    return [
        HorizontalVector.from_array(v1),
        HorizontalVector.from_array(v2),
        HorizontalVector.from_array(rest),
    ]


def _coordinate_objective(target: HPoint, alphas: np.ndarray) -> np.ndarray:
    x1, y1 = float(target.x[0]), float(target.y[0])
    c = target.t + 2.0 * x1 * y1
    a = x1 - alphas
    b = c / (2.0 * alphas) - y1
    # |v3|^2 = |(x,y)|^2 - 2 a x1 - 2 b y1 + a^2 + b^2 (only the first pair is hit)
    xy2 = float(target.x @ target.x + target.y @ target.y)
    v3 = np.sqrt(np.maximum(xy2 - 2 * a * x1 - 2 * b * y1 + a * a + b * b, 0.0))
    return np.maximum(np.maximum(np.abs(a), np.abs(b)), v3)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn, lo: float, hi: float, iters: int = 200, rel: float = 1e-12) -> float:
    """Golden-section minimiser of a scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if abs(b - a) <= rel * (abs(a) + abs(b) + 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _minmax_alpha_search(target: HPoint) -> list[HorizontalVector]:
    scale = max(
        float(np.linalg.norm(target.pr1())), math.sqrt(abs(target.t)), 1e-12
    )
    best_alpha, best_val = None, math.inf
    for sgn in (1.0, -1.0):
        grid = sgn * scale * np.logspace(-4, 4, 160)
        vals = _coordinate_objective(target, grid)
        i = int(np.argmin(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        if lo > hi:
            lo, hi = hi, lo
        alpha = _golden_min(
            lambda a: float(_coordinate_objective(target, np.array([a]))[0]), lo, hi
        )
        val = float(_coordinate_objective(target, np.array([alpha]))[0])
        if val < best_val:
            best_alpha, best_val = alpha, val
    return _coordinate_hops(target, best_alpha)


def decomposition_candidates(target: HPoint) -> list[list[HorizontalVector]]:
    """Candidate hop triples recomposing to ``target``, cheapest first.

    Includes the canonical coordinate-family member, its min-max free
    parameter search, and the equal-angle family (equilateral on the t-axis,
    collinear thirds for horizontal targets).  Every candidate recomposes to
    the target at floating-point accuracy.
    """
    n = target.n
    rho = float(np.linalg.norm(target.pr1()))
    scale = max(rho, math.sqrt(abs(target.t)))
    if scale == 0.0:
        z = HorizontalVector.zero(n)
        return [[z, z, z]]
    if abs(target.t) <= 1e-30 * scale * scale:
        # horizontal target: collinear hops commute, so thirds stay exact
        full = HorizontalVector(target.x.copy(), target.y.copy())
        zero = HorizontalVector.zero(n)
        third = full.scaled(1.0 / 3.0)
        return [[third, third, third], [full, zero, zero]]

    out = [_coordinate_hops(target, _alpha_canonical(target)), _minmax_alpha_search(target)]
    if rho > 0.0:
        u = _complex_parts(target.x, target.y) / rho
    else:
        u = np.zeros(n, dtype=complex)
        u[0] = 1.0
    ea = _equal_angle_hops(rho, target.t, u, n)
    if ea is not None:
        out.append(ea)
    return out


def _alpha_canonical(target: HPoint) -> float:
    x1, y1 = float(target.x[0]), float(target.y[0])
    c = target.t + 2.0 * x1 * y1
    return math.sqrt(abs(c) / 2.0) if c != 0.0 else max(abs(x1), 1.0)


def decompose3(target: HPoint, strategy: Strategy = "coordinate") -> Decomposition3:
    """Write ``target`` as exp(v1) o exp(v2) o exp(v3).

    ``coordinate`` picks a canonical member of the closed coordinate family;
    ``minmax`` additionally searches the family's free parameter (and the
    equal-angle candidates) to approximately minimise max |v_i|.  The
    recomposition is algebraically exact for every strategy; in floats the
    residual sits in the t-coordinate at machine precision.
    """
    n = target.n
    rho = float(np.linalg.norm(target.pr1()))
    scale = max(rho, math.sqrt(abs(target.t)))
    if scale == 0.0:
        z = HorizontalVector.zero(n)
        return Decomposition3(z, z, z, 0.0)
    if abs(target.t) <= 1e-30 * scale * scale:
        full = HorizontalVector(target.x.copy(), target.y.copy())
        zero = HorizontalVector.zero(n)
        if strategy == "coordinate":
            return _decomposition([full, zero, zero])
        return _decomposition([full.scaled(1.0 / 3.0)] * 3)
    if strategy == "coordinate":
        return _decomposition(_coordinate_hops(target, _alpha_canonical(target)))
    candidates = decomposition_candidates(target)
    best = min(candidates, key=lambda hops: max(h.norm for h in hops))
    return _decomposition(best)


# ---------------------------------------------------------------------------
# tilde balls
# ---------------------------------------------------------------------------


def closed_form_t_bound(r: float, rho: float) -> float:
    """Max |t| over the n=1 tilde ball of hop radius r at horizontal distance rho.

    Valid for 0 <= rho <= 3r; the boundary profile is
    sqrt(3 r^2 + 2 rho r - rho^2) (r + rho).
    """
    if r <= 0:
        raise ValueError("hop radius must be positive")
    if rho < -1e-15 * r or rho > 3.0 * r * (1.0 + 1e-15):
        raise ValueError(f"rho={rho} outside [0, 3r] with r={r}")
    rho = min(max(rho, 0.0), 3.0 * r)
    # 3r^2 + 2 rho r - rho^2 factored as (3r - rho)(r + rho): no cancellation
    # blow-up under the square root as rho -> 3r
    disc = max((3.0 * r - rho) * (r + rho), 0.0)
    return math.sqrt(disc) * (r + rho)


def tilde_ball_contains(
    center: HPoint,
    r: float,
    p: HPoint,
    method: Literal["auto", "closed_form", "search"] = "auto",
    tol: float = DEFAULT_TOL,
) -> bool:
    """Whether p is within three horizontal hops of norm <= r from center.

    Closed-ball semantics.  For n = 1 the default route is the closed-form
    boundary profile; the search route (any n) certifies membership through a
    min-max three-segment decomposition, so a True from it is a certificate
    while False only means "not found at this resolution".
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    _check_same_n(center, p)
    zeta = group_mul(group_inv(center), p)
    use_closed = method == "closed_form" or (method == "auto" and center.n == 1)
    if use_closed:
        if center.n != 1:
            raise ValueError("closed-form membership is only available for n=1")
        rho = float(np.linalg.norm(zeta.pr1()))
        if rho > 3.0 * r + tol * 3.0 * r:
            return False
        bound = closed_form_t_bound(r, min(rho, 3.0 * r))
        return abs(zeta.t) <= bound + tol * max(1.0, (r + rho) ** 2)
    dec = decompose3(zeta, strategy="minmax")
    return dec.max_norm <= r * (1.0 + tol)


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------


def random_points(rng: np.random.Generator, n: int, count: int, radius: float):
    """Coordinate arrays of ``count`` points spread over B_g(e, radius).

    Gauge-sphere directions with radii uniform in gauge scale, so samples are
    not concentrated near the boundary.
    """
    x = rng.standard_normal((count, n))
    y = rng.standard_normal((count, n))
    t = rng.standard_normal(count)
    h2 = np.sum(x * x, axis=1) + np.sum(y * y, axis=1)
    norms = (h2 * h2 + t * t) ** 0.25
    norms = np.where(norms == 0.0, 1.0, norms)
    lam = radius * rng.uniform(0.0, 1.0, count) / norms
    return x * lam[:, None], y * lam[:, None], t * lam * lam


def random_gauge_ball_points(
    rng: np.random.Generator, n: int, count: int, radius: float
) -> list[HPoint]:
    x, y, t = random_points(rng, n, count, radius)
    return [HPoint(x[i], y[i], t[i]) for i in range(count)]


def empirical_decomposition_constant(
    n: int = 1, samples: int = 2000, radius: float = 10.0, seed: int = 0
) -> float:
    """Sampled three-segment constant: max of (minmax hop norm) / gauge norm."""
    rng = np.random.default_rng(seed)
    x, y, t = random_points(rng, n, samples, radius)
    worst = 0.0
    for i in range(samples):
        p = HPoint(x[i], y[i], t[i])
        g = gauge_norm(p)
        if g < 1e-9:
            continue
        dec = decompose3(p, strategy="minmax")
        worst = max(worst, dec.max_norm / g)
    return worst
