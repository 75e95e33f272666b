"""H-convex function layer: built-ins, parsed expressions, and gradients.

An ``HConvexFn`` is an evaluatable function on H^n together with its
horizontal gradient

    grad_H f = (X_1 f, ..., X_n f, Y_1 f, ..., Y_n f),
    X_j = d/dx_j + 2 y_j d/dt,      Y_j = d/dy_j - 2 x_j d/dt.

Built-ins carry analytic gradients; parsed expressions (and any built-in in
``gradient_mode="fd"``) use central finite differences of
alpha -> f(p o exp(alpha e_j)), i.e. differences taken *along the horizontal
exponential*, which is what makes them horizontal derivatives.

Functions are treated as single-gradient (H-differentiable): no set-valued
subdifferential enumeration.  Instances are immutable and evaluation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import exprparse
from .core import HPoint, HorizontalVector, exp_from_many, exp_many, random_points
from .exprparse import EvalDomainError, Expr, parse_expr

__all__ = [
    "HConvexFn",
    "ConvexityReport",
    "SqNorm",
    "SqNormT",
    "Quadratic",
    "Wang",
    "ParsedFn",
    "make_function",
    "parse_expr",
    "check_h_convexity",
    "BUILTIN_NAMES",
]

DEFAULT_FD_STEP = 1e-5


class HConvexFn:
    """Base class: a function on H^n with a horizontal gradient.

    Subclasses implement ``values(x, y, t)`` for broadcastable coordinate
    arrays (x, y of shape (..., n), t of shape (...)), and optionally
    ``gradients`` for the analytic horizontal gradient of shape (..., 2n).
    """

    n: int
    name: str
    gradient_mode: str  # "analytic" | "fd"
    fd_step: float

    def __init__(self, n: int, name: str, gradient_mode: str = "analytic",
                 fd_step: float = DEFAULT_FD_STEP):
        if n < 1:
            raise ValueError("n must be >= 1")
        if fd_step <= 0:
            raise ValueError("finite-difference step must be positive")
        if gradient_mode not in ("analytic", "fd"):
            raise ValueError(f"unknown gradient mode {gradient_mode!r}")
        self.n = n
        self.name = name
        self.gradient_mode = gradient_mode
        self.fd_step = fd_step

    # -- evaluation ---------------------------------------------------------

    def values(self, x, y, t):
        raise NotImplementedError

    def __call__(self, p: HPoint) -> float:
        self._check_point(p)
        val = float(self.values(p.x, p.y, np.asarray(p.t)))
        if not math.isfinite(val):
            raise EvalDomainError(f"{self.name} is not finite at {p}")
        return val

    def _check_point(self, p: HPoint) -> None:
        if p.n != self.n:
            raise ValueError(
                f"dimension mismatch: function has n={self.n}, point has n={p.n}"
            )

    # -- gradients ----------------------------------------------------------

    def gradients(self, x, y, t):
        """Horizontal gradient, shape (..., 2n); default: finite differences."""
        return self._fd_gradients(x, y, t)

    def _fd_gradients(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        h = self.fd_step
        out = np.empty(x.shape[:-1] + (2 * self.n,))
        for j in range(self.n):
            # step along X_j: (x_j +- h, y, t +- 2 h y_j)
            dx = np.zeros(self.n)
            dx[j] = h
            tp = t + 2.0 * h * y[..., j]
            tm = t - 2.0 * h * y[..., j]
            out[..., j] = (self.values(x + dx, y, tp) - self.values(x - dx, y, tm)) / (2 * h)
            # step along Y_j: (x, y_j +- h, t -+ 2 h x_j)
            tp = t - 2.0 * h * x[..., j]
            tm = t + 2.0 * h * x[..., j]
            out[..., self.n + j] = (
                self.values(x, y + dx, tp) - self.values(x, y - dx, tm)
            ) / (2 * h)
        return out

    def horizontal_gradient(self, p: HPoint) -> HorizontalVector:
        self._check_point(p)
        if self.gradient_mode == "analytic":
            g = self.gradients(p.x, p.y, np.asarray(p.t))
        else:
            g = self._fd_gradients(p.x, p.y, np.asarray(p.t))
        g = np.asarray(g, dtype=float).reshape(2 * self.n)
        if not np.all(np.isfinite(g)):
            raise EvalDomainError(f"horizontal gradient of {self.name} not finite at {p}")
        return HorizontalVector(g[: self.n], g[self.n :])

    def grad_many(self, x, y, t):
        """Batch horizontal gradients honouring the gradient mode."""
        if self.gradient_mode == "analytic":
            return self.gradients(x, y, t)
        return self._fd_gradients(x, y, t)

    # -- restrictions -------------------------------------------------------

    def restrict_to_line(self, p: HPoint, v: HorizontalVector) -> Callable:
        """The one-dimensional function alpha -> f(p o exp(alpha v)).

        Convex whenever f is H-convex; accepts scalars or arrays of alpha.
        """
        self._check_point(p)
        if v.norm == 0.0:
            raise ValueError("direction must be nonzero")
        va = v.as_array()

        def line(alpha):
            alpha = np.asarray(alpha, dtype=float)
            V = alpha[..., None] * va
            X, Y, T = exp_many(p, V)
            out = self.values(X, Y, T)
            return float(out) if out.ndim == 0 else out

        return line

    def spec(self) -> dict:
        """JSON-serialisable description (the CLI config format)."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} n={self.n}>"


class SqNorm(HConvexFn):
    """|x|^2 + |y|^2 — the archetypal H-convex function."""

    def __init__(self, n: int = 1, gradient_mode: str = "analytic"):
        super().__init__(n, "sqnorm", gradient_mode)

    def values(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)

    def gradients(self, x, y, t):
        return 2.0 * np.concatenate(
            [np.asarray(x, dtype=float), np.asarray(y, dtype=float)], axis=-1
        )

    def spec(self) -> dict:
        return {"builtin": "sqnorm", "n": self.n}


class SqNormT(HConvexFn):
    """|x|^2 + |y|^2 + t^2; convex in R^{2n+1}, hence H-convex."""

    def __init__(self, n: int = 1, gradient_mode: str = "analytic"):
        super().__init__(n, "sqnorm_t", gradient_mode)

    def values(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1) + t * t

    def gradients(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)[..., None]
        return np.concatenate([2.0 * x + 4.0 * y * t, 2.0 * y - 4.0 * x * t], axis=-1)

    def spec(self) -> dict:
        return {"builtin": "sqnorm_t", "n": self.n}


class Quadratic(HConvexFn):
    """z . A z on the first layer z = (x, y), A positive semidefinite."""

    def __init__(self, A, n: int | None = None, gradient_mode: str = "analytic"):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 != 0:
            raise ValueError("A must be a square 2n x 2n matrix")
        A = 0.5 * (A + A.T)
        eigs = np.linalg.eigvalsh(A)
        if eigs.min() < -1e-10 * max(1.0, abs(eigs.max())):
            raise ValueError("A must be positive semidefinite")
        inferred = A.shape[0] // 2
        if n is not None and n != inferred:
            raise ValueError(f"A is {A.shape[0]}x{A.shape[0]} but n={n}")
        super().__init__(inferred, "quad", gradient_mode)
        self.A = A
        self.A.setflags(write=False)

    def values(self, x, y, t):
        z = np.concatenate(
            [np.asarray(x, dtype=float), np.asarray(y, dtype=float)], axis=-1
        )
        return np.sum((z @ self.A) * z, axis=-1)

    def gradients(self, x, y, t):
        z = np.concatenate(
            [np.asarray(x, dtype=float), np.asarray(y, dtype=float)], axis=-1
        )
        return 2.0 * (z @ self.A)

    def spec(self) -> dict:
        return {"builtin": "quad", "A": self.A.tolist()}


class Wang(HConvexFn):
    """Wang's strictly convex function, extended constantly in t (n=1 only).

        u(x, y) = x^4 + 3 y^2 / (2 x^2)            if |y| <= |x|^3,
                  x^2 |y|^(2/3) / 2 + 2 |y|^(4/3)  otherwise,

    with u(0, 0) = 0.  Continuous and C^1 across |y| = |x|^3 (both branches
    and both gradient components agree there).  It satisfies the engulfing
    property but its slope ratio M/m at the origin grows like r^(8/3)/2, so
    it has neither controlled H-slope nor round H-sections.
    """

    def __init__(self, gradient_mode: str = "analytic"):
        super().__init__(1, "wang", gradient_mode)

    @staticmethod
    def _u(x, y):
        ax = np.abs(x)
        ay = np.abs(y)
        inner = ay <= ax**3
        x2 = np.where(inner & (x != 0.0), x * x, 1.0)  # guard 0/0 at the origin
        branch1 = x**4 + 1.5 * y * y / x2
        branch1 = np.where(inner & (x == 0.0), 0.0, branch1)
        branch2 = 0.5 * x * x * ay ** (2.0 / 3.0) + 2.0 * ay ** (4.0 / 3.0)
        return np.where(inner, branch1, branch2)

    def values(self, x, y, t):
        x = np.asarray(x, dtype=float)[..., 0]
        y = np.asarray(y, dtype=float)[..., 0]
        return self._u(x, y)

    def gradients(self, x, y, t):
        x = np.asarray(x, dtype=float)[..., 0]
        y = np.asarray(y, dtype=float)[..., 0]
        ax = np.abs(x)
        ay = np.abs(y)
        inner = ay <= ax**3
        safe_x = np.where(x != 0.0, x, 1.0)
        gx1 = 4.0 * x**3 - 3.0 * y * y / safe_x**3
        gy1 = 3.0 * y / safe_x**2
        gx1 = np.where(x == 0.0, 0.0, gx1)
        gy1 = np.where(x == 0.0, 0.0, gy1)
        sy = np.sign(y)
        safe_y = np.where(y != 0.0, ay, 1.0)
        gx2 = x * ay ** (2.0 / 3.0)
        gy2 = sy * (x * x / (3.0 * safe_y ** (1.0 / 3.0)) + (8.0 / 3.0) * safe_y ** (1.0 / 3.0))
        gx = np.where(inner, gx1, gx2)
        gy = np.where(inner, gy1, gy2)
        return np.stack([gx, gy], axis=-1)

    def spec(self) -> dict:
        return {"builtin": "wang"}


class ParsedFn(HConvexFn):
    """Function defined by a parsed DSL expression; finite-difference gradient."""

    def __init__(self, text: str, n: int, fd_step: float = DEFAULT_FD_STEP):
        super().__init__(n, f"expr:{text}", gradient_mode="fd", fd_step=fd_step)
        self.text = text
        self.ast: Expr = parse_expr(text, n)

    def values(self, x, y, t):
        return exprparse.eval_expr(self.ast, x, y, t)

    def spec(self) -> dict:
        return {"expr": self.text, "n": self.n}


BUILTIN_NAMES = ("sqnorm", "sqnorm_t", "quad", "wang")


def make_function(config: dict) -> HConvexFn:
    """Build a function from the CLI config format.

    Either {"builtin": "sqnorm"|"sqnorm_t"|"wang"|"quad", "n": k, "A": [[..]]}
    or {"expr": "...", "n": k}.
    """
    if "builtin" in config:
        name = config["builtin"]
        n = int(config.get("n", 1))
        mode = config.get("gradient_mode", "analytic")
        if name == "sqnorm":
            return SqNorm(n, mode)
        if name == "sqnorm_t":
            return SqNormT(n, mode)
        if name == "wang":
            if n != 1:
                raise ValueError("wang is defined for n=1 only")
            return Wang(mode)
        if name == "quad":
            if "A" not in config:
                raise ValueError("quad requires a matrix under key 'A'")
            return Quadratic(config["A"], n=config.get("n"))
        raise ValueError(f"unknown builtin {name!r}; known: {BUILTIN_NAMES}")
    if "expr" in config:
        n = int(config.get("n", 1))
        return ParsedFn(config["expr"], n, fd_step=float(config.get("h", DEFAULT_FD_STEP)))
    raise ValueError("function config needs a 'builtin' or an 'expr' key")


# ---------------------------------------------------------------------------
# convexity checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    """Sampled horizontal-convexity audit.

    ``violations`` holds (point, direction, lam, defect) for samples whose
    value at the horizontal combination exceeds the convex combination by
    more than the tolerance; ``max_defect`` is over all samples (may be
    negative for a comfortably convex function).
    """

    samples: int
    violations: tuple
    max_defect: float
    tol: float

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def check_h_convexity(
    f: HConvexFn,
    n_points: int = 200,
    n_dirs: int = 16,
    seed: int = 0,
    box_radius: float = 5.0,
    tol: float = 1e-9,
    max_reported: int = 100,
) -> ConvexityReport:
    """Sample the defining inequality of H-convexity.

    Draws points xi, horizontal directions v and lam in (0, 1), and compares
    f(xi o exp(lam v)) against (1 - lam) f(xi) + lam f(xi o exp v); positive
    defects beyond ``tol`` are violations.
    """
    if n_points <= 0 or n_dirs <= 0:
        raise ValueError("sample counts must be positive")
    rng = np.random.default_rng(seed)
    total = n_points * n_dirs
    x, y, t = random_points(rng, f.n, n_points, box_radius)
    x = np.repeat(x, n_dirs, axis=0)
    y = np.repeat(y, n_dirs, axis=0)
    t = np.repeat(t, n_dirs, axis=0)
    dirs = rng.standard_normal((total, 2 * f.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    lengths = np.exp(rng.uniform(np.log(1e-2), np.log(box_radius), total))
    V = dirs * lengths[:, None]
    lam = rng.uniform(0.0, 1.0, total)

    X1, Y1, T1 = x, y, t
    X2, Y2, T2 = exp_from_many(X1, Y1, T1, V)
    Xm, Ym, Tm = exp_from_many(X1, Y1, T1, V * lam[:, None])
    f1 = f.values(X1, Y1, T1)
    f2 = f.values(X2, Y2, T2)
    fm = f.values(Xm, Ym, Tm)
    defect = fm - ((1.0 - lam) * f1 + lam * f2)
    defect = np.where(np.isfinite(defect), defect, np.inf)

    bad = np.flatnonzero(defect > tol)
    order = bad[np.argsort(-defect[bad])][:max_reported]
    violations = tuple(
        (
            HPoint(X1[i], Y1[i], float(T1[i])),
            HorizontalVector(V[i, : f.n], V[i, f.n :]),
            float(lam[i]),
            float(defect[i]),
        )
        for i in order
    )
    return ConvexityReport(total, violations, float(np.max(defect)), tol)
