"""Function approximation by partial minimization of the regularized kernel.

For a graph variable z = (x, y) the approximant is

    f(x) = min argmin_{y in Y} q(x, y),

the smallest of the near-minimizers of the kernel along the y-fiber.  For each
x the kernel collapses to an explicit univariate polynomial in y, which is
minimized on a guarded grid: the grid is refined until its spacing h satisfies
lam * h <= 2 * epsilon, where lam bounds |dq/dy| on Y, so every reported value
is within epsilon of the true fiber minimum.  Values within the tie window of
the minimum count as ties and the smallest y wins, which reproduces the
min-argmin convention on symmetric fibers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

from .basis import axis_tables, y_power_matrix
from .cdkernel import CDKernel

_MAX_CELLS = 1024  # refinement keeps at most this many candidate cells per level
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ApproxConfig:
    """Knobs for the fiber minimization.

    ``epsilon`` is the absolute precision target on the fiber minimum; when
    unset it defaults to gamma/2 if ``gamma`` is given, otherwise to 1e-6
    times the coarse minimum's scale.  ``alpha`` widens the acceptance window
    to (1+alpha)/(1-alpha) times the minimum, matching the robust variant used
    when the kernel itself is only known up to relative error alpha.
    """

    epsilon: float | None = None
    gamma: float | None = None
    alpha: float = 0.0
    tie_tol: float = 1e-13
    y_interval: tuple | None = None
    coarse_points: int = 1025
    max_refinements: int = 24
    threads: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.coarse_points < 3:
            raise ValueError("coarse grid needs at least 3 points")

    def resolve_epsilon(self) -> float | None:
        if self.epsilon is not None:
            return float(self.epsilon)
        if self.gamma is not None:
            return float(self.gamma) / 2.0
        return None

    def resolve_threads(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        return max(1, int(os.environ.get("CDAPPROX_THREADS", "1")))


def derivative_bound(coeffs, interval) -> float:
    """Upper bound on |dq/dy| over the interval for q(y) = sum c_k y^k.

    Uses sum_k k |c_k| t^(k-1) with t = max(|lo|, |hi|); coarse but cheap and
    valid on any interval, which is all the grid guard needs.
    """
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    lo, hi = float(interval[0]), float(interval[1])
    t = max(abs(lo), abs(hi))
    k = np.arange(c.shape[0])
    with np.errstate(over="raise"):
        powers = np.ones_like(c)
        if c.shape[0] > 1:
            powers[1:] = t ** (k[1:] - 1)
    return float(np.sum(k * np.abs(c) * powers))


@lru_cache(maxsize=64)
def _binomial_matrix(n: int) -> np.ndarray:
    """B[j, k] = C(k, j) for k >= j, built by the Pascal recurrence."""
    B = np.zeros((n, n))
    B[0] = 1.0
    for j in range(1, n):
        B[j, j:] = np.cumsum(B[j - 1, j - 1 : -1])
    B.setflags(write=False)
    return B


def _local_derivative_bound(c: np.ndarray, a: float, b: float) -> float:
    """Valid bound on |dq/dy| over [a, b] that tightens as the interval shrinks.

    Recenters q at the midpoint: with u = (y - m)/r the coefficients become
    ct_j = r^j sum_k C(k, j) m^(k-j) c_k, and the plain bound on |u| <= 1 is
    sum_j j |ct_j| / r.  Far sharper than the global bound near a minimum,
    where the recentered coefficients collapse.
    """
    n = c.shape[0]
    m = 0.5 * (a + b)
    r = 0.5 * (b - a)
    if r <= 0.0:
        return 0.0
    B = _binomial_matrix(n)
    idx = np.arange(n)
    with np.errstate(over="raise"):
        mp = m ** np.clip(idx[None, :] - idx[:, None], 0, None)
        ct = (B * mp) @ c * r**idx
    return float(np.sum(idx * np.abs(ct))) / r


def _horner(c_rev: list, y: float) -> float:
    acc = 0.0
    for ck in c_rev:
        acc = acc * y + ck
    return acc


def _golden_polish(c_rev: list, a: float, b: float, y0: float, q0: float) -> tuple[float, float]:
    """Golden-section descent on [a, b]; returns the better of y0 and the result."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = _horner(c_rev, x1), _horner(c_rev, x2)
    for _ in range(80):
        if b - a < 1e-13 * max(1.0, abs(a), abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = _horner(c_rev, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = _horner(c_rev, x2)
    y, q = (x1, f1) if f1 <= f2 else (x2, f2)
    if q < q0:
        return float(y), float(q)
    return y0, q0


def partial_argmin(
    coeffs,
    interval,
    epsilon: float | None = None,
    alpha: float = 0.0,
    tie_tol: float = 1e-13,
    coarse_points: int = 1025,
    max_refinements: int = 24,
) -> tuple[float, float]:
    """Smallest near-minimizer of a univariate polynomial on an interval.

    Returns (y, q(y)) with q(y) within epsilon of min q and y the smallest
    grid candidate whose value lies inside the tie window.  The grid is
    refined only inside cells that can still contain the minimum, with the
    derivative bound recomputed on the shrinking candidate hull; a final
    golden-section polish sharpens the value inside the winning cell.
    """
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite polynomial coefficients")

    lam_global = derivative_bound(c, (lo, hi))
    ys = np.linspace(lo, hi, coarse_points)
    qs = npoly.polyval(ys, c)
    pool_y = [ys]
    pool_q = [qs]
    qmin = float(qs.min())
    qmax = float(qs.max())
    if epsilon is None:
        epsilon = 1e-6 * max(1.0, abs(qmin))

    h = (hi - lo) / (coarse_points - 1)
    starts = ys[:-1]
    q_left, q_right = qs[:-1], qs[1:]
    sub = 16
    for _ in range(max_refinements):
        if h <= 1e-15 * (hi - lo) or starts.shape[0] == 0:
            break
        hull = (float(starts.min()), float(starts.max()) + h)
        lam = min(lam_global, _local_derivative_bound(c, *hull))
        if lam * h <= 2.0 * epsilon:
            break
        cell_min = np.minimum(q_left, q_right)
        keep = cell_min <= qmin + lam * h
        starts = starts[keep]
        cell_min = cell_min[keep]
        if starts.shape[0] > _MAX_CELLS:
            pick = np.argpartition(cell_min, _MAX_CELLS)[:_MAX_CELLS]
            pick.sort()
            starts = starts[pick]
        h /= sub
        grid = starts[:, None] + h * np.arange(sub + 1)[None, :]
        vals = npoly.polyval(grid, c)
        pool_y.append(grid.ravel())
        pool_q.append(vals.ravel())
        qmin = min(qmin, float(vals.min()))
        starts = grid[:, :-1].ravel()
        q_left = vals[:, :-1].ravel()
        q_right = vals[:, 1:].ravel()

    Y = np.concatenate(pool_y)
    Q = np.concatenate(pool_q)
    qmin = float(Q.min())
    # the 1e-14 * qmax floor absorbs rounding noise of order eps * (fiber range)
    # in the spectral factorization, so exactly symmetric fibers tie cleanly
    window = tie_tol * max(1.0, abs(qmin)) + 1e-14 * abs(qmax)
    ratio = (1.0 + alpha) / (1.0 - alpha)
    thresh = ratio * max(qmin, 0.0) + window if alpha > 0.0 else qmin + window
    y_star = float(Y[Q <= thresh].min())
    q_star = float(npoly.polyval(y_star, c))

    c_rev = c[::-1].tolist()
    a = max(lo, y_star - h)
    b = min(hi, y_star + h)
    if a < b:
        y_star, q_star = _golden_polish(c_rev, a, b, y_star, q_star)
    return y_star, q_star


class Approximant:
    """Evaluates f(x) = min argmin_y q(x, y) for a kernel on a graph box."""

    def __init__(self, kernel: CDKernel, config: ApproxConfig | None = None):
        spec = kernel.spec
        if spec.p < 2:
            raise ValueError("approximation needs p >= 2 (x-block plus one y axis)")
        self.kernel = kernel
        self.config = config or ApproxConfig()
        self.spec = spec
        self._A = kernel.filtered_matrix()
        self._idx = spec.indices
        self._ydeg = self._idx[:, -1]
        n, d = spec.size, spec.d
        self._scatter = np.zeros((n, d + 1))
        self._scatter[np.arange(n), self._ydeg] = 1.0
        self._U = y_power_matrix(spec)
        self._y_interval = self.config.y_interval or spec.domain[-1]

    def _x_parts(self, X: np.ndarray) -> np.ndarray:
        tabs = axis_tables(self.spec, X)
        out = tabs[0][:, self._idx[:, 0]].copy()
        for k in range(1, X.shape[1]):
            out *= tabs[k][:, self._idx[:, k]]
        return out

    def y_coefficients(self, x) -> np.ndarray:
        """Monomial coefficients c with q(x, y) = sum_m c[m] y^m, degree 2d."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if x.shape[1] != self.spec.p - 1:
            raise ValueError(f"x has dimension {x.shape[1]}, expected {self.spec.p - 1}")
        return self._coeffs_from_xpart(self._x_parts(x)[0])

    def _coeffs_from_xpart(self, xpart: np.ndarray) -> np.ndarray:
        d = self.spec.d
        W = self._A * xpart[:, None] * xpart[None, :]
        C = self._scatter.T @ W @ self._scatter
        D = self._U.T @ C @ self._U
        c = np.zeros(2 * d + 1)
        for j in range(d + 1):
            c[j : j + d + 1] += D[j]
        return c

    def evaluate(self, x) -> tuple[float, float]:
        """Approximant value and fiber minimum (y, q(x, y)) at one point."""
        return self._minimize(self.y_coefficients(x))

    def _minimize(self, c: np.ndarray) -> tuple[float, float]:
        cfg = self.config
        return partial_argmin(
            c,
            self._y_interval,
            epsilon=cfg.resolve_epsilon(),
            alpha=cfg.alpha,
            tie_tol=cfg.tie_tol,
            coarse_points=cfg.coarse_points,
            max_refinements=cfg.max_refinements,
        )

    def evaluate_batch(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation over rows of X; returns (values, fiber minima)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.spec.p - 1:
            raise ValueError(f"points have dimension {X.shape[1]}, expected {self.spec.p - 1}")
        xparts = self._x_parts(X)
        threads = self.config.resolve_threads()
        if threads > 1 and X.shape[0] > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(lambda row: self._minimize(self._coeffs_from_xpart(row)), xparts)
                )
        else:
            results = [self._minimize(self._coeffs_from_xpart(row)) for row in xparts]
        ys = np.array([r[0] for r in results])
        qs = np.array([r[1] for r in results])
        return ys, qs
