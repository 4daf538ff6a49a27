"""Box-constrained quasi-Newton maximizer with numerical gradients.

The algorithm is a limited-memory BFGS (memory 8) whose trial points are
projected onto the feasible box, combined with a backtracking Armijo line
search. Convergence is declared on the infinity norm of the projected
gradient. Objectives may return -inf inside the search region (for example
outside a support constraint); such steps are rejected and shrunk rather
than treated as fatal.

Everything here is deterministic: the same problem yields the same outcome
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import FitError, ValidationError

_LBFGS_MEMORY = 8
_ARMIJO_C1 = 1e-4
_BACKTRACK_SHRINK = 0.5
_MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class OptimProblem:
    """A maximization problem over a coordinate box.

    Attributes:
        objective: function of a 1-D numpy vector, to MAXIMIZE.
        bounds: per-coordinate (low, high) pairs; use +-inf for unbounded.
        start: feasible initial point.
        tol: convergence tolerance on the projected-gradient infinity norm.
        max_iter: cap on accepted iterations.
    """

    objective: Callable[[np.ndarray], float]
    bounds: tuple[tuple[float, float], ...]
    start: tuple[float, ...]
    tol: float = 1e-7
    max_iter: int = 500

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        if len(self.bounds) != len(self.start):
            raise ValidationError(
                f"{len(self.bounds)} bounds for {len(self.start)} coordinates"
            )
        for j, (lo, hi) in enumerate(self.bounds):
            if lo > hi:
                raise ValidationError(f"bound {j} has low {lo} > high {hi}")
            if not (lo <= self.start[j] <= hi):
                raise ValidationError(
                    f"start[{j}] = {self.start[j]} outside [{lo}, {hi}]"
                )
        if not (self.tol > 0.0):
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")


@dataclass(frozen=True)
class OptimOutcome:
    argmax: tuple[float, ...]
    value: float
    converged: bool
    iterations: int
    grad_norm: float


def numeric_gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    bounds: Sequence[tuple[float, float]],
) -> np.ndarray:
    """Finite-difference gradient of f at x, respecting the box.

    Central differences with step h_j = 1e-7 * max(1, |x_j|); falls back to
    a one-sided difference whenever the central stencil would leave the box.
    Non-finite stencil values trigger up to three step reductions before
    giving up.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    grad = np.empty(n)
    fx: float | None = None
    for j in range(n):
        lo, hi = bounds[j]
        if lo == hi:
            grad[j] = 0.0
            continue
        base_h = 1e-7 * max(1.0, abs(x[j]))
        value = None
        for attempt in range(4):
            h = base_h / (10.0 ** attempt)
            up_ok = x[j] + h <= hi
            down_ok = x[j] - h >= lo
            if not up_ok and not down_ok:
                continue
            if up_ok and down_ok:
                xp = x.copy(); xp[j] += h
                xm = x.copy(); xm[j] -= h
                fp, fm = f(xp), f(xm)
                if math.isfinite(fp) and math.isfinite(fm):
                    value = (fp - fm) / (2.0 * h)
                    break
            else:
                if fx is None:
                    fx = f(x)
                    if not math.isfinite(fx):
                        raise FitError("objective is not finite at the expansion point")
                xo = x.copy()
                xo[j] += h if up_ok else -h
                fo = f(xo)
                if math.isfinite(fo):
                    value = (fo - fx) / h if up_ok else (fx - fo) / h
                    break
        if value is None:
            raise FitError(
                f"could not form a finite difference for coordinate {j} at {x[j]}"
            )
        grad[j] = value
    return grad


def _project(x: np.ndarray, lows: np.ndarray, highs: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(x, lows), highs)


def _projected_gradient_norm(
    grad: np.ndarray, x: np.ndarray, lows: np.ndarray, highs: np.ndarray
) -> float:
    """Infinity norm of the gradient restricted to feasible ascent directions."""
    pg = grad.copy()
    at_low = x <= lows
    at_high = x >= highs
    pg[at_low] = np.maximum(pg[at_low], 0.0)
    pg[at_high] = np.minimum(pg[at_high], 0.0)
    return float(np.max(np.abs(pg))) if pg.size else 0.0


def _lbfgs_direction(grad: np.ndarray, pairs: list[tuple[np.ndarray, np.ndarray, float]]) -> np.ndarray:
    """Two-loop recursion; returns an approximate Newton ascent direction."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        gamma = float(np.dot(s, y) / np.dot(y, y))
        q *= gamma
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def maximize(problem: OptimProblem, iterate_log: list | None = None) -> OptimOutcome:
    """Maximize the objective over the box.

    Args:
        problem: the problem definition.
        iterate_log: optional list; every accepted iterate is appended as
            (x_copy, objective_value) for diagnostics and testing.

    Returns:
        OptimOutcome whose argmax is always feasible and whose value is
        never below the objective at the start point. ``converged`` is
        False when the gradient tolerance was not reached.
    """
    lows = np.array([b[0] for b in problem.bounds])
    highs = np.array([b[1] for b in problem.bounds])
    f = problem.objective

    x = np.array(problem.start, dtype=float)
    fx = f(x)
    if not math.isfinite(fx):
        raise FitError(f"objective is not finite at the start point: {fx}")

    grad = numeric_gradient(f, x, problem.bounds)
    pg_norm = _projected_gradient_norm(grad, x, lows, highs)
    pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
    iterations = 0

    while pg_norm > problem.tol and iterations < problem.max_iter:
        used_fallback = False
        direction = _lbfgs_direction(grad, pairs)
        if not np.all(np.isfinite(direction)) or float(np.dot(direction, grad)) <= 0.0:
            direction = grad.copy()
            pairs.clear()
            used_fallback = True

        step0 = 1.0
        if not pairs:
            dnorm = float(np.max(np.abs(direction)))
            if dnorm > 0.0:
                step0 = min(1.0, 1.0 / dnorm)

        accepted = None
        while True:
            alpha = step0
            for _ in range(_MAX_BACKTRACKS):
                candidate = _project(x + alpha * direction, lows, highs)
                delta = candidate - x
                slope = float(np.dot(grad, delta))
                if slope > 0.0 and np.any(delta != 0.0):
                    fc = f(candidate)
                    if math.isfinite(fc) and fc >= fx + _ARMIJO_C1 * slope:
                        accepted = (candidate, fc)
                        break
                alpha *= _BACKTRACK_SHRINK
            if accepted is not None or used_fallback:
                break
            # Quasi-Newton step failed; retry once along the raw gradient.
            direction = grad.copy()
            pairs.clear()
            used_fallback = True
            dnorm = float(np.max(np.abs(direction)))
            step0 = min(1.0, 1.0 / dnorm) if dnorm > 0.0 else 1.0

        if accepted is None:
            break

        x_new, fx_new = accepted
        grad_new = numeric_gradient(f, x_new, problem.bounds)
        s = x_new - x
        y = grad_new - grad
        sy = float(np.dot(s, y))
        # Keep the inverse-Hessian estimate negative-curvature-free.
        if -sy > 1e-10 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            pairs.append((s, -y, 1.0 / (-sy)))
            if len(pairs) > _LBFGS_MEMORY:
                pairs.pop(0)
        x, fx, grad = x_new, fx_new, grad_new
        iterations += 1
        if iterate_log is not None:
            iterate_log.append((x.copy(), fx))
        pg_norm = _projected_gradient_norm(grad, x, lows, highs)

    return OptimOutcome(
        argmax=tuple(float(v) for v in x),
        value=fx,
        converged=pg_norm <= problem.tol,
        iterations=iterations,
        grad_norm=pg_norm,
    )
