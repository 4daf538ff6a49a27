"""Random-effects model on the logit scale.

Each study contributes a normal log-density with total variance
tau2 + sigma_i^2. Both parameters are estimated jointly by maximum
likelihood; tau2 may legitimately sit on the zero boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError
from .optim import OptimProblem, maximize
from .transforms import LogitObservation, normal_quantile
from .types import RemParams

_LOG_2PI = math.log(2.0 * math.pi)

#: Fitted tau2 below this is reported as exactly zero.
_TAU2_FLOOR = 1e-8


@dataclass(frozen=True)
class RemFitDiagnostics:
    """Per-study weights and uncertainty of the pooled mean at the optimum."""

    weights: tuple[float, ...]
    se_mu: float
    loglik: float
    converged: bool
    n_iterations: int


def _loglik_arrays(mu: float, tau2: float, theta: np.ndarray, sigma2: np.ndarray) -> float:
    v = tau2 + sigma2
    return float(-0.5 * np.sum(np.log(2.0 * math.pi * v) + (theta - mu) ** 2 / v))


def rem_loglik(params: RemParams, obs: Sequence[LogitObservation]) -> float:
    """Log-likelihood of the random-effects model for the given observations."""
    if len(obs) == 0:
        raise DomainError("rem_loglik requires at least one observation")
    theta = np.array([o.theta for o in obs])
    sigma2 = np.array([o.sigma2 for o in obs])
    return _loglik_arrays(params.mu, params.tau2, theta, sigma2)


def rem_fit(obs: Sequence[LogitObservation], tol: float = 1e-6) -> tuple[RemParams, RemFitDiagnostics]:
    """Maximum-likelihood fit of (mu, tau2) with tau2 bounded below by zero.

    Returns the estimates together with inverse-variance weights, the
    standard error of the pooled mean, and the attained log-likelihood.
    Non-convergence is reported through the diagnostics, not raised.
    """
    if len(obs) < 2:
        raise InsufficientDataError(
            f"fitting a random-effects model needs >= 2 observations, got {len(obs)}"
        )
    theta = np.array([o.theta for o in obs])
    sigma2 = np.array([o.sigma2 for o in obs])

    # Moment-style start: precision-weighted mean, spread in excess of the
    # average sampling variance.
    w0 = 1.0 / sigma2
    mu0 = float(np.sum(w0 * theta) / np.sum(w0))
    tau2_0 = max(0.0, float(np.var(theta) - np.mean(sigma2)))

    problem = OptimProblem(
        objective=lambda v: _loglik_arrays(v[0], v[1], theta, sigma2),
        bounds=((-math.inf, math.inf), (0.0, math.inf)),
        start=(mu0, tau2_0),
        tol=tol,
    )
    outcome = maximize(problem)
    mu_hat, tau2_hat = outcome.argmax
    if tau2_hat < _TAU2_FLOOR:
        tau2_hat = 0.0
    params = RemParams(mu=mu_hat, tau2=tau2_hat)

    weights = 1.0 / (tau2_hat + sigma2)
    diag = RemFitDiagnostics(
        weights=tuple(float(w) for w in weights),
        se_mu=float(math.sqrt(1.0 / np.sum(weights))),
        loglik=_loglik_arrays(mu_hat, tau2_hat, theta, sigma2),
        converged=outcome.converged,
        n_iterations=outcome.iterations,
    )
    return params, diag


def rem_confidence_interval(
    params: RemParams, diag: RemFitDiagnostics, level: float = 0.95
) -> tuple[float, float]:
    """Wald interval for mu on the logit scale: mu_hat +- z * se."""
    if not (0.0 < level < 1.0):
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    if diag.se_mu == 0.0:
        return (params.mu, params.mu)
    z = normal_quantile(0.5 * (1.0 + level))
    half = z * diag.se_mu
    return (params.mu - half, params.mu + half)
