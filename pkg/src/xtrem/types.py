"""Core domain types.

Every type validates its invariants at construction and is immutable
afterwards, so instances can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ValidationError

#: Default z-score for the dynamic threshold (90th percentile of a standard normal).
DEFAULT_PERCENTILE_Z = 1.2816


@dataclass(frozen=True)
class StudyRecord:
    """One study's event count and sample size."""

    events: int
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or isinstance(self.size, bool):
            raise ValidationError(f"size must be an integer, got {self.size!r}")
        if not isinstance(self.events, int) or isinstance(self.events, bool):
            raise ValidationError(f"events must be an integer, got {self.events!r}")
        if self.size < 1:
            raise ValidationError(f"size must be >= 1, got {self.size}")
        if self.events < 0:
            raise ValidationError(f"events must be >= 0, got {self.events}")
        if self.events > self.size:
            raise ValidationError(
                f"events ({self.events}) exceeds size ({self.size})"
            )

    @property
    def proportion(self) -> float:
        """Observed event proportion, recomputed as events / size."""
        return self.events / self.size


def make_study(events: int, size: int) -> StudyRecord:
    """Build a validated StudyRecord from raw counts."""
    return StudyRecord(events=events, size=size)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of studies. Study index is positional."""

    studies: tuple[StudyRecord, ...]
    label: str
    study_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "studies", tuple(self.studies))
        if len(self.studies) == 0:
            raise ValidationError("a dataset must contain at least one study")
        if self.study_labels is not None:
            object.__setattr__(self, "study_labels", tuple(self.study_labels))
            if len(self.study_labels) != len(self.studies):
                raise ValidationError(
                    f"{len(self.study_labels)} study labels for "
                    f"{len(self.studies)} studies"
                )

    def __len__(self) -> int:
        return len(self.studies)

    @property
    def proportions(self) -> tuple[float, ...]:
        return tuple(s.proportion for s in self.studies)


class ThresholdKind(Enum):
    FIXED = "fixed"
    DYNAMIC_PERCENTILE = "dynamic"


@dataclass(frozen=True)
class Threshold:
    """A resolved segmentation threshold on the proportion scale.

    For a dynamic threshold the resolving location/scale pair is kept so
    reports can show where the value came from.
    """

    kind: ThresholdKind
    value: float
    percentile_z: float = DEFAULT_PERCENTILE_Z
    source_mu: float | None = None
    source_tau: float | None = None

    def __post_init__(self):
        if not (0.0 < self.value < 1.0):
            raise ValidationError(
                f"threshold value must lie in (0, 1), got {self.value}"
            )


@dataclass(frozen=True)
class ThresholdSpec:
    """An unresolved threshold request, as parsed from user input."""

    kind: ThresholdKind
    value: float | None = None
    percentile_z: float = DEFAULT_PERCENTILE_Z

    def __post_init__(self):
        if self.kind is ThresholdKind.FIXED:
            if self.value is None:
                raise ValidationError("a fixed threshold requires a value")
            if not (0.0 < self.value < 1.0):
                raise ValidationError(
                    f"fixed threshold must lie in (0, 1), got {self.value}"
                )
        if not math.isfinite(self.percentile_z):
            raise ValidationError("percentile z-score must be finite")


@dataclass(frozen=True)
class Segmentation:
    """Index partition of a dataset into bulk (p <= u) and tail (p > u)."""

    bulk_indices: tuple[int, ...]
    tail_indices: tuple[int, ...]
    excesses: tuple[float, ...]
    threshold: Threshold

    def __post_init__(self):
        object.__setattr__(self, "bulk_indices", tuple(self.bulk_indices))
        object.__setattr__(self, "tail_indices", tuple(self.tail_indices))
        object.__setattr__(self, "excesses", tuple(self.excesses))
        n = len(self.bulk_indices) + len(self.tail_indices)
        combined = sorted(self.bulk_indices + self.tail_indices)
        if combined != list(range(n)):
            raise ValidationError(
                "bulk and tail indices must partition 0..N-1 without overlap"
            )
        if len(self.excesses) != len(self.tail_indices):
            raise ValidationError(
                f"{len(self.excesses)} excesses for "
                f"{len(self.tail_indices)} tail studies"
            )
        if any(y <= 0.0 for y in self.excesses):
            raise ValidationError("every excess must be strictly positive")

    @property
    def n_bulk(self) -> int:
        return len(self.bulk_indices)

    @property
    def n_tail(self) -> int:
        return len(self.tail_indices)


@dataclass(frozen=True)
class RemParams:
    """Random-effects parameters on the logit scale: mean and between-study variance."""

    mu: float
    tau2: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValidationError(f"mu must be finite, got {self.mu}")
        if not (self.tau2 >= 0.0):
            raise ValidationError(f"tau2 must be >= 0, got {self.tau2}")


#: Shape values at or below this bound make the tail likelihood unbounded.
XI_LOWER_BOUND = -1.0
#: Shapes beyond this are physically meaningless for proportion excesses.
XI_UPPER_BOUND = 5.0


@dataclass(frozen=True)
class GpdParams:
    """Generalized Pareto shape and scale."""

    xi: float
    beta: float

    def __post_init__(self):
        if not (self.beta > 0.0):
            raise ValidationError(f"beta must be > 0, got {self.beta}")
        if not (self.xi > XI_LOWER_BOUND):
            raise ValidationError(f"xi must be > {XI_LOWER_BOUND}, got {self.xi}")
        if not math.isfinite(self.xi):
            raise ValidationError("xi must be finite")

    @property
    def upper_endpoint(self) -> float:
        """Support endpoint of the excess distribution: -beta/xi if xi < 0 else inf."""
        if self.xi < 0.0:
            return -self.beta / self.xi
        return math.inf


class ModelKind(Enum):
    REM = "rem"
    XTREM = "xtrem"


def aic(k_params: int, loglik: float) -> float:
    """Akaike information criterion: 2k - 2 log-likelihood."""
    return 2.0 * k_params - 2.0 * loglik


@dataclass(frozen=True)
class FitResult:
    """A fitted model with estimates, fit quality, and reporting quantities."""

    model: ModelKind
    rem: RemParams
    gpd: GpdParams | None
    loglik: float
    aic: float
    k_params: int
    aggregate_proportion: float
    tail_quantiles: dict[float, float]
    segmentation: Segmentation | None
    ci95_mu: tuple[float, float]
    converged: bool
    n_iterations: int
    dataset_label: str
    flags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(self.flags))
        if self.k_params < 1:
            raise ValidationError("k_params must be positive")
        if abs(self.aic - aic(self.k_params, self.loglik)) > 1e-9:
            raise ValidationError(
                f"aic {self.aic} inconsistent with 2*{self.k_params} - 2*{self.loglik}"
            )
        if self.model is ModelKind.REM:
            if self.gpd is not None:
                raise ValidationError("a REM result cannot carry tail parameters")
            if self.k_params != 2:
                raise ValidationError("a REM result has exactly 2 parameters")
        if self.model is ModelKind.XTREM and self.gpd is not None and self.k_params != 4:
            raise ValidationError("a combined result with a fitted tail has 4 parameters")
        if not (0.0 < self.aggregate_proportion < 1.0):
            raise ValidationError(
                f"aggregate proportion must lie in (0, 1), got {self.aggregate_proportion}"
            )
        lo, hi = self.ci95_mu
        if lo > hi:
            raise ValidationError(f"confidence interval has low {lo} > high {hi}")


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side view of two fits on the same dataset."""

    dataset_label: str
    model_a: ModelKind
    model_b: ModelKind
    aic_a: float
    aic_b: float
    loglik_a: float
    loglik_b: float
    aggregate_a: float
    aggregate_b: float
    tail_quantiles_a: dict[float, float]
    tail_quantiles_b: dict[float, float]
    delta_aic: float
    delta_loglik: float
    preferred: ModelKind | None
