"""K-of-N detection confirmation under a Bernoulli per-image detector.

A detection vector holds ``n`` per-image responses (hit / miss).  The
post-processing confirms a sign when at least ``x_min`` hits are present;
equivalently it rejects when at least ``y_min = n - x_min + 1`` misses are
present.  With IID per-image outcomes the hit count is binomial, so every
probability in here reduces to an upper binomial tail.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from ._parse import check_probability
from .errors import DomainError, InfeasibleError, ValidationError

#: Absolute tolerance of the bisection in :func:`critical_miss_probability`.
BISECTION_TOL = 1e-9

CURVE_HEADER = ("y_min", "p_miss", "prob_no_confirm")


def _check_count(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise DomainError(f"must be a non-negative integer, got {n!r}", name)
    return n


def binomial_tail_geq(n: int, k: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(n, p).

    Terms are generated by the ratio recurrence outward from the largest
    term in ``[k, n]`` so none of them underflows prematurely, then summed
    with :func:`math.fsum` (exactly rounded, hence order independent).
    """
    _check_count(n)
    if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= n:
        raise DomainError(f"k must satisfy 0 <= k <= n={n}, got {k!r}", "k")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}", "p")
    if k == 0 or p == 1.0:
        return 1.0
    if p == 0.0:
        return 0.0

    q = 1.0 - p
    mode = min(n, int((n + 1) * p))
    start = max(k, mode)
    try:
        t0 = math.comb(n, start) * p**start * q ** (n - start)
    except OverflowError:
        # binomial coefficient beyond float range
        t0 = 0.0
    if t0 < 1e-280:
        # deep tail or huge n; the direct product may have lost the leading digits
        log_t0 = (
            math.lgamma(n + 1) - math.lgamma(start + 1) - math.lgamma(n - start + 1)
            + start * math.log(p) + (n - start) * math.log1p(-p)
        )
        t0 = math.exp(log_t0)
        if t0 == 0.0:
            return 0.0

    terms = [t0]
    ratio = p / q
    t = t0
    for i in range(start, n):
        t *= (n - i) / (i + 1) * ratio
        terms.append(t)
    t = t0
    for i in range(start, k, -1):
        t *= i / (n - i + 1) / ratio
        terms.append(t)
    return min(1.0, math.fsum(terms))


@dataclass(frozen=True)
class ConfirmationModel:
    """Detection-vector size, thresholds and per-image outcome probabilities."""

    n: int
    x_min: int
    y_min: int
    p_hit: float
    p_miss: float

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"must be a positive integer, got {self.n!r}", "n")
        if not 0 <= self.x_min <= self.n:
            raise ValidationError(f"must lie in [0, {self.n}], got {self.x_min}", "x_min")
        if self.y_min != self.n - self.x_min + 1:
            raise ValidationError(
                f"must equal n - x_min + 1 = {self.n - self.x_min + 1}, got {self.y_min}",
                "y_min",
            )
        check_probability(self.p_hit, "p_hit")
        check_probability(self.p_miss, "p_miss")
        if abs(self.p_hit + self.p_miss - 1.0) > 1e-12:
            raise ValidationError("p_hit + p_miss must equal 1", "p_miss")

    @classmethod
    def from_miss(cls, n: int, x_min: int, p_miss: float) -> "ConfirmationModel":
        return cls(n=n, x_min=x_min, y_min=n - x_min + 1, p_hit=1.0 - p_miss, p_miss=p_miss)


def prob_confirm(model: ConfirmationModel) -> float:
    """P(T=1): at least ``x_min`` hits among ``n`` frames."""
    return binomial_tail_geq(model.n, model.x_min, model.p_hit)


def prob_reject(model: ConfirmationModel) -> float:
    """P(T=0): at least ``y_min`` misses among ``n`` frames."""
    if model.y_min > model.n:
        # x_min == 0: confirmation is unconditional
        return 0.0
    return binomial_tail_geq(model.n, model.y_min, model.p_miss)


@dataclass(frozen=True)
class DetectionVector:
    entries: tuple[bool, ...]

    @classmethod
    def of(cls, values: Iterable) -> "DetectionVector":
        return cls(tuple(bool(v) for v in values))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def hits(self) -> int:
        return sum(self.entries)

    @property
    def misses(self) -> int:
        return self.n - self.hits


def confirm(v: DetectionVector | Sequence, x_min: int, n: int | None = None) -> bool:
    """True iff the vector holds at least ``x_min`` hits, in any order."""
    if not isinstance(v, DetectionVector):
        v = DetectionVector.of(v)
    if n is not None and v.n != n:
        raise ValidationError(f"detection vector has length {v.n}, expected {n}", "v")
    return v.hits >= x_min


def critical_miss_probability(n: int, y_min: int, q_tr: float, tol: float = BISECTION_TOL) -> float:
    """Largest per-image miss probability keeping P(M >= y_min) <= q_tr.

    Bisection on the strictly increasing tail; the returned lower bracket
    always satisfies the bound.
    """
    _check_count(n)
    if not 1 <= y_min <= n:
        raise DomainError(f"must satisfy 1 <= y_min <= n={n}, got {y_min}", "y_min")
    if not 0.0 < q_tr <= 1.0:
        raise DomainError(f"must lie in (0, 1), got {q_tr!r}", "q_tr")
    if q_tr >= 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binomial_tail_geq(n, y_min, mid) <= q_tr:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class FrontierPoint:
    x_min: int
    y_min: int
    p_miss_crit: float


def admissible_frontier(n: int, q_tr: float) -> list[FrontierPoint]:
    """Critical miss probability for every confirmation threshold 1..n."""
    return [
        FrontierPoint(x, n - x + 1, critical_miss_probability(n, n - x + 1, q_tr))
        for x in range(1, n + 1)
    ]


def curve_dataset(
    n: int, y_min_range: Iterable[int], p_grid: Sequence[float]
) -> list[tuple[int, float, float]]:
    rows = []
    for y in y_min_range:
        if not 1 <= y <= n:
            raise DomainError(f"must lie in [1, {n}], got {y}", "y_min")
        for p in p_grid:
            rows.append((y, float(p), binomial_tail_geq(n, y, float(p))))
    return rows


def linear_grid(p_max: float, steps: int) -> list[float]:
    """``steps + 1`` evenly spaced points on [0, p_max]."""
    if steps < 1:
        raise DomainError(f"must be >= 1, got {steps}", "steps")
    if not 0.0 < p_max <= 1.0:
        raise DomainError(f"must lie in (0, 1], got {p_max}", "p_max")
    return [p_max * i / steps for i in range(steps + 1)]


def write_curve_csv(rows: Iterable[tuple[int, float, float]], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for y, p, prob in rows:
        w.writerow((y, f"{p:.8e}", f"{prob:.8e}"))


def curve_csv(rows: Iterable[tuple[int, float, float]]) -> str:
    buf = io.StringIO()
    write_curve_csv(rows, buf)
    return buf.getvalue()


def miss_moments(n: int, p_miss: float) -> tuple[float, float]:
    """Mean and standard deviation of the miss count M ~ Binomial(n, p_miss)."""
    return n * p_miss, math.sqrt(n * p_miss * (1.0 - p_miss))


def tolerable_miss_ratio(n: int, p_miss: float) -> float:
    """(mean + one standard deviation of misses) / n."""
    if n < 1:
        raise DomainError(f"must be a positive integer, got {n!r}", "n")
    check_probability(p_miss, "p_miss")
    mu, sigma = miss_moments(n, p_miss)
    return (mu + sigma) / n


@dataclass(frozen=True)
class KinematicProfile:
    taxi_speed: float  # m/s
    max_decel: float  # m/s^2
    reaction_time: float  # s
    detection_distance: float  # m
    detection_frequency: float  # Hz

    def __post_init__(self):
        for name in ("taxi_speed", "max_decel", "reaction_time", "detection_distance",
                     "detection_frequency"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"must be strictly positive, got {v!r}", name)

    @property
    def stopping_distance(self) -> float:
        v = self.taxi_speed
        return v * self.reaction_time + v * v / (2.0 * self.max_decel)


def detection_vector_size(k: KinematicProfile) -> tuple[float, int]:
    """Detection window (s) and frame count from a constant-deceleration stop.

    The window is the time left at taxi speed after reserving the reaction
    and braking distance within the required detection distance.
    """
    slack = k.detection_distance - k.stopping_distance
    if slack <= 0:
        raise InfeasibleError(
            f"stopping distance {k.stopping_distance:.3f} m does not fit inside the "
            f"detection distance {k.detection_distance:.3f} m",
            constraint="detection_distance",
        )
    window = slack / k.taxi_speed
    n = math.floor(window * k.detection_frequency)
    if n < 1:
        raise InfeasibleError(
            f"detection window {window:.4f} s holds no frame at "
            f"{k.detection_frequency} Hz",
            constraint="detection_frequency",
        )
    return window, n
