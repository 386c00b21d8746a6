"""Zero-one risk, FNR/TPR, and Hoeffding generalization-gap bounds."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Iterable, Mapping, Sequence, TextIO

from ._parse import check_probability
from .errors import DomainError, InfeasibleError, ValidationError


def zero_one_loss(predicted: bool, truth: bool) -> int:
    return int(bool(predicted) != bool(truth))


class RiskKind(str, enum.Enum):
    EMPIRICAL_RISK = "empirical-risk"
    FNR = "fnr"
    TPR = "tpr"
    POPULATION_RISK = "population-risk"


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    kind: RiskKind
    dataset_size: int

    def __post_init__(self):
        check_probability(self.value, "value")
        object.__setattr__(self, "kind", RiskKind(self.kind))

    def to_json(self) -> str:
        d = asdict(self)
        d["kind"] = self.kind.value
        return json.dumps(d, sort_keys=True)


@dataclass(frozen=True)
class Sample:
    id: str
    truth: bool
    predicted: bool


_TRUE = {"1", "true", "t", "yes", "y", "hit", "positive"}
_FALSE = {"0", "false", "f", "no", "n", "miss", "negative"}


def _label(value: Any, field: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    s = str(value).strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    raise ValidationError(f"not a binary label: {value!r}", field)


@dataclass(frozen=True)
class LabeledDataset:
    """Binary ground truth and predictions; positive means "sign present"."""

    samples: tuple[Sample, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def from_pairs(cls, truth: Sequence, predicted: Sequence, name: str = "") -> "LabeledDataset":
        if len(truth) != len(predicted):
            raise ValidationError("truth and predicted differ in length", "predicted")
        return cls(
            tuple(Sample(str(i), bool(t), bool(p)) for i, (t, p) in enumerate(zip(truth, predicted))),
            name,
        )

    @classmethod
    def read_csv(cls, f: TextIO, name: str = "") -> "LabeledDataset":
        reader = csv.DictReader(f)
        missing = {"id", "truth", "predicted"} - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"missing column(s) {sorted(missing)}", "header")
        rows = []
        for line, row in enumerate(reader, start=2):
            rows.append(Sample(
                row["id"],
                _label(row["truth"], f"line {line}.truth"),
                _label(row["predicted"], f"line {line}.predicted"),
            ))
        return cls(tuple(rows), name)

    @classmethod
    def from_json(cls, doc: Mapping[str, Any] | Sequence) -> "LabeledDataset":
        """Accepts ``{"name": ..., "samples": [...]}`` or a bare list of samples."""
        name = ""
        items = doc
        if isinstance(doc, Mapping):
            name = str(doc.get("name", ""))
            items = doc.get("samples")
        if not isinstance(items, list):
            raise ValidationError("must be a list", "samples")
        rows = []
        for j, s in enumerate(items):
            if not isinstance(s, Mapping):
                raise ValidationError("must be an object", f"samples[{j}]")
            rows.append(Sample(
                str(s.get("id", j)),
                _label(s.get("truth"), f"samples[{j}].truth"),
                _label(s.get("predicted"), f"samples[{j}].predicted"),
            ))
        return cls(tuple(rows), name)


def empirical_risk(d: LabeledDataset) -> RiskEstimate:
    """Mean zero-one loss over the dataset."""
    if not d.samples:
        raise ValidationError("empirical risk of an empty dataset", "samples")
    errors = sum(zero_one_loss(s.predicted, s.truth) for s in d.samples)
    return RiskEstimate(errors / len(d.samples), RiskKind.EMPIRICAL_RISK, len(d.samples))


def _positives(d: LabeledDataset) -> list[Sample]:
    pos = [s for s in d.samples if s.truth]
    if not pos:
        raise ValidationError("dataset has no positive samples", "samples")
    return pos


def false_negative_rate(d: LabeledDataset) -> RiskEstimate:
    pos = _positives(d)
    misses = sum(1 for s in pos if not s.predicted)
    return RiskEstimate(misses / len(pos), RiskKind.FNR, len(pos))


def true_positive_rate(d: LabeledDataset) -> RiskEstimate:
    pos = _positives(d)
    # counted as the complement so FNR + TPR == 1 holds exactly
    misses = sum(1 for s in pos if not s.predicted)
    return RiskEstimate((len(pos) - misses) / len(pos), RiskKind.TPR, len(pos))


@dataclass(frozen=True)
class DiscreteModelSpec:
    """Finite input space with a mass function, a truth map and a model map."""

    masses: Mapping[Any, float]
    truth: Mapping[Any, bool]
    model: Mapping[Any, bool]

    def __post_init__(self):
        if not self.masses:
            raise ValidationError("input space is empty", "masses")
        for x, m in self.masses.items():
            if not (math.isfinite(m) and m >= 0):
                raise ValidationError(f"mass of {x!r} must be non-negative, got {m!r}", "masses")
        total = math.fsum(self.masses.values())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"masses sum to {total!r}, not 1", "masses")
        for name in ("truth", "model"):
            gaps = set(self.masses) - set(getattr(self, name))
            if gaps:
                raise ValidationError(f"not defined on {sorted(map(repr, gaps))}", name)


def population_risk(spec: DiscreteModelSpec) -> float:
    """Failure probability: input mass on which the model disagrees with truth."""
    return math.fsum(
        mass for x, mass in spec.masses.items() if spec.model[x] != spec.truth[x]
    )


def expected_zero_one_loss(spec: DiscreteModelSpec) -> float:
    """Expected zero-one loss over the joint input/label distribution.

    Builds the joint mass over (x, y) pairs explicitly and averages the loss,
    without marginalising, as an independent route to :func:`population_risk`.
    """
    joint = {}
    for x, mass in spec.masses.items():
        for y in (False, True):
            joint[(x, y)] = mass if spec.truth[x] == y else 0.0
    return math.fsum(zero_one_loss(spec.model[x], y) * pr for (x, y), pr in joint.items())


def hoeffding_delta(eta: int, epsilon: float) -> float:
    """Two-sided Hoeffding bound 2 exp(-2 eta eps^2), capped at 1."""
    if isinstance(eta, bool) or not isinstance(eta, int) or eta < 1:
        raise DomainError(f"must be a positive integer, got {eta!r}", "eta")
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"must lie in (0, 1], got {epsilon!r}", "epsilon")
    return min(1.0, 2.0 * math.exp(-2.0 * eta * epsilon * epsilon))


def required_sample_size(epsilon: float, delta: float) -> int:
    """Smallest sample count whose Hoeffding bound at ``epsilon`` is <= ``delta``."""
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"must lie in (0, 1], got {epsilon!r}", "epsilon")
    if not delta > 0.0:
        raise DomainError(f"must be positive, got {delta!r}", "delta")
    if delta >= 2.0:
        return 0
    eta = math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))
    eta = max(eta, 1)
    # guard the rounding at exact integer boundaries, and the cap at 1
    while hoeffding_delta(eta, epsilon) > delta:
        eta += 1
    while eta > 1 and hoeffding_delta(eta - 1, epsilon) <= delta:
        eta -= 1
    return eta


def tolerance_from_margin(s_m: float, p_crit: float, p_req: float) -> float:
    """Hoeffding tolerance as a fraction of the headroom p_crit - p_req."""
    if not 0.0 <= s_m <= 1.0:
        raise DomainError(f"must lie in [0, 1], got {s_m!r}", "safety_margin")
    if p_crit < p_req:
        raise InfeasibleError(
            f"critical miss probability {p_crit:.6g} is below the required {p_req:.6g}",
            constraint="p_miss",
        )
    return s_m * (p_crit - p_req)


@dataclass(frozen=True)
class GapBound:
    epsilon: float
    delta: float
    eta: int
    safety_margin: float

    @classmethod
    def derive(cls, safety_margin: float, p_crit: float, p_req: float, delta: float) -> "GapBound":
        eps = tolerance_from_margin(safety_margin, p_crit, p_req)
        if eps <= 0:
            raise InfeasibleError(
                "zero generalization-gap tolerance needs an unbounded sample", "safety_margin"
            )
        return cls(eps, delta, required_sample_size(eps, delta), safety_margin)


def sample_dataset(spec: DiscreteModelSpec, size: int, rng) -> LabeledDataset:
    """Draw ``size`` inputs from the spec's mass function (numpy Generator)."""
    xs = list(spec.masses)
    idx = rng.choice(len(xs), size=size, p=[spec.masses[x] for x in xs])
    return LabeledDataset(tuple(
        Sample(str(j), spec.truth[xs[i]], spec.model[xs[i]]) for j, i in enumerate(idx)
    ))


def aggregate_errors(chunks: Iterable[LabeledDataset]) -> RiskEstimate:
    """Empirical risk over a partitioned dataset, reduced by integer counts."""
    errors = total = 0
    for c in chunks:
        errors += sum(zero_one_loss(s.predicted, s.truth) for s in c.samples)
        total += len(c.samples)
    if total == 0:
        raise ValidationError("empirical risk of an empty dataset", "samples")
    return RiskEstimate(errors / total, RiskKind.EMPIRICAL_RISK, total)
