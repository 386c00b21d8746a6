"""Scenario -> traceable requirement set -> compliance report.

The derivation chain is: allocated QSO of the ML-insufficiency basic event,
normalized per encounter (``q_tr``); detection-vector size; critical miss
probabilities for every confirmation threshold; the operating point;
tolerable miss ratio; generalization tolerance and sample size.  Ten records
come out, linked to each other and, through the fault-tree event, to the top
QSO.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import schemas
from ._parse import parse_number, parse_probability
from .confirmation import (
    ConfirmationModel,
    FrontierPoint,
    KinematicProfile,
    admissible_frontier,
    detection_vector_size,
    prob_reject,
    tolerable_miss_ratio,
)
from .errors import InfeasibleError, ValidationError
from .generalization import GapBound
from .safety_model import (
    BasicEvent,
    EventCategory,
    ExposureProfile,
    ExposureUnit,
    FaultTree,
    Qso,
    Severity,
    normalize_qso,
    validate_budgets,
)

SCHEMA_VERSION = 1
TOP_QSO_ID = "QSO-TOP"

COMPARATORS = ("<", "<=", ">=")
_SYMBOL = {"<": "<", "<=": "≤", ">=": "≥"}


@dataclass(frozen=True)
class OperatingPointPolicy:
    kind: str  # "explicit" | "margin-based"
    p_miss: float
    x_min: int | None = None
    prefer: str = "strictest"


@dataclass(frozen=True)
class Scenario:
    top_qso: Qso
    exposure: ExposureProfile
    fault_tree: FaultTree
    mlc_event: str
    policy: OperatingPointPolicy
    safety_margin: float
    delta: float
    n: int | None = None
    kinematics: KinematicProfile | None = None
    severity: Severity | None = None
    critical_decimals: int | None = None
    binds: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        node = self.fault_tree.nodes.get(self.mlc_event)
        if not isinstance(node, BasicEvent):
            raise ValidationError(f"{self.mlc_event!r} is not a basic event of the tree", "mlc_event")
        if node.category is not EventCategory.ML_INSUFFICIENCY:
            raise ValidationError("the MLC event must be an ml-insufficiency event", "mlc_event")
        if node.budget is None:
            raise ValidationError("the MLC event has no budget", f"fault_tree.nodes.{self.mlc_event}.budget")
        if self.n is None and self.kinematics is None:
            raise ValidationError("give n or kinematics", "detection")
        if not 0.0 <= self.safety_margin <= 1.0:
            raise ValidationError(f"must lie in [0, 1], got {self.safety_margin!r}", "gap.safety_margin")
        if not 0.0 < self.delta <= 1.0:
            raise ValidationError(f"must lie in (0, 1], got {self.delta!r}", "gap.delta")
        p = self.policy
        if p.kind == "explicit" and p.x_min is None:
            raise ValidationError("explicit policy needs x_min", "operating_point.x_min")
        if not 0.0 <= p.p_miss <= 1.0:
            raise ValidationError(f"must lie in [0, 1], got {p.p_miss!r}", "operating_point.p_miss")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "Scenario":
        schemas.validate(doc, schemas.SCENARIO, "scenario")
        severity = Severity(doc["severity"]) if "severity" in doc else None
        if "top_qso" in doc:
            top = Qso.from_dict(doc["top_qso"], "top_qso")
        elif severity is not None and severity.default_qso is not None:
            top = severity.default_qso
        else:
            raise ValidationError("missing, and the severity has no default QSO", "top_qso")
        det = doc["detection"]
        kin = None
        if "kinematics" in det:
            k = det["kinematics"]
            kin = KinematicProfile(**{
                name: parse_number(v, f"detection.kinematics.{name}") for name, v in k.items()
            })
        op = doc["operating_point"]
        gap = doc["gap"]
        return cls(
            top_qso=top,
            exposure=ExposureProfile.from_dict(doc["exposure"]),
            fault_tree=FaultTree.from_dict(doc["fault_tree"]),
            mlc_event=doc["mlc_event"],
            policy=OperatingPointPolicy(
                op["policy"],
                parse_probability(op["p_miss"], "operating_point.p_miss"),
                op.get("x_min"),
                op.get("prefer", "strictest"),
            ),
            safety_margin=parse_number(gap["safety_margin"], "gap.safety_margin"),
            delta=parse_number(gap["delta"], "gap.delta"),
            n=det.get("n"),
            kinematics=kin,
            severity=severity,
            critical_decimals=gap.get("critical_decimals"),
            binds=tuple(gap.get("binds", ())),
            name=doc.get("name", ""),
        )


@dataclass(frozen=True)
class RequirementRecord:
    id: str
    title: str
    metric: str
    comparator: str
    target: float
    statement: str
    traces_to: tuple[str, ...]
    provenance: str  # parameter expression the target is taken from
    evidence: str = "analysis"  # analysis | design | dataset
    display: str = ""

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ValidationError(f"unknown comparator {self.comparator!r}", f"{self.id}.comparator")
        if not self.traces_to:
            raise ValidationError("traceability must be non-empty", f"{self.id}.traces_to")
        lo, hi = METRIC_RANGES.get(self.metric, (0.0, 1.0))
        if not lo <= self.target <= hi:
            raise ValidationError(f"target {self.target!r} outside [{lo}, {hi}]", f"{self.id}.target")

    def to_dict(self) -> dict:
        return {
            "id": self.id, "title": self.title, "metric": self.metric,
            "comparator": self.comparator, "target": self.target, "statement": self.statement,
            "traces_to": list(self.traces_to), "provenance": self.provenance,
            "evidence": self.evidence, "display": self.display,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RequirementRecord":
        return cls(
            id=d["id"], title=d.get("title", ""), metric=d["metric"],
            comparator=d["comparator"], target=d["target"], statement=d.get("statement", ""),
            traces_to=tuple(d["traces_to"]), provenance=d.get("provenance", ""),
            evidence=d.get("evidence", "analysis"), display=d.get("display", ""),
        )


# thresholds are integer frame counts; everything else is a rate/probability
METRIC_RANGES = {
    "confirmation_threshold": (0, math.inf),
    "rejection_threshold": (0, math.inf),
}


@dataclass(frozen=True)
class RequirementSet:
    records: tuple[RequirementRecord, ...] = ()
    parameters: Mapping[str, Any] = field(default_factory=dict)
    frontier: tuple[FrontierPoint, ...] = ()
    anchors: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    name: str = ""
    schema_version: int = SCHEMA_VERSION

    def by_id(self, rid: str) -> RequirementRecord:
        for r in self.records:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def by_metric(self, metric: str) -> RequirementRecord:
        for r in self.records:
            if r.metric == metric:
                return r
        raise KeyError(metric)

    def trace_chain(self, rid: str) -> list[str]:
        """Ids visited walking ``traces_to`` (first link) up to a root anchor."""
        links = {r.id: r.traces_to for r in self.records}
        links.update(self.anchors)
        chain, cur = [rid], rid
        while links.get(cur):
            cur = links[cur][0]
            if cur in chain:
                raise ValidationError(f"trace cycle through {cur!r}", "traces_to")
            chain.append(cur)
        return chain

    def reaches(self, rid: str, target: str = TOP_QSO_ID) -> bool:
        """Whether any trace path from ``rid`` ends at ``target``."""
        links = {r.id: r.traces_to for r in self.records}
        links.update(self.anchors)
        seen, stack = set(), [rid]
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(links.get(cur, ()))
        return False

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "parameters": dict(self.parameters),
            "frontier": [
                {"x_min": f.x_min, "y_min": f.y_min, "p_miss_crit": f.p_miss_crit}
                for f in self.frontier
            ],
            "anchors": {k: list(v) for k, v in self.anchors.items()},
            "records": [r.to_dict() for r in sorted(self.records, key=lambda r: r.id)],
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RequirementSet":
        schemas.validate(doc, schemas.REQUIREMENT_SET, "requirements")
        return cls(
            records=tuple(RequirementRecord.from_dict(r) for r in doc["records"]),
            parameters=dict(doc.get("parameters", {})),
            frontier=tuple(FrontierPoint(**f) for f in doc.get("frontier", ())),
            anchors={k: tuple(v) for k, v in doc.get("anchors", {}).items()},
            name=doc.get("name", ""),
            schema_version=doc["schema_version"],
        )


def _fmt(x: float, sig: int = 6) -> str:
    return f"{x:.{sig}g}"


def _choose_operating_point(frontier: Sequence[FrontierPoint], policy: OperatingPointPolicy) -> FrontierPoint:
    ok = [f for f in frontier if f.p_miss_crit > policy.p_miss]
    if not ok:
        best = max(frontier, key=lambda f: f.p_miss_crit)
        raise InfeasibleError(
            f"no confirmation threshold tolerates p_miss = {policy.p_miss:g}; the loosest "
            f"(x_min = {best.x_min}) allows at most {best.p_miss_crit:.6g}",
            constraint="operating_point.p_miss",
        )
    if policy.prefer == "loosest":
        return min(ok, key=lambda f: f.x_min)
    return max(ok, key=lambda f: f.x_min)


def derive_requirements(s: Scenario) -> RequirementSet:
    validate_budgets(s.fault_tree, s.top_qso, s.exposure)
    budget = s.fault_tree.nodes[s.mlc_event].budget
    q_tr = normalize_qso(budget, s.exposure, ExposureUnit.PER_ENCOUNTER)
    q = q_tr.value
    if q <= 0.0:
        raise InfeasibleError("the MLC budget is zero; no detector can meet it", s.mlc_event)

    window = None
    n = s.n
    if s.kinematics is not None:
        window, n_kin = detection_vector_size(s.kinematics)
        if n is None:
            n = n_kin
        elif n != n_kin:
            raise ValidationError(
                f"explicit n = {n} disagrees with the kinematic sizing n = {n_kin}", "detection.n"
            )

    frontier = tuple(admissible_frontier(n, q))
    p_miss = s.policy.p_miss
    if s.policy.kind == "explicit":
        x_min = s.policy.x_min
        if not 1 <= x_min <= n:
            raise ValidationError(f"must lie in [1, {n}], got {x_min}", "operating_point.x_min")
        point = next(f for f in frontier if f.x_min == x_min)
    else:
        point = _choose_operating_point(frontier, s.policy)
        x_min = point.x_min
    y_min = n - x_min + 1

    model = ConfirmationModel.from_miss(n, x_min, p_miss)
    p_fail = prob_reject(model)
    if not p_fail < q:
        raise InfeasibleError(
            f"P(T=0) = {p_fail:.6g} at x_min = {x_min}, p_miss = {p_miss:g} does not stay "
            f"below q_tr = {q:.6g}",
            constraint="operating_point",
        )

    p_crit = point.p_miss_crit
    p_crit_used = p_crit if s.critical_decimals is None else round(p_crit, s.critical_decimals)
    gap = GapBound.derive(s.safety_margin, p_crit_used, p_miss, s.delta)
    m_t = tolerable_miss_ratio(n, p_miss)
    p_hit = 1.0 - p_miss

    ev = f"FTA-{s.mlc_event}"
    r01, r02, r03, r04, r05, r06, r07, r08, r09, r10 = (
        "REQ-01-MLC-SAFETY", "REQ-02-MLC-FUNCTIONAL", "REQ-03-MLC-CONFIRM",
        "REQ-04-MLC-REJECT", "REQ-05-MLSD-SAFETY", "REQ-06-MLSD-FUNCTIONAL",
        "REQ-07-MLSD-MISS-RATIO", "REQ-08-MLSD-GENERALIZATION", "REQ-09-MLSD-FNR",
        "REQ-10-MLSD-TPR",
    )
    records = (
        RequirementRecord(
            r01, "Confirmation-level failure bound", "prob_no_confirm", "<", q,
            f"P(T=0) < {_fmt(q)} per encounter with a present sign.",
            (ev, TOP_QSO_ID), "q_tr", "analysis", _fmt(q),
        ),
        RequirementRecord(
            r02, "Confirmation-level success bound", "prob_confirm", ">=", 1.0 - q,
            f"P(T=1) ≥ {_fmt(1.0 - q)} per encounter with a present sign.",
            (r01,), "1 - q_tr", "analysis", _fmt(1.0 - q),
        ),
        RequirementRecord(
            r03, "Confirmation threshold", "confirmation_threshold", "<=", x_min,
            f"T = 1 for every {n}-frame vector holding {x_min} or more hits, "
            f"regardless of their positions.",
            (r01,), "x_min", "design", str(x_min),
        ),
        RequirementRecord(
            r04, "Rejection threshold", "rejection_threshold", "<=", y_min,
            f"T = 0 for every {n}-frame vector holding {y_min} or more misses, "
            f"regardless of their positions.",
            (r01, r03), "n - x_min + 1", "design", str(y_min),
        ),
        RequirementRecord(
            r05, "Per-frame miss bound", "p_miss", "<=", p_miss,
            f"p_miss ≤ {_fmt(p_miss)} for each frame showing a sign.",
            (r01, r04), "p_miss", "dataset", _fmt(p_miss),
        ),
        RequirementRecord(
            r06, "Per-frame hit bound", "p_hit", ">=", p_hit,
            f"p_hit ≥ {_fmt(p_hit)} for each frame showing a sign.",
            (r05,), "1 - p_miss", "dataset", _fmt(p_hit),
        ),
        RequirementRecord(
            r07, "Tolerable miss ratio", "miss_ratio", "<=", m_t,
            f"m_t = (E[M] + sd[M]) / {n} ≤ {_fmt(m_t, 3)} (display value; compliance "
            f"uses {m_t!r}).",
            (r05,), "miss_ratio", "dataset", _fmt(m_t, 3),
        ),
        RequirementRecord(
            r08, "Population risk bound", "generalization_error", "<=", p_crit_used,
            f"R_p ≤ {_fmt(p_crit_used)} under zero-one loss.",
            (r01,), "p_miss_crit_used", "dataset", _fmt(p_crit_used),
        ),
        RequirementRecord(
            r09, "Test-set false-negative rate", "fnr", "<=", p_miss,
            f"FNR ≤ {_fmt(p_miss)} on the held-out test set.",
            (r08, r05), "p_miss", "dataset", _fmt(p_miss),
        ),
        RequirementRecord(
            r10, "Test-set true-positive rate", "tpr", ">=", p_hit,
            f"TPR ≥ {_fmt(p_hit)} on the held-out test set.",
            (r08, r09), "1 - p_miss", "dataset", _fmt(p_hit),
        ),
    )

    parameters = {
        "top_qso": s.top_qso.to_dict(),
        "mlc_event": s.mlc_event,
        "mlc_budget": budget.to_dict(),
        "q_tr": q,
        "q_tr_unit": q_tr.unit.value,
        "n": n,
        "detection_window_s": window,
        "x_min": x_min,
        "y_min": y_min,
        "p_miss": p_miss,
        "p_hit": p_hit,
        "miss_ratio": m_t,
        "prob_no_confirm": p_fail,
        "p_miss_crit": p_crit,
        "p_miss_crit_used": p_crit_used,
        "critical_decimals": s.critical_decimals,
        "safety_margin": gap.safety_margin,
        "epsilon": gap.epsilon,
        "delta": gap.delta,
        "eta": gap.eta,
        "eta_binds": list(s.binds),
    }
    anchors = {ev: (TOP_QSO_ID,), TOP_QSO_ID: ()}
    return RequirementSet(records, parameters, frontier, anchors, s.name)


# -- compliance --------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    value: float
    dataset_size: int | None = None
    dataset_id: str | None = None


@dataclass(frozen=True)
class MeasuredMetrics:
    values: Mapping[str, Measurement]

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "MeasuredMetrics":
        schemas.validate(doc, schemas.MEASURED, "measured")
        default_id = doc.get("dataset_id")
        out = {}
        for name, m in doc["metrics"].items():
            if isinstance(m, Mapping):
                out[name] = Measurement(
                    parse_number(m["value"], f"measured.metrics.{name}.value"),
                    m.get("dataset_size"),
                    m.get("dataset_id", default_id),
                )
            else:
                out[name] = Measurement(parse_number(m, f"measured.metrics.{name}"), None, default_id)
        return cls(out)


@dataclass(frozen=True)
class Verdict:
    id: str
    metric: str
    comparator: str
    target: float
    measured: float | None
    margin: float | None
    verdict: str  # pass | fail | insufficient-evidence | not-evaluated
    reason: str = ""


@dataclass(frozen=True)
class ComplianceReport:
    verdicts: tuple[Verdict, ...]
    eta: int | None

    @property
    def compliant(self) -> bool:
        return all(v.verdict == "pass" for v in self.verdicts if v.verdict != "not-evaluated")

    @property
    def failed(self) -> bool:
        return any(v.verdict in ("fail", "insufficient-evidence") for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "compliant": self.compliant,
            "verdicts": [v.__dict__.copy() for v in self.verdicts],
        }


def _holds(comparator: str, measured: float, target: float) -> bool:
    if comparator == "<":
        return measured < target
    if comparator == "<=":
        return measured <= target
    return measured >= target


def check_compliance(reqs: RequirementSet, m: MeasuredMetrics) -> ComplianceReport:
    """Point comparison of each measured metric plus sample-size adequacy.

    Margins are signed so that a positive margin means headroom.
    """
    eta = reqs.parameters.get("eta")
    binds = set(reqs.parameters.get("eta_binds") or ())
    known = {r.metric for r in reqs.records}
    for name in m.values:
        if name not in known:
            raise ValidationError("no requirement constrains this metric", f"measured.metrics.{name}")

    verdicts = []
    for r in sorted(reqs.records, key=lambda r: r.id):
        meas = m.values.get(r.metric)
        if meas is None:
            verdicts.append(Verdict(r.id, r.metric, r.comparator, r.target, None, None, "not-evaluated"))
            continue
        lo, hi = METRIC_RANGES.get(r.metric, (0.0, 1.0))
        if not lo <= meas.value <= hi:
            raise ValidationError(
                f"measured {meas.value!r} outside [{lo}, {hi}]", f"measured.metrics.{r.metric}"
            )
        margin = meas.value - r.target if r.comparator == ">=" else r.target - meas.value
        if not _holds(r.comparator, meas.value, r.target):
            verdict, reason = "fail", f"{meas.value!r} {r.comparator} {r.target!r} does not hold"
        elif r.evidence == "dataset" and eta and (not binds or meas.dataset_id in binds):
            if meas.dataset_size is None:
                verdict, reason = "insufficient-evidence", "no dataset size given"
            elif meas.dataset_size < eta:
                verdict, reason = (
                    "insufficient-evidence",
                    f"dataset size {meas.dataset_size} < required {eta}",
                )
            else:
                verdict, reason = "pass", ""
        else:
            verdict, reason = "pass", ""
        verdicts.append(Verdict(r.id, r.metric, r.comparator, r.target, meas.value, margin, verdict, reason))
    return ComplianceReport(tuple(verdicts), eta)


# -- rendering ---------------------------------------------------------------


def render(reqs: RequirementSet, format: str = "json") -> str:
    if format == "json":
        return json.dumps(reqs.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if format in ("markdown", "md"):
        return _markdown(reqs)
    raise ValidationError(f"unknown format {format!r}", "format")


def parse(text: str) -> RequirementSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(str(exc), "requirements") from None
    return RequirementSet.from_dict(doc)


def _markdown(reqs: RequirementSet) -> str:
    records = sorted(reqs.records, key=lambda r: r.id)
    out = [f"# Requirements{': ' + reqs.name if reqs.name else ''}", ""]
    if reqs.parameters:
        out += ["## Derived parameters", "", "| parameter | value |", "|---|---|"]
        for k in sorted(reqs.parameters):
            out.append(f"| {k} | {json.dumps(reqs.parameters[k], ensure_ascii=False)} |")
        out.append("")
    out += ["## Requirements", ""]
    if not records:
        out += ["_No requirements._", ""]
    else:
        out += ["| id | title | metric | target | statement |", "|---|---|---|---|---|"]
        for r in records:
            target = f"{_SYMBOL[r.comparator]} {r.display or _fmt(r.target)}"
            out.append(f"| {r.id} | {r.title} | {r.metric} | {target} | {r.statement} |")
        out += ["", "## Traceability", "", "| id | traces to | chain to top QSO |", "|---|---|---|"]
        for r in records:
            chain = " → ".join(reqs.trace_chain(r.id)) if reqs.anchors else ""
            out.append(f"| {r.id} | {', '.join(r.traces_to)} | {chain} |")
        out.append("")
    return "\n".join(out)
