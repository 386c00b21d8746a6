"""Quantitative safety objectives, exposure normalization and fault trees.

Fault trees here are strict trees (every non-root node has exactly one
parent) over mutually independent basic events, so gate probabilities can be
combined bottom-up exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

from ._parse import check_probability, parse_number, parse_probability
from .confirmation import binomial_tail_geq
from .errors import InfeasibleError, ValidationError


class ExposureUnit(str, enum.Enum):
    PER_FLIGHT_HOUR = "per-flight-hour"
    PER_FLIGHT = "per-flight"
    PER_ENCOUNTER = "per-encounter"


@dataclass(frozen=True)
class Qso:
    """A probability target bound to an explicit exposure unit."""

    value: float
    unit: ExposureUnit

    def __post_init__(self):
        check_probability(self.value, "qso.value")
        try:
            object.__setattr__(self, "unit", ExposureUnit(self.unit))
        except ValueError:
            raise ValidationError(f"unknown exposure unit {self.unit!r}", "qso.unit") from None

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], field: str = "qso") -> "Qso":
        if "unit" not in d:
            raise ValidationError("a QSO needs an explicit unit", f"{field}.unit")
        return cls(parse_probability(d.get("value"), f"{field}.value"), d["unit"])

    def to_dict(self) -> dict:
        return {"value": self.value, "unit": self.unit.value}


@dataclass(frozen=True)
class ExposureProfile:
    avg_flight_hours: float
    encounters_per_flight: float

    def __post_init__(self):
        for name in ("avg_flight_hours", "encounters_per_flight"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"must be strictly positive, got {v!r}", f"exposure.{name}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExposureProfile":
        return cls(
            parse_number(d.get("avg_flight_hours"), "exposure.avg_flight_hours"),
            parse_number(d.get("encounters_per_flight"), "exposure.encounters_per_flight"),
        )

    def per_flight_factor(self, unit: ExposureUnit) -> float:
        """Multiplier taking a rate in ``unit`` to a per-flight probability."""
        unit = ExposureUnit(unit)
        if unit is ExposureUnit.PER_FLIGHT_HOUR:
            return self.avg_flight_hours
        if unit is ExposureUnit.PER_ENCOUNTER:
            return self.encounters_per_flight
        return 1.0


class Severity(str, enum.Enum):
    MINOR = "MINOR"
    MAJOR = "MAJOR"
    HAZARDOUS = "HAZARDOUS"
    CATASTROPHIC = "CATASTROPHIC"

    @property
    def default_qso(self) -> Qso | None:
        # Only the MINOR objective is fixed here; the other classes depend on
        # the applicable airworthiness category and must be supplied.
        if self is Severity.MINOR:
            return Qso(1e-3, ExposureUnit.PER_FLIGHT_HOUR)
        return None


def normalize_qso(q: Qso, profile: ExposureProfile, target_unit: ExposureUnit | str) -> Qso:
    """Re-express ``q`` in ``target_unit``; the result is clamped to [0, 1]."""
    target_unit = ExposureUnit(target_unit)
    if target_unit is q.unit:
        return q
    value = q.value * profile.per_flight_factor(q.unit) / profile.per_flight_factor(target_unit)
    return Qso(min(1.0, max(0.0, value)), target_unit)


# -- fault trees -------------------------------------------------------------


class GateKind(str, enum.Enum):
    AND = "AND"
    OR = "OR"
    KOFN = "KOFN"


class EventCategory(str, enum.Enum):
    HARDWARE_RANDOM = "hardware-random"
    ML_INSUFFICIENCY = "ml-insufficiency"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    children: tuple[str, ...]
    k: int | None = None
    description: str = ""


@dataclass(frozen=True)
class BasicEvent:
    probability: float | None = None
    category: EventCategory = EventCategory.HARDWARE_RANDOM
    budget: Qso | None = None
    description: str = ""


Node = Union[Gate, BasicEvent]


@dataclass(frozen=True)
class FaultTree:
    root: str
    nodes: Mapping[str, Node] = field(default_factory=dict)

    def __post_init__(self):
        _validate_tree(self)

    @property
    def basic_events(self) -> list[str]:
        return [i for i in self._postorder() if isinstance(self.nodes[i], BasicEvent)]

    def _postorder(self) -> list[str]:
        out: list[str] = []

        def walk(i: str):
            node = self.nodes[i]
            if isinstance(node, Gate):
                for c in node.children:
                    walk(c)
            out.append(i)

        walk(self.root)
        return out

    def parent_of(self, node_id: str) -> str | None:
        for i, node in self.nodes.items():
            if isinstance(node, Gate) and node_id in node.children:
                return i
        return None

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "FaultTree":
        if "root" not in doc:
            raise ValidationError("missing", "tree.root")
        raw = doc.get("nodes")
        if not isinstance(raw, Mapping):
            raise ValidationError("must be an object keyed by node id", "tree.nodes")
        nodes: dict[str, Node] = {}
        for node_id, spec in raw.items():
            where = f"tree.nodes.{node_id}"
            if not isinstance(spec, Mapping):
                raise ValidationError("must be an object", where)
            kind = str(spec.get("type", "")).upper().replace("-", "").replace("_", "")
            if kind in ("AND", "OR", "KOFN"):
                children = spec.get("children")
                if not isinstance(children, list) or not all(isinstance(c, str) for c in children):
                    raise ValidationError("must be a list of node ids", f"{where}.children")
                k = spec.get("k")
                if kind == "KOFN":
                    if isinstance(k, bool) or not isinstance(k, int):
                        raise ValidationError("KOFN gates need an integer k", f"{where}.k")
                nodes[node_id] = Gate(GateKind(kind), tuple(children), k, spec.get("description", ""))
            elif kind == "BASIC":
                p = spec.get("probability")
                budget = spec.get("budget")
                try:
                    category = EventCategory(spec.get("category", "hardware-random"))
                except ValueError:
                    raise ValidationError(
                        f"unknown category {spec.get('category')!r}", f"{where}.category"
                    ) from None
                nodes[node_id] = BasicEvent(
                    probability=None if p is None else parse_probability(p, f"{where}.probability"),
                    category=category,
                    budget=None if budget is None else Qso.from_dict(budget, f"{where}.budget"),
                    description=spec.get("description", ""),
                )
            else:
                raise ValidationError(
                    f"type must be AND, OR, KOFN or BASIC, got {spec.get('type')!r}", f"{where}.type"
                )
        return cls(str(doc["root"]), nodes)

    def to_dict(self) -> dict:
        nodes = {}
        for i, node in self.nodes.items():
            if isinstance(node, Gate):
                d: dict[str, Any] = {"type": node.kind.value, "children": list(node.children)}
                if node.kind is GateKind.KOFN:
                    d["k"] = node.k
            else:
                d = {"type": "BASIC", "category": node.category.value}
                if node.probability is not None:
                    d["probability"] = repr(node.probability)
                if node.budget is not None:
                    d["budget"] = {"value": repr(node.budget.value), "unit": node.budget.unit.value}
            if node.description:
                d["description"] = node.description
            nodes[i] = d
        return {"root": self.root, "nodes": nodes}


def _validate_tree(tree: FaultTree) -> None:
    nodes = tree.nodes
    if tree.root not in nodes:
        raise ValidationError(f"root {tree.root!r} is not a node", "tree.root")
    parents: dict[str, list[str]] = {i: [] for i in nodes}
    for i, node in nodes.items():
        if isinstance(node, Gate):
            if not node.children:
                raise ValidationError("gate has no children", f"tree.nodes.{i}.children")
            for c in node.children:
                if c not in nodes:
                    raise ValidationError(f"unknown child {c!r}", f"tree.nodes.{i}.children")
                parents[c].append(i)
            if node.kind is GateKind.KOFN:
                if node.k is None or not 1 <= node.k <= len(node.children):
                    raise ValidationError(
                        f"k must satisfy 1 <= k <= {len(node.children)}, got {node.k!r}",
                        f"tree.nodes.{i}.k",
                    )
        elif isinstance(node, BasicEvent):
            if node.probability is not None:
                check_probability(node.probability, f"tree.nodes.{i}.probability")
        else:
            raise ValidationError(f"unsupported node {node!r}", f"tree.nodes.{i}")

    # cycle check before the parent-count check so a cycle through the root
    # is reported as such
    state: dict[str, int] = {}

    def visit(i: str):
        state[i] = 1
        node = nodes[i]
        if isinstance(node, Gate):
            for c in node.children:
                if state.get(c) == 1:
                    raise ValidationError(f"cycle through {c!r}", f"tree.nodes.{i}.children")
                if c not in state:
                    visit(c)
        state[i] = 2

    visit(tree.root)
    for i, ps in parents.items():
        if i == tree.root:
            if ps:
                raise ValidationError(f"root has parent(s) {ps}", "tree.root")
        elif len(ps) != 1:
            what = "is unreachable from the root" if not ps else f"has {len(ps)} parents {ps}"
            raise ValidationError(f"node {what}", f"tree.nodes.{i}")


def kofn_probability(probs: list[float], k: int) -> float:
    """P(at least k of the independent events occur)."""
    if all(p == probs[0] for p in probs):
        return binomial_tail_geq(len(probs), k, probs[0])
    # dist[j] = P(exactly j events among those seen so far)
    dist = [1.0] + [0.0] * len(probs)
    for p in probs:
        for j in range(len(probs), 0, -1):
            dist[j] = dist[j] * (1.0 - p) + dist[j - 1] * p
        dist[0] *= 1.0 - p
    return min(1.0, math.fsum(dist[k:]))


def node_probabilities(
    tree: FaultTree, overrides: Mapping[str, float] | None = None
) -> dict[str, float]:
    """Probability of every node, basic events and gates alike."""
    overrides = dict(overrides or {})
    for i, p in overrides.items():
        if i not in tree.nodes or not isinstance(tree.nodes[i], BasicEvent):
            raise ValidationError(f"{i!r} is not a basic event", "overrides")
        check_probability(p, f"overrides.{i}")
    out: dict[str, float] = {}
    for i in tree._postorder():
        node = tree.nodes[i]
        if isinstance(node, BasicEvent):
            p = overrides.get(i, node.probability)
            if p is None:
                raise ValidationError("basic event has no probability", f"tree.nodes.{i}.probability")
            out[i] = float(p)
            continue
        probs = [out[c] for c in node.children]
        if node.kind is GateKind.AND:
            out[i] = math.prod(probs)
        elif node.kind is GateKind.OR:
            # log-space complement keeps precision for tiny probabilities
            out[i] = -math.expm1(math.fsum(math.log1p(-p) if p < 1.0 else -math.inf for p in probs))
        else:
            out[i] = kofn_probability(probs, node.k)
    return out


def evaluate_fault_tree(tree: FaultTree, overrides: Mapping[str, float] | None = None) -> float:
    """Top-event probability assuming independent basic events."""
    return node_probabilities(tree, overrides)[tree.root]


def _subtree_weight(tree: FaultTree, i: str, weights: Mapping[str, float]) -> float:
    node = tree.nodes[i]
    if isinstance(node, BasicEvent):
        return weights[i]
    return sum(_subtree_weight(tree, c, weights) for c in node.children)


def allocate_budgets(
    tree: FaultTree, top_qso: Qso, weights: Mapping[str, float]
) -> dict[str, Qso]:
    """Split ``top_qso`` over the basic events, top-down, by weight.

    OR gates hand out first-order (additive) shares, AND gates multiplicative
    shares ``B ** (w_i / W)``, K-of-N gates a common scale found by
    bisection.  The allocation is then re-evaluated exactly and rejected if
    the top event exceeds ``top_qso``.
    """
    for e in tree.basic_events:
        if e not in weights:
            raise ValidationError("no weight given", f"weights.{e}")
        w = weights[e]
        if not (isinstance(w, (int, float)) and math.isfinite(w) and w >= 0):
            raise ValidationError(f"must be a non-negative number, got {w!r}", f"weights.{e}")

    gate_budget: dict[str, float] = {}
    leaf_budget: dict[str, float] = {}

    def assign(i: str, budget: float):
        node = tree.nodes[i]
        if isinstance(node, BasicEvent):
            leaf_budget[i] = budget
            return
        gate_budget[i] = budget
        ws = [_subtree_weight(tree, c, weights) for c in node.children]
        for c, w in zip(node.children, ws):
            if w == 0:
                raise InfeasibleError(
                    f"gate {i!r}: child {c!r} carries zero weight and would get a zero budget",
                    constraint=i,
                )
        total = sum(ws)
        # shares are shaved by a few ulps so rounding cannot push the
        # re-evaluated gate above its budget
        if node.kind is GateKind.OR:
            shares = [budget * w / total * (1.0 - 1e-14) for w in ws]
        elif node.kind is GateKind.AND:
            shares = [budget ** (w / total) * (1.0 - 1e-14) for w in ws]
        else:
            base = [w / max(ws) for w in ws]
            if kofn_probability(base, node.k) <= budget:
                scale = 1.0
            else:
                lo, hi = 0.0, 1.0
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if kofn_probability([mid * b for b in base], node.k) <= budget:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-15:
                        break
                scale = lo
            shares = [scale * b for b in base]
        for c, s in zip(node.children, shares):
            assign(c, min(1.0, s))

    assign(tree.root, top_qso.value)
    evaluated = node_probabilities(tree, leaf_budget)
    if evaluated[tree.root] > top_qso.value:
        worst = next(
            i for i in tree._postorder()[::-1]
            if i in gate_budget and evaluated[i] > gate_budget[i]
        )
        raise InfeasibleError(
            f"gate {worst!r}: allocated budgets evaluate to {evaluated[worst]:.6g} "
            f"> {gate_budget[worst]:.6g}",
            constraint=worst,
        )
    return {i: Qso(b, top_qso.unit) for i, b in leaf_budget.items()}


def validate_budgets(tree: FaultTree, top_qso: Qso, profile: ExposureProfile) -> float:
    """Bottom-up check that the basic-event budgets meet the top QSO.

    Budgets may be stated in any unit; everything is compared per flight.
    Returns the evaluated per-flight top probability.
    """
    overrides = {}
    for i in tree.basic_events:
        b = tree.nodes[i].budget
        if b is None:
            raise ValidationError("basic event has no budget", f"tree.nodes.{i}.budget")
        overrides[i] = normalize_qso(b, profile, ExposureUnit.PER_FLIGHT).value
    top = evaluate_fault_tree(tree, overrides)
    limit = normalize_qso(top_qso, profile, ExposureUnit.PER_FLIGHT).value
    if top > limit:
        raise InfeasibleError(
            f"fault-tree budgets give {top:.6g} per flight, above the top QSO {limit:.6g}",
            constraint=tree.root,
        )
    return top
