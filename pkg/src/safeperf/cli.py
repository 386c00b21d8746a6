"""Command-line entry point.

Exit status: 0 success, 1 validation error, 2 infeasible, 3 compliance
failure (``check`` only).
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib.resources import files
from pathlib import Path
from typing import Any, Sequence

from . import confirmation, generalization, requirements, safety_model, simulation
from ._parse import parse_number, parse_probability
from .errors import InfeasibleError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NONCOMPLIANT = 0, 1, 2, 3

BUILTIN_PREFIX = "builtin:"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _load_json(path: str, what: str) -> Any:
    if path.startswith(BUILTIN_PREFIX):
        name = path[len(BUILTIN_PREFIX):]
        res = files("safeperf").joinpath("data", f"{name}.json")
        if not res.is_file():
            raise ValidationError(f"no bundled document {name!r}", what)
        return json.loads(res.read_text(encoding="utf-8"))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", what) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON ({exc})", what) from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}", "--out") from None


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _int_range(text: str) -> range:
    try:
        a, _, b = text.partition("..")
        lo, hi = int(a), int(b or a)
    except ValueError:
        raise ValidationError(f"expected A..B, got {text!r}", "--ymin") from None
    if lo > hi:
        raise ValidationError(f"empty range {text!r}", "--ymin")
    return range(lo, hi + 1)


def cmd_derive(a) -> int:
    scenario = requirements.Scenario.from_dict(_load_json(a.scenario, "--scenario"))
    reqs = requirements.derive_requirements(scenario)
    _write(requirements.render(reqs, "json"), a.out)
    if a.md:
        _write(requirements.render(reqs, "markdown"), a.md)
    return EXIT_OK


def cmd_frontier(a) -> int:
    q = parse_probability(a.qso, "--qso")
    lines = ["x_min,y_min,p_miss_crit"]
    for f in confirmation.admissible_frontier(a.n, q):
        lines.append(f"{f.x_min},{f.y_min},{f.p_miss_crit:.8e}")
    _write("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_curve(a) -> int:
    grid = confirmation.linear_grid(parse_probability(a.pmiss_max, "--pmiss-max"), a.steps)
    rows = confirmation.curve_dataset(a.n, _int_range(a.ymin), grid)
    _write(confirmation.curve_csv(rows), a.out)
    return EXIT_OK


def cmd_samplesize(a) -> int:
    eta = generalization.required_sample_size(
        parse_number(a.epsilon, "--epsilon"), parse_number(a.delta, "--delta")
    )
    print(eta)
    return EXIT_OK


def cmd_simulate(a) -> int:
    cfg = simulation.SimConfig(
        n=a.n, x_min=a.xmin, p_miss=parse_probability(a.pmiss, "--pmiss"),
        trials=a.trials, seed=a.seed, rho=parse_number(a.rho, "--rho"),
    )
    if cfg.rho == 0.0:
        res = simulation.simulate_iid(cfg, workers=a.workers)
        exact = confirmation.prob_reject(confirmation.ConfirmationModel.from_miss(cfg.n, cfg.x_min, cfg.p_miss))
    else:
        res = simulation.simulate_markov(cfg, workers=a.workers)
        exact = (
            simulation.markov_reject_exact(cfg.n, cfg.x_min, cfg.p_miss, cfg.rho)
            if cfg.n <= simulation.MAX_ENUMERATION_N else None
        )
    out = res.to_dict()
    out["analytic"] = exact
    out["z_score"] = (
        (res.estimate - exact) / res.standard_error
        if exact is not None and res.standard_error > 0 else None
    )
    _write(_dump(out), a.out)
    return EXIT_OK


def cmd_fta(a) -> int:
    tree = safety_model.FaultTree.from_dict(_load_json(a.tree, "--tree"))
    probs = safety_model.node_probabilities(tree)
    _write(_dump({"root": tree.root, "top": probs[tree.root], "nodes": probs}), a.out)
    return EXIT_OK


def cmd_check(a) -> int:
    reqs = requirements.RequirementSet.from_dict(_load_json(a.reqs, "--reqs"))
    measured = requirements.MeasuredMetrics.from_dict(_load_json(a.measured, "--measured"))
    report = requirements.check_compliance(reqs, measured)
    _write(_dump(report.to_dict()), a.out)
    return EXIT_NONCOMPLIANT if report.failed else EXIT_OK


def cmd_render(a) -> int:
    reqs = requirements.RequirementSet.from_dict(_load_json(a.reqs, "--reqs"))
    _write(requirements.render(reqs, a.format), a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="safeperf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("derive", help="derive the requirement set of a scenario")
    s.add_argument("--scenario", required=True,
                   help=f"scenario JSON path, or {BUILTIN_PREFIX}aebs for the bundled fixture")
    s.add_argument("--out", help="requirements JSON (default: stdout)")
    s.add_argument("--md", help="also write a Markdown rendering here")
    s.set_defaults(func=cmd_derive)

    s = sub.add_parser("frontier", help="critical miss probability per confirmation threshold")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--qso", required=True)
    s.set_defaults(func=cmd_frontier)

    s = sub.add_parser("curve", help="P(T=0) over a miss-probability grid, as CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--ymin", required=True, help="rejection thresholds, A..B")
    s.add_argument("--pmiss-max", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("samplesize", help="Hoeffding sample size")
    s.add_argument("--epsilon", required=True)
    s.add_argument("--delta", required=True)
    s.set_defaults(func=cmd_samplesize)

    s = sub.add_parser("simulate", help="Monte Carlo estimate of P(T=0)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--xmin", type=int, required=True)
    s.add_argument("--pmiss", required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--rho", default="0")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fta", help="fault-tree operations")
    fsub = s.add_subparsers(dest="fta_command", required=True)
    e = fsub.add_parser("eval", help="evaluate a fault tree")
    e.add_argument("--tree", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_fta)

    s = sub.add_parser("check", help="check measured metrics against requirements")
    s.add_argument("--reqs", required=True)
    s.add_argument("--measured", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("render", help="render a requirements JSON document")
    s.add_argument("--reqs", required=True)
    s.add_argument("--format", choices=("json", "markdown", "md"), default="markdown")
    s.add_argument("--out")
    s.set_defaults(func=cmd_render)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"safeperf: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleError as exc:
        where = f" [{exc.constraint}]" if exc.constraint else ""
        print(f"safeperf: infeasible{where}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
