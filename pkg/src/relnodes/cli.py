"""Command-line interface.

Exit codes: 0 success, 1 internal failure, 2 bad input (unknown variable
names, malformed files, inconsistent flags).
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .axioms import AXIOMS, check_axiom_detailed, check_closure
from .citests import CATEGORICAL, CONTINUOUS, TEST_KINDS, Dataset, TesterConfig, exact_tester, make_tester
from .domain import UnknownVariableError
from .graphs import relevant_via_ug, ug_edge_exclusion, ug_via_markov_boundaries
from .io import (
    ModelFormatError,
    ReportDocument,
    apply_hide_and_select,
    dataset_to_csv,
    dumps_json,
    load_model,
    model_to_dict,
    read_dataset,
    relevance_to_dict,
)
from .models import DiscreteJoint
from .relevance import find_relevant_with_context, oracle_relevant, purge_context
from .synthesis import random_dag, random_discrete_bn, random_linear_gaussian_bn, sample

log = logging.getLogger("relnodes")


class UsageError(ValueError):
    pass


def _names(text: str | None) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _value(text: str):
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse value {text!r}") from None


def _assignments(items: list[str] | None) -> dict:
    out = {}
    for item in items or []:
        for part in _names(item):
            if "=" not in part:
                raise UsageError(f"expected NAME=VALUE, got {part!r}")
            name, val = part.split("=", 1)
            out[name.strip()] = _value(val)
    return out


def _config_echo(args) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- building testers --------------------------------------------------------

def _kind_overrides(args) -> dict:
    kinds = {n: CATEGORICAL for n in _names(getattr(args, "categorical", None))}
    kinds.update({n: CONTINUOUS for n in _names(getattr(args, "continuous", None))})
    return kinds


def _source(args):
    """Resolve --data / --model (+ --samples) into a tester.

    Returns ``(tester, dataset_or_None, warnings)``.
    """
    if bool(args.data) == bool(args.model):
        raise UsageError("give exactly one of --data / --model")
    test = "oracle" if getattr(args, "oracle", False) else args.test
    config = TesterConfig(alpha=args.alpha, kind=test)
    warnings = []
    if args.data:
        if test == "oracle":
            raise UsageError("the oracle test needs --model, not --data")
        data = read_dataset(args.data, _kind_overrides(args))
        return make_tester(data, config), data, warnings
    loaded = load_model(args.model)
    if args.samples:
        data = sample(loaded.distribution, args.samples, args.seed)
        if loaded.column_kinds or _kind_overrides(args):
            kinds = dict(zip(data.domain.names, data.kinds))
            kinds.update(loaded.column_kinds)
            kinds.update(_kind_overrides(args))
            data = Dataset(data.domain, data.rows, tuple(kinds[n] for n in data.domain.names))
        if test == "oracle":
            raise UsageError("--samples draws data; pick a data test with --test")
        return make_tester(data, config), data, warnings
    if test not in (None, "oracle"):
        raise UsageError(f"--test {test} needs data: pass --data, or --samples with --model")
    return exact_tester(loaded.distribution, config.oracle_tolerance), None, warnings


def _low_power_warning(tester) -> list[str]:
    if tester.low_power:
        return [f"{len(tester.low_power)} test(s) had too little data and defaulted to independent"]
    return []


# -- commands ------------------------------------------------------------------

def cmd_relevant(args):
    tester, data, warnings = _source(args)
    dom = tester.domain
    report = find_relevant_with_context(tester, dom.varset(_names(args.targets)), dom.varset(_names(args.context)))
    result = relevance_to_dict(report, dom)
    warnings += _low_power_warning(tester)
    files = {}
    if args.plot:
        from .plotting import plot_relevance
        files[args.plot] = lambda p: plot_relevance(result, p, dom.names)
    return ReportDocument("relevant", _config_echo(args), result, warnings, report.tests_performed), files


def cmd_purge(args):
    tester, data, warnings = _source(args)
    dom = tester.domain
    targets, context = dom.varset(_names(args.targets)), dom.varset(_names(args.context))
    kept, audit = purge_context(tester, targets, context)
    final = find_relevant_with_context(tester, targets, kept)
    names = dom.names
    optimal = sorted(set(targets) | set(kept) | set(final.relevant))
    result = {
        "targets": [names[i] for i in targets],
        "context": [names[i] for i in context],
        "purged_context": [names[i] for i in kept],
        "removed": [
            {"node": names[s.removed], "context_after": [names[i] for i in s.context_after],
             "relevant_without_it": [names[i] for i in s.evidence]}
            for s in audit
        ],
        "relevance": relevance_to_dict(final, dom),
        "optimal_domain": [names[i] for i in optimal],
    }
    warnings += _low_power_warning(tester)
    return ReportDocument("purge", _config_echo(args), result, warnings, tester.computed), {}


def cmd_ug(args):
    tester, data, warnings = _source(args)
    dom = tester.domain
    n = len(dom)
    if data is not None and data.n < 5 * n:
        warnings.append(f"only {data.n} rows for {n} variables; large conditioning sets make these tests unreliable")
    if args.method == "edge-exclusion":
        g = ug_edge_exclusion(tester)
    else:
        g = ug_via_markov_boundaries(tester)
        names = dom.names
        warnings += [f"asymmetric Markov boundary membership: {names[a]}/{names[b]}" for a, b in g.flagged]
    result = {"method": args.method, "variables": list(dom.names), "edges": [list(e) for e in g.edge_names()]}
    targets = _names(args.targets)
    if targets:
        rel = relevant_via_ug(g, dom.varset(targets))
        result["targets"] = targets
        result["relevant"] = dom.names_of(rel)
    warnings += _low_power_warning(tester)
    files = {}
    if args.dot:
        files[args.dot] = g.to_dot()
    if args.plot:
        from .plotting import plot_ug
        files[args.plot] = lambda p: plot_ug(dom.names, g.edge_names(), p, result.get("relevant", ()), targets)
    return ReportDocument("ug", _config_echo(args), result, warnings, tester.computed), files


def cmd_oracle(args):
    loaded = load_model(args.model)
    tester = exact_tester(loaded.distribution)
    dom = tester.domain
    targets, context = dom.varset(_names(args.targets)), dom.varset(_names(args.context))
    report = oracle_relevant(loaded.distribution, targets, context)
    result = relevance_to_dict(report, dom)
    if args.compare:
        frontier = find_relevant_with_context(tester, targets, context)
        a, b = set(report.relevant), set(frontier.relevant)
        result["comparison"] = {
            "frontier_relevant": dom.names_of(sorted(b)),
            "agree": a == b,
            "only_oracle": dom.names_of(sorted(a - b)),
            "only_frontier": dom.names_of(sorted(b - a)),
        }
    return ReportDocument("oracle", _config_echo(args), result, [], report.tests_performed), {}


def cmd_synth(args):
    model_seed, data_seed = np.random.SeedSequence(args.seed).spawn(2)
    if args.kind == "gaussian":
        bn = random_linear_gaussian_bn(args.nodes, args.edge_prob, np.random.default_rng(model_seed))
    else:
        rng = np.random.default_rng(model_seed)
        dag = random_dag(args.nodes, args.edge_prob, rng)
        bn = random_discrete_bn(dag, [args.cardinality] * args.nodes, rng)
    files = {args.out_model: dumps_json(model_to_dict(bn))}
    result = {"kind": args.kind, "variables": list(bn.domain.names),
              "edges": [list(e) for e in bn.dag.edge_names()], "model": args.out_model}
    if args.samples:
        if not args.out_data:
            raise UsageError("--samples needs --out-data")
        data = sample(bn, args.samples, np.random.default_rng(data_seed))
        files[args.out_data] = dataset_to_csv(data)
        result.update(samples=args.samples, data=args.out_data)
    return ReportDocument("synth", _config_echo(args), result, []), files


def _render_violation(v, names) -> dict:
    return {"premises": [s.render(names) for s in v.premises],
            "conclusions": [s.render(names) for s in v.conclusions]}


def cmd_axioms(args):
    loaded = load_model(args.model)
    checks = _names(args.check) or list(AXIOMS)
    if "all" in checks:
        checks = list(AXIOMS)
    bad = [c for c in checks if c not in AXIOMS]
    if bad:
        raise UsageError(f"unknown axiom(s): {', '.join(bad)}; choose from {', '.join(AXIOMS)}")
    hidden = _names(args.hide)
    condition = _assignments(args.condition)
    if args.closure:
        rep = check_closure(loaded.distribution, hidden, condition, args.max_set_size)
        names = loaded.distribution.domain.names

        def group(g, drop=()):
            if g is None:
                return None
            kept = [n for n in names if n not in drop]
            return {a: [_render_violation(v, kept) for v in vs] for a, vs in g.items()}

        result = {
            "hidden": list(rep.hidden),
            "conditioned": rep.conditioned,
            "input": group(rep.input_violations),
            "marginal": group(rep.marginal_violations, rep.hidden),
            "conditional": group(rep.conditional_violations, rep.conditioned),
            "conditional_status": rep.conditional_status,
            "ok": rep.ok,
        }
        return ReportDocument("axioms", _config_echo(args), result, []), {}
    dist = apply_hide_and_select(loaded.distribution, hidden, condition)
    names = dist.domain.names
    result = {"variables": list(names), "checks": {}}
    for axiom in checks:
        res = check_axiom_detailed(dist, axiom, args.max_set_size)
        result["checks"][axiom] = {
            "instances": res.instances,
            "skipped": res.skipped,
            "violations": [_render_violation(v, names) for v in res.violations],
        }
    warnings = []
    if "intersection" in checks and isinstance(dist, DiscreteJoint) and not dist.strictly_positive:
        warnings.append("model is not strictly positive; intersection need not hold")
    return ReportDocument("axioms", _config_echo(args), result, warnings), {}


# -- output --------------------------------------------------------------------

def to_tsv(doc: ReportDocument) -> str:
    """Tab-separated view: one row per variable for relevance-type results,
    one row per edge for graphs, one row per violation for axiom checks."""
    r = doc.result
    rel = r.get("relevance", r)
    lines = []
    if "relevant" in rel and "irrelevant" in rel:
        lines.append("variable\trole\twitness")
        roles = [("target", rel["targets"]), ("context", rel["context"]),
                 ("relevant", rel["relevant"]), ("irrelevant", rel["irrelevant"])]
        for role, members in roles:
            for v in members:
                lines.append(f"{v}\t{role}\t{'>'.join(rel['witnesses'].get(v, []))}")
    elif "edges" in r:
        lines.append("a\tb")
        lines += [f"{a}\t{b}" for a, b in r["edges"]]
    elif "checks" in r:
        lines.append("axiom\tpremises\tconclusions")
        for axiom, res in r["checks"].items():
            for v in res["violations"]:
                lines.append(f"{axiom}\t{'; '.join(v['premises'])}\t{'; '.join(v['conclusions'])}")
    else:
        lines.append("key\tvalue")
        lines += [f"{k}\t{json.dumps(v)}" for k, v in r.items()]
    return "\n".join(lines) + "\n"


def _add_source(p, data_tests=True):
    p.add_argument("--data", help="CSV dataset (header row = variable names)")
    p.add_argument("--model", help="model file (JSON)")
    p.add_argument("--samples", type=int, default=0, help="sample this many rows from --model and test those")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test", choices=TEST_KINDS, default=None,
                   help="independence test (default: oracle for models, inferred from column kinds for data)")
    p.add_argument("--oracle", action="store_true", help="shorthand for --test oracle")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--categorical", help="comma-separated columns to treat as categorical")
    p.add_argument("--continuous", help="comma-separated columns to treat as continuous")


def _add_output(p, plot=True):
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    if plot:
        p.add_argument("--plot", help="render a figure (.png, .svg or .pdf)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relnodes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("relevant", help="find the nodes relevant to the targets")
    _add_source(p)
    p.add_argument("--targets", required=True)
    p.add_argument("--context", default="")
    _add_output(p)
    p.set_defaults(func=cmd_relevant)

    p = sub.add_parser("purge", help="purge context nodes that are themselves irrelevant")
    _add_source(p)
    p.add_argument("--targets", required=True)
    p.add_argument("--context", required=True)
    _add_output(p, plot=False)
    p.set_defaults(func=cmd_purge)

    p = sub.add_parser("ug", help="build the minimal undirected independence map")
    _add_source(p)
    p.add_argument("--method", choices=("edge-exclusion", "iamb"), default="edge-exclusion")
    p.add_argument("--targets", default="", help="also report the nodes connected to these")
    p.add_argument("--dot", help="write the graph in DOT format")
    _add_output(p)
    p.set_defaults(func=cmd_ug)

    p = sub.add_parser("oracle", help="brute-force relevant set from an exact model")
    p.add_argument("--model", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--context", default="")
    p.add_argument("--compare", action="store_true", help="also run the frontier search and diff")
    _add_output(p, plot=False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("synth", help="generate a random model and optional samples")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edge-prob", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("gaussian", "discrete"), default="gaussian")
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--out-model", required=True)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--out-data")
    _add_output(p, plot=False)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("axioms", help="check independence axioms on an exact model")
    p.add_argument("--model", required=True)
    p.add_argument("--hide", default="", help="comma-separated variables to marginalize out")
    p.add_argument("--condition", action="append", help="NAME=VALUE (repeatable or comma-separated)")
    p.add_argument("--check", default="all", help=f"comma-separated subset of: {', '.join(AXIOMS)}")
    p.add_argument("--max-set-size", type=int, default=2)
    p.add_argument("--closure", action="store_true",
                   help="check that composition and weak transitivity survive --hide and --condition")
    _add_output(p, plot=False)
    p.set_defaults(func=cmd_axioms)
    return parser


def _write(path, content) -> None:
    if callable(content):
        content(path)
    else:
        Path(path).write_text(content, encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    started = time.perf_counter()
    try:
        if hasattr(args, "alpha") and not 0 < args.alpha < 1:
            raise UsageError("--alpha must lie in (0, 1)")
        doc, files = args.func(args)
        if args.timing:
            doc.timing = round(time.perf_counter() - started, 6)
        text = doc.to_json() if args.format == "json" else to_tsv(doc)
        for path, content in files.items():
            _write(path, content)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except (UnknownVariableError, ModelFormatError, UsageError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
