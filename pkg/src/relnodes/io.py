"""Model files, dataset CSVs and report documents.

Model files are single JSON documents::

    {"type": "gaussian-bn" | "discrete-bn" | "gaussian" | "discrete-joint" | "cg-mixture",
     "variables": [...],
     ...type-specific fields...,
     "hidden": [...],            # optional, applied first
     "selection": {name: value}, # optional, applied after hiding
     "column_kinds": {name: "continuous" | "categorical"}}  # optional

Edge coefficients of a ``gaussian-bn`` are keyed ``"Parent->Child"``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .citests import CATEGORICAL, CONTINUOUS, Dataset
from .domain import Domain
from .graphs import Dag
from .models import CGMixture, DiscreteJoint, GaussianModel
from .relevance import RelevanceReport
from .synthesis import DiscreteBn, LinearGaussianBn

MODEL_TYPES = ("gaussian-bn", "discrete-bn", "gaussian", "discrete-joint", "cg-mixture")
CATEGORICAL_MAX_LEVELS = 10
_INT = re.compile(r"^[+]?\d+$")


class ModelFormatError(ValueError):
    pass


@dataclass
class LoadedModel:
    """A model file after hiding and selection have been applied.

    ``distribution`` is what oracles and samplers use; ``bn`` keeps the
    generating network (before hiding/selection) when the file held one.
    """

    type: str
    distribution: Any
    bn: Any = None
    hidden: tuple = ()
    selection: dict = field(default_factory=dict)
    column_kinds: dict = field(default_factory=dict)

    @property
    def domain(self) -> Domain:
        return self.distribution.domain


def _need(doc: Mapping, key: str):
    if key not in doc:
        raise ModelFormatError(f"model file is missing {key!r}")
    return doc[key]


def _per_variable(value, names, what) -> list:
    if isinstance(value, Mapping):
        missing = [n for n in names if n not in value]
        if missing:
            raise ModelFormatError(f"{what} missing for {', '.join(missing)}")
        return [value[n] for n in names]
    value = list(value)
    if len(value) != len(names):
        raise ModelFormatError(f"{what} needs {len(names)} entries")
    return value


def _square(value, n: int) -> np.ndarray:
    a = np.asarray(value, dtype=float)
    if a.size != n * n:
        raise ModelFormatError(f"covariance needs {n * n} entries")
    return a.reshape(n, n)


def edge_key(parent: str, child: str) -> str:
    return f"{parent}->{child}"


def model_from_dict(doc: Mapping) -> LoadedModel:
    """Parse a model document and apply its ``hidden`` / ``selection`` fields."""
    kind = _need(doc, "type")
    if kind not in MODEL_TYPES:
        raise ModelFormatError(f"unknown model type {kind!r}")
    names = [str(v) for v in _need(doc, "variables")]
    try:
        dom = Domain(names)
        bn = None
        if kind in ("gaussian-bn", "discrete-bn"):
            dag = Dag.from_edges(dom, [tuple(e) for e in doc.get("edges", [])])
        if kind == "gaussian-bn":
            coef_doc = doc.get("coefficients", {})
            coef = {}
            for p, c in dag.edges:
                key = edge_key(names[p], names[c])
                if key not in coef_doc:
                    raise ModelFormatError(f"no coefficient for edge {key}")
                coef[(p, c)] = float(coef_doc[key])
            noise = _per_variable(_need(doc, "noise_variances"), names, "noise variance")
            icpt = _per_variable(doc["means"], names, "mean") if "means" in doc else None
            bn = LinearGaussianBn(dag, coef, tuple(noise), icpt)
            dist = bn.to_gaussian()
        elif kind == "discrete-bn":
            cards = [int(c) for c in _per_variable(_need(doc, "cardinalities"), names, "cardinality")]
            cpts = _per_variable(_need(doc, "cpts"), names, "CPT")
            bn = DiscreteBn(dag, cards, cpts)
            dist = bn.to_joint()
        elif kind == "gaussian":
            dist = GaussianModel(dom, _need(doc, "mean"), _square(_need(doc, "cov"), len(names)))
        elif kind == "discrete-joint":
            cards = [int(c) for c in _per_variable(_need(doc, "cardinalities"), names, "cardinality")]
            dist = DiscreteJoint(dom, cards, _need(doc, "probs"))
        else:
            comps = [GaussianModel(dom, _need(c, "mean"), _square(_need(c, "cov"), len(names)))
                     for c in _need(doc, "components")]
            dist = CGMixture(comps, _need(doc, "weights"), str(doc.get("selector", "Z")))
    except ModelFormatError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ModelFormatError(f"invalid {kind} model: {exc}") from exc

    hidden = tuple(str(h) for h in doc.get("hidden", []))
    selection = dict(doc.get("selection", {}))
    dist = apply_hide_and_select(dist, hidden, selection)
    kinds = dict(doc.get("column_kinds", {}))
    return LoadedModel(kind, dist, bn, hidden, selection, kinds)


def apply_hide_and_select(dist, hidden=(), selection: Mapping | None = None):
    """Marginalize out ``hidden``, then condition on ``selection``."""
    selection = dict(selection or {})
    if hidden:
        dist.domain.varset(hidden)
        keep = [n for n in dist.domain.names if n not in set(hidden)]
        if isinstance(dist, CGMixture):
            if dist.domain.names[dist.selector] in hidden:
                raise ModelFormatError("the selector of a cg-mixture cannot be hidden")
            keep = [n for n in keep if n != dist.domain.names[dist.selector]]
        dist = dist.marginalize(keep)
    if selection:
        dist.domain.varset(list(selection))
        if isinstance(dist, CGMixture):
            sel = dist.domain.names[dist.selector]
            if set(selection) != {sel}:
                raise ModelFormatError("a cg-mixture can only be selected on its selector")
            k = int(selection[sel])
            if not 0 <= k < dist.cardinality or dist.weights[k] == 0:
                raise ModelFormatError(f"selector value {k} has zero probability")
            return dist.components[k]
        dist = dist.condition(selection)
    return dist


def load_model(path) -> LoadedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    return model_from_dict(doc)


def model_to_dict(model) -> dict:
    """Serialise a BN, Gaussian, discrete joint or CG mixture."""
    if isinstance(model, LinearGaussianBn):
        names = model.domain.names
        return {
            "type": "gaussian-bn",
            "variables": list(names),
            "edges": [list(e) for e in model.dag.edge_names()],
            "coefficients": {edge_key(names[p], names[c]): w for (p, c), w in sorted(model.coefficients.items())},
            "noise_variances": dict(zip(names, model.noise_variances)),
            "means": dict(zip(names, model.intercepts)),
        }
    if isinstance(model, DiscreteBn):
        names = model.domain.names
        return {
            "type": "discrete-bn",
            "variables": list(names),
            "edges": [list(e) for e in model.dag.edge_names()],
            "cardinalities": dict(zip(names, model.cardinalities)),
            "cpts": {n: cpt.tolist() for n, cpt in zip(names, model.cpts)},
        }
    if isinstance(model, GaussianModel):
        return {"type": "gaussian", "variables": list(model.domain.names),
                "mean": model.mean.tolist(), "cov": model.cov.tolist()}
    if isinstance(model, DiscreteJoint):
        return {"type": "discrete-joint", "variables": list(model.domain.names),
                "cardinalities": list(model.cardinalities), "probs": model.probs.tolist()}
    if isinstance(model, CGMixture):
        return {
            "type": "cg-mixture",
            "variables": list(model.continuous.names),
            "selector": model.domain.names[model.selector],
            "weights": model.weights.tolist(),
            "components": [{"mean": c.mean.tolist(), "cov": c.cov.tolist()} for c in model.components],
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def dumps_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def write_model(path, model, **extra) -> None:
    doc = model_to_dict(model)
    doc.update(extra)
    Path(path).write_text(dumps_json(doc), encoding="utf-8")


# -- datasets ----------------------------------------------------------------

def read_dataset(path, kinds: Mapping[str, str] | None = None) -> Dataset:
    """Read a CSV with a header row of variable names.

    Column kinds come from ``kinds`` when given; otherwise a column whose
    values are all integers with at most 10 distinct levels is categorical.
    """
    kinds = dict(kinds or {})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ModelFormatError(f"{path}: empty file") from None
        raw = [row for row in reader if row]
    if not raw:
        raise ModelFormatError(f"{path}: no data rows")
    dom = Domain(header)
    unknown = set(kinds) - set(header)
    if unknown:
        raise ModelFormatError(f"column kinds given for unknown columns: {', '.join(sorted(unknown))}")
    cols = list(zip(*raw)) if all(len(r) == len(header) for r in raw) else None
    if cols is None:
        raise ModelFormatError(f"{path}: ragged rows")
    values = np.empty((len(raw), len(header)))
    col_kinds = []
    for j, (name, col) in enumerate(zip(header, cols)):
        cells = [c.strip() for c in col]
        try:
            values[:, j] = [float(c) for c in cells]
        except ValueError:
            raise ModelFormatError(f"{path}: non-numeric value in column {name!r}") from None
        kind = kinds.get(name)
        if kind is None:
            integral = all(_INT.match(c) for c in cells)
            kind = CATEGORICAL if integral and len(set(cells)) <= CATEGORICAL_MAX_LEVELS else CONTINUOUS
        if kind not in (CATEGORICAL, CONTINUOUS):
            raise ModelFormatError(f"unknown column kind {kind!r}")
        col_kinds.append(kind)
    try:
        return Dataset(dom, values, tuple(col_kinds))
    except ValueError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


def dataset_to_csv(data: Dataset) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.domain.names)
    cat = [k == CATEGORICAL for k in data.kinds]
    for row in data.rows:
        writer.writerow([str(int(v)) if c else repr(float(v)) for v, c in zip(row, cat)])
    return buf.getvalue()


def write_dataset(path, data: Dataset) -> None:
    Path(path).write_text(dataset_to_csv(data), encoding="utf-8")


# -- reports -----------------------------------------------------------------

def relevance_to_dict(report: RelevanceReport, domain: Domain) -> dict:
    names = domain.names
    out = {
        "targets": [names[i] for i in report.targets],
        "context": [names[i] for i in report.context],
        "relevant": [names[i] for i in report.relevant],
        "irrelevant": [names[i] for i in report.irrelevant],
        "witnesses": {names[k]: [names[i] for i in v] for k, v in report.witnesses.items()},
        "tests_performed": report.tests_performed,
    }
    if report.witness_sets:
        out["witness_sets"] = {names[k]: [names[i] for i in v] for k, v in report.witness_sets.items()}
    return out


@dataclass
class ReportDocument:
    """What every CLI command writes: the configuration it ran with, its
    result, warnings, and (optionally) wall-clock timing."""

    command: str
    config: dict
    result: dict
    warnings: list = field(default_factory=list)
    tests_performed: int | None = None
    timing: float | None = None

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.timing is None:
            del doc["timing"]
        return doc

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ReportDocument":
        return cls(doc["command"], doc["config"], doc["result"], list(doc.get("warnings", [])),
                   doc.get("tests_performed"), doc.get("timing"))

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))
