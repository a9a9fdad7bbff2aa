"""Exhaustive checks of independence axioms on small exact models."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Mapping

from .citests import exact_tester
from .models import DiscreteJoint, GaussianModel, UnsupportedQuery, ZeroProbabilityError

log = logging.getLogger(__name__)

AXIOMS = (
    "symmetry",
    "decomposition",
    "weak-union",
    "contraction",
    "intersection",
    "composition",
    "weak-transitivity",
)
MAX_ENUM_VARS = 8
MAX_AXIOM_VARS = 6


@dataclass(frozen=True, order=True)
class IndependenceStatement:
    x: tuple
    y: tuple
    z: tuple
    holds: bool

    def normalized(self) -> "IndependenceStatement":
        """Same statement with the two sides in canonical order."""
        if self.y < self.x:
            return IndependenceStatement(self.y, self.x, self.z, self.holds)
        return self

    def render(self, names) -> str:
        side = lambda s: "{" + ",".join(names[i] for i in s) + "}"  # noqa: E731
        rel = "_|_" if self.holds else "not _|_"
        return f"{side(self.x)} {rel} {side(self.y)} | {side(self.z)}"


@dataclass(frozen=True)
class AxiomViolation:
    """An axiom instance whose premises hold but whose conclusion fails.

    For weak transitivity the conclusion is a disjunction, so both
    alternatives are listed (and both fail).
    """

    axiom: str
    premises: tuple
    conclusions: tuple


@dataclass
class AxiomResult:
    axiom: str
    violations: list = field(default_factory=list)
    instances: int = 0
    skipped: int = 0


def _u(*sets) -> tuple:
    return tuple(sorted(set().union(*sets)))


# Each axiom maps roles (X, Y, W, Z) to (premises, conclusions, conclusion is a disjunction).
def _rule(axiom: str, x, y, w, z):
    if axiom == "symmetry":
        return [(x, y, z)], [(y, x, z)], False
    if axiom == "decomposition":
        return [(x, _u(y, w), z)], [(x, y, z)], False
    if axiom == "weak-union":
        return [(x, _u(y, w), z)], [(x, y, _u(z, w))], False
    if axiom == "contraction":
        return [(x, y, _u(z, w)), (x, w, z)], [(x, _u(y, w), z)], False
    if axiom == "intersection":
        return [(x, y, _u(z, w)), (x, w, _u(z, y))], [(x, _u(y, w), z)], False
    if axiom == "composition":
        return [(x, y, z), (x, w, z)], [(x, _u(y, w), z)], False
    if axiom == "weak-transitivity":
        return [(x, y, z), (x, y, _u(z, w))], [(x, w, z), (w, y, z)], True
    raise ValueError(f"unknown axiom {axiom!r}")


def _role_assignments(n: int, max_set_size: int, with_w: bool, singleton_w: bool):
    roles = range(5) if with_w else range(4)  # 0 unused, 1 X, 2 Y, 3 Z, 4 W
    for assign in itertools.product(roles, repeat=n):
        x = tuple(i for i, r in enumerate(assign) if r == 1)
        y = tuple(i for i, r in enumerate(assign) if r == 2)
        z = tuple(i for i, r in enumerate(assign) if r == 3)
        w = tuple(i for i, r in enumerate(assign) if r == 4)
        if not x or not y or len(x) > max_set_size or len(y) > max_set_size:
            continue
        if with_w and (not w or len(w) > (1 if singleton_w else max_set_size)):
            continue
        yield x, y, w, z


def check_axiom_detailed(model, axiom: str, max_set_size: int = 2) -> AxiomResult:
    """Like :func:`check_axiom`, also reporting instance and skip counts.

    Instances touching a query the model cannot decide exactly (possible for
    conditional-Gaussian mixtures) are skipped.
    """
    if axiom not in AXIOMS:
        raise ValueError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")
    tester = exact_tester(model)
    n = len(tester.domain)
    if n > MAX_AXIOM_VARS:
        raise ValueError(f"axiom checks are limited to {MAX_AXIOM_VARS} variables, got {n}")
    result = AxiomResult(axiom)
    assignments = _role_assignments(n, max_set_size, axiom != "symmetry", axiom == "weak-transitivity")
    for x, y, w, z in assignments:
        premises, conclusions, disjunctive = _rule(axiom, x, y, w, z)
        try:
            prem = [IndependenceStatement(a, b, c, tester.independent(a, b, c)) for a, b, c in premises]
            if not all(s.holds for s in prem):
                result.instances += 1
                continue
            concl = [IndependenceStatement(a, b, c, tester.independent(a, b, c)) for a, b, c in conclusions]
        except UnsupportedQuery:
            result.skipped += 1
            continue
        result.instances += 1
        ok = any(s.holds for s in concl) if disjunctive else all(s.holds for s in concl)
        if not ok:
            result.violations.append(AxiomViolation(axiom, tuple(prem), tuple(concl)))
    if result.skipped:
        log.debug("%s: skipped %d undecidable instances", axiom, result.skipped)
    return result


def check_axiom(model, axiom: str, max_set_size: int = 2) -> list[AxiomViolation]:
    """Every instance of ``axiom`` (sets of size <= ``max_set_size``, any
    conditioning set) whose premises hold in ``model`` but whose conclusion
    does not.  Weak transitivity uses a single node ``W``."""
    return check_axiom_detailed(model, axiom, max_set_size).violations


def _subsets(items, lo: int, hi: int):
    for k in range(lo, min(hi, len(items)) + 1):
        yield from itertools.combinations(items, k)


def enumerate_independencies(model, max_set_size: int = 2) -> list[IndependenceStatement]:
    """All statements ``X ? Y | Z`` with ``|X|, |Y| <= max_set_size`` and
    ``Z`` any subset of the rest, decided exactly.

    Each unordered pair of sides appears once (the side holding the lowest
    index first); the list is sorted lexicographically.
    """
    tester = exact_tester(model)
    n = len(tester.domain)
    if n > MAX_ENUM_VARS:
        raise ValueError(f"enumeration is limited to {MAX_ENUM_VARS} variables, got {n}")
    out = []
    everything = tuple(range(n))
    for x in _subsets(everything, 1, max_set_size):
        rest_x = [v for v in everything if v not in x]
        for y in _subsets(rest_x, 1, max_set_size):
            if y[0] < x[0]:
                continue
            rest = [v for v in rest_x if v not in y]
            for z in _subsets(rest, 0, len(rest)):
                try:
                    out.append(IndependenceStatement(x, y, z, tester.independent(x, y, z)))
                except UnsupportedQuery:
                    continue
    return sorted(out)


def same_independencies(m1, m2, max_set_size: int = 2) -> bool:
    d1, d2 = exact_tester(m1).domain, exact_tester(m2).domain
    if d1 != d2:
        raise ValueError("models are defined over different domains")
    return enumerate_independencies(m1, max_set_size) == enumerate_independencies(m2, max_set_size)


@dataclass
class ClosureReport:
    """Composition and weak-transitivity checks before and after hiding or
    conditioning.  ``conditional_status`` is one of ``"not-run"``, ``"ok"``,
    ``"violations"`` or ``"hypothesis-failed"`` (the conditional laws do not
    share their independencies across assignments)."""

    hidden: tuple = ()
    conditioned: dict = field(default_factory=dict)
    input_violations: dict = field(default_factory=dict)
    marginal_violations: dict | None = None
    conditional_violations: dict | None = None
    conditional_status: str = "not-run"

    @property
    def ok(self) -> bool:
        groups = [self.marginal_violations or {}, self.conditional_violations or {}]
        return all(not v for g in groups for v in g.values())


CLOSURE_AXIOMS = ("composition", "weak-transitivity")


def _alternative_assignments(model, given: Mapping):
    """Assignments of the conditioned variables to compare against ``given``."""
    names = list(given)
    if isinstance(model, GaussianModel):
        # independencies of a Gaussian conditional depend on the covariance only
        return [dict(given), {k: float(v) + 1.0 for k, v in given.items()}]
    cards = [model.cardinalities[model.domain.index(k)] for k in names]
    return [dict(zip(names, vals)) for vals in itertools.product(*(range(c) for c in cards))]


def check_closure(model, hidden=(), condition: Mapping | None = None,
                  max_set_size: int = 2, check_input: bool = True) -> ClosureReport:
    """Check that composition and weak transitivity survive hiding ``hidden``
    and, separately, conditioning on ``condition``.

    The conditional branch first checks that the conditional laws share one
    independence model across assignments of the conditioned variables
    (two assignments for Gaussians, every positive-probability assignment
    for discrete tables) and reports ``hypothesis-failed`` otherwise.
    ``check_input=False`` skips re-checking the model itself.
    """
    if hasattr(model, "to_gaussian"):
        model = model.to_gaussian()
    elif hasattr(model, "to_joint"):
        model = model.to_joint()
    if not isinstance(model, (GaussianModel, DiscreteJoint)):
        raise TypeError("closure checks need a Gaussian or discrete exact model")
    dom = model.domain
    hidden = tuple(dom.names[i] for i in dom.varset(hidden))
    condition = dict(condition or {})
    report = ClosureReport(hidden, condition)
    if check_input:
        report.input_violations = {a: check_axiom(model, a, max_set_size) for a in CLOSURE_AXIOMS}

    if hidden:
        marg = model.marginalize([v for v in dom.names if v not in hidden])
        report.marginal_violations = {a: check_axiom(marg, a, max_set_size) for a in CLOSURE_AXIOMS}

    if condition:
        slices = []
        for assignment in _alternative_assignments(model, condition):
            try:
                slices.append(model.condition(assignment))
            except ZeroProbabilityError:
                continue
        reference = slices[0]
        if not all(same_independencies(reference, s, max_set_size) for s in slices[1:]):
            report.conditional_status = "hypothesis-failed"
        else:
            cond = model.condition(condition)
            report.conditional_violations = {a: check_axiom(cond, a, max_set_size) for a in CLOSURE_AXIOMS}
            bad = any(report.conditional_violations.values())
            report.conditional_status = "violations" if bad else "ok"
    return report


def statements_equal(a: IndependenceStatement, b: IndependenceStatement) -> bool:
    """Equality up to swapping the two sides."""
    return a.normalized() == b.normalized()


__all__ = [
    "AXIOMS",
    "AxiomResult",
    "AxiomViolation",
    "ClosureReport",
    "IndependenceStatement",
    "check_axiom",
    "check_axiom_detailed",
    "check_closure",
    "enumerate_independencies",
    "same_independencies",
    "statements_equal",
]
