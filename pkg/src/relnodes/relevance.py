"""Relevant-node identification.

:func:`find_relevant` grows the relevant set outward from the targets
using only marginal (or context-conditional) pairwise tests.
:func:`oracle_relevant` is the exhaustive brute-force characterisation
it is checked against, and :func:`purge_context` shrinks a context set
down to the nodes that matter.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .citests import IndependenceTester, exact_tester

MAX_ORACLE_CANDIDATES = 20


@dataclass(frozen=True)
class RelevanceReport:
    """Outcome of a relevance search.

    ``witnesses`` maps each relevant node to a dependence chain that starts
    at the node and ends in a target.  ``witness_sets`` is only filled by
    :func:`oracle_relevant` and maps each relevant node to the smallest
    conditioning set under which it depends on the targets.
    """

    targets: tuple[int, ...]
    context: tuple[int, ...]
    relevant: tuple[int, ...]
    irrelevant: tuple[int, ...]
    witnesses: dict[int, tuple[int, ...]] = field(default_factory=dict)
    tests_performed: int = 0
    witness_sets: dict[int, tuple[int, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class PurgeStep:
    removed: int
    context_after: tuple[int, ...]
    evidence: tuple[int, ...]  # R(C \ {removed}) at the time of removal


def _resolve(tester, targets, context):
    dom = tester.domain
    t = dom.varset(targets)
    c = dom.varset(context)
    if not t:
        raise ValueError("targets must be non-empty")
    if set(t) & set(c):
        raise ValueError("targets and context overlap")
    return t, c


def find_relevant_with_context(
    tester: IndependenceTester,
    targets,
    context=(),
    order: Sequence[int] | None = None,
) -> RelevanceReport:
    """Relevant nodes for ``targets`` given that ``context`` is always observed.

    Frontier expansion seeded with the targets: every node popped from the
    frontier is tested (conditionally on the context) against each
    candidate not yet reached, and dependent candidates join the frontier.
    Each unordered pair is tested at most once.  ``order`` permutes the
    candidate scan; the resulting set does not depend on it.
    """
    t, c = _resolve(tester, targets, context)
    n = len(tester.domain)
    if order is not None and sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the domain indices")
    excluded = set(t) | set(c)
    candidates = [i for i in (order if order is not None else range(n)) if i not in excluded]

    decided: dict[frozenset, bool] = {}

    def dependent(a: int, b: int) -> bool:
        key = frozenset((a, b))
        if key not in decided:
            decided[key] = not tester.independent(a, b, c)
        return decided[key]

    parent: dict[int, int] = {}
    reached = set(t)
    frontier = deque(t)
    while frontier:
        node = frontier.popleft()
        for cand in candidates:
            if cand in reached:
                continue
            if dependent(node, cand):
                reached.add(cand)
                parent[cand] = node
                frontier.append(cand)

    witnesses = {}
    for node in parent:
        chain = [node]
        while chain[-1] in parent:
            chain.append(parent[chain[-1]])
        witnesses[node] = tuple(chain)
    relevant = tuple(sorted(parent))
    irrelevant = tuple(sorted(set(candidates) - reached))
    return RelevanceReport(t, c, relevant, irrelevant, dict(sorted(witnesses.items())), len(decided))


def find_relevant(tester: IndependenceTester, targets, order: Sequence[int] | None = None) -> RelevanceReport:
    """Relevant nodes for ``targets`` from marginal dependence tests only."""
    return find_relevant_with_context(tester, targets, (), order)


def purge_context(tester: IndependenceTester, targets, context) -> tuple[tuple[int, ...], list[PurgeStep]]:
    """Drop context nodes that are irrelevant given the rest of the context.

    Repeatedly removes the lowest-index ``X`` in the context with ``X``
    not in ``R(C minus X)`` until no such node remains.
    """
    t, c = _resolve(tester, targets, context)
    current = list(c)
    audit: list[PurgeStep] = []
    removed = True
    while removed:
        removed = False
        for x in list(current):
            rest = [v for v in current if v != x]
            report = find_relevant_with_context(tester, t, rest)
            if x not in report.relevant:
                current = rest
                audit.append(PurgeStep(x, tuple(rest), report.relevant))
                removed = True
                break
    return tuple(current), audit


def oracle_relevant(model, targets, context=(), max_candidates: int = MAX_ORACLE_CANDIDATES) -> RelevanceReport:
    """Brute-force relevant set from an exact model.

    ``X`` is relevant iff ``X`` depends on the whole target set given
    ``Z`` plus the context, for some ``Z`` drawn from the remaining
    candidates.  Conditioning sets are scanned in order of increasing size
    and the first witness is kept.
    """
    tester = exact_tester(model)
    t, c = _resolve(tester, targets, context)
    excluded = set(t) | set(c)
    candidates = [i for i in range(len(tester.domain)) if i not in excluded]
    if len(candidates) > max_candidates:
        raise ValueError(f"{len(candidates)} candidates exceed the enumeration limit of {max_candidates}")
    queries = 0
    found: dict[int, tuple[int, ...]] = {}
    for x in candidates:
        others = [v for v in candidates if v != x]
        for z in itertools.chain.from_iterable(itertools.combinations(others, k) for k in range(len(others) + 1)):
            queries += 1
            if not tester.independent((x,), t, tuple(sorted(z + c))):
                found[x] = z
                break
    relevant = tuple(sorted(found))
    irrelevant = tuple(v for v in candidates if v not in found)
    return RelevanceReport(t, c, relevant, irrelevant, {}, queries, found)
