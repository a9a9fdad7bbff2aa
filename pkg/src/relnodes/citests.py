"""Independence decisions over exact models and finite datasets.

Every backend answers the same question, "is X independent of Y given
Z?", through :meth:`IndependenceTester.decide`.  Exact backends read the
answer off a model; data backends run Fisher's z (continuous columns) or
the G-squared likelihood-ratio test (categorical columns).
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import stats

from .domain import Domain, check_disjoint
from .models import (
    ORACLE_TOL,
    CGMixture,
    DiscreteJoint,
    GaussianModel,
    cg_independent,
    cmi_from_table,
    conditional_mutual_information,
    partial_correlation_from_cov,
)

log = logging.getLogger(__name__)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
TEST_KINDS = ("oracle", "fisher-z", "g2")


class SetQueryError(ValueError):
    """Set-valued queries are only answered by exact oracles."""


@dataclass(eq=False)
class Dataset:
    """An ``n x |U|`` sample with one declared kind per column."""

    domain: Domain
    rows: np.ndarray
    kinds: tuple[str, ...]
    cardinalities: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.domain, Domain):
            self.domain = Domain(self.domain)
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.domain):
            raise ValueError(f"rows must have shape (n, {len(self.domain)})")
        if rows.shape[0] < 1:
            raise ValueError("dataset is empty")
        if not np.all(np.isfinite(rows)):
            raise ValueError("dataset contains missing or non-finite values")
        self.kinds = tuple(self.kinds)
        if len(self.kinds) != len(self.domain) or set(self.kinds) - {CONTINUOUS, CATEGORICAL}:
            raise ValueError("need one kind ('continuous' or 'categorical') per column")
        cards = list(self.cardinalities) or [0] * len(self.domain)
        for j, kind in enumerate(self.kinds):
            if kind != CATEGORICAL:
                cards[j] = 0
                continue
            col = rows[:, j]
            if np.any(col < 0) or np.any(col != np.round(col)):
                raise ValueError(f"categorical column {self.domain.names[j]!r} needs non-negative integers")
            cards[j] = max(cards[j], int(col.max()) + 1)
        rows.setflags(write=False)
        self.rows = rows
        self.cardinalities = tuple(cards)

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class TestDecision:
    __test__ = False

    independent: bool
    statistic: float
    p_value: float | None
    conditioning_size: int
    low_power: bool = False


@dataclass(frozen=True)
class TesterConfig:
    __test__ = False

    alpha: float = 0.05
    oracle_tolerance: float = ORACLE_TOL
    kind: str | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.oracle_tolerance > 0:
            raise ValueError("oracle tolerance must be positive")
        if self.kind is not None and self.kind not in TEST_KINDS:
            raise ValueError(f"unknown test kind {self.kind!r}")


def fisher_z_statistic(r: float, n: int, k: int) -> float:
    """sqrt(n - k - 3) * atanh(r)."""
    if abs(r) >= 1.0:
        return math.copysign(math.inf, r)
    return math.sqrt(n - k - 3) * math.atanh(r)


def _sample_partial_correlation(cols: np.ndarray) -> float:
    sub = np.cov(cols, rowvar=False)
    try:
        return partial_correlation_from_cov(sub)
    except np.linalg.LinAlgError:
        prec = np.linalg.pinv(sub)
        denom = math.sqrt(prec[0, 0] * prec[1, 1])
        return 0.0 if denom == 0 else float(np.clip(-prec[0, 1] / denom, -1, 1))


def _require_kind(data: Dataset, cols, kind: str, test: str) -> None:
    bad = [data.domain.names[c] for c in cols if data.kinds[c] != kind]
    if bad:
        raise ValueError(f"{test} needs {kind} columns; got {', '.join(bad)}")


def fisher_z_test(data: Dataset, x: int, y: int, z: Iterable[int] = (), alpha: float = 0.05) -> TestDecision:
    """Fisher's z test of zero partial correlation between two columns."""
    x, y = sorted((int(x), int(y)))
    z = tuple(sorted(z))
    check_disjoint((x,), (y,), z)
    _require_kind(data, (x, y, *z), CONTINUOUS, "Fisher's z")
    k = len(z)
    if data.n - k - 3 < 1:
        log.debug("low-power Fisher z: n=%d, |z|=%d", data.n, k)
        return TestDecision(True, 0.0, 1.0, k, low_power=True)
    r = _sample_partial_correlation(data.rows[:, [x, y, *z]])
    stat = fisher_z_statistic(r, data.n, k)
    if math.isinf(stat):
        return TestDecision(False, math.inf, 0.0, k)
    p = float(2.0 * stats.norm.sf(abs(stat)))
    critical = stats.norm.ppf(1.0 - alpha / 2.0)
    return TestDecision(bool(abs(stat) <= critical), stat, p, k)


def contingency_table(data: Dataset, cols) -> np.ndarray:
    cards = [data.cardinalities[c] for c in cols]
    codes = np.ravel_multi_index(data.rows[:, list(cols)].astype(np.intp).T, cards)
    return np.bincount(codes, minlength=int(np.prod(cards))).reshape(cards).astype(float)


def g2_degrees_of_freedom(counts: np.ndarray) -> int:
    """Degrees of freedom with structural zeros removed.

    Each stratum of the conditioning set contributes
    ``(rows_x - 1) * (cols_y - 1)`` counted over the x and y levels that
    actually occur in it; empty strata contribute nothing.
    """
    cx, cy = counts.shape[:2]
    strata = counts.reshape(cx, cy, -1)
    df = 0
    for s in range(strata.shape[2]):
        block = strata[:, :, s]
        if block.sum() == 0:
            continue
        rx = int(np.count_nonzero(block.sum(axis=1)))
        ry = int(np.count_nonzero(block.sum(axis=0)))
        df += max(rx - 1, 0) * max(ry - 1, 0)
    return df


def g_squared_test(data: Dataset, x: int, y: int, z: Iterable[int] = (), alpha: float = 0.05) -> TestDecision:
    """G-squared test: ``G2 = 2 n I(x; y | z)`` (nats) against chi-squared."""
    x, y = sorted((int(x), int(y)))
    z = tuple(sorted(z))
    check_disjoint((x,), (y,), z)
    _require_kind(data, (x, y, *z), CATEGORICAL, "G-squared")
    counts = contingency_table(data, (x, y, *z))
    stat = 2.0 * data.n * cmi_from_table(counts, [0], [1], range(2, counts.ndim), log=np.log)
    df = g2_degrees_of_freedom(counts)
    if df == 0:
        return TestDecision(True, stat, 1.0, len(z))
    if data.n < 5 * df:
        log.debug("low-power G2: n=%d, df=%d", data.n, df)
        return TestDecision(True, stat, 1.0, len(z), low_power=True)
    p = float(stats.chi2.sf(stat, df))
    return TestDecision(bool(p > alpha), stat, p, len(z))


class IndependenceTester:
    """Base class: validation, canonical caching and query counting.

    Subclasses implement :meth:`_compute` for sorted, disjoint index tuples.
    Decisions are memoised under a key that does not depend on argument
    order, so ``decide(x, y, z)`` and ``decide(y, x, z)`` return the very
    same object.
    """

    exact = False
    kind = "oracle"

    def __init__(self, domain: Domain):
        self.domain = domain
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.computed = 0
        self.low_power: list[tuple] = []

    def decide(self, x, y, z=()) -> TestDecision:
        xs, ys, zs = self.domain.varset(x), self.domain.varset(y), self.domain.varset(z)
        if not xs or not ys:
            raise ValueError("x and y must be non-empty")
        check_disjoint(xs, ys, zs)
        if not self.exact and (len(xs) > 1 or len(ys) > 1):
            raise SetQueryError("set-valued queries need an exact oracle")
        key = (min(xs, ys), max(xs, ys), zs)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        decision = self._compute(*key)
        with self._lock:
            if key not in self._cache:
                self._cache[key] = decision
                self.computed += 1
                if decision.low_power:
                    self.low_power.append(key)
            return self._cache[key]

    def independent(self, x, y, z=()) -> bool:
        return self.decide(x, y, z).independent

    def association(self, x, y, z=()) -> float:
        """Strength of dependence used to rank candidates (``|statistic|``)."""
        return abs(self.decide(x, y, z).statistic)

    def _compute(self, xs, ys, zs) -> TestDecision:  # pragma: no cover - abstract
        raise NotImplementedError


class GaussianOracle(IndependenceTester):
    exact = True

    def __init__(self, model: GaussianModel, tol: float = ORACLE_TOL):
        super().__init__(model.domain)
        self.model = model
        self.tol = tol

    def _compute(self, xs, ys, zs):
        dep = self.model.dependence(xs, ys, zs)
        return TestDecision(dep < self.tol, dep, None, len(zs))


class DiscreteOracle(IndependenceTester):
    exact = True

    def __init__(self, model: DiscreteJoint, tol: float = ORACLE_TOL):
        super().__init__(model.domain)
        self.model = model
        self.tol = tol

    def _compute(self, xs, ys, zs):
        cmi = conditional_mutual_information(self.model, xs, ys, zs)
        return TestDecision(cmi < self.tol, cmi, None, len(zs))


class CGOracle(IndependenceTester):
    """Exact oracle for :class:`CGMixture`; may raise ``UnsupportedQuery``."""

    exact = True

    def __init__(self, model: CGMixture, tol: float = ORACLE_TOL):
        super().__init__(model.domain)
        self.model = model
        self.tol = tol

    def _compute(self, xs, ys, zs):
        indep = cg_independent(self.model, xs, ys, zs, self.tol)
        return TestDecision(indep, 0.0 if indep else 1.0, None, len(zs))


class _DataTester(IndependenceTester):
    _test = None

    def __init__(self, data: Dataset, alpha: float = 0.05):
        super().__init__(data.domain)
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.data = data
        self.alpha = alpha

    def _compute(self, xs, ys, zs):
        return type(self)._test(self.data, xs[0], ys[0], zs, self.alpha)


class FisherZTester(_DataTester):
    kind = "fisher-z"
    _test = staticmethod(fisher_z_test)


class G2Tester(_DataTester):
    kind = "g2"
    _test = staticmethod(g_squared_test)


def exact_tester(model, tol: float = ORACLE_TOL) -> IndependenceTester:
    if isinstance(model, IndependenceTester):
        if not model.exact:
            raise TypeError("an exact model or oracle is required, not a data tester")
        return model
    if hasattr(model, "to_gaussian"):
        model = model.to_gaussian()
    elif hasattr(model, "to_joint"):
        model = model.to_joint()
    if isinstance(model, GaussianModel):
        return GaussianOracle(model, tol)
    if isinstance(model, DiscreteJoint):
        return DiscreteOracle(model, tol)
    if isinstance(model, CGMixture):
        return CGOracle(model, tol)
    raise TypeError(f"no exact oracle for {type(model).__name__}")


def make_tester(source, config: TesterConfig | None = None) -> IndependenceTester:
    """Build the tester matching ``source`` (a model or a :class:`Dataset`)."""
    config = config or TesterConfig()
    if not isinstance(source, Dataset):
        if config.kind not in (None, "oracle"):
            raise ValueError(f"{config.kind} needs a dataset, not an exact model")
        return exact_tester(source, config.oracle_tolerance)
    kind = config.kind
    if kind is None:
        kind = "g2" if all(k == CATEGORICAL for k in source.kinds) else "fisher-z"
    if kind == "fisher-z":
        return FisherZTester(source, config.alpha)
    if kind == "g2":
        return G2Tester(source, config.alpha)
    raise ValueError("the oracle test needs an exact model, not a dataset")
