"""Ground-truth models, datasets and named fixtures."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .citests import CATEGORICAL, CONTINUOUS, Dataset
from .domain import Domain
from .graphs import Dag, d_separated
from .models import ORACLE_TOL, CGMixture, DiscreteJoint, GaussianModel

MAX_JOINT_SIZE = 10**7


def _names(n: int, names=None) -> Domain:
    if names is None:
        width = len(str(n - 1))
        names = [f"X{i:0{width}d}" for i in range(n)]
    return names if isinstance(names, Domain) else Domain(names)


def random_dag(n: int, edge_prob: float, seed=None, names=None) -> Dag:
    """Erdos-Renyi DAG: each pair in a seeded random order gets an edge
    (earlier -> later) with probability ``edge_prob``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    parents = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                parents[perm[j]].add(int(perm[i]))
    return Dag(_names(n, names), parents)


@dataclass(frozen=True, eq=False)
class LinearGaussianBn:
    """Linear structural equations ``X_v = b_v + sum_p w_pv X_p + e_v``,
    ``e_v ~ N(0, noise_variances[v])``.

    ``coefficients`` is keyed by ``(parent, child)`` index pairs;
    ``intercepts`` are the ``b_v`` (zero when omitted).
    """

    dag: Dag
    coefficients: dict
    noise_variances: tuple
    intercepts: tuple = field(default=None)

    def __post_init__(self):
        n = len(self.dag.domain)
        coef = {(int(p), int(c)): float(w) for (p, c), w in self.coefficients.items()}
        if set(coef) != set(self.dag.edges):
            raise ValueError("need exactly one coefficient per edge")
        noise = tuple(float(v) for v in self.noise_variances)
        if len(noise) != n or any(not v > 0 for v in noise):
            raise ValueError("need one positive noise variance per node")
        icpt = tuple(float(v) for v in self.intercepts) if self.intercepts is not None else (0.0,) * n
        if len(icpt) != n:
            raise ValueError("need one intercept per node")
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "noise_variances", noise)
        object.__setattr__(self, "intercepts", icpt)

    @property
    def domain(self) -> Domain:
        return self.dag.domain

    def weight_matrix(self) -> np.ndarray:
        """``B[child, parent]`` = edge coefficient."""
        n = len(self.domain)
        b = np.zeros((n, n))
        for (p, c), w in self.coefficients.items():
            b[c, p] = w
        return b

    def to_gaussian(self) -> GaussianModel:
        return bn_to_gaussian(self)


def bn_to_gaussian(bn: LinearGaussianBn) -> GaussianModel:
    """Joint law of a linear-Gaussian BN: ``cov = A diag(noise) A^T`` with ``A = (I - B)^-1``."""
    n = len(bn.domain)
    a = np.linalg.solve(np.eye(n) - bn.weight_matrix(), np.eye(n))
    cov = a @ np.diag(bn.noise_variances) @ a.T
    return GaussianModel(bn.domain, a @ np.asarray(bn.intercepts), 0.5 * (cov + cov.T))


def random_linear_gaussian_bn(
    n: int,
    edge_prob: float,
    seed=None,
    coef_range=(0.3, 0.9),
    noise_range=(0.5, 1.5),
    names=None,
) -> LinearGaussianBn:
    """Random DAG plus coefficients with random sign and magnitude in ``coef_range``."""
    rng = np.random.default_rng(seed)
    dag = random_dag(n, edge_prob, rng, names)
    edges = dag.edges
    mags = rng.uniform(*coef_range, size=len(edges))
    signs = rng.choice([-1.0, 1.0], size=len(edges))
    noise = rng.uniform(*noise_range, size=n)
    return LinearGaussianBn(dag, dict(zip(edges, mags * signs)), tuple(noise))


def faithfulness_violations(bn: LinearGaussianBn, max_cond: int = 3, tol: float = ORACLE_TOL) -> list:
    """Pairs and conditioning sets (``|z| <= max_cond``) where a zero partial
    correlation and d-separation disagree."""
    model = bn.to_gaussian()
    n = len(bn.domain)
    bad = []
    for x, y in itertools.combinations(range(n), 2):
        rest = [v for v in range(n) if v not in (x, y)]
        for k in range(min(max_cond, len(rest)) + 1):
            for z in itertools.combinations(rest, k):
                zero = abs(model.partial_correlation(x, y, z)) < tol
                if zero != d_separated(bn.dag, [x], [y], z):
                    bad.append((x, y, z))
    return bad


def random_faithful_bn(n: int, edge_prob: float, seed: int, max_tries: int = 20, **kw):
    """Draw random BNs (seeds ``seed, seed+1, ...``) until one passes the
    faithfulness scan.  Returns ``(bn, regenerations)``."""
    for attempt in range(max_tries):
        bn = random_linear_gaussian_bn(n, edge_prob, seed + attempt, **kw)
        if not faithfulness_violations(bn):
            return bn, attempt
    raise RuntimeError(f"no faithful model within {max_tries} draws")


@dataclass(frozen=True, eq=False)
class DiscreteBn:
    """Discrete BN.  ``cpts[v]`` has shape ``(cards of parents in index
    order..., card_v)`` and each last-axis row sums to one."""

    dag: Dag
    cardinalities: tuple
    cpts: tuple

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cardinalities)
        if len(cards) != len(self.dag.domain) or any(c < 1 for c in cards):
            raise ValueError("need one positive cardinality per node")
        cpts = []
        for v, cpt in enumerate(self.cpts):
            cpt = np.array(cpt, dtype=float)
            shape = tuple(cards[p] for p in self.dag.parents[v]) + (cards[v],)
            if cpt.shape != shape:
                cpt = cpt.reshape(shape)
            if np.any(cpt < 0) or np.max(np.abs(cpt.sum(axis=-1) - 1.0)) > 1e-12:
                raise ValueError(f"CPT of {self.dag.domain.names[v]} is not a conditional distribution")
            cpt.setflags(write=False)
            cpts.append(cpt)
        if len(cpts) != len(cards):
            raise ValueError("need one CPT per node")
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "cpts", tuple(cpts))

    @property
    def domain(self) -> Domain:
        return self.dag.domain

    @property
    def strictly_positive(self) -> bool:
        return all(np.all(c > 0) for c in self.cpts)

    def to_joint(self) -> DiscreteJoint:
        return bn_to_joint(self)


def bn_to_joint(bn: DiscreteBn) -> DiscreteJoint:
    """Joint table as the product of CPT entries for each assignment."""
    cards = bn.cardinalities
    size = int(np.prod(cards))
    if size > MAX_JOINT_SIZE:
        raise ValueError(f"joint table of {size} entries exceeds {MAX_JOINT_SIZE}")
    assign = np.indices(cards).reshape(len(cards), -1)
    joint = np.ones(size)
    for v, cpt in enumerate(bn.cpts):
        joint *= cpt[tuple(assign[p] for p in bn.dag.parents[v]) + (assign[v],)]
    return DiscreteJoint(bn.domain, cards, joint / joint.sum())


def random_discrete_bn(dag: Dag, cardinalities, seed=None, floor: float = 0.05) -> DiscreteBn:
    """Normalised i.i.d. exponential draws per CPT row, mixed with a uniform
    floor so every cell is at least ``floor``."""
    rng = np.random.default_rng(seed)
    cards = [int(c) for c in cardinalities]
    cpts = []
    for v in range(len(cards)):
        k = cards[v]
        if floor * k >= 1:
            raise ValueError("floor too large for the cardinality")
        shape = tuple(cards[p] for p in dag.parents[v]) + (k,)
        raw = rng.exponential(size=shape)
        raw /= raw.sum(axis=-1, keepdims=True)
        cpt = floor + (1.0 - floor * k) * raw
        cpts.append(cpt / cpt.sum(axis=-1, keepdims=True))
    return DiscreteBn(dag, cards, cpts)


def sample(model, n: int, seed=None) -> Dataset:
    """Draw ``n`` i.i.d. rows from a Gaussian model, discrete joint or BN."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(model, LinearGaussianBn):
        model = model.to_gaussian()
    elif isinstance(model, DiscreteBn):
        model = model.to_joint()
    rng = np.random.default_rng(seed)
    if isinstance(model, GaussianModel):
        chol = np.linalg.cholesky(model.cov)
        rows = model.mean + rng.standard_normal((n, len(model.domain))) @ chol.T
        return Dataset(model.domain, rows, (CONTINUOUS,) * len(model.domain))
    if isinstance(model, DiscreteJoint):
        probs = model.probs
        cdf = np.cumsum(probs)
        cells = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
        cells = np.minimum(cells, np.flatnonzero(probs)[-1])
        rows = np.stack(np.unravel_index(cells, model.cardinalities), axis=1)
        return Dataset(model.domain, rows, (CATEGORICAL,) * len(model.domain), model.cardinalities)
    raise TypeError(f"cannot sample from {type(model).__name__}")


# -- named fixtures ---------------------------------------------------------

SELECTION_BIAS_EDGES = (("I", "C1"), ("I", "C2"), ("C1", "S"), ("C2", "S"), ("T", "S"))
SELECTION_BIAS_COEFFICIENTS = {("I", "C1"): 0.8, ("I", "C2"): -0.6, ("C1", "S"): 0.7, ("C2", "S"): 0.5, ("T", "S"): 0.9}


def chain_bn() -> LinearGaussianBn:
    """A -> B -> T with unit coefficients and unit noise."""
    dag = Dag.from_edges(["A", "B", "T"], [("A", "B"), ("B", "T")])
    return LinearGaussianBn(dag, {(0, 1): 1.0, (1, 2): 1.0}, (1.0, 1.0, 1.0))


@functools.lru_cache(maxsize=None)
def selection_bias_model(selection_value: float = 0.0) -> tuple[LinearGaussianBn, GaussianModel]:
    """Selection-bias example: C1 and C2 share the cause I, and C1, C2 and T
    all feed the selection node S.  Returns the BN and its law given
    ``S = selection_value`` over (C1, C2, I, T).

    The construction is checked on every call: given S, the relevant set of
    T is {C1, C2, I}; with context {C1, C2} it is empty, with {C2} it is
    {C1, I}, with {C1} it is {C2, I}; purging {C1, C2} removes nothing.
    """
    from .citests import GaussianOracle
    from .relevance import find_relevant_with_context, oracle_relevant, purge_context

    dom = Domain(["C1", "C2", "I", "S", "T"])
    dag = Dag.from_edges(dom, SELECTION_BIAS_EDGES)
    coef = {(dom.index(p), dom.index(c)): w for (p, c), w in SELECTION_BIAS_COEFFICIENTS.items()}
    bn = LinearGaussianBn(dag, coef, (1.0,) * 5)
    conditioned = bn.to_gaussian().condition({"S": selection_value})

    d = conditioned.domain
    expected = {
        (): {"C1", "C2", "I"},
        ("C1", "C2"): set(),
        ("C2",): {"C1", "I"},
        ("C1",): {"C2", "I"},
    }
    oracle = GaussianOracle(conditioned)
    for ctx, want in expected.items():
        for rep in (oracle_relevant(conditioned, ["T"], ctx), find_relevant_with_context(oracle, ["T"], ctx)):
            if set(d.names_of(rep.relevant)) != want:
                raise RuntimeError(f"selection-bias fixture self-check failed for context {ctx}")
    kept, _ = purge_context(oracle, ["T"], ["C1", "C2"])
    if set(d.names_of(kept)) != {"C1", "C2"}:
        raise RuntimeError("selection-bias fixture self-check failed for purging")
    return bn, conditioned


def xor_or_model() -> DiscreteBn:
    """Binary X, Y, W feeding Z; Z = XOR(X, Y) when W = 0 and OR(X, Y) when W = 1."""
    dag = Dag.from_edges(["X", "Y", "Z", "W"], [("X", "Z"), ("Y", "Z"), ("W", "Z")])
    half = np.array([0.5, 0.5])
    z = np.zeros((2, 2, 2, 2))  # (x, y, w, z)
    for x, y, w in itertools.product((0, 1), repeat=3):
        z[x, y, w, (x ^ y) if w == 0 else (x | y)] = 1.0
    return DiscreteBn(dag, (2, 2, 2, 2), (half, half, z, half))


def cg_counterexample(rho: float = 0.5) -> CGMixture:
    """Two equally weighted bivariate Gaussians over (X, Y) with zero means,
    unit variances and correlation ``+rho`` / ``-rho``; the selector is Z."""
    comps = [GaussianModel(["X", "Y"], [0.0, 0.0], [[1.0, s * rho], [s * rho, 1.0]]) for s in (1, -1)]
    return CGMixture(comps, [0.5, 0.5], selector="Z")
