"""Exact probability models: Gaussian, discrete joint tables and
conditional-Gaussian mixtures.

These are the ground-truth engines behind every exact oracle in the
package.  All models are immutable once built.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import linalg

from .domain import Domain, VarRef, check_disjoint

#: default threshold below which an exact dependence measure counts as zero
ORACLE_TOL = 1e-9


class NotPositiveDefiniteError(ValueError):
    pass


class ZeroProbabilityError(ValueError):
    pass


class UnsupportedQuery(ValueError):
    """The model cannot decide this independence query exactly."""


def _as_domain(domain) -> Domain:
    return domain if isinstance(domain, Domain) else Domain(domain)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def partial_correlation_from_cov(sub: np.ndarray) -> float:
    """Partial correlation of the first two coordinates of ``sub`` given the rest.

    Computed from the inverse of the covariance block: the off-diagonal
    precision entry, negated and normalised.  Shared by the exact Gaussian
    oracle and the sample-based Fisher z test.
    """
    factor = linalg.cho_factor(sub, lower=True, check_finite=False)
    prec = linalg.cho_solve(factor, np.eye(sub.shape[0]), check_finite=False)
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    return float(np.clip(r, -1.0, 1.0))


class GaussianModel:
    """Multivariate normal distribution over a named domain.

    Parameters
    ----------
    domain : Domain or sequence of str
    mean : array_like, shape (n,)
    cov : array_like, shape (n, n)
        Must be symmetric (to 1e-10) and positive definite.
    """

    def __init__(self, domain, mean, cov):
        self.domain = _as_domain(domain)
        n = len(self.domain)
        mean = np.asarray(mean, dtype=float).reshape(-1)
        cov = np.asarray(cov, dtype=float)
        if mean.shape != (n,) or cov.shape != (n, n):
            raise ValueError(f"mean/cov shapes {mean.shape}/{cov.shape} do not match {n} variables")
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise ValueError("mean and covariance must be finite")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-10:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError("covariance matrix is not positive definite") from None
        self.mean = _frozen(mean)
        self.cov = _frozen(cov)

    def __repr__(self) -> str:
        return f"GaussianModel({list(self.domain.names)!r})"

    def marginalize(self, keep: Iterable[VarRef]) -> "GaussianModel":
        idx = self.domain.varset(keep)
        if not idx:
            raise ValueError("cannot marginalize onto an empty set")
        return GaussianModel(self.domain.subdomain(idx), self.mean[list(idx)], self.cov[np.ix_(idx, idx)])

    def condition(self, given: Mapping[VarRef, float]) -> "GaussianModel":
        """Condition on ``given`` (variable -> observed value)."""
        values = {self.domain.index(k): float(v) for k, v in given.items()}
        b = sorted(values)
        a = [i for i in range(len(self.domain)) if i not in values]
        if not a:
            raise ValueError("cannot condition on every variable")
        if not b:
            return self
        s_ab = self.cov[np.ix_(a, b)]
        try:
            factor = linalg.cho_factor(self.cov[np.ix_(b, b)], lower=True)
        except linalg.LinAlgError:
            raise ValueError("conditioning block is singular") from None
        w = np.array([values[i] for i in b])
        mean = self.mean[a] + s_ab @ linalg.cho_solve(factor, w - self.mean[b])
        cov = self.cov[np.ix_(a, a)] - s_ab @ linalg.cho_solve(factor, s_ab.T)
        return GaussianModel(self.domain.subdomain(a), mean, 0.5 * (cov + cov.T))

    def partial_correlation(self, x: VarRef, y: VarRef, z: Iterable[VarRef] = ()) -> float:
        x, y = self.domain.index(x), self.domain.index(y)
        z = self.domain.varset(z)
        if x == y or x in z or y in z:
            raise ValueError("x, y and z must be disjoint")
        idx = [x, y, *z]
        return partial_correlation_from_cov(self.cov[np.ix_(idx, idx)])

    def conditional_correlation(self, xs, ys, zs=()) -> np.ndarray:
        """Matrix of correlations between ``xs`` and ``ys`` given ``zs``.

        Obtained from the Schur complement of the ``zs`` block, so the sets
        are handled jointly.  For singletons this equals the partial
        correlation.
        """
        xs, ys, zs = self.domain.varset(xs), self.domain.varset(ys), self.domain.varset(zs)
        check_disjoint(xs, ys, zs)
        ab = list(xs) + list(ys)
        block = self.cov[np.ix_(ab, ab)]
        if zs:
            s_abz = self.cov[np.ix_(ab, zs)]
            factor = linalg.cho_factor(self.cov[np.ix_(zs, zs)], lower=True)
            block = block - s_abz @ linalg.cho_solve(factor, s_abz.T)
        sd = np.sqrt(np.diag(block))
        corr = block / np.outer(sd, sd)
        return corr[: len(xs), len(xs):]

    def dependence(self, xs, ys, zs=()) -> float:
        """Largest absolute conditional correlation between the two sets."""
        xs, ys = self.domain.varset(xs), self.domain.varset(ys)
        if len(xs) == 1 and len(ys) == 1:
            return abs(self.partial_correlation(xs[0], ys[0], zs))
        return float(np.max(np.abs(self.conditional_correlation(xs, ys, zs))))

    def independent(self, xs, ys, zs=(), tol: float = ORACLE_TOL) -> bool:
        return self.dependence(xs, ys, zs) < tol


def _entropy(table: np.ndarray, log=np.log2) -> float:
    p = table[table > 0]
    return float(-np.sum(p * log(p)))


def _marginal(table: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    drop = tuple(i for i in range(table.ndim) if i not in axes)
    return table.sum(axis=drop) if drop else table


def cmi_from_table(table: np.ndarray, xs, ys, zs=(), log=np.log2) -> float:
    """Conditional mutual information between axis groups of a (possibly
    unnormalised) joint table.  Counts are normalised first."""
    total = table.sum()
    if total <= 0:
        return 0.0
    t = table / total
    xs, ys, zs = set(xs), set(ys), set(zs)
    h = lambda axes: _entropy(_marginal(t, sorted(axes)), log) if axes else 0.0  # noqa: E731
    value = h(xs | zs) + h(ys | zs) - h(xs | ys | zs) - h(zs)
    return max(0.0, value)


class DiscreteJoint:
    """Joint probability table over finite-cardinality variables.

    ``probs`` is stored row-major by variable index, i.e. assignment
    ``(v0, v1, ..., vk)`` sits at the mixed-radix offset of those values.
    """

    def __init__(self, domain, cardinalities: Sequence[int], probs):
        self.domain = _as_domain(domain)
        cards = tuple(int(c) for c in cardinalities)
        if len(cards) != len(self.domain) or any(c < 1 for c in cards):
            raise ValueError("need one positive cardinality per variable")
        table = np.asarray(probs, dtype=float)
        if table.size != int(np.prod(cards)):
            raise ValueError(f"table has {table.size} entries, expected {int(np.prod(cards))}")
        table = table.reshape(cards)
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(table.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {table.sum()!r}, not 1")
        self.cardinalities = cards
        self.table = _frozen(table)

    def __repr__(self) -> str:
        return f"DiscreteJoint({list(self.domain.names)!r}, {list(self.cardinalities)!r})"

    @property
    def probs(self) -> np.ndarray:
        return self.table.reshape(-1)

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.table > 0))

    def marginalize(self, keep: Iterable[VarRef]) -> "DiscreteJoint":
        idx = self.domain.varset(keep)
        if not idx:
            raise ValueError("cannot marginalize onto an empty set")
        t = _marginal(self.table, idx)
        return DiscreteJoint(self.domain.subdomain(idx), [self.cardinalities[i] for i in idx], t / t.sum())

    def condition(self, given: Mapping[VarRef, int]) -> "DiscreteJoint":
        values = {self.domain.index(k): int(v) for k, v in given.items()}
        keep = [i for i in range(len(self.domain)) if i not in values]
        if not keep:
            raise ValueError("cannot condition on every variable")
        slicer = []
        for i, card in enumerate(self.cardinalities):
            if i in values:
                if not 0 <= values[i] < card:
                    raise ValueError(f"value {values[i]} out of range for {self.domain.names[i]}")
                slicer.append(values[i])
            else:
                slicer.append(slice(None))
        t = self.table[tuple(slicer)]
        total = t.sum()
        if total <= 0:
            raise ZeroProbabilityError("conditioning event has zero probability")
        return DiscreteJoint(self.domain.subdomain(keep), [self.cardinalities[i] for i in keep], t / total)

    def independent(self, xs, ys, zs=(), tol: float = ORACLE_TOL) -> bool:
        return conditional_mutual_information(self, xs, ys, zs) < tol


def conditional_mutual_information(d: DiscreteJoint, xs, ys, zs=()) -> float:
    """I(X; Y | Z) in bits."""
    xs, ys, zs = d.domain.varset(xs), d.domain.varset(ys), d.domain.varset(zs)
    if not xs or not ys:
        raise ValueError("x and y must be non-empty")
    check_disjoint(xs, ys, zs)
    return cmi_from_table(d.table, xs, ys, zs)


class CGMixture:
    """Conditional-Gaussian model: a discrete selector picks one of ``k``
    Gaussian components over a shared continuous domain.

    The selector is appended as the last variable of :attr:`domain`.
    """

    def __init__(self, components: Sequence[GaussianModel], weights, selector: str = "Z"):
        components = tuple(components)
        if not components:
            raise ValueError("need at least one component")
        cont = components[0].domain
        if any(c.domain != cont for c in components):
            raise ValueError("all components must share one domain")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(components),) or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
            raise ValueError("weights must be non-negative, one per component, and sum to 1")
        self.components = components
        self.weights = _frozen(weights)
        self.continuous = cont
        self.domain = Domain(list(cont.names) + [selector])
        self.selector = len(cont)

    @property
    def cardinality(self) -> int:
        return len(self.components)

    def _active(self) -> list[GaussianModel]:
        return [c for c, w in zip(self.components, self.weights) if w > 0]

    def marginalize(self, keep_continuous: Iterable[VarRef]) -> "CGMixture":
        names = [self.continuous.names[self.continuous.index(k)] for k in keep_continuous]
        return CGMixture([c.marginalize(names) for c in self.components], self.weights,
                         self.domain.names[self.selector])

    def independent(self, xs, ys, zs=(), tol: float = ORACLE_TOL) -> bool:
        return cg_independent(self, xs, ys, zs, tol)


def _same_conditional(comps: Sequence[GaussianModel], bs, cs, tol: float) -> bool:
    """Whether every component implies the same Gaussian law of ``bs`` given ``cs``."""
    def params(m):
        mu_b, s_bb = m.mean[list(bs)], m.cov[np.ix_(bs, bs)]
        if not cs:
            return [mu_b, s_bb]
        s_bc = m.cov[np.ix_(bs, cs)]
        beta = linalg.solve(m.cov[np.ix_(cs, cs)], s_bc.T, assume_a="pos").T
        return [mu_b - beta @ m.mean[list(cs)], beta, s_bb - beta @ s_bc.T]

    ref = params(comps[0])
    return all(
        np.allclose(a, b, rtol=0.0, atol=tol) for m in comps[1:] for a, b in zip(params(m), ref)
    )


def cg_independent(m: CGMixture, xs, ys, zs=(), tol: float = ORACLE_TOL) -> bool:
    """Exact independence decision in a conditional-Gaussian mixture.

    Decidable patterns: anything conditioned on the selector; queries
    with the selector on one side (the selector is independent of a
    continuous set given continuous ``zs`` iff every component induces the
    same conditional law of that set); and selector-free queries whose
    conditional law is shared by all components.  Anything else raises
    :class:`UnsupportedQuery`.
    """
    xs, ys, zs = m.domain.varset(xs), m.domain.varset(ys), m.domain.varset(zs)
    if not xs or not ys:
        raise ValueError("x and y must be non-empty")
    check_disjoint(xs, ys, zs)
    s = m.selector
    comps = m._active()
    if s in zs:
        zc = tuple(i for i in zs if i != s)
        return all(c.independent(xs, ys, zc, tol) for c in comps)
    if s in ys:
        xs, ys = ys, xs
    if s in xs:
        xc = tuple(i for i in xs if i != s)
        if not _same_conditional(comps, ys, zs, tol):
            return False
        # {s} u xc  _|_ ys | zs  <=>  s _|_ ys | zs  and  xc _|_ ys | zs u {s}
        return all(c.independent(xc, ys, zs, tol) for c in comps) if xc else True
    if _same_conditional(comps, tuple(sorted(xs + ys)), zs, tol):
        return comps[0].independent(xs, ys, zs, tol)
    raise UnsupportedQuery("selector-free query on components with differing laws")
