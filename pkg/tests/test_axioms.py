import numpy as np
import pytest

from conftest import diagonal_gaussian
from relnodes.axioms import (
    AXIOMS,
    IndependenceStatement,
    check_axiom,
    check_axiom_detailed,
    check_closure,
    enumerate_independencies,
    same_independencies,
    statements_equal,
)
from relnodes.models import DiscreteJoint
from relnodes.synthesis import (
    cg_counterexample,
    chain_bn,
    selection_bias_model,
    random_dag,
    random_discrete_bn,
    random_linear_gaussian_bn,
    xor_or_model,
)

UNIVERSAL = ("symmetry", "decomposition", "weak-union", "contraction")


def xor_slice(w=0):
    return xor_or_model().to_joint().condition({"W": w})


def statement(model, x, y, z=()):
    d = model.domain
    return IndependenceStatement(d.varset(x), d.varset(y), d.varset(z), True)


def copies():
    # X = Y = W, a fair coin copied three times
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = p[1, 1, 1] = 0.5
    return DiscreteJoint(["X", "Y", "W"], [2, 2, 2], p)


def test_two_independent_variables():
    stmts = enumerate_independencies(diagonal_gaussian(["A", "B"]))
    assert stmts == [IndependenceStatement((0,), (1,), (), True)]


def test_xor_slice_statements():
    s = xor_slice()
    found = {(x, y, z): h for x, y, z, h in
             ((st.x, st.y, st.z, st.holds) for st in enumerate_independencies(s, 1))}
    X, Y, Z = (s.domain.index(v) for v in "XYZ")
    assert found[((X,), (Z,), ())]
    assert found[((Y,), (Z,), ())]
    assert found[((X,), (Y,), ())]
    assert not found[((X,), (Z,), (Y,))]


def test_enumeration_is_deterministic():
    g = random_linear_gaussian_bn(5, 0.4, 3).to_gaussian()
    assert enumerate_independencies(g) == enumerate_independencies(g)


@pytest.mark.parametrize("seed", range(5))
def test_gaussians_satisfy_composition_and_weak_transitivity(seed):
    g = random_linear_gaussian_bn(5, 0.4, seed).to_gaussian()
    assert check_axiom(g, "composition") == []
    assert check_axiom(g, "weak-transitivity") == []


def test_xor_or_joint_satisfies_composition():
    assert check_axiom(xor_or_model(), "composition") == []


def test_xor_slice_violates_composition():
    s = xor_slice()
    violations = check_axiom(s, "composition")
    want_premises = {statement(s, "X", "Z"), statement(s, "Y", "Z")}
    want_conclusion = IndependenceStatement((2,), (0, 1), (), False)
    hit = [v for v in violations
           if {p.normalized() for p in v.premises} == {p.normalized() for p in want_premises}
           and any(statements_equal(c, want_conclusion) for c in v.conclusions)]
    assert hit


def test_cg_counterexample_violates_composition():
    m = cg_counterexample()
    res = check_axiom_detailed(m, "composition")
    assert res.violations
    v = res.violations[0]
    assert [c.render(m.domain.names) for c in v.conclusions] == ["{Z} not _|_ {X,Y} | {}"]


def test_checker_catches_intersection_failure_without_positivity():
    violations = check_axiom(copies(), "intersection", 1)
    assert violations and not copies().strictly_positive


def fixtures():
    return {
        "xor_or": xor_or_model().to_joint(),
        "xor_slice": xor_slice(),
        "copies": copies(),
        "chain": chain_bn().to_gaussian(),
        "selection_bias": selection_bias_model()[1],
        "cg": cg_counterexample(),
        **{f"discrete_{s}": random_discrete_bn(random_dag(4, 0.5, s), [2, 2, 3, 2], s).to_joint()
           for s in range(3)},
        **{f"gauss_{s}": random_linear_gaussian_bn(5, 0.4, 50 + s).to_gaussian() for s in range(3)},
    }


@pytest.mark.parametrize("name", list(fixtures()))
def test_universal_axioms_hold(name):
    model = fixtures()[name]
    for axiom in UNIVERSAL:
        assert check_axiom(model, axiom) == [], axiom
    positive = getattr(model, "strictly_positive", True)
    if name != "cg" and positive:
        assert check_axiom(model, "intersection") == []


def test_weak_transitivity_disjunction():
    # collider X -> Z <- Y: X _|_ Y but not given Z, so X or Y must depend on Z
    assert check_axiom(xor_or_model(), "weak-transitivity") == []


def test_same_independencies():
    g = random_linear_gaussian_bn(5, 0.4, 1).to_gaussian()
    assert same_independencies(g, g)
    name = g.domain.names[2]
    assert same_independencies(g.condition({name: -1.0}), g.condition({name: 2.5}))
    assert not same_independencies(xor_slice(0), xor_slice(1))
    with pytest.raises(ValueError):
        same_independencies(g, diagonal_gaussian(["A", "B"]))


def test_closure_after_hiding_and_conditioning():
    rng = np.random.default_rng(5)
    for seed in range(5):
        g = random_linear_gaussian_bn(6, 0.4, seed).to_gaussian()
        names = list(g.domain.names)
        hidden = rng.choice(names, 2, replace=False).tolist()
        rep = check_closure(g, hidden=hidden)
        assert rep.ok and all(v == [] for v in rep.marginal_violations.values())
        rep = check_closure(g, condition={names[int(rng.integers(6))]: 0.7})
        assert rep.conditional_status == "ok" and rep.ok


def test_closure_flags_context_specific_independence():
    rep = check_closure(xor_or_model(), condition={"W": 0})
    assert rep.conditional_status == "hypothesis-failed"
    assert rep.conditional_violations is None
    assert rep.input_violations == {"composition": [], "weak-transitivity": []}


def test_bad_requests():
    with pytest.raises(ValueError):
        check_axiom(chain_bn().to_gaussian(), "transitivity")
    big = random_linear_gaussian_bn(7, 0.3, 0).to_gaussian()
    with pytest.raises(ValueError):
        check_axiom(big, "composition")


def test_statement_helpers():
    a = IndependenceStatement((2,), (0, 1), (), False)
    b = IndependenceStatement((0, 1), (2,), (), False)
    assert statements_equal(a, b) and a.normalized() == b
    assert a.render(["X", "Y", "Z"]) == "{Z} not _|_ {X,Y} | {}"
    assert set(AXIOMS) >= set(UNIVERSAL)
