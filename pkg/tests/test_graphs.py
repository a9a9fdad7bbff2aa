
import numpy as np
import pytest

from conftest import diagonal_gaussian, nx_d_separated, nx_dag
from relnodes.citests import GaussianOracle, IndependenceTester, TestDecision
from relnodes.domain import Domain
from relnodes.graphs import (
    Dag,
    UndirectedGraph,
    d_separated,
    markov_boundary_iamb,
    relevant_via_ug,
    ug_edge_exclusion,
    ug_via_markov_boundaries,
)
from relnodes.models import GaussianModel
from relnodes.synthesis import chain_bn, selection_bias_model, random_dag, random_linear_gaussian_bn

SELECTION_BIAS_UG = {("C1", "C2"), ("C1", "I"), ("C1", "T"), ("C2", "I"), ("C2", "T")}


def collider_model(a=0.7, b=0.9):
    v = a * a + b * b + 1
    return GaussianModel(["C1", "S", "T"], [0, 0, 0], [[1, a, 0], [a, v, b], [0, b, 1]])


class ScriptedTester(IndependenceTester):
    """Dependent exactly on the listed (x, y, z) keys, with the given strength."""

    exact = False

    def __init__(self, names, dependent):
        super().__init__(Domain(names))
        self.table = {}
        for (a, b, z), strength in dependent.items():
            a, b, z = self.domain.varset(a), self.domain.varset(b), self.domain.varset(z)
            self.table[(min(a, b), max(a, b), z)] = strength

    def _compute(self, xs, ys, zs):
        s = self.table.get((xs, ys, zs), 0.0)
        return TestDecision(s == 0.0, s, None, len(zs))


def test_diagonal_gaussian_gives_empty_graph():
    assert ug_edge_exclusion(GaussianOracle(diagonal_gaussian(list("ABCD")))).edges == frozenset()


def test_chain_graph():
    g = ug_edge_exclusion(GaussianOracle(chain_bn().to_gaussian()))
    assert set(g.edge_names()) == {("A", "B"), ("B", "T")}


def test_selection_bias_graph():
    g = ug_edge_exclusion(GaussianOracle(selection_bias_model()[1]))
    assert set(g.edge_names()) == SELECTION_BIAS_UG


def test_edge_exclusion_matches_precision_pattern(random_bns):
    for bn in random_bns(30, start=40):
        gm = bn.to_gaussian()
        prec = np.linalg.inv(gm.cov)
        g = ug_edge_exclusion(GaussianOracle(gm))
        pattern = np.abs(prec) > 1e-9
        np.fill_diagonal(pattern, False)
        np.testing.assert_array_equal(g.adjacency(), pattern)
        np.testing.assert_array_equal(g.adjacency(), bn.dag.moral_graph().adjacency())


def test_adjacency_is_symmetric(random_bns):
    for bn in random_bns(10):
        adj = ug_edge_exclusion(GaussianOracle(bn.to_gaussian())).adjacency()
        assert (adj == adj.T).all()


def test_markov_boundary_isolated_node():
    t = GaussianOracle(diagonal_gaussian(list("ABC")))
    assert markov_boundary_iamb(t, "B").boundary == ()


def test_markov_boundary_chain_middle():
    t = GaussianOracle(chain_bn().to_gaussian())
    mb = markov_boundary_iamb(t, "B")
    assert t.domain.names_of(mb.boundary) == ["A", "T"]
    assert mb.max_conditioning >= 1


def test_markov_boundary_includes_spouse():
    t = GaussianOracle(collider_model())
    assert t.domain.names_of(markov_boundary_iamb(t, "C1").boundary) == ["S", "T"]


def test_markov_boundary_graph_on_empty_model():
    t = GaussianOracle(diagonal_gaussian(list("ABC")))
    assert ug_via_markov_boundaries(t).edges == frozenset()


def test_markov_boundary_graph_matches_edge_exclusion(random_bns):
    t = GaussianOracle(chain_bn().to_gaussian())
    assert ug_via_markov_boundaries(t).edges == ug_edge_exclusion(t).edges
    rng = np.random.default_rng(0)
    for seed in range(50):
        n = int(rng.integers(3, 9))
        t = GaussianOracle(random_linear_gaussian_bn(n, 0.3, 2000 + seed).to_gaussian())
        g = ug_via_markov_boundaries(t)
        assert g.edges == ug_edge_exclusion(t).edges
        assert g.flagged == ()


def test_asymmetric_boundaries_are_flagged_and_dropped(caplog):
    t = ScriptedTester(["A", "B", "C"], {
        ("A", "B", ()): 1.0,
        ("B", "C", ()): 2.0,
    })
    assert markov_boundary_iamb(t, "A").boundary == (1,)
    assert markov_boundary_iamb(t, "B").boundary == (2,)
    g = ug_via_markov_boundaries(t)
    assert g.edge_names() == [("B", "C")]
    assert g.flagged == ((0, 1),)
    assert "A/B" in caplog.text


def test_iamb_breaks_ties_by_index():
    t = ScriptedTester(["A", "B", "C"], {("A", "B", ()): 1.0, ("A", "C", ()): 1.0})
    # B wins the tie; C is then independent of A given B
    assert markov_boundary_iamb(t, "A").boundary == (1,)


def test_relevant_via_ug_cases():
    dom = Domain(["A", "B", "T", "D"])
    assert relevant_via_ug(UndirectedGraph(dom, frozenset()), ["T"]) == ()
    path = UndirectedGraph.from_names(dom, [("A", "B"), ("B", "T")])
    assert dom.names_of(relevant_via_ug(path, ["T"])) == ["A", "B"]
    fig = UndirectedGraph.from_names(Domain(["C1", "C2", "I", "T"]), SELECTION_BIAS_UG)
    assert fig.domain.names_of(relevant_via_ug(fig, ["T"])) == ["C1", "C2", "I"]


def test_d_separation_textbook_cases():
    chain = Dag.from_edges(["A", "B", "T"], [("A", "B"), ("B", "T")])
    assert d_separated(chain, ["A"], ["T"], ["B"])
    assert not d_separated(chain, ["A"], ["T"])
    coll = Dag.from_edges(["C1", "S", "T"], [("C1", "S"), ("T", "S")])
    assert d_separated(coll, ["C1"], ["T"])
    assert not d_separated(coll, ["C1"], ["T"], ["S"])
    bn, _ = selection_bias_model()
    assert d_separated(bn.dag, ["I"], ["T"], ["C1", "C2", "S"])
    assert not d_separated(bn.dag, ["I"], ["T"], ["S"])


def test_d_separation_descendant_of_collider():
    dag = Dag.from_edges(["A", "B", "C", "D"], [("A", "C"), ("B", "C"), ("C", "D")])
    assert not d_separated(dag, ["A"], ["B"], ["D"])


def test_d_separation_matches_networkx():
    rng = np.random.default_rng(1)
    for seed in range(40):
        dag = random_dag(7, 0.3, seed)
        ref = nx_dag(dag)
        for _ in range(40):
            roles = rng.integers(0, 4, size=7)
            xs, ys, zs = (np.flatnonzero(roles == r).tolist() for r in (1, 2, 3))
            if not xs or not ys:
                continue
            assert d_separated(dag, xs, ys, zs) == nx_d_separated(ref, xs, ys, zs)


def test_dag_validation_and_order():
    with pytest.raises(ValueError):
        Dag.from_edges(["A", "B"], [("A", "B"), ("B", "A")])
    dag = Dag.from_edges(["A", "B", "C"], [("C", "A"), ("A", "B")])
    order = dag.topological_order()
    assert order.index(2) < order.index(0) < order.index(1)
    assert dag.ancestors([1]) >= {0, 2}


def test_dot_output():
    g = UndirectedGraph.from_names(Domain(["A", "B", "T"]), [("B", "T"), ("A", "B")])
    assert g.to_dot() == "graph G {\n  A;\n  B;\n  T;\n  A -- B;\n  B -- T;\n}\n"
    odd = UndirectedGraph.from_names(Domain(["gene 1", "x"]), [("gene 1", "x")])
    assert '  "gene 1" -- x;' in odd.to_dot()


def test_graph_rejects_bad_edges():
    dom = Domain(["A", "B"])
    with pytest.raises(ValueError):
        UndirectedGraph(dom, frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        UndirectedGraph(dom, frozenset({(0, 5)}))
