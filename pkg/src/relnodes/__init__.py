"""Find the variables relevant to a target set from independence tests."""

__version__ = "0.1.0"

from .axioms import AXIOMS, check_axiom, check_closure, enumerate_independencies
from .citests import (
    Dataset,
    DiscreteOracle,
    FisherZTester,
    G2Tester,
    GaussianOracle,
    IndependenceTester,
    TesterConfig,
    exact_tester,
    fisher_z_test,
    g_squared_test,
    make_tester,
)
from .domain import Domain, UnknownVariableError
from .graphs import (
    Dag,
    UndirectedGraph,
    d_separated,
    markov_boundary_iamb,
    relevant_via_ug,
    ug_edge_exclusion,
    ug_via_markov_boundaries,
)
from .models import CGMixture, DiscreteJoint, GaussianModel, conditional_mutual_information
from .relevance import (
    RelevanceReport,
    find_relevant,
    find_relevant_with_context,
    oracle_relevant,
    purge_context,
)
from .synthesis import (
    DiscreteBn,
    LinearGaussianBn,
    random_dag,
    random_discrete_bn,
    random_linear_gaussian_bn,
    sample,
)

__all__ = [
    "AXIOMS", "CGMixture", "Dag", "Dataset", "DiscreteBn", "DiscreteJoint", "DiscreteOracle", "Domain",
    "FisherZTester", "G2Tester", "GaussianModel", "GaussianOracle", "IndependenceTester", "LinearGaussianBn",
    "RelevanceReport", "TesterConfig", "UndirectedGraph", "UnknownVariableError",
    "check_axiom", "check_closure", "conditional_mutual_information", "d_separated",
    "enumerate_independencies", "exact_tester", "find_relevant", "find_relevant_with_context",
    "fisher_z_test", "g_squared_test", "make_tester", "markov_boundary_iamb", "oracle_relevant",
    "purge_context", "random_dag", "random_discrete_bn", "random_linear_gaussian_bn",
    "relevant_via_ug", "sample", "ug_edge_exclusion", "ug_via_markov_boundaries",
]
