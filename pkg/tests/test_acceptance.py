"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal
summary.  Run with ``pytest tests/test_acceptance.py``.
"""

import contextlib
import itertools
import subprocess
import sys
import time

import numpy as np
import pytest

from relnodes.axioms import check_axiom, check_closure
from relnodes.citests import FisherZTester, GaussianOracle
from relnodes.graphs import relevant_via_ug, ug_edge_exclusion
from relnodes.io import write_dataset, write_model
from relnodes.models import GaussianModel
from relnodes.relevance import find_relevant, find_relevant_with_context, oracle_relevant, purge_context
from relnodes.synthesis import (
    cg_counterexample,
    chain_bn,
    selection_bias_model,
    random_dag,
    random_discrete_bn,
    random_linear_gaussian_bn,
    sample,
    xor_or_model,
)

pytestmark = pytest.mark.acceptance


@contextlib.contextmanager
def criterion(log, number, text):
    started = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException:
        log.append(f"[{number}] FAIL  {text} {info.get('detail', '')}".rstrip())
        raise
    detail = f" {info['detail']}" if "detail" in info else ""
    log.append(f"[{number}] PASS  {text} ({time.perf_counter() - started:.1f}s){detail}")


def test_1_three_methods_agree(acceptance_log):
    with criterion(acceptance_log, 1, "frontier search = brute-force oracle = UG components, 200/200 models"):
        started = time.perf_counter()
        agree = 0
        for seed in range(200):
            g = random_linear_gaussian_bn(8, 0.25, seed).to_gaussian()
            targets = tuple(sorted(np.random.default_rng(seed).choice(8, 2, replace=False).tolist()))
            oracle = GaussianOracle(g)
            a = find_relevant(oracle, targets).relevant
            b = oracle_relevant(g, targets).relevant
            c = relevant_via_ug(ug_edge_exclusion(oracle), targets)
            agree += a == b == c
        assert agree == 200
        assert time.perf_counter() - started <= 60


def test_2_selection_bias_example(acceptance_log):
    with criterion(acceptance_log, 2, "selection-bias example: R, I and purging reproduce exactly"):
        _, g = selection_bias_model()
        t = GaussianOracle(g)
        names = g.domain.names_of

        def rel(ctx):
            return find_relevant_with_context(t, ["T"], ctx)

        assert names(rel(["C1", "C2"]).relevant) == []
        assert names(rel(["C1", "C2"]).irrelevant) == ["I"]
        assert names(rel(["C2"]).relevant) == ["C1", "I"]
        assert names(rel(["C1"]).relevant) == ["C2", "I"]
        kept, audit = purge_context(t, ["T"], ["C1", "C2"])
        assert audit == [] and names(kept) == ["C1", "C2"]
        optimal = set(names(kept)) | set(names(rel(kept).relevant)) | {"T"}
        assert optimal == {"C1", "C2", "T"}


def test_3_composition_counterexample(acceptance_log):
    with criterion(acceptance_log, 3, "XOR/OR joint satisfies composition; its W=0 slice does not"):
        assert check_axiom(xor_or_model(), "composition") == []
        s = xor_or_model().to_joint().condition({"W": 0})
        X, Y, Z = (s.domain.index(v) for v in "XYZ")
        matches = []
        for v in check_axiom(s, "composition"):
            premises = {(tuple(sorted((p.x, p.y))), p.z, p.holds) for p in v.premises}
            concl = {(tuple(sorted((c.x, c.y))), c.z, c.holds) for c in v.conclusions}
            if premises == {(((X,), (Z,)), (), True), (((Y,), (Z,)), (), True)} \
                    and concl == {(((X, Y), (Z,)), (), False)}:
                matches.append(v)
        assert len(matches) >= 1


def test_4_conditional_gaussian_counterexample(acceptance_log):
    with criterion(acceptance_log, 4, "CG mixture: X _|_ Z, Y _|_ Z, {X,Y} not _|_ Z"):
        m = cg_counterexample()
        assert m.independent(["X"], ["Z"])
        assert m.independent(["Y"], ["Z"])
        assert not m.independent(["X", "Y"], ["Z"])


def test_5_closure_under_hiding_and_conditioning(acceptance_log):
    with criterion(acceptance_log, 5, "100 Gaussians: no composition/weak-transitivity violations after hiding or conditioning"):
        started = time.perf_counter()
        rng = np.random.default_rng(5)
        for seed in range(100):
            n = int(rng.integers(4, 7))
            g = random_linear_gaussian_bn(n, 0.4, seed).to_gaussian()
            names = list(g.domain.names)
            hidden = rng.choice(names, 2, replace=False).tolist()
            rep = check_closure(g, hidden=hidden, check_input=False)
            assert all(v == [] for v in rep.marginal_violations.values())
            w = names[int(rng.integers(n))]
            rep = check_closure(g, condition={w: float(rng.normal())}, check_input=False)
            assert rep.conditional_status == "ok"
        assert time.perf_counter() - started <= 120


def test_6_universal_axioms(acceptance_log):
    with criterion(acceptance_log, 6, "universal axioms hold everywhere; intersection on positive models"):
        models = [
            xor_or_model().to_joint(),
            xor_or_model().to_joint().condition({"W": 0}),
            chain_bn().to_gaussian(),
            selection_bias_model()[1],
            cg_counterexample(),
        ]
        models += [random_linear_gaussian_bn(5, 0.4, s).to_gaussian() for s in range(10)]
        models += [random_discrete_bn(random_dag(4, 0.5, s), [2, 3, 2, 2], s).to_joint() for s in range(5)]
        for m in models:
            for axiom in ("symmetry", "decomposition", "weak-union", "contraction"):
                assert check_axiom(m, axiom) == []
            if getattr(m, "strictly_positive", isinstance(m, GaussianModel)):
                assert check_axiom(m, "intersection") == []


# Fixed model for the finite-sample run: 15 nodes, edge probability 0.15,
# first seed whose relevant and irrelevant sets both have at least 3 nodes.
CONSISTENCY_EDGE_PROB = 0.15


def consistency_model():
    for seed in itertools.count():
        bn = random_linear_gaussian_bn(15, CONSISTENCY_EDGE_PROB, seed)
        g = bn.to_gaussian()
        targets = tuple(sorted(np.random.default_rng(seed).choice(15, 2, replace=False).tolist()))
        rep = find_relevant(GaussianOracle(g), targets)
        if len(rep.relevant) >= 3 and len(rep.irrelevant) >= 3:
            return g, targets, set(rep.relevant)


def test_7_finite_sample_consistency(acceptance_log):
    # significance level shrinks with n (alpha = 1/n) so the tests are consistent
    with criterion(acceptance_log, 7, "Fisher z: error non-increasing in n, >= 90% exact recovery at n = 4000") as info:
        started = time.perf_counter()
        g, targets, truth = consistency_model()
        mean_err, exact = [], []
        for n in (250, 1000, 4000):
            errs = []
            for seed in range(50):
                data = sample(g, n, 10_000 + seed)
                found = set(find_relevant(FisherZTester(data, alpha=1.0 / n), targets).relevant)
                errs.append(len(found ^ truth))
            mean_err.append(float(np.mean(errs)))
            exact.append(float(np.mean(np.array(errs) == 0)))
        info["detail"] = f"mean error {mean_err}, exact recovery {exact}"
        assert mean_err[0] >= mean_err[1] >= mean_err[2]
        assert exact[2] >= 0.90
        assert time.perf_counter() - started <= 300


def test_8_marginal_test_budget(acceptance_log):
    with criterion(acceptance_log, 8, "|U| = 50: at most 1225 marginal tests"):
        models = [random_linear_gaussian_bn(50, p, s).to_gaussian() for s, p in enumerate((0.02, 0.05, 0.2))]
        models.append(GaussianModel([f"V{i}" for i in range(50)], np.zeros(50), np.eye(50)))
        for m in models:
            for targets in ([0], [3, 17]):
                tester = GaussianOracle(m)
                rep = find_relevant(tester, targets)
                assert rep.tests_performed == tester.computed <= 1225


COMMANDS = [
    ["relevant", "--model", "{selection_bias}", "--targets", "T", "--context", "C1,C2", "--oracle"],
    ["relevant", "--model", "{selection_bias}", "--targets", "T", "--samples", "2000", "--seed", "3",
     "--test", "fisher-z", "--alpha", "0.01", "--plot", "{tmp}/rel.png"],
    ["relevant", "--data", "{tmp}/d.csv", "--targets", "X0", "--test", "fisher-z", "--format", "tsv"],
    ["purge", "--model", "{selection_bias}", "--targets", "T", "--context", "C1,C2,I"],
    ["ug", "--model", "{chain}", "--method", "edge-exclusion", "--dot", "{tmp}/g.dot", "--plot", "{tmp}/g.svg"],
    ["ug", "--data", "{tmp}/d.csv", "--method", "iamb", "--targets", "X0"],
    ["oracle", "--model", "{selection_bias}", "--targets", "T", "--context", "C2", "--compare"],
    ["synth", "--nodes", "8", "--edge-prob", "0.25", "--seed", "7", "--out-model", "{tmp}/m.json",
     "--samples", "1000", "--out-data", "{tmp}/s.csv"],
    ["axioms", "--model", "{xor_or}", "--condition", "W=0", "--check", "composition"],
    ["axioms", "--model", "{xor_or}", "--condition", "W=0", "--closure"],
]


def test_9_cli_determinism(acceptance_log, tmp_path):
    with criterion(acceptance_log, 9, "every CLI command is byte-identical across two runs"):
        paths = {"selection_bias": tmp_path / "selection_bias.json", "chain": tmp_path / "chain.json", "xor_or": tmp_path / "xor.json"}
        write_model(paths["selection_bias"], selection_bias_model()[0], selection={"S": 0.0})
        write_model(paths["chain"], chain_bn())
        write_model(paths["xor_or"], xor_or_model())
        write_dataset(tmp_path / "d.csv", sample(random_linear_gaussian_bn(6, 0.4, 1), 500, 2))
        for argv in COMMANDS:
            argv = [a.format(tmp=tmp_path, **paths) for a in argv]
            side = [argv[i + 1] for i, a in enumerate(argv) if a in ("--dot", "--plot", "--out-model", "--out-data")]
            runs = []
            for _ in range(2):
                proc = subprocess.run([sys.executable, "-m", "relnodes.cli", *argv], capture_output=True)
                assert proc.returncode == 0, proc.stderr.decode()
                runs.append((proc.stdout, [open(p, "rb").read() for p in side]))
            assert runs[0] == runs[1], argv
