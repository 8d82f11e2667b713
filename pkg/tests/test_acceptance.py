"""Exit criteria. Each test prints one PASS/FAIL line, visible without ``-s``.

The paper-scale comparison (6 settings x 20 seeds on the full 200x200 grid)
takes a few minutes; deselect it with ``-m "not slow"``.
"""

import pytest

from wsansim import acceptance


@pytest.fixture
def report(capsys):
    def emit(result):
        with capsys.disabled():
            print("\n" + result.line())
        assert result.passed, result.detail

    return emit


def test_degenerate_parameter_equivalence(report):
    report(acceptance.degenerate_equivalence(seeds=range(5)))


def test_determinism_byte_identical_csv(report):
    report(acceptance.determinism())


def test_geometry_oracle(report):
    report(acceptance.geometry())


def test_navigation_oracle(report):
    report(acceptance.navigation(n=1000))


def test_das_consistency_oracle(report):
    report(acceptance.das_consistency(n=1000))


@pytest.fixture(scope="module")
def paper_results():
    return acceptance.paper_scale(seeds=range(20))


@pytest.mark.slow
@pytest.mark.parametrize("index", range(5), ids=["a-ttc", "b-hops", "c-TS", "c-STS", "c-DAS"])
def test_paper_scale_orderings(paper_results, report, index):
    report(paper_results.checks[index])


def test_conservation_and_metric_sanity(report):
    # checked_run asserts the invariants after every step of every run it drives
    for algorithm, param in [("TS-1", None), ("STS-2", 1.4), ("DAS-2", 0), ("DAS-1", 15)]:
        for seed in range(3):
            acceptance.checked_run(acceptance.DESK, acceptance.policy_for(algorithm, param), seed)
    report(acceptance.CheckResult("conservation and metric sanity", True,
                                  "12 desk-scale runs checked after every step"))

