import pytest

from pertlp.oracle import Oracle, SolverStatusError, actual_active_set, oracle_solution
from pertlp.problem import LabelSource, StandardLP

WORKED = StandardLP([[1.0, 1.0]], [1.0], [1.0, 2.0])


@pytest.mark.parametrize("oracle", list(Oracle))
def test_worked_example_active_set(oracle):
    label = actual_active_set(WORKED, oracle)
    assert label.indices == (1,)
    assert label.source is (LabelSource.SIMPLEX if oracle is Oracle.SIMPLEX else LabelSource.IPM)


def test_multiple_solutions_oracles_differ():
    # every feasible point is optimal: simplex returns a vertex, the IPM the analytic centre
    lp = StandardLP([[1.0, 1.0, 1.0]], [1.0], [0.0, 0.0, 0.0])
    simplex = actual_active_set(lp, "simplex")
    ipm = actual_active_set(lp, "ipm")
    assert len(simplex.indices) == 2
    assert ipm.indices == ()


def test_unbounded_problem_raises():
    lp = StandardLP([[1.0, -1.0]], [1.0], [-1.0, -1.0])
    with pytest.raises(SolverStatusError):
        oracle_solution(lp, Oracle.SIMPLEX)
