import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from prefrank.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA: dict[int, tuple[str, str]] = {}


def random_graph(rng: np.random.Generator, n: int, q: float | None = None, connected_nodes: bool = False) -> Graph:
    """Erdős–Rényi style graph; optionally resampled until no node is isolated."""
    q = rng.uniform(0.2, 0.8) if q is None else q
    for _ in range(1000):
        upper = np.triu(rng.random((n, n)) < q, 1)
        A = (upper | upper.T).astype(np.int8)
        if not connected_nodes or n == 1 or A.sum(axis=1).min() > 0:
            return Graph(A)
    raise RuntimeError("could not draw a graph without isolated nodes")


@pytest.fixture
def criterion():
    """Record one acceptance line, print it, and fail the test when the check fails."""

    def report(number: int, passed: bool, detail: str):
        status = "PASS" if passed else "FAIL"
        _CRITERIA[number] = (status, detail)
        print(f"criterion {number:2d}: {status}  {detail}")
        assert passed, f"criterion {number}: {detail}"

    return report


@pytest.fixture
def skip_criterion():
    def report(number: int, reason: str):
        _CRITERIA[number] = ("SKIP", reason)
        print(f"criterion {number:2d}: SKIP  {reason}")
        pytest.skip(reason)

    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        status, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}")
