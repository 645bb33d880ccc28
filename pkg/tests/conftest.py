import pytest

from kgstats import AlgorithmConfig, HierarchyIndex, compute_statistics, extract_stored_schema, load, simple_path
from kgstats.terms import resolve

NS = "http://example.org/simple/"


class Simple:
    """The bundled Simple graph with its derived structures and name helpers."""

    def __init__(self, g):
        self.g = g
        self.h = HierarchyIndex(g)
        self.ssg = extract_stored_schema(g, self.h)

    def __getitem__(self, name):
        return resolve(self.g.terms, name)

    def st(self, s, p, o):
        return (self[s], self[p], self[o])

    def index(self, alg="stored", **kw):
        return compute_statistics(self.g, self.h, self.ssg, AlgorithmConfig(alg, **kw))


@pytest.fixture(scope="session")
def simple():
    return Simple(load([simple_path()]))


@pytest.fixture(scope="session")
def stored(simple):
    return simple.index("stored")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
