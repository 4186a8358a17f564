import pytest

from poi.dist import DiscreteDistribution
from poi.model import (
    Direction,
    GraphicMatroid,
    MatchingSystem,
    PoiInstance,
    ProbeElement,
    SetCoverFeasibility,
    UniformMatroid,
)


def D(masses):
    return DiscreteDistribution.from_mapping(masses)


def box(eid, masses, price=0.0, **kw):
    return ProbeElement(eid, D(masses), price, **kw)


def pandora(*elements):
    return PoiInstance(tuple(elements), UniformMatroid(rank=1))


@pytest.fixture
def two_box():
    """A: sure 0.4 for free; B: fair coin on {0, 1} at price 0.1."""
    return pandora(box("A", {0.4: 1.0}), box("B", {0: 0.5, 1: 0.5}, 0.1))


@pytest.fixture
def triangle_matching():
    edges = (("e12", "1", "2"), ("e13", "1", "3"), ("e23", "2", "3"))
    els = (box("e12", {3: 1}), box("e13", {1: 1}), box("e23", {2: 1}))
    return PoiInstance(els, MatchingSystem(edges=edges))


@pytest.fixture
def small_setcover():
    members = (("S1", ("a", "b")), ("S2", ("a",)), ("S3", ("b",)))
    c = SetCoverFeasibility(direction=Direction.COVERING, universe=("a", "b"), members=members)
    els = (box("S1", {3: 1}), box("S2", {1: 1}), box("S3", {1: 1}))
    return PoiInstance(els, c)


@pytest.fixture
def path_graph_basis():
    c = GraphicMatroid(direction=Direction.COVERING, edges=(("ab", "a", "b"), ("bc", "b", "c")))
    return c


# acceptance summary: tests call record_criterion(number, title, passed, detail)

def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def record_criterion(request):
    store = request.config._acceptance

    def record(number, title, passed, detail=""):
        store[number] = (title, bool(passed), detail)
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
        print(line + (f" ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_acceptance", {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        title, passed, detail = store[number]
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
