import pytest

from poslog.config import settings
from poslog.frontend.workspace import Workspace


def load_corpus(*names):
    """Load corpus files in order into one workspace and return their values."""
    workspace = Workspace()
    return [workspace.load(f"{settings.CORPUS_DIR}/{name}") for name in names]


@pytest.fixture(scope="session")
def graph_corpus():
    theory, graphs3, fragment = load_corpus("graph.plt", "graphs3.pls", "graph_fragment.plt")
    return {"theory": theory, "graphs3": graphs3, "fragment": fragment}


@pytest.fixture(scope="session")
def graph_theory(graph_corpus):
    return graph_corpus["theory"]


@pytest.fixture(scope="session")
def graphs3(graph_corpus):
    return graph_corpus["graphs3"]


@pytest.fixture(scope="session")
def graphs4():
    # shares structure names with graphs3, so it gets its own workspace
    _, universe = load_corpus("graph.plt", "graphs4.pls")
    return universe


@pytest.fixture(scope="session")
def graph_fragment(graph_corpus):
    return graph_corpus["fragment"]


@pytest.fixture(scope="session")
def order_corpus():
    theory, chains3 = load_corpus("t_lo.plt", "chains3.pls")
    return {"theory": theory, "chains3": chains3}


@pytest.fixture(scope="session")
def order_theory(order_corpus):
    return order_corpus["theory"]


@pytest.fixture(scope="session")
def chains3(order_corpus):
    return order_corpus["chains3"]


@pytest.fixture(scope="session")
def unary3():
    _, universe = load_corpus("unary.plt", "unary3.pls")
    return universe

