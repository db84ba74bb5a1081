import pytest

from mathspec.knowledge import load_builtin


@pytest.fixture(scope="session")
def store():
    return load_builtin()


@pytest.fixture(scope="session")
def coil(store):
    return store.lookup_example("Diff_App/coil-kernel")


@pytest.fixture(scope="session")
def coil_problem(store):
    return store.lookup_problem("univariate_calculus/Optimisation")


@pytest.fixture(scope="session")
def coil_method(store):
    return store.lookup_method("Optimisation/by_univariate_calculus")
