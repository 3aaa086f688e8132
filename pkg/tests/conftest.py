import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from slingloiter.config import read_config
from slingloiter.grasp import LoadModel

# lines recorded by test_acceptance.report, echoed in the terminal summary
ACCEPTANCE_LINES = []

REF_ANCHORS = np.array([[0.259, 0.034, 0.399], [-0.156, 0.269, 0.556], [-0.1223, -0.1399, 0.1778]])


def random_load(rng, n, spread=1.0):
    anchors = rng.normal(scale=spread, size=(n, 3))
    return LoadModel(mass=rng.uniform(0.2, 5.0), inertia=rng.uniform(0.01, 1.0, 3), anchors=anchors)


def random_rotation(rng):
    return Rotation.random(random_state=rng).as_matrix()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def n3():
    return read_config("ref-n3")


@pytest.fixture(scope="session")
def n2():
    return read_config("ref-n2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
