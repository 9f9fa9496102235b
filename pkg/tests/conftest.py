import numpy as np
import pytest

from skewprod import graphs, groups


@pytest.fixture
def z2():
    return groups.cyclic_group(2)


@pytest.fixture
def z3():
    return groups.cyclic_group(3)


@pytest.fixture
def e1():
    return graphs.DirectedGraph(["v", "w"], [("f", "v", "w")])


@pytest.fixture
def chain2():
    return graphs.DirectedGraph(
        ["u", "v", "w"], [("e1", "u", "v"), ("e2", "v", "w")]
    )


@pytest.fixture
def e1_z2_labeling(e1, z2):
    return groups.make_labeling(e1, {"f": "g"}, z2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
