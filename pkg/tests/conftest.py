import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from autocrat import LinearRelationSpec, ObjectiveMatrix, build_linear_phi, make_game


@pytest.fixture
def pd():
    return make_game("pd", R=3, S=0, T=5, P=1)


@pytest.fixture
def additive_pd():
    return make_game("pd", R=1, S=-1, T=2, P=0)


@pytest.fixture
def donation():
    return make_game("donation", b=3, c=1)


@pytest.fixture
def hawk_dove():
    return make_game("hawk_dove", V=2, C=4)


@pytest.fixture
def pd_extortion_phi(pd):
    return build_linear_phi(pd, LinearRelationSpec.from_kappa_chi(2.0, 2.0))


@pytest.fixture
def donation_extortion_phi(donation):
    return build_linear_phi(donation, LinearRelationSpec.from_kappa_chi(0.0, 2.0))


@pytest.fixture
def mixed_beats_pure_phi():
    return ObjectiveMatrix(np.array([[4.0, 1.0], [-1.0, 0.0]]))


@pytest.fixture
def three_action_phi():
    return ObjectiveMatrix(np.array([[-2.0, -0.4], [2.0, 5.0], [1.0, 2.0]]))


@pytest.fixture
def plus_minus_phi():
    return ObjectiveMatrix(np.array([[-1.0, -2.0], [1.0, 2.0]]))


def random_phi(rng, max_side=4, integer=True):
    m = rng.integers(2, max_side + 1)
    n = rng.integers(2, max_side + 1)
    if integer:
        return ObjectiveMatrix(rng.integers(-5, 6, size=(m, n)).astype(float))
    return ObjectiveMatrix(rng.uniform(-5, 5, size=(m, n)))
