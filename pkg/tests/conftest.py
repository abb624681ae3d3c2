import numpy as np
import pytest

from eistwist.group import builtin_group
from eistwist.representation import make_representation, trivial_representation


@pytest.fixture(scope="session")
def gamma2():
    return builtin_group("gamma2")


@pytest.fixture(scope="session")
def torus():
    return builtin_group("punctured_torus")


@pytest.fixture(scope="session")
def trivial_rep(gamma2):
    return trivial_representation(gamma2)


def rotation_twist(group, theta1=0.3, theta2=0.35, alpha=0.6):
    """Unitary 2-dim twist: parabolic generators map to complex rotations
    diag(1, e(theta)) conjugated by a mixing rotation; free parameters are
    the two angles and the mixing angle.

    On gamma2 every cusp stabilizer generator is a word in the two parabolic
    generators, so any twist unitary at the cusps is unitary outright; this
    is the richest twist the cross-oracle can legally use there.
    """
    d1 = np.diag([1.0, np.exp(2j * np.pi * theta1)])
    R = np.array([[np.cos(alpha), -np.sin(alpha)],
                  [np.sin(alpha), np.cos(alpha)]])
    d2 = R @ np.diag([1.0, np.exp(2j * np.pi * theta2)]) @ R.conj().T
    return make_representation(group, [d1, np.linalg.inv(d1),
                                       d2, np.linalg.inv(d2)])


def torus_twist(group, a=1.25, b=1.4):
    """Genuinely non-unitary twist on the punctured torus: the hyperbolic
    generators map to diagonal stretches, whose commutator (the cusp
    stabilizer image) is the identity, hence unitary at the cusp."""
    A = np.diag([a, 1.0 / a])
    B = np.diag([b, 1.0 / b])
    return make_representation(group, [A, np.linalg.inv(A),
                                       B, np.linalg.inv(B)])


@pytest.fixture(scope="session")
def rot_rep(gamma2):
    return rotation_twist(gamma2)


@pytest.fixture(scope="session")
def torus_rep(torus):
    return torus_twist(torus)
