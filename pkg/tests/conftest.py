import numpy as np
import pytest

from torusdyn import (
    CAT_MAP_ENTRIES,
    SALEM_QUARTIC_ENTRIES,
    BumpField,
    IntegerAutomorphism,
    PerturbedMap,
    identity_automorphism,
)


@pytest.fixture(scope="session")
def cat():
    return IntegerAutomorphism(CAT_MAP_ENTRIES)


@pytest.fixture(scope="session")
def salem():
    """Ergodic d=4 automorphism with a 2-D unit-modulus (non-root-of-unity) center."""
    return IntegerAutomorphism(SALEM_QUARTIC_ENTRIES)


@pytest.fixture(scope="session")
def identity2():
    return identity_automorphism(2)


@pytest.fixture(scope="session")
def block_unipotent():
    """Cat map with a unipotent 2x2 center block appended."""
    return IntegerAutomorphism([[2, 1, 0, 0], [1, 1, 0, 0],
                                [0, 0, 1, 1], [0, 0, 0, 1]])


@pytest.fixture(scope="session")
def bump_field2():
    return BumpField(centers=[[0.3, 0.6], [0.7, 0.2]], radii=[0.2, 0.15],
                     directions=[[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def perturbed_cat(cat, bump_field2):
    return PerturbedMap(cat, bump_field2, 0.005)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
