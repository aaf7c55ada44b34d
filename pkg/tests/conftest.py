import pytest

from petvote.group import GroupParams, generate_params, standard_3072
from petvote.rng import Rng


@pytest.fixture(scope="session")
def p23():
    # tiny safe-prime fixture: everything is enumerable by brute force
    return GroupParams(p=23, q=11, g=4)


@pytest.fixture(scope="session")
def params64():
    return generate_params(64, "test-fixture-64")


@pytest.fixture(scope="session")
def params80():
    return generate_params(80, "test-fixture-80")


@pytest.fixture(scope="session")
def params320():
    # wide enough for 16-option code tables
    return generate_params(320, "test-fixture-320")


@pytest.fixture(scope="session")
def std3072():
    return standard_3072()


@pytest.fixture
def rng():
    return Rng("unit-test")


class ForcedRng(Rng):
    """Rng whose nonzero_scalar pops preset values until they run out."""

    def __init__(self, preset, seed="forced"):
        super().__init__(seed)
        self.preset = list(preset)

    def nonzero_scalar(self, q):
        if self.preset:
            return self.preset.pop(0)
        return super().nonzero_scalar(q)

    def child(self, label):
        return self


class ZeroRng(Rng):
    """Degenerate stream: identity permutations, zero scalars, zero bits."""

    def __init__(self):
        super().__init__("zero")

    def scalar(self, q):
        return 0

    def bit(self):
        return 0

    def permutation(self, n):
        return list(range(n))

    def child(self, label):
        return self


@pytest.fixture
def forced_rng_factory():
    return ForcedRng


@pytest.fixture
def zero_rng():
    return ZeroRng()
