import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class ScriptedRNG:
    """Stand-in generator returning fixed normal/uniform values."""

    def __init__(self, normal=0.0, uniform=0.0):
        self.normal = normal
        self.uniform = uniform

    def standard_normal(self, size=None):
        return self.normal if size is None else np.full(size, self.normal)

    def random(self, size=None):
        return self.uniform if size is None else np.full(size, self.uniform)

    def integers(self, high, size=None):
        return 0 if size is None else np.zeros(size, dtype=int)
