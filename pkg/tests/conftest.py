import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")


@pytest.fixture
def line():
    from varlebesgue.grid import make_grid

    return make_grid(1, [-2.0, 2.0], 256)


@pytest.fixture
def square():
    from varlebesgue.grid import make_grid

    return make_grid(2, [-1.0, 1.0], 24)


def indicator(a, b):
    def f(x):
        x = np.asarray(x)
        return ((x >= a) & (x <= b)).astype(float)

    return f


def pytest_terminal_summary(terminalreporter):
    import sys

    results = {}
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and hasattr(mod, "RESULTS"):
            results.update(mod.RESULTS)
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
