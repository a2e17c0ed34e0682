import pytest

from homsec.residuals import Sampler
from homsec.tensor import Patch


@pytest.fixture
def plane():
    return Patch(["x", "y"], [(-1.0, 1.0), (-1.0, 1.0)])


@pytest.fixture
def space():
    return Patch(["x", "y", "z"], [(-1.0, 1.0)] * 3)


def max_abs(patch, f, n=32, seed=42):
    """Largest |component| of a field (or list of expressions) over sample points."""
    vals = f if isinstance(f, list) else f.values()
    return Sampler(patch, n, seed).max_abs(vals)[0]


def at(expr, **point):
    """Evaluate an expression at a single named point."""
    from homsec.expr import evaluate

    return float(evaluate(expr, {k: float(v) for k, v in point.items()}))


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_lines(request):
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
