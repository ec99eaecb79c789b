import pytest

from rdsym.expr import evaluate


def central_diff(e, name, point, h=1e-5):
    """Second-order central difference of an expression at a point."""
    hi = dict(point)
    lo = dict(point)
    hi[name] = point[name] + h
    lo[name] = point[name] - h
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)


def fn_central_diff(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.fixture
def cdiff():
    return central_diff
