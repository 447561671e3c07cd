"""Scalar entropy weights and their divided differences."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobolev_lab import ContractViolationError, DomainError, function_from_spec
from sobolev_lab.functions import divided_diff, log_fn, power, xlogx

positive = st.floats(min_value=1e-3, max_value=1e3,
                     allow_nan=False, allow_infinity=False)


def test_divided_diff_square_order1():
    # (9 - 1)/(3 - 1) = 4
    assert divided_diff(power(2.0), 1, 1.0, 3.0) == 4.0


def test_divided_diff_order2_on_the_diagonal():
    p, x = 1.5, 2.0
    got = divided_diff(power(p), 2, x, x)
    assert got == pytest.approx(p * (p - 1.0) * x ** (p - 2.0), rel=1e-13)


def test_divided_diff_xlogx_near_degenerate():
    # f'(x) = ln x + 1; the pair falls into the midpoint branch
    got = divided_diff(xlogx(), 1, 2.0, 2.0 + 1e-12)
    assert got == pytest.approx(math.log(2.0) + 1.0, abs=1e-9)


@given(x=positive, y=positive)
@settings(max_examples=80, deadline=None)
def test_divided_diff_of_square_is_the_sum(x, y):
    # both branches agree: (x^2 - y^2)/(x - y) = x + y = 2 * midpoint
    got = divided_diff(power(2.0), 1, x, y)
    assert got == pytest.approx(x + y, rel=1e-9, abs=1e-12)


@given(x=positive, y=positive)
@settings(max_examples=50, deadline=None)
def test_divided_diff_symmetry_is_exact(x, y):
    f = xlogx()
    assert divided_diff(f, 1, x, y) == divided_diff(f, 1, y, x)


@pytest.mark.parametrize("f", [xlogx(), power(1.5), power(0.5), log_fn()],
                         ids=lambda f: f.label)
def test_finite_difference_consistency(f):
    for x in np.logspace(-3, 2, 25):
        h = 1e-6 * (1.0 + x)
        fd = (f(x + h) - f(x - h)) / (2.0 * h)
        d = f.deriv(x)
        assert abs(fd - d) <= 1e-5 * (1.0 + abs(d))


def test_convexity_flags_match_second_derivative():
    grid = np.logspace(-2, 2, 40)
    for f in (xlogx(), power(1.5), power(2.0)):
        assert f.convex
        assert np.all(f.deriv2(grid) >= 0.0)
    for f in (power(0.5), log_fn()):
        assert not f.convex
        assert np.all(f.deriv2(grid) <= 0.0)


def test_power_exponent_domain():
    for bad in (0.0, -1.0, 2.5):
        with pytest.raises(ContractViolationError):
            power(bad)


def test_zero_handling():
    assert xlogx()(0.0) == 0.0
    assert power(1.5).deriv(0.0) == 0.0
    with pytest.raises(DomainError):
        xlogx().deriv(0.0)
    with pytest.raises(DomainError):
        log_fn()(0.0)


def test_negative_arguments_rejected():
    with pytest.raises(DomainError):
        power(1.5)(-0.1)


def test_spec_roundtrip():
    for f in (xlogx(), power(1.25), log_fn()):
        back = function_from_spec(f.to_spec())
        assert back.label == f.label
    with pytest.raises(ContractViolationError):
        function_from_spec({"tag": "exp"})
