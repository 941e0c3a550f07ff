import math

import pytest
from hypothesis import given, strategies as st

from semidyn.expr import parse
from semidyn.orbit import iterate

ZEXP = parse("z*exp(-(z^2/2 + 3*z/2 - 1))")
ATTRACTING = (math.sqrt(17) - 3) / 2


def test_exp_escapes_from_one():
    v = iterate(parse("exp(z)"), 1, 50, 1e10)
    assert v.outcome == "Escaped" and v.steps_used <= 5 and v.modulus > 1e10


def test_sin_fixed_point():
    v = iterate(parse("sin(z)"), 0, 50, 1e10)
    assert v.outcome == "Bounded" and v.point == 0 and v.steps_used == 50


def test_zexp_orbit_settles_on_attracting_fixed_point():
    # 0 is a repelling fixed point (derivative e); orbits near it are pushed
    # to the attracting one at (sqrt(17) - 3) / 2
    assert ZEXP(0j) == 0
    v = iterate(ZEXP, 0.1, 200, 1e10)
    assert v.outcome == "Bounded"
    assert abs(v.point - ATTRACTING) < 1e-6


def test_overflow_counts_as_escape():
    v = iterate(parse("exp(exp(z))"), 10, 10, 1e300)
    assert v.escaped and v.overflow


def test_non_finite_start_is_indeterminate():
    assert iterate(parse("z"), complex(math.inf, 0)).outcome == "Indeterminate"


def test_bad_parameters():
    with pytest.raises(ValueError):
        iterate(parse("z"), 0, 0)
    with pytest.raises(ValueError):
        iterate(parse("z"), 0, 10, 1.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 30), st.integers(0, 30))
def test_escape_step_monotone_in_cap(x, y, n, extra):
    m = parse("z^2 + 0.3")
    a = iterate(m, complex(x, y), n, 1e6)
    b = iterate(m, complex(x, y), n + extra, 1e6)
    if a.escaped:
        assert b.escaped and b.steps_used == a.steps_used
