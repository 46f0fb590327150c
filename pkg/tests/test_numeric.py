from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbo.numeric import (
    as_matrix,
    as_vector,
    dot,
    gauss_solve,
    mat_vec,
    nullspace_vector,
    rat_format,
    rat_parse,
)

rationals = st.fractions(
    min_value=-20, max_value=20, max_denominator=12)


def test_parse_reduces():
    assert rat_parse("3/6") == F(1, 2)
    assert rat_parse("-4") == F(-4)
    assert rat_parse("0/5") == 0


def test_parse_rejects_bad_literals():
    for text in ("7/0", "1.5", "2e3", "1/2/3", "", "one", "--3", "1 / 2"):
        with pytest.raises(ValueError):
            rat_parse(text)


def test_format_round_trips():
    for value in (F(1, 2), F(-4), F(0), F(22, 7)):
        assert rat_parse(rat_format(value)) == value


def test_gauss_identity():
    assert gauss_solve([[1, 0], [0, 1]], [1, 2]) == (F(1), F(2))


def test_gauss_singular_is_none():
    assert gauss_solve([[1, 1], [2, 2]], [1, 2]) is None


def test_gauss_diagonal():
    assert gauss_solve([[2, 0], [0, 4]], [1, 1]) == (F(1, 2), F(1, 4))


def test_gauss_dimension_errors():
    with pytest.raises(ValueError):
        gauss_solve([[1, 2]], [1])
    with pytest.raises(ValueError):
        gauss_solve([[1]], [1, 2])


def test_matrix_rejects_ragged():
    with pytest.raises(ValueError):
        as_matrix([[1, 2], [3]])


def test_matrix_width_pinning():
    assert as_matrix([], width=3) == ()
    with pytest.raises(ValueError):
        as_matrix([[1, 2]], width=3)


@given(rationals, rationals, rationals)
@settings(max_examples=60, deadline=None)
def test_field_axioms_exact(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c


@given(st.lists(st.lists(rationals, min_size=3, max_size=3),
                min_size=3, max_size=3),
       st.lists(rationals, min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_gauss_solution_is_exact(rows, target):
    m = as_matrix(rows)
    r = as_vector(target)
    solution = gauss_solve(m, r)
    if solution is not None:
        assert mat_vec(m, solution) == r


def test_nullspace_vector():
    z = nullspace_vector([(F(1), F(1), F(0))], 3)
    assert z is not None and dot((F(1), F(1), F(0)), z) == 0
    assert nullspace_vector([(F(1), F(0)), (F(0), F(1))], 2) is None
