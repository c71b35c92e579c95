import pytest
from hypothesis import given, strategies as st

from btnf.rational import Q, is_perfect_power, parse_rational, qstr


def test_parse_integer_and_fraction():
    assert parse_rational("7") == 7
    assert parse_rational(" -3/12 ") == Q(-1, 4)


@pytest.mark.parametrize("text", ["0.5", "1e3", "1/0", "x", ""])
def test_parse_rejects_non_rationals(text):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(text)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_qstr_round_trip(num, den):
    q = Q(num, den)
    assert parse_rational(qstr(q)) == q


@given(st.integers(-50, 50), st.integers(1, 50), st.integers(1, 4))
def test_perfect_power_inverts_power(num, den, n):
    q = Q(num, den)
    root = is_perfect_power(q ** n, n)
    assert root is not None and root ** n == q ** n


def test_perfect_power_none_for_irrational_root():
    assert is_perfect_power(Q(2), 2) is None
    assert is_perfect_power(Q(-4), 2) is None
    assert is_perfect_power(Q(-8, 27), 3) == Q(-2, 3)
