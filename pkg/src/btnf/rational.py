"""Exact rational scalars.

Every coefficient in the engine is a ``gmpy2.mpq``; ``Q`` is the constructor
used throughout so the backing type is chosen in one place.
"""
import re

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text):
    """Parse ``'p'`` or ``'p/q'``; decimals and exponents are rejected."""
    m = _RATIONAL.match(text)
    if m is None:
        raise ValueError(f"not an exact rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return mpq(num, den)


def qstr(value):
    return str(Q(value))


def is_perfect_power(value, n):
    """Return the rational n-th root of ``value`` if it exists, else None."""
    import gmpy2

    value = Q(value)
    if value < 0:
        if n % 2 == 0:
            return None
        root = is_perfect_power(-value, n)
        return None if root is None else -root
    num, ok1 = gmpy2.iroot(value.numerator, n)
    den, ok2 = gmpy2.iroot(value.denominator, n)
    if ok1 and ok2:
        return Q(int(num), int(den))
    return None
