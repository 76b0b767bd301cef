"""Exact rational scalars.

All arithmetic in the package runs over ``gmpy2.mpq``, which keeps values in
lowest terms with a positive denominator after every operation.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import gmpy2

Q = gmpy2.mpq
Rational = type(Q(0))

ZERO = Q(0)
ONE = Q(1)


def as_rational(value) -> Rational:
    """Coerce ints, strings ("p/q", "1.25") and Fractions to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string or Fraction instead")
    return Q(value)


def to_str(value) -> str:
    """Canonical text form: "p/q", or "p" when the denominator is 1."""
    return str(as_rational(value))


def parse_point(text: str) -> tuple:
    """Parse "1,2/3,-5" into a tuple of rationals."""
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(not p for p in parts):
        raise ValueError(f"malformed point: {text!r}")
    try:
        return tuple(Q(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"malformed point: {text!r}") from exc


def bit_size(value) -> int:
    """Bit length of numerator plus denominator; used to rank pivot candidates."""
    return int(value.numerator.bit_length()) + int(value.denominator.bit_length())


def random_rational(rng, bound: int) -> Rational:
    """Nonzero numerator in [-bound, bound], denominator in [1, bound].

    Zero is excluded: coordinate hyperplanes are the most common special locus
    of hand-written webs.
    """
    num = rng.randint(1, bound) * rng.choice((-1, 1))
    return Q(num, rng.randint(1, bound))


def random_point(rng, n: int, bound: int) -> tuple:
    return tuple(random_rational(rng, bound) for _ in range(n))


def vector(values: Iterable) -> list:
    return [as_rational(v) for v in values]


def format_point(point: Sequence) -> str:
    return "(" + ", ".join(to_str(c) for c in point) + ")"
