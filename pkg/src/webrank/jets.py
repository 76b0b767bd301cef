"""Truncated multivariate Taylor expansions with exact coefficients.

A ``Jet`` of order K at a base point stores every raw partial derivative
``d^L f(base)`` with ``|L| <= K`` (not divided by ``L!``). Coefficients live in
a flat tuple indexed by a global monomial order: by degree, then descending
lexicographic within a degree. Truncation to a lower order is a prefix.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

from .expr import Expr, evaluate
from .rational import Q, Rational, as_rational


class JetError(ValueError):
    """Mismatched base point, order or dimension."""


class NonUnitError(ArithmeticError):
    """Division by a jet whose value at the base point is zero."""


class PoleError(ArithmeticError):
    """An expression has a pole at the requested base point."""


@lru_cache(maxsize=None)
def multi_indices(n: int, degree: int) -> tuple:
    """All multi-indices of length ``n`` and degree ``degree``, lex descending."""
    if n == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(n - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomials(n: int, order: int) -> tuple:
    """Multi-indices of degree <= ``order`` in storage order."""
    out = []
    for j in range(order + 1):
        out.extend(multi_indices(n, j))
    return tuple(out)


def size(n: int, order: int) -> int:
    return comb(n + order, n)


@lru_cache(maxsize=None)
def _index_map(n: int, order: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, order))}


def index_of(multi_index: Sequence[int]) -> int:
    """Storage position of ``multi_index`` (independent of the jet order)."""
    mi = tuple(multi_index)
    n, deg = len(mi), sum(mi)
    return size(n, deg - 1) + multi_indices(n, deg).index(mi) if deg else 0


@lru_cache(maxsize=None)
def _product_table(n: int, order: int) -> tuple:
    """For each target L: the triples (i, j, c) with L_i + L_j = L, c = prod binom."""
    mons = monomials(n, order)
    where = _index_map(n, order)
    table = []
    for target in mons:
        terms = []
        for i, left in enumerate(mons):
            if sum(left) > sum(target):
                break
            if all(a <= b for a, b in zip(left, target)):
                right = tuple(b - a for a, b in zip(left, target))
                c = 1
                for a, b in zip(left, target):
                    c *= comb(b, a)
                terms.append((i, where[right], c))
        table.append(tuple(terms))
    return tuple(table)


@lru_cache(maxsize=None)
def _shift_table(n: int, order: int, var: int) -> tuple:
    """Positions of L + 1_var for every L of degree <= order - 1."""
    where = _index_map(n, order)
    out = []
    for m in monomials(n, order - 1):
        shifted = list(m)
        shifted[var] += 1
        out.append(where[tuple(shifted)])
    return tuple(out)


class Jet:
    """Immutable truncated Taylor expansion (raw derivatives) at ``base``."""

    __slots__ = ("base", "order", "_c")

    def __init__(self, base: Sequence, order: int, coeffs: Sequence):
        self.base = tuple(base)
        self.order = order
        self._c = tuple(coeffs)
        if len(self._c) != size(len(self.base), order):
            raise JetError("coefficient count does not match order")

    @property
    def n(self) -> int:
        return len(self.base)

    @classmethod
    def constant(cls, value, base: Sequence, order: int) -> "Jet":
        base = tuple(base)
        c = [Q(0)] * size(len(base), order)
        c[0] = as_rational(value)
        return cls(base, order, c)

    @classmethod
    def variable(cls, var: int, base: Sequence, order: int) -> "Jet":
        base = tuple(base)
        n = len(base)
        c = [Q(0)] * size(n, order)
        c[0] = as_rational(base[var])
        if order >= 1:
            unit = [0] * n
            unit[var] = 1
            c[index_of(unit)] = Q(1)
        return cls(base, order, c)

    @classmethod
    def from_mapping(cls, base: Sequence, order: int, coeffs: Mapping) -> "Jet":
        base = tuple(base)
        c = [as_rational(coeffs.get(m, 0)) for m in monomials(len(base), order)]
        return cls(base, order, c)

    @property
    def coeffs(self) -> dict:
        return dict(zip(monomials(self.n, self.order), self._c))

    @property
    def value(self) -> Rational:
        return self._c[0]

    @property
    def data(self) -> tuple:
        return self._c

    def __getitem__(self, multi_index) -> Rational:
        mi = tuple(multi_index)
        if sum(mi) > self.order:
            raise JetError(f"{mi} exceeds jet order {self.order}")
        return self._c[index_of(mi)]

    def __repr__(self) -> str:
        return f"Jet(base={[str(b) for b in self.base]}, order={self.order}, coeffs={[str(c) for c in self._c]})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            return NotImplemented
        return self.order == other.order and self.base == other.base and self._c == other._c

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self._c)

    def is_constant(self) -> bool:
        return not any(self._c[1:])

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise JetError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.base, order, self._c[: size(self.n, order)])

    def derivative(self, var: int) -> "Jet":
        """Partial derivative in ``var``; the result has order one less."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        c = self._c
        return Jet(self.base, self.order - 1, [c[k] for k in _shift_table(self.n, self.order, var)])

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        """Return (self_coeffs, other_coeffs, order) or None for scalars."""
        if self.base is not other.base and self.base != other.base:
            raise JetError("jets have different base points")
        order = min(self.order, other.order)
        m = size(self.n, order)
        return self._c[:m], other._c[:m], order

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, order = self._coerce(other)
            return Jet(self.base, order, [x + y for x, y in zip(a, b)])
        c = list(self._c)
        c[0] = c[0] + other
        return Jet(self.base, self.order, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, self.order, [-x for x in self._c])

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b, order = self._coerce(other)
            return Jet(self.base, order, [x - y for x, y in zip(a, b)])
        c = list(self._c)
        c[0] = c[0] - other
        return Jet(self.base, self.order, c)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "Jet":
        return Jet(self.base, self.order, [x * s for x in self._c])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        a, b, order = self._coerce(other)
        if not any(b[1:]):
            s = b[0]
            return Jet(self.base, order, [x * s for x in a])
        if not any(a[1:]):
            s = a[0]
            return Jet(self.base, order, [x * s for x in b])
        return Jet(self.base, order, _convolve(a, b, self.n, order))

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self._c
        a0 = a[0]
        if not a0:
            raise NonUnitError("jet has zero constant term")
        inv = 1 / Q(a0)
        if not any(a[1:]):
            return Jet.constant(inv, self.base, self.order)
        table = _product_table(self.n, self.order)
        b = [Q(0)] * len(a)
        b[0] = inv
        for t in range(1, len(a)):
            s = Q(0)
            for i, j, k in table[t]:
                if i == 0:
                    continue
                x = a[i]
                if x:
                    y = b[j]
                    if y:
                        s += x * y if k == 1 else k * x * y
            b[t] = -s * inv
        return Jet(self.base, self.order, b)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if not other:
            raise ZeroDivisionError("jet divided by zero")
        return self.scale(1 / Q(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise JetError("only non-negative integer powers are supported")
        result = Jet.constant(1, self.base, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def _convolve(a, b, n: int, order: int) -> list:
    table = _product_table(n, order)
    nz = [bool(x) for x in a]
    out = []
    for terms in table:
        s = Q(0)
        for i, j, k in terms:
            if nz[i]:
                y = b[j]
                if y:
                    s += a[i] * y if k == 1 else k * a[i] * y
        out.append(s)
    return out


def jet_product(a: Jet, b: Jet) -> Jet:
    """Leibniz product of two jets with equal base point and order."""
    if a.order != b.order:
        raise JetError(f"jet orders differ: {a.order} != {b.order}")
    if a.base != b.base:
        raise JetError("jets have different base points")
    return a * b


def jet_reciprocal(a: Jet) -> Jet:
    """Inverse in the truncated series ring; requires a nonzero value at base."""
    return a.reciprocal()


def variable_jets(base: Sequence, order: int) -> list:
    base = tuple(as_rational(c) for c in base)
    return [Jet.variable(k, base, order) for k in range(len(base))]


def compose(e: Expr, jets: Sequence[Jet]) -> Jet:
    """Jet of ``e(f_1, ..., f_m)`` given the jets of the ``f_k``."""
    if not jets:
        raise JetError("need at least one jet to fix base and order")
    try:
        result = evaluate(e, jets)
    except (NonUnitError, ZeroDivisionError) as exc:
        raise PoleError(f"pole at base point {jets[0].base}") from exc
    if not isinstance(result, Jet):
        result = Jet.constant(result, jets[0].base, min(j.order for j in jets))
    return result


def eval_jet(e: Expr, base: Sequence, order: int) -> Jet:
    """All partial derivatives of ``e`` up to ``order`` at ``base``, exactly."""
    if order < 0:
        raise JetError("order must be non-negative")
    return compose(e, variable_jets(base, order))
