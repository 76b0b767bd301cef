"""Webs given by first integrals, and the matrices built from them.

For a web with first integrals ``u_1, ..., u_d`` in ``n`` variables, an
abelian relation ``sum_i g_i(u_i) du_i = 0`` is encoded by the unknowns
``f_i^(h) = g_i^(h)(u_i)``. Differentiating the relation gives the linear
equations collected in the block matrices below.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .expr import Expr, format_expression, parse_expression, variables_used
from .jets import Jet, JetError, eval_jet, multi_indices
from .rational import Q, as_rational


class WebError(ValueError):
    pass


def c(n: int, h: int) -> int:
    """Dimension of degree-``h`` homogeneous polynomials in ``n`` unknowns."""
    if h < 0:
        return 0
    return comb(n - 1 + h, h)


def beta(n: int, k: int) -> int:
    """Row count of the level-``k`` prolongation matrix: ``c(n+1, k) - 1``."""
    return c(n + 1, k) - 1


def threshold_order(n: int, d: int) -> int:
    """The order ``h0`` with ``c(n, h0-1) < d <= c(n, h0)``."""
    h = 0
    while c(n, h) < d:
        h += 1
    return h


def castelnuovo(n: int, d: int) -> int:
    total = 0
    h = 1
    while d - h * (n - 1) - 1 > 0:
        total += d - h * (n - 1) - 1
        h += 1
    return total


@dataclass(frozen=True)
class Combinatorics:
    n: int
    d: int
    h0: int
    pi_prime: int
    pi_castelnuovo: int

    def c(self, h: int) -> int:
        return c(self.n, h)

    def beta(self, k: int) -> int:
        return beta(self.n, k)

    @property
    def calibrated(self) -> bool:
        return self.d == c(self.n, self.h0)

    def expected_rho(self, k: int) -> int:
        """``(k+1) d - beta_{k+1}``: the value of rho_k for ordinary webs, k <= h0-2."""
        return (k + 1) * self.d - beta(self.n, k + 1)


def combinatorics(n: int, d: int) -> Combinatorics:
    if not d > n >= 2:
        raise WebError(f"need d > n >= 2, got n={n}, d={d}")
    h0 = threshold_order(n, d)
    by_sum = sum(d - c(n, h) for h in range(1, h0))
    closed = (h0 - 1) * d - c(n + 1, h0 - 1) + 1
    assert by_sum == closed, (n, d, by_sum, closed)
    return Combinatorics(n, d, h0, by_sum, castelnuovo(n, d))


def enumerate_multi_indices(n: int, j: int) -> list:
    """Degree-``j`` multi-indices: the global row order of every block matrix."""
    return list(multi_indices(n, j))


@dataclass(frozen=True)
class WebSpec:
    variables: tuple
    integrals: tuple
    texts: tuple = field(default=(), compare=False)

    def __post_init__(self):
        n, d = len(self.variables), len(self.integrals)
        if n < 2:
            raise WebError("a web needs at least 2 variables")
        if d <= n:
            raise WebError(f"need more first integrals than variables (d={d}, n={n})")
        for e in self.integrals:
            if any(k >= n for k in variables_used(e)):
                raise WebError("expression uses an undeclared variable")

    @classmethod
    def from_strings(cls, variables: Sequence[str], integrals: Sequence[str]) -> "WebSpec":
        variables = tuple(variables)
        exprs = tuple(parse_expression(t, variables) for t in integrals)
        return cls(variables, exprs, tuple(t.strip() for t in integrals))

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def d(self) -> int:
        return len(self.integrals)

    def integral_texts(self) -> list:
        if self.texts:
            return list(self.texts)
        return [format_expression(e, self.variables) for e in self.integrals]

    def combinatorics(self) -> Combinatorics:
        return combinatorics(self.n, self.d)

    def jets(self, base: Sequence, order: int) -> list:
        base = tuple(as_rational(x) for x in base)
        return [eval_jet(e, base, order) for e in self.integrals]


def _unit(n: int, k: int) -> tuple:
    return tuple(int(i == k) for i in range(n))


class CTable:
    """Coefficients ``C^h_L(u)`` of one first integral, as jets at a base point.

    ``entry(L, h)`` is the jet of ``C^h_L`` (order ``K - |L|`` where ``K`` is
    the order of the input jet); ``value(L, h)`` its value at the base point.
    Entries with ``h >= |L|`` are zero.
    """

    def __init__(self, u: Jet, max_deg: int, split: str = "last"):
        if u.order < max_deg:
            raise JetError(f"jet order {u.order} < requested degree {max_deg}")
        self.base = u.base
        self.max_deg = max_deg
        self.order = u.order
        n = u.n
        du = [u.derivative(k) for k in range(n)]
        table = {}
        for k in range(n):
            table[(_unit(n, k), 0)] = du[k]
        for j in range(2, max_deg + 1):
            target_order = u.order - j
            for big in multi_indices(n, j):
                nz = [k for k, e in enumerate(big) if e]
                mu = nz[-1] if split == "last" else nz[0]
                small = list(big)
                small[mu] -= 1
                small = tuple(small)
                dmu = du[mu]
                table[(big, 0)] = table[(small, 0)].derivative(mu)
                for h in range(1, j - 1):
                    table[(big, h)] = table[(small, h)].derivative(mu) + (
                        table[(small, h - 1)] * dmu
                    ).truncate(target_order)
                table[(big, j - 1)] = (table[(small, j - 2)] * dmu).truncate(target_order)
        self._table = table

    def entry(self, multi_index, h: int) -> Jet:
        mi = tuple(multi_index)
        if h >= sum(mi):
            return Jet.constant(0, self.base, self.order - sum(mi))
        return self._table[(mi, h)]

    def value(self, multi_index, h: int):
        mi = tuple(multi_index)
        if h >= sum(mi):
            return Q(0)
        return self._table[(mi, h)].value

    def items(self):
        return self._table.items()


def c_table(u_jet: Jet, max_deg: int, split: str = "last") -> CTable:
    return CTable(u_jet, max_deg, split)


class Blocks:
    """The blocks ``M_j^(h)`` of a web at one base point, for ``1 <= j <= k_max``.

    With ``jet_order=None`` entries are exact rationals (point evaluations);
    otherwise they are jets of that order (germs of the entries near base).
    """

    def __init__(self, web: WebSpec, base: Sequence, k_max: int, jet_order: int | None = None):
        self.web = web
        self.base = tuple(as_rational(x) for x in base)
        self.k_max = k_max
        self.jet_order = jet_order
        extra = jet_order or 0
        self.u_jets = web.jets(self.base, k_max + extra)
        self.tables = [CTable(u, k_max) for u in self.u_jets]
        if jet_order is None:
            self.zero = Q(0)
        else:
            self.zero = Jet.constant(0, self.base, jet_order)
        self._cache = {}

    @property
    def n(self) -> int:
        return self.web.n

    @property
    def d(self) -> int:
        return self.web.d

    def block(self, j: int, h: int) -> list:
        """``M_j^(h)``: rows by degree-``j`` multi-index, columns by foliation."""
        if not 1 <= j <= self.k_max:
            raise WebError(f"block level {j} outside 1..{self.k_max}")
        key = (j, h)
        if key not in self._cache:
            rows = []
            for mi in multi_indices(self.n, j):
                if h >= j:
                    rows.append([self.zero] * self.d)
                elif self.jet_order is None:
                    rows.append([t.value(mi, h) for t in self.tables])
                else:
                    rows.append([t.entry(mi, h).truncate(self.jet_order) for t in self.tables])
            self._cache[key] = rows
        return self._cache[key]

    def P(self, j: int) -> list:
        return self.block(j, j - 1)

    def M_script(self, k: int) -> list:
        return build_M_script(self, k)

    def Q(self, k_plus_1: int) -> list:
        return build_Q(self, k_plus_1)


def build_blocks(web: WebSpec, base: Sequence, k_max: int, jet_order: int | None = None) -> Blocks:
    return Blocks(web, base, k_max, jet_order)


def build_M_script(blocks: Blocks, k: int) -> list:
    """Block lower-triangular matrix of size ``beta_k x k d`` (diagonal blocks ``P_j``)."""
    d = blocks.d
    rows = []
    for j in range(1, k + 1):
        band = [[] for _ in multi_indices(blocks.n, j)]
        for h in range(k):
            if h < j:
                for r, row in enumerate(blocks.block(j, h)):
                    band[r].extend(row)
            else:
                for r in band:
                    r.extend([blocks.zero] * d)
        rows.extend(band)
    return rows


def build_Q(blocks: Blocks, k_plus_1: int) -> list:
    """``Q_{k+1} = (M_{k+1}^(0) ... M_{k+1}^(k-1))``, size ``c(n,k+1) x k d``."""
    j = k_plus_1
    rows = [[] for _ in multi_indices(blocks.n, j)]
    for h in range(j - 1):
        for r, row in enumerate(blocks.block(j, h)):
            rows[r].extend(row)
    return rows
