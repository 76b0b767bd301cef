"""Rank sequence of a web and the stopping procedure.

Ranks of matrices whose entries are rational functions of the point are
computed exactly at seeded random rational points; the generic rank is the
maximum over the samples. Verdicts are therefore "generic": correct off a
proper algebraic subset, which random points avoid with high probability.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .connection import (
    ExpansionError,
    LiftObstructedError,
    curvature_at,
)
from .expr import Expr
from .jets import PoleError, eval_jet, multi_indices
from .linalg import LinAlgError, independent_rows, kernel_basis, matvec, rank, solve_pivoted
from .rational import as_rational, random_point
from .web import Combinatorics, WebSpec, build_blocks, build_M_script, build_Q, c

RANK_DETERMINED = "RANK_DETERMINED"
RANK_ZERO = "RANK_ZERO"
INCONCLUSIVE = "INCONCLUSIVE"

VANISHES = "vanishes"
NONZERO = "nonzero"
SKIPPED = "skipped"


class SamplingError(RuntimeError):
    """Every candidate point was rejected within the retry budget."""


@dataclass
class Config:
    h_max: int | None = None
    samples: int = 3
    seed: int = 0
    bound: int = 97
    retries: int = 20
    point: tuple | None = None
    jobs: int = 1


@dataclass
class OrdinarinessVerdict:
    p_ranks: list  # generic rank of P_j, j = 1..h0
    weak_general_position: bool
    ordinary: bool
    first_failure: int | None = None


@dataclass
class CurvatureVerdict:
    h: int
    verdict: str
    reason: str = ""
    points: list = field(default_factory=list)


@dataclass
class AnalysisReport:
    n: int
    d: int
    variables: list
    integrals: list
    combinatorics: Combinatorics
    ordinariness: OrdinarinessVerdict
    rho: list  # rho[h] for h = 0, 1, ...
    m_ranks: list  # generic rank of M_{h+1}
    sample_ranks: list  # per level: rank of M_{h+1} at each sample point
    curvature: list
    status: str
    rank: int | None
    level: int | None
    seed: int
    samples: list
    h_max: int
    start_level: int
    warnings: list = field(default_factory=list)
    justification: list = field(default_factory=list)


def _m_rank(web: WebSpec, point: tuple, k: int) -> int:
    blocks = build_blocks(web, point, k)
    return rank(build_M_script(blocks, k))


def _p_ranks(web: WebSpec, point: tuple, j_max: int) -> list:
    blocks = build_blocks(web, point, j_max)
    return [rank(blocks.P(j)) for j in range(1, j_max + 1)]


def _curvature_task(web: WebSpec, h: int, point: tuple):
    try:
        return curvature_at(web, h, point)
    except (LinAlgError, LiftObstructedError, ExpansionError, PoleError) as exc:
        return exc


class Sampler:
    """Seeded source of rational base points at which every integral is regular."""

    def __init__(self, web: WebSpec, seed: int = 0, bound: int = 97, retries: int = 20):
        self.web = web
        self.rng = random.Random(seed)
        self.bound = bound
        self.retries = retries
        self.drawn = []

    def regular(self, point: tuple) -> bool:
        try:
            self.web.jets(point, 1)
        except PoleError:
            return False
        return True

    def draw(self) -> tuple:
        for _ in range(self.retries):
            p = random_point(self.rng, self.web.n, self.bound)
            if self.regular(p):
                self.drawn.append(p)
                return p
        raise SamplingError(f"no regular point found in {self.retries} draws")

    def draw_many(self, count: int) -> list:
        return [self.draw() for _ in range(count)]


class RankEngine:
    """Generic ranks of the prolongation matrices at a fixed set of sample points."""

    def __init__(self, web: WebSpec, config: Config | None = None):
        self.web = web
        self.config = config or Config()
        self.sampler = Sampler(web, self.config.seed, self.config.bound, self.config.retries)
        if self.config.point is not None:
            point = tuple(as_rational(x) for x in self.config.point)
            if len(point) != web.n:
                raise ValueError(f"point has {len(point)} coordinates, expected {web.n}")
            if not self.sampler.regular(point):
                raise PoleError(f"a first integral has a pole at {point}")
            self.points = [point]
        else:
            self.points = self.sampler.draw_many(self.config.samples)
        self._ranks = {}
        self.warnings = []

    def _map(self, fn, args):
        if self.config.jobs > 1 and len(args) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                return list(pool.map(fn, *zip(*args)))
        return [fn(*a) for a in args]

    def sample_ranks(self, k: int) -> list:
        """Rank of ``M_k`` at each sample point."""
        if k not in self._ranks:
            ranks = self._map(_m_rank, [(self.web, p, k) for p in self.points])
            if len(set(ranks)) > 1:
                self.warnings.append(
                    f"rank of M_{k} differs across samples {ranks}: possible non-constant rank locus"
                )
            self._ranks[k] = ranks
        return self._ranks[k]

    def m_rank(self, k: int) -> int:
        return max(self.sample_ranks(k))

    def rho(self, h: int) -> int:
        return (h + 1) * self.web.d - self.m_rank(h + 1)

    def generic_points(self, k: int) -> list:
        """Sample points where ``M_k`` attains its generic rank."""
        ranks = self.sample_ranks(k)
        top = max(ranks)
        return [p for p, r in zip(self.points, ranks) if r == top]

    def curvature(self, h: int) -> tuple:
        """Curvature of the level-``h`` connection at as many points as there are samples.

        Returns ``(vanishes, points, reports)``. Points where the frame or the
        lift degenerates are replaced by fresh draws within the retry budget.
        """
        wanted = len(self.points)
        good = set(self.generic_points(h + 1)) & set(self.generic_points(h + 2))
        pending = [p for p in self.points if p in good]
        reports, used = [], []
        budget = 0 if self.config.point is not None else self.config.retries
        while len(reports) < wanted:
            if not pending:
                if budget == 0:
                    break
                budget -= 1
                p = self.sampler.draw()
                if all(_m_rank(self.web, p, k) == self.m_rank(k) for k in (h + 1, h + 2)):
                    pending.append(p)
            batch, pending = pending[: wanted - len(reports)], pending[wanted - len(reports):]
            results = self._map(_curvature_task, [(self.web, h, p) for p in batch])
            for p, res in zip(batch, results):
                if isinstance(res, Exception):
                    self.warnings.append(f"curvature K^{h}: point {_fmt(p)} rejected ({res})")
                else:
                    reports.append(res)
                    used.append(p)
        if not reports:
            raise SamplingError(f"no point admits the level-{h} connection")
        return all(r.vanishes for r in reports), used, reports


def _fmt(point) -> str:
    return "(" + ",".join(str(x) for x in point) + ")"


def check_general_position(web: WebSpec, base: Sequence) -> bool:
    """Weak general position at ``base``: the Jacobian ``P_1`` has rank ``n``."""
    blocks = build_blocks(web, base, 1)
    return rank(blocks.P(1)) == web.n


def check_ordinary(web: WebSpec, points: Sequence[Sequence]) -> OrdinarinessVerdict:
    """Generic ranks of ``P_1 .. P_h0``; ordinary iff they are ``c(n,j)`` then ``d``."""
    comb = web.combinatorics()
    h0 = comb.h0
    per_point = [_p_ranks(web, tuple(p), h0) for p in points]
    ranks = [max(col) for col in zip(*per_point)]
    failure = None
    for j in range(1, h0 + 1):
        target = c(web.n, j) if j < h0 else web.d
        if ranks[j - 1] != target:
            failure = j
            break
    return OrdinarinessVerdict(ranks, ranks[0] == web.n, failure is None, failure)


def rho(web: WebSpec, h: int, points: Sequence[Sequence]) -> int:
    """``rho_h = (h+1) d - rank M_{h+1}``, with the generic (max) rank over ``points``."""
    return (h + 1) * web.d - max(_m_rank(web, tuple(p), h + 1) for p in points)


def rho_at(web: WebSpec, h: int, point: Sequence) -> int:
    return (h + 1) * web.d - _m_rank(web, tuple(as_rational(x) for x in point), h + 1)


def characteristic_matrix(web: WebSpec, h: int, point: Sequence, frame: Sequence | None = None) -> list:
    """Compatibility residuals ``Delta(s, l)`` of the systems over ``R_{h-1}``.

    ``frame`` is a basis of ``R_{h-1} = Ker M_h`` at ``point`` (computed when
    omitted). For each basis vector the cramerian subsystem of ``P_{h+1}`` is
    solved and the remaining equations give one residual each.
    """
    if h < 1:
        raise ValueError("the characteristic path needs h >= 1")
    point = tuple(as_rational(x) for x in point)
    blocks = build_blocks(web, point, h + 1)
    if frame is None:
        frame = kernel_basis(build_M_script(blocks, h))
    p = blocks.P(h + 1)
    qm = build_Q(blocks, h + 1)
    chosen = independent_rows(p, limit=web.d)
    if len(chosen) < web.d:
        raise LinAlgError(f"P_{h + 1} has rank {len(chosen)} < d = {web.d}")
    deleted = [r for r in range(len(p)) if r not in set(chosen)]
    delta = [[None] * len(frame) for _ in deleted]
    for s, eps in enumerate(frame):
        rhs = [-x for x in matvec(qm, eps)]
        sol, _ = solve_pivoted([p[r] for r in chosen], [rhs[r] for r in chosen])
        for k, r in enumerate(deleted):
            delta[k][s] = sum((a * b for a, b in zip(p[r], sol)), -rhs[r])
    return delta


def rho_via_char_determinants(web: WebSpec, h: int, point: Sequence, frame: Sequence | None = None) -> int:
    """``rho_h = rho_{h-1} - rank(Delta^h)`` at ``point``."""
    point = tuple(as_rational(x) for x in point)
    if frame is None:
        frame = kernel_basis(build_M_script(build_blocks(web, point, h), h))
    delta = characteristic_matrix(web, h, point, frame)
    return len(frame) - (rank(delta) if delta else 0)


def _is_affine(web: WebSpec, points: Sequence[Sequence]) -> bool:
    """All second derivatives of all first integrals vanish at every point."""
    second = multi_indices(web.n, 2)
    return not any(u[mi] for p in points for u in web.jets(p, 2) for mi in second)


def analyze_rank(web: WebSpec, config: Config | None = None) -> AnalysisReport:
    """Run the level loop until the rank is determined, is zero, or ``h_max`` is hit."""
    config = config or Config()
    comb = web.combinatorics()
    engine = RankEngine(web, config)
    verdict = check_ordinary(web, engine.points)
    h_max = config.h_max if config.h_max is not None else comb.h0 + 8
    start = comb.h0 - 2 if verdict.ordinary else 0
    warnings = []
    justification = []
    if not verdict.weak_general_position:
        warnings.append("web is not in weak general position at the sample points (rank P_1 < n)")
    if not verdict.ordinary:
        warnings.append(
            f"web is not ordinary: rank P_{verdict.first_failure} = {verdict.p_ranks[verdict.first_failure - 1]}"
        )

    curv = []
    status, result, level = INCONCLUSIVE, None, None
    h = start
    while h <= h_max:
        r_h = engine.rho(h)
        if r_h == 0:
            status, result, level = RANK_ZERO, 0, h
            break
        r_next = engine.rho(h + 1)
        if r_h != r_next:
            h += 1
            continue
        r_peek = engine.rho(h + 2)
        if r_next > r_peek:
            curv.append(CurvatureVerdict(h, SKIPPED, f"a priori nonzero: rho_{h + 1} > rho_{h + 2}"))
            h += 1
            continue
        p_rank = max(_p_ranks(web, p, h + 2)[-1] for p in engine.points)
        if p_rank < web.d:
            curv.append(CurvatureVerdict(h, SKIPPED, f"rank P_{h + 2} = {p_rank} < d: no unique lift"))
            h += 1
            continue
        vanishes, used, _ = engine.curvature(h)
        curv.append(CurvatureVerdict(h, VANISHES if vanishes else NONZERO, "", [list(p) for p in used]))
        if vanishes:
            status, result, level = RANK_DETERMINED, r_h, h
            break
        h += 1

    # every level whose matrix was ranked, from h = 0
    top = max(engine._ranks) - 1
    for k in range(top + 1):
        engine.rho(k)
    rhos = [engine.rho(k) for k in range(top + 1)]
    if not verdict.ordinary and status == RANK_DETERMINED and _is_affine(web, engine.points):
        k = level
        justification.append(
            f"parallelizable web: rho_{k} = rho_{k + 1} and rank P_j = d for j >= {k + 2}, "
            f"so the sequence is stationary from rho_{k} (rank P_j is non-decreasing in j)"
        )
    if status == RANK_DETERMINED and verdict.ordinary and _is_affine(web, engine.points):
        justification.append(f"ordinary parallelizable web: maximal rank π′(n,d) = {comb.pi_prime}")

    return AnalysisReport(
        n=web.n,
        d=web.d,
        variables=list(web.variables),
        integrals=web.integral_texts(),
        combinatorics=comb,
        ordinariness=verdict,
        rho=rhos,
        m_ranks=[engine.m_rank(k + 1) for k in range(len(rhos))],
        sample_ranks=[engine.sample_ranks(k + 1) for k in range(len(rhos))],
        curvature=curv,
        status=status,
        rank=result,
        level=level,
        seed=config.seed,
        samples=[list(p) for p in engine.sampler.drawn] if config.point is None else [list(engine.points[0])],
        h_max=h_max,
        start_level=start,
        warnings=warnings + engine.warnings,
        justification=justification,
    )


def proposition_5_2_check(f: Expr, n: int, points: Sequence[Sequence] | None = None,
                          samples: int = 3, seed: int = 0, bound: int = 97, retries: int = 20) -> bool:
    """Does the ``(n+1)``-web ``(x_1, ..., x_n, F)`` carry an abelian relation?

    Criterion: ``d_k(F'_i / F'_j) = 0`` for distinct ``i, j, k``, checked in
    the logarithm-free form ``F''_ik F'_j - F''_jk F'_i = 0`` at each point.
    """
    if n < 3:
        raise ValueError("the criterion needs n >= 3")
    rng = random.Random(seed)
    checked = 0
    queue = [tuple(as_rational(x) for x in p) for p in points] if points is not None else []
    attempts = 0
    while checked < (len(queue) if points is not None else samples):
        if points is not None:
            p = queue[checked]
        else:
            if attempts >= retries:
                raise SamplingError("no point with all F'_i nonzero")
            attempts += 1
            p = random_point(rng, n, bound)
        try:
            jet = eval_jet(f, p, 2)
        except PoleError:
            if points is not None:
                raise
            continue
        first = [jet[_unit(n, i)] for i in range(n)]
        if any(not x for x in first):
            if points is not None:
                raise ValueError(f"F'_i vanishes at {p}")
            continue
        second = [[jet[_pair(n, i, k)] for k in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if len({i, j, k}) == 3 and second[i][k] * first[j] != second[j][k] * first[i]:
                        return False
        checked += 1
    return True


def _unit(n: int, i: int) -> tuple:
    return tuple(int(t == i) for t in range(n))


def _pair(n: int, i: int, k: int) -> tuple:
    mi = [0] * n
    mi[i] += 1
    mi[k] += 1
    return tuple(mi)
