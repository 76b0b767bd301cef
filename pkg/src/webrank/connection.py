"""The tautological connection on formal abelian relations and its curvature.

A section of ``R_h`` is a vector of ``(h+1) d`` jets ordered like the columns
of the prolongation matrix: block ``m`` holds ``f^(m) = (g_i^(m)(u_i))_i``.
When the projection ``R_{h+1} -> R_h`` is an isomorphism each section has a
unique top component ``f^(h+1)``; the covariant derivative compares the true
derivative of ``f^(m)`` with the one an abelian relation would have,
``d f_i^(m) = f_i^(m+1) du_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .expr import Expr, differentiate
from .jets import Jet, compose
from .linalg import (
    InconsistentSystemError,
    RankDeficientError,
    evaluate_jets,
    jet_kernel_frame,
    jet_matvec,
    jet_solve,
    rank,
)
from .rational import Q, as_rational
from .web import Blocks, WebSpec, build_blocks, build_M_script, build_Q

FRAME_ORDER = 2


class LiftObstructedError(ArithmeticError):
    """The section has no lift to the next level (rho_{h+1} < rho_h)."""


class ExpansionError(ArithmeticError):
    """A covariant derivative is not in the span of the frame."""


@dataclass
class SectionFrame:
    level: int
    base: tuple
    sections: list  # each a list of (level+1)*d jets

    @property
    def rank(self) -> int:
        return len(self.sections)

    def constant_terms(self) -> list:
        return [[x.value for x in s] for s in self.sections]


@dataclass
class ConnectionData:
    level: int
    frame: SectionFrame
    lifts: list  # top components f^(h+1), one per section
    omega: list  # omega[lam][t][s]: jet coefficient of dx_lam, column s = section s

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def rank(self) -> int:
        return self.frame.rank

    def values(self) -> list:
        """Connection matrices at the base point, one per direction."""
        return [[[x.value for x in row] for row in om] for om in self.omega]


@dataclass
class CurvatureReport:
    level: int
    base: tuple
    components: dict = field(default_factory=dict)  # (lam, mu) -> rho x rho rationals

    @property
    def vanishes(self) -> bool:
        return all(not x for m in self.components.values() for row in m for x in row)

    def component(self, lam: int, mu: int) -> list:
        return self.components[(lam, mu)]


def _blocks(web: WebSpec, h: int, base, jet_order: int, blocks: Blocks | None) -> Blocks:
    if blocks is not None and blocks.k_max >= h + 2 and blocks.jet_order is not None:
        return blocks
    return build_blocks(web, base, h + 2, jet_order)


def frame_R_h(web: WebSpec, h: int, base: Sequence, jet_order: int = FRAME_ORDER,
              blocks: Blocks | None = None) -> SectionFrame:
    """Jet sections spanning ``Ker M_{h+1}`` near ``base``."""
    if jet_order < 2:
        raise ValueError("curvature needs frames of jet order >= 2")
    blocks = _blocks(web, h, base, jet_order, blocks)
    m = build_M_script(blocks, h + 1)
    r = rank(evaluate_jets(m))
    return SectionFrame(h, blocks.base, jet_kernel_frame(m, r))


def lift_section(web: WebSpec, h: int, section: Sequence[Jet], blocks: Blocks | None = None) -> list:
    """Top component ``f^(h+1)`` with ``P_{h+2} f^(h+1) = -Q_{h+2} f``, verified on every row."""
    base = section[0].base
    order = min(x.order for x in section)
    blocks = _blocks(web, h, base, order, blocks)
    p = blocks.P(h + 2)
    qm = build_Q(blocks, h + 2)
    rhs = [-x for x in jet_matvec(qm, section)]
    try:
        return jet_solve(p, rhs)
    except RankDeficientError as exc:
        raise LiftObstructedError(f"P_{h + 2} is not of full column rank at the base point") from exc
    except InconsistentSystemError as exc:
        raise LiftObstructedError(f"section of R_{h} does not lift to R_{h + 1}") from exc


def covariant_derivative(web: WebSpec, h: int, section: Sequence[Jet], lift: Sequence[Jet],
                         u_jets: Sequence[Jet]) -> list:
    """``nabla_lam section`` for every direction ``lam``, as jets of one order less."""
    d = web.d
    out = []
    for lam in range(web.n):
        du = [u.derivative(lam) for u in u_jets]
        vec = []
        for m in range(h + 1):
            upper = lift if m == h else section[(m + 1) * d:(m + 2) * d]
            for i in range(d):
                f = section[m * d + i]
                vec.append(f.derivative(lam) - upper[i] * du[i])
        out.append(vec)
    return out


def connection_form(web: WebSpec, h: int, frame: SectionFrame, blocks: Blocks | None = None) -> ConnectionData:
    """Connection matrices ``omega_lam`` relative to ``frame``: ``nabla s_s = sum_t omega_ts s_t``."""
    sections = frame.sections
    order = min(x.order for s in sections for x in s)
    blocks = _blocks(web, h, frame.base, order, blocks)
    lifts = [lift_section(web, h, s, blocks) for s in sections]
    rho = len(sections)
    columns = [[x.truncate(order - 1) for x in s] for s in sections]
    frame_matrix = [list(row) for row in zip(*columns)]
    omega = [[[None] * rho for _ in range(rho)] for _ in range(web.n)]
    for s, (sec, lift) in enumerate(zip(sections, lifts)):
        for lam, vec in enumerate(covariant_derivative(web, h, sec, lift, blocks.u_jets)):
            try:
                coeffs = jet_solve(frame_matrix, vec)
            except InconsistentSystemError as exc:
                raise ExpansionError("covariant derivative leaves the frame span") from exc
            for t in range(rho):
                omega[lam][t][s] = coeffs[t]
    return ConnectionData(h, frame, lifts, omega)


def _matmul_values(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Q(0)) for j in range(n)] for i in range(n)]


def curvature(conn: ConnectionData) -> CurvatureReport:
    """``K_lm = d_l w_m - d_m w_l + w_l w_m - w_m w_l`` at the base point."""
    n, rho = conn.n, conn.rank
    omega = conn.omega
    values = conn.values()
    report = CurvatureReport(conn.level, conn.frame.base)
    for lam in range(n):
        for mu in range(n):
            if lam == mu:
                continue
            d_lam_mu = [[omega[mu][t][s].derivative(lam).value for s in range(rho)] for t in range(rho)]
            d_mu_lam = [[omega[lam][t][s].derivative(mu).value for s in range(rho)] for t in range(rho)]
            ab = _matmul_values(values[lam], values[mu])
            ba = _matmul_values(values[mu], values[lam])
            report.components[(lam, mu)] = [
                [d_lam_mu[t][s] - d_mu_lam[t][s] + ab[t][s] - ba[t][s] for s in range(rho)]
                for t in range(rho)
            ]
    return report


def connection_at(web: WebSpec, h: int, base: Sequence, jet_order: int = FRAME_ORDER) -> ConnectionData:
    """Frame, lifts and connection form at one base point."""
    base = tuple(as_rational(x) for x in base)
    blocks = build_blocks(web, base, h + 2, jet_order)
    frame = frame_R_h(web, h, base, jet_order, blocks)
    return connection_form(web, h, frame, blocks)


def curvature_at(web: WebSpec, h: int, base: Sequence, jet_order: int = FRAME_ORDER) -> CurvatureReport:
    return curvature(connection_at(web, h, base, jet_order))


def curvature_vanishes(web: WebSpec, h: int, points: Sequence[Sequence]) -> tuple:
    """True iff the curvature of the level-``h`` connection is exactly 0 at every point.

    Returns ``(verdict, reports)`` with one ``CurvatureReport`` per point.
    """
    reports = [curvature_at(web, h, p) for p in points]
    return all(r.vanishes for r in reports), reports


def relation_section(web: WebSpec, h: int, g_exprs: Sequence[Expr], base: Sequence,
                     order: int = FRAME_ORDER) -> list:
    """Jet of ``(g_i^(m)(u_i))_{m <= h, i}`` for functions ``g_i`` of one variable.

    Each ``g_i`` is an expression in a single variable (index 0).
    """
    base = tuple(as_rational(x) for x in base)
    u_jets = web.jets(base, order)
    derivs = [list(g_exprs)]
    for _ in range(h):
        derivs.append([differentiate(g, 0) for g in derivs[-1]])
    section = []
    for m in range(h + 1):
        for g, u in zip(derivs[m], u_jets):
            section.append(compose(g, [u]))
    return section
