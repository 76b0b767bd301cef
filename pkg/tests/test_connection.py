import random

import pytest

from webrank.connection import (
    FRAME_ORDER,
    LiftObstructedError,
    SectionFrame,
    connection_at,
    connection_form,
    covariant_derivative,
    curvature,
    curvature_at,
    curvature_vanishes,
    frame_R_h,
    lift_section,
    relation_section,
)
from webrank.expr import parse_expression
from webrank.jets import Jet, eval_jet
from webrank.linalg import generalized_inverse, jet_matvec, matvec, rank
from webrank.rational import Q
from webrank.web import WebSpec, build_blocks, build_M_script, build_Q

from oracles import quadric_derivatives, quadric_hand_frame, quadric_web_texts, quadric_ZTU, recombined_frame

XY = ("x", "y")
XYZ = ("x", "y", "z")
HEX = WebSpec.from_strings(XY, ["x", "y", "x + y"])
PLANAR4 = WebSpec.from_strings(XY, ["x", "y", "x + y + x*y", "x - y + x^5"])


def quadric(lam, mu):
    return WebSpec.from_strings(XYZ, quadric_web_texts(lam, mu))


def jet_of(text, names, base, order=FRAME_ORDER):
    return eval_jet(parse_expression(text, names), base, order)


def test_quadric_frame_constant_terms():
    base = (Q(1), Q(2), Q(3))
    frame = frame_R_h(quadric(1, 2), 0, base)
    v = quadric_derivatives(1, 2, base)
    expected = [[Q(-1), Q(-1), Q(-1), Q(1), Q(0)], [-v["p"], -v["p"], -v["q"], Q(0), Q(1)]]
    assert frame.rank == 2
    assert rank(frame.constant_terms() + expected) == 2


def test_hexagonal_frame():
    frame = frame_R_h(HEX, 0, (Q(2), Q(5)))
    (s,) = frame.constant_terms()
    assert [x / s[2] for x in s] == [-1, -1, 1]


def test_quadric_lifts_solve_cramerian_system():
    base = (Q(1), Q(2), Q(3))
    web = quadric(2, 3)
    blocks = build_blocks(web, base, 2, FRAME_ORDER)
    f1, f2 = quadric_hand_frame(2, 3, base)
    lift1 = lift_section(web, 0, f1, blocks)
    lift2 = lift_section(web, 0, f2, blocks)
    assert all(x.is_zero() for x in lift1)
    Z, T, U = quadric_ZTU(quadric_derivatives(2, 3, base))
    assert [x.value for x in lift2] == [0, 0, Z, T, U]


def test_lift_agrees_with_generalized_inverse():
    base = (Q(2, 3), Q(-5, 7))
    blocks = build_blocks(PLANAR4, base, 5)
    frame = frame_R_h(PLANAR4, 3, base)
    p, q = blocks.P(5), build_Q(blocks, 5)
    ip = generalized_inverse(p)
    jblocks = build_blocks(PLANAR4, base, 5, FRAME_ORDER)
    for s in frame.sections:
        lift = lift_section(PLANAR4, 3, s, jblocks)
        rhs = [-x for x in matvec(q, [x.value for x in s])]
        assert [x.value for x in lift] == matvec(ip, rhs)


def test_parallel_lift_is_zero():
    web = WebSpec.from_strings(XYZ, ["x", "y", "z", "x + y + z", "x + 2*y + 3*z"])
    base = (Q(1), Q(1), Q(1))
    frame = frame_R_h(web, 0, base)
    blocks = build_blocks(web, base, 2, FRAME_ORDER)
    for s in frame.sections:
        assert all(x.is_zero() for x in lift_section(web, 0, s, blocks))


def test_lift_obstructed_when_rank_drops():
    # rho_2 = 3 > rho_3 = 2 for the planar 4-web: level-2 sections do not all lift
    base = (Q(2, 3), Q(-5, 7))
    with pytest.raises(LiftObstructedError):
        connection_at(PLANAR4, 2, base)


def test_quadric_connection_form_closed_form():
    base = (Q(1), Q(2), Q(3))
    for lam, mu in [(1, 2), (2, 3)]:
        web = quadric(lam, mu)
        blocks = build_blocks(web, base, 2, FRAME_ORDER)
        frame = SectionFrame(0, base, quadric_hand_frame(lam, mu, base))
        omega = connection_form(web, 0, frame, blocks).values()
        v = quadric_derivatives(lam, mu, base)
        _, T, U = quadric_ZTU(v)
        zero = Q(0)
        assert omega[0] == [[zero, -T], [zero, -U * v["p"]]]
        assert omega[1] == [[zero, -T], [zero, -U * v["p"]]]
        assert omega[2] == [[zero, -T], [zero, -U * v["q"]]]


def test_hexagonal_connection_is_zero():
    conn = connection_at(HEX, 0, (Q(3), Q(-1)))
    assert all(x == 0 for om in conn.values() for row in om for x in row)


def test_product_web_connection_closed_form():
    web = WebSpec.from_strings(XYZ, ["x", "y", "z", "x*y*z"])
    base = (Q(2), Q(3), Q(5))
    order = FRAME_ORDER
    f = [jet_of(t, XYZ, base) for t in ("-y*z", "-x*z", "-x*y")] + [Jet.constant(1, base, order)]
    frame = SectionFrame(0, base, [f])
    omega = connection_form(web, 0, frame, build_blocks(web, base, 2, order)).values()
    x, y, z = base
    grad = [y * z, x * z, x * y]
    x_last = -z / (grad[0] * grad[1])  # -F''_xy / (F'_x F'_y)
    for i in range(3):
        assert omega[i] == [[-grad[i] * x_last]]
    assert curvature(connection_form(web, 0, frame, build_blocks(web, base, 2, order))).vanishes


@pytest.mark.parametrize(
    "web, h, expected",
    [
        (HEX, 0, True),
        (WebSpec.from_strings(XY, ["x", "y", "x + y + x^2*y"]), 0, False),
        (quadric(1, 2), 0, True),
        (quadric(1, 3), 0, True),
        (quadric(2, 2), 0, False),
        (PLANAR4, 3, True),
        (WebSpec.from_strings(XYZ, ["x", "y", "z", "x*y*z"]), 0, True),
    ],
)
def test_curvature_verdicts(web, h, expected):
    points = [tuple(Q(a, b) for a, b in pt) for pt in [((2, 3), (-5, 7), (3, 11)), ((7, 2), (1, 9), (-4, 5)), ((1, 3), (8, 5), (2, 7))]]
    points = [p[: web.n] for p in points]
    verdict, reports = curvature_vanishes(web, h, points)
    assert verdict is expected
    assert len(reports) == 3


def test_planar4_level1_curvature_nonzero():
    base = (Q(2, 3), Q(-5, 7))
    blocks = build_blocks(PLANAR4, base, 4)
    rhos = [(h + 1) * 4 - rank(build_M_script(blocks, h + 1)) for h in range(4)]
    assert rhos[1:] == [3, 3, 2]
    verdict, _ = curvature_vanishes(PLANAR4, 1, [base, (Q(7, 2), Q(1, 9))])
    assert verdict is False


def test_curvature_antisymmetry():
    for web, h in [(quadric(2, 2), 0), (PLANAR4, 3), (WebSpec.from_strings(XY, ["x", "y", "x + y + x^2*y"]), 0)]:
        base = (Q(2, 3), Q(-5, 7), Q(3, 11))[: web.n]
        rep = curvature_at(web, h, base)
        for lam in range(web.n):
            for mu in range(web.n):
                if lam != mu:
                    a, b = rep.component(lam, mu), rep.component(mu, lam)
                    assert all(x == -y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def test_known_relation_is_parallel():
    # f(u1) - u2 - u4 = 0 with f(t) = t + t^5; as a relation: g = (1 + 5t^4, -1, 0, -1)
    g = [parse_expression(t, ("t",)) for t in ("1 + 5*t^4", "-1", "0", "-1")]
    for base in [(Q(2, 3), Q(-5, 7)), (Q(7, 2), Q(1, 9)), (Q(-1, 3), Q(8, 5))]:
        section = relation_section(PLANAR4, 3, g, base, FRAME_ORDER)
        blocks = build_blocks(PLANAR4, base, 5, FRAME_ORDER)
        assert all(x.is_zero() for x in jet_matvec(build_M_script(blocks, 4), section))
        lift = lift_section(PLANAR4, 3, section, blocks)
        for vec in covariant_derivative(PLANAR4, 3, section, lift, blocks.u_jets):
            assert all(x.is_zero() for x in vec)


@pytest.mark.parametrize("web, h", [(quadric(1, 2), 0), (quadric(2, 2), 0), (PLANAR4, 3), (quadric(2, 2), 2)])
def test_vanishing_verdict_frame_invariant(web, h):
    rng = random.Random(h + web.d)
    base = (Q(2, 3), Q(-5, 7), Q(3, 11))[: web.n]
    blocks = build_blocks(web, base, h + 2, FRAME_ORDER)
    frame = frame_R_h(web, h, base, FRAME_ORDER, blocks)
    ref = curvature(connection_form(web, h, frame, blocks)).vanishes
    for _ in range(2):
        other = recombined_frame(frame, rng)
        assert curvature(connection_form(web, h, other, blocks)).vanishes == ref
