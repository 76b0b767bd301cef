import pytest

from webrank.engine import (
    INCONCLUSIVE,
    RANK_DETERMINED,
    RANK_ZERO,
    SKIPPED,
    VANISHES,
    Config,
    RankEngine,
    analyze_rank,
    characteristic_matrix,
    check_general_position,
    check_ordinary,
    proposition_5_2_check,
    rho,
    rho_at,
    rho_via_char_determinants,
)
from webrank.expr import parse_expression
from webrank.linalg import LinAlgError
from webrank.rational import Q
from webrank.report import load_corpus

XY = ("x", "y")
XYZ = ("x", "y", "z")
POINTS2 = [(Q(2, 3), Q(-5, 7)), (Q(7, 2), Q(1, 9)), (Q(-1, 3), Q(8, 5))]
POINTS3 = [(Q(2, 3), Q(-5, 7), Q(3, 11)), (Q(7, 2), Q(1, 9), Q(-4, 5)), (Q(1, 3), Q(8, 5), Q(2, 7))]


def test_general_position():
    from webrank.web import WebSpec

    assert check_general_position(WebSpec.from_strings(XY, ["x", "y", "x + y"]), (1, 2))
    assert not check_general_position(WebSpec.from_strings(XY, ["x", "x^2", "x^3"]), (1, 2))
    assert check_general_position(load_corpus("quadric_l1_m2"), (1, 2, 3))


def test_ordinariness():
    v = check_ordinary(load_corpus("planar_4web"), POINTS2)
    assert v.ordinary and v.p_ranks == [2, 3, 4]
    v = check_ordinary(load_corpus("spatial_10web"), POINTS3)
    assert not v.ordinary and v.p_ranks[2] == 9 and v.first_failure == 3
    assert check_ordinary(load_corpus("spatial_11web"), POINTS3).ordinary


def test_rho_values():
    web = load_corpus("planar_4web")
    assert [rho(web, h, POINTS2) for h in (1, 2, 3, 4)] == [3, 3, 2, 2]
    web = load_corpus("spatial_11web")
    assert [rho(web, h, POINTS3) for h in (2, 3, 4)] == [14, 13, 13]


def test_two_paths_agree():
    web = load_corpus("planar_4web")
    assert rho_via_char_determinants(web, 3, POINTS2[0]) == 2 == rho_at(web, 3, POINTS2[0])
    web = load_corpus("spatial_11web")
    assert rho_via_char_determinants(web, 3, POINTS3[0]) == 13 == rho_at(web, 3, POINTS3[0])


def test_square_case_has_no_deleted_rows():
    web = load_corpus("hexagonal")
    assert characteristic_matrix(web, 1, (1, 2)) == []
    assert rho_via_char_determinants(web, 1, (1, 2)) == rho_at(web, 0, (1, 2)) == 1


def test_char_path_needs_full_rank_P():
    with pytest.raises(LinAlgError):
        rho_via_char_determinants(load_corpus("planar_4web"), 1, POINTS2[0])


@pytest.mark.parametrize(
    "name, status, rank, level",
    [
        ("planar_4web", RANK_DETERMINED, 2, 3),
        ("spatial_11web", RANK_DETERMINED, 13, 3),
        ("spatial_10web", RANK_DETERMINED, 12, 2),
        ("hexagonal", RANK_DETERMINED, 1, 0),
        ("perturbed_3web", RANK_ZERO, 0, 2),
        ("quadric_l2_m2", RANK_DETERMINED, 1, 2),
    ],
)
def test_analyze(name, status, rank, level):
    report = analyze_rank(load_corpus(name), Config(seed=0))
    assert (report.status, report.rank, report.level) == (status, rank, level)


def test_analyze_records_skips_and_vanishing():
    report = analyze_rank(load_corpus("planar_4web"), Config(seed=2))
    verdicts = [(c.h, c.verdict) for c in report.curvature]
    assert verdicts == [(1, SKIPPED), (3, VANISHES)]
    assert len(report.curvature[-1].points) == 3


def test_analyze_nonzero_curvature_recorded():
    # rho_0 = rho_1 > rho_2: the level-0 test is skipped without computing curvature
    from webrank.web import WebSpec

    web = WebSpec.from_strings(XYZ, ["x", "y", "z", "x + y + z", "(x + y)^2 + 4*(x + y)*z + 3*z^2"])
    report = analyze_rank(web, Config(seed=0))
    assert report.rho[:3] == [2, 2, 1]
    assert report.curvature[0].verdict == SKIPPED
    assert report.rank == 1


def test_inconclusive_at_cap():
    report = analyze_rank(load_corpus("planar_8web"), Config(seed=0, h_max=6))
    assert report.status == INCONCLUSIVE and report.rank is None
    assert report.h_max == 6


def test_fixed_point_mode():
    report = analyze_rank(load_corpus("planar_4web"), Config(point=("2/3", "-5/7")))
    assert report.samples == [[Q(2, 3), Q(-5, 7)]]
    assert report.rank == 2


def test_fixed_point_errors():
    from webrank.jets import PoleError
    from webrank.web import WebSpec

    with pytest.raises(ValueError):
        analyze_rank(load_corpus("planar_4web"), Config(point=(1, 2, 3)))
    with pytest.raises(PoleError):
        analyze_rank(WebSpec.from_strings(XY, ["x", "y", "1/(x - y)"]), Config(point=(1, 1)))


def test_sampler_is_seeded():
    web = load_corpus("planar_4web")
    assert RankEngine(web, Config(seed=5)).points == RankEngine(web, Config(seed=5)).points
    assert RankEngine(web, Config(seed=5)).points != RankEngine(web, Config(seed=6)).points


def test_sampler_skips_poles():
    from webrank.web import WebSpec

    web = WebSpec.from_strings(XY, ["x", "y", "1/(x - y)"])
    eng = RankEngine(web, Config(seed=0, samples=4))
    assert all(p[0] != p[1] for p in eng.points)


def test_rank_disagreement_is_warned():
    from webrank.web import WebSpec

    web = WebSpec.from_strings(XY, ["x", "y", "x + y"])
    eng = RankEngine(web, Config(seed=0))
    eng.points.append((Q(0), Q(0)))
    eng.sample_ranks(2)
    assert not eng.warnings
    web = WebSpec.from_strings(XY, ["x", "y", "x^2 + y^2"])
    eng = RankEngine(web, Config(seed=0))
    eng.points.append((Q(0), Q(0)))
    assert eng.sample_ranks(2) == [5, 5, 5, 4]
    assert eng.m_rank(2) == 5
    assert eng.warnings and "non-constant rank" in eng.warnings[0]


def test_parallel_jobs_give_same_report():
    web = load_corpus("quadric_l2_m2")
    a = analyze_rank(web, Config(seed=1, jobs=1))
    b = analyze_rank(web, Config(seed=1, jobs=2))
    assert (a.rho, a.rank, a.samples, [c.points for c in a.curvature]) == (b.rho, b.rank, b.samples, [c.points for c in b.curvature])


@pytest.mark.parametrize(
    "text, expected",
    [("x + y + z", True), ("x*y*z", True), ("x^2 + y^2 + z^2", True), ("x^2*y + z", False)],
)
def test_proposition_5_2(text, expected):
    assert proposition_5_2_check(parse_expression(text, XYZ), 3) is expected


def test_proposition_5_2_fixed_points():
    f = parse_expression("x^2*y + z", XYZ)
    assert proposition_5_2_check(f, 3, points=[(1, 1, 1), (2, 3, 5)]) is False
    with pytest.raises(ValueError):
        proposition_5_2_check(parse_expression("x*y*z", XYZ), 3, points=[(0, 1, 1)])
    with pytest.raises(ValueError):
        proposition_5_2_check(parse_expression("x*y", XY), 2)


def test_proposition_agrees_with_rank_path():
    from webrank.web import WebSpec

    for text in ["x*y*z", "x^2*y + z", "x + y + z", "x*y + z", "(x + y + z)^3"]:
        f = parse_expression(text, XYZ)
        web = WebSpec.from_strings(XYZ, ["x", "y", "z", text])
        report = analyze_rank(web, Config(seed=0))
        assert proposition_5_2_check(f, 3) is (report.rank == 1), text
