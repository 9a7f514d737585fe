import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructibility import projective as pj
from constructibility.closure import (
    Budget,
    Configuration,
    OpSet,
    closure_step,
    closure_to_depth,
    contains,
    density_probe,
    generic_quadruple_check,
    stats_csv,
)
from constructibility.numbers import BudgetExceeded

SEED = [pj.point(0, 0), pj.point(1, 0), pj.point(0, 1), pj.point(2, 3)]


# -- independent brute-force recount with plain Fraction triples -------------------


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _canon(v):
    lead = next(c for c in v if c != 0)
    return tuple(F(c) / lead for c in v)


def brute_closure(points, depth, projective=True):
    pts = {_canon((F(x), F(y), F(1))) for x, y in points}
    lines = set()
    for _ in range(depth):
        new_lines = {_canon(_cross(p, q)) for p, q in itertools.combinations(pts, 2)}
        new_pts = set()
        for l, m in itertools.combinations(lines, 2):
            x = _cross(l, m)
            if x[2] != 0 or projective:
                new_pts.add(_canon(x))
        pts |= new_pts
        lines |= new_lines
    return pts, lines


def test_brute_recount_matches_golden_counts():
    coords = [(0, 0), (1, 0), (0, 1), (2, 3)]
    golden = [(4, 0), (4, 6), (7, 6), (7, 9), (13, 9)]
    for d, (np_, nl) in enumerate(golden):
        pts, lines = brute_closure(coords, d)
        assert (len(pts), len(lines)) == (np_, nl)


def test_depth_three_golden_counts():
    cfg, stats = closure_to_depth(Configuration(SEED), 3, OpSet.joins_meets())
    assert [(s.points, s.lines) for s in stats] == [(4, 0), (4, 6), (7, 6), (7, 9)]
    assert stats_csv(stats) == "depth,points,lines,conics\n0,4,0,0\n1,4,6,0\n2,7,6,0\n3,7,9,0\n"


@pytest.mark.slow
def test_depth_five_matches_brute_force():
    cfg, _ = closure_to_depth(Configuration(SEED), 5, OpSet.joins_meets())
    pts, lines = brute_closure([(0, 0), (1, 0), (0, 1), (2, 3)], 5)
    assert cfg.counts()[:2] == (len(pts), len(lines))
    for c in pts:
        assert contains(cfg, pj.HPoint(*c))


def test_join_only_adds_the_axis():
    out, fixed = closure_step(Configuration([pj.point(0, 0), pj.point(1, 0)]), OpSet(meet=False))
    assert not fixed
    assert out.counts() == (2, 1, 0)
    assert contains(out, pj.line(0, 1, 0))


def test_circle_alone_is_a_fixed_point():
    cfg = Configuration([pj.unit_circle()])
    out, fixed = closure_step(cfg, OpSet.straightedge())
    assert fixed and out.same_objects(cfg)
    deep, stats = closure_to_depth(cfg, 5, OpSet.straightedge())
    assert all((s.points, s.lines, s.conics) == (0, 0, 1) for s in stats)
    assert not contains(deep, pj.point(0, 0))


def test_three_points_two_steps():
    cfg = Configuration([pj.point(0, 0), pj.point(1, 0), pj.point(0, 1)])
    out, _ = closure_to_depth(cfg, 2, OpSet.joins_meets())
    assert out.counts() == (3, 3, 0)
    for l in (pj.line(0, 1, 0), pj.line(1, 0, 0), pj.line(1, 1, -1)):
        assert contains(out, l)


def test_depth_zero_is_identity():
    cfg = Configuration(SEED + [pj.unit_circle()])
    out, stats = closure_to_depth(cfg, 0)
    assert out.same_objects(cfg) and len(stats) == 1
    with pytest.raises(ValueError):
        closure_to_depth(cfg, -1)


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        closure_to_depth(Configuration(SEED), 12, OpSet.joins_meets(), Budget(max_objects=500))


def test_half_half_at_depth_two_agrees_with_brute_force():
    cfg, _ = closure_to_depth(Configuration(SEED), 2, OpSet.joins_meets())
    pts, _ = brute_closure([(0, 0), (1, 0), (0, 1), (2, 3)], 2)
    expected = (F(1, 2), F(1, 2), F(1)) in pts
    assert contains(cfg, pj.point(F(1, 2), F(1, 2))) == expected
    assert expected is False  # the three diagonal points are (0, -3), (-1, 0) and (2/5, 3/5)


def test_generic_quadruple_examples():
    assert generic_quadruple_check(*SEED)
    assert not generic_quadruple_check(pj.point(0, 0), pj.point(1, 0), pj.point(0, 1), pj.point(1, 1))
    assert not generic_quadruple_check(pj.point(0, 0), pj.point(1, 0), pj.point(2, 0), pj.point(0, 1))


def test_probe_target_already_present():
    res = density_probe(Configuration(SEED), pj.point(2, 3), F(1, 10**9))
    assert res.found and res.witness == pj.point(2, 3) and res.depth == 0


def test_probe_third_seventh():
    res = density_probe(Configuration(SEED), pj.point(F(1, 3), F(1, 7)), F(1, 1000))
    assert res.found
    x, y = res.witness.affine()
    assert (abs(x - F(1, 3)) - F(1, 1000)).sign() < 0
    assert (abs(y - F(1, 7)) - F(1, 1000)).sign() < 0
    assert res.depth == 18


def test_probe_two_points_straightedge_not_found():
    res = density_probe(Configuration([pj.point(0, 0), pj.point(1, 0)]), pj.point(0, 1), F(1, 1000),
                        OpSet.straightedge())
    assert not res.found


def test_provenance_chains_rebuild_exactly():
    cfg, _ = closure_to_depth(Configuration(SEED), 4, OpSet.joins_meets())
    for i, obj in cfg:
        chain = cfg.chain(i)
        assert all(cfg.provenance(j).op == "given" or all(p < j for p in cfg.provenance(j).parents) for j in chain)
        assert cfg.rebuild(i) == obj


def test_text_round_trip():
    cfg, _ = closure_to_depth(Configuration(SEED + [pj.unit_circle()]), 2, OpSet.straightedge())
    back = Configuration.from_text(cfg.to_text())
    assert back.to_text() == cfg.to_text()
    assert [cfg.provenance(i) for i, _ in cfg] == [back.provenance(i) for i, _ in back]


def test_compass_mode_adds_circles():
    cfg = Configuration([pj.point(0, 0), pj.point(1, 0)])
    out, _ = closure_step(cfg, OpSet.with_compass())
    assert contains(out, pj.unit_circle())
    assert contains(out, pj.circle_from(pj.point(1, 0), pj.point(0, 0), pj.point(1, 0)))


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)
point_sets = st.lists(st.tuples(small, small), min_size=2, max_size=4, unique=True)


@settings(max_examples=25)
@given(point_sets, st.randoms(use_true_random=False))
def test_step_monotone_and_order_independent(coords, rnd):
    pts = [pj.point(x, y) for x, y in coords]
    a, _ = closure_to_depth(Configuration(pts), 2, OpSet.joins_meets())
    shuffled = pts[:]
    rnd.shuffle(shuffled)
    b, _ = closure_to_depth(Configuration(shuffled), 2, OpSet.joins_meets())
    assert a.same_objects(b)
    for p in pts:
        assert contains(a, p)
    once, _ = closure_step(Configuration(pts), OpSet.joins_meets())
    for _, obj in once:
        assert contains(a, obj)


def test_fixed_point_is_idempotent():
    cfg = Configuration([pj.point(0, 0), pj.point(1, 0), pj.point(2, 0)])
    out, _ = closure_to_depth(cfg, 3, OpSet.joins_meets())
    again, fixed = closure_step(out, OpSet.joins_meets())
    assert fixed and again.same_objects(out)
