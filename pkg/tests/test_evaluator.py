import pytest

from amsplace.evaluator import aspect_violated, criterion, hpwl, interface, normalizers, proximity
from amsplace.model import CostWeights, InterfaceEntry, Placement, ProximityPair

from conftest import make


def test_hpwl_single_net():
    # 2x2 rects: centroids (1,1) and (5,3)
    inst = make([(2, 2), (2, 2)], nets=[({0, 1}, 1.0)])
    assert hpwl(Placement([0, 4], [0, 2], [0, 0]), inst) == 6.0


def test_hpwl_partial_member_ignored():
    inst = make([(2, 2), (2, 2)], nets=[({0, 1}, 1.0)])
    assert hpwl(Placement([0, 4], [0, 2], [0, 0]), inst, placed=[0]) == 0.0


def test_hpwl_two_nets_weighted():
    # net a spans (3,1), net b spans (0,4)
    inst = make([(2, 2)] * 4, nets=[({0, 1}, 2.0), ({2, 3}, 1.0)])
    p = Placement([0, 3, 10, 10], [0, 1, 0, 4], [0] * 4)
    assert hpwl(p, inst) == 12.0


def test_hpwl_half_integer_centroids():
    inst = make([(1, 1), (2, 2)], nets=[({0, 1}, 1.0)])
    assert hpwl(Placement([0, 0], [0, 0], [0, 0]), inst) == 1.0


def test_area_only():
    inst = make([(4, 2), (3, 3)])
    rep = criterion(Placement([0, 5], [0, 0], [0, 0]), inst)
    assert rep.total == 11.0 and not rep.penalty_applied and (rep.width, rep.height) == (8, 3)


def test_aspect_penalty():
    inst = make([(4, 2), (3, 3)], aspect_lo=0.5, aspect_hi=1.0)
    rep = criterion(Placement([0, 5], [0, 0], [0, 0]), inst)
    assert rep.penalty_applied and rep.total == 27.5


def test_partial_never_penalised():
    inst = make([(4, 2), (3, 3)], aspect_lo=0.9, aspect_hi=1.0)
    rep = criterion(Placement([0, 5], [0, 0], [0, 0]), inst, placed=[0])
    assert not rep.penalty_applied and rep.total == 6.0


def test_conn_term_normalised():
    # net spans (4,2); S_conn = 1 for one net of cost 1
    inst = make([(2, 2), (2, 2)], nets=[({0, 1}, 1.0)],
                weights=CostWeights(c_area=1, c_conn=8))
    p = Placement([0, 4], [0, 2], [0, 0])
    rep = criterion(p, inst)
    assert rep.s_conn == 1.0 and rep.conn_raw == 6.0
    assert rep.area_term == 10.0 and rep.total == 10.0 + 8 * 6.0


def test_zero_cost_nets_ignored():
    inst = make([(2, 2), (2, 2)], nets=[({0, 1}, 0.0)], weights=CostWeights(c_conn=5))
    rep = criterion(Placement([0, 9], [0, 9], [0, 0]), inst)
    assert rep.conn_raw == 0.0 and rep.total == rep.area_term


def test_proximity_manhattan():
    inst = make([(2, 2), (2, 2)], proximities=(ProximityPair(0, 1, -2.0),))
    assert proximity(Placement([0, 3], [0, 4], [0, 0]), inst) == -14.0
    assert normalizers(inst)[1] == 2.0


def test_interface_median_entry():
    # left side: entry y is the median centroid, depth is the centroid x
    inst = make([(2, 2)] * 3, interfaces=(InterfaceEntry("left", frozenset({0, 1, 2}), 1.0),))
    p = Placement([0, 4, 8], [0, 4, 10], [0, 0, 0])
    # centroids (1,1), (5,5), (9,11); median y = 5
    assert interface(p, inst, 10, 12) == (4 + 0 + 6) + (1 + 5 + 9)


def test_interface_top_side():
    inst = make([(2, 2)], interfaces=(InterfaceEntry("top", frozenset({0}), 2.0),))
    assert interface(Placement([0], [0], [0]), inst, 2, 10) == 2.0 * 9


@pytest.mark.parametrize("w,h,lo,hi,expected", [
    (10, 2, 0.5, 1.0, True), (10, 5, 0.5, 1.0, False), (4, 4, 0.0, 0.9, True), (0, 0, 0.5, 1, False),
])
def test_aspect_predicate(w, h, lo, hi, expected):
    assert aspect_violated(w, h, lo, hi) is expected
