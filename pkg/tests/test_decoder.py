import numpy as np
import pytest

from amsplace.decoder import (
    apply_priority_modulation,
    chromosome_length,
    decode,
    place_symmetry_group,
    report,
    slide,
    split_genes,
)
from amsplace.evaluator import criterion
from amsplace.model import Blockage, CostWeights, SymmetryGroup, check_feasible
from amsplace.syngen import GenParams, generate

from conftest import make


def test_single_rect_at_origin():
    inst = make([[(4, 2), (2, 4)]])
    p, rep = decode([0.0, 0.0, 0.0], inst)
    assert (p.x[0], p.y[0], p.variant[0]) == (0, 0, 0)
    assert rep.total == 6.0


def test_two_squares_abut():
    inst = make([(2, 2), (2, 2)])
    p, rep = decode([0.1, 0.1, 0.1, 0.1, 0.0, 0.0], inst)
    assert list(zip(p.x, p.y)) == [(0, 0), (2, 0)]
    assert rep.total == 6.0


def test_point_shifted_by_distance():
    inst = make([(4, 2), (3, 3)], overrides={(0, 1): 1})
    p, _ = decode([0.1, 0.2, 0.1, 0.1, 0.0, 0.0], inst)
    assert (p.x[1], p.y[1]) == (5, 0)


def test_variant_floor_rule():
    inst = make([[(1, 5), (5, 1)]])
    assert split_genes([0, 0.49, 0], inst).variant[0] == 0
    assert split_genes([0, 0.5, 0], inst).variant[0] == 1
    assert split_genes([0, 1.0, 0], inst).variant[0] == 1


def test_direction_threshold():
    inst = make([(1, 1)])
    assert split_genes([0, 0, 0.5], inst).x_first[0]
    assert not split_genes([0, 0, 0.51], inst).x_first[0]


def test_modulation_gene_optional():
    inst = make([(1, 1)] * 2)
    assert chromosome_length(inst) == 7 and chromosome_length(inst, False) == 6
    assert split_genes([0.5] * 6, inst).p_mod == 1.0
    assert split_genes([0.5] * 6 + [0.25], inst).p_mod == 0.25


@pytest.mark.parametrize("genes", [[0.1] * 5, [0.1] * 8, [1.2] + [0.1] * 5, [-0.1] + [0.1] * 5])
def test_bad_chromosomes_rejected(genes):
    with pytest.raises(ValueError):
        decode(genes, make([(1, 1)] * 2))


def test_slide_left_to_abut():
    assert slide((2, 2), (5, 0), "x", [(0, 0, 3, 3)]) == [(3, 0)]


def test_slide_empty_canvas_goes_to_origin():
    assert slide((2, 2), (5, 5), "x", []) == [(0, 5), (0, 0)]
    assert slide((2, 2), (5, 5), "y", []) == [(5, 0), (0, 0)]


def test_slide_pinned_is_infeasible():
    assert slide((3, 1), (0, 0), "x", [(0, 0, 3, 1), (4, 0, 3, 1)]) == []


def test_slide_keeps_margin():
    assert slide((2, 2), (9, 0), "x", [(0, 0, 3, 3)], 2) == [(5, 0)]


def test_modulation_direct():
    out = apply_priority_modulation({"a": 0.1, "b": 0.8, "c": 0.6}, "a", [{"a", "b"}], 0.5)
    assert out == {"a": 0.1, "b": 0.4, "c": 0.6}


def test_modulation_identity():
    keys = np.array([0.3, 0.8, 0.6])
    assert np.array_equal(apply_priority_modulation(keys, 0, [{0, 1}], 1.0), keys)


def test_modulation_once_per_neighbour():
    out = apply_priority_modulation({"a": 0.1, "b": 0.8, "c": 0.6}, "a",
                                    [{"a", "b"}, {"a", "c"}, {"a", "b", "c"}], 0.5)
    assert out == {"a": 0.1, "b": 0.4, "c": 0.3}


def test_modulation_does_not_mutate_input():
    keys = np.array([0.3, 0.8])
    apply_priority_modulation(keys, 0, [{0, 1}], 0.5)
    assert keys[1] == 0.8


def test_modulation_rejects_bad_pm():
    with pytest.raises(ValueError):
        apply_priority_modulation([0.1, 0.2], 0, [{0, 1}], 1.5)


def _group_unit(dims, grp, genes):
    inst = make(dims, groups=(grp,))
    return place_symmetry_group(grp, split_genes(genes, inst), inst), inst


def test_group_pair_mirrored():
    unit, _ = _group_unit([(2, 2), (2, 2)], SymmetryGroup("vertical", ((0, 1),)), [0.1, 0.2] + [0] * 4)
    assert (unit.width, unit.height) == (4, 2)
    # partner left of the axis, first member right of it
    assert list(unit.dx) == [2, 0] and unit.axis2 == 4


def test_group_self_centred():
    unit, _ = _group_unit([(3, 2)], SymmetryGroup("vertical", (), (0,)), [0.1, 0, 0])
    assert (unit.width, unit.height) == (3, 2) and unit.axis2 == 2 * unit.dx[0] + 3


def test_group_pair_and_self():
    grp = SymmetryGroup("vertical", ((0, 1),), (2,))
    unit, inst = _group_unit([(2, 2), (2, 2), (4, 1)], grp, [0.1, 0.2, 0.3] + [0] * 6)
    dx = dict(zip(unit.members, unit.dx))
    w = dict(zip(unit.members, unit.w))
    assert unit.axis2 == dx[0] + dx[1] + w[0] == 2 * dx[2] + w[2]
    p, _ = decode([0.1, 0.2, 0.3] + [0] * 6, inst)
    assert check_feasible(inst, p)[0]


def test_horizontal_group_decodes():
    grp = SymmetryGroup("horizontal", ((0, 1),), (2,))
    inst = make([(3, 2), (3, 2), (2, 4)], groups=(grp,))
    for seed in range(20):
        c = np.random.default_rng(seed).random(10)
        p, _ = decode(c, inst)
        ok, why = check_feasible(inst, p)
        assert ok, why


def test_blockage_avoided():
    blk = Blockage(0, 0, 3, 3, frozenset({0}))
    inst = make([(2, 2), (2, 2)], blockages=(blk,))
    p, _ = decode([0.1, 0.2, 0, 0, 0, 0], inst)
    assert check_feasible(inst, p)[0]
    assert (p.x[0], p.y[0]) != (0, 0)


def test_report_matches_evaluator():
    inst = generate(GenParams(30, (8, 12), n_blockages=1, with_symmetry=True, rng_seed=5))
    rng = np.random.default_rng(0)
    for _ in range(10):
        p, rep = decode(rng.random(chromosome_length(inst)), inst)
        assert rep == criterion(p, inst)
        assert report(p, inst, CostWeights(1, 3, 0, 0)) == criterion(p, inst, weights=CostWeights(1, 3, 0, 0))


def test_counters_reported():
    inst = generate(GenParams(20, rng_seed=1))
    counters = {}
    decode(np.full(chromosome_length(inst), 0.5), inst, counters=counters)
    assert counters["evaluations"] > 0 and counters["obstacle_checks"] > 0
