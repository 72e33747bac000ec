import json

import numpy as np
import pytest

from amsplace.decoder import chromosome_length, decode
from amsplace.evaluator import criterion
from amsplace.fileio import (
    DataError,
    gsrc_header_counts,
    instance_to_dict,
    net_box,
    parse_gsrc,
    parse_instance,
    parse_placement,
    render_svg,
    report_from_dict,
    write_instance,
    write_placement,
)
from amsplace.model import CostWeights, InterfaceEntry, Placement, ProximityPair
from amsplace.syngen import GenParams, generate

from conftest import make

BLOCKS = """UCSC blocks 1.0
# a comment
NumSoftRectangularBlocks : 0
NumHardRectilinearBlocks : 3
NumTerminals : 2

bk1 hardrectilinear 4 (0, 0) (0, 14) (28, 14) (28, 0)
bk2 hardrectilinear 4 (0, 0) (0, 5) (5, 5) (5, 0)
bk3 hardrectilinear 4 (0, 0) (0, 3) (7, 3) (7, 0)

p1 terminal
p2 terminal
"""

NETS = """UCLA nets 1.0
NumNets : 3
NumPins : 7
NetDegree : 2
bk1 B : %0.0 %0.0
bk2 B
NetDegree : 2
p1 B
p2 B
NetDegree : 3
bk3 B
p1 B
bk1 B
"""


def test_minimal_document():
    inst = parse_instance('{"rects": [{"variants": [[3, 2]]}]}')
    assert inst.n == 1 and inst.rects[0].variants[0].width == 3


def test_self_distance_rejected():
    doc = '{"rects": [{"variants": [[1, 1]]}], "distances": {"overrides": [[0, 0, 3]]}}'
    with pytest.raises(DataError, match=r"overrides\[0\]"):
        parse_instance(doc)


def test_malformed_json_line():
    with pytest.raises(DataError, match="line 2"):
        parse_instance('{\n"rects": [}')


@pytest.mark.parametrize("doc,where", [
    ('{"rects": [{"variants": [[1.5, 1]]}]}', "variants[0][0]"),
    ('{"rects": [{"variants": [[1, 1]]}], "nets": [{"members": [0, 4]}]}', "dangling"),
    ('{"rects": [{"variants": [[1, 1, 1]]}]}', "variants[0]"),
    ('{"format": "other", "rects": []}', "format"),
    ('{"rects": [{"name": "a"}]}', "variants"),
    ('[1, 2]', "expected an object"),
])
def test_schema_errors_have_context(doc, where):
    with pytest.raises(DataError, match=__import__("re").escape(where)):
        parse_instance(doc)


def test_round_trip_generated():
    for seed in range(100):
        inst = generate(GenParams(3 + seed % 40, n_blockages=seed % 3,
                                  with_symmetry=seed % 2 == 1, rng_seed=seed))
        assert parse_instance(write_instance(inst)) == inst


def test_round_trip_optional_terms():
    inst = make([(2, 2), (3, 1), (1, 4)], nets=[({0, 1}, 0.3)],
                proximities=(ProximityPair(0, 2, -1.5),),
                interfaces=(InterfaceEntry("top", frozenset({1, 2}), 2.0),),
                aspect_lo=0.25, aspect_hi=0.75, weights=CostWeights(1, 2.5, 0.1, 3))
    back = parse_instance(write_instance(inst))
    assert back == inst and instance_to_dict(back) == instance_to_dict(inst)


def test_placement_round_trip():
    inst = generate(GenParams(20, with_symmetry=True, rng_seed=3))
    p, rep = decode(np.random.default_rng(0).random(chromosome_length(inst)), inst)
    text = write_placement(p, inst, rep, {"algorithm": "ga", "seed": 1})
    q, doc = parse_placement(text, inst)
    assert q == p and report_from_dict(doc["report"]) == rep
    assert doc["meta"]["seed"] == 1


def test_placement_count_mismatch():
    inst = make([(1, 1), (1, 1)])
    text = write_placement(Placement([0], [0], [0]), make([(1, 1)]))
    with pytest.raises(DataError, match="instance has 2"):
        parse_placement(text, inst)


def test_gsrc_blocks_and_nets():
    inst = parse_gsrc(BLOCKS, NETS)
    assert inst.n == 3
    assert [(v.width, v.height) for v in inst.rects[0].variants] == [(28, 14), (14, 28)]
    assert len(inst.rects[1].variants) == 1
    # terminal-only net dropped; mixed net keeps its block members
    assert [sorted(n.members) for n in inst.nets] == [[0, 1], [0, 2]]
    assert all(n.cost == 1.0 for n in inst.nets)
    assert inst.distances.default == 0 and not inst.distances.overrides
    assert (inst.aspect_lo, inst.aspect_hi) == (0.0, 1.0)
    counts = gsrc_header_counts(BLOCKS, NETS)
    assert counts["NumHardRectilinearBlocks"] == 3 and counts["NumNets"] == 3


def test_gsrc_terminals_opt_in():
    inst = parse_gsrc(BLOCKS, NETS, include_terminals=True)
    assert inst.n == 5 and len(inst.nets) == 3


def test_gsrc_rejects_non_rectangle():
    bad = BLOCKS.replace("bk3 hardrectilinear 4 (0, 0) (0, 3) (7, 3) (7, 0)",
                         "bk3 hardrectilinear 6 (0,0) (0,3) (7,3) (7,1) (4,1) (4,0)")
    with pytest.raises(DataError, match="4-corner"):
        parse_gsrc(bad, NETS)


def test_gsrc_rejects_unknown_pin():
    with pytest.raises(DataError, match="unknown pin 'bk9'"):
        parse_gsrc(BLOCKS, NETS + "NetDegree : 2\nbk9 B\nbk1 B\n")


def test_gsrc_degree_mismatch():
    with pytest.raises(DataError, match="declares 3"):
        parse_gsrc(BLOCKS, NETS.replace("bk1 B\n", "", 2)[:-1] + "")


def test_svg_single_device():
    inst = make([(4, 2)])
    svg = render_svg(Placement([0], [0], [0]), inst)
    assert svg.count('class="device"') == 1 and svg.startswith("<svg")


def test_svg_deterministic_and_complete():
    inst = generate(GenParams(15, n_blockages=2, with_symmetry=True, rng_seed=4))
    p, _ = decode(np.random.default_rng(1).random(chromosome_length(inst)), inst)
    a, b = render_svg(p, inst), render_svg(p, inst)
    assert a == b
    assert a.count('class="device"') == inst.n
    assert a.count('class="blockage"') == 2 and a.count('class="axis"') == len(inst.groups)


def test_net_box_matches_centroids():
    inst = make([(2, 2), (4, 2), (1, 1)], nets=[({0, 1, 2}, 1.0)], weights=CostWeights(0, 1))
    p = Placement([0, 3, 10], [0, 5, 1], [0, 0, 0])
    x0, y0, x1, y1 = net_box(p, inst, 0)
    assert (x0, y0, x1, y1) == (1.0, 1.0, 10.5, 6.0)
    assert (x1 - x0) + (y1 - y0) == criterion(p, inst).conn_raw
