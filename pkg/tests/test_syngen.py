import pytest

from amsplace.model import validate_instance
from amsplace.syngen import FAMILIES, GenParams, compose_copies, family, generate


def test_deterministic():
    p = GenParams(30, n_blockages=2, with_symmetry=True, rng_seed=4)
    assert generate(p) == generate(p)


def test_half_multi_variant():
    inst = generate(GenParams(20, rng_seed=0))
    multi = [r for r in inst.rects if len(r.variants) > 2 or (
        len(r.variants) == 2 and (r.variants[0].width, r.variants[0].height)
        != (r.variants[1].height, r.variants[1].width))]
    assert len(multi) == 10


def test_symmetry_group_size():
    inst = generate(GenParams(50, with_symmetry=True, rng_seed=1))
    assert 1 <= len(inst.groups) <= 2
    assert sum(len(g.members) for g in inst.groups) >= 10


def test_distances_range():
    neg = generate(GenParams(30, rng_seed=2))
    vals = set(neg.distances.overrides.values()) | {neg.distances.default}
    assert min(vals) < 0 and vals <= set(range(-2, 7))
    pos = generate(GenParams(30, allow_negative_distances=False, rng_seed=2))
    assert min(pos.distances.overrides.values()) >= 0


def test_nets_and_blockages():
    inst = generate(GenParams(40, (10, 15), n_blockages=2, rng_seed=3))
    assert 10 <= len(inst.nets) <= 15
    assert all(2 <= len(n.members) <= 6 for n in inst.nets)
    assert len(inst.blockages) == 2
    assert all(len(b.restricted) == 6 for b in inst.blockages)


@pytest.mark.parametrize("bad", [dict(n_rects=0), dict(n_rects=5, n_nets_range=(4, 2)),
                                 dict(n_rects=5, n_blockages=3)])
def test_invalid_params(bad):
    with pytest.raises(ValueError):
        generate(GenParams(**bad))


def test_generated_always_valid():
    for seed in range(30):
        inst = generate(GenParams(5 + seed, n_blockages=seed % 3, with_symmetry=seed % 2 == 0,
                                  rng_seed=seed))
        assert validate_instance(inst) == []


def test_compose_copies():
    base = generate(GenParams(100, (25, 25), rng_seed=5))
    double = compose_copies(base, 2)
    assert double.n == 200 and len(double.nets) == 2 * len(base.nets)
    tetra = compose_copies(generate(GenParams(50, rng_seed=5)), 4)
    assert tetra.n == 200
    assert validate_instance(double) == []


def test_compose_preserves_copy_structure():
    base = generate(GenParams(12, (4, 6), with_symmetry=True, rng_seed=7))
    comp = compose_copies(base, 3)
    n = base.n
    for c in range(3):
        shifted = {frozenset(m - c * n for m in net.members)
                   for net in comp.nets[c * len(base.nets):(c + 1) * len(base.nets)]}
        assert shifted == {net.members for net in base.nets}
    for net in comp.nets:
        assert len({m // n for m in net.members}) == 1
    assert comp.distances.get(0, n) == base.distances.default


def test_compose_rejects_k1():
    with pytest.raises(ValueError):
        compose_copies(generate(GenParams(5)), 1)


def test_families():
    assert set(FAMILIES) >= {"S50", "S100", "S50sym"}
    insts = family("S50", 3)
    assert [i.n for i in insts] == [20, 30, 50]
    assert family("Stetra", 1)[0].n == 200
