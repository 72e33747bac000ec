import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from amsplace.decoder import chromosome_length, decode
from amsplace.evaluator import criterion
from amsplace.fileio import parse_instance, write_instance
from amsplace.model import (
    DistanceSpec,
    Instance,
    Net,
    Placement,
    ProximityPair,
    Rect,
    Variant,
    check_feasible,
    enumerate_variants,
)
from amsplace.refine import lp_refine
from amsplace.search import mutate, two_point_crossover
from amsplace.syngen import GenParams, generate

gen_params = st.builds(
    GenParams,
    n_rects=st.integers(1, 25),
    n_nets_range=st.just((2, 8)),
    n_blockages=st.integers(0, 2),
    with_symmetry=st.booleans(),
    allow_negative_distances=st.booleans(),
    rng_seed=st.integers(0, 10_000),
)


def chromosome(inst, seed):
    return np.random.default_rng(seed).random(chromosome_length(inst))


@st.composite
def small_instances(draw):
    n = draw(st.integers(2, 6))
    dims = st.tuples(st.integers(1, 9), st.integers(1, 9))
    rects = tuple(Rect(k, (Variant(*draw(dims)),)) for k in range(n))
    overrides = {}
    for i in range(n):
        for j in range(i + 1, n):
            a = draw(st.integers(-2, 3))
            if a:
                overrides[(i, j)] = a
    nets = tuple(Net(frozenset(draw(st.sets(st.integers(0, n - 1), min_size=2, max_size=n))),
                     draw(st.floats(0, 5)))
                 for _ in range(draw(st.integers(0, 3))))
    prox = tuple(ProximityPair(i, i + 1, draw(st.sampled_from([-1.0, 2.0]))) for i in range(n - 1))
    return Instance(rects, DistanceSpec(0, overrides), nets, proximities=prox)


@given(gen_params, st.integers(0, 2**32 - 1))
def test_decode_always_feasible(params, seed):
    inst = generate(params)
    p, rep = decode(chromosome(inst, seed), inst)
    assert check_feasible(inst, p) == (True, None)
    assert rep == criterion(p, inst)


@given(gen_params, st.integers(0, 2**32 - 1))
def test_decode_pure(params, seed):
    inst = generate(params)
    c = chromosome(inst, seed)
    c_copy = c.copy()
    a, b = decode(c, inst), decode(c, inst)
    assert a[0] == b[0] and a[1] == b[1] and np.array_equal(c, c_copy)


@given(gen_params, st.integers(0, 2**32 - 1))
def test_symmetry_doubled_axis_exact(params, seed):
    inst = generate(params.__class__(**{**params.__dict__, "with_symmetry": True}))
    p, _ = decode(chromosome(inst, seed), inst)
    w, h = inst.dims(p.variant)
    for g, grp in enumerate(inst.groups):
        pos, ext = (p.x, w) if grp.axis == "vertical" else (p.y, h)
        for i, j in grp.pairs:
            assert p.axes[g] - pos[i] - pos[j] - ext[i] == 0
        for k in grp.selfs:
            assert p.axes[g] == 2 * pos[k] + ext[k]


@given(small_instances(), st.integers(0, 2**32 - 1), st.integers(0, 50))
def test_translation_keeps_feasibility_and_wirelength(inst, seed, t):
    p, rep = decode(chromosome(inst, seed), inst)
    q = p.replace(x=p.x + t, y=p.y + t)
    assert check_feasible(inst, q)[0]
    moved = criterion(q, inst)
    assert moved.conn_raw == rep.conn_raw and moved.prox_raw == rep.prox_raw


@given(small_instances(), st.integers(0, 2**32 - 1), st.data())
def test_pair_order_symmetry(inst, seed, data):
    n = inst.n
    x = data.draw(st.lists(st.integers(0, 15), min_size=n, max_size=n))
    y = data.draw(st.lists(st.integers(0, 15), min_size=n, max_size=n))
    p = Placement(x, y, [0] * n)
    perm = list(range(n))[::-1]
    inv = {old: new for new, old in enumerate(perm)}
    rects = tuple(Rect(k, inst.rects[perm[k]].variants) for k in range(n))
    over = {}
    for (i, j), a in inst.distances.overrides.items():
        a2, b2 = sorted((inv[i], inv[j]))
        over[(a2, b2)] = a
    flipped = Instance(rects, DistanceSpec(0, over))
    q = Placement([x[k] for k in perm], [y[k] for k in perm], [0] * n)
    base = Instance(inst.rects, inst.distances)
    assert check_feasible(base, p)[0] == check_feasible(flipped, q)[0]


@given(small_instances(), st.integers(0, 2**32 - 1))
def test_area_term_monotone_in_placed_set(inst, seed):
    p, _ = decode(chromosome(inst, seed), inst)
    order = np.random.default_rng(seed).permutation(inst.n)
    prev = -1.0
    for k in range(1, inst.n + 1):
        cur = criterion(p, inst, placed=order[:k]).area_term
        assert cur >= prev
        prev = cur


@given(small_instances(), st.integers(0, 2**32 - 1))
def test_zero_cost_nets_zero_conn(inst, seed):
    zero = Instance(inst.rects, inst.distances, tuple(Net(n.members, 0.0) for n in inst.nets))
    p, _ = decode(chromosome(zero, seed), zero)
    assert criterion(p, zero).conn_raw == 0.0


@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 12), st.integers(1, 12), st.integers(0, 3))
def test_variants_never_lose_area(w, h, count, rows, pocket):
    for v in enumerate_variants(w, h, count, rows, pocket):
        assert v.width * v.height >= count * w * h


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_crossover_and_mutation_ranges(L, seed):
    rng = np.random.default_rng(seed)
    p1, p2 = rng.random(L), rng.random(L)
    child = two_point_crossover(p1, p2, rng)
    assert all(c in (a, b) for a, b, c in zip(p1, p2, child))
    m = mutate(child, rng, 0.5)
    assert ((m >= 0) & (m <= 1)).all() and m.shape == child.shape


@given(gen_params)
def test_instance_round_trip(params):
    inst = generate(params)
    assert parse_instance(write_instance(inst)) == inst


@given(small_instances(), st.integers(0, 2**32 - 1))
def test_lp_never_worse(inst, seed):
    p, rep = decode(chromosome(inst, seed), inst)
    q, out = lp_refine(p, inst)
    assert out.total <= rep.total + 1e-9 * abs(rep.total)
    assert check_feasible(inst, q)[0]
