"""Synthetic instance families (random rectangles, distances, nets, blockages)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Blockage,
    CostWeights,
    DistanceSpec,
    Instance,
    InterfaceEntry,
    Net,
    ProximityPair,
    Rect,
    SymmetryGroup,
    Variant,
    enumerate_variants,
)

DIM_RANGE = (2, 30)
BLOCKED_FRACTION = 0.15


@dataclass(frozen=True)
class GenParams:
    n_rects: int
    n_nets_range: tuple[int, int] = (5, 12)
    n_blockages: int = 0
    multi_variant_fraction: float = 0.5
    with_symmetry: bool = False
    allow_negative_distances: bool = True
    rng_seed: int = 0
    c_area: float = 1.0
    c_conn: float = 8.0


# instance families mirroring the benchmark sets (rect counts, net ranges)
FAMILIES = {
    "S50": dict(sizes=(20, 30, 50), nets=(5, 12), symmetry=False),
    "S50dense": dict(sizes=(20, 30, 50), nets=(10, 25), symmetry=False),
    "S100": dict(sizes=(100,), nets=(25, 25), symmetry=False),
    "S50sym": dict(sizes=(34, 50, 85), nets=(5, 12), symmetry=True),
    "S200sym": dict(sizes=(226, 285), nets=(100, 100), symmetry=True),
}


def _rotations(w: int, h: int) -> tuple[Variant, ...]:
    return (Variant(w, h),) if w == h else (Variant(w, h), Variant(h, w))


def _multi_variants(rng: np.random.Generator) -> tuple[Variant, ...]:
    # retry until the pick is more than a plain rotation pair
    while True:
        dw, dh = (int(v) for v in rng.integers(2, 9, size=2))
        count = int(rng.integers(2, 7))
        pocket = int(rng.integers(0, 2))
        opts = enumerate_variants(dw, dh, count, count, pocket)
        if len(opts) < 2:
            continue
        k = int(rng.integers(2, min(4, len(opts)) + 1))
        pick = tuple(opts[i] for i in sorted(rng.choice(len(opts), size=k, replace=False)))
        if pick != _rotations(pick[0].width, pick[0].height):
            return pick


def _group_sizes(n: int, rng: np.random.Generator) -> list[int]:
    if n < 10:
        return [n]
    if n >= 20 and rng.random() < 0.5:
        first = int(rng.integers(5, min(10, n - 5) + 1))
        second = int(rng.integers(max(5, 10 - first), min(10, n - first) + 1))
        return [first, second]
    return [int(rng.integers(10, min(20, n) + 1))]


def generate(p: GenParams) -> Instance:
    if p.n_rects < 1:
        raise ValueError("n_rects must be >= 1")
    lo, hi = p.n_nets_range
    if lo > hi or lo < 0:
        raise ValueError("invalid net count range")
    if p.n_blockages not in (0, 1, 2):
        raise ValueError("n_blockages must be 0, 1 or 2")
    rng = np.random.default_rng(p.rng_seed)
    n = p.n_rects

    n_multi = int(round(p.multi_variant_fraction * n))
    multi = set(int(k) for k in rng.permutation(n)[:n_multi])
    variants: list[tuple[Variant, ...]] = []
    for k in range(n):
        if k in multi:
            variants.append(_multi_variants(rng))
        else:
            w, h = (int(v) for v in rng.integers(DIM_RANGE[0], DIM_RANGE[1] + 1, size=2))
            variants.append(_rotations(w, h))

    groups: list[SymmetryGroup] = []
    if p.with_symmetry:
        pool = [int(k) for k in rng.permutation(n)]
        for size in _group_sizes(n, rng):
            members, pool = pool[:size], pool[size:]
            n_self = int(rng.integers(0, min(3, size) + 1))
            if (size - n_self) % 2:
                n_self += 1 if n_self < size else -1
            selfs = members[:n_self]
            rest = members[n_self:]
            pairs = tuple((rest[2 * q], rest[2 * q + 1]) for q in range(len(rest) // 2))
            for i, j in pairs:
                variants[j] = variants[i]
            for k in selfs:
                w, h = (int(v) for v in rng.integers(1, DIM_RANGE[1] // 2 + 1, size=2))
                variants[k] = _rotations(2 * w, 2 * h)
            axis = "vertical" if rng.random() < 0.5 else "horizontal"
            groups.append(SymmetryGroup(axis, pairs, tuple(selfs)))

    rects = tuple(Rect(k, variants[k], f"r{k}") for k in range(n))

    lo_d = -2 if p.allow_negative_distances else 0
    overrides = {}
    for i in range(n):
        row = rng.integers(lo_d, 7, size=n - i - 1)
        for off, a in enumerate(row):
            if a != 0:
                overrides[(i, i + 1 + off)] = int(a)

    blockages = []
    if p.n_blockages:
        area = sum(v[0].width * v[0].height for v in variants)
        side = max(4, math.ceil(math.sqrt(area) * 1.3))
        corners = rng.permutation(4)[: p.n_blockages]
        n_restr = max(1, int(round(BLOCKED_FRACTION * n)))
        for c in corners:
            bw = int(rng.integers(max(1, side // 6), max(2, side // 3) + 1))
            bh = int(rng.integers(max(1, side // 6), max(2, side // 3) + 1))
            x = 0 if c in (0, 2) else side - bw
            y = 0 if c in (0, 1) else side - bh
            restricted = frozenset(int(k) for k in rng.choice(n, size=n_restr, replace=False))
            blockages.append(Blockage(x, y, bw, bh, restricted))

    nets = []
    if n >= 2:
        for _ in range(int(rng.integers(lo, hi + 1))):
            size = int(rng.integers(2, min(6, n) + 1))
            members = frozenset(int(k) for k in rng.choice(n, size=size, replace=False))
            nets.append(Net(members, 1.0))

    return Instance(
        rects=rects,
        distances=DistanceSpec(0, overrides),
        nets=tuple(nets),
        groups=tuple(groups),
        blockages=tuple(blockages),
        aspect_lo=0.0,
        aspect_hi=1.0,
        weights=CostWeights(c_area=p.c_area, c_conn=p.c_conn),
    )


def compose_copies(inst: Instance, k: int) -> Instance:
    """``k`` disjoint copies of ``inst``; connectivity stays within each copy.

    Blockages are dropped; cross-copy pairs use the default distance.
    """
    if k < 2:
        raise ValueError("compose_copies needs k >= 2")
    n = inst.n
    rects, nets, groups, prox, inter = [], [], [], [], []
    overrides = {}
    for c in range(k):
        off = c * n
        rects.extend(Rect(r.id + off, r.variants, f"{r.name or r.id}_{c}") for r in inst.rects)
        for (i, j), a in inst.distances.overrides.items():
            overrides[(i + off, j + off)] = a
        nets.extend(Net(frozenset(m + off for m in net.members), net.cost) for net in inst.nets)
        for g in inst.groups:
            groups.append(
                SymmetryGroup(
                    g.axis,
                    tuple((i + off, j + off) for i, j in g.pairs),
                    tuple(s + off for s in g.selfs),
                )
            )
        prox.extend(ProximityPair(pp.i + off, pp.j + off, pp.cost) for pp in inst.proximities)
        inter.extend(
            InterfaceEntry(ie.side, frozenset(m + off for m in ie.members), ie.cost)
            for ie in inst.interfaces
        )
    return Instance(
        rects=tuple(rects),
        distances=DistanceSpec(inst.distances.default, overrides),
        nets=tuple(nets),
        groups=tuple(groups),
        blockages=(),
        proximities=tuple(prox),
        interfaces=tuple(inter),
        aspect_lo=inst.aspect_lo,
        aspect_hi=inst.aspect_hi,
        weights=inst.weights,
    )


def family(name: str, count: int, seed: int = 0) -> list[Instance]:
    """``count`` instances of a named family (sizes cycle through the family)."""
    if name in ("Sdouble", "Stetra"):
        base_name, k = ("S100", 2) if name == "Sdouble" else ("S50", 4)
        return [compose_copies(b, k) for b in _family_base(base_name, count, seed, fixed_n=50 if k == 4 else None)]
    return _family_base(name, count, seed)


def _family_base(name: str, count: int, seed: int, fixed_n: int | None = None) -> list[Instance]:
    fam = FAMILIES[name]
    out = []
    for q in range(count):
        n = fixed_n or fam["sizes"][q % len(fam["sizes"])]
        out.append(
            generate(
                GenParams(
                    n_rects=n,
                    n_nets_range=fam["nets"],
                    n_blockages=q % 3 if fixed_n is None else 0,
                    with_symmetry=fam["symmetry"],
                    rng_seed=seed * 100003 + q,
                )
            )
        )
    return out
