"""Problem and solution data model.

All geometry is integral. The only half-integer quantity is a symmetry axis,
which is carried doubled (``2 * axis``) so every check stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

SIDES = ("left", "right", "bottom", "top")
AXES = ("vertical", "horizontal")


@dataclass(frozen=True)
class Variant:
    width: int
    height: int


@dataclass(frozen=True)
class Rect:
    id: int
    variants: tuple[Variant, ...]
    name: str = ""


@dataclass(frozen=True)
class DistanceSpec:
    """Pairwise minimum distances; keys are ``(i, j)`` with ``i < j``."""

    default: int = 0
    overrides: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def get(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return self.overrides.get((i, j), self.default)

    def matrix(self, n: int) -> np.ndarray:
        mat = np.full((n, n), self.default, dtype=np.int64)
        for (i, j), a in self.overrides.items():
            if 0 <= i < n and 0 <= j < n:
                mat[i, j] = a
                mat[j, i] = a
        np.fill_diagonal(mat, 0)
        return mat


@dataclass(frozen=True)
class Net:
    members: frozenset[int]
    cost: float = 1.0


@dataclass(frozen=True)
class SymmetryGroup:
    axis: str
    pairs: tuple[tuple[int, int], ...] = ()
    selfs: tuple[int, ...] = ()

    @property
    def members(self) -> tuple[int, ...]:
        out = [k for pair in self.pairs for k in pair]
        out.extend(self.selfs)
        return tuple(out)


@dataclass(frozen=True)
class Blockage:
    x: int
    y: int
    width: int
    height: int
    restricted: frozenset[int] = frozenset()


@dataclass(frozen=True)
class ProximityPair:
    i: int
    j: int
    cost: float


@dataclass(frozen=True)
class InterfaceEntry:
    side: str
    members: frozenset[int]
    cost: float = 1.0


@dataclass(frozen=True)
class CostWeights:
    c_area: float = 1.0
    c_conn: float = 0.0
    c_prox: float = 0.0
    c_inter: float = 0.0


@dataclass(frozen=True)
class Instance:
    rects: tuple[Rect, ...]
    distances: DistanceSpec = field(default_factory=DistanceSpec)
    nets: tuple[Net, ...] = ()
    groups: tuple[SymmetryGroup, ...] = ()
    blockages: tuple[Blockage, ...] = ()
    proximities: tuple[ProximityPair, ...] = ()
    interfaces: tuple[InterfaceEntry, ...] = ()
    aspect_lo: float = 0.0
    aspect_hi: float = 1.0
    weights: CostWeights = field(default_factory=CostWeights)

    @property
    def n(self) -> int:
        return len(self.rects)

    @cached_property
    def dist(self) -> np.ndarray:
        mat = self.distances.matrix(self.n)
        mat.flags.writeable = False
        return mat

    @cached_property
    def variant_table(self) -> np.ndarray:
        """``(n, max_m, 2)`` widths/heights padded with the last variant."""
        mmax = max((len(r.variants) for r in self.rects), default=1)
        tab = np.zeros((self.n, mmax, 2), dtype=np.int64)
        for r in self.rects:
            for k in range(mmax):
                v = r.variants[min(k, len(r.variants) - 1)]
                tab[r.id, k] = (v.width, v.height)
        tab.flags.writeable = False
        return tab

    @cached_property
    def variant_counts(self) -> np.ndarray:
        out = np.array([len(r.variants) for r in self.rects], dtype=np.int64)
        out.flags.writeable = False
        return out

    @cached_property
    def group_of(self) -> dict[int, int]:
        return {m: g for g, grp in enumerate(self.groups) for m in grp.members}

    def dims(self, variant: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        var = np.asarray(variant, dtype=np.int64)
        idx = np.arange(self.n)
        tab = self.variant_table
        return tab[idx, var, 0].copy(), tab[idx, var, 1].copy()

    def with_weights(self, weights: CostWeights) -> "Instance":
        return Instance(
            rects=self.rects,
            distances=self.distances,
            nets=self.nets,
            groups=self.groups,
            blockages=self.blockages,
            proximities=self.proximities,
            interfaces=self.interfaces,
            aspect_lo=self.aspect_lo,
            aspect_hi=self.aspect_hi,
            weights=weights,
        )


class Placement:
    """Integer bottom-left coordinates plus per-rectangle variant index.

    ``axes`` holds one doubled axis coordinate per symmetry group.
    """

    __slots__ = ("x", "y", "variant", "axes")

    def __init__(self, x, y, variant, axes: Iterable[int] = ()):
        self.x = np.array(x, dtype=np.int64)
        self.y = np.array(y, dtype=np.int64)
        self.variant = np.array(variant, dtype=np.int64)
        self.axes = tuple(int(a) for a in axes)
        for arr in (self.x, self.y, self.variant):
            arr.flags.writeable = False
        if not (len(self.x) == len(self.y) == len(self.variant)):
            raise ValueError("coordinate and variant arrays differ in length")

    def __len__(self) -> int:
        return len(self.x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Placement):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.variant, other.variant)
            and self.axes == other.axes
        )

    def __repr__(self) -> str:
        return f"Placement(n={len(self)}, axes={self.axes})"

    def replace(self, x=None, y=None, variant=None, axes=None) -> "Placement":
        return Placement(
            self.x if x is None else x,
            self.y if y is None else y,
            self.variant if variant is None else variant,
            self.axes if axes is None else axes,
        )


class IncompletePlacement(ValueError):
    pass


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems: list[str] = []
    n = inst.n

    def bad_index(k) -> bool:
        return not isinstance(k, (int, np.integer)) or not 0 <= k < n

    for pos, r in enumerate(inst.rects):
        if r.id != pos:
            problems.append(f"rect {r.name or pos}: id {r.id} != position {pos}")
        if not r.variants:
            problems.append(f"rect {r.id}: no variants")
        for v in r.variants:
            if v.width < 1 or v.height < 1:
                problems.append(f"rect {r.id}: non-positive variant {v.width}x{v.height}")

    for (i, j) in inst.distances.overrides:
        if bad_index(i) or bad_index(j):
            problems.append(f"distance ({i},{j}): dangling rect index")
        elif i >= j:
            problems.append(f"distance ({i},{j}): key must satisfy i < j")

    for e, net in enumerate(inst.nets):
        if len(net.members) < 2:
            problems.append(f"net {e}: fewer than 2 members")
        for k in sorted(net.members):
            if bad_index(k):
                problems.append(f"net {e}: dangling rect index {k}")
        if not net.cost >= 0:
            problems.append(f"net {e}: negative cost {net.cost}")

    seen: dict[int, int] = {}
    for g, grp in enumerate(inst.groups):
        if grp.axis not in AXES:
            problems.append(f"group {g}: unknown axis {grp.axis!r}")
        members = grp.members
        if not members:
            problems.append(f"group {g}: empty")
        if len(set(members)) != len(members):
            problems.append(f"group {g}: repeated member")
        for k in members:
            if bad_index(k):
                problems.append(f"group {g}: dangling rect index {k}")
                continue
            if k in seen and seen[k] != g:
                problems.append(f"group {g}: rect {k} already in group {seen[k]}")
            seen[k] = g
        for (i, j) in grp.pairs:
            if bad_index(i) or bad_index(j):
                continue
            if inst.rects[i].variants != inst.rects[j].variants:
                problems.append(f"group {g}: pair ({i},{j}) has different variant lists")
        dim = 0 if grp.axis == "vertical" else 1
        parities = None
        for k in grp.selfs:
            if bad_index(k):
                continue
            ps = {(v.width, v.height)[dim] % 2 for v in inst.rects[k].variants}
            parities = ps if parities is None else parities & ps
        if parities is not None and not parities:
            problems.append(
                f"group {g}: self-symmetric members cannot share an integer axis "
                "(no common width parity)"
            )

    for b, blk in enumerate(inst.blockages):
        if blk.width < 1 or blk.height < 1:
            problems.append(f"blockage {b}: non-positive size")
        if blk.x < 0 or blk.y < 0:
            problems.append(f"blockage {b}: negative position")
        for k in sorted(blk.restricted):
            if bad_index(k):
                problems.append(f"blockage {b}: dangling rect index {k}")

    for q, pp in enumerate(inst.proximities):
        if bad_index(pp.i) or bad_index(pp.j):
            problems.append(f"proximity {q}: dangling rect index")
        elif pp.i == pp.j:
            problems.append(f"proximity {q}: self pair")
        if pp.cost == 0:
            problems.append(f"proximity {q}: zero cost")

    for q, ie in enumerate(inst.interfaces):
        if ie.side not in SIDES:
            problems.append(f"interface {q}: unknown side {ie.side!r}")
        if not ie.members:
            problems.append(f"interface {q}: no members")
        for k in sorted(ie.members):
            if bad_index(k):
                problems.append(f"interface {q}: dangling rect index {k}")
        if not ie.cost > 0:
            problems.append(f"interface {q}: cost must be positive")

    if not 0 <= inst.aspect_lo <= inst.aspect_hi <= 1:
        problems.append(
            f"aspect bounds: need 0 <= lo <= hi <= 1, got [{inst.aspect_lo}, {inst.aspect_hi}]"
        )
    w = inst.weights
    for name in ("c_area", "c_conn", "c_prox", "c_inter"):
        if not getattr(w, name) >= 0:
            problems.append(f"weights: {name} must be non-negative")
    return problems


def enumerate_variants(
    device_w: int, device_h: int, count: int, max_rows: int, pocket: int = 0
) -> tuple[Variant, ...]:
    """Matrix-array variants of ``count`` identical devices.

    One variant per row count ``r``: ``ceil(count / r)`` devices per row,
    enlarged by a pocket on every side. Sorted by width, duplicates removed.
    """
    if device_w < 1 or device_h < 1:
        raise ValueError("device dimensions must be positive")
    if count < 1 or max_rows < 1:
        raise ValueError("count and max_rows must be >= 1")
    if pocket < 0:
        raise ValueError("pocket must be non-negative")
    found = set()
    for rows in range(1, min(max_rows, count) + 1):
        cols = math.ceil(count / rows)
        found.add((cols * device_w + 2 * pocket, rows * device_h + 2 * pocket))
    return tuple(Variant(w, h) for w, h in sorted(found))


def bounding_box(p: Placement, inst: Instance) -> tuple[int, int]:
    if inst.n == 0:
        return 0, 0
    w, h = inst.dims(p.variant)
    return int((p.x + w).max()), int((p.y + h).max())


def _separation_ok(x, y, w, h, i, j, a) -> bool:
    return (
        x[i] + w[i] + a <= x[j]
        or y[i] + h[i] + a <= y[j]
        or x[j] + w[j] + a <= x[i]
        or y[j] + h[j] + a <= y[i]
    )


def check_feasible(inst: Instance, p: Placement) -> tuple[bool, str | None]:
    """Verify the complete placement; return ``(ok, first_violation)``."""
    n = inst.n
    if len(p) != n:
        raise IncompletePlacement(f"placement has {len(p)} rects, instance has {n}")
    counts = inst.variant_counts
    if n and (np.any(p.variant < 0) or np.any(p.variant >= counts)):
        bad = int(np.flatnonzero((p.variant < 0) | (p.variant >= counts))[0])
        return False, f"rect {bad}: variant index {int(p.variant[bad])} out of range"
    if n and (np.any(p.x < 0) or np.any(p.y < 0)):
        bad = int(np.flatnonzero((p.x < 0) | (p.y < 0))[0])
        return False, f"rect {bad}: negative coordinate"
    w, h = inst.dims(p.variant)
    x, y = p.x, p.y
    a = inst.dist
    if n > 1:
        # vectorised pair test over the upper triangle
        left = x[:, None] + w[:, None] + a <= x[None, :]
        below = y[:, None] + h[:, None] + a <= y[None, :]
        ok = left | below | left.T | below.T
        iu = np.triu_indices(n, 1)
        bad = ~ok[iu]
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            i, j = int(iu[0][k]), int(iu[1][k])
            return False, f"pair ({i},{j}): minimum distance {int(a[i, j])} violated"
    for b, blk in enumerate(inst.blockages):
        for i in sorted(blk.restricted):
            if not (
                x[i] + w[i] <= blk.x
                or y[i] + h[i] <= blk.y
                or blk.x + blk.width <= x[i]
                or blk.y + blk.height <= y[i]
            ):
                return False, f"rect {i}: overlaps blockage {b}"
    if len(p.axes) != len(inst.groups):
        return False, f"expected {len(inst.groups)} symmetry axes, got {len(p.axes)}"
    for g, grp in enumerate(inst.groups):
        axis2 = p.axes[g]
        if grp.axis == "vertical":
            pos, other, ext = x, y, w
        else:
            pos, other, ext = y, x, h
        for (i, j) in grp.pairs:
            if p.variant[i] != p.variant[j]:
                return False, f"group {g}: pair ({i},{j}) uses different variants"
            if axis2 != pos[i] + pos[j] + ext[i]:
                return False, f"group {g}: pair ({i},{j}) not mirrored about axis"
            if other[i] != other[j]:
                return False, f"group {g}: pair ({i},{j}) not aligned"
        for i in grp.selfs:
            if axis2 != 2 * pos[i] + ext[i]:
                return False, f"group {g}: rect {i} not centred on axis"
    return True, None
