"""Chromosome -> placement constructive heuristic.

A chromosome carries, per rectangle, a position gene (placement order), a
variant gene and a direction gene, optionally followed by one priority
modulation gene::

    [pos_0 .. pos_{n-1}, var_0 .. var_{n-1}, dir_0 .. dir_{n-1}, (p_mod)]

The heavy lifting happens in :mod:`amsplace._kernels`; this module prepares
flat tables, pre-places symmetry groups and wraps the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K
from .evaluator import CriterionReport, assemble, criterion, normalizers
from .model import CostWeights, DistanceSpec, Instance, Placement, Rect, SymmetryGroup, Variant

SIDE_CODE = {"left": 0, "right": 1, "bottom": 2, "top": 3}


class DecodeError(RuntimeError):
    pass


def chromosome_length(inst: Instance, modulation: bool = True) -> int:
    return 3 * inst.n + (1 if modulation else 0)


def _csr(lists: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    for k, items in enumerate(lists):
        ptr[k + 1] = ptr[k] + len(items)
    flat = np.fromiter((v for items in lists for v in items), dtype=np.int64, count=int(ptr[-1]))
    return ptr, flat


def kernel_tables(inst: Instance, weights: CostWeights | None = None) -> tuple:
    """Flat arrays consumed by the compiled kernels (cached per weights)."""
    cw = inst.weights if weights is None else weights
    cache = inst.__dict__.setdefault("_kernel_tables", {})
    if cw in cache:
        return cache[cw]
    n = inst.n
    s_conn, s_prox, s_inter = normalizers(inst)

    nets = [sorted(net.members) for net in inst.nets if net.cost > 0]
    net_cost = np.array([net.cost for net in inst.nets if net.cost > 0], dtype=np.float64)
    net_ptr, net_mem = _csr(nets)
    per_rect: list[list[int]] = [[] for _ in range(n)]
    for e, mem in enumerate(nets):
        for k in mem:
            per_rect[k].append(e)
    rn_ptr, rn_idx = _csr(per_rect)

    prox_i = np.array([pp.i for pp in inst.proximities], dtype=np.int64)
    prox_j = np.array([pp.j for pp in inst.proximities], dtype=np.int64)
    prox_c = np.array([pp.cost for pp in inst.proximities], dtype=np.float64)
    per_rect = [[] for _ in range(n)]
    for q, pp in enumerate(inst.proximities):
        per_rect[pp.i].append(q)
        per_rect[pp.j].append(q)
    rp_ptr, rp_idx = _csr(per_rect)

    ie_side = np.array([SIDE_CODE[ie.side] for ie in inst.interfaces], dtype=np.int64)
    ie_cost = np.array([ie.cost for ie in inst.interfaces], dtype=np.float64)
    ie_ptr, ie_mem = _csr([sorted(ie.members) for ie in inst.interfaces])

    blk = inst.blockages
    bx = np.array([b.x for b in blk], dtype=np.int64)
    by = np.array([b.y for b in blk], dtype=np.int64)
    bw = np.array([b.width for b in blk], dtype=np.int64)
    bh = np.array([b.height for b in blk], dtype=np.int64)
    brestr = np.zeros((len(blk), n), dtype=np.bool_)
    for b, item in enumerate(blk):
        for k in item.restricted:
            brestr[b, k] = True

    wts = np.array(
        [
            cw.c_area,
            cw.c_conn / s_conn if s_conn > 0 else 0.0,
            cw.c_prox / s_prox if s_prox > 0 else 0.0,
            cw.c_inter / s_inter if s_inter > 0 else 0.0,
            inst.aspect_lo,
            inst.aspect_hi,
        ],
        dtype=np.float64,
    )
    tabs = (
        np.ascontiguousarray(inst.dist), net_ptr, net_mem, net_cost, rn_ptr, rn_idx,
        prox_i, prox_j, prox_c, rp_ptr, rp_idx,
        ie_side, ie_cost, ie_ptr, ie_mem,
        bx, by, bw, bh, brestr, wts,
    )
    cache[cw] = tabs
    return tabs


@dataclass(frozen=True)
class Genes:
    keys: np.ndarray
    variant: np.ndarray
    x_first: np.ndarray
    p_mod: float


def split_genes(genes, inst: Instance) -> Genes:
    g = np.asarray(genes, dtype=np.float64)
    n = inst.n
    if len(g) not in (3 * n, 3 * n + 1):
        raise ValueError(f"chromosome length {len(g)} does not match 3n or 3n+1 for n={n}")
    if n and (g.min() < 0.0 or g.max() > 1.0):
        raise ValueError("genes must lie in [0, 1]")
    counts = inst.variant_counts
    variant = np.minimum(np.floor(g[n:2 * n] * counts).astype(np.int64), counts - 1)
    p_mod = float(g[3 * n]) if len(g) == 3 * n + 1 else 1.0
    return Genes(g[:n].copy(), variant, g[2 * n:3 * n] <= 0.5, p_mod)


def apply_priority_modulation(keys, just_placed: int, nets, p_m: float, placed=()):
    """Scale the position keys of unplaced net neighbours of ``just_placed``.

    ``keys`` is a mapping or array; a modified copy is returned. Each
    neighbour is scaled once, however many nets it shares.
    """
    if not 0.0 <= p_m <= 1.0:
        raise ValueError("p_m must lie in [0, 1]")
    out = dict(keys) if isinstance(keys, Mapping) else np.array(keys, dtype=np.float64)
    done = set(placed) | {just_placed}
    hit = set()
    for net in nets:
        members = getattr(net, "members", net)
        if getattr(net, "cost", 1.0) <= 0 or just_placed not in members:
            continue
        hit.update(k for k in members if k not in done)
    for k in sorted(hit, key=repr):
        out[k] = out[k] * p_m
    return out


def slide(rect_dims, start_point, first_axis, placed_so_far, distances=0):
    """Two-phase sliding of one rectangle against placed rectangles.

    ``placed_so_far`` holds ``(x, y, w, h)`` tuples; ``distances`` is one
    minimum distance per placed rectangle (or a single value for all).
    Returns the post-first-phase position and the final position (duplicates
    dropped); an empty list means the start point is infeasible.
    """
    w, h = (int(v) for v in rect_dims)
    obs = np.asarray(list(placed_so_far), dtype=np.int64).reshape(-1, 4)
    m = len(obs)
    gaps = np.broadcast_to(np.asarray(distances, dtype=np.int64), (m,))
    first = {"x": 0, "horizontal": 0, "y": 1, "vertical": 1}[first_axis]
    # throwaway instance: obstacles are rects 0..m-1, the moving rect is m
    dims = [(int(o[2]), int(o[3])) for o in obs] + [(w, h)]
    tmp = Instance(
        rects=tuple(Rect(k, (Variant(a, b),)) for k, (a, b) in enumerate(dims)),
        distances=DistanceSpec(0, {(j, m): int(gaps[j]) for j in range(m)}),
    )
    tabs = kernel_tables(tmp, tmp.weights)
    placed = np.zeros(m + 1, dtype=np.bool_)
    placed[:m] = True
    rx = np.append(obs[:, 0], 0)
    ry = np.append(obs[:, 1], 0)
    rw = np.array([d[0] for d in dims], dtype=np.int64)
    rh = np.array([d[1] for d in dims], dtype=np.int64)
    st, _ = K.build_state(rx, ry, rw, rh, placed, tabs)
    mid = np.array([m], dtype=np.int64)
    drows = np.zeros((2, 1, m + 1), dtype=np.int64)
    K.fill_drows(drows, mid, 1, st, tabs[0])
    zero = np.zeros(1, dtype=np.int64)
    args = (
        mid, zero, zero, rw[m:], rh[m:], 1, 0, st, drows,
        tabs[15], tabs[16], tabs[17], tabs[18], tabs[19], np.zeros(2, np.int64),
    )
    x, y = (int(v) for v in start_point)
    out: list[tuple[int, int]] = []
    for axis in (first, 1 - first):
        ok, c = K.slide_phase(axis, x, y, *args)
        if not ok:
            break
        if axis == 0:
            x = int(c)
        else:
            y = int(c)
        if (x, y) not in out:
            out.append((x, y))
    return out


@dataclass(frozen=True)
class GroupUnit:
    """A symmetry group pre-placed as one rigid block."""

    members: tuple[int, ...]
    dx: np.ndarray
    dy: np.ndarray
    w: np.ndarray
    h: np.ndarray
    width: int
    height: int
    axis2: int  # doubled axis offset inside the block
    axis: str


def _group_variants(grp: SymmetryGroup, inst: Instance, variant: np.ndarray) -> int:
    """Align pair partners with their first member and pick the axis parity.

    Self-symmetric members whose chosen width parity does not match the
    group parity are moved to the nearest variant that does. Returns the
    doubled sub-canvas axis (0 or 1).
    """
    for i, j in grp.pairs:
        variant[j] = variant[i]
    if not grp.selfs:
        return 0
    dim = 0 if grp.axis == "vertical" else 1
    tab = inst.variant_table
    allowed = None
    for k in grp.selfs:
        ps = {(v.width, v.height)[dim] % 2 for v in inst.rects[k].variants}
        allowed = ps if allowed is None else allowed & ps
    if not allowed:
        raise DecodeError("self-symmetric members have no common axis parity")
    lead = grp.selfs[0]
    parity = int(tab[lead, variant[lead], dim] % 2)
    if parity not in allowed:
        parity = min(allowed)
    for k in grp.selfs:
        m = len(inst.rects[k].variants)
        cur = int(variant[k])
        if tab[k, cur, dim] % 2 != parity:
            options = [v for v in range(m) if tab[k, v, dim] % 2 == parity]
            variant[k] = min(options, key=lambda v: (abs(v - cur), v))
    return parity


def place_symmetry_group(
    grp: SymmetryGroup,
    genes: Genes,
    inst: Instance,
    weights: CostWeights | None = None,
    counters: np.ndarray | None = None,
) -> GroupUnit:
    """Pre-place a symmetry group in an empty sub-canvas.

    ``genes.variant`` is updated in place for pair partners and parity fixes.
    """
    tabs = kernel_tables(inst, weights)
    variant = genes.variant
    axis2 = _group_variants(grp, inst, variant)
    tab = inst.variant_table
    vertical = grp.axis == "vertical"
    subs = [(0, i, j) for i, j in grp.pairs] + [(1, k, k) for k in grp.selfs]
    kind = np.array([s[0] for s in subs], dtype=np.int64)
    first = np.array([s[1] for s in subs], dtype=np.int64)
    partner = np.array([s[2] for s in subs], dtype=np.int64)
    rw = tab[first, variant[first], 0]
    rh = tab[first, variant[first], 1]
    gw, gh = (rw, rh) if vertical else (rh, rw)
    order = np.array(
        sorted(range(len(subs)), key=lambda s: (genes.keys[first[s]], first[s])), dtype=np.int64
    )
    xfirst = genes.x_first[first]
    if not vertical:
        xfirst = ~xfirst
    cnt = np.zeros(2, np.int64) if counters is None else counters
    fx, fy, status = K.place_group(
        kind, first, partner, np.ascontiguousarray(gw), np.ascontiguousarray(gh),
        order, np.ascontiguousarray(xfirst), axis2, tabs, cnt,
    )
    if status:
        raise DecodeError("symmetry group could not be placed")

    ids, sx, sy, sw, sh = [], [], [], [], []
    for s, (kd, i, j) in enumerate(subs):
        ids.append(i)
        sx.append(int(fx[s]))
        sy.append(int(fy[s]))
        sw.append(int(gw[s]))
        sh.append(int(gh[s]))
        if kd == 0:
            ids.append(j)
            sx.append(axis2 - int(fx[s]) - int(gw[s]))
            sy.append(int(fy[s]))
            sw.append(int(gw[s]))
            sh.append(int(gh[s]))
    sx_a, sy_a = np.array(sx), np.array(sy)
    sw_a, sh_a = np.array(sw), np.array(sh)
    minx, miny = int(sx_a.min()), int(sy_a.min())
    sx_a -= minx
    sy_a -= miny
    local_axis2 = axis2 - 2 * minx
    if vertical:
        dx, dy, w, h = sx_a, sy_a, sw_a, sh_a
    else:
        dx, dy, w, h = sy_a, sx_a, sh_a, sw_a
    return GroupUnit(
        members=tuple(ids),
        dx=dx.astype(np.int64),
        dy=dy.astype(np.int64),
        w=w.astype(np.int64),
        h=h.astype(np.int64),
        width=int((dx + w).max()),
        height=int((dy + h).max()),
        axis2=local_axis2,
        axis=grp.axis,
    )


def decode(
    chromosome,
    inst: Instance,
    cw: CostWeights | None = None,
    counters: dict | None = None,
) -> tuple[Placement, CriterionReport]:
    """Map a chromosome to a feasible placement and its criterion."""
    weights = inst.weights if cw is None else cw
    genes = split_genes(chromosome, inst)
    n = inst.n
    if n == 0:
        p = Placement([], [], [], ())
        return p, criterion(p, inst, weights=weights)
    tabs = kernel_tables(inst, weights)
    cnt = np.zeros(2, np.int64)

    units = [place_symmetry_group(g, genes, inst, weights, cnt) for g in inst.groups]
    in_group = np.zeros(n, dtype=bool)
    for unit in units:
        in_group[list(unit.members)] = True
    singles = np.flatnonzero(~in_group)
    tab = inst.variant_table
    sw = tab[singles, genes.variant[singles], 0]
    sh = tab[singles, genes.variant[singles], 1]

    ns = len(singles)
    sizes = [1] * ns + [len(u.members) for u in units]
    u_ptr = np.zeros(len(sizes) + 1, dtype=np.int64)
    u_ptr[1:] = np.cumsum(sizes)
    zeros = np.zeros(ns, dtype=np.int64)
    u_mem = np.concatenate([singles] + [np.array(u.members, dtype=np.int64) for u in units])
    u_dx = np.concatenate([zeros] + [u.dx for u in units])
    u_dy = np.concatenate([zeros] + [u.dy for u in units])
    u_w = np.concatenate([sw] + [u.w for u in units])
    u_h = np.concatenate([sh] + [u.h for u in units])
    u_W = np.concatenate([sw, np.array([u.width for u in units], dtype=np.int64)])
    u_H = np.concatenate([sh, np.array([u.height for u in units], dtype=np.int64)])
    lead = [min(u.members, key=lambda k: (genes.keys[k], k)) for u in units]
    u_xfirst = np.concatenate([genes.x_first[singles], genes.x_first[np.array(lead, dtype=np.int64)]])
    u_tie = np.concatenate([singles, np.array([min(u.members) for u in units], dtype=np.int64)])

    keys = genes.keys.copy()
    ux, uy, status = K.decode_units(
        u_ptr, u_mem.astype(np.int64), u_dx, u_dy, u_w, u_h, u_W, u_H,
        np.ascontiguousarray(u_xfirst), u_tie.astype(np.int64), keys, genes.p_mod, tabs, cnt,
    )
    if status:
        raise DecodeError("no feasible position found for a unit")

    per = np.repeat(np.arange(len(sizes)), sizes)
    x = np.empty(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    x[u_mem] = ux[per] + u_dx
    y[u_mem] = uy[per] + u_dy
    axes = []
    for g, unit in enumerate(units):
        base = ux[ns + g] if unit.axis == "vertical" else uy[ns + g]
        axes.append(2 * int(base) + unit.axis2)
    p = Placement(x, y, genes.variant, axes)
    if counters is not None:
        counters["obstacle_checks"] = counters.get("obstacle_checks", 0) + int(cnt[0])
        counters["evaluations"] = counters.get("evaluations", 0) + int(cnt[1])
    return p, report(p, inst, weights)


def report(p: Placement, inst: Instance, cw: CostWeights | None = None) -> CriterionReport:
    """Criterion of a complete placement via the compiled term sums.

    Equal bit for bit to ``evaluator.criterion`` on complete placements.
    """
    weights = inst.weights if cw is None else cw
    if inst.n == 0:
        return criterion(p, inst, weights=weights)
    tabs = kernel_tables(inst, weights)
    w, h = inst.dims(p.variant)
    W, H, conn2, prox2, inter2 = K.final_terms(p.x, p.y, w, h, tabs)
    return assemble(inst, weights, int(W), int(H), conn2 / 2.0, prox2 / 2.0, inter2 / 2.0, True)
