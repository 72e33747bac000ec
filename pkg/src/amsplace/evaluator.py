"""Placement criterion: half-perimeter area proxy plus weighted wirelength terms."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .model import CostWeights, Instance, Placement

ASPECT_PENALTY = 2.5


@dataclass(frozen=True)
class CriterionReport:
    area_term: float
    conn_raw: float
    prox_raw: float
    inter_raw: float
    s_conn: float
    s_prox: float
    s_inter: float
    penalty_applied: bool
    total: float
    width: int = 0
    height: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def normalizers(inst: Instance) -> tuple[float, float, float]:
    cached = inst.__dict__.get("_normalizers")
    if cached is not None:
        return cached
    s_conn = float(sum(net.cost for net in inst.nets))
    s_prox = float(sum(abs(pp.cost) for pp in inst.proximities))
    s_inter = float(sum(ie.cost * len(ie.members) for ie in inst.interfaces))
    inst.__dict__["_normalizers"] = (s_conn, s_prox, s_inter)
    return s_conn, s_prox, s_inter


def _placed_mask(inst: Instance, placed) -> np.ndarray:
    if placed is None:
        return np.ones(inst.n, dtype=bool)
    mask = np.zeros(inst.n, dtype=bool)
    idx = np.fromiter(placed, dtype=np.int64) if not isinstance(placed, np.ndarray) else placed
    if idx.dtype == bool:
        return idx.copy()
    mask[idx] = True
    return mask


def _doubled_centroids(p: Placement, inst: Instance):
    w, h = inst.dims(p.variant)
    return 2 * p.x + w, 2 * p.y + h


def hpwl(p: Placement, inst: Instance, placed: Iterable[int] | None = None) -> float:
    """Cost-weighted half-perimeter wirelength over centroids of placed members."""
    mask = _placed_mask(inst, placed)
    cx, cy = _doubled_centroids(p, inst)
    total2 = 0.0
    for net in inst.nets:
        if net.cost == 0:
            continue
        mem = [k for k in net.members if mask[k]]
        if len(mem) < 2:
            continue
        xs, ys = cx[mem], cy[mem]
        span2 = int(xs.max() - xs.min() + ys.max() - ys.min())
        total2 += net.cost * span2
    return total2 / 2.0


def proximity(p: Placement, inst: Instance, placed=None) -> float:
    mask = _placed_mask(inst, placed)
    cx, cy = _doubled_centroids(p, inst)
    total2 = 0.0
    for pp in inst.proximities:
        if mask[pp.i] and mask[pp.j]:
            d2 = abs(int(cx[pp.i] - cx[pp.j])) + abs(int(cy[pp.i] - cy[pp.j]))
            total2 += pp.cost * d2
    return total2 / 2.0


def interface(p: Placement, inst: Instance, width: int, height: int, placed=None) -> float:
    """Entry point sits on its side at the (lower) median of the connected
    centroids, clamped to the side's extent; distances are Manhattan."""
    mask = _placed_mask(inst, placed)
    cx, cy = _doubled_centroids(p, inst)
    w2, h2 = 2 * width, 2 * height
    total2 = 0.0
    for ie in inst.interfaces:
        mem = sorted(k for k in ie.members if mask[k])
        if not mem:
            continue
        if ie.side in ("left", "right"):
            free, fixed, extent = cy[mem], cx[mem], h2
            depth = fixed if ie.side == "left" else w2 - fixed
        else:
            free, fixed, extent = cx[mem], cy[mem], w2
            depth = fixed if ie.side == "bottom" else h2 - fixed
        srt = np.sort(free)
        t = min(max(int(srt[(len(srt) - 1) // 2]), 0), extent)
        d2 = int(np.abs(free - t).sum() + depth.sum())
        total2 += ie.cost * d2
    return total2 / 2.0


def aspect_violated(width: int, height: int, lo: float, hi: float) -> bool:
    big = max(width, height)
    if big == 0:
        return False
    ratio = min(width, height) / big
    return ratio < lo or ratio > hi


def criterion(
    p: Placement,
    inst: Instance,
    placed: Iterable[int] | None = None,
    weights: CostWeights | None = None,
) -> CriterionReport:
    """Full criterion for the placed subset (all rectangles when ``placed`` is None).

    The aspect-ratio penalty only applies when every rectangle is placed.
    """
    cw = inst.weights if weights is None else weights
    mask = _placed_mask(inst, placed)
    if inst.n and mask.any():
        w, h = inst.dims(p.variant)
        width = int((p.x + w)[mask].max())
        height = int((p.y + h)[mask].max())
    else:
        width = height = 0
    conn = hpwl(p, inst, mask)
    prox = proximity(p, inst, mask)
    inter = interface(p, inst, width, height, mask)

    return assemble(inst, cw, width, height, conn, prox, inter, bool(mask.all()))


def assemble(
    inst: Instance,
    cw: CostWeights,
    width: int,
    height: int,
    conn: float,
    prox: float,
    inter: float,
    complete: bool,
) -> CriterionReport:
    """Combine raw terms into the weighted, normalized (and penalized) total."""
    s_conn, s_prox, s_inter = normalizers(inst)
    area_term = float(width + height)
    total = cw.c_area * area_term
    if s_conn > 0:
        total += cw.c_conn / s_conn * conn
    if s_prox > 0:
        total += cw.c_prox / s_prox * prox
    if s_inter > 0:
        total += cw.c_inter / s_inter * inter
    penalty = complete and aspect_violated(width, height, inst.aspect_lo, inst.aspect_hi)
    if penalty:
        total *= ASPECT_PENALTY
    return CriterionReport(
        area_term=area_term,
        conn_raw=conn,
        prox_raw=prox,
        inter_raw=inter,
        s_conn=s_conn,
        s_prox=s_prox,
        s_inter=s_inter,
        penalty_applied=penalty,
        total=total,
        width=width,
        height=height,
    )
