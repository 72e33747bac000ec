"""Post-search improvement: local searches over genes and layout, then an LP pass."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from . import _kernels as K
from .decoder import decode, kernel_tables, report
from .evaluator import CriterionReport, aspect_violated
from .model import CostWeights, Instance, Placement, check_feasible

log = logging.getLogger(__name__)

LP_TOL = 1e-9


@dataclass
class Budget:
    """Wall-clock and/or evaluation cap; ``None`` means unlimited."""

    seconds: float | None = None
    max_evals: int | None = None
    evals: int = 0
    _start: float = field(default_factory=time.perf_counter)

    def spend(self, k: int = 1) -> None:
        self.evals += k

    def exhausted(self) -> bool:
        if self.max_evals is not None and self.evals >= self.max_evals:
            return True
        if self.seconds is not None and time.perf_counter() - self._start >= self.seconds:
            return True
        return False


def _budget(b) -> Budget:
    if b is None:
        return Budget()
    if isinstance(b, Budget):
        return b
    return Budget(seconds=float(b))


# ---------------------------------------------------------------- gene-space searches


def ls_variants(chrom, inst: Instance, cw: CostWeights | None = None, budget=None):
    """First-improvement sweeps over each rectangle's variant gene.

    Returns ``(chromosome, report)``; the total never increases.
    """
    cw = inst.weights if cw is None else cw
    b = _budget(budget)
    best = np.asarray(chrom, dtype=float).copy()
    rep = decode(best, inst, cw)[1]
    n = inst.n
    improved = True
    while improved and not b.exhausted():
        improved = False
        for i in range(n):
            m = len(inst.rects[i].variants)
            if m < 2:
                continue
            current = min(int(best[n + i] * m), m - 1)
            for k in range(m):
                if k == current or b.exhausted():
                    continue
                trial = best.copy()
                trial[n + i] = (k + 0.5) / m
                r = decode(trial, inst, cw)[1]
                b.spend()
                if r.total < rep.total:
                    best, rep, improved = trial, r, True
                    break
    return best, rep


def ls_positions(chrom, inst: Instance, cw: CostWeights | None = None, budget=None,
                 max_n: int = 60):
    """Pairwise swaps of position genes (2-opt) until no swap improves."""
    cw = inst.weights if cw is None else cw
    b = _budget(budget)
    best = np.asarray(chrom, dtype=float).copy()
    rep = decode(best, inst, cw)[1]
    n = inst.n
    if n > max_n:
        return best, rep
    improved = True
    while improved and not b.exhausted():
        improved = False
        for i in range(n):
            for j in range(i + 1, n):
                if b.exhausted():
                    return best, rep
                if best[i] == best[j]:
                    continue
                trial = best.copy()
                trial[i], trial[j] = best[j], best[i]
                r = decode(trial, inst, cw)[1]
                b.spend()
                if r.total < rep.total:
                    best, rep, improved = trial, r, True
    return best, rep


# ---------------------------------------------------------------- layout search


def _units(inst: Instance):
    """Movable units: each symmetry group as a whole, every other rect alone."""
    grouped = set()
    units = []
    for g, grp in enumerate(inst.groups):
        units.append((tuple(sorted(grp.members)), g))
        grouped.update(grp.members)
    for i in range(inst.n):
        if i not in grouped:
            units.append(((i,), None))
    units.sort(key=lambda u: u[0][0])
    return units


def _points(p: Placement, inst: Instance, w, h, keep: np.ndarray):
    xs, ys, gs = [0], [0], [-1]
    for blk in inst.blockages:
        for cx, cy in ((blk.x, blk.y), (blk.x + blk.width, blk.y),
                       (blk.x, blk.y + blk.height), (blk.x + blk.width, blk.y + blk.height)):
            xs.append(cx), ys.append(cy), gs.append(-1)
    for k in np.flatnonzero(keep):
        x, y = int(p.x[k]), int(p.y[k])
        for cx, cy in ((x, y), (x + w[k], y), (x, y + h[k]), (x + w[k], y + h[k])):
            xs.append(cx), ys.append(cy), gs.append(int(k))
    # dedupe by coordinate, first occurrence wins
    seen, order = set(), []
    for q, xy in enumerate(zip(xs, ys)):
        if xy not in seen:
            seen.add(xy)
            order.append(q)
    idx = np.array(order, dtype=np.int64)
    return (np.array(xs, dtype=np.int64)[idx], np.array(ys, dtype=np.int64)[idx],
            np.array(gs, dtype=np.int64)[idx])


def ls_layout(p: Placement, inst: Instance, cw: CostWeights | None = None, budget=None):
    """Relocate units one at a time to their best point/variant/slide order.

    A move is kept only when the full criterion strictly drops and the
    placement stays feasible. Returns ``(placement, report)``.
    """
    cw = inst.weights if cw is None else cw
    b = _budget(budget)
    tabs = kernel_tables(inst, cw)
    rep = report(p, inst, cw)
    cnt = np.zeros(2, np.int64)
    improved = True
    while improved and not b.exhausted():
        improved = False
        for members, g in _units(inst):
            if b.exhausted():
                break
            moved = _relocate(p, inst, cw, tabs, members, g, cnt)
            b.spend()
            if moved is None:
                continue
            r = report(moved, inst, cw)
            if r.total < rep.total and check_feasible(inst, moved)[0]:
                p, rep, improved = moved, r, True
    return p, rep


def _relocate(p: Placement, inst: Instance, cw, tabs, members, g, cnt):
    w, h = inst.dims(p.variant)
    keep = np.ones(inst.n, dtype=np.bool_)
    mid = np.array(members, dtype=np.int64)
    keep[mid] = False
    st, wk = K.build_state(p.x, p.y, w, h, keep, tabs)
    ptx, pty, ptg = _points(p, inst, w, h, keep)
    ptd = np.zeros_like(ptx)
    ox, oy = int(p.x[mid].min()), int(p.y[mid].min())
    mdx = p.x[mid] - ox
    mdy = p.y[mid] - oy
    if g is None:
        i = members[0]
        vs = inst.rects[i].variants
        vw = np.array([[v.width] for v in vs], dtype=np.int64)
        vh = np.array([[v.height] for v in vs], dtype=np.int64)
    else:
        vw = w[mid][None, :].copy()
        vh = h[mid][None, :].copy()
    val, bx, by, row = K.best_relocation(mid, mdx, mdy, vw, vh, ptx, pty, ptg, ptd,
                                         len(ptx), st, wk, tabs, cnt)
    if not math.isfinite(val) or row < 0:
        return None
    if bx == ox and by == oy and (g is not None or row == p.variant[members[0]]):
        return None
    x = p.x.copy()
    y = p.y.copy()
    var = p.variant.copy()
    x[mid] = bx + mdx
    y[mid] = by + mdy
    axes = list(p.axes)
    if g is None:
        var[members[0]] = row
    else:
        shift = (bx - ox) if inst.groups[g].axis == "vertical" else (by - oy)
        axes[g] += 2 * shift
    return Placement(x, y, var, axes)


# ---------------------------------------------------------------- LP refinement

_REL_NAMES = ("left", "below", "right", "above")


def extract_relations(p: Placement, inst: Instance):
    """Per pair ``i < j`` the relation with the largest slack (ties: left, below,
    right, above) as ``(i, j, rel, margin)``; ``rel`` indexes ``_REL_NAMES``."""
    w, h = inst.dims(p.variant)
    D = inst.dist
    out = []
    n = inst.n
    for i in range(n):
        for j in range(i + 1, n):
            a = int(D[i, j])
            slack = (
                p.x[j] - (p.x[i] + w[i] + a),
                p.y[j] - (p.y[i] + h[i] + a),
                p.x[i] - (p.x[j] + w[j] + a),
                p.y[i] - (p.y[j] + h[j] + a),
            )
            out.append((i, j, int(np.argmax(slack)), a))
    return out


class _LP:
    def __init__(self):
        self.nvar = 0
        self.cost: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.rows: list[tuple[dict, float]] = []  # sum coef*var <= rhs
        self.eqs: list[tuple[dict, float]] = []

    def var(self, cost=0.0, lb=0.0, ub=None) -> int:
        self.cost.append(cost)
        self.lb.append(lb)
        self.ub.append(ub)
        self.nvar += 1
        return self.nvar - 1

    def le(self, coefs: dict, rhs: float):
        self.rows.append((coefs, rhs))

    def eq(self, coefs: dict, rhs: float):
        self.eqs.append((coefs, rhs))

    @staticmethod
    def _mat(rows, nvar):
        data, ri, ci, rhs = [], [], [], []
        for r, (coefs, b) in enumerate(rows):
            for c, v in coefs.items():
                ri.append(r)
                ci.append(c)
                data.append(v)
            rhs.append(b)
        if not rows:
            return None, None
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), nvar)), np.array(rhs)

    def solve(self, integral=(), time_limit: float | None = None):
        A, b = self._mat(self.rows, self.nvar)
        Aeq, beq = self._mat(self.eqs, self.nvar)
        integrality = None
        if len(integral):
            integrality = np.zeros(self.nvar, dtype=np.int64)
            integrality[list(integral)] = 1
        options = {} if time_limit is None else {"time_limit": time_limit}
        return linprog(
            np.array(self.cost), A_ub=A, b_ub=b, A_eq=Aeq, b_eq=beq,
            bounds=list(zip(self.lb, self.ub)), method="highs",
            integrality=integrality, options=options,
        )


def _add(d: dict, k: int, v: float):
    d[k] = d.get(k, 0.0) + v


def lp_refine(p: Placement, inst: Instance, cw: CostWeights | None = None,
              time_limit: float | None = 30.0, max_rounds: int = 10):
    """LP over coordinates with every pairwise relation frozen.

    Variants stay fixed. Coordinates are solved as integers first; if that
    fails the continuous optimum is floored (symmetric partners re-derived
    from the rounded axis). A result is accepted only if it is feasible and
    not worse. Relations are re-extracted and the LP re-solved until the
    total stops dropping. Returns ``(placement, report)``.
    """
    cw = inst.weights if cw is None else cw
    rep = report(p, inst, cw)
    for _ in range(max_rounds):
        q, r = _lp_once(p, inst, cw, rep, time_limit)
        if not r.total < rep.total - LP_TOL * abs(rep.total):
            if r.total <= rep.total:
                p, rep = q, r
            break
        p, rep = q, r
    return p, rep


def _lp_once(p: Placement, inst: Instance, cw: CostWeights, rep_in: CriterionReport,
             time_limit: float | None):
    n = inst.n
    if n == 0:
        return p, rep_in
    w, h = inst.dims(p.variant)
    s_conn, s_prox, s_inter = rep_in.s_conn, rep_in.s_prox, rep_in.s_inter
    wc = cw.c_conn / s_conn if s_conn > 0 else 0.0
    wp = cw.c_prox / s_prox if s_prox > 0 else 0.0
    wi = cw.c_inter / s_inter if s_inter > 0 else 0.0

    lp = _LP()
    X = [lp.var() for _ in range(n)]
    Y = [lp.var() for _ in range(n)]
    W = lp.var(cw.c_area)
    H = lp.var(cw.c_area)
    for i in range(n):
        lp.le({X[i]: 1.0, W: -1.0}, -float(w[i]))
        lp.le({Y[i]: 1.0, H: -1.0}, -float(h[i]))

    for i, j, rel, a in extract_relations(p, inst):
        if rel == 0:
            lp.le({X[i]: 1.0, X[j]: -1.0}, -float(w[i] + a))
        elif rel == 1:
            lp.le({Y[i]: 1.0, Y[j]: -1.0}, -float(h[i] + a))
        elif rel == 2:
            lp.le({X[j]: 1.0, X[i]: -1.0}, -float(w[j] + a))
        else:
            lp.le({Y[j]: 1.0, Y[i]: -1.0}, -float(h[j] + a))

    for blk in inst.blockages:
        for k in sorted(blk.restricted):
            slack = (
                blk.x - (p.x[k] + w[k]), blk.y - (p.y[k] + h[k]),
                p.x[k] - (blk.x + blk.width), p.y[k] - (blk.y + blk.height),
            )
            rel = int(np.argmax(slack))
            if rel == 0:
                lp.le({X[k]: 1.0}, float(blk.x - w[k]))
            elif rel == 1:
                lp.le({Y[k]: 1.0}, float(blk.y - h[k]))
            elif rel == 2:
                lp.le({X[k]: -1.0}, -float(blk.x + blk.width))
            else:
                lp.le({Y[k]: -1.0}, -float(blk.y + blk.height))

    axis_vars = []
    for grp in inst.groups:
        A = lp.var()
        axis_vars.append(A)
        P, Q, ext = (X, Y, w) if grp.axis == "vertical" else (Y, X, h)
        for i, j in grp.pairs:
            lp.eq({P[i]: 1.0, P[j]: 1.0, A: -1.0}, -float(ext[i]))
            lp.eq({Q[i]: 1.0, Q[j]: -1.0}, 0.0)
        for s in grp.selfs:
            lp.eq({P[s]: 2.0, A: -1.0}, -float(ext[s]))

    # connectivity: bounding boxes of doubled centroids
    for net in inst.nets:
        if net.cost <= 0 or wc == 0:
            continue
        for C, ext in ((X, w), (Y, h)):
            lo = lp.var(-wc * net.cost / 2.0, lb=None)
            hi = lp.var(wc * net.cost / 2.0, lb=None)
            for k in net.members:
                lp.le({lo: 1.0, C[k]: -2.0}, float(ext[k]))
                lp.le({C[k]: 2.0, hi: -1.0}, -float(ext[k]))

    for pp in inst.proximities:
        if wp == 0:
            continue
        for C, ext, pos in ((X, w, p.x), (Y, h, p.y)):
            i, j = pp.i, pp.j
            # doubled centroid difference: 2C_i - 2C_j + (ext_i - ext_j)
            off = float(ext[i] - ext[j])
            if pp.cost > 0:
                t = lp.var(wp * pp.cost / 2.0)
                lp.le({C[i]: 2.0, C[j]: -2.0, t: -1.0}, -off)
                lp.le({C[j]: 2.0, C[i]: -2.0, t: -1.0}, off)
            else:
                # repulsion: keep the current order so |d| stays linear
                sgn = 1.0 if 2 * pos[i] + ext[i] >= 2 * pos[j] + ext[j] else -1.0
                _add_cost = wp * pp.cost / 2.0 * sgn
                lp.cost[C[i]] += 2.0 * _add_cost
                lp.cost[C[j]] -= 2.0 * _add_cost
                lp.le({C[i]: -2.0 * sgn, C[j]: 2.0 * sgn}, sgn * off)

    for ie in inst.interfaces:
        if wi == 0:
            continue
        vertical_side = ie.side in ("left", "right")
        F, fext, E = (Y, h, H) if vertical_side else (X, w, W)
        D, dext, De = (X, w, W) if vertical_side else (Y, h, H)
        t = lp.var(lb=0.0)
        lp.le({t: 1.0, E: -2.0}, 0.0)  # entry point on the side (doubled)
        for k in ie.members:
            u = lp.var(wi * ie.cost / 2.0)
            lp.le({F[k]: 2.0, t: -1.0, u: -1.0}, -float(fext[k]))
            lp.le({t: 1.0, F[k]: -2.0, u: -1.0}, float(fext[k]))
            if ie.side in ("left", "bottom"):
                lp.cost[D[k]] += wi * ie.cost  # depth = (2D + ext)/2
            else:
                lp.cost[De] += wi * ie.cost
                lp.cost[D[k]] -= wi * ie.cost

    if not rep_in.penalty_applied and (inst.aspect_lo > 0 or inst.aspect_hi < 1):
        big, small = (W, H) if rep_in.width >= rep_in.height else (H, W)
        lp.le({small: 1.0, big: -1.0}, 0.0)
        lp.le({big: inst.aspect_lo, small: -1.0}, 0.0)
        lp.le({small: 1.0, big: -inst.aspect_hi}, 0.0)

    # coordinates and axes integral: the relaxation is often half-integral
    # around symmetry axes, which flooring cannot repair
    integral = X + Y + axis_vars
    for ints in (integral, ()):
        try:
            res = lp.solve(ints, time_limit)
        except Exception as exc:  # numerical trouble in the solver
            log.warning("LP solve failed: %s", exc)
            continue
        if res.x is None or res.status not in (0, 1):
            log.info("LP not solved (status %s): %s", res.status, res.message)
            continue
        cand = _round(res.x, X, Y, axis_vars, p, inst, w, h)
        if cand is None or not check_feasible(inst, cand)[0]:
            continue
        rep = report(cand, inst, cw)
        if rep.total <= rep_in.total + LP_TOL * abs(rep_in.total):
            return cand, rep
    return p, rep_in


def _floor(v: float) -> int:
    r = round(v)
    return int(r) if abs(v - r) < 1e-6 else int(math.floor(v))


def _round(sol, X, Y, axis_vars, p: Placement, inst: Instance, w, h):
    x = np.array([max(0, _floor(sol[v])) for v in X], dtype=np.int64)
    y = np.array([max(0, _floor(sol[v])) for v in Y], dtype=np.int64)
    axes = []
    for g, grp in enumerate(inst.groups):
        P, Q, ext = (x, y, w) if grp.axis == "vertical" else (y, x, h)
        a2 = _floor(sol[axis_vars[g]])
        if grp.selfs and (a2 - ext[grp.selfs[0]]) % 2:
            a2 -= 1
        for i, j in grp.pairs:
            # keep the member nearer to the floored axis side, mirror the other
            P[j] = a2 - P[i] - ext[i]
            Q[j] = Q[i]
        for s in grp.selfs:
            P[s] = (a2 - ext[s]) // 2
        if (P < 0).any():
            return None
        axes.append(int(a2))
    return Placement(x, y, p.variant, axes)


# ---------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class RefineBudgets:
    variants: float | None = 5.0  # seconds; 0 skips the stage
    positions: float | None = 5.0
    layout: float | None = 5.0
    lp: bool = True
    max_n_positions: int = 60


@dataclass
class RefineResult:
    chromosome: np.ndarray
    placement: Placement
    report: CriterionReport
    stages: list[tuple[str, float, float]]  # (stage, total before, total after)


def refine_pipeline(chrom, inst: Instance, cw: CostWeights | None = None,
                    budgets: RefineBudgets = RefineBudgets()) -> RefineResult:
    """Variant search, position swaps (small instances), layout moves, then LP."""
    cw = inst.weights if cw is None else cw
    c = np.asarray(chrom, dtype=float).copy()
    p, rep = decode(c, inst, cw)
    stages = []

    def zero(bud):
        return bud is not None and bud <= 0

    if not zero(budgets.variants):
        before = rep.total
        c, rep = ls_variants(c, inst, cw, budgets.variants)
        stages.append(("variants", before, rep.total))
    if not zero(budgets.positions) and inst.n <= budgets.max_n_positions:
        before = rep.total
        c, rep = ls_positions(c, inst, cw, budgets.positions, budgets.max_n_positions)
        stages.append(("positions", before, rep.total))
    p, rep = decode(c, inst, cw)
    if not zero(budgets.layout):
        before = rep.total
        p, rep = ls_layout(p, inst, cw, budgets.layout)
        stages.append(("layout", before, rep.total))
    if budgets.lp:
        before = rep.total
        p, rep = lp_refine(p, inst, cw)
        stages.append(("lp", before, rep.total))
    return RefineResult(c, p, rep, stages)
