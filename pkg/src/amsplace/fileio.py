"""Instance/placement JSON documents, GSRC benchmark parsing and SVG rendering."""

from __future__ import annotations

import json
import logging
import math
import re
from html import escape
from typing import Any

from .evaluator import CriterionReport
from .model import (
    Blockage,
    CostWeights,
    DistanceSpec,
    Instance,
    InterfaceEntry,
    Net,
    Placement,
    ProximityPair,
    Rect,
    SymmetryGroup,
    Variant,
    validate_instance,
)

log = logging.getLogger(__name__)

INSTANCE_FORMAT = "amsplace-instance"
PLACEMENT_FORMAT = "amsplace-placement"
VERSION = 1


class DataError(ValueError):
    """Malformed or inconsistent input document."""


# ---------------------------------------------------------------- instance documents


def instance_to_dict(inst: Instance) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "version": VERSION,
        "rects": [
            {"name": r.name, "variants": [[v.width, v.height] for v in r.variants]}
            for r in inst.rects
        ],
        "distances": {
            "default": inst.distances.default,
            "overrides": [[i, j, a] for (i, j), a in sorted(inst.distances.overrides.items())],
        },
        "nets": [{"members": sorted(net.members), "cost": net.cost} for net in inst.nets],
        "groups": [
            {"axis": g.axis, "pairs": [list(pr) for pr in g.pairs], "selfs": list(g.selfs)}
            for g in inst.groups
        ],
        "blockages": [
            {"x": b.x, "y": b.y, "w": b.width, "h": b.height, "restricted": sorted(b.restricted)}
            for b in inst.blockages
        ],
        "proximities": [{"i": q.i, "j": q.j, "cost": q.cost} for q in inst.proximities],
        "interfaces": [
            {"side": e.side, "members": sorted(e.members), "cost": e.cost}
            for e in inst.interfaces
        ],
        "aspect": [inst.aspect_lo, inst.aspect_hi],
        "weights": {
            "c_area": inst.weights.c_area,
            "c_conn": inst.weights.c_conn,
            "c_prox": inst.weights.c_prox,
            "c_inter": inst.weights.c_inter,
        },
    }


def write_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


class _Reader:
    """Typed field access that reports the JSON path of every failure."""

    def __init__(self, doc: Any, path: str = "$"):
        self.doc = doc
        self.path = path

    def fail(self, msg: str):
        raise DataError(f"{self.path}: {msg}")

    def sub(self, key) -> "_Reader":
        suffix = f"[{key}]" if isinstance(key, int) else f".{key}"
        if isinstance(key, int):
            if not isinstance(self.doc, list) or not 0 <= key < len(self.doc):
                self.fail(f"missing index {key}")
            return _Reader(self.doc[key], self.path + suffix)
        if not isinstance(self.doc, dict):
            self.fail("expected an object")
        if key not in self.doc:
            raise DataError(f"{self.path + suffix}: required field missing")
        return _Reader(self.doc[key], self.path + suffix)

    def opt(self, key, default):
        if not isinstance(self.doc, dict):
            self.fail("expected an object")
        if key not in self.doc:
            return _Reader(default, f"{self.path}.{key}")
        return self.sub(key)

    def items(self) -> list["_Reader"]:
        if not isinstance(self.doc, list):
            self.fail("expected an array")
        return [self.sub(k) for k in range(len(self.doc))]

    def int(self) -> int:
        if isinstance(self.doc, bool) or not isinstance(self.doc, int):
            self.fail(f"expected an integer, got {self.doc!r}")
        return self.doc

    def num(self) -> float:
        if isinstance(self.doc, bool) or not isinstance(self.doc, (int, float)):
            self.fail(f"expected a number, got {self.doc!r}")
        if not math.isfinite(self.doc):
            self.fail("non-finite number")
        return float(self.doc)

    def str(self) -> str:
        if not isinstance(self.doc, str):
            self.fail(f"expected a string, got {self.doc!r}")
        return self.doc

    def ints(self) -> list[int]:
        return [r.int() for r in self.items()]


def _load_json(text: str, kind: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"line {exc.lineno} column {exc.colno}: malformed JSON ({exc.msg})") from None


def _check_header(doc: _Reader, kind: str) -> None:
    fmt = doc.opt("format", kind).str()
    if fmt != kind:
        doc.sub("format").fail(f"expected {kind!r}, got {fmt!r}")
    version = doc.opt("version", VERSION).int()
    if version != VERSION:
        doc.sub("version").fail(f"unsupported version {version}")


def instance_from_dict(raw: Any) -> Instance:
    doc = _Reader(raw)
    if not isinstance(raw, dict):
        doc.fail("expected an object")
    _check_header(doc, INSTANCE_FORMAT)
    rects = []
    for k, r in enumerate(doc.sub("rects").items()):
        variants = []
        for v in r.sub("variants").items():
            dims = v.ints()
            if len(dims) != 2:
                v.fail("variant must be [width, height]")
            variants.append(Variant(*dims))
        rects.append(Rect(k, tuple(variants), r.opt("name", "").str()))

    d = doc.opt("distances", {})
    overrides = {}
    for o in d.opt("overrides", []).items():
        vals = o.ints()
        if len(vals) != 3:
            o.fail("override must be [i, j, distance]")
        i, j, a = vals
        if i >= j:
            o.fail("override requires i < j")
        if (i, j) in overrides:
            o.fail(f"duplicate override for ({i}, {j})")
        overrides[(i, j)] = a
    distances = DistanceSpec(d.opt("default", 0).int(), overrides)

    nets = tuple(
        Net(frozenset(e.sub("members").ints()), e.opt("cost", 1.0).num())
        for e in doc.opt("nets", []).items()
    )
    groups = []
    for g in doc.opt("groups", []).items():
        pairs = []
        for pr in g.opt("pairs", []).items():
            ij = pr.ints()
            if len(ij) != 2:
                pr.fail("pair must be [i, j]")
            pairs.append((ij[0], ij[1]))
        groups.append(SymmetryGroup(g.sub("axis").str(), tuple(pairs), tuple(g.opt("selfs", []).ints())))
    blockages = tuple(
        Blockage(b.sub("x").int(), b.sub("y").int(), b.sub("w").int(), b.sub("h").int(),
                 frozenset(b.opt("restricted", []).ints()))
        for b in doc.opt("blockages", []).items()
    )
    proximities = tuple(
        ProximityPair(q.sub("i").int(), q.sub("j").int(), q.sub("cost").num())
        for q in doc.opt("proximities", []).items()
    )
    interfaces = tuple(
        InterfaceEntry(e.sub("side").str(), frozenset(e.sub("members").ints()), e.opt("cost", 1.0).num())
        for e in doc.opt("interfaces", []).items()
    )
    asp = doc.opt("aspect", [0.0, 1.0])
    bounds = [a.num() for a in asp.items()]
    if len(bounds) != 2:
        asp.fail("aspect must be [lo, hi]")
    w = doc.opt("weights", {})
    weights = CostWeights(
        w.opt("c_area", 1.0).num(), w.opt("c_conn", 0.0).num(),
        w.opt("c_prox", 0.0).num(), w.opt("c_inter", 0.0).num(),
    )
    inst = Instance(tuple(rects), distances, nets, tuple(groups), blockages, proximities,
                    interfaces, bounds[0], bounds[1], weights)
    problems = validate_instance(inst)
    if problems:
        raise DataError("invalid instance: " + "; ".join(problems))
    return inst


def parse_instance(text: str) -> Instance:
    """Parse an instance document; raises :class:`DataError` with context."""
    return instance_from_dict(_load_json(text, INSTANCE_FORMAT))


# ---------------------------------------------------------------- placement documents


def write_placement(p: Placement, inst: Instance, report: CriterionReport | None = None,
                    meta: dict | None = None) -> str:
    doc = {
        "format": PLACEMENT_FORMAT,
        "version": VERSION,
        "rects": [
            {"name": inst.rects[k].name, "x": int(p.x[k]), "y": int(p.y[k]),
             "variant": int(p.variant[k])}
            for k in range(len(p))
        ],
        "axes2": list(p.axes),
        "report": None if report is None else report.as_dict(),
        "meta": meta or {},
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_placement(text: str, inst: Instance | None = None) -> tuple[Placement, dict]:
    """Return ``(placement, document)``; checks the rect count against ``inst``."""
    raw = _load_json(text, PLACEMENT_FORMAT)
    doc = _Reader(raw)
    if not isinstance(raw, dict):
        doc.fail("expected an object")
    _check_header(doc, PLACEMENT_FORMAT)
    xs, ys, vs = [], [], []
    for r in doc.sub("rects").items():
        xs.append(r.sub("x").int())
        ys.append(r.sub("y").int())
        vs.append(r.sub("variant").int())
    axes = doc.opt("axes2", []).ints()
    if inst is not None:
        if len(xs) != inst.n:
            doc.sub("rects").fail(f"{len(xs)} rects, instance has {inst.n}")
        if len(axes) != len(inst.groups):
            doc.sub("axes2").fail(f"{len(axes)} axes, instance has {len(inst.groups)} groups")
        for k, v in enumerate(vs):
            if not 0 <= v < len(inst.rects[k].variants):
                doc.sub("rects").sub(k).sub("variant").fail("variant index out of range")
    return Placement(xs, ys, vs, axes), raw


def report_from_dict(d: dict) -> CriterionReport:
    return CriterionReport(**d)


# ---------------------------------------------------------------- GSRC benchmarks

_BLOCK_RE = re.compile(r"^(\S+)\s+hardrectilinear\s+(\d+)\s+(.*)$")
_POINT_RE = re.compile(r"\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\)")
_COUNT_RE = re.compile(r"^(\w+)\s*:\s*(\d+)")


def _gsrc_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line and not line.startswith(("UCSC", "UCLA")):
            yield lineno, line


def _num(s: str, where: str) -> int:
    v = float(s)
    if v != int(v):
        raise DataError(f"{where}: non-integral coordinate {s}")
    return int(v)


def gsrc_header_counts(blocks_text: str, nets_text: str) -> dict[str, int]:
    """Declared counts (``NumHardRectilinearBlocks``, ``NumNets``, ...)."""
    out = {}
    for _, line in list(_gsrc_lines(blocks_text)) + list(_gsrc_lines(nets_text)):
        m = _COUNT_RE.match(line)
        if m:
            out[m.group(1)] = int(m.group(2))
    return out


def parse_gsrc(blocks_text: str, nets_text: str, include_terminals: bool = False) -> Instance:
    """Build an instance from GSRC ``.blocks`` and ``.nets`` text.

    Each hard block gets both orientations as variants. Terminals are dropped
    from nets unless ``include_terminals``; then each becomes a 1x1 rect.
    Nets left with fewer than two members are dropped. Pin offsets are ignored.
    """
    names: dict[str, int] = {}
    dims: list[tuple[int, int]] = []
    terminals: set[str] = set()
    for lineno, line in _gsrc_lines(blocks_text):
        where = f"blocks line {lineno}"
        if _COUNT_RE.match(line):
            continue
        m = _BLOCK_RE.match(line)
        if m:
            name, k, rest = m.group(1), int(m.group(2)), m.group(3)
            pts = [(_num(a, where), _num(b, where)) for a, b in _POINT_RE.findall(rest)]
            if k != 4 or len(pts) != 4:
                raise DataError(f"{where}: block {name!r} is not a 4-corner rectangle")
            xs = sorted({x for x, _ in pts})
            ys = sorted({y for _, y in pts})
            if len(xs) != 2 or len(ys) != 2 or len(set(pts)) != 4:
                raise DataError(f"{where}: block {name!r} corners do not form a rectangle")
            if name in names:
                raise DataError(f"{where}: duplicate block {name!r}")
            names[name] = len(dims)
            dims.append((xs[1] - xs[0], ys[1] - ys[0]))
            continue
        parts = line.split()
        if len(parts) == 2 and parts[1] == "terminal":
            terminals.add(parts[0])
            continue
        if len(parts) >= 2 and parts[1] in ("softrectangular", "softrectilinear"):
            raise DataError(f"{where}: soft block {parts[0]!r} not supported")
        raise DataError(f"{where}: unrecognised line {line!r}")

    rects = []
    for name, k in names.items():
        w, h = dims[k]
        variants = (Variant(w, h),) if w == h else (Variant(w, h), Variant(h, w))
        rects.append(Rect(k, variants, name))
    if include_terminals:
        for name in sorted(terminals):
            names[name] = len(rects)
            rects.append(Rect(len(rects), (Variant(1, 1),), name))

    nets = []
    pending: list[int] | None = None
    expect = 0
    dropped = 0

    def close():
        nonlocal dropped
        if pending is None:
            return
        if len(pending) != expect:
            raise DataError(f"nets: net {len(nets) + dropped} declares {expect} pins, found {len(pending)}")
        members = frozenset(k for k in pending if k >= 0)
        if len(members) >= 2:
            nets.append(Net(members, 1.0))
        else:
            dropped += 1

    for lineno, line in _gsrc_lines(nets_text):
        where = f"nets line {lineno}"
        if line.startswith("NetDegree"):
            close()
            m = re.match(r"NetDegree\s*:\s*(\d+)", line)
            if not m:
                raise DataError(f"{where}: malformed NetDegree header")
            expect = int(m.group(1))
            pending = []
            continue
        if _COUNT_RE.match(line):
            continue
        if pending is None:
            raise DataError(f"{where}: pin outside of a net")
        pin = line.split()[0]
        if pin in names:
            pending.append(names[pin])
        elif pin in terminals:
            pending.append(-1)
        else:
            raise DataError(f"{where}: unknown pin {pin!r}")
    close()
    if dropped:
        log.info("dropped %d nets with fewer than two block members", dropped)
    inst = Instance(tuple(rects), DistanceSpec(0), tuple(nets), aspect_lo=0.0, aspect_hi=1.0)
    problems = validate_instance(inst)
    if problems:
        raise DataError("invalid instance: " + "; ".join(problems))
    return inst


# ---------------------------------------------------------------- SVG


def render_svg(p: Placement, inst: Instance, scale: float = 4.0, margin: int = 10) -> str:
    """Deterministic SVG: devices, blockages, net bounding boxes and symmetry axes."""
    w, h = inst.dims(p.variant)
    W = max([int((p.x + w).max())] if len(p) else [0])
    H = max([int((p.y + h).max())] if len(p) else [0])
    for b in inst.blockages:
        W, H = max(W, b.x + b.width), max(H, b.y + b.height)
    W, H = max(W, 1), max(H, 1)

    def sx(v: float) -> str:
        return f"{margin + v * scale:g}"

    def sy(v: float) -> str:
        # flip so that y grows upwards
        return f"{margin + (H - v) * scale:g}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * margin + W * scale:g}" '
        f'height="{2 * margin + H * scale:g}">',
        "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
        "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" "
        "stroke=\"#888\" stroke-width=\"2\"/></pattern></defs>",
        f'<rect class="outline" x="{sx(0)}" y="{sy(H)}" width="{W * scale:g}" '
        f'height="{H * scale:g}" fill="none" stroke="#000"/>',
    ]
    for k, b in enumerate(inst.blockages):
        out.append(
            f'<rect class="blockage" data-id="{k}" x="{sx(b.x)}" y="{sy(b.y + b.height)}" '
            f'width="{b.width * scale:g}" height="{b.height * scale:g}" '
            'fill="url(#hatch)" stroke="#888"/>'
        )
    for i in range(len(p)):
        x, y = int(p.x[i]), int(p.y[i])
        label = escape(inst.rects[i].name or str(i))
        out.append(
            f'<rect class="device" data-id="{i}" x="{sx(x)}" y="{sy(y + h[i])}" '
            f'width="{w[i] * scale:g}" height="{h[i] * scale:g}" fill="#cde" stroke="#036"/>'
        )
        out.append(
            f'<text x="{sx(x + w[i] / 2)}" y="{sy(y + h[i] / 2)}" font-size="{max(scale * 2, 6):g}" '
            f'text-anchor="middle" dominant-baseline="middle">{label}</text>'
        )
    for e, net in enumerate(inst.nets):
        box = net_box(p, inst, e)
        if box is None:
            continue
        x0, y0, x1, y1 = box
        out.append(
            f'<rect class="net" data-id="{e}" x="{sx(x0)}" y="{sy(y1)}" '
            f'width="{(x1 - x0) * scale:g}" height="{(y1 - y0) * scale:g}" '
            'fill="none" stroke="#c30" stroke-dasharray="4 2"/>'
        )
    for g, grp in enumerate(inst.groups):
        if g >= len(p.axes):
            break
        a = p.axes[g] / 2
        if grp.axis == "vertical":
            x1 = x2 = sx(a)
            y1, y2 = sy(0), sy(H)
        else:
            y1 = y2 = sy(a)
            x1, x2 = sx(0), sx(W)
        out.append(
            f'<line class="axis" data-id="{g}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
            'stroke="#090" stroke-dasharray="8 3"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def net_box(p: Placement, inst: Instance, e: int):
    """Bounding box ``(x0, y0, x1, y1)`` of a net's member centroids, or ``None``."""
    members = sorted(inst.nets[e].members)
    if not members or len(p) == 0:
        return None
    w, h = inst.dims(p.variant)
    cx = [(2 * int(p.x[k]) + int(w[k])) / 2 for k in members]
    cy = [(2 * int(p.y[k]) + int(h[k])) / 2 for k in members]
    return min(cx), min(cy), max(cx), max(cy)
