"""Serialising pavings: JSON lines, CSV and SVG pictures."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable

from .interval import Box, iv
from .solver import PavingRecord

FORMATS = ("jsonl", "csv")
COLORS = {"Y": "green", "N": "red", "U": "none"}


def _num(x: float) -> str:
    """Shortest text that reads back to the same double."""
    x = x + 0.0
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _names(records: Iterable[PavingRecord]) -> list[str]:
    return sorted({n for r in records for n in r.box.vars()})


def emit_boxes(records: list[PavingRecord], fmt: str = "jsonl", names: list[str] | None = None) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose jsonl or csv")
    names = names if names is not None else _names(records)
    if fmt == "jsonl":
        lines = []
        for r in records:
            body = ",".join(
                f'"{n}":[{_num(r.box[n].lo)},{_num(r.box[n].hi)}]' for n in sorted(r.box.vars())
            )
            lines.append(f'{{"kind":"{r.kind}","box":{{{body}}}}}')
        return "".join(line + "\n" for line in lines)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind"] + [f"{n}_{end}" for n in names for end in ("lo", "hi")])
    for r in records:
        row = [r.kind]
        for n in names:
            b = r.box[n]
            row += [_num(b.lo), _num(b.hi)]
        w.writerow(row)
    return out.getvalue()


def read_boxes(text: str, fmt: str = "jsonl") -> list[PavingRecord]:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose jsonl or csv")
    records = []
    if fmt == "jsonl":
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            box = Box({n: iv(float(lo), float(hi)) for n, (lo, hi) in obj["box"].items()})
            records.append(PavingRecord(obj["kind"], box))
        return records
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return records
    header = rows[0]
    names = [h[:-3] for h in header[1::2]]
    for row in rows[1:]:
        vals = [float(v) for v in row[1:]]
        box = Box({n: iv(vals[2 * i], vals[2 * i + 1]) for i, n in enumerate(names)})
        records.append(PavingRecord(row[0], box))
    return records


def emit_svg(records: list[PavingRecord], xvar: str, yvar: str, width: int = 400, height: int = 400) -> str:
    """Draw the boxes projected on ``xvar``/``yvar``.

    The picture spans the hull of all boxes, with y growing upwards.
    """
    for r in records:
        for n in (xvar, yvar):
            if not r.box[n].is_finite:
                raise ValueError(f"box {r.box!r} does not bound {n} finitely")
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    if not records:
        return head + "\n</svg>\n"
    x0 = min(r.box[xvar].lo for r in records)
    x1 = max(r.box[xvar].hi for r in records)
    y0 = min(r.box[yvar].lo for r in records)
    y1 = max(r.box[yvar].hi for r in records)
    sx = width / (x1 - x0) if x1 > x0 else 1.0
    sy = height / (y1 - y0) if y1 > y0 else 1.0
    parts = [head]
    # undecided boxes last so their outlines stay visible
    order = sorted(records, key=lambda r: {"Y": 0, "N": 1, "U": 2}[r.kind])
    for r in order:
        bx, by = r.box[xvar], r.box[yvar]
        px = (bx.lo - x0) * sx
        py = (y1 - by.hi) * sy
        pw = (bx.hi - bx.lo) * sx
        ph = (by.hi - by.lo) * sy
        stroke = ' stroke="gray" stroke-width="0.5"' if r.kind == "U" else ""
        parts.append(
            f'<rect x="{px:.4f}" y="{py:.4f}" width="{pw:.4f}" height="{ph:.4f}" '
            f'fill="{COLORS[r.kind]}"{stroke}/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
