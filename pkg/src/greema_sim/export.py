"""Text artifacts: unit-tagged CSV, sorted JSON, minimal SVG line plots, manifests."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

SVG_W, SVG_H = 800, 600
_HEADER = re.compile(r"^(?P<name>[^\[\]]+)\[(?P<unit>[^\[\]]*)\]$")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    return "%.9g" % x


def write_csv(path: Path, columns: Sequence[tuple[str, str, Sequence]]) -> None:
    """Columns are ``(name, unit, values)``; the header cell is ``name[unit]``."""
    n = {len(c[2]) for c in columns}
    if len(n) != 1:
        raise ValueError("CSV columns must have equal length")
    lines = [",".join(f"{name}[{unit}]" for name, unit, _ in columns)]
    for row in zip(*(c[2] for c in columns)):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def split_header(cell: str) -> tuple[str, str]:
    m = _HEADER.match(cell.strip())
    if not m:
        raise ValueError(f"column header {cell!r} lacks a [unit] tag")
    return m["name"], m["unit"]


def read_csv(path: Path) -> tuple[list[tuple[str, str]], list[list[str]]]:
    """Header as ``(name, unit)`` pairs plus the raw string rows."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = [split_header(c) for c in lines[0].split(",")]
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def read_columns(path: Path) -> dict[str, tuple[str, np.ndarray]]:
    header, rows = read_csv(path)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: (unit, data[:, i]) for i, (name, unit) in enumerate(header)}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8", newline="\n")


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path: Path) -> str:
    return digest_bytes(Path(path).read_bytes())


def _decimate(x: np.ndarray, y: np.ndarray, limit: int = 2000):
    if x.size <= limit:
        return x, y
    idx = np.unique(np.linspace(0, x.size - 1, limit).round().astype(int))
    return x[idx], y[idx]


def line_plot(
    path: Path,
    lines: Iterable[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> None:
    """Polylines on a fixed 800x600 canvas with a bounding axis box and range labels."""
    colors = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e"]
    dashes = ["", ' stroke-dasharray="8 4"', ' stroke-dasharray="2 3"', "", ""]
    lines = [(lbl, np.asarray(x, float), np.asarray(y, float)) for lbl, x, y in lines]
    xs = np.concatenate([ln[1] for ln in lines])
    ys = np.concatenate([ln[2] for ln in lines])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 90, 770, 60, 540

    def px(x):
        return left + (x - x0) / (x1 - x0) * (right - left)

    def py(y):
        return bottom - (y - y0) / (y1 - y0) * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<text x="{SVG_W // 2}" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="black"/>',
        f'<text x="{(left + right) // 2}" y="{SVG_H - 20}" text-anchor="middle" font-family="sans-serif" font-size="14">{xlabel}</text>',
        f'<text x="20" y="{(top + bottom) // 2}" text-anchor="middle" font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 20 {(top + bottom) // 2})">{ylabel}</text>',
        f'<text x="{left}" y="{bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="12">{fmt(x0)}</text>',
        f'<text x="{right}" y="{bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="12">{fmt(x1)}</text>',
        f'<text x="{left - 6}" y="{bottom}" text-anchor="end" font-family="sans-serif" font-size="12">{fmt(y0)}</text>',
        f'<text x="{left - 6}" y="{top + 4}" text-anchor="end" font-family="sans-serif" font-size="12">{fmt(y1)}</text>',
    ]
    for i, (label, x, y) in enumerate(lines):
        x, y = _decimate(x, y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dashes[i % len(dashes)]} points="{pts}"/>')
        out.append(
            f'<text x="{right - 10}" y="{top + 20 + 18 * i}" text-anchor="end" font-family="sans-serif" '
            f'font-size="13" fill="{color}">{label}</text>'
        )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")


def summary_row(name: str, value, unit: str, provenance: str = "simulated") -> dict:
    if provenance not in ("simulated", "calibration-target"):
        raise ValueError(f"unknown provenance {provenance!r}")
    return {"name": name, "value": value, "unit": unit, "provenance": provenance}


@dataclass
class RunManifest:
    config_digest: str
    tool_version: str
    seed: int
    outputs: list[dict] = field(default_factory=list)

    def add(self, root: Path, path: Path, kind: str) -> None:
        self.outputs.append({
            "path": Path(path).relative_to(root).as_posix(),
            "kind": kind,
            "digest": digest_file(path),
        })

    def write(self, root: Path) -> Path:
        target = Path(root) / "manifest.json"
        write_json(target, asdict(self))
        return target

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data["config_digest"], data["tool_version"], data["seed"], data["outputs"])
