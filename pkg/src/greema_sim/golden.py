"""Compare a run directory against committed golden outputs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .export import RunManifest, read_csv

# max-abs tolerance per unit tag for CSV series; everything else compares exactly
DEFAULT_TOLERANCES = {
    "s": 1e-12,
    "m": 1e-9,
    "m/s": 1e-9,
    "deg": 1e-7,
    "g": 1e-6,
    "N": 1e-9,
    "N/mm": 1e-12,
    "mm": 1e-9,
    "1": 1e-12,
}
DEFAULT_TOLERANCE = 1e-9


@dataclass
class GoldenReport:
    compared: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.mismatches

    def lines(self) -> list[str]:
        out = [f"MISSING {m}" for m in self.missing]
        out += [f"MISMATCH {m}" for m in self.mismatches]
        out.append(f"{'PASS' if self.ok else 'FAIL'}: {len(self.compared)} compared, "
                   f"{len(self.missing)} missing, {len(self.mismatches)} mismatched")
        return out


def _compare_csv(rel: str, run: Path, gold: Path, tolerances: dict[str, float]) -> list[str]:
    try:
        h_run, r_run = read_csv(run)
        h_gold, r_gold = read_csv(gold)
    except ValueError as exc:
        return [f"{rel}: {exc}"]
    if h_run != h_gold:
        return [f"{rel}: header differs ({h_run} vs {h_gold})"]
    if len(r_run) != len(r_gold):
        return [f"{rel}: {len(r_run)} rows vs {len(r_gold)} golden rows"]
    problems = []
    for i, (a_row, b_row) in enumerate(zip(r_run, r_gold), start=1):
        for (name, unit), a, b in zip(h_gold, a_row, b_row):
            if a == b:
                continue
            try:
                fa, fb = float(a), float(b)
            except ValueError:
                problems.append(f"{rel} row {i} column {name}[{unit}]: {a!r} != {b!r}")
                continue
            tol = tolerances.get(unit, DEFAULT_TOLERANCE)
            diff = abs(fa - fb)
            if not (diff <= tol) or math.isnan(diff):
                problems.append(f"{rel} row {i} column {name}[{unit}]: |{a} - {b}| = {diff:.3g} > {tol:g}")
    return problems


def compare_golden(run_dir: str | Path, golden_dir: str | Path, tolerances: dict[str, float] | None = None) -> GoldenReport:
    """Check every file listed in the golden manifest; keeps going past failures."""
    run_dir, golden_dir = Path(run_dir), Path(golden_dir)
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    report = GoldenReport()
    gold_manifest = golden_dir / "manifest.json"
    if not gold_manifest.exists():
        report.missing.append(str(gold_manifest))
        return report
    if not (run_dir / "manifest.json").exists():
        report.missing.append(str(run_dir / "manifest.json"))
    else:
        listed = {o["path"] for o in RunManifest.load(run_dir / "manifest.json").outputs}
        for o in RunManifest.load(gold_manifest).outputs:
            if o["path"] not in listed:
                report.mismatches.append(f"{o['path']}: not listed in run manifest")

    for entry in RunManifest.load(gold_manifest).outputs:
        rel = entry["path"]
        gold, run = golden_dir / rel, run_dir / rel
        if not gold.exists():
            report.missing.append(f"golden/{rel}")
            continue
        if not run.exists():
            report.missing.append(rel)
            continue
        report.compared.append(rel)
        if rel.endswith(".csv"):
            report.mismatches.extend(_compare_csv(rel, run, gold, tol))
        elif run.read_bytes() != gold.read_bytes():
            report.mismatches.append(f"{rel}: bytes differ")
    return report
