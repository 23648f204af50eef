"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 engine error, 4 calibration failure,
5 golden mismatch.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import MarkerTrack, SegmentTrack, fin_angle_series, summarize_swim, velocity_series
from .config import default_config, parse_config
from .core import CalibrationError, ConfigError, EngineError, ScenarioConfig, ScenarioKind, time_average
from .export import line_plot, read_columns, summary_row, write_csv, write_json
from .golden import compare_golden
from .runner import MEASURED_TARGETS, calibrate, run_scenario, run_swim_pair

EXIT_OK, EXIT_CONFIG, EXIT_ENGINE, EXIT_CALIBRATION, EXIT_GOLDEN = 0, 2, 3, 4, 5

log = logging.getLogger("greema_sim")

KINDS = {
    "swim": (ScenarioKind.SWIM_WITH_MATERIAL, ScenarioKind.SWIM_WITHOUT_MATERIAL),
    "soil": (ScenarioKind.SOIL_UPTAKE,),
    "stiffness": (ScenarioKind.STIFFNESS_SWEEP,),
}


def _load(args, command: str) -> ScenarioConfig:
    if args.config:
        cfg = parse_config(args.config)
    else:
        cfg = default_config(KINDS[command][0])
    if cfg.kind not in KINDS[command]:
        raise ConfigError(f"kind: {cfg.kind.value} cannot run under '{command}'")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args, cfg: ScenarioConfig) -> Path:
    out = Path(args.out) if args.out else cfg.output_dir
    if out is None:
        raise ConfigError("output_dir: pass --out or set output_dir in the config")
    return out


def _check_golden(args, out: Path) -> int:
    if not args.golden:
        return EXIT_OK
    report = compare_golden(out, args.golden)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_GOLDEN


def cmd_run(args) -> int:
    cfg = _load(args, args.command)
    out = _out(args, cfg)
    if args.command == "swim" and args.pair:
        manifest = run_swim_pair(cfg, out)
    else:
        manifest = run_scenario(cfg, out)
    print(f"wrote {len(manifest.outputs)} files to {out}")
    return _check_golden(args, out)


def cmd_calibrate(args) -> int:
    if args.targets:
        try:
            targets = json.loads(Path(args.targets).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"targets file not found: {args.targets}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.targets}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    else:
        targets = MEASURED_TARGETS
    result = calibrate(targets)
    out = Path(args.out) if args.out else Path("calibrated.json")
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "calibrated.json"
    write_json(out, result)
    for name, value in sorted(result["residuals"].items()):
        print(f"{name}: {value:.3g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cols = read_columns(Path(args.tracks))
    try:
        t = cols["t"][1]
        anchor = MarkerTrack(t, cols["x"][1], cols["y"][1] if "y" in cols else None)
    except KeyError as exc:
        raise ConfigError(f"{args.tracks}: missing column {exc}") from None
    v = velocity_series(anchor)
    out = Path(args.out) if args.out else Path("analysis")
    out.mkdir(parents=True, exist_ok=True)
    columns = [("t", "s", v.t), ("v", "m/s", v.values)]
    angle = None
    if {"fin_ax", "fin_ay", "fin_bx", "fin_by"} <= cols.keys():
        seg = SegmentTrack(MarkerTrack(t, cols["fin_ax"][1], cols["fin_ay"][1]),
                           MarkerTrack(t, cols["fin_bx"][1], cols["fin_by"][1]))
        angle = fin_angle_series(seg)
        columns.append(("fin_angle", "deg", angle.values))
    write_csv(out / "analysis.csv", columns)
    window = tuple(args.window) if args.window else (0.0, float(v.t[-1]))
    rows = []
    if angle is not None:
        s = summarize_swim(v, angle, window)
        rows += [summary_row("avg_speed", s["avg_speed"], "m/s"), summary_row("avg_angle", s["avg_angle"], "deg")]
    else:
        rows.append(summary_row("avg_speed", time_average(v, *window), "m/s"))
    write_json(out / "analysis_summary.json", {"rows": rows, "window": list(window)})
    line_plot(out / "velocity.svg", [("tracked", v.t, v.values)], "tracked speed", "t [s]", "v [m/s]")
    for r in rows:
        print(f"{r['name']}: {r['value']:.6g} {r['unit']}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if not args.out or not args.golden:
        raise ConfigError("compare needs --out RUN_DIR and --golden GOLDEN_DIR")
    return _check_golden(args, Path(args.out))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greema-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, golden=True):
        p.add_argument("--config", help="scenario JSON")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        if golden:
            p.add_argument("--golden", help="compare the outputs against this golden directory")

    p = sub.add_parser("swim", help="run a swim scenario")
    common(p)
    p.add_argument("--pair", action="store_true", help="run with and without material side by side")
    p.set_defaults(func=cmd_run)
    for name, text in (("soil", "run a soil uptake experiment"), ("stiffness", "run the stiffness sweep")):
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(func=cmd_run)

    p = sub.add_parser("calibrate", help="fit parameters to measured targets")
    p.add_argument("--targets", help="targets JSON (defaults to the built-in measured values)")
    p.add_argument("--out", help="parameter file or directory")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("analyze", help="speeds and fin angles from a marker-track CSV")
    p.add_argument("tracks", help="CSV with t[s], x[m] and optional y[m], fin_ax/fin_ay/fin_bx/fin_by[m]")
    p.add_argument("--out", help="output directory")
    p.add_argument("--window", type=float, nargs=2, metavar=("START", "END"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="compare a run directory against goldens")
    p.add_argument("--out", help="run directory")
    p.add_argument("--golden", help="golden directory")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except CalibrationError as exc:
        log.error("calibration failed: %s", exc)
        return EXIT_CALIBRATION
    except EngineError as exc:
        log.error("engine error: %s", exc)
        return EXIT_ENGINE
    except ValueError as exc:
        log.error("input error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
