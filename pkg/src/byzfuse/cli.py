"""Command-line entry point: ``byzfuse <experiment> [options]``.

Each experiment writes ``results.csv`` (one row per sweep point),
``manifest.json`` and, for the figure experiments, ``series.csv`` in
long format ``(x, series, y, ci_lo, ci_hi)``.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, config_hash, parse_config, to_mapping
from .harness import run_experiment, side_info_metrics, sweep

log = logging.getLogger("byzfuse")

EXPERIMENTS = ("table1", "table2", "fig2", "fig4", "fig6", "fig7", "custom")
TABLE_ALPHAS = (0.1, 0.5, 0.9)
FIG4_ALPHAS = (0.1, 0.9)
FIG4_ALPHA_E = (0.3, 0.5, 0.7)
FIG6_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
FIG7_GAMMA_SIDE = (0.1, 0.3, 0.5)
FIG7_BETA_SIDE = tuple(round(x, 2) for x in np.linspace(0.0, 1.0, 21))


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return "" if value is None else str(value)


def to_csv(rows: list[dict], leading=()) -> str:
    """RFC-4180 CSV text; ``leading`` columns first, the rest in first-seen order."""
    columns = list(leading)
    for row in rows:
        columns += [k for k in row if k not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _series_rows(rows, name_keys):
    out = []
    for row in rows:
        name = ",".join(f"{k}={row[k]}" for k in name_keys)
        t = 1
        while f"frac_correct_t{t}" in row:
            key = f"frac_correct_t{t}"
            out.append({"x": t, "series": name, "y": row[key], "ci_lo": row[f"{key}_ci_lo"], "ci_hi": row[f"{key}_ci_hi"]})
            t += 1
    return out


def run_table(cfg: ExperimentConfig, alpha_e=None):
    rows = []
    for alpha in TABLE_ALPHAS:
        m = run_experiment(cfg.replace(alpha=alpha, alpha_e=alpha_e))
        rows.append({"alpha": alpha, "alpha_e": alpha if alpha_e is None else alpha_e, **m.to_row()})
    return rows, None


def run_fig2(cfg):
    rows, _ = run_table(cfg)
    return rows, _series_rows(rows, ["alpha"])


def run_fig4(cfg):
    rows = []
    for alpha in FIG4_ALPHAS:
        for alpha_e in FIG4_ALPHA_E:
            m = run_experiment(cfg.replace(alpha=alpha, alpha_e=alpha_e))
            rows.append({"alpha": alpha, "alpha_e": alpha_e, **m.to_row()})
    return rows, _series_rows(rows, ["alpha", "alpha_e"])


def run_fig6(cfg):
    rows, series = [], []
    for label, alpha_e in (("known", None), ("alpha_e=0.5", 0.5)):
        for alpha in FIG6_ALPHAS:
            m = run_experiment(cfg.replace(alpha=alpha, alpha_e=alpha_e))
            rows.append({"alpha": alpha, "alpha_e": alpha if alpha_e is None else alpha_e, **m.to_row()})
            r = m.identified_ratio
            series.append({"x": alpha, "series": label, "y": r.value, "ci_lo": r.lo, "ci_hi": r.hi})
    return rows, series


def run_fig7(cfg):
    rows, series = [], []
    for gamma_side in FIG7_GAMMA_SIDE:
        for beta_side in FIG7_BETA_SIDE:
            row = side_info_metrics(cfg.replace(beta_side=beta_side, gamma_side=gamma_side)).to_row()
            rows.append(row)
            for op in ("none", "or", "and"):
                series.append({
                    "x": beta_side,
                    "series": f"{op},gamma_side={gamma_side}",
                    "y": row[f"pe_{op}"],
                    "y_mc": row[f"pe_{op}_mc"],
                    "ci_lo": row[f"pe_{op}_mc_ci_lo"],
                    "ci_hi": row[f"pe_{op}_mc_ci_hi"],
                })
    return rows, series


def run_custom(cfg):
    if cfg.sweep_axis and cfg.sweep_values:
        return sweep(cfg, cfg.sweep_axis, cfg.sweep_values), None
    return [run_experiment(cfg).to_row()], None


RUNNERS = {
    "table1": lambda cfg: run_table(cfg),
    "table2": lambda cfg: run_table(cfg, alpha_e=0.5 if cfg.alpha_e is None else cfg.alpha_e),
    "fig2": run_fig2,
    "fig4": run_fig4,
    "fig6": run_fig6,
    "fig7": run_fig7,
    "custom": run_custom,
}
LEADING = {
    "table1": ("alpha", "cv", "mr", "mrh", "proposed"),
    "table2": ("alpha", "cv", "mr", "mrh", "proposed"),
    "fig7": ("beta_side", "gamma_side", "pe_none", "pe_or", "pe_and", "best_op"),
}


def pretty(rows: list[dict], columns) -> str:
    columns = [c for c in columns if any(c in r for r in rows)]
    cells = [[c for c in columns]] + [
        [f"{r[c]:.4g}" if isinstance(r.get(c), float) else str(r.get(c, "")) for c in columns] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells)


def run(experiment: str, cfg: ExperimentConfig, out_dir: Path, show=False) -> list[Path]:
    """Run ``experiment`` and write its outputs; nothing is left behind on failure."""
    if experiment not in RUNNERS:
        raise ConfigError(f"{experiment}: unknown experiment; expected one of {EXPERIMENTS}")
    started = dt.datetime.now(dt.timezone.utc).isoformat()
    digest = config_hash(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        rows, series = RUNNERS[experiment](cfg)
        for row in rows:
            row["config_hash"] = digest
        leading = LEADING.get(experiment, (cfg.sweep_axis,) if experiment == "custom" and cfg.sweep_values else ())
        outputs = {"results.csv": to_csv(rows, leading)}
        if series is not None:
            for row in series:
                row["config_hash"] = digest
            outputs["series.csv"] = to_csv(series, ("x", "series", "y", "ci_lo", "ci_hi"))
        for name, text in outputs.items():
            path = out_dir / name
            written.append(path)
            path.write_text(text, newline="")
        manifest = {
            "experiment": experiment,
            "config_hash": digest,
            "seed": cfg.seed,
            "version": __version__,
            "started": started,
            "finished": dt.datetime.now(dt.timezone.utc).isoformat(),
            "outputs": [p.name for p in written],
            "config": to_mapping(cfg),
        }
        path = out_dir / "manifest.json"
        written.append(path)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    if show:
        print(pretty(rows, LEADING.get(experiment) or list(rows[0])[:8] if rows else []))
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="byzfuse", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", type=Path, help="YAML/JSON file of configuration keys")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--pretty", action="store_true", help="print a readable table to stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config, args.overrides, seed=args.seed, trials=args.trials)
    except (ConfigError, OSError) as exc:
        print(f"byzfuse: config error: {exc}", file=sys.stderr)
        return 2
    try:
        run(args.experiment, cfg, args.out, show=args.pretty)
    except OSError as exc:
        print(f"byzfuse: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"byzfuse: config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
