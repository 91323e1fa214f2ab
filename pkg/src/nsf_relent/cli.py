"""Command-line front end.

Usage:
    nsf-relent audit --config cfg [--out DIR] [--override key=value ...]
    nsf-relent run   --config cfg [--out DIR] [--override key=value ...]
    nsf-relent sweep --config cfg [--out DIR] [--override key=value ...]
    nsf-relent plot  --config cfg [--out DIR] [--override key=value ...]

`run` executes whatever scenario.kind the config selects; `audit` and `sweep`
force their kind regardless of the config.  `plot` reads plot.csv,
plot.columns (comma-separated, x first), plot.logy, and plot.out from the
config.  Exit codes: 0 all checks pass, 2 at least one check failed,
1 execution error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, PlotDataError
from .plotting import plot_csv
from .scenarios import run_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsf-relent",
        description="1-D compressible flow solver with relative entropy diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("audit", "structural and thermodynamic-stability audit of the gas model"),
        ("run", "run the scenario selected by the config (twin, perturb, ...)"),
        ("sweep", "grid-refinement sweep with convergence-order table"),
        ("plot", "render an SVG line chart from a CSV artifact"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to key=value config file")
        p.add_argument("--out", default=None, help="output directory (overrides scenario.out)")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry; may be repeated",
        )
    return parser


def _run_plot(cfg, out_dir: Path | None) -> int:
    csv_path = cfg.get_str("plot.csv")
    columns = [c.strip() for c in cfg.get_str("plot.columns").split(",") if c.strip()]
    out_path = cfg.get_str("plot.out")
    if not csv_path:
        raise ConfigError("plot.csv: missing")
    if not columns:
        raise ConfigError("plot.columns: missing")
    if not out_path:
        raise ConfigError("plot.out: missing")
    target = Path(out_path)
    if out_dir is not None and not target.is_absolute():
        target = Path(out_dir) / target
    written = plot_csv(csv_path, columns, target, logy=cfg.get_bool("plot.logy"))
    print(f"wrote {written}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = list(args.override)
        if args.command == "audit":
            overrides.append("scenario.kind=audit")
        elif args.command == "sweep":
            overrides.append("scenario.kind=sweep")
        cfg = load_config(args.config, overrides)

        if args.command == "plot":
            return _run_plot(cfg, Path(args.out) if args.out else None)

        result = run_scenario(cfg, out_dir=args.out)
        for line in result.lines():
            print(line)
        print(f"artifacts in {result.out_dir}")
        return EXIT_OK if result.passed else EXIT_CHECK_FAILED
    except (ConfigError, PlotDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # solver failures carry scenario context
        print(f"error [{args.command}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
