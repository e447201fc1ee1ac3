#!/usr/bin/env python3
"""
Green Modulation Energy Toolkit
===============================
Computes, optimizes and validates the per-frame energy of NC-MFSK, MQAM,
differential OQPSK and OOK for duty-cycled sensor links over Rayleigh or
Rician fading, and writes the results as CSV.

Usage:
    python main.py sweep --axis m --d 10 --eta 3.5   # Energy vs constellation size
    python main.py tables III                        # Optimum MQAM size grid
    python main.py validate-ser --seed 7             # Monte Carlo bound check
    python main.py compare-ook --eta 6               # Energy per bit, OOK vs NC-MFSK
    python main.py optimize --d 40 --eta 3           # Ranked schemes at one point
    python main.py --emit-defaults > scenario.json   # Default scenario file

Exit codes: 0 success, 1 configuration error, 2 validation failure,
3 numeric non-convergence.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Ensure imports work regardless of where the script is invoked from
PROJECT_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(PROJECT_DIR))

from dotenv import load_dotenv

from src.config import ConfigError, ScenarioConfig, load_config
from src.exporter import ResultExporter
from src.oracle import ConvergenceError
from src.reports import (
    PER_BIT_COLUMNS,
    RANKING_COLUMNS,
    SWEEP_COLUMNS,
    TABLE_III_COLUMNS,
    TABLE_IV_COLUMNS,
    TABLE_V_COLUMNS,
    VALIDATION_COLUMNS,
    ReportBuilder,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3


def setup_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%H:%M:%S",
    )


def float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    """Load .env, then merge defaults, profile, environment, file and flags."""
    load_dotenv(PROJECT_DIR / ".env")

    overrides = {
        "profile": args.profile,
        "scheme": args.scheme,
        "ps": args.ps,
        "d": args.d,
        "eta": args.eta,
        "fading": args.fading,
        "k_db": args.k_db,
        "rician_normalization": args.rician_normalization,
        "coherent_circuit_scale": args.coherent_circuit_scale,
        "seed": args.seed,
        "out": args.out,
        "output_dir": args.output_dir,
        "axis": getattr(args, "axis", None),
        "d_grid": getattr(args, "d_grid", None),
        "eta_grid": getattr(args, "eta_grid", None),
        "m_grid": getattr(args, "m_grid", None),
        "k_grid_db": getattr(args, "k_grid", None),
        "gamma_grid": getattr(args, "gamma_grid", None),
        "validation_fadings": getattr(args, "fadings", None),
        "n_symbols": getattr(args, "n_symbols", None),
    }
    return load_config(args.config, overrides)


def _banner(logger: logging.Logger, title: str):
    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)


def _write(config: ScenarioConfig, command: str, rows, columns) -> str:
    exporter = ResultExporter(config.output_dir)
    csv_path = exporter.export_csv(rows, columns, config.out or None, command)
    exporter.export_config(config.to_json(), csv_path)
    return csv_path


def _finish(logger: logging.Logger, title: str, builder: ReportBuilder, csv_path: str):
    logger.info("")
    _banner(logger, title)
    for key, value in builder.stats.items():
        if value:
            logger.info(f"  {key.replace('_', ' ')}: {value}")
    logger.info("OUTPUT FILES:")
    logger.info(f"  CSV:                 {csv_path}")
    logger.info(f"  Scenario:            {Path(csv_path).with_suffix('.config.json')}")


def run_sweep(config: ScenarioConfig, args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    _banner(logger, f"ENERGY SWEEP ALONG {config.axis.upper()}")
    logger.info(f"d={config.d:g} m, eta={config.eta:g}, P_s={config.ps:g}, fading={config.fading}")

    builder = ReportBuilder(config)
    rows = builder.sweep_rows()
    csv_path = _write(config, "sweep", rows, SWEEP_COLUMNS)

    _finish(logger, "SWEEP COMPLETE", builder, csv_path)
    return EXIT_OK


def run_tables(config: ScenarioConfig, args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    which = args.which.upper()
    _banner(logger, f"TABLE {which} REPRODUCTION (profile={config.profile})")

    builder = ReportBuilder(config)
    exporter = ResultExporter(config.output_dir)
    command = f"table_{which.lower()}"

    if which == "III":
        rows, columns = builder.table_iii_rows(), TABLE_III_COLUMNS
        grid = dict(index=["d"], columns=["eta"], values="m_hat",
                    header_format=lambda eta: f"eta={eta:g}")
    elif which == "IV":
        rows, columns = builder.table_iv_rows(), TABLE_IV_COLUMNS
        grid = dict(index=["d"], columns=["eta"], values="winner",
                    header_format=lambda eta: f"eta={eta:g}")
    else:
        rows, columns = builder.table_v_rows(), TABLE_V_COLUMNS
        grid = dict(index=["d", "M"], columns=["k_db", "family"], values="e_total",
                    header_format=lambda key: f"K={key[0]:g}dB {key[1]}")

    if args.long:
        csv_path = exporter.export_csv(rows, columns, config.out or None, command)
    else:
        csv_path = exporter.export_table(rows, filepath=config.out or None,
                                         command=command, **grid)
    exporter.export_config(config.to_json(), csv_path)

    matched, cells = builder.stats["published_matches"], builder.stats["published_cells"]
    logger.info(f"Matched {matched}/{cells} published cells")
    _finish(logger, f"TABLE {which} COMPLETE", builder, csv_path)
    return EXIT_OK


def run_validate_ser(config: ScenarioConfig, args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    _banner(logger, "SER BOUND VALIDATION")
    logger.info(f"seed={config.seed}, n={config.n_symbols} symbols per point")

    builder = ReportBuilder(config)
    rows = builder.validation_rows()
    csv_path = _write(config, "validate-ser", rows, VALIDATION_COLUMNS)

    _finish(logger, "VALIDATION COMPLETE", builder, csv_path)
    failures = builder.stats["validation_failures"]
    if failures:
        logger.error(f"{failures} point(s) failed the bound check; see rows marked 'fail'")
        return EXIT_VALIDATION
    logger.info("All points within bound + 3 confidence half-widths")
    return EXIT_OK


def run_compare_ook(config: ScenarioConfig, args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    _banner(logger, "ENERGY PER BIT: OOK VS OPTIMIZED NC-MFSK")

    builder = ReportBuilder(config)
    rows = builder.per_bit_rows()
    csv_path = _write(config, "compare-ook", rows, PER_BIT_COLUMNS)

    _finish(logger, "COMPARISON COMPLETE", builder, csv_path)
    return EXIT_OK


def run_optimize(config: ScenarioConfig, args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    _banner(logger, f"SCHEME SELECTION AT d={config.d:g} m, eta={config.eta:g}")

    builder = ReportBuilder(config)
    rows = builder.ranking_rows()
    csv_path = _write(config, "optimize", rows, RANKING_COLUMNS)

    winner = builder.last_selection.winner
    logger.info(f"Winner: {winner.label} ({winner.e_total:.6g} J per frame)")
    estimate = builder.last_intersection
    if estimate.interior:
        logger.info(f"MQAM term-balance estimate: M ~ {estimate.m_root:.1f}")
    else:
        logger.info(
            f"MQAM term balance has no interior root (root {estimate.m_root:.3g}, "
            f"clipped to {estimate.m_clipped:g})"
        )

    _finish(logger, "OPTIMIZATION COMPLETE", builder, csv_path)
    return EXIT_OK


COMMANDS = {
    "sweep": run_sweep,
    "tables": run_tables,
    "validate-ser": run_validate_ser,
    "compare-ook": run_compare_ook,
    "optimize": run_optimize,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON scenario file")
    common.add_argument("--out", default=None, help="Output CSV path (default: timestamped)")
    common.add_argument("--output-dir", dest="output_dir", default=None,
                        help="Directory for timestamped outputs (default: ./output)")
    common.add_argument("--profile", default=None, choices=["nominal", "calibrated"],
                        help="Parameter profile (default: nominal)")
    common.add_argument("--scheme", default=None,
                        choices=["all", "nc-mfsk", "mqam", "oqpsk", "ook"],
                        help="Restrict sweeps to one scheme family")
    common.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    common.add_argument("--ps", type=float, default=None, help="Target symbol error rate")
    common.add_argument("--d", type=float, default=None, help="Distance in meters")
    common.add_argument("--eta", type=float, default=None, help="Path-loss exponent")
    common.add_argument("--fading", default=None, choices=["rayleigh", "rician"])
    common.add_argument("--k-db", dest="k_db", type=float, default=None,
                        help="Rician K factor in dB")
    common.add_argument("--rician-normalization", dest="rician_normalization",
                        default=None, choices=["total", "diffuse"])
    common.add_argument("--coherent-circuit-scale", dest="coherent_circuit_scale",
                        type=float, default=None,
                        help="Multiplier on MQAM/DOQPSK circuit energy")
    common.add_argument("--verbose", "-v", action="store_true",
                        help="Enable verbose/debug logging")

    parser = argparse.ArgumentParser(
        description="Energy analysis of modulation schemes for duty-cycled sensor links.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py sweep --axis d --d-grid 1,10,50,100 --eta 3
  python main.py sweep --axis beff --d-grid 1,50,100
  python main.py tables III --profile calibrated
  python main.py tables V --long --fading rician
  python main.py validate-ser --n-symbols 200000 --seed 1
  python main.py compare-ook --eta 6 --d-grid 10,50,100,200
  python main.py optimize --d 20 --eta 3 --config scenario.json
        """,
    )
    parser.add_argument("--emit-defaults", action="store_true",
                        help="Print the default scenario as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    sweep = sub.add_parser("sweep", parents=[common], help="Energy along one axis")
    sweep.add_argument("--axis", default=None, choices=["m", "d", "eta", "beff"])
    sweep.add_argument("--d-grid", dest="d_grid", type=float_list, default=None)
    sweep.add_argument("--eta-grid", dest="eta_grid", type=float_list, default=None)
    sweep.add_argument("--m-grid", dest="m_grid", type=int_list, default=None)

    tables = sub.add_parser("tables", parents=[common], help="Reproduce a published table")
    tables.add_argument("which", choices=["III", "IV", "V", "iii", "iv", "v"])
    tables.add_argument("--long", action="store_true",
                        help="Long format with published values and differences")
    tables.add_argument("--k-grid", dest="k_grid", type=float_list, default=None)

    validate = sub.add_parser("validate-ser", parents=[common],
                              help="Monte Carlo check of every SER bound")
    validate.add_argument("--n-symbols", dest="n_symbols", type=int, default=None)
    validate.add_argument("--gamma-grid", dest="gamma_grid", type=float_list, default=None)
    validate.add_argument("--fadings", type=str_list, default=None,
                          help="e.g. rayleigh,rician:1,rician:10")

    compare = sub.add_parser("compare-ook", parents=[common],
                             help="Energy per bit of OOK against optimized NC-MFSK")
    compare.add_argument("--d-grid", dest="d_grid", type=float_list, default=None)

    sub.add_parser("optimize", parents=[common], help="Rank schemes at one (d, eta)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(verbose=getattr(args, "verbose", False))

    if args.emit_defaults:
        sys.stdout.write(ScenarioConfig().to_json())
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    try:
        config = resolve_config(args)
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](config, args)
    except ConvergenceError as e:
        print(f"ERROR: numeric inversion did not converge: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
