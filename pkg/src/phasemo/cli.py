"""Command-line experiment runner.

Subcommands: run, sweep, oracle-check, cfr.  Exit codes: 0 success,
1 configuration error, 2 oracle failure.
"""

from __future__ import annotations

import argparse
import sys

from .channel import load_cfr, load_cfr_csv, save_cfr, save_cfr_csv
from .config import load_config
from .errors import ConfigError, PhasemoError
from .runner import SWEEP_PARAMS, oracle_check, run, sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ORACLE = 2


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML scenario file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config field (repeatable)",
    )


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasemo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single Monte-Carlo run, CSV rows per repetition")
    _add_config_args(p_run)
    p_run.add_argument("--out", help="output CSV path (default stdout)")

    p_sweep = sub.add_parser("sweep", help="parameter sweep, CSV with an EE column")
    _add_config_args(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True, help="comma-separated sweep values")
    p_sweep.add_argument("--out", help="output CSV path (default stdout)")

    p_oracle = sub.add_parser("oracle-check", help="matrix model vs brute-force time-domain chain")
    _add_config_args(p_oracle)
    p_oracle.add_argument(
        "--no-precompensation",
        action="store_true",
        help="negative control: skip the interleaver delay cancellation",
    )

    p_cfr = sub.add_parser("cfr", help="inspect or convert channel files")
    cfr_sub = p_cfr.add_subparsers(dest="cfr_command", required=True)
    p_inspect = cfr_sub.add_parser("inspect", help="print header and tensor statistics")
    p_inspect.add_argument("path")
    p_convert = cfr_sub.add_parser("convert", help="convert between binary CFR and CSV")
    p_convert.add_argument("source")
    p_convert.add_argument("dest")
    p_convert.add_argument("--fc-hz", type=float, default=4.2e9, help="center frequency for CSV imports")
    p_convert.add_argument("--scs-hz", type=float, default=100e6 / 64, help="subcarrier spacing for CSV imports")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config, args.overrides)
    _write_output(run(cfg), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError("--values", str(e)) from e
    if not values:
        raise ConfigError("--values", "need at least one value")
    cfg = load_config(args.config, args.overrides)
    _write_output(sweep(cfg, args.param, values), args.out)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    overrides = list(args.overrides)
    cfg = load_config(args.config, overrides)
    if cfg.architecture != "phasemo":
        raise ConfigError("architecture", "oracle check requires architecture=phasemo")
    report = oracle_check(cfg, skip_precompensation=args.no_precompensation)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"oracle-check N={report.n_antennas} V={report.v_count} L={report.oversample}: "
        f"rel RMS error {report.rel_rms_error:.3e} (threshold {report.error_threshold:.0e}), "
        f"out-of-band residual {report.out_of_band_db:.1f} dB "
        f"(threshold {report.residual_threshold_db:.0f} dB) -> {status}"
    )
    return EXIT_OK if report.passed else EXIT_ORACLE


def _cmd_cfr(args) -> int:
    if args.cfr_command == "inspect":
        h = load_cfr(args.path)
        import numpy as np

        mag = np.abs(h.entries)
        print(f"users={h.n_users} antennas={h.n_antennas} subcarriers={h.n_subcarriers}")
        print(f"fc_hz={h.center_frequency_hz} scs_hz={h.subcarrier_spacing_hz}")
        print(f"meta={h.metadata}")
        print(f"|H|: mean={mag.mean():.6g} min={mag.min():.6g} max={mag.max():.6g}")
        return EXIT_OK
    src, dst = args.source, args.dest
    if src.endswith(".csv"):
        h = load_cfr_csv(src, args.fc_hz, args.scs_hz)
        save_cfr(h, dst)
    else:
        h = load_cfr(src)
        save_cfr_csv(h, dst)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "oracle-check": _cmd_oracle,
        "cfr": _cmd_cfr,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PhasemoError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
