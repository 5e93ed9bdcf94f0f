"""Command-line interface: ``microkerr {device,phases,run,sweep}``.

Exit codes: 0 ok, 2 configuration error, 3 physical-regime violation.
Every failure prints a single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from . import __version__
from .concentration import SourceSpec, run_batch
from .config import RunConfig, load_config
from .errors import ConfigError, IndistinguishableHypotheses, MicrokerrError, OutOfRegime
from .molecule import check_adiabatic, cross_kerr_chi, ejm_sweep
from .readout import HomodyneModel, KerrChannel, ProbeState
from .reports import (
    ALPHA_COLUMNS,
    DEVICE_SWEEP_COLUMNS,
    PHASE_COLUMNS,
    TRIAL_COLUMNS,
    X_SQ_COLUMNS,
    alpha_sweep_rows,
    device_report,
    device_sweep_rows,
    phase_rows,
    summary_lines,
    trial_rows,
    write_csv,
    x_sq_sweep_rows,
)

EXIT_OK, EXIT_CONFIG, EXIT_REGIME = 0, 2, 3
SWEEP_KEYS = ("x_sq", "ejm_ratio", "probe_alpha")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"error: {message}\n")


def _channel(cfg: RunConfig) -> KerrChannel:
    # the readout only sees |chi|; its sign mirrors every phase and leaves classification unchanged
    chi = abs(cross_kerr_chi(cfg.device()))
    return KerrChannel.from_lab_units(chi, cfg.kappa2_inv_ns, cfg.kappa1_inv_us)


@contextlib.contextmanager
def _out(path: str | None):
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _print_kv(items, precision_fixed: int = 6):
    for name, value in items:
        if isinstance(value, float):
            print(f"{name:<20s}{value:.{precision_fixed}f}")
        else:
            print(f"{name:<20s}{value}")


def cmd_device(cfg: RunConfig, args) -> int:
    p = cfg.device()
    _print_kv(device_report(p))
    adi = check_adiabatic(p)
    print(f"{'adiabatic_ok':<20s}{'yes' if adi.ok else 'no'}")
    if args.sweep:
        with _out(cfg.csv) as fh:
            write_csv(fh, DEVICE_SWEEP_COLUMNS, device_sweep_rows(p, args.points), cfg.precision)
    return EXIT_OK


def cmd_phases(cfg: RunConfig, args) -> int:
    ch = _channel(cfg)
    with _out(cfg.csv) as fh:
        write_csv(fh, PHASE_COLUMNS, phase_rows(ch, args.n_max), cfg.precision)
    if cfg.verbosity > 1:
        print(f"{'validity_ratio':<20s}{ch.validity_ratio():.6f}", file=sys.stderr)
    return EXIT_OK


def _protocol_inputs(cfg: RunConfig):
    src = SourceSpec.from_x_sq(cfg.x_sq, cfg.n_parties)
    return src, _channel(cfg), ProbeState(complex(cfg.probe_alpha)), HomodyneModel(cfg.homodyne_mode)


def cmd_run(cfg: RunConfig, args) -> int:
    src, ch, probe, model = _protocol_inputs(cfg)
    stats = run_batch(src, ch, probe, model, cfg.trials, cfg.seed,
                      workers=cfg.workers, backend=args.backend)
    if cfg.verbosity > 0:
        _print_kv(summary_lines(stats))
    if cfg.csv:
        with _out(cfg.csv) as fh:
            write_csv(fh, TRIAL_COLUMNS, trial_rows(stats), cfg.precision)
    return EXIT_OK


def _grid(args) -> np.ndarray:
    if args.values:
        try:
            return np.array([float(v) for v in args.values.split(",")])
        except ValueError:
            raise ConfigError(f"bad --values list {args.values!r}") from None
    if args.step <= 0 or args.stop < args.start:
        raise ConfigError("sweep range needs start <= stop and step > 0")
    n = int(round((args.stop - args.start) / args.step)) + 1
    return np.round(args.start + args.step * np.arange(n), 12)


def cmd_sweep(cfg: RunConfig, args) -> int:
    if args.key not in SWEEP_KEYS:
        raise ConfigError(f"unknown sweep key {args.key!r}; expected one of {', '.join(SWEEP_KEYS)}")
    grid = _grid(args)
    if args.key == "ejm_ratio":
        if np.any(grid < 0) or np.any(grid > 1):
            raise ConfigError("ejm_ratio values must lie in [0, 1]")
        cols, rows = DEVICE_SWEEP_COLUMNS, [tuple(r) for r in ejm_sweep(cfg.device(), grid)]
    elif args.key == "x_sq":
        _, ch, probe, model = _protocol_inputs(cfg)
        cols = X_SQ_COLUMNS
        rows = x_sq_sweep_rows(grid, cfg.n_parties, ch, probe, model, cfg.trials, cfg.seed,
                               workers=cfg.workers, backend=args.backend)
    else:
        if np.any(grid <= 0):
            raise ConfigError("probe_alpha values must be positive")
        src, ch, _, _ = _protocol_inputs(cfg)
        cols = ALPHA_COLUMNS
        rows = alpha_sweep_rows(grid, src, ch, cfg.trials, cfg.seed,
                                workers=cfg.workers, backend=args.backend)
    with _out(cfg.csv) as fh:
        write_csv(fh, cols, rows, cfg.precision)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: $MICROKERR_CONFIG, then built-in)")
    common.add_argument("--csv", help="write CSV output to this path")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--precision", type=int, help="significant digits in CSV (1..17)")
    common.add_argument("--workers", type=int)
    common.add_argument("--backend", choices=("numba", "numpy"),
                        help="batch kernel backend (default: $MICROKERR_BACKEND, then numba)")

    parser = _Parser(prog="microkerr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("device", parents=[common], help="molecule spectrum, chi, adiabatic checks")
    p.add_argument("--sweep", action="store_true", help="also emit the E_Jm/E_J sweep as CSV")
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_device)

    p = sub.add_parser("phases", parents=[common], help="probe phase per stored photon number")
    p.add_argument("--n-max", type=int, default=4)
    p.set_defaults(func=cmd_phases)

    p = sub.add_parser("run", parents=[common], help="Monte Carlo run of the concentration protocol")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    p.add_argument("--key", required=True, help=f"one of {', '.join(SWEEP_KEYS)}")
    p.add_argument("--start", type=float, default=0.1)
    p.add_argument("--stop", type=float, default=0.9)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--values", help="explicit comma-separated grid (overrides start/stop/step)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).override(
            seed=args.seed, trials=args.trials, csv=args.csv,
            precision=args.precision, workers=args.workers,
        )
        return args.func(cfg, args)
    except OutOfRegime as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConfigError, IndistinguishableHypotheses) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MicrokerrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
