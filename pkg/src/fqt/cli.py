"""Command-line front end: ``fqt <mode> --config <file> [--out DIR] [--seed N] [--threads N]``."""
import argparse
import json
import sys
import warnings

from . import __version__
from .config import MODES, PRESETS, build_config, read_toml
from .errors import DomainError, FQTError
from .liouvillian import CountingField, build

EXIT_VALIDATE = 1
EXIT_ALL_FAILED = 2
EXIT_OPT_FAILED = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def make_parser():
    p = _Parser(prog="fqt", description="Floquet quantum thermal transistor: sweeps, "
                                        "CRAB optimization and validation.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help=f"TOML file or preset name ({', '.join(PRESETS)})")
    p.add_argument("--out", help="output directory (overrides [run].out)")
    p.add_argument("--seed", type=int, help="master seed for the optimizer")
    p.add_argument("--threads", type=int, help="worker processes (fallback: FQT_THREADS)")
    p.add_argument("--dump-matrix", action="store_true",
                   help="validate mode: print the 4x4 generator as JSON and exit")
    p.add_argument("--generator", choices=("full", "low_t"), default=None,
                   help="generator used by --dump-matrix")
    p.add_argument("--chi", nargs=3, type=float, metavar=("E", "B", "C"), default=(0.0, 0.0, 0.0),
                   help="counting fields for --dump-matrix")
    p.add_argument("--version", action="version", version=f"fqt {__version__}")
    return p


def _dump_matrix(config, args):
    spectrum = config.protocols[0].spectrum()
    chi = CountingField(*args.chi)
    g = build(config.params, spectrum, chi, kind=args.generator or config.generator)
    print(json.dumps(g.to_json(), indent=2))
    return 0


def _validate(config):
    from .validate import all_gating_passed, run_checks

    checks = run_checks(config.params, seed=config.seed)
    for c in checks:
        print(c.line())
    ok = all_gating_passed(checks)
    print("validation " + ("passed" if ok else "FAILED"))
    return 0 if ok else EXIT_VALIDATE


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        data = read_toml(args.config) if args.config else {}
        config = build_config(data, mode=args.mode, out=args.out, seed=args.seed,
                              threads=args.threads)
        with warnings.catch_warnings():
            # regime warnings are expected across the preset sweeps
            warnings.simplefilter("ignore")
            if config.mode == "validate":
                return _dump_matrix(config, args) if args.dump_matrix else _validate(config)
            from .runner import run_optimize, run_sweep

            if config.mode.startswith("sweep"):
                return run_sweep(config)
            return run_optimize(config)
    except DomainError as exc:
        print(f"fqt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FQTError as exc:
        print(f"fqt: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATE


def entry():
    sys.exit(main())
