"""``berrytherm`` command line.

Exit codes: 0 success, 2 configuration or usage error, 3 solver or
convergence failure, 4 validation failure.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from . import thermometer as th
from .config import format_config, load_config, with_overrides
from .errors import BerryThermError, ConfigError, DomainError
from .evolution import adiabaticity_check
from .validation import FROZEN, perturbed, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _write_csv(path, header: str, rows) -> None:
    # repr gives the shortest decimal string that round-trips
    with _output(path) as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _config(args):
    cfg = load_config(args.config)
    return with_overrides(cfg, omega=args.omega, gap=args.gap, coupling=args.coupling, hz=args.hz)


def cmd_sweep(args) -> int:
    curve = th.sweep_delta(_config(args).thermometer())
    _write_csv(args.output, "T_c_K,delta_rad,sensitivity_rad_per_K", curve.rows())
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg = _config(args)
    table = th.robustness(cfg.thermometer(), cfg.epsilons, T_c=cfg.T_c)
    _write_csv(args.output, "epsilon,delta_rel_change", table)
    return EXIT_OK


def cmd_adiabaticity(args) -> int:
    cfg = _config(args)
    report = adiabaticity_check(
        cfg.physical_params(),
        cfg.evolution_temperature(),
        cycles=cfg.cycles,
        threshold=cfg.threshold,
        space=cfg.evolution_space(),
        tol=cfg.evolution_tol,
        samples_per_cycle=cfg.samples_per_cycle,
        band=cfg.band,
        tail_tolerance=cfg.tail_tolerance,
    )
    res = report.result
    _write_csv(args.output, "t_cycles,P_exc", zip(res.cycles, res.P_exc))
    print(str(report), file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    frozen = perturbed(args.inject_perturbation) if args.inject_perturbation else None
    checks = run_suite(args.level, frozen=frozen)
    for c in checks:
        print(c)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_VALIDATION


def cmd_invert(args) -> int:
    T_c = th.invert_temperature(_config(args).thermometer(), args.delta)
    print(repr(T_c))
    return EXIT_OK


def cmd_echo_config(args) -> int:
    sys.stdout.write(format_config(_config(args)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="berrytherm", description="Berry-phase thermometry runs and oracle checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_, output=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="key = value configuration file")
        if output:
            p.add_argument("-o", "--output", help="CSV destination (default: stdout)")
        p.add_argument("--omega", type=float, help="override the field frequency")
        p.add_argument("--gap", type=float, help="override the atomic gap")
        p.add_argument("--coupling", type=float, help="override the coupling")
        p.add_argument("--hz", action="store_true", help="overrides are in Hz rather than rad/s")
        p.set_defaults(func=func)
        return p

    with_config("sweep", cmd_sweep, "phase difference and sensitivity over the cold grid")
    with_config("robustness", cmd_robustness, "relative phase change under hot-source error")
    with_config("adiabaticity", cmd_adiabaticity, "excitation probability over evolution cycles")
    inv = with_config("invert", cmd_invert, "cold temperature for a measured phase difference", output=False)
    inv.add_argument("--delta", type=float, required=True, help="measured phase difference in rad")
    with_config("echo-config", cmd_echo_config, "print the parsed configuration in canonical form", output=False)

    val = sub.add_parser("validate", help="run the oracle suite")
    val.add_argument("level", nargs="?", default="quick", choices=("quick", "full"))
    val.add_argument(
        "--inject-perturbation",
        nargs="?",
        const="G_minus_half",
        choices=sorted(FROZEN),
        help="scale one frozen constant by 1.01 (mutation check)",
    )
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BerryThermError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
