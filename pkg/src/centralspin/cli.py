"""Command-line entry point.

    centralspin dynamics|thermo|hmf|canonical|ergotropy [flags]
    centralspin run fig1..fig7|custom [flags]
    centralspin verify [--only 1 3 ...]

Exit codes: 0 success, 1 acceptance failure (verify only), 2 config error,
3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import PRESETS, STATE_KINDS, build_config, load_config_file
from .errors import CentralSpinError, ConfigError
from . import experiments

log = logging.getLogger("centralspin")

MODULE_COMMANDS = {
    "dynamics": experiments.run_dynamics,
    "thermo": experiments.run_thermo,
    "hmf": experiments.run_hmf,
    "canonical": experiments.run_canonical,
    "ergotropy": experiments.run_ergotropy,
}

# the module subcommands start from these presets; ergotropy defaults to a ground-state start
_MODULE_DEFAULT_STATE = {"ergotropy": "ground"}


def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("model")
    g.add_argument("--omega0", type=float, help="central spin splitting")
    g.add_argument("--omega", type=float, help="bath spin splitting")
    g.add_argument("--epsilon", type=float, help="coupling strength")
    g.add_argument("--n-spins", type=int, help="number of bath spins N")
    t = g.add_mutually_exclusive_group()
    t.add_argument("--temperature", type=float, help="bath temperature T")
    t.add_argument("--beta", type=float, help="inverse bath temperature")

    s = p.add_argument_group("initial state")
    s.add_argument("--initial-state", dest="kind", choices=STATE_KINDS)
    s.add_argument("--c0", help="excited-state amplitude (complex, e.g. 0.6 or 0.6+0.2j)")
    s.add_argument("--c1", help="ground-state amplitude")

    r = p.add_argument_group("grid")
    r.add_argument("--t-max", type=float)
    r.add_argument("--n-samples", type=int)
    r.add_argument("--beta-min", type=float)
    r.add_argument("--beta-max", type=float)
    r.add_argument("--epsilons", type=float, nargs="+", help="coupling values for multi-curve presets")
    r.add_argument("--n-spins-list", type=int, nargs="+", help="bath sizes for fig1")

    o = p.add_argument_group("run")
    o.add_argument("--config", help="TOML config file; command-line flags take precedence")
    o.add_argument("-o", "--output", help="output directory")
    o.add_argument("--workers", type=int, help="worker threads for per-node work")
    o.add_argument("--max-spins", type=int, help="largest N allowed for joint-state work")
    o.add_argument("--reduced-only", action="store_true", default=None, help="skip joint-state quantities")
    o.add_argument("--include-large", action="store_true", default=None, help="fig1: add N = 100000")


_FLAG_KEYS = (
    "omega0", "omega", "epsilon", "n_spins", "temperature", "beta", "kind", "c0", "c1", "t_max",
    "n_samples", "beta_min", "beta_max", "epsilons", "n_spins_list", "output", "workers", "max_spins",
    "reduced_only", "include_large",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="centralspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in MODULE_COMMANDS:
        p = sub.add_parser(name, help=f"{name} table for explicit model parameters")
        _add_config_flags(p)
        if name == "canonical":
            p.add_argument("--ledger", action="store_true", help="also write the canonical energy ledger")

    p = sub.add_parser("run", help="regenerate a figure preset")
    p.add_argument("preset", choices=PRESETS)
    _add_config_flags(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criteria")
    return parser


def resolve_config(args, preset: str):
    overrides = {}
    if args.config:
        overrides.update(load_config_file(args.config))
        file_preset = overrides.pop("preset", None)
        if file_preset and args.command == "run" and file_preset != preset:
            raise ConfigError(f"{args.config}: field 'preset': file says {file_preset!r} but command asks for {preset!r}")
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if "output" not in overrides:
        overrides["output"] = f"results/{preset if args.command == 'run' else args.command}"
    if args.command in _MODULE_DEFAULT_STATE and "kind" not in overrides:
        overrides["kind"] = _MODULE_DEFAULT_STATE[args.command]
    return build_config(preset, overrides)


def _verify(args) -> int:
    from .acceptance import run_all

    results = run_all(args.only)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "run":
            cfg = resolve_config(args, args.preset)
            _, meta = experiments.run(cfg)
        else:
            cfg = resolve_config(args, "custom")
            runner = MODULE_COMMANDS[args.command]
            if args.command == "canonical":
                ledger = args.ledger
                runner = lambda c: experiments.run_canonical(c, ledger=ledger)  # noqa: E731
            _, meta = experiments.run(cfg, command=args.command, runner=runner)
        print(meta)
        return 0
    except CentralSpinError as exc:
        kind = "config error" if isinstance(exc, ConfigError) else f"numerical guard ({type(exc).__name__})"
        print(f"centralspin: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
