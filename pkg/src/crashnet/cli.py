"""``crashnet`` command line.

Exit codes: 0 success, 1 runtime failure, 2 usage error (bad flags, unknown symbol, invalid parameter).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import __version__, stages
from .config import FIELDS, load_config
from .errors import CrashnetError

log = logging.getLogger("crashnet")

# flags that need special handling; every other config key gets a generic --key-name flag
_SPECIAL = {"events", "exclude_sector"}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--exclude-sector", action="append", metavar="SECTOR",
                   help="registry sector dropped in the herding robustness run (repeatable)")
    p.add_argument("--event", action="append", metavar="LABEL=TIME", dest="event",
                   help="event marker, e.g. c=2022-05-09T12:00Z (repeatable)")
    for name, f in FIELDS.items():
        if name in _SPECIAL:
            continue
        flag = "--" + name.replace("_", "-")
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if isinstance(default, bool):
            p.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction)
        elif isinstance(default, list):
            p.add_argument(flag, dest=name, metavar="A,B,...")
        else:
            p.add_argument(flag, dest=name, metavar=name.upper())
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="crashnet", parents=[common],
                                     description="Crypto crash analytics: correlations, TMFG, herding, imbalance.")
    parser.add_argument("--version", action="version", version=f"crashnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fetch = sub.add_parser("fetch", parents=[common], help="populate the local store")
    fetch.add_argument("--synthetic", nargs="?", const="crash", default=None, choices=("crash", "calm"),
                       help="write the seeded synthetic fixture instead of downloading; "
                            "'calm' is a no-herding one-factor market (default: crash)")
    fetch.add_argument("--import-dir", default=None,
                       help="import <SYMBOL>.candles.csv / <SYMBOL>.trades.csv archives from a directory")
    for name, text in (("stats", "returns, descriptive statistics, rescaled prices"),
                       ("corr", "rolling weighted correlations"),
                       ("tmfg", "TMFG networks and eigenvector centrality"),
                       ("herd", "CSAD herding regressions"),
                       ("imbalance", "hourly buy/sell imbalance"),
                       ("report", "bundle every stage's output into one directory")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    out = {}
    for name in FIELDS:
        if name in _SPECIAL:
            continue
        if hasattr(ns, name):
            out[name] = getattr(ns, name)
    if getattr(ns, "exclude_sector", None):
        out["exclude_sector"] = [s.strip() for item in ns.exclude_sector for s in item.split(",") if s.strip()]
    if getattr(ns, "event", None):
        events = {}
        for item in ns.event:
            label, sep, when = item.partition("=")
            if not sep:
                raise argparse.ArgumentTypeError(f"--event expects LABEL=TIME, got {item!r}")
            events[label.strip()] = when.strip()
        out["events"] = events
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(getattr(ns, "config", None), _overrides(ns))
        cmd = ns.command
        if cmd == "fetch":
            for line in stages.run_fetch(cfg, ns.synthetic, ns.import_dir):
                print(line)
        elif cmd == "report":
            dest = stages.run_report(cfg)
            print(f"report written to {dest}")
        else:
            result = getattr(stages, f"run_{cmd}")(cfg)
            if isinstance(result, tuple):
                written, text = result
                sys.stdout.write(text)
            else:
                written = result
            for path in written:
                print(f"wrote {path}")
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"crashnet: error: {exc}", file=sys.stderr)
        return 2
    except CrashnetError as exc:
        print(f"crashnet: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
