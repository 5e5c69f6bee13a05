"""tdxray command line interface.

    tdxray <subcommand> --config <path> [--out <dir>] [--seed <int>]
    tdxray acceptance [--only <module>]

Subcommands: forward, slice-check, reconstruct, stability-curve, beam,
dtn, identity-check, acceptance.  TDXRAY_THREADS caps data parallelism;
outputs are byte-identical regardless of its value.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigInvalid, TdxrayError
from .harness.config import SCHEMAS, load_config
from .harness.runner import run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="tdxray", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="key-value config file (section.key = value)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        if name == "acceptance":
            p.add_argument("--only", default=None,
                           help="restrict to one module's criteria")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else {}
    except (OSError, ConfigInvalid) as exc:
        print(f"ERROR ConfigInvalid: {exc}", file=sys.stderr)
        return 2

    seed = args.seed
    if seed is None:
        seed = int(cfg.pop("seed", 0))
    else:
        cfg.pop("seed", None)

    if args.subcommand == "acceptance":
        from .harness.acceptance import run_acceptance
        only = args.only or cfg.get("acceptance.only")
        results = run_acceptance(only=only)
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
        return 1 if failed else 0

    try:
        return run(args.subcommand, cfg, args.out, seed)
    except TdxrayError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
