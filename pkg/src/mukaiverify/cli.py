"""Command line entry point.

    mukaiverify scenario chow --genus 7
    mukaiverify scenario covering --points 14 --format jsonl --out run.jsonl

Exit status: 0 all claims pass, 1 some claim fails, 2 some claim is
inconclusive (and none fails), 3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .scenarios import SCENARIOS, ScenarioConfig, run_scenario

EXIT_USAGE = 3
log = logging.getLogger("mukaiverify")

# flag name -> ScenarioConfig field
_OPTIONS = ("genus", "prime", "seed", "points", "samples", "sweep_bound")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mukaiverify", description="Exact verification of prime Fano fourfold constructions.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("scenario", help="run a verification scenario")
    s.add_argument("name", choices=SCENARIOS)
    # defaults are None so a config file can fill them; ScenarioConfig has the real defaults
    s.add_argument("--genus", type=int, help="restrict to one genus")
    s.add_argument("--prime", type=int, help="characteristic of the finite field (default 10007)")
    s.add_argument("--seed", type=int, help="random seed (default 0)")
    s.add_argument("--points", type=int, help="covering: random cubic sections (default 14)")
    s.add_argument("--samples", type=int, help="sample points per probabilistic check (default 200)")
    s.add_argument("--sweep-bound", type=int, dest="sweep_bound",
                   help="covering: largest degree of the emptiness sweep (default 8)")
    s.add_argument("--config", help="JSON file with any of the options above; flags win")
    s.add_argument("--format", choices=("text", "jsonl"), default="text")
    s.add_argument("--out", help="write the report here instead of stdout")
    s.add_argument("--no-timings", action="store_true", help="omit per-row timings")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(_OPTIONS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def config_from_args(args) -> ScenarioConfig:
    values = load_config(args.config) if args.config else {}
    for k in _OPTIONS:
        v = getattr(args, k)
        if v is not None:
            values[k] = v
    cfg = ScenarioConfig(args.name, **values)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"mukaiverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("running %s", cfg)
    rep = run_scenario(cfg)
    timings = not args.no_timings
    text = rep.to_jsonl(timings) if args.format == "jsonl" else rep.to_text(timings)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(rep.to_text(timings).splitlines()[-1])
    else:
        sys.stdout.write(text)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
