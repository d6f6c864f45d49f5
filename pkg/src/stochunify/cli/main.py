"""``stochunify`` command-line entry point.

Each subcommand writes ``<out>/<subcommand>/<config-hash>/`` containing its
artifacts, the resolved ``config.txt`` and ``manifest.json``.

Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .. import __version__
from ..errors import ConfigError, NumericError, StochUnifyError
from ..io import write_json
from .config import SUBCOMMANDS, config_hash, dump_config, load_config, parse_overrides
from .experiments import RUNNERS

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("stochunify")


def run_subcommand(sub: str, out_root, config_path=None, overrides=None) -> tuple[int, Path | None, dict | None]:
    """Run one experiment; returns ``(exit_code, run_dir, manifest)``."""
    try:
        cfg = load_config(sub, config_path, overrides)
    except ConfigError as exc:
        for key, msg in exc.problems.items():
            print(f"config error [{sub}] {key}: {msg}", file=sys.stderr)
        return EXIT_CONFIG, None, None
    digest = config_hash(sub, cfg)
    run_dir = Path(out_root) / sub / digest
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.txt").write_text(dump_config(cfg))
    started = time.perf_counter()
    try:
        result = RUNNERS[sub](cfg, run_dir)
    except NumericError as exc:
        print(f"numeric error [{sub}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC, run_dir, None
    except (StochUnifyError, ValueError) as exc:
        # module errors surfaced with the config that produced them
        print(f"error [{sub}] with config {digest}: {exc}", file=sys.stderr)
        return EXIT_CONFIG, run_dir, None
    manifest = {
        "subcommand": sub,
        "config_hash": digest,
        "code_version": __version__,
        "wall_clock_seconds": time.perf_counter() - started,
        "outputs": sorted(["config.txt"] + result.files),
        "assertions": [c.to_dict() for c in result.checks],
        "passed": result.passed,
    }
    write_json(run_dir / "manifest.json", manifest)
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {sub} criterion {c.criterion} {c.name}: {c.value!r} (target {c.target})")
    return (EXIT_PASS if result.passed else EXIT_FAIL), run_dir, manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochunify", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS + ("all",):
        p = subs.add_parser(name, help="run every experiment" if name == "all" else f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", type=Path, default=Path("runs"), help="output root (default: runs)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = parse_overrides(args.overrides)
    except ConfigError as exc:
        for key, msg in exc.problems.items():
            print(f"config error {key}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if args.subcommand != "all":
        code, run_dir, _ = run_subcommand(args.subcommand, args.out, args.config, overrides)
        if run_dir is not None:
            print(f"output: {run_dir}")
        return code
    if args.config is not None or overrides:
        print("config error: 'all' runs the default configs and takes no --config/--set", file=sys.stderr)
        return EXIT_CONFIG
    codes = []
    for sub in SUBCOMMANDS:
        code, run_dir, _ = run_subcommand(sub, args.out)
        codes.append(code)
        print(f"{sub}: exit {code}, output {run_dir}")
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
