"""``lab`` command line entry point.

    lab run <config.json> [--out DIR] [--workers N] [--no-cache]
    lab plot <result.json> --out FILE.svg
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import ConfigError, ZetaLabError
from .config import load_config
from .plot import render
from .runner import run


def _error(exc: Exception, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        doc["line"] = exc.line
    print(json.dumps(doc, sort_keys=True))
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lab", description="zeta self-approximation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--no-cache", action="store_true")

    p_plot = sub.add_parser("plot", help="render a result document as SVG")
    p_plot.add_argument("result")
    p_plot.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            if args.workers is not None and args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg = load_config(args.config)
            out = run(cfg, out_dir=args.out, workers=args.workers, use_cache=not args.no_cache)
            print(json.dumps({"status": "ok", "out": str(out)}, sort_keys=True))
        else:
            out = render(args.result, args.out)
            print(json.dumps({"status": "ok", "out": str(out)}, sort_keys=True))
    except ConfigError as exc:
        return _error(exc, 2)
    except OSError as exc:
        return _error(exc, 2)
    except ZetaLabError as exc:
        return _error(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
