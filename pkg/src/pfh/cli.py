"""Command-line entry point.

    pfh <mode> [--config file.json] [--preset NAME] [--set key=value ...] [--out dir]

On failure a single JSON object ``{"error": ..., "message": ...}`` is
printed to stderr and the exit status is nonzero (2 for configuration
errors, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import MODES, PRESETS, ConfigError, apply_override, parse_config, preset
from .dynamics import FlowDivergedError
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pfh", description="Periodic phase-field experiments.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", type=Path, help="JSON configuration file")
    ap.add_argument("--preset", choices=PRESETS, help="start from a reference flow configuration")
    ap.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path override applied after the file is read (repeatable)",
    )
    ap.add_argument("--out", type=Path, default=Path("pfh-out"), help="output directory (default: pfh-out)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _document(args) -> tuple[dict, Path | None]:
    if args.config is not None and args.preset is not None:
        raise ConfigError("--config and --preset are mutually exclusive")
    base_dir = None
    if args.config is not None:
        try:
            doc = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"--config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        base_dir = args.config.resolve().parent
    elif args.preset is not None:
        if args.mode != "flow":
            raise ConfigError("--preset only applies to mode flow")
        doc = preset(args.preset)
    else:
        doc = {}
    if doc.get("mode", args.mode) != args.mode:
        raise ConfigError(f"mode: config file says {doc['mode']!r} but the command line says {args.mode!r}")
    doc["mode"] = args.mode
    for item in args.overrides:
        doc = apply_override(doc, item)
    return doc, base_dir


def _fail(kind: str, message: str, code: int, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        doc, base_dir = _document(args)
        cfg = parse_config(doc, base_dir=base_dir)
        manifest = run(cfg, args.out)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), 2)
    except FlowDivergedError as exc:
        return _fail("FlowDivergedError", str(exc), 1, step=exc.step)
    except (ValueError, OSError, FloatingPointError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    print(json.dumps({"manifest": str(args.out / "manifest.json"), "config_hash": manifest.config_hash}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
