"""Command-line entry point.

Subcommands: ``run``, ``export-iq``, ``list-presets``, ``validate``.  Exit
status is 0 on success, 2 for invalid configs and 3 for runtime failures;
errors are printed to standard error as a one-line JSON object.
"""

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from ._validation import ConfigError, ParameterError
from .config import ScenarioConfig, list_presets
from .experiments import check, numerology, run_experiment, waveform_iq
from .io import write_iq, write_table

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

_VALIDATION_ERRORS = (ConfigError, ParameterError)


def _fail(kind, exc, code):
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)
    return code


def _load(source):
    cfg = ScenarioConfig.from_source(source)
    try:
        check(cfg.data)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"invalid value in config: {exc}") from None
    return cfg


def cmd_run(args):
    cfg = _load(args.config)
    out_dir = Path(args.output_dir or cfg.data["output_dir"])
    for table in run_experiment(cfg.data):
        path = write_table(out_dir / f"{table.name}.csv", table.columns, table.rows,
                           __version__, cfg.hash)
        print(path)
    return EXIT_OK


def cmd_export_iq(args):
    cfg = _load(args.config)
    if cfg.experiment != "waveform":
        raise ConfigError(f"export-iq needs a waveform experiment, got {cfg.experiment!r}")
    path = write_iq(waveform_iq(cfg.data), args.path, numerology(cfg.data))
    print(path)
    return EXIT_OK


def cmd_list_presets(args):
    for name in list_presets():
        print(name)
    return EXIT_OK


def cmd_validate(args):
    cfg = _load(args.config)
    if args.emit:
        sys.stdout.write(cfg.to_yaml())
    else:
        print(f"ok {cfg.experiment} {cfg.hash}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="wursim", description="Wake-up receiver simulator")
    parser.add_argument("--version", action="version", version=f"wursim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a config file or preset")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir", help="override the config's output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("export-iq", help="write a waveform as float32 I/Q")
    p.add_argument("config")
    p.add_argument("path")
    p.set_defaults(func=cmd_export_iq)

    p = sub.add_parser("list-presets", help="list shipped presets")
    p.set_defaults(func=cmd_list_presets)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.add_argument("--emit", action="store_true", help="print the normalized config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        return _fail("validation", exc, EXIT_VALIDATION)
    except Exception as exc:  # noqa: BLE001 - surfaced verbatim with a runtime status
        return _fail("runtime", exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
