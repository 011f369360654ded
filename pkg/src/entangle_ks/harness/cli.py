"""``entangle-ks <mode> --config FILE [--preset NAME] [--set key=value ...] --out DIR``."""

import argparse
import json
import sys
from pathlib import Path

from .config import MODES, PRESETS, ConfigError, ExperimentConfig, apply_overrides, preset
from .run import OutputError, run


def build_parser():
    p = argparse.ArgumentParser(
        prog="entangle-ks",
        description="Kicked coupled tops: entanglement growth against classical entropy and Lyapunov rates.",
    )
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", type=Path, help="JSON file whose keys are ExperimentConfig fields")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset (the config file and --set apply on top)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one field; VALUE is parsed as JSON when possible")
    p.add_argument("--out", type=Path, help="output directory (default: the config's output field)")
    return p


def load_config(args):
    config = preset(args.preset) if args.preset else ExperimentConfig()
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")
        config = ExperimentConfig.from_dict({**config.to_dict(), **data})
    config = apply_overrides(config, args.overrides)
    if config.mode != args.mode:
        if args.config is not None and "mode" in json.loads(args.config.read_text()):
            raise ConfigError(f"mode {args.mode!r} on the command line conflicts with {config.mode!r} in the config")
        config = apply_overrides(config, [f"mode={json.dumps(args.mode)}"])
    if args.out is not None:
        config.output = str(args.out)
    return config.validate()


def _fail(kind, message, code):
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except (ConfigError, TypeError) as exc:
        return _fail("config", str(exc), 2)
    try:
        summary = run(config)
    except OutputError as exc:
        return _fail("io", str(exc), 3)
    except (ValueError, ArithmeticError) as exc:
        return _fail("compute", f"{type(exc).__name__}: {exc}", 4)
    print(json.dumps({"mode": summary["mode"], "output": config.output, "files": summary["files"] + ["summary.json"]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
