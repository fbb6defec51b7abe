"""Command-line entry point: ``sppsim <experiment> [options]``.

Exit status is 0 on success, 2 for an invalid configuration and 3 when an
output cannot be written.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as cfgmod
from .config import EXPERIMENTS, FIGURE_PRESETS, PRESETS, ConfigError
from .experiments import OUTPUT_DIR_ENV, run

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _csv_floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _csv_words(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a figure preset")
    p.add_argument("--seed", type=int, help="RNG seed (required for noisy runs)")
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./sppsim-out)")
    p.add_argument("--material")
    p.add_argument("--wavelength", type=float, help="neutron wavelength in m")
    p.add_argument("--grid-n", type=int, help="simulation grid pixels per side")
    p.add_argument("--grid-extent", type=float, help="simulation grid side length in m")
    p.add_argument("--phi0", type=_csv_floats, help="comma-separated flag phases in rad")
    p.add_argument("--formats", type=_csv_words, help="comma-separated subset of pgm,csv")
    p.add_argument("--label", help="output file prefix")
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="override any config key, e.g. --set detector.sigma_rel=0.1")
    p.add_argument("--jobs", type=int, default=1, help="evaluate series items in parallel")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sppsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    fig = sub.add_parser("figures", help="run every figure preset")
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--output-dir")
    fig.add_argument("--jobs", type=int, default=1)
    sub.add_parser("presets", help="list presets")
    return parser


_FLAG_KEYS = {"seed": "seed", "output_dir": "output_dir", "material": "material",
              "wavelength": "wavelength", "grid_n": "grid_n", "grid_extent": "grid_extent",
              "phi0": "phi0", "formats": "formats", "label": "label"}


def resolve_config(args) -> cfgmod.RunConfig:
    if args.preset:
        d = dict(PRESETS[args.preset])
        d.setdefault("label", args.preset)
    elif args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config: {args.config} is not valid JSON ({exc})"]) from None
    else:
        d = {}
    d = json.loads(json.dumps(d))
    if args.preset and args.config:
        with open(args.config, encoding="utf-8") as fh:
            d.update(json.load(fh))
    d.setdefault("experiment", args.command)
    if d["experiment"] != args.command:
        raise ConfigError([f"experiment: config is for {d['experiment']!r}, not {args.command!r}"])
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            d[key] = v
    problems = []
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            problems.append(f"--set {item}: expected KEY=VALUE")
            continue
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        cfgmod.set_dotted(d, key, value)
    if problems:
        raise ConfigError(problems)
    return cfgmod.from_dict(d)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name, d in PRESETS.items():
            print(f"{name:16s} {d['experiment']}")
        return EXIT_OK
    try:
        if args.command == "figures":
            summaries = []
            for name in FIGURE_PRESETS:
                cfg = cfgmod.preset(name)
                cfg.seed = args.seed
                cfg.output_dir = args.output_dir
                summaries.append(run(cfg, jobs=args.jobs).summary)
            print(json.dumps(summaries, indent=2, sort_keys=True))
            return EXIT_OK
        cfg = resolve_config(args)
        if args.dump_config:
            print(cfg.to_json())
            return EXIT_OK
        result = run(cfg, jobs=args.jobs)
    except ConfigError as exc:
        print(f"sppsim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"sppsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
