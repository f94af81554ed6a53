"""Command-line interface.

    urbanmorph compute  --config run.json [--workers N]
    urbanmorph fixture  --seed 7 --out town/ [--preset default|dense]
    urbanmorph validate --config run.json

Exit code 0 on success; nonzero with a stage-named diagnostic otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import EngineError
from .fixture import PRESETS, make_fixture_town
from .pipeline import RunConfig, run


def _cmd_compute(args) -> int:
    config = RunConfig.from_file(args.config)
    report = run(config, workers=args.workers)
    for res, entry in report["resolutions"].items():
        means = entry["class_means"]
        line = ", ".join(f"{k.removesuffix('_RATIO').lower()}={v:.3f}"
                         for k, v in means.items())
        print(f"{res}: {entry['cells']} cells | {line}")
    print(f"done in {report['total_seconds']} s "
          f"({report['workers']} worker{'s' if report['workers'] != 1 else ''})")
    return 0


def _cmd_fixture(args) -> int:
    spec = PRESETS[args.preset]
    truth = make_fixture_town(args.seed, args.out, spec)
    print(f"fixture town written to {args.out} "
          f"({len(truth.get('residential_blocks', []))} residential blocks)")
    return 0


def _cmd_validate(args) -> int:
    config = RunConfig.from_file(args.config)
    problems = config.validate()
    if problems:
        for p in problems:
            print(f"validate: {p}", file=sys.stderr)
        return 1
    summary = {"aoi": config.aoi, "resolutions": config.resolutions,
               "layers": list(config.layers), "dem": bool(config.dem),
               "workers": config.workers}
    print(json.dumps(summary, indent=1))
    print("configuration valid")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="urbanmorph",
        description="Multi-resolution land-cover and street-canyon parameter grids")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="run the full computation")
    p_compute.add_argument("--config", required=True)
    p_compute.add_argument("--workers", type=int, default=None)
    p_compute.set_defaults(func=_cmd_compute)

    p_fixture = sub.add_parser("fixture", help="generate a synthetic test town")
    p_fixture.add_argument("--seed", type=int, required=True)
    p_fixture.add_argument("--out", required=True)
    p_fixture.add_argument("--preset", choices=sorted(PRESETS), default="default")
    p_fixture.set_defaults(func=_cmd_fixture)

    p_validate = sub.add_parser("validate", help="dry-run input checks")
    p_validate.add_argument("--config", required=True)
    p_validate.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
