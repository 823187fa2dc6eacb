# app/main.py
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.models.curvature import CurvaturePackModel
from app.models.run_config import SUITE_NAMES, RunConfig
from app.runner import run
from geo_core.curvature import curvature_pack, metric_jet
from geo_core.errors import GeometryError
from geo_core.zoo import list_instances, resolve

logger = logging.getLogger("app")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geo-verify", description="Curvature identity and GQE verification runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites and write a JSON report")
    verify.add_argument("--config", type=Path, help="JSON run configuration")
    verify.add_argument("--instance", help="zoo key, e.g. sphere:4,1 or remark:2,4")
    verify.add_argument("--suite", action="append", choices=SUITE_NAMES + ("all",), help="repeatable; default all")
    verify.add_argument("--samples", type=int, default=None)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--out", type=Path, help="report path; stdout when omitted")

    sub.add_parser("list-instances", help="print the instance keys understood by --instance")

    curv = sub.add_parser("curvature", help="print the curvature snapshot at one point as JSON")
    curv.add_argument("--instance", required=True)
    curv.add_argument("--point", required=True, help='comma separated coordinates, e.g. "1,0,0,0"')
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        if args.instance is not None:
            raise GeometryError("--config and --instance are mutually exclusive")
        config = RunConfig.model_validate_json(args.config.read_text())
    else:
        if args.instance is None:
            raise GeometryError("verify needs --config or --instance")
        config = RunConfig(instance=args.instance, suites=args.suite or ["all"])
    overrides = {k: v for k, v in (("samples", args.samples), ("seed", args.seed)) if v is not None}
    if args.out is not None:
        overrides["out"] = str(args.out)
    if overrides:
        config = RunConfig.model_validate({**config.model_dump(exclude_unset=True), **overrides})
    return config


def cmd_verify(args: argparse.Namespace) -> int:
    config = load_config(args)
    report = run(config)
    text = report.model_dump_json(indent=2)
    if config.out:
        Path(config.out).write_text(text + "\n")
        logger.info("report written to %s", config.out)
    else:
        print(text)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_list_instances(args: argparse.Namespace) -> int:
    for pattern, description in list_instances():
        print(f"{pattern:<28} {description}")
    return EXIT_OK


def cmd_curvature(args: argparse.Namespace) -> int:
    instance = resolve(args.instance)
    try:
        point = [float(x) for x in args.point.split(",")]
    except ValueError:
        raise GeometryError(f"Malformed point '{args.point}'") from None
    if len(point) != instance.dim:
        raise GeometryError(f"Point has {len(point)} coordinates, instance '{instance.key}' has dimension {instance.dim}")
    pack = curvature_pack(metric_jet(instance.metric, point))
    print(CurvaturePackModel.from_pack(instance.key, pack).model_dump_json(indent=2))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "list-instances": cmd_list_instances, "curvature": cmd_curvature}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (GeometryError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
