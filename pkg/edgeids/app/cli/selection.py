from typing import Any, Dict

from edgeids.app.services.pipeline import PipelineService


def overrides(args) -> Dict[str, Any]:
    return {"select.f1_floor": args.f1_floor}


def handle(args, service: PipelineService) -> int:
    for target, result in service.select(use_fixture=args.fixture).items():
        print(f"{target.value}: ranked {', '.join(result.ranked) or '-'}; "
              f"eliminated {', '.join(result.eliminated) or '-'}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("select", help="Eliminate and rank models per target")
    parser.add_argument("--fixture", action="store_true",
                        help="Select over the published algorithm comparison instead of eval.json")
    parser.add_argument("--f1-floor", type=float, help="Macro-F1 elimination floor")
    parser.set_defaults(handler=handle, overrides=overrides)
