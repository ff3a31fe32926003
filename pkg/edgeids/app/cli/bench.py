from typing import Any, Dict

from edgeids.app.services.pipeline import PipelineService


def overrides(args) -> Dict[str, Any]:
    return {
        "engine.lanes": args.lanes,
        "engine.queue_depth": args.queue_depth,
        "report.bench_rows": args.rows,
        "report.repetitions": args.repetitions,
    }


def handle(args, service: PipelineService) -> int:
    for result in service.bench():
        print(f"{result.model_name:<18} {result.engine.label:<34} {result.throughput_pps:>14,.0f} pps")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="Measure MLP throughput on the sequential and dataflow engines")
    parser.add_argument("--rows", type=int, help="Workload rows (held-out split tiled to this size)")
    parser.add_argument("--repetitions", type=int, help="Timed repetitions (median is reported)")
    parser.add_argument("--lanes", type=int, help="Dataflow lanes per stage")
    parser.add_argument("--queue-depth", type=int, help="Dataflow queue capacity in chunks")
    parser.set_defaults(handler=handle, overrides=overrides)
