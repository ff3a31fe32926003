import sys
from contextlib import ExitStack
from pathlib import Path

from edgeids.app.core.errors import UsageError
from edgeids.app.data.labels import Target
from edgeids.app.engines.config import EngineConfig, EngineKind
from edgeids.app.models.base import ModelKind
from edgeids.app.models.zoo import load_model
from edgeids.app.services.detector import DEFAULT_CHUNK_ROWS, STREAM_CHUNK_ROWS, DetectorService
from edgeids.app.services.pipeline import PipelineService, write_json

SUMMARY_FILE = "detect_summary.json"


def chunk_rows(args) -> int:
    if args.chunk_rows is None:
        return STREAM_CHUNK_ROWS if args.input == "-" else DEFAULT_CHUNK_ROWS
    if args.chunk_rows < 1:
        raise UsageError(f"--chunk-rows must be positive, got {args.chunk_rows}")
    return args.chunk_rows


def build_detector(args, service: PipelineService) -> DetectorService:
    """Load every head before the stream is touched so incompatible files fail first."""
    rows = chunk_rows(args)
    try:
        kind = ModelKind.parse(args.kind)
    except ValueError as exc:
        raise UsageError(str(exc))
    suffix = service.settings.MODEL_FILE_SUFFIX
    heads = {
        target: load_model(service.models_dir / f"{kind.label}-{target.value}{suffix}")
        for target in Target
    }
    engine = EngineConfig.sequential()
    if args.engine == EngineKind.DATAFLOW.value:
        engine = EngineConfig.model_validate({**service.config.engine.model_dump(), "kind": EngineKind.DATAFLOW})
    return DetectorService(
        heads=heads,
        schema=service.load_schema(),
        norm_stats=service.load_norm_stats(),
        engine=engine,
        log_benign=args.log_benign,
        chunk_rows=rows,
    )


def handle(args, service: PipelineService) -> int:
    detector = build_detector(args, service)
    with ExitStack() as stack:
        source = sys.stdin if args.input == "-" else Path(args.input)
        if args.alerts == "-":
            sink = sys.stdout
        else:
            Path(args.alerts).parent.mkdir(parents=True, exist_ok=True)
            sink = stack.enter_context(open(args.alerts, "w", encoding="utf-8", newline="\n"))
        summary = detector.detect_stream(source, sink)
        sink.flush()
    write_json(service.run_dir / SUMMARY_FILE, summary.model_dump(mode="json"))
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("detect", help="Classify a flow-record stream and emit NDJSON alerts")
    parser.add_argument("--input", default="-", help="Flow-record CSV, '-' for stdin")
    parser.add_argument("--alerts", default="-", help="NDJSON alert file, '-' for stdout")
    parser.add_argument("--log-benign", action="store_true", help="Also emit a line for benign records")
    parser.add_argument("--engine", choices=[k.value for k in EngineKind], default=EngineKind.SEQUENTIAL.value)
    parser.add_argument("--kind", default="mlp", help="Model kind used for the three heads")
    parser.add_argument("--chunk-rows", type=int,
                        help=f"Records classified per batch (default {STREAM_CHUNK_ROWS} for stdin, {DEFAULT_CHUNK_ROWS} for files)")
    parser.set_defaults(handler=handle)
