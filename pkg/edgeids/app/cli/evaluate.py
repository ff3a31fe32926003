from edgeids.app.services.pipeline import PipelineService


def handle(args, service: PipelineService) -> int:
    for report in service.evaluate():
        print(
            f"{report.model_name:<18} P={report.macro.precision:.4f} R={report.macro.recall:.4f} "
            f"F1={report.macro.f1:.4f} size={report.model_size_bytes}"
        )
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate every trained model on the held-out split")
    parser.set_defaults(handler=handle)
