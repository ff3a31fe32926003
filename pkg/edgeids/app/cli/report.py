from typing import Any, Dict

from edgeids.app.core.clock import utc_iso
from edgeids.app.services.pipeline import PipelineService
from edgeids.app.services.report import ReportBundle, render_report


def overrides(args) -> Dict[str, Any]:
    return {"report.required_pps": args.required_pps}


def handle(args, service: PipelineService) -> int:
    bundle = ReportBundle.from_run_dir(
        service.run_dir,
        required_pps=service.config.report.required_pps,
        generated_at=utc_iso(),
    )
    for path in render_report(bundle).write(service.run_dir):
        print(path)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="Render the markdown report and its CSV tables")
    parser.add_argument("--required-pps", type=float,
                        help="Line rate for the platform recommendation (packets/s)")
    parser.set_defaults(handler=handle, overrides=overrides)
