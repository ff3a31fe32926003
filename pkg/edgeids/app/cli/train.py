from typing import Any, Dict

from edgeids.app.services.pipeline import PipelineService


def overrides(args) -> Dict[str, Any]:
    return {
        "data.csv": args.csv,
        "data.schema_file": args.schema,
        "train.kinds": args.kinds,
        "train.targets": args.targets,
    }


def handle(args, service: PipelineService) -> int:
    summary = service.train()
    for model in summary.models:
        print(f"{model.name:<18} {model.size_bytes:>9} bytes  {model.file}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train the configured model kinds for every target")
    parser.add_argument("--csv", help="Flow-record CSV (default: data.csv, else a synthetic dataset)")
    parser.add_argument("--schema", help="Schema mapping file for the CSV")
    parser.add_argument("--kinds", help="Comma list of model kinds, e.g. mlp,nb,dt,rf,svm")
    parser.add_argument("--targets", help="Comma list of targets: attack,category,subcategory")
    parser.set_defaults(handler=handle, overrides=overrides)
