import argparse
import os
import sys

import pandas as pd

# Add the project root to the python path to allow importing edgeids modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from edgeids.app.core.config import get_settings
from edgeids.app.data.labels import SUBCATEGORY_NAMES
from edgeids.app.data.schema import Role, parse_schema_mapping


def prepare_subset(inputs, out_path, rows=None, seed=0, schema_path=None):
    """Concatenate BOT-IoT CSV parts, drop rows with unknown labels and sample per subcategory."""
    settings = get_settings()
    mapping = parse_schema_mapping(schema_path or settings.fixture(settings.DEFAULT_SCHEMA_FILE))
    label = {role: name for name, role in mapping.columns if role in (Role.LABEL_CATEGORY, Role.LABEL_SUBCATEGORY)}

    frames = []
    for path in inputs:
        print(f"Reading {path}...")
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
        frame.columns = [str(c).strip() for c in frame.columns]
        frames.append(frame)
    df = pd.concat(frames, ignore_index=True)

    keys = (df[label[Role.LABEL_CATEGORY]].str.strip().str.lower() + "/"
            + df[label[Role.LABEL_SUBCATEGORY]].str.strip().str.lower())
    df["_sub"] = keys.map(mapping.label_aliases)
    unknown = int(df["_sub"].isna().sum())
    if unknown:
        print(f"Dropping {unknown} rows with unknown labels.")
    df = df[df["_sub"].notna()]

    if rows and rows < len(df):
        # keep the subcategory mix of the full data
        df = df.groupby("_sub").sample(frac=rows / len(df), random_state=seed).sort_index()

    print("Rows per subcategory:")
    for sub_id, count in df["_sub"].value_counts().sort_index().items():
        print(f"  {SUBCATEGORY_NAMES[int(sub_id)]:<24} {count}")

    df.drop(columns="_sub").to_csv(out_path, index=False)
    print(f"Wrote {len(df)} rows to {out_path}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Prepare a BOT-IoT subset for `edgeids train --csv`")
    parser.add_argument("inputs", nargs="+", help="BOT-IoT CSV files")
    parser.add_argument("--out", required=True, help="Output CSV")
    parser.add_argument("--rows", type=int, help="Approximate number of rows to keep (stratified)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--schema", help="Schema mapping file (default: shipped BOT-IoT mapping)")
    args = parser.parse_args()
    prepare_subset(args.inputs, args.out, rows=args.rows, seed=args.seed, schema_path=args.schema)
