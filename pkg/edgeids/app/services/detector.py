"""
Streaming detection: classify flow records with the three heads and emit one
NDJSON alert per malicious record.

The attack head decides whether a record raises an alert. For those records the
category and subcategory heads name the attack (their Normal class is excluded);
benign records are reported as Normal.
"""
import io
import logging
from contextlib import ExitStack
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, TextIO, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from edgeids.app.core.clock import utc_iso
from edgeids.app.core.errors import CompatibilityError, DataError
from edgeids.app.data.dataset import MAX_REPORTED_ROWS, NormStats, frame_to_features, normalize_features
from edgeids.app.data.labels import CATEGORY_NAMES, SUBCATEGORY_NAMES, Target
from edgeids.app.data.schema import FeatureSchema
from edgeids.app.engines.config import EngineConfig
from edgeids.app.engines.dataflow import run_engine
from edgeids.app.models.base import ModelKind
from edgeids.app.models.serialization import Model
from edgeids.app.models.zoo import model_id, predict_batch

logger = logging.getLogger("edgeids")

DEFAULT_CHUNK_ROWS = 4096
# stdin may be a live pipe; every record is classified as soon as it arrives
STREAM_CHUNK_ROWS = 1


class Alert(BaseModel):
    sequence: int = Field(ge=0)
    timestamp: str
    attack: bool
    category: str
    subcategory: str
    confidence: float = Field(ge=0.0, le=1.0)
    model_id: str


class DetectSummary(BaseModel):
    records_read: int = 0
    records_classified: int = 0
    malformed: int = 0
    malformed_rows: List[int] = Field(default_factory=list)
    alerts: int = 0
    per_subcategory: Dict[str, int] = Field(
        default_factory=lambda: {name: 0 for name in SUBCATEGORY_NAMES}
    )
    model_ids: Dict[str, str] = Field(default_factory=dict)


class HeadOutputs(BaseModel):
    """Per-record decisions of one classified chunk."""
    attack: List[bool]
    category: List[int]
    subcategory: List[int]
    confidence: List[float]


def _enriched(scores: np.ndarray, attack: np.ndarray) -> np.ndarray:
    """Argmax over the non-Normal classes for attack rows, Normal (0) otherwise."""
    if scores.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.where(attack, np.argmax(scores[:, 1:], axis=1) + 1, 0)


class DetectorService:
    def __init__(
        self,
        heads: Mapping[Target, Model],
        schema: FeatureSchema,
        norm_stats: NormStats,
        engine: Optional[EngineConfig] = None,
        log_benign: bool = False,
        chunk_rows: int = DEFAULT_CHUNK_ROWS,
    ):
        missing = [t.value for t in Target if t not in heads]
        if missing:
            raise CompatibilityError(f"Detection needs a model for every head; missing {missing}")
        for target, model in heads.items():
            if model.target is not target:
                raise CompatibilityError(
                    f"Model for the {target.value} head was trained for {model.target.value}"
                )
            if model.num_features != schema.feature_count or len(norm_stats) != schema.feature_count:
                raise CompatibilityError(
                    f"{target.value} model expects {model.num_features} features; schema has "
                    f"{schema.feature_count}, normalization covers {len(norm_stats)}"
                )
        if chunk_rows < 1:
            raise DataError("chunk_rows must be positive")

        self.heads = dict(heads)
        self.schema = schema
        self.norm_stats = norm_stats
        self.engine = engine or EngineConfig.sequential()
        self.log_benign = log_benign
        self.chunk_rows = chunk_rows
        self.model_ids = {target.value: model_id(model) for target, model in self.heads.items()}

    def _classify(self, model: Model, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if model.kind is ModelKind.MLP:
            predictions = run_engine(model, features, self.engine)
            return predictions.class_ids, predictions.scores
        return predict_batch(model, features)

    def classify(self, features: np.ndarray) -> HeadOutputs:
        """Decisions for a normalized feature matrix."""
        attack_ids, attack_scores = self._classify(self.heads[Target.ATTACK], features)
        attack = attack_ids == 1
        _, category_scores = self._classify(self.heads[Target.CATEGORY], features)
        _, subcategory_scores = self._classify(self.heads[Target.SUBCATEGORY], features)
        return HeadOutputs(
            attack=attack.tolist(),
            category=_enriched(category_scores, attack).tolist(),
            subcategory=_enriched(subcategory_scores, attack).tolist(),
            confidence=attack_scores.max(axis=1).astype(np.float64).tolist() if len(attack) else [],
        )

    @staticmethod
    def _parse(header: str, lines: List[str]) -> pd.DataFrame:
        frame = pd.read_csv(
            io.StringIO(header + "".join(lines)),
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
        frame.columns = [str(c).strip() for c in frame.columns]
        return frame

    def _chunks(self, source: Union[Path, TextIO]) -> Iterator[pd.DataFrame]:
        """
        Frames of at most `chunk_rows` records. Lines are pulled one at a time so a
        live pipe yields a chunk as soon as it has `chunk_rows` complete records.
        """
        with ExitStack() as stack:
            if isinstance(source, (str, Path)):
                source = stack.enter_context(open(source, encoding="utf-8", newline=""))
            lines = iter(source.readline, "")
            header = next((line for line in lines if line.strip()), None)
            if header is None:
                raise DataError("Input stream is empty (no CSV header)")
            if not header.endswith("\n"):
                header += "\n"

            batch: List[str] = []
            for line in lines:
                batch.append(line)
                if len(batch) == self.chunk_rows:
                    yield self._parse(header, batch)
                    batch = []
            if batch:
                yield self._parse(header, batch)

    def detect_stream(self, source: Union[Path, TextIO], sink: TextIO) -> DetectSummary:
        """
        Classify every record of a CSV stream in input order and write alerts to
        `sink`. Records whose feature cells do not parse are counted and skipped.
        """
        summary = DetectSummary(model_ids=dict(self.model_ids))
        attack_id = self.model_ids[Target.ATTACK.value]

        for chunk in self._chunks(source):
            offset = summary.records_read
            values, ok = frame_to_features(chunk, self.schema)
            summary.records_read += len(chunk)

            bad = np.flatnonzero(~ok)
            if bad.size:
                summary.malformed += int(bad.size)
                room = MAX_REPORTED_ROWS - len(summary.malformed_rows)
                summary.malformed_rows.extend(int(offset + i) for i in bad[:max(room, 0)])

            sequences = np.flatnonzero(ok) + offset
            if sequences.size == 0:
                continue
            outputs = self.classify(normalize_features(values[ok], self.norm_stats))
            summary.records_classified += int(sequences.size)

            for i, sequence in enumerate(sequences.tolist()):
                subcategory = SUBCATEGORY_NAMES[outputs.subcategory[i]]
                summary.per_subcategory[subcategory] += 1
                if not (outputs.attack[i] or self.log_benign):
                    continue
                alert = Alert(
                    sequence=sequence,
                    timestamp=utc_iso(),
                    attack=outputs.attack[i],
                    category=CATEGORY_NAMES[outputs.category[i]],
                    subcategory=subcategory,
                    confidence=outputs.confidence[i],
                    model_id=attack_id,
                )
                sink.write(alert.model_dump_json() + "\n")
                summary.alerts += int(outputs.attack[i])
            sink.flush()

        if summary.malformed:
            logger.warning(
                f"Skipped {summary.malformed} malformed records (first rows: {summary.malformed_rows})"
            )
        logger.info(
            f"Classified {summary.records_classified} of {summary.records_read} records, "
            f"{summary.alerts} alerts"
        )
        return summary
