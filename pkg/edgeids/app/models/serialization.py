"""
IIDS binary model format.

Layout (little-endian):
    magic "IIDS" | u16 version | u8 kind | u8 target | kind header | payload

Kind headers and payloads:
    MLP  u16 layer count, u16 x count layer sizes;
         per layer: weights (out x in, row-major) then biases, float32
    NB   u16 k, u16 d, float32 var_floor; priors (k), means (k x d), variances (k x d)
    DT   u16 k, u16 d, u32 nodes; feature i32, threshold f32, left i32, right i32,
         leaf distributions (nodes x k) f32
    RF   u16 k, u16 d, u16 trees; per tree: u32 nodes then the DT arrays
    SVM  u16 k, u16 d; weights (k x d), biases (k), float32
"""
import struct
from typing import List, Tuple, Union

import numpy as np

from edgeids.app.core.errors import (
    BadMagicError,
    ModelFormatError,
    TruncatedModelError,
    UnknownKindError,
    UnsupportedVersionError,
)
from edgeids.app.data.labels import Target
from edgeids.app.models.base import ModelKind
from edgeids.app.models.mlp import MlpModel, MlpTopology
from edgeids.app.models.naive_bayes import NaiveBayesModel
from edgeids.app.models.svm import SvmModel
from edgeids.app.models.tree import ForestModel, TreeModel

MAGIC = b"IIDS"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHBB")

Model = Union[MlpModel, NaiveBayesModel, TreeModel, ForestModel, SvmModel]

_F32 = np.dtype("<f4")
_I32 = np.dtype("<i4")


def _pack_tree(tree: TreeModel) -> List[bytes]:
    return [
        tree.feature.astype(_I32).tobytes(),
        tree.threshold.astype(_F32).tobytes(),
        tree.left.astype(_I32).tobytes(),
        tree.right.astype(_I32).tobytes(),
        tree.value.astype(_F32).tobytes(),
    ]


def serialize(model: Model) -> bytes:
    kind = model.kind
    parts = [HEADER.pack(MAGIC, FORMAT_VERSION, int(kind), model.target.wire_code)]

    if kind is ModelKind.MLP:
        sizes = model.topology.layer_sizes
        parts.append(struct.pack(f"<H{len(sizes)}H", len(sizes), *sizes))
        for w, b in zip(model.weights, model.biases):
            parts += [w.astype(_F32).tobytes(), b.astype(_F32).tobytes()]
    elif kind is ModelKind.NB:
        parts.append(struct.pack("<HHf", model.num_classes, model.num_features, model.var_floor))
        parts += [a.astype(_F32).tobytes() for a in (model.priors, model.means, model.variances)]
    elif kind is ModelKind.DT:
        parts.append(struct.pack("<HHI", model.num_classes, model.num_features, model.node_count))
        parts += _pack_tree(model)
    elif kind is ModelKind.RF:
        parts.append(struct.pack("<HHH", model.num_classes, model.num_features, len(model.trees)))
        for tree in model.trees:
            parts.append(struct.pack("<I", tree.node_count))
            parts += _pack_tree(tree)
    elif kind is ModelKind.SVM:
        parts.append(struct.pack("<HH", model.num_classes, model.num_features))
        parts += [model.weights.astype(_F32).tobytes(), model.biases.astype(_F32).tobytes()]
    else:
        raise UnknownKindError(f"Cannot serialize model kind {kind!r}")
    return b"".join(parts)


class _Reader:
    """Cursor over a model payload; every read past the end is a truncation."""

    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.offset = 0

    def take(self, size: int) -> memoryview:
        end = self.offset + size
        if end > len(self.data):
            raise TruncatedModelError(
                f"Model data truncated: needed {end} bytes, have {len(self.data)}"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        layout = struct.Struct(fmt)
        return layout.unpack(self.take(layout.size))

    def array(self, dtype: np.dtype, shape: Tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        raw = self.take(count * dtype.itemsize)
        return np.frombuffer(raw, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise ModelFormatError(f"{len(self.data) - self.offset} trailing bytes after model payload")


def _read_tree(reader: _Reader, target: Target, k: int, d: int, nodes: int) -> TreeModel:
    return TreeModel(
        target=target,
        num_features=d,
        feature=reader.array(_I32, (nodes,)),
        threshold=reader.array(_F32, (nodes,)),
        left=reader.array(_I32, (nodes,)),
        right=reader.array(_I32, (nodes,)),
        value=reader.array(_F32, (nodes, k)),
    )


def _check_classes(target: Target, k: int) -> None:
    if k != target.num_classes:
        raise ModelFormatError(f"Model declares {k} classes but target {target.value} has {target.num_classes}")


def deserialize(data: bytes) -> Model:
    reader = _Reader(data)
    if len(data) >= 4 and bytes(data[:4]) != MAGIC:
        raise BadMagicError(f"Bad magic {bytes(data[:4])!r}, expected {MAGIC!r}")
    magic, version, kind_code, target_code = reader.unpack(HEADER.format)
    if magic != MAGIC:
        raise BadMagicError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"Unsupported model format version {version}")
    try:
        kind = ModelKind(kind_code)
    except ValueError:
        raise UnknownKindError(f"Unknown model kind tag {kind_code}")
    try:
        target = Target.from_wire(target_code)
    except ValueError:
        raise ModelFormatError(f"Unknown target tag {target_code}")

    if kind is ModelKind.MLP:
        (count,) = reader.unpack("<H")
        sizes = reader.unpack(f"<{count}H")
        topology = MlpTopology(sizes)
        weights, biases = [], []
        for out, fan_in in topology.layer_shapes:
            weights.append(reader.array(_F32, (out, fan_in)))
            biases.append(reader.array(_F32, (out,)))
        model = MlpModel(topology=topology, target=target, weights=tuple(weights), biases=tuple(biases))
    elif kind is ModelKind.NB:
        k, d, var_floor = reader.unpack("<HHf")
        _check_classes(target, k)
        model = NaiveBayesModel(
            target=target,
            priors=reader.array(_F32, (k,)),
            means=reader.array(_F32, (k, d)),
            variances=reader.array(_F32, (k, d)),
            var_floor=var_floor,
        )
    elif kind is ModelKind.DT:
        k, d, nodes = reader.unpack("<HHI")
        _check_classes(target, k)
        model = _read_tree(reader, target, k, d, nodes)
    elif kind is ModelKind.RF:
        k, d, count = reader.unpack("<HHH")
        _check_classes(target, k)
        trees = []
        for _ in range(count):
            (nodes,) = reader.unpack("<I")
            trees.append(_read_tree(reader, target, k, d, nodes))
        model = ForestModel(target=target, trees=tuple(trees))
    else:
        k, d = reader.unpack("<HH")
        _check_classes(target, k)
        model = SvmModel(target=target, weights=reader.array(_F32, (k, d)), biases=reader.array(_F32, (k,)))

    reader.finish()
    return model


def model_size(model: Model) -> int:
    """Size in bytes of the serialized model."""
    return len(serialize(model))
