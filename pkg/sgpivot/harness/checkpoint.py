"""
Binary checkpoints

Layout (little endian)::

    b"SGPV" | uint32 format version | uint32 n + n bytes of UTF-8 YAML metadata |
    uint32 tensor count | per tensor: uint32 n + n bytes of UTF-8 name, uint32 rank, rank x uint64 shape,
    float64 values in row-major order

The metadata holds the grammar fingerprint, the model settings, the visual vocabularies and the schedule.
"""
import struct
from typing import Tuple

import numpy as np
import yaml

from ..exceptions import CheckpointError
from ..hallucination import VsgVocabularies
from ..objectives import ScheduleConfig
from ..scene_graph import ToyGrammar
from ..translation import SgPivotModel

MAGIC = b"SGPV"
FORMAT_VERSION = 1


def checkpoint_bytes(model: SgPivotModel, config: ScheduleConfig, fingerprint: str) -> bytes:
    metadata = {"grammar_fingerprint": fingerprint, "model": dict(model.settings),
                "vocabularies": model.vocabularies.to_dict(), "schedule": config.to_dict()}
    text = yaml.dump(metadata, default_flow_style=False, sort_keys=True, allow_unicode=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(text)), text]
    params = model.named_parameters()
    chunks.append(struct.pack("<I", len(params)))
    for name, tensor in params.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", tensor.values.ndim))
        chunks.append(struct.pack(f"<{tensor.values.ndim}Q", *tensor.values.shape))
        chunks.append(np.ascontiguousarray(tensor.values, dtype="<f8").tobytes())
    return b"".join(chunks)


def save_checkpoint(model: SgPivotModel, config: ScheduleConfig, fingerprint: str, file_name: str) -> None:
    """Writes every named parameter with the run metadata"""
    with open(file_name, "wb") as f:
        f.write(checkpoint_bytes(model, config, fingerprint))


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.position = 0

    def take(self, size: int) -> bytes:
        if self.position + size > len(self.data):
            raise CheckpointError(f"Checkpoint is truncated at byte {self.position}")
        chunk = self.data[self.position:self.position + size]
        self.position += size
        return chunk

    def uint32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def read_checkpoint(file_name: str) -> Tuple[dict, dict]:
    """Metadata and name -> array table of a checkpoint file"""
    with open(file_name, "rb") as f:
        reader = _Reader(f.read())
    if reader.take(4) != MAGIC:
        raise CheckpointError(f"{file_name} is not a checkpoint")
    version = reader.uint32()
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}")
    try:
        metadata = yaml.load(reader.take(reader.uint32()).decode("utf-8"), Loader=yaml.SafeLoader)
    except (UnicodeDecodeError, yaml.YAMLError) as err:
        raise CheckpointError(f"Checkpoint metadata is unreadable: {err}") from err
    tensors = {}
    for _ in range(reader.uint32()):
        name = reader.take(reader.uint32()).decode("utf-8")
        rank = reader.uint32()
        shape = struct.unpack(f"<{rank}Q", reader.take(8 * rank))
        count = int(np.prod(shape)) if rank else 1
        tensors[name] = np.frombuffer(reader.take(8 * count), dtype="<f8").astype(np.float64).reshape(shape)
    if reader.position != len(reader.data):
        raise CheckpointError("Checkpoint has trailing bytes")
    return metadata, tensors


def load_checkpoint(file_name: str, grammar: ToyGrammar) -> Tuple[SgPivotModel, ScheduleConfig]:
    """
    Rebuilds the model and schedule stored in a checkpoint

    Raises:
        :obj:`CheckpointError` if the file is malformed or was trained with a different grammar
    """
    metadata, tensors = read_checkpoint(file_name)
    if metadata.get("grammar_fingerprint") != grammar.fingerprint:
        raise CheckpointError("Checkpoint was trained with a different grammar")
    vocabularies = VsgVocabularies.from_dict(metadata["vocabularies"])
    model = SgPivotModel(grammar, vocabularies, **metadata["model"])
    params = model.named_parameters()
    if set(params) != set(tensors):
        missing = sorted(set(params).symmetric_difference(tensors))
        raise CheckpointError(f"Checkpoint tensors do not match the model: {missing[:5]}")
    for name, p in params.items():
        if p.values.shape != tensors[name].shape:
            raise CheckpointError(f"Tensor {name} has shape {tensors[name].shape}, expected {p.values.shape}")
        p.values[...] = tensors[name]
    return model, ScheduleConfig(**metadata["schedule"])
