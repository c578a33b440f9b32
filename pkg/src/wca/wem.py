"""WEM1 binary embedding store: reader, writer, eager validation.

Layout (little-endian, bit-exact):

    bytes 0-3   ASCII magic "WEM1"
    bytes 4-7   u32 dim d
    bytes 8-11  u32 count n
    byte  12    u8 normalized flag (0 or 1)
    then n records, each:
        u16 id-length L, L bytes UTF-8 id, d * f32 values

Payloads are float32 on disk and widened to float64 in memory. Loads are
eager and fully validated; every format defect reports the byte offset at
which it was detected.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, MissingEmbeddingError

MAGIC = b"WEM1"
HEADER = struct.Struct("<4sIIB")

# Norm tolerance for stores that declare themselves normalized.
NORM_TOL = 1e-3


@dataclass
class PrecomputedStore:
    """Immutable id -> embedding mapping loaded from a WEM1 file.

    Doubles as an encoder backend: both encode paths are lookups by id.
    Safe for concurrent reads after construction.
    """

    dim: int
    normalized: bool = False
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    thread_safe: bool = True

    def add(self, entry_id: str, values) -> None:
        if not entry_id:
            raise FormatError("embedding ids must be nonempty")
        if entry_id in self.entries:
            raise FormatError(f"duplicate embedding id {entry_id!r}")
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionError(
                f"embedding {entry_id!r} has dim {v.shape}, store dim is {self.dim}"
            )
        self.entries[entry_id] = v

    def lookup(self, entry_id: str) -> np.ndarray:
        try:
            return self.entries[entry_id]
        except KeyError:
            raise MissingEmbeddingError(entry_id) from None

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    # EncoderBackend protocol: ids in, stored vectors out.
    def encode_image(self, image_or_id) -> np.ndarray:
        return self._encode(image_or_id)

    def encode_text(self, text_or_id) -> np.ndarray:
        return self._encode(text_or_id)

    def _encode(self, entry_id) -> np.ndarray:
        if not isinstance(entry_id, str):
            raise MissingEmbeddingError(str(entry_id))
        return self.lookup(entry_id)

    def merged_with(self, other: "PrecomputedStore") -> "PrecomputedStore":
        """Union of two stores; duplicate ids and dim mismatches are errors."""
        if other.dim != self.dim:
            raise DimensionError(
                f"cannot merge stores of dim {self.dim} and {other.dim}"
            )
        out = PrecomputedStore(self.dim, self.normalized and other.normalized)
        for store in (self, other):
            for entry_id, v in store.entries.items():
                out.add(entry_id, v)
        return out


def write_embedding_file(store: PrecomputedStore, path) -> None:
    """Serialize a store; payload is cast to float32."""
    path = Path(path)
    if store.dim < 1:
        raise FormatError("store dim must be >= 1")
    blob = bytearray()
    blob += HEADER.pack(MAGIC, store.dim, len(store.entries), 1 if store.normalized else 0)
    for entry_id, values in store.entries.items():
        raw_id = entry_id.encode("utf-8")
        if not raw_id:
            raise FormatError("embedding ids must be nonempty")
        if len(raw_id) > 0xFFFF:
            raise FormatError(f"id {entry_id[:32]!r}... exceeds 65535 bytes")
        payload = np.asarray(values, dtype="<f4")
        if payload.shape != (store.dim,):
            raise DimensionError(
                f"embedding {entry_id!r} has shape {payload.shape}, expected ({store.dim},)"
            )
        blob += struct.pack("<H", len(raw_id))
        blob += raw_id
        blob += payload.tobytes()
    path.write_bytes(bytes(blob))


def read_embedding_file(path) -> PrecomputedStore:
    """Load and validate a WEM1 file; inverse of :func:`write_embedding_file`."""
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise FormatError(f"file shorter than the {HEADER.size}-byte header", len(data))
    magic, dim, count, flag = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if dim < 1:
        raise FormatError("dim field must be >= 1", 4)
    if flag not in (0, 1):
        raise FormatError(f"normalized flag must be 0 or 1, got {flag}", 12)

    store = PrecomputedStore(dim=dim, normalized=bool(flag))
    offset = HEADER.size
    vec_bytes = 4 * dim
    for index in range(count):
        if offset + 2 > len(data):
            raise FormatError(f"record {index} truncated in id-length field", offset)
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if id_len == 0:
            raise FormatError(f"record {index} has an empty id", offset - 2)
        if offset + id_len > len(data):
            raise FormatError(f"record {index} truncated inside its id", offset)
        raw_id = data[offset : offset + id_len]
        try:
            entry_id = raw_id.decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"record {index} id is not valid UTF-8", offset) from None
        offset += id_len
        if offset + vec_bytes > len(data):
            raise FormatError(
                f"record {index} ({entry_id!r}) truncated inside its values", offset
            )
        values = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise FormatError(f"record {index} ({entry_id!r}) has non-finite values", offset)
        offset += vec_bytes
        if entry_id in store.entries:
            raise FormatError(f"duplicate id {entry_id!r}", offset - vec_bytes - id_len - 2)
        store.entries[entry_id] = values

    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after last record", offset)

    if store.normalized:
        for entry_id, v in store.entries.items():
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > NORM_TOL:
                raise FormatError(
                    f"store is flagged normalized but {entry_id!r} has norm {norm:.6f}"
                )
    return store


def read_embedding_files(paths) -> PrecomputedStore:
    """Load one or more WEM1 files into a single store."""
    stores = [read_embedding_file(p) for p in paths]
    merged = stores[0]
    for extra in stores[1:]:
        merged = merged.merged_with(extra)
    return merged
