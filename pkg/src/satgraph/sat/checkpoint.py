"""Versioned binary checkpoint container.

Layout: ``MAGIC`` (8 bytes), header length (8-byte little-endian), a UTF-8
JSON header, then the raw little-endian array bytes in header order. The
header is serialized with sorted keys and no timestamps, so equal contents
always give equal bytes.
"""

from __future__ import annotations

import json
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError

MAGIC = b"SATCKPT1"
FORMAT_VERSION = 1
_DTYPES = {"float64": "<f8", "int64": "<i8"}


@dataclass
class Checkpoint:
    """Parameters plus everything needed to rebuild the model that owns them.

    ``kind`` names the method family (``sat``, ``gnn_regression``,
    ``vae_latent_aggre``); ``meta`` holds the selected epoch, its score and
    data dimensions.
    """

    kind: str
    config: dict
    arrays: "OrderedDict[str, np.ndarray]"
    meta: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Checkpoint):
            return NotImplemented
        return (self.kind == other.kind and self.config == other.config and self.meta == other.meta
                and list(self.arrays) == list(other.arrays)
                and all(_same_array(self.arrays[k], other.arrays[k]) for k in self.arrays))

    def to_bytes(self) -> bytes:
        specs, blobs = [], []
        for name, arr in self.arrays.items():
            arr = np.asarray(arr)
            dt = "int64" if np.issubdtype(arr.dtype, np.integer) else "float64"
            data = np.ascontiguousarray(arr, dtype=_DTYPES[dt]).tobytes()
            specs.append({"name": name, "dtype": dt, "shape": list(arr.shape), "nbytes": len(data)})
            blobs.append(data)
        header = {"format": FORMAT_VERSION, "kind": self.kind, "config": self.config,
                  "meta": self.meta, "arrays": specs}
        hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return MAGIC + struct.pack("<Q", len(hbytes)) + hbytes + b"".join(blobs)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "Checkpoint":
        if buf[:8] != MAGIC:
            raise DataError("not a checkpoint file (bad magic)")
        (hlen,) = struct.unpack("<Q", buf[8:16])
        try:
            header = json.loads(buf[16:16 + hlen].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataError(f"corrupt checkpoint header: {exc}") from exc
        if header.get("format") != FORMAT_VERSION:
            raise DataError(f"unsupported checkpoint format {header.get('format')!r}")
        arrays = OrderedDict()
        pos = 16 + hlen
        for spec in header["arrays"]:
            end = pos + spec["nbytes"]
            if end > len(buf):
                raise DataError(f"checkpoint truncated inside array {spec['name']!r}")
            arr = np.frombuffer(buf[pos:end], dtype=_DTYPES[spec["dtype"]]).reshape(spec["shape"])
            arrays[spec["name"]] = arr.astype(np.dtype(spec["dtype"]))
            pos = end
        if pos != len(buf):
            raise DataError("trailing bytes after the last checkpoint array")
        return cls(header["kind"], header["config"], arrays, header["meta"])

    def save(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def load(cls, path) -> "Checkpoint":
        path = Path(path)
        if not path.exists():
            raise DataError(f"checkpoint not found: {path}")
        return cls.from_bytes(path.read_bytes())


def _same_array(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and a.dtype == b.dtype and a.tobytes() == b.tobytes()
