"""Writer for the embedding-store file formats the consumer toolkit loads.

One JSON header line {format_version, encoding, dim, count, encoder}, then
one record per key: text records are ``<key> <v1> ... <vD>``, binary
records a little-endian u32 key length, the key bytes, and D little-endian
float32 values. Values are written as float32 either way, so both
encodings round-trip bit-exactly against the loader.
"""

from __future__ import annotations

import json
import struct
from typing import Mapping

import numpy as np

FORMAT_VERSION = "1"


def write_store(
    path: str,
    entries: Mapping[str, np.ndarray],
    dim: int,
    encoder: str,
    encoding: str = "text",
) -> None:
    if encoding not in ("text", "binary"):
        raise ValueError(f"unknown encoding {encoding!r}")
    if not entries:
        raise ValueError("refusing to write an empty store")
    header = {
        "format_version": FORMAT_VERSION,
        "encoding": encoding,
        "dim": dim,
        "count": len(entries),
        "encoder": encoder,
    }
    header_line = json.dumps(header, ensure_ascii=False) + "\n"
    if encoding == "text":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header_line)
            for key, vec in entries.items():
                values = " ".join(repr(float(x)) for x in vec.astype(np.float32))
                fh.write(f"{key} {values}\n")
    else:
        with open(path, "wb") as fh:
            fh.write(header_line.encode("utf-8"))
            for key, vec in entries.items():
                kb = key.encode("utf-8")
                fh.write(struct.pack("<I", len(kb)))
                fh.write(kb)
                fh.write(vec.astype("<f4").tobytes())
