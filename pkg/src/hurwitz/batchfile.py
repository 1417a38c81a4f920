"""Binary batch files holding per-secondary-partition contributions.

Layout (little-endian)::

    header  : magic "HWZB" | version u16 | d u16 | p u64 | batch_id u32
              | n_primaries u32 | n_records u64
    record  : r u64 | count u32 | count x (index_delta u32, residue u64)

Indices are partitions of ``d`` by reverse-lex position; within a record
they ascend and are stored as differences from the previous index (the
first one from zero).
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

MAGIC = b"HWZB"
VERSION = 1
HEADER = struct.Struct("<4sHHQIIQ")
RECORD = struct.Struct("<QI")
ENTRY = np.dtype([("delta", "<u4"), ("value", "<u8")])


class BatchFormatError(ValueError):
    pass


class HeaderMismatch(BatchFormatError):
    pass


@dataclass
class BatchHeader:
    d: int
    p: int
    batch_id: int
    n_primaries: int
    n_records: int


@dataclass
class BatchData:
    header: BatchHeader
    r: np.ndarray
    rec_off: np.ndarray
    idx: np.ndarray
    val: np.ndarray

    def __len__(self) -> int:
        return self.r.shape[0]

    def records(self):
        for t in range(len(self)):
            lo, hi = self.rec_off[t], self.rec_off[t + 1]
            yield int(self.r[t]), self.idx[lo:hi], self.val[lo:hi]


class BatchWriter:
    """Streams records to ``<path>.tmp`` and renames on ``close``."""

    def __init__(self, path: str | os.PathLike, d: int, p: int, batch_id: int, n_primaries: int):
        self.path = Path(path)
        self.tmp = self.path.with_name(self.path.name + ".tmp")
        self.header = BatchHeader(d, p, batch_id, n_primaries, 0)
        self._fh: BinaryIO = open(self.tmp, "wb")
        self._fh.write(HEADER.pack(MAGIC, VERSION, d, p, batch_id, n_primaries, 0))

    def write(self, r: int, idx: np.ndarray, val: np.ndarray) -> None:
        entries = np.empty(idx.shape[0], dtype=ENTRY)
        entries["delta"] = np.diff(idx, prepend=0)
        entries["value"] = val
        self._fh.write(RECORD.pack(r, idx.shape[0]))
        self._fh.write(entries.tobytes())
        self.header.n_records += 1

    def close(self) -> Path:
        h = self.header
        self._fh.seek(0)
        self._fh.write(HEADER.pack(MAGIC, VERSION, h.d, h.p, h.batch_id, h.n_primaries, h.n_records))
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._fh.close()
        os.replace(self.tmp, self.path)
        return self.path

    def abort(self) -> None:
        self._fh.close()
        self.tmp.unlink(missing_ok=True)


def write_records(path, d: int, p: int, batch_id: int, n_primaries: int, records: Iterable) -> Path:
    w = BatchWriter(path, d, p, batch_id, n_primaries)
    try:
        for r, idx, val in records:
            w.write(r, idx, val)
    except BaseException:
        w.abort()
        raise
    return w.close()


def read_header(buf: bytes) -> BatchHeader:
    if len(buf) < HEADER.size:
        raise BatchFormatError("truncated header")
    magic, version, d, p, batch_id, n_prim, n_rec = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BatchFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BatchFormatError(f"unsupported batch format version {version}")
    return BatchHeader(d, p, batch_id, n_prim, n_rec)


def read_batch(path, d: int | None = None, p: int | None = None) -> BatchData:
    buf = Path(path).read_bytes()
    h = read_header(buf)
    if (d is not None and h.d != d) or (p is not None and h.p != p):
        raise HeaderMismatch(f"{path}: batch is for d={h.d}, p={h.p}; run expects d={d}, p={p}")
    r = np.empty(h.n_records, dtype=np.int64)
    rec_off = np.zeros(h.n_records + 1, dtype=np.int64)
    chunks = []
    pos = HEADER.size
    for t in range(h.n_records):
        if pos + RECORD.size > len(buf):
            raise BatchFormatError(f"{path}: truncated at record {t}")
        rv, count = RECORD.unpack_from(buf, pos)
        pos += RECORD.size
        end = pos + count * ENTRY.itemsize
        if end > len(buf):
            raise BatchFormatError(f"{path}: truncated at record {t}")
        chunks.append(np.frombuffer(buf, dtype=ENTRY, count=count, offset=pos))
        pos = end
        r[t] = rv
        rec_off[t + 1] = rec_off[t] + count
    if pos != len(buf):
        raise BatchFormatError(f"{path}: {len(buf) - pos} trailing bytes")
    if chunks:
        entries = np.concatenate(chunks)
        deltas = entries["delta"].astype(np.int64)
        # undo the per-record delta encoding: cumulative sum restarted at each record
        csum = np.cumsum(deltas)
        first = np.repeat(rec_off[:-1], np.diff(rec_off))
        idx = csum - (csum[first] - deltas[first])
        val = entries["value"].astype(np.int64)
    else:
        idx = np.zeros(0, dtype=np.int64)
        val = np.zeros(0, dtype=np.int64)
    return BatchData(h, r, rec_off, idx, val)
