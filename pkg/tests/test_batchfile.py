import numpy as np
import pytest

from hurwitz.batchfile import (
    BatchFormatError,
    HeaderMismatch,
    read_batch,
    read_header,
    write_records,
)


def sample_records():
    return [
        (5, np.array([0, 3, 4]), np.array([1, 2, 3])),
        (7, np.array([], dtype=np.int64), np.array([], dtype=np.int64)),
        (2**40, np.array([10, 4000]), np.array([2**31 - 2, 0])),
    ]


def test_round_trip(tmp_path):
    recs = sample_records()
    path = write_records(tmp_path / "b.bin", 6, 1_000_000_007, 3, 2, recs)
    batch = read_batch(path, 6, 1_000_000_007)
    assert batch.header.batch_id == 3 and batch.header.n_primaries == 2
    assert len(batch) == 3
    for (r, idx, val), (r2, idx2, val2) in zip(recs, batch.records()):
        assert r == r2
        assert idx.tolist() == idx2.tolist()
        assert val.tolist() == val2.tolist()
    assert not (tmp_path / "b.bin.tmp").exists()


def test_empty_batch(tmp_path):
    path = write_records(tmp_path / "e.bin", 3, 7, 0, 0, [])
    batch = read_batch(path)
    assert len(batch) == 0 and batch.idx.shape == (0,)


def test_header_mismatch(tmp_path):
    path = write_records(tmp_path / "b.bin", 6, 7, 0, 1, sample_records()[:1])
    with pytest.raises(HeaderMismatch):
        read_batch(path, d=5)
    with pytest.raises(HeaderMismatch):
        read_batch(path, p=11)


def test_bad_magic_and_truncation(tmp_path):
    path = write_records(tmp_path / "b.bin", 6, 7, 0, 1, sample_records())
    raw = path.read_bytes()
    with pytest.raises(BatchFormatError):
        read_header(b"XXXX" + raw[4:])
    with pytest.raises(BatchFormatError):
        read_header(raw[:10])
    cut = tmp_path / "cut.bin"
    cut.write_bytes(raw[:-5])
    with pytest.raises(BatchFormatError):
        read_batch(cut)


def test_failed_write_leaves_nothing(tmp_path):
    def records():
        yield sample_records()[0]
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        write_records(tmp_path / "b.bin", 6, 7, 0, 1, records())
    assert list(tmp_path.iterdir()) == []
