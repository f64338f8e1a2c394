import numpy as np
import pytest

from hierzip.codec import compress, decompress_full
from hierzip.container import (
    MAGIC,
    ArchiveHeader,
    CompressedArchive,
    pack_stream_region,
    split_stream_region,
)
from hierzip.core import PARITIES
from hierzip.exceptions import CorruptArchiveError
from hierzip.synthetic import gaussians


@pytest.fixture(scope="module")
def archive():
    return compress(gaussians((20, 18, 22), seed=5), 1e-3, levels=3)


def test_header_round_trip():
    header = ArchiveHeader(
        dims=(5, 6, 7),
        dtype=np.dtype(np.float64),
        levels=3,
        eb_schedule=(0.16, 0.4, 1.0),
        value_min=-2.0,
        value_max=3.5,
        quality="linear",
        rel_mode=True,
        adaptive=True,
        eb_requested=0.2,
        base_offset=99,
        base_length=12,
        base_checksum=2**63 + 5,
    )
    back, n, off = ArchiveHeader.unpack(header.pack(14))
    assert n == 14
    assert off == len(header.pack(14))
    assert back == header
    assert back.eb_user == 1.0
    assert back.eb_for(1) == 0.16


def test_archive_round_trip(archive):
    again = CompressedArchive.from_bytes(archive.to_bytes())
    assert again.header == archive.header
    assert [(e.level, e.parity, e.offset, e.length) for e in again.directory] == [
        (e.level, e.parity, e.offset, e.length) for e in archive.directory
    ]
    assert np.array_equal(decompress_full(again), decompress_full(archive))


def test_directory_covers_every_stream(archive):
    assert archive.to_bytes()[:4] == MAGIC
    for level in (2, 3):
        assert sorted(e.parity for e in archive.streams_at(level)) == sorted(PARITIES)


def test_regions_do_not_overlap(archive):
    h = archive.header
    spans = sorted([(h.base_offset, h.base_length)] + [(e.offset, e.length) for e in archive.directory])
    for (a, la), (b, _) in zip(spans, spans[1:]):
        assert a + la <= b
    assert spans[-1][0] + spans[-1][1] == archive.nbytes


def test_bad_magic(archive):
    data = bytearray(archive.to_bytes())
    data[:4] = b"NOPE"
    with pytest.raises(CorruptArchiveError, match="magic"):
        CompressedArchive.from_bytes(bytes(data))


def test_truncated(archive):
    for cut in (3, 20, 60, archive.nbytes - 1):
        with pytest.raises(CorruptArchiveError):
            decompress_full(archive.to_bytes()[:cut])


def test_payload_corruption_is_detected(archive):
    entry = archive.entry(3, (1, 0, 1))
    data = bytearray(archive.to_bytes())
    data[entry.offset + entry.length // 2] ^= 0x10
    with pytest.raises(CorruptArchiveError, match="checksum"):
        decompress_full(bytes(data))


def test_base_corruption_is_detected(archive):
    h = archive.header
    data = bytearray(archive.to_bytes())
    data[h.base_offset + h.base_length - 1] ^= 0x01
    with pytest.raises(CorruptArchiveError, match="base"):
        decompress_full(bytes(data))


def test_every_flipped_payload_byte_is_caught(archive, rng):
    h = archive.header
    for pos in rng.integers(h.base_offset, archive.nbytes, 40):
        data = bytearray(archive.to_bytes())
        data[pos] ^= 0xFF
        with pytest.raises(CorruptArchiveError):
            decompress_full(bytes(data))


def test_overlapping_directory_rejected(archive):
    directory = list(archive.directory)
    directory[1].offset, saved = directory[0].offset, directory[1].offset
    try:
        body = archive.header.pack(len(directory)) + b"".join(e.pack() for e in directory)
        data = body + archive.to_bytes()[len(body) :]
        with pytest.raises(CorruptArchiveError, match="overlap"):
            CompressedArchive.from_bytes(data)
    finally:
        directory[1].offset = saved


def test_stream_region_split():
    idx = np.array([3, 17])
    vals = np.array([1.5, -2.25], dtype=np.float32)
    region = pack_stream_region(b"\x01\x02\x03", idx, vals, np.float32)
    bits, i2, v2 = split_stream_region(region, 2, np.float32)
    assert bits == b"\x01\x02\x03"
    assert i2.tolist() == [3, 17]
    assert v2.tolist() == [1.5, -2.25]
    with pytest.raises(CorruptArchiveError):
        split_stream_region(region, 5, np.float32)
