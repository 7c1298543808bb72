"""
Tests for the container format handling.
"""

import struct

import pytest

from costbisim.exceptions import (
    InvalidFormatError,
    UnsupportedAlgorithmError,
    UnsupportedVersionError,
)
from costbisim.format import (
    ALGORITHM_IDS,
    ALGORITHMS,
    CPA_MAGIC,
    HEADER_FMT,
    HEADER_SIZE,
    KIND_MODEL,
    KIND_RELATION,
    PROTOCOL_VERSION,
    decode_header,
    encode_header,
    is_cpa_container,
    validate_algorithm,
)


def test_header_constants():
    """Test the header format constants."""
    assert CPA_MAGIC == b"CPAZ"
    assert PROTOCOL_VERSION == 1
    assert HEADER_FMT == "!4sBBBB"
    assert HEADER_SIZE == struct.calcsize(HEADER_FMT) == 8


def test_algorithm_mappings():
    """Test the algorithm ID mappings."""
    assert ALGORITHMS[0] == "none"
    assert ALGORITHMS[1] == "zstd"
    assert ALGORITHM_IDS["lz4"] == 6

    for alg_id, alg_name in ALGORITHMS.items():
        assert ALGORITHM_IDS[alg_name] == alg_id


def test_is_cpa_container():
    """Test container detection."""
    valid = CPA_MAGIC + b"\x01\x01\x03\x00" + b"payload"

    assert is_cpa_container(valid)
    assert not is_cpa_container(b"INVL\x01\x01\x03\x00payload")
    assert not is_cpa_container(b"automaton A\n")
    assert not is_cpa_container(CPA_MAGIC)  # Too short
    assert not is_cpa_container(b"")


def test_validate_algorithm():
    """Test the validate_algorithm function."""
    for algorithm in ALGORITHM_IDS:
        validate_algorithm(algorithm)

    with pytest.raises(UnsupportedAlgorithmError) as excinfo:
        validate_algorithm("snappy")
    assert "'snappy'" in str(excinfo.value)
    assert excinfo.value.algorithm == "snappy"


def test_encode_header():
    """Test the encode_header function."""
    model_header = encode_header("zstd", 3)
    relation_header = encode_header("brotli", 5, KIND_RELATION)

    magic, version, alg_id, level, kind = struct.unpack(HEADER_FMT, model_header)
    assert magic == CPA_MAGIC
    assert version == PROTOCOL_VERSION
    assert alg_id == ALGORITHM_IDS["zstd"]
    assert level == 3
    assert kind == KIND_MODEL

    *_, kind = struct.unpack(HEADER_FMT, relation_header)
    assert kind == KIND_RELATION

    with pytest.raises(UnsupportedAlgorithmError):
        encode_header("invalid_algorithm", 1)
    with pytest.raises(ValueError):
        encode_header("zstd", 1, kind=7)


def test_decode_header():
    """Test the decode_header function."""
    header = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, 2, 5, KIND_RELATION)
    assert decode_header(header) == (PROTOCOL_VERSION, "brotli", 5, KIND_RELATION)

    with pytest.raises(InvalidFormatError):
        decode_header(struct.pack(HEADER_FMT, b"INVL", PROTOCOL_VERSION, 1, 3, 0))
    with pytest.raises(InvalidFormatError):
        decode_header(CPA_MAGIC + b"\x01")

    future = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION + 10, 1, 3, 0)
    with pytest.raises(UnsupportedVersionError) as excinfo:
        decode_header(future)
    assert excinfo.value.version == PROTOCOL_VERSION + 10

    unknown_alg = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, 99, 3, 0)
    with pytest.raises(UnsupportedAlgorithmError):
        decode_header(unknown_alg)

    unknown_kind = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, 1, 3, 9)
    with pytest.raises(InvalidFormatError):
        decode_header(unknown_kind)


def test_decode_header_non_strict():
    """Test that non-strict decoding warns and falls back."""
    future = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION + 10, 1, 3, 0)
    with pytest.warns(RuntimeWarning):
        version, _, _, _ = decode_header(future, strict=False)
    assert version == PROTOCOL_VERSION + 10

    unknown_alg = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, 99, 3, 0)
    with pytest.warns(RuntimeWarning):
        _, algorithm, _, _ = decode_header(unknown_alg, strict=False)
    assert algorithm == "zstd"

    unknown_kind = struct.pack(HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, 1, 3, 9)
    with pytest.warns(RuntimeWarning):
        *_, kind = decode_header(unknown_kind, strict=False)
    assert kind == KIND_MODEL
