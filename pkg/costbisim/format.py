"""
Container format definitions and header handling for costbisim.

Saved models and relations are UTF-8 text documents. When written as a
container they are prefixed with a small binary header naming the
compression algorithm and the kind of payload.
"""

import struct
import warnings
from typing import Tuple

from .exceptions import (
    InvalidFormatError,
    UnsupportedAlgorithmError,
    UnsupportedVersionError,
)

# Format constants
CPA_MAGIC = b"CPAZ"
PROTOCOL_VERSION = 1
HEADER_FMT = "!4sBBBB"  # Magic (4), Version (1), Algorithm ID (1), Level (1), Kind (1)
HEADER_SIZE = struct.calcsize(HEADER_FMT)

# Payload kinds
KIND_MODEL = 0
KIND_RELATION = 1
KINDS = {KIND_MODEL: "model", KIND_RELATION: "relation"}

# Algorithm mapping (byte ID to name)
ALGORITHMS = {
    0: "none",
    1: "zstd",
    2: "brotli",
    3: "zlib",
    4: "lzma",
    5: "bzip2",
    6: "lz4",
}

# Reverse mapping (name to byte ID)
ALGORITHM_IDS = {v: k for k, v in ALGORITHMS.items()}


def is_cpa_container(data: bytes) -> bool:
    """Check if the data starts with a container header.

    Args:
        data (bytes): The binary data to check

    Returns:
        bool: True if the data has a container header, False otherwise
    """
    return len(data) >= HEADER_SIZE and data[:4] == CPA_MAGIC


def validate_algorithm(algorithm: str) -> None:
    """Validate that the algorithm name is supported.

    Raises:
        UnsupportedAlgorithmError: If the algorithm is not supported
    """
    if algorithm not in ALGORITHM_IDS:
        raise UnsupportedAlgorithmError(algorithm=algorithm)


def encode_header(algorithm: str, level: int, kind: int = KIND_MODEL) -> bytes:
    """Create a container header.

    Args:
        algorithm (str): The compression algorithm name
        level (int): The compression level
        kind (int, optional): Payload kind, KIND_MODEL or KIND_RELATION

    Returns:
        bytes: The encoded header

    Raises:
        UnsupportedAlgorithmError: If the algorithm is not supported
        ValueError: If the payload kind is unknown
    """
    validate_algorithm(algorithm)
    if kind not in KINDS:
        raise ValueError(f"Unknown payload kind: {kind}")

    return struct.pack(
        HEADER_FMT, CPA_MAGIC, PROTOCOL_VERSION, ALGORITHM_IDS[algorithm], level, kind
    )


def decode_header(data: bytes, strict: bool = True) -> Tuple[int, str, int, int]:
    """Extract version, algorithm, level and payload kind from a container header.

    Args:
        data (bytes): The binary data, starting with the header
        strict (bool, optional): If True, raises for unrecognized algorithms,
            kinds or unsupported versions. Defaults to True.

    Returns:
        tuple: (version, algorithm_name, level, kind)

    Raises:
        InvalidFormatError: If the magic bytes are wrong or the kind is unknown
        UnsupportedAlgorithmError: If strict=True and the algorithm ID is not recognized
        UnsupportedVersionError: If strict=True and the version is too new
    """
    if not data.startswith(CPA_MAGIC):
        raise InvalidFormatError(
            f"Invalid container header: expected magic bytes {CPA_MAGIC!r}, "
            f"got {data[:4]!r}"
        )
    if len(data) < HEADER_SIZE:
        raise InvalidFormatError(
            f"Truncated container header: {len(data)} of {HEADER_SIZE} bytes"
        )

    _, version, alg_id, level, kind = struct.unpack(HEADER_FMT, data[:HEADER_SIZE])

    if version > PROTOCOL_VERSION:
        if strict:
            raise UnsupportedVersionError(
                version=version, max_supported=PROTOCOL_VERSION
            )
        warnings.warn(
            f"Container format version {version} is newer than {PROTOCOL_VERSION}. "
            f"Attempting to read anyway.",
            RuntimeWarning,
        )

    algorithm = ALGORITHMS.get(alg_id)
    if algorithm is None:
        known_ids = ", ".join(f"{k}={v}" for k, v in sorted(ALGORITHMS.items()))
        if strict:
            raise UnsupportedAlgorithmError(
                f"Unrecognized compression algorithm ID: {alg_id}. "
                f"Known algorithm IDs: {known_ids}."
            )
        warnings.warn(
            f"Unrecognized algorithm ID: {alg_id}. Known IDs: {known_ids}. "
            f"Falling back to zstd.",
            RuntimeWarning,
        )
        algorithm = "zstd"

    if kind not in KINDS:
        if strict:
            raise InvalidFormatError(f"Unknown payload kind: {kind}")
        warnings.warn(
            f"Unknown payload kind {kind}, treating as a model.", RuntimeWarning
        )
        kind = KIND_MODEL

    return version, algorithm, level, kind
