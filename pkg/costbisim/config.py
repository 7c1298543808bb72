"""
Configuration management for costbisim.

This module holds the global settings: worker threads for independent LP
checks, the compression used for saved containers, the brute-force oracle
depth and the solver self-check switch.
"""

import os
from typing import Optional

# Default settings
DEFAULT_ALGORITHM = "zstd"
DEFAULT_LEVEL = 3
MIN_SIZE_FOR_COMPRESSION = 64  # Short documents are stored as-is
DEFAULT_ENUMERATION_DEPTH = 12
THREADS_ENV_VAR = "CPA_THREADS"


def _threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


class CostBisimConfig:
    """Configuration for costbisim.

    Attributes:
        threads (int): Worker threads for independent LP checks (0 = auto)
        algorithm (str): Compression algorithm for saved containers.
            Options: 'zstd', 'brotli', 'zlib', 'lzma', 'bzip2', 'lz4', 'none'
        level (int): Compression level (1-10, higher = more compression)
        min_size (int): Minimum document size in bytes before compression is applied
        enumeration_depth (int): Node budget of the brute-force scheduler oracle
        lp_self_check (bool): Re-substitute every LP solution before returning it
    """

    def __init__(
        self,
        threads: Optional[int] = None,
        algorithm: str = DEFAULT_ALGORITHM,
        level: int = DEFAULT_LEVEL,
        min_size: int = MIN_SIZE_FOR_COMPRESSION,
        enumeration_depth: int = DEFAULT_ENUMERATION_DEPTH,
        lp_self_check: bool = True,
    ):
        self.threads = _threads_from_env() if threads is None else threads
        self.algorithm = algorithm
        self.level = level
        self.min_size = min_size
        self.enumeration_depth = enumeration_depth
        self.lp_self_check = lp_self_check

    def worker_count(self) -> int:
        """Number of workers to use; 0 means one per CPU, capped at 8."""
        if self.threads > 0:
            return self.threads
        return min(8, os.cpu_count() or 1)

    def __repr__(self) -> str:
        return (
            f"CostBisimConfig(threads={self.threads}, algorithm='{self.algorithm}', "
            f"level={self.level}, min_size={self.min_size}, "
            f"enumeration_depth={self.enumeration_depth}, "
            f"lp_self_check={self.lp_self_check})"
        )


# Global configuration
_config = CostBisimConfig()


def get_config() -> CostBisimConfig:
    """Get the current global configuration.

    Returns:
        CostBisimConfig: The current configuration object
    """
    return _config


def configure(
    threads: Optional[int] = None,
    algorithm: Optional[str] = None,
    level: Optional[int] = None,
    min_size: Optional[int] = None,
    enumeration_depth: Optional[int] = None,
    lp_self_check: Optional[bool] = None,
) -> None:
    """Configure global costbisim settings.

    Args:
        threads (int, optional): Worker threads for LP checks (0 = auto)
        algorithm (str, optional): Compression algorithm for saved containers
        level (int, optional): Compression level (1-10, higher = more compression)
        min_size (int, optional): Minimum size in bytes before compression is applied
        enumeration_depth (int, optional): Node budget of the scheduler oracle
        lp_self_check (bool, optional): Re-verify LP solutions by substitution

    Example:
        >>> import costbisim
        >>> costbisim.configure(threads=1, algorithm='brotli')
    """
    global _config
    if threads is not None:
        _config.threads = threads
    if algorithm is not None:
        _config.algorithm = algorithm
    if level is not None:
        _config.level = level
    if min_size is not None:
        _config.min_size = min_size
    if enumeration_depth is not None:
        _config.enumeration_depth = enumeration_depth
    if lp_self_check is not None:
        _config.lp_self_check = lp_self_check
