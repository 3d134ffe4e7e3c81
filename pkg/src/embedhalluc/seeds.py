"""Deterministic named RNG sub-streams.

All randomness in an experiment derives from one root seed. Each phase
(data, halluc, teacher, student, eda, ...) gets its own independent
generator so that enabling or disabling one phase never perturbs the
draws seen by another.
"""

import hashlib

import numpy as np


def stream_seed(root_seed: int, name: str) -> int:
    """Derive a stable 63-bit seed for the named sub-stream."""
    digest = hashlib.sha256(f"{root_seed}/{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def substream(root_seed: int, name: str) -> np.random.Generator:
    """Independent generator for the named sub-stream of ``root_seed``."""
    return np.random.default_rng(stream_seed(root_seed, name))
