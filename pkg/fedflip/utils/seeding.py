"""Seed derivation.

Every random stream in a run is derived from the experiment seed plus a
path of labels (round, client id, purpose). Derived seeds depend only on
their inputs, so serial and threaded schedules draw identical numbers.
"""

import hashlib
from typing import Union

SeedPart = Union[int, str]


def derive_seed(*parts: SeedPart) -> int:
    """Hash ``parts`` into a 63-bit seed (SHA-256 over ':'-joined parts)."""
    key = ":".join(str(part) for part in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1

