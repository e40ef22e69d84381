"""Stable seed derivation.

Python's ``hash`` is salted per process, so seeds are derived from a
BLAKE2b digest of the colon-joined parts instead.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """63-bit seed that depends only on the string forms of ``parts``."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
