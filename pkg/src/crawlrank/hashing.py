"""Pinned 64-bit FNV-1a.

Bucket assignment and stored content hashes both ride on this, so the
constants are spelled out rather than taken from a library: the mapping
must be identical on every platform and in every future run.
"""

_OFFSET_BASIS = 0xCBF29CE484222325
_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _OFFSET_BASIS
    for byte in data:
        h = ((h ^ byte) * _PRIME) & _MASK
    return h
