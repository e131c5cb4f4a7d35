"""Deterministic RNG derivation.

All randomness in the package flows through `rng_for(seed, *tokens)`. Sub-streams
are keyed by value (class id, iteration number, grid coordinates), never by
execution order, so results are identical across runs, worker counts and
scheduling.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK = 0xFFFFFFFF


def _token_word(token: object) -> int:
    if isinstance(token, bool):
        return int(token)
    if isinstance(token, int):
        return token & _MASK
    if isinstance(token, str):
        return zlib.crc32(token.encode("utf-8")) & _MASK
    raise TypeError(f"unsupported seed token type: {type(token).__name__}")


def rng_for(seed: int, *tokens: object) -> np.random.Generator:
    """Build an independent generator for (seed, tokens).

    Tokens may be ints or strings; the same tuple always yields the same
    bit stream regardless of how many other streams were drawn first.
    """
    words = [seed & _MASK, (seed >> 32) & _MASK]
    words.extend(_token_word(t) for t in tokens)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))
