"""Deterministic RNG stream derivation.

Every stochastic operation takes a seed token and derives an independent
numpy Generator from it.  Tokens are built from mixed int/str parts so that
named sub-streams (e.g. per-epoch noise vs. per-interval shadowing) never
collide and never depend on evaluation order.
"""

from __future__ import annotations

import zlib

import numpy as np

SeedLike = "int | str | tuple | list"


def _flatten(parts, out: list[int]) -> None:
    for p in parts:
        if isinstance(p, (tuple, list)):
            _flatten(p, out)
        elif isinstance(p, str):
            out.append(zlib.crc32(p.encode("utf-8")))
        elif isinstance(p, (int, np.integer)):
            # SeedSequence entropy must be non-negative
            out.append(int(p) & 0xFFFFFFFFFFFFFFFF)
        else:
            raise TypeError(f"unsupported seed part: {p!r}")


def derive_entropy(*parts) -> list[int]:
    """Flatten seed parts into a non-negative integer entropy list."""
    out: list[int] = []
    _flatten(parts, out)
    return out


def make_rng(*parts) -> np.random.Generator:
    """Generator seeded deterministically from the given parts."""
    return np.random.default_rng(derive_entropy(*parts))
