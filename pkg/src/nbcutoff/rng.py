"""Deterministic random-number streams.

All randomized entry points in this package take a 64-bit integer seed (or an
already-built generator). Internally each logical task derives its own
independent stream from the root seed with :func:`stream`, keyed by a purpose
tag and an optional replicate index:

    key = SHA-256(seed || tag_0 || tag_1 || ...)[:16 bytes]

and the key feeds a Philox counter-based generator. The derivation only
involves integer/string formatting and SHA-256, so identical (seed, tags)
give byte-identical streams on every platform, regardless of how many other
streams were drawn in between or on which thread the work runs.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, *tags: object) -> np.random.Generator:
    """Return an independent Philox generator for (seed, tags).

    Parameters
    ----------
    seed : int
        Root seed (any Python int; 64-bit values are typical).
    *tags : object
        Purpose tags, e.g. ``stream(seed, "curve", replicate)``. Anything
        with a stable ``str()`` works; ints and strings are recommended.
    """
    label = ":".join([str(int(seed))] + [str(t) for t in tags])
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def ensure_generator(rng: np.random.Generator | int | None,
                     *tags: object) -> np.random.Generator:
    """Coerce ``rng`` to a Generator.

    Ints are treated as root seeds and routed through :func:`stream` with the
    given tags; ``None`` draws a fresh nondeterministic seed.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return stream(int(rng), *tags)
