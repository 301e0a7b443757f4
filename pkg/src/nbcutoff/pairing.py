"""Half-edge spaces, uniform pairings, and local tree structure.

Every vertex ``v`` with degree ``d_v`` contributes ``d_v`` half-edges
(stubs). Half-edges are numbered ``0..N-1`` in vertex order, so the stubs of
vertex ``v`` occupy a contiguous block. A *pairing* is a perfect matching
of half-edges (a fixed-point-free involution ``mate``); choosing it uniformly
at random yields the standard configuration-model multigraph.

Two half-edges are *neighbours* when they sit at the same vertex in
different slots. The degree of a half-edge is the number of its neighbours,
``deg(x) = d_{owner(x)} - 1``, which is the branching factor the walk sees.

This module also provides the directed-ball machinery used to classify
half-edges as *roots*: ``x`` is a root at radius ``h`` when the set of
half-edges reachable from ``x`` in at most ``h`` non-backtracking steps forms
a tree (no half-edge is reached twice).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .degrees import DegreeSequence, validate
from .errors import (
    AlreadyPaired,
    IncompletePairing,
    NbcutoffError,
    NoUnpairedLeft,
    OddResidue,
)
from .rng import ensure_generator

UNPAIRED = -1


@dataclass(frozen=True)
class HalfEdgeSpace:
    """Index arrays describing the half-edges of a degree sequence.

    Attributes
    ----------
    degrees : np.ndarray
        Vertex degrees, shape ``(n,)``.
    owner : np.ndarray
        ``owner[x]`` is the vertex holding half-edge ``x``, shape ``(N,)``.
    starts : np.ndarray
        ``starts[v]`` is the first half-edge of vertex ``v``, shape ``(n,)``.
    he_deg : np.ndarray
        Half-edge degrees ``degrees[owner] - 1``, shape ``(N,)``.
    """

    degrees: np.ndarray
    owner: np.ndarray
    starts: np.ndarray
    he_deg: np.ndarray

    @classmethod
    def from_degrees(cls, seq, allow_small: bool = False) -> "HalfEdgeSpace":
        """Build a space from a :class:`DegreeSequence` or a raw degree list."""
        if not isinstance(seq, DegreeSequence):
            seq = validate(seq, allow_small=allow_small)
        degrees = seq.degrees
        owner = np.repeat(np.arange(seq.n, dtype=np.int64), degrees)
        starts = np.concatenate(
            ([0], np.cumsum(degrees)[:-1])
        ).astype(np.int64)
        he_deg = degrees[owner] - 1
        return cls(degrees=degrees, owner=owner, starts=starts, he_deg=he_deg)

    @property
    def n_vertices(self) -> int:
        return int(self.degrees.size)

    @property
    def N(self) -> int:
        return int(self.owner.size)

    def vertex_slots(self, v: int) -> np.ndarray:
        """All half-edges of vertex ``v``."""
        s = int(self.starts[v])
        return np.arange(s, s + int(self.degrees[v]), dtype=np.int64)

    def neighbors(self, x: int) -> np.ndarray:
        """Half-edges at the same vertex as ``x``, excluding ``x`` itself."""
        slots = self.vertex_slots(int(self.owner[x]))
        return slots[slots != x]


class Pairing:
    """A partial or complete fixed-point-free involution on half-edges.

    ``mate[x]`` is the partner of ``x`` or ``UNPAIRED`` (-1). Single-owner
    mutable: operations that extend a pairing modify it in place.
    """

    def __init__(self, N: int):
        if N % 2 != 0:
            raise OddResidue(f"cannot pair an odd number of half-edges ({N})")
        self.mate = np.full(N, UNPAIRED, dtype=np.int64)
        self._n_paired = 0

    @property
    def N(self) -> int:
        return int(self.mate.size)

    @property
    def n_paired(self) -> int:
        return self._n_paired

    @property
    def n_unpaired(self) -> int:
        return self.N - self._n_paired

    @property
    def is_complete(self) -> bool:
        return self._n_paired == self.N

    def is_paired(self, x: int) -> bool:
        return self.mate[x] != UNPAIRED

    def mate_of(self, x: int) -> int | None:
        m = int(self.mate[x])
        return None if m == UNPAIRED else m

    def pair(self, x: int, y: int) -> None:
        """Record the pair {x, y}."""
        x, y = int(x), int(y)
        if x == y:
            raise NbcutoffError(f"half-edge {x} cannot be its own mate")
        if self.mate[x] != UNPAIRED:
            raise AlreadyPaired(f"half-edge {x} already has a mate")
        if self.mate[y] != UNPAIRED:
            raise AlreadyPaired(f"half-edge {y} already has a mate")
        self.mate[x] = y
        self.mate[y] = x
        self._n_paired += 2

    def unpaired_indices(self) -> np.ndarray:
        return np.flatnonzero(self.mate == UNPAIRED)

    def copy(self) -> "Pairing":
        out = Pairing.__new__(Pairing)
        out.mate = self.mate.copy()
        out._n_paired = self._n_paired
        return out

    def check_involution(self) -> None:
        """Raise if the mate array is not a valid partial involution."""
        mate = self.mate
        paired = mate != UNPAIRED
        idx = np.flatnonzero(paired)
        if idx.size % 2 != 0:
            raise NbcutoffError("odd number of paired half-edges")
        if idx.size:
            if mate[idx].min() < 0 or mate[idx].max() >= mate.size:
                raise NbcutoffError("mate index out of range")
            if np.any(mate[idx] == idx):
                raise NbcutoffError("a half-edge is paired with itself")
            if np.any(mate[mate[idx]] != idx):
                raise NbcutoffError("mate map is not an involution")

    @classmethod
    def from_mate_array(cls, mate) -> "Pairing":
        arr = np.asarray(mate, dtype=np.int64)
        out = cls.__new__(cls)
        out.mate = arr
        out._n_paired = int((arr != UNPAIRED).sum())
        out.check_involution()
        if arr.size % 2 != 0:
            raise OddResidue("mate array has odd length")
        return out

    def key(self) -> tuple:
        """Hashable identity (for exact distribution tests)."""
        return tuple(int(m) for m in self.mate)


def uniform_pairing(space_or_n, rng=None) -> Pairing:
    """Draw a uniformly random complete pairing.

    ``space_or_n`` may be a :class:`HalfEdgeSpace` or a plain even integer.
    """
    N = space_or_n if isinstance(space_or_n, int) else space_or_n.N
    rng = ensure_generator(rng, "uniform-pairing")
    return complete_uniformly(Pairing(N), rng)


def pair_on_demand(pairing: Pairing, x: int, rng=None) -> int:
    """Pair ``x`` with a uniformly chosen other unpaired half-edge.

    Returns the chosen mate. Sampling is rejection-based against the full
    index range (exactly uniform over the unpaired set), falling back to an
    explicit scan if the unpaired set has become a small fraction.
    """
    rng = ensure_generator(rng, "pair-on-demand")
    x = int(x)
    if pairing.is_paired(x):
        raise AlreadyPaired(f"half-edge {x} already has a mate")
    if pairing.n_unpaired < 2:
        raise NoUnpairedLeft("no other unpaired half-edge remains")
    N = pairing.N
    mate = pairing.mate
    for _ in range(64):
        y = int(rng.integers(N))
        if y != x and mate[y] == UNPAIRED:
            pairing.pair(x, y)
            return y
    candidates = pairing.unpaired_indices()
    candidates = candidates[candidates != x]
    y = int(candidates[rng.integers(candidates.size)])
    pairing.pair(x, y)
    return y


def complete_uniformly(pairing: Pairing, rng=None) -> Pairing:
    """Extend a partial pairing to a complete one, uniformly at random.

    The unpaired residue is permuted uniformly and paired off two by two;
    a fully paired input is returned unchanged. Mutates in place.
    """
    rng = ensure_generator(rng, "complete-uniformly")
    residue = pairing.unpaired_indices()
    if residue.size % 2 != 0:
        raise OddResidue(f"{residue.size} half-edges left unpaired")
    if residue.size == 0:
        return pairing
    perm = rng.permutation(residue)
    for a, b in zip(perm[0::2], perm[1::2]):
        pairing.pair(int(a), int(b))
    return pairing


def enumerate_pairings(items):
    """Yield every perfect matching of ``items`` as a tuple of (a, b) pairs.

    There are (k-1)!! matchings of k items; useful only for small k (test
    oracles, exhaustive tail computations).
    """
    items = sorted(int(i) for i in items)
    if len(items) % 2 != 0:
        raise OddResidue("cannot enumerate pairings of an odd set")

    def rec(pool):
        if not pool:
            yield ()
            return
        first = pool[0]
        for i in range(1, len(pool)):
            partner = pool[i]
            rest = pool[1:i] + pool[i + 1:]
            for sub in rec(rest):
                yield ((first, partner),) + sub

    yield from rec(items)


# --- multigraph summary ----------------------------------------------------


@dataclass(frozen=True)
class GraphSummary:
    """Loop/multi-edge census of the multigraph induced by a pairing.

    ``loops`` counts pairs whose two half-edges share a vertex. For each
    unordered pair of distinct vertices joined by ``m >= 2`` edges,
    ``multi_edges`` accumulates ``m - 1`` (loops are not re-counted here).
    """

    loops: int
    multi_edges: int
    is_simple: bool


def build_graph(space: HalfEdgeSpace, pairing: Pairing) -> GraphSummary:
    """Summarise the multigraph of a complete pairing."""
    if not pairing.is_complete:
        raise IncompletePairing("graph summary requires a complete pairing")
    mate = pairing.mate
    x = np.arange(space.N)
    firsts = x[x < mate]  # one representative half-edge per pair
    u = space.owner[firsts]
    v = space.owner[mate[firsts]]
    loops = int((u == v).sum())
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = lo[u != v] * space.n_vertices + hi[u != v]
    multi = 0
    if keys.size:
        _, counts = np.unique(keys, return_counts=True)
        multi = int((counts - 1).sum())
    return GraphSummary(
        loops=loops, multi_edges=multi, is_simple=(loops == 0 and multi == 0)
    )


# --- directed balls and roots ----------------------------------------------


@dataclass(frozen=True)
class BallReport:
    """What a non-backtracking BFS of bounded depth saw from one half-edge.

    ``visited`` lists half-edges in discovery order (the center first).
    ``cycle_count`` is (directed transitions explored) - (half-edges reached
    - 1); it is zero exactly when every reached half-edge has a unique
    non-backtracking path from the center within the radius.
    """

    center: int
    radius: int
    visited: tuple
    cycle_count: int

    @property
    def is_tree(self) -> bool:
        return self.cycle_count == 0

    def to_json(self) -> dict:
        return {
            "center": self.center,
            "radius": self.radius,
            "visited": list(self.visited),
            "is_tree": self.is_tree,
            "cycle_count": self.cycle_count,
        }


def directed_ball(
    space: HalfEdgeSpace, pairing: Pairing, x: int, radius: int
) -> BallReport:
    """Explore all non-backtracking trajectories of length <= radius from x.

    One step moves from a half-edge ``z`` to any neighbour of ``mate(z)``.
    Expansion stops at ``radius``; hitting an unpaired half-edge before that
    raises :class:`IncompletePairing`.
    """
    x = int(x)
    mate = pairing.mate
    seen = {x}
    order = [x]
    frontier = [x]
    edges = 0
    for _ in range(int(radius)):
        if not frontier:
            break
        nxt = []
        for z in frontier:
            m = int(mate[z])
            if m == UNPAIRED:
                raise IncompletePairing(
                    f"half-edge {z} is unpaired inside the requested ball"
                )
            for w in space.neighbors(m):
                w = int(w)
                edges += 1
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return BallReport(
        center=x,
        radius=int(radius),
        visited=tuple(order),
        cycle_count=edges - (len(order) - 1),
    )


def default_ball_radius(space: HalfEdgeSpace) -> int:
    """Radius used for root classification when none is given.

    ``floor(min(log N / (10 log delta), log log N))``, clamped to at least 1
    so the classification is never vacuous on small instances.
    """
    log_n = np.log(space.N)
    delta = int(space.degrees.max())
    h = int(np.floor(min(log_n / (10.0 * np.log(delta)), np.log(log_n))))
    return max(h, 1)


def is_root(space: HalfEdgeSpace, pairing: Pairing, x: int,
            radius: int | None = None) -> bool:
    """True when the directed ball around ``x`` is a tree."""
    if radius is None:
        radius = default_ball_radius(space)
    return directed_ball(space, pairing, x, radius).is_tree


def root_mask(space: HalfEdgeSpace, pairing: Pairing,
              radius: int | None = None) -> np.ndarray:
    """Boolean root indicator for every half-edge (small instances)."""
    if radius is None:
        radius = default_ball_radius(space)
    return np.array(
        [directed_ball(space, pairing, x, radius).is_tree
         for x in range(space.N)],
        dtype=bool,
    )


def non_root_mass(space: HalfEdgeSpace, pairing: Pairing, x: int,
                  radius: int | None = None) -> float:
    """Probability that the walk started at ``x`` sits on a non-root after
    ``radius`` steps (exact computation)."""
    from .walks import distribution_at  # local import breaks the module cycle

    if radius is None:
        radius = default_ball_radius(space)
    mask = root_mask(space, pairing, radius=radius)
    dist = distribution_at(space, pairing, x, radius)
    return float(dist.mass[~mask].sum())


# --- serialization -----------------------------------------------------------


def save_pairing(path, pairing: Pairing) -> None:
    """Write a pairing as a JSON mate array (``.json``) or binary (``.npy``)."""
    p = Path(path)
    if p.suffix == ".npy":
        np.save(p, pairing.mate)
    else:
        p.write_text(json.dumps([int(m) for m in pairing.mate]) + "\n")


def load_pairing(path) -> Pairing:
    """Read a pairing written by :func:`save_pairing`, validating the
    involution property on load."""
    p = Path(path)
    if p.suffix == ".npy":
        mate = np.load(p)
    else:
        mate = np.array(json.loads(p.read_text()), dtype=np.int64)
    return Pairing.from_mate_array(mate)
