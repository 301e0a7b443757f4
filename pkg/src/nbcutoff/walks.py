"""The non-backtracking walk on half-edges: exact evolution and sampling.

State space: the ``N`` half-edges of a paired :class:`~nbcutoff.pairing.HalfEdgeSpace`.
From half-edge ``x`` the walk jumps to a uniformly chosen neighbour of
``mate(x)`` — it crosses the edge and then picks any *other* slot at the far
vertex, so it can never immediately retrace the edge it arrived by.

The transition kernel ``P(x, y) = 1/deg(mate(x))`` for every neighbour ``y``
of ``mate(x)`` satisfies ``P(mate(y), mate(x)) = P(x, y)`` exactly, which
makes it doubly stochastic: the uniform distribution on half-edges is
invariant. Worst-case total-variation distance to uniform is therefore the
natural mixing functional, and :func:`tv_curve` computes it exactly by dense
vector evolution (O(N) per step, no matrix is ever materialised).

Exact evolution uses one fixed accumulation order (ascending half-edge
index, compensated only by float64), so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CurveTooShort,
    IncompletePairing,
    MassConservationError,
    NbcutoffError,
    SymmetryViolation,
)
from .pairing import UNPAIRED, HalfEdgeSpace, Pairing
from .rng import ensure_generator

#: mass drift beyond this after one exact step is treated as a bug
DRIFT_ERROR = 1e-9


@dataclass(frozen=True)
class Distribution:
    """A probability vector over half-edges tagged with its time index."""

    mass: np.ndarray
    t: int

    def check(self, tol: float = DRIFT_ERROR) -> None:
        if self.mass.min() < -tol:
            raise MassConservationError("negative probability mass")
        drift = abs(float(self.mass.sum()) - 1.0)
        if drift > tol:
            raise MassConservationError(f"total mass drifted by {drift:.3e}")


def point_mass(space: HalfEdgeSpace, x: int) -> Distribution:
    mass = np.zeros(space.N)
    mass[int(x)] = 1.0
    return Distribution(mass=mass, t=0)


def uniform_distribution(space: HalfEdgeSpace) -> Distribution:
    return Distribution(mass=np.full(space.N, 1.0 / space.N), t=0)


def _require_walkable(space: HalfEdgeSpace, pairing: Pairing) -> None:
    if not pairing.is_complete:
        raise IncompletePairing("the walk needs a complete pairing")
    if int(space.he_deg.min()) < 1:
        raise NbcutoffError(
            "walk undefined: a degree-1 vertex has no onward neighbour"
        )


def _push_batch(space: HalfEdgeSpace, mate: np.ndarray, dists: np.ndarray,
                w: np.ndarray, seg: np.ndarray, out: np.ndarray) -> None:
    """One exact step applied to every row of ``dists``, writing ``out``.

    Mass moving through half-edge ``z``'s vertex is ``w[z] =
    dists[mate[z]] / deg(z)``; each neighbour ``y`` of ``z`` receives
    ``w[z]``, i.e. ``out[y] = (sum of w over y's vertex) - w[y]``.
    """
    np.take(dists, mate, axis=1, out=w)
    w /= space.he_deg
    np.add.reduceat(w, space.starts, axis=1, out=seg)
    np.take(seg, space.owner, axis=1, out=out)
    out -= w


def step(dist: Distribution, space: HalfEdgeSpace, pairing: Pairing) -> Distribution:
    """Advance a distribution by one exact step.

    Raises :class:`MassConservationError` if total mass drifts by more than
    ``DRIFT_ERROR`` (it never should; the check guards against index bugs).
    """
    _require_walkable(space, pairing)
    dists = dist.mass.reshape(1, -1)
    w = np.empty_like(dists)
    seg = np.empty((1, space.n_vertices))
    out = np.empty_like(dists)
    _push_batch(space, pairing.mate, dists, w, seg, out)
    result = Distribution(mass=out[0], t=dist.t + 1)
    result.check()
    return result


def distribution_at(space: HalfEdgeSpace, pairing: Pairing, x: int, t: int) -> Distribution:
    """Exact law of the walk after ``t`` steps from a point mass at ``x``."""
    dist = point_mass(space, x)
    for _ in range(int(t)):
        dist = step(dist, space, pairing)
    return dist


def tv_distance(dist) -> float:
    """Total-variation distance to the uniform distribution on half-edges."""
    mass = dist.mass if isinstance(dist, Distribution) else np.asarray(dist)
    return 0.5 * float(np.abs(mass - 1.0 / mass.size).sum())


@dataclass(frozen=True)
class TvCurve:
    """Exact distance-to-uniform curves from a set of start half-edges.

    ``per_start[i, t]`` is the distance of start ``starts[i]`` at time ``t``;
    ``d_max`` is the pointwise maximum, the sampled stand-in for the
    worst-case distance. ``max_drift`` records the largest mass-conservation
    drift observed while evolving (diagnostic; always tiny).
    """

    starts: np.ndarray
    per_start: np.ndarray
    max_drift: float

    @property
    def t_max(self) -> int:
        return self.per_start.shape[1] - 1

    @property
    def d_max(self) -> np.ndarray:
        return self.per_start.max(axis=0)

    @property
    def points(self) -> list:
        return [(t, float(d)) for t, d in enumerate(self.d_max)]

    def value_at(self, t: float) -> float:
        """Distance at a possibly fractional time, by linear interpolation
        between the two neighbouring integer times."""
        if t < 0.0 or t > self.t_max:
            raise CurveTooShort(
                f"t={t:g} outside the computed range [0, {self.t_max}]"
            )
        d = self.d_max
        lo = int(np.floor(t))
        if lo == self.t_max:
            return float(d[lo])
        frac = t - lo
        return float((1.0 - frac) * d[lo] + frac * d[lo + 1])

    def to_table(self) -> tuple[list, list]:
        """(header, rows) with one row per time step, for CSV/JSONL output."""
        header = ["t", "d_max"] + [f"d_start_{int(s)}" for s in self.starts]
        rows = [
            [t, float(self.d_max[t])] + [float(v) for v in self.per_start[:, t]]
            for t in range(self.t_max + 1)
        ]
        return header, rows


def tv_curve(
    space: HalfEdgeSpace,
    pairing: Pairing,
    starts,
    t_max: int,
    batch_elements: int = 8_000_000,
) -> TvCurve:
    """Exact distance curves for every start, up to time ``t_max``.

    Starts are processed in batches sized to keep the working set near
    ``batch_elements`` floats; results are independent of the batching.
    """
    _require_walkable(space, pairing)
    starts = np.asarray(starts, dtype=np.int64)
    if starts.ndim != 1 or starts.size == 0:
        raise NbcutoffError("need at least one start half-edge")
    N = space.N
    T = int(t_max)
    per_start = np.empty((starts.size, T + 1))
    max_drift = 0.0
    batch = max(1, min(starts.size, batch_elements // max(N, 1)))
    uniform = 1.0 / N
    mate = pairing.mate
    for lo in range(0, starts.size, batch):
        idx = starts[lo:lo + batch]
        B = idx.size
        dists = np.zeros((B, N))
        dists[np.arange(B), idx] = 1.0
        w = np.empty_like(dists)
        seg = np.empty((B, space.n_vertices))
        out = np.empty_like(dists)
        per_start[lo:lo + B, 0] = 0.5 * np.abs(dists - uniform).sum(axis=1)
        for t in range(1, T + 1):
            _push_batch(space, mate, dists, w, seg, out)
            dists, out = out, dists
            drift = float(np.abs(dists.sum(axis=1) - 1.0).max())
            if drift > DRIFT_ERROR:
                raise MassConservationError(
                    f"mass drifted by {drift:.3e} at step {t}"
                )
            max_drift = max(max_drift, drift)
            per_start[lo:lo + B, t] = 0.5 * np.abs(dists - uniform).sum(axis=1)
    return TvCurve(starts=starts, per_start=per_start, max_drift=max_drift)


def mixing_time(curve: TvCurve, eps: float) -> int:
    """Smallest integer ``t`` with ``d_max(t) < eps``.

    Raises :class:`CurveTooShort` when the curve never gets below ``eps``
    within its computed range.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    below = np.flatnonzero(curve.d_max < eps)
    if below.size == 0:
        raise CurveTooShort(
            f"distance never dropped below {eps:g} up to t={curve.t_max}"
        )
    return int(below[0])


def default_starts(space: HalfEdgeSpace, rng=None, n_sampled: int = 32) -> np.ndarray:
    """Standard start set: uniform sample plus extremal-degree vertices.

    ``n_sampled`` half-edges drawn without replacement, then the first slot
    of one maximum-degree vertex and of one minimum-degree vertex
    (duplicates removed, order preserved).
    """
    rng = ensure_generator(rng, "starts")
    sampled = rng.choice(space.N, size=min(n_sampled, space.N), replace=False)
    v_max = int(np.argmax(space.degrees))
    v_min = int(np.argmin(space.degrees))
    chosen = list(sampled) + [int(space.starts[v_max]), int(space.starts[v_min])]
    seen: dict[int, None] = {}
    for s in chosen:
        seen.setdefault(int(s), None)
    return np.array(list(seen), dtype=np.int64)


# --- Monte Carlo trajectories ----------------------------------------------


def walk(space: HalfEdgeSpace, pairing: Pairing, x: int, t: int, rng=None) -> np.ndarray:
    """Sample one trajectory ``X_0 = x, ..., X_t`` (length ``t + 1``)."""
    _require_walkable(space, pairing)
    rng = ensure_generator(rng, "walk")
    mate = pairing.mate
    starts, owner, he_deg = space.starts, space.owner, space.he_deg
    traj = np.empty(int(t) + 1, dtype=np.int64)
    traj[0] = cur = int(x)
    u = rng.random(int(t))
    for k in range(int(t)):
        z = int(mate[cur])
        d = int(he_deg[z])
        cand = int(starts[owner[z]]) + int(u[k] * d)
        if cand >= z:
            cand += 1
        traj[k + 1] = cur = cand
    return traj


def walk_endpoints(space: HalfEdgeSpace, pairing: Pairing, x: int, t: int,
                   n_walks: int, rng=None) -> np.ndarray:
    """Endpoints of ``n_walks`` independent trajectories of length ``t``
    from ``x`` (vectorised across walks)."""
    _require_walkable(space, pairing)
    rng = ensure_generator(rng, "walk-endpoints")
    mate = pairing.mate
    cur = np.full(int(n_walks), int(x), dtype=np.int64)
    for _ in range(int(t)):
        z = mate[cur]
        d = space.he_deg[z]
        cand = space.starts[space.owner[z]] + (rng.random(cur.size) * d).astype(np.int64)
        cand += cand >= z
        cur = cand
    return cur


# --- kernel self-check -------------------------------------------------------


def verify_symmetry(space: HalfEdgeSpace, pairing: Pairing,
                    sample_size: int = 2000, rng=None) -> dict:
    """Check the kernel identity ``P(mate(y), mate(x)) == P(x, y)`` exactly.

    Exhaustive over all N^2 ordered pairs when ``N <= 64``; otherwise checks
    ``sample_size`` random pairs plus, for each sampled ``x``, every ``y``
    in the support of ``P(x, .)``. Column sums are verified to be 1 as well
    (double stochasticity). Returns a small report; raises
    :class:`SymmetryViolation` on the first exact mismatch.
    """
    _require_walkable(space, pairing)
    mate = pairing.mate
    owner, he_deg = space.owner, space.he_deg

    def kernel(a: int, b: int) -> float:
        m = int(mate[a])
        if owner[b] == owner[m] and b != m:
            return 1.0 / float(he_deg[m])
        return 0.0

    N = space.N
    checked = 0
    exhaustive = N <= 64
    if exhaustive:
        pairs = ((x, y) for x in range(N) for y in range(N))
    else:
        rng = ensure_generator(rng, "verify-symmetry")
        xs = rng.integers(N, size=sample_size)
        ys = rng.integers(N, size=sample_size)
        sampled = [(int(a), int(b)) for a, b in zip(xs, ys)]
        support = [
            (int(a), int(y))
            for a in xs[: max(1, sample_size // 10)]
            for y in space.neighbors(int(mate[a]))
        ]
        pairs = iter(sampled + support)
    for x, y in pairs:
        fwd = kernel(x, y)
        bwd = kernel(int(mate[y]), int(mate[x]))
        if fwd != bwd:
            raise SymmetryViolation(
                f"P({x},{y}) = {fwd!r} but P(mate({y}),mate({x})) = {bwd!r}"
            )
        checked += 1

    if exhaustive:
        cols = range(N)
    else:
        cols = [int(c) for c in ensure_generator(rng, "verify-columns").integers(N, size=64)]
    max_col_err = 0.0
    for y in cols:
        # P(x, y) > 0 iff mate(x) ~ y, i.e. x = mate(z) for a neighbour z of y
        col = sum(kernel(int(mate[z]), y) for z in space.neighbors(y))
        max_col_err = max(max_col_err, abs(col - 1.0))
    if max_col_err > 1e-12:
        raise SymmetryViolation(f"column sums deviate from 1 by {max_col_err:.3e}")
    return {
        "checked_pairs": checked,
        "exhaustive": exhaustive,
        "max_column_error": max_col_err,
        "pass": True,
    }
