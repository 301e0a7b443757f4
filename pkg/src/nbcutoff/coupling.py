"""Annealed walks: grow the pairing and walk it at the same time.

Instead of pairing all half-edges up front, the *annealed* walk reveals the
matching lazily: whenever the walk sits on a half-edge with no mate yet, a
mate is drawn uniformly among the other unpaired half-edges, and the walk
then jumps to a uniform neighbour of that mate. Averaged over everything,
the trajectory law is exactly the quenched walk law averaged over uniform
pairings — but the lazy form exposes a useful coupling.

The coupling: draw the candidate mate ``y`` uniformly from *all* half-edges
(not just unpaired ones). A uniform half-edge followed by a uniform
neighbour is again uniform on half-edges, so the successive neighbour draws
form an IID uniform sequence — the *shadow*. Real walk and shadow coincide
until the first step where the unconstrained draw clashes with the pairing
built so far: the drawn mate is already paired (or is the current position
itself), or the drawn neighbour is already paired. The probability that this
happens by step ``t`` is at most ``2 t^2 / N``, since at most ``2k``
half-edges are paired when step ``k`` begins.

While coupled, the walk's one-step degrees are IID size-biased vertex
degrees, so ``sum_k log deg(X_k)`` obeys a central limit theorem with a
Berry-Esseen rate — :func:`berry_esseen_check` verifies the advertised
normal approximation, and :func:`lower_bound_estimate` turns the product of
inverse degrees into a certified lower bound on the expected distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .degrees import DegreeSequence, DegreeStats, gaussian_tail
from .errors import DegenerateSigma, NbcutoffError, NoUnpairedLeft
from .pairing import HalfEdgeSpace, Pairing
from .rng import ensure_generator, stream

MATE_PAIRED = "mate_paired"
SELF_DRAW = "self_draw"
NEIGHBOR_PAIRED = "neighbor_paired"


@dataclass
class AnnealedRun:
    """Outcome of one annealed walk.

    ``trajectory[k]`` is the walk position at step ``k``; ``iid_shadow[k-1]``
    is the coupled IID-uniform value for step ``k``. The two agree strictly
    before ``failure_time`` (and possibly at it). ``failure_time`` is None
    when the unconstrained draws never clashed; ``failure_reason`` says what
    clashed first. ``log_weight`` is ``sum_{k=1..t} log deg(X_k)`` over the
    realised trajectory.
    """

    trajectory: np.ndarray
    iid_shadow: np.ndarray
    failure_time: int | None
    failure_reason: str | None
    log_weight: float
    N: int
    _pairs: dict = field(repr=False, default_factory=dict)
    _pairing_cache: Pairing | None = field(repr=False, default=None)

    @property
    def partial_pairing(self) -> Pairing:
        """The pairs revealed during the run, as a real :class:`Pairing`."""
        if self._pairing_cache is None:
            p = Pairing(self.N)
            for a, b in self._pairs.items():
                if a < b:
                    p.pair(a, b)
            self._pairing_cache = p
        return self._pairing_cache


def _draw_unpaired_other(pairs: dict, cur: int, N: int, rng) -> int:
    """Uniform draw from the unpaired half-edges excluding ``cur``."""
    if len(pairs) + 2 > N:
        raise NoUnpairedLeft("no other unpaired half-edge remains")
    for _ in range(64):
        y = int(rng.integers(N))
        if y != cur and y not in pairs:
            return y
    candidates = [i for i in range(N) if i != cur and i not in pairs]
    return candidates[int(rng.integers(len(candidates)))]


def annealed_walk(
    space: HalfEdgeSpace,
    x: int,
    t: int,
    rng=None,
    stop_at_failure: bool = False,
    track_shadow: bool = True,
) -> AnnealedRun:
    """Run the annealed walk for ``t`` steps from ``x`` on a fresh pairing.

    Parameters
    ----------
    stop_at_failure : bool
        Return as soon as the coupling breaks (arrays truncated at the
        failure step). Used by the failure-time experiments, which only
        need ``failure_time``.
    track_shadow : bool
        Keep drawing shadow values after the coupling breaks (one extra
        uniform per step). Turning this off does not change the trajectory
        law; the shadow array is then only filled up to the failure step.
    """
    if int(space.he_deg.min()) < 1:
        raise NbcutoffError("walk undefined at degree-1 vertices")
    rng = ensure_generator(rng, "annealed", x, t)
    N = space.N
    starts, owner, he_deg = space.starts, space.owner, space.he_deg
    t = int(t)
    traj = np.empty(t + 1, dtype=np.int64)
    shadow = np.full(t, -1, dtype=np.int64)
    traj[0] = cur = int(x)
    pairs: dict[int, int] = {}
    failure_time: int | None = None
    failure_reason: str | None = None
    log_weight = 0.0
    u = rng.random(2 * t)

    def neighbor_of(z: int, unit: float) -> int:
        d = int(he_deg[z])
        cand = int(starts[owner[z]]) + int(unit * d)
        return cand + 1 if cand >= z else cand

    k = 0
    while k < t:
        k += 1
        if failure_time is None:
            # cur is always unpaired here: while the coupling holds, each
            # step pairs the current position before moving on.
            y = int(u[2 * k - 2] * N)
            if y in pairs:
                failure_time, failure_reason = k, MATE_PAIRED
            elif y == cur:
                failure_time, failure_reason = k, SELF_DRAW
            if failure_time is not None:  # the mate draw itself clashed
                if stop_at_failure:
                    k -= 1
                    break
                mate = _draw_unpaired_other(pairs, cur, N, rng)
                pairs[cur] = mate
                pairs[mate] = cur
                if track_shadow:
                    shadow[k - 1] = neighbor_of(y, u[2 * k - 1])
                cur = neighbor_of(mate, float(rng.random()))
            else:
                pairs[cur] = y
                pairs[y] = cur
                nxt = neighbor_of(y, u[2 * k - 1])
                shadow[k - 1] = nxt
                if nxt in pairs:
                    failure_time, failure_reason = k, NEIGHBOR_PAIRED
                    if stop_at_failure:
                        traj[k] = cur = nxt
                        log_weight += math.log(he_deg[nxt])
                        break
                cur = nxt
        else:
            # decoupled: real chain follows the sequential rule on its own
            if cur not in pairs:
                mate = _draw_unpaired_other(pairs, cur, N, rng)
                pairs[cur] = mate
                pairs[mate] = cur
            cur = neighbor_of(pairs[cur], float(rng.random()))
            if track_shadow:
                shadow[k - 1] = int(rng.integers(N))
        traj[k] = cur
        log_weight += math.log(he_deg[cur])

    if k < t:  # stopped early
        traj = traj[: k + 1]
        shadow = shadow[:k]
    return AnnealedRun(
        trajectory=traj,
        iid_shadow=shadow,
        failure_time=failure_time,
        failure_reason=failure_reason,
        log_weight=log_weight,
        N=N,
        _pairs=pairs,
    )


def failure_cdf_experiment(
    space: HalfEdgeSpace, t: int, replicates: int, seed: int,
    start: int = 0,
) -> dict:
    """Estimate ``P(coupling fails by step t)`` and compare to ``2 t^2 / N``.

    Each replicate gets its own derived stream, so the result does not
    depend on execution order. Returns a JSON-ready report with the
    empirical failure frequency, the bound, a 3-sigma binomial slack, and
    per-reason counts.
    """
    reasons = {MATE_PAIRED: 0, SELF_DRAW: 0, NEIGHBOR_PAIRED: 0}
    failures = 0
    for i in range(int(replicates)):
        run = annealed_walk(
            space, start, t, rng=stream(seed, "coupling-cdf", i),
            stop_at_failure=True, track_shadow=False,
        )
        if run.failure_time is not None:
            failures += 1
            reasons[run.failure_reason] += 1
    emp = failures / replicates
    bound = 2.0 * t * t / space.N
    slack = 3.0 * math.sqrt(max(emp * (1.0 - emp), 0.0) / replicates)
    return {
        "t": int(t),
        "N": space.N,
        "replicates": int(replicates),
        "empirical": emp,
        "bound": bound,
        "slack": slack,
        "pass": emp <= bound + slack,
        "reasons": reasons,
    }


# --- IID log-weights and the normal approximation ---------------------------


@dataclass(frozen=True)
class LogWeightSample:
    """One draw of ``sum_{k=1..t} log deg(Z_k)`` with IID uniform ``Z_k``."""

    s: float
    t: int


def _size_biased_log_degrees(seq: DegreeSequence):
    values, counts = np.unique(seq.degrees, return_counts=True)
    logs = np.log(values.astype(np.float64) - 1.0)
    probs = values * counts / float(seq.N)
    return logs, probs / probs.sum()


def iid_log_weight(st: DegreeStats, seq: DegreeSequence, t: int, rng=None) -> LogWeightSample:
    """Draw one sample of the IID surrogate for the trajectory log-weight.

    Uniform half-edges have size-biased vertex degrees, so the sum of
    ``log(deg(vertex) - 1)`` over ``t`` uniform half-edges is sampled
    directly from the degree histogram.
    """
    rng = ensure_generator(rng, "iid-log-weight")
    logs, probs = _size_biased_log_degrees(seq)
    draws = rng.choice(logs, size=int(t), p=probs)
    return LogWeightSample(s=float(draws.sum()), t=int(t))


def iid_log_weights(seq: DegreeSequence, t: int, samples: int, rng=None) -> np.ndarray:
    """Vectorised batch of :func:`iid_log_weight` sums, shape (samples,)."""
    rng = ensure_generator(rng, "iid-log-weights")
    logs, probs = _size_biased_log_degrees(seq)
    draws = rng.choice(logs, size=(int(samples), int(t)), p=probs)
    return draws.sum(axis=1)


def berry_esseen_check(
    st: DegreeStats,
    seq: DegreeSequence,
    t: int,
    theta: float,
    samples: int,
    rng=None,
) -> dict:
    """Monte Carlo check of the normal approximation for log-weights.

    Compares the empirical frequency of ``{product of 1/deg > theta}``
    (equivalently ``sum log deg < -log theta``) against the Gaussian tail at
    ``(mu t + log theta) / (sigma sqrt(t))``. Passes when the discrepancy is
    within the Berry-Esseen envelope ``rho / (sigma^3 sqrt(t))`` plus a
    conservative 3-sigma Monte Carlo slack.
    """
    if st.sigma2 <= 0.0:
        raise DegenerateSigma(
            "sigma2 = 0 (regular sequence): the CLT comparison is undefined"
        )
    if theta <= 0.0:
        raise NbcutoffError(f"theta must be positive, got {theta!r}")
    rng = ensure_generator(rng, "berry-esseen")
    sigma = math.sqrt(st.sigma2)
    s = iid_log_weights(seq, t, samples, rng)
    empirical = float(np.mean(s < -math.log(theta)))
    gaussian = gaussian_tail((st.mu * t + math.log(theta)) / (sigma * math.sqrt(t)))
    be_bound = st.rho / (st.sigma2**1.5 * math.sqrt(t))
    mc_slack = 3.0 * math.sqrt(0.25 / samples)
    return {
        "t": int(t),
        "theta": float(theta),
        "empirical": empirical,
        "gaussian": gaussian,
        "be_bound": be_bound,
        "mc_slack": mc_slack,
        "pass": abs(empirical - gaussian) <= be_bound + mc_slack,
    }


def lower_bound_estimate(
    space: HalfEdgeSpace, x: int, t: int, theta: float, samples: int, seed: int,
) -> float:
    """Certified lower bound on the expected distance at time ``t``.

    Estimates ``P(prod_{k=1..t} 1/deg(X_k) > theta)`` under the annealed
    law by Monte Carlo, subtracts the union-bound correction ``1/(theta N)``
    for the states a light trajectory could still reach, and clamps to
    [0, 1]. The result lower-bounds the pairing-averaged worst-start
    distance whenever ``theta > 0``.
    """
    if theta <= 0.0:
        raise NbcutoffError(f"theta must be positive, got {theta!r}")
    thr = -math.log(theta)
    hits = 0
    for i in range(int(samples)):
        run = annealed_walk(
            space, x, t, rng=stream(seed, "lower-bound", i), track_shadow=False
        )
        if run.log_weight < thr:
            hits += 1
    p_hat = hits / samples
    return min(1.0, max(0.0, p_hat - 1.0 / (theta * space.N)))
