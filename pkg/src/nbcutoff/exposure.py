"""Weight-greedy exposure of a pairing, and concentration for pair sums.

To lower-bound how much probability mass two half-edges ``x`` and ``y`` can
exchange in ``t`` steps, the pairing is revealed in a controlled order. A
forest is grown from the two roots: repeatedly select the unpaired forest
node ``z`` of largest weight among those of height < t/2 and weight >
``w_min`` (ties broken by smallest index), pair it with a uniformly chosen
other unpaired half-edge ``z'``, and — only if neither ``z'`` nor any of its
neighbours is already a forest node — attach all neighbours of ``z'`` as
children of ``z``. A child at the far vertex inherits weight
``w(z) / deg(z')``: the weight of a node is the product of ``1/deg`` along
its path from the root (the root contributes nothing), hence a rigorous
lower bound on the walk's ``h``-step transition probability to that node.

The process preserves weight from parent to child set, keeps per-height
total weight at most 2 (two roots of weight 1), selects weights in
non-increasing order, and performs at most ``t / w_min`` pairings. After it
halts, the *frontiers* ``H_x`` and ``H_y`` (unpaired nodes at height exactly
t/2 under each root) carry the mass estimates: completing the pairing
uniformly and summing ``w(u) w(v)`` over frontier pairs that got matched
lower-bounds ``P^t(x, mate(y))``.

The second half of the module handles concentration of pair-weight sums
``sum_i w[i, mate(i)]`` over a uniform pairing, via the exchangeable random
*switch* that re-pairs two chosen pairs. The lower tail obeys
``P(sum <= mean - a) <= exp(-a^2 / (4 theta mean))`` with ``theta`` the
largest symmetrised entry — checked exhaustively for small index sets and
by Monte Carlo for large ones.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NbcutoffError, NotPaired, OddResidue
from .pairing import (
    HalfEdgeSpace,
    Pairing,
    enumerate_pairings,
    pair_on_demand,
    complete_uniformly,
)
from .rng import ensure_generator


def default_min_weight(N: int) -> float:
    """Exploration floor ``N**(-2/3)``: lighter nodes are never selected."""
    return float(N) ** (-2.0 / 3.0)


def default_truncation(N: int) -> float:
    """Pair-product truncation ``1 / (N log(N)^2)`` used by the estimates."""
    return 1.0 / (N * math.log(N) ** 2)


@dataclass(frozen=True)
class ForestNode:
    parent: int | None
    root: int
    height: int
    weight: float


@dataclass
class ExposureResult:
    """Forest, frontiers and the partial pairing left by :func:`run_exposure`."""

    x: int
    y: int
    t: int
    w_min: float
    nodes: dict
    h_x: np.ndarray
    h_y: np.ndarray
    pairing: Pairing
    tau: int

    def frontier_weights(self, root: int) -> np.ndarray:
        members = self.h_x if root == self.x else self.h_y
        return np.array([self.nodes[int(z)].weight for z in members])

    def per_height_weight_sums(self) -> np.ndarray:
        """Total node weight at each height 0..t/2."""
        sums = np.zeros(self.t // 2 + 1)
        for nd in self.nodes.values():
            sums[nd.height] += nd.weight
        return sums

    def unpaired_forest_weight(self) -> float:
        return float(
            sum(nd.weight for z, nd in self.nodes.items()
                if not self.pairing.is_paired(z))
        )

    def small_weight_mass(self) -> float:
        """Weight resting on nodes below the exploration floor."""
        return float(
            sum(nd.weight for nd in self.nodes.values() if nd.weight <= self.w_min)
        )

    def forest_rows(self) -> list:
        """JSON-ready node listing in attachment order."""
        return [
            {
                "node": int(z),
                "parent": None if nd.parent is None else int(nd.parent),
                "root": int(nd.root),
                "height": int(nd.height),
                "weight": nd.weight,
            }
            for z, nd in self.nodes.items()
        ]


def run_exposure(
    space: HalfEdgeSpace,
    x: int,
    y: int,
    t: int,
    w_min: float | None = None,
    rng=None,
    on_iteration=None,
) -> ExposureResult:
    """Grow the two-rooted exposure forest for an even horizon ``t``.

    Parameters
    ----------
    on_iteration : callable, optional
        Called after every pairing step with
        ``(iteration, selected, weight, mate, attached, nodes, pairing)``;
        used by tests to replay invariants mid-flight.
    """
    x, y, t = int(x), int(y), int(t)
    if x == y:
        raise NbcutoffError("the two roots must be distinct half-edges")
    if t < 0 or t % 2 != 0:
        raise NbcutoffError(f"horizon t must be even and >= 0, got {t}")
    N = space.N
    if w_min is None:
        w_min = default_min_weight(N)
    rng = ensure_generator(rng, "exposure", x, y, t)
    half_t = t // 2
    he_deg = space.he_deg

    nodes: dict[int, ForestNode] = {
        x: ForestNode(None, x, 0, 1.0),
        y: ForestNode(None, y, 0, 1.0),
    }
    pairing = Pairing(N)
    heap: list = []

    def maybe_select(z: int, height: int, weight: float) -> None:
        if height < half_t and weight > w_min:
            heapq.heappush(heap, (-weight, z))

    maybe_select(x, 0, 1.0)
    maybe_select(y, 0, 1.0)
    tau = 0
    prev_weight = math.inf
    while heap:
        neg_w, z = heapq.heappop(heap)
        if pairing.is_paired(z):
            continue  # got matched as someone else's uniform draw
        weight = -neg_w
        assert weight <= prev_weight + 1e-12, "selected weights must not increase"
        prev_weight = weight
        mate = pair_on_demand(pairing, z, rng)
        tau += 1
        fresh = mate not in nodes and all(
            int(c) not in nodes for c in space.neighbors(mate)
        )
        if fresh:
            child_w = weight / float(he_deg[mate])
            child_h = nodes[z].height + 1
            root = nodes[z].root
            for c in space.neighbors(mate):
                c = int(c)
                nodes[c] = ForestNode(z, root, child_h, child_w)
                maybe_select(c, child_h, child_w)
        if on_iteration is not None:
            on_iteration(tau, z, weight, mate, fresh, nodes, pairing)

    assert tau * w_min <= t + 1e-9, "pairing count exceeded t / w_min"
    h_x = np.array(sorted(
        z for z, nd in nodes.items()
        if nd.height == half_t and nd.root == x and not pairing.is_paired(z)
    ), dtype=np.int64)
    h_y = np.array(sorted(
        z for z, nd in nodes.items()
        if nd.height == half_t and nd.root == y and not pairing.is_paired(z)
    ), dtype=np.int64)
    result = ExposureResult(
        x=x, y=y, t=t, w_min=w_min, nodes=nodes,
        h_x=h_x, h_y=h_y, pairing=pairing, tau=tau,
    )
    assert (result.per_height_weight_sums() <= 2.0 + 1e-9).all(), \
        "per-height weight exceeded the two-root budget"
    return result


@dataclass(frozen=True)
class TruncatedSums:
    """Frontier pair-weight mass split at the truncation ``theta``.

    ``within`` sums ``w(u) w(v)`` over frontier pairs with product <= theta,
    ``excess`` over the rest; together they multiply out to
    ``(sum of H_x weights) * (sum of H_y weights)``.
    """

    within: float
    excess: float
    theta: float


def truncated_sums(result: ExposureResult, theta: float) -> TruncatedSums:
    """Compute the truncated frontier sums in O(|H| log |H|).

    Both frontier weight lists are sorted; a backward-moving boundary over
    the second list splits each row into within/excess in one sweep using
    the exact predicate ``w_u * w_v <= theta`` (bit-identical to the naive
    double loop).
    """
    wu = np.sort(result.frontier_weights(result.x))
    wv = np.sort(result.frontier_weights(result.y))
    if wu.size == 0 or wv.size == 0:
        return TruncatedSums(within=0.0, excess=0.0, theta=float(theta))
    prefix = np.concatenate(([0.0], np.cumsum(wv)))
    total_v = float(prefix[-1])
    within = 0.0
    excess = 0.0
    j = wv.size  # boundary: wv[:j] stays within theta for the current u
    for u in wu:
        while j > 0 and float(u) * float(wv[j - 1]) > theta:
            j -= 1
        within += float(u) * float(prefix[j])
        excess += float(u) * (total_v - float(prefix[j]))
    return TruncatedSums(within=within, excess=excess, theta=float(theta))


def completion_estimate(
    space: HalfEdgeSpace, result: ExposureResult, theta: float, rng=None,
) -> tuple[float, Pairing]:
    """Complete the exposed pairing uniformly and read off the mass bound.

    Returns ``(pt_lower, pairing)`` where ``pt_lower`` sums
    ``w(u) w(mate(u))`` over frontier pairs ``(u, mate(u))`` with ``u`` in
    ``H_x``, ``mate(u)`` in ``H_y`` and product within ``theta``. This is a
    lower bound on the exact transition probability ``P^t(x, mate(y))`` of
    the completed instance. The input ``result`` is not mutated.
    """
    rng = ensure_generator(rng, "completion")
    pairing = complete_uniformly(result.pairing.copy(), rng)
    weight_y = {int(z): result.nodes[int(z)].weight for z in result.h_y}
    pt_lower = 0.0
    for u in result.h_x:
        u = int(u)
        v = int(pairing.mate[u])
        if v in weight_y:
            w_u = result.nodes[u].weight
            prod = w_u * weight_y[v]
            if prod <= theta:
                pt_lower += prod
    return pt_lower, pairing


# --- pair-weight sums under a uniform pairing --------------------------------


def pairing_weight_sum(index_set, weights: np.ndarray, pairing: Pairing) -> float:
    """``sum_{i in index_set} w[i, mate(i)]`` (both orientations count).

    Raises :class:`NotPaired` if any index lacks a mate.
    """
    idx = np.asarray(list(index_set), dtype=np.int64)
    mates = pairing.mate[idx]
    if (mates < 0).any():
        raise NotPaired("every index in the set needs a mate")
    return float(np.asarray(weights)[idx, mates].sum())


def switch(pairing: Pairing, i: int, j: int) -> Pairing:
    """Exchangeable move: re-pair {i, mate(i)}, {j, mate(j)} as {i, j},
    {mate(i), mate(j)}. Returns a new pairing; the input is untouched."""
    i, j = int(i), int(j)
    if i == j:
        raise NbcutoffError("switch needs two distinct indices")
    pi, pj = pairing.mate_of(i), pairing.mate_of(j)
    if pi is None or pj is None:
        raise NotPaired("switch touches only paired half-edges")
    out = pairing.copy()
    if pi == j:  # already partners: the switch is the identity
        return out
    out.mate[i], out.mate[j] = j, i
    out.mate[pi], out.mate[pj] = pj, pi
    return out


def switch_delta(weights: np.ndarray, pairing: Pairing, i: int, j: int) -> float:
    """Closed-form change of :func:`pairing_weight_sum` under ``switch(i, j)``."""
    w = np.asarray(weights)
    pi, pj = pairing.mate_of(int(i)), pairing.mate_of(int(j))
    if pi is None or pj is None:
        raise NotPaired("switch touches only paired half-edges")
    return float(
        w[i, j] + w[j, i] + w[pi, pj] + w[pj, pi]
        - w[i, pi] - w[pi, i] - w[j, pj] - w[pj, j]
    )


def _mean_and_theta(weights: np.ndarray) -> tuple[float, float]:
    w = np.asarray(weights, dtype=np.float64)
    m = w.shape[0]
    off = ~np.eye(m, dtype=bool)
    mean_sum = float(w[off].sum()) / (m - 1)
    sym = w + w.T
    theta_pair = float(sym[off].max())
    return mean_sum, theta_pair


def exhaustive_lower_tail(weights: np.ndarray, a: float) -> dict:
    """Exact ``P(sum <= mean - a)`` over *all* pairings of the index set.

    Feasible for |I| <= 10 or so ((|I|-1)!! pairings). Returns the same
    report shape as :func:`concentration_experiment`.
    """
    w = np.asarray(weights, dtype=np.float64)
    m = w.shape[0]
    mean_sum, theta_pair = _mean_and_theta(w)
    thr = mean_sum - a
    hits = 0
    total = 0
    for matching in enumerate_pairings(range(m)):
        s = sum(w[p, q] + w[q, p] for p, q in matching)
        total += 1
        if s <= thr:
            hits += 1
    prob = hits / total
    bound = math.exp(-a * a / (4.0 * theta_pair * mean_sum))
    return {
        "mode": "exhaustive",
        "size": m,
        "pairings": total,
        "a": float(a),
        "mean_sum": mean_sum,
        "theta_pair": theta_pair,
        "probability": prob,
        "bound": bound,
        "slack": 0.0,
        "pass": prob <= bound,
    }


def concentration_experiment(
    weights: np.ndarray, a: float, trials: int, rng=None,
) -> dict:
    """Monte Carlo lower-tail frequency of the pair-weight sum vs its bound.

    Samples ``trials`` uniform pairings of the index set, measures how often
    the sum falls ``a`` or more below its exact mean, and compares against
    ``exp(-a^2 / (4 theta mean))`` plus a 3-sigma binomial slack.
    """
    rng = ensure_generator(rng, "concentration")
    w = np.asarray(weights, dtype=np.float64)
    m = w.shape[0]
    if m % 2 != 0:
        raise OddResidue("the index set must have even size")
    mean_sum, theta_pair = _mean_and_theta(w)
    thr = mean_sum - a
    hits = 0
    for _ in range(int(trials)):
        perm = rng.permutation(m)
        p, q = perm[0::2], perm[1::2]
        s = float(w[p, q].sum() + w[q, p].sum())
        if s <= thr:
            hits += 1
    emp = hits / trials
    bound = math.exp(-a * a / (4.0 * theta_pair * mean_sum))
    slack = 3.0 * math.sqrt(max(emp * (1.0 - emp), 0.0) / trials)
    return {
        "mode": "monte-carlo",
        "size": m,
        "trials": int(trials),
        "a": float(a),
        "mean_sum": mean_sum,
        "theta_pair": theta_pair,
        "probability": emp,
        "bound": bound,
        "slack": slack,
        "pass": emp <= bound + slack,
    }
