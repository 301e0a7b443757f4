"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: dense matrices, explicit loops, path
enumeration. Nothing imports the package's evolution/selection code paths.
"""

import math

import numpy as np
from scipy import integrate


def space_arrays(degrees):
    """(owner, starts, he_deg) built with plain loops."""
    owner, starts = [], []
    pos = 0
    for v, d in enumerate(degrees):
        starts.append(pos)
        owner.extend([v] * d)
        pos += d
    he_deg = [degrees[v] - 1 for v in owner]
    return owner, starts, he_deg


def dense_kernel(degrees, mate):
    """The one-step transition matrix, straight from the definition."""
    owner, starts, he_deg = space_arrays(degrees)
    N = len(owner)
    P = np.zeros((N, N))
    for x in range(N):
        m = mate[x]
        v = owner[m]
        for y in range(starts[v], starts[v] + degrees[v]):
            if y != m:
                P[x, y] = 1.0 / he_deg[m]
    return P


def dense_distribution(degrees, mate, x, t):
    P = dense_kernel(degrees, mate)
    dist = np.zeros(P.shape[0])
    dist[x] = 1.0
    for _ in range(t):
        dist = dist @ P
    return dist


def tv_to_uniform(vec):
    vec = np.asarray(vec, dtype=float)
    return 0.5 * float(np.abs(vec - 1.0 / vec.size).sum())


def nb_paths(degrees, mate, x, radius):
    """All non-backtracking trajectories of length <= radius from x.

    Returns (paths, visited): the list of trajectories (as tuples) and the
    set of half-edges appearing as endpoints. The ball is a tree exactly
    when len(paths) == len({endpoints}).
    """
    owner, starts, _ = space_arrays(degrees)
    frontier = [(x,)]
    paths = [(x,)]
    for _ in range(radius):
        nxt = []
        for p in frontier:
            m = mate[p[-1]]
            v = owner[m]
            for y in range(starts[v], starts[v] + degrees[v]):
                if y != m:
                    nxt.append(p + (y,))
        paths.extend(nxt)
        frontier = nxt
    endpoints = set(p[-1] for p in paths)
    return paths, endpoints


def gaussian_tail_quad(lam):
    """Normal tail by direct quadrature of the density."""
    density = lambda u: math.exp(-u * u / 2.0) / math.sqrt(2.0 * math.pi)
    if lam >= 0:
        val, _ = integrate.quad(density, lam, np.inf)
        return val
    val, _ = integrate.quad(density, -np.inf, lam)
    return 1.0 - val


def truncated_sums_bruteforce(wu, wv, theta):
    """Quadratic double loop over frontier weight pairs."""
    within = 0.0
    excess = 0.0
    for a in wu:
        for b in wv:
            if a * b <= theta:
                within += a * b
            else:
                excess += a * b
    return within, excess


def all_pairings(items):
    """Recursive enumeration of perfect matchings (independent copy)."""
    items = sorted(items)
    if not items:
        return [()]
    if len(items) % 2:
        raise ValueError("odd set")
    first, rest = items[0], items[1:]
    out = []
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        for sub in all_pairings(remaining):
            out.append(((first, partner),) + sub)
    return out


def pairing_key_from_matching(matching, N):
    """Canonical mate-tuple for a matching given as (a, b) pairs."""
    mate = [-1] * N
    for a, b in matching:
        mate[a] = b
        mate[b] = a
    return tuple(mate)


def random_instance(rng, n_max=16, deg_values=(3, 4, 5, 6), n_min=4):
    """A random degree list with even sum, drawn from deg_values."""
    n = int(rng.integers(n_min, n_max + 1))
    degs = [int(rng.choice(deg_values)) for _ in range(n)]
    if sum(degs) % 2:
        degs[-1] += 1 if degs[-1] + 1 in deg_values else -1
    return degs


# frozen reference instance: the complete graph K4 as a pairing of [3,3,3,3]
K4_DEGREES = [3, 3, 3, 3]
K4_MATE = [3, 6, 9, 0, 7, 10, 1, 4, 11, 2, 5, 8]
