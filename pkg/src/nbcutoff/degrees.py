"""Degree sequences and the statistics that drive mixing predictions.

A degree sequence ``d_0, ..., d_{n-1}`` (all ``d_v >= 3`` unless explicitly
overridden) defines ``N = sum(d_v)`` half-edges. The walk analysed by this
package moves between half-edges, and the quantities controlling its mixing
behaviour are degree-weighted moments of ``log(d_v - 1)``:

    mu     = (1/N) * sum_v d_v * log(d_v - 1)
    sigma2 = (1/N) * sum_v d_v * (log(d_v - 1) - mu)**2
    rho    = (1/N) * sum_v d_v * |log(d_v - 1) - mu|**3

From these, the predicted mixing window is centred at ``t_star = log(N)/mu``
with width ``omega_star = sqrt(sigma2 * log(N) / mu**3)``, and the limiting
distance profile is the standard normal tail.

Moments are accumulated per distinct degree value with exact compensated
summation (:func:`math.fsum`), so the results are independent of vertex
order and reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .errors import (
    DegenerateStats,
    DegreeTooSmall,
    OddHalfEdgeCount,
    ParityRetriesExhausted,
    QuantileOutOfRange,
    UnsupportedDegree,
)
from .rng import ensure_generator

MIN_DEGREE = 3


@dataclass(frozen=True)
class DegreeSequence:
    """A validated degree sequence.

    Attributes
    ----------
    degrees : np.ndarray
        Integer degrees, one per vertex (not necessarily sorted).
    """

    degrees: np.ndarray

    @property
    def n(self) -> int:
        """Number of vertices."""
        return int(self.degrees.size)

    @property
    def N(self) -> int:
        """Number of half-edges (sum of degrees)."""
        return int(self.degrees.sum())

    @property
    def delta(self) -> int:
        """Maximum degree."""
        return int(self.degrees.max())

    def counts(self) -> dict[int, int]:
        """Histogram of degree values, keyed by degree."""
        values, counts = np.unique(self.degrees, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def validate(degrees, allow_small: bool = False) -> DegreeSequence:
    """Check a raw degree list and wrap it in a :class:`DegreeSequence`.

    Parameters
    ----------
    degrees : array_like of int
        One degree per vertex.
    allow_small : bool
        Permit degrees 1 and 2. Off by default because the mixing theory
        assumes minimum degree 3; turn it on only for diagnostics.

    Raises
    ------
    OddHalfEdgeCount
        If the degree sum is odd (no pairing of half-edges exists).
    DegreeTooSmall
        If some degree is below 3 and ``allow_small`` is not set, or below
        1 in any case.
    """
    arr = np.asarray(degrees, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise DegenerateStats("need a non-empty 1-d sequence of degrees")
    floor = 1 if allow_small else MIN_DEGREE
    if arr.min() < floor:
        v = int(np.argmin(arr))
        raise DegreeTooSmall(
            f"vertex {v} has degree {int(arr[v])} < {floor}"
            + ("" if allow_small else " (pass allow_small=True to override)")
        )
    if int(arr.sum()) % 2 != 0:
        raise OddHalfEdgeCount(f"degree sum {int(arr.sum())} is odd")
    return DegreeSequence(arr)


@dataclass(frozen=True)
class DegreeStats:
    """Degree-weighted log-moments of a sequence.

    ``mu``, ``sigma2`` and ``rho`` are the first, second central and third
    absolute central moments of ``log(deg - 1)`` under the half-edge
    (size-biased) law; see the module docstring.
    """

    n: int
    N: int
    delta: int
    mu: float
    sigma2: float
    rho: float

    def to_record(self) -> dict:
        """Flat JSON-ready record with fixed keys."""
        return {
            "n": self.n,
            "N": self.N,
            "delta": self.delta,
            "mu": self.mu,
            "sigma2": self.sigma2,
            "rho": self.rho,
        }


def stats(seq: DegreeSequence) -> DegreeStats:
    """Compute :class:`DegreeStats` for a validated sequence.

    Accumulation is grouped by distinct degree value and summed with
    :func:`math.fsum`, so permuting the vertices changes nothing, exactly.
    """
    values, counts = np.unique(seq.degrees, return_counts=True)
    if values[0] < 2:
        raise DegenerateStats(
            "log(deg - 1) is undefined at degree 1; stats need min degree >= 2"
        )
    N = float(seq.N)
    logs = [math.log(int(v) - 1) for v in values]
    weights = [int(c) * int(v) for c, v in zip(counts, values)]
    mu = math.fsum(w * lg for w, lg in zip(weights, logs)) / N
    sigma2 = math.fsum(w * (lg - mu) ** 2 for w, lg in zip(weights, logs)) / N
    rho = math.fsum(w * abs(lg - mu) ** 3 for w, lg in zip(weights, logs)) / N
    return DegreeStats(
        n=seq.n, N=seq.N, delta=seq.delta, mu=mu, sigma2=sigma2, rho=rho
    )


# --- the limiting profile -------------------------------------------------


def gaussian_tail(lam: float) -> float:
    """Standard normal tail ``P(Z > lam)``.

    This is the limiting shape of the distance profile: distance ~ 1 far
    below the cutoff time (lam -> -inf), ~ 0 far above (lam -> +inf).
    """
    return 0.5 * float(special.erfc(float(lam) / math.sqrt(2.0)))


def gaussian_quantile(eps: float) -> float:
    """Inverse of :func:`gaussian_tail` on (0, 1).

    Returns the lambda with ``gaussian_tail(lambda) = eps``. Decreasing in
    ``eps``; ``gaussian_quantile(0.5) == 0``.
    """
    if not (0.0 < eps < 1.0):
        raise QuantileOutOfRange(f"eps must lie in (0, 1), got {eps!r}")
    return float(special.ndtri(1.0 - float(eps)))


@dataclass(frozen=True)
class CutoffPrediction:
    """Predicted mixing window for one degree sequence.

    ``t_star`` is the predicted cutoff location (in steps), ``omega_star``
    the window width. ``t_mix(eps)`` inverts the profile: the predicted time
    at which the worst-case distance crosses ``eps``.
    """

    t_star: float
    omega_star: float

    def t_mix(self, eps: float) -> float:
        """Predicted eps-mixing time ``t_star + quantile(eps) * omega_star``."""
        return self.t_star + gaussian_quantile(eps) * self.omega_star

    def profile(self, lam: float) -> float:
        """Predicted distance at ``t_star + lam * omega_star``."""
        return gaussian_tail(lam)

    def time_at(self, lam: float) -> float:
        """Map a window coordinate lambda to an absolute time."""
        return self.t_star + lam * self.omega_star


def cutoff_prediction(st: DegreeStats) -> CutoffPrediction:
    """Build the predicted window from degree statistics.

    Raises
    ------
    DegenerateStats
        If ``mu <= 0`` (happens only with degree-2 vertices allowed in),
        or ``N < 2``.
    """
    if st.N < 2:
        raise DegenerateStats("need at least two half-edges")
    if st.mu <= 0.0:
        raise DegenerateStats("mu = 0: every vertex has degree 2, no speed")
    log_n = math.log(st.N)
    t_star = log_n / st.mu
    omega_star = math.sqrt(st.sigma2 * log_n / st.mu**3)
    return CutoffPrediction(t_star=t_star, omega_star=omega_star)


def sparsity_report(
    st: DegreeStats,
    max_degree_ratio: float = 0.1,
    window_ratio_min: float = 10.0,
    lattice_ratio_min: float = 10.0,
) -> dict:
    """Diagnostics for whether a sequence sits in the sparse regime.

    The asymptotic theory behind the Gaussian profile wants (i) the maximum
    degree polynomially small, log(delta)/log(N) -> 0, (ii) a wide window,
    sigma2/mu^3 * log(N) >> (log log N)^2, and (iii) third-moment control,
    sigma^3/(rho*sqrt(mu)) >> 1/sqrt(log N). This reports finite-size proxies
    for all three, with configurable comfort thresholds; the flags are
    advisory and nothing else in the package consults them.
    """
    log_n = math.log(st.N)
    loglog_n = math.log(log_n) if log_n > 1.0 else float("nan")
    degree_ratio = math.log(st.delta) / log_n
    regular = st.sigma2 == 0.0
    if regular:
        window_ratio = 0.0
        lattice_ratio = None
    else:
        window_ratio = st.sigma2 / st.mu**3 * log_n / loglog_n**2
        lattice_ratio = (
            st.sigma2**1.5 / (st.rho * math.sqrt(st.mu)) * math.sqrt(log_n)
        )
    notes = []
    if regular:
        notes.append(
            "regular sequence: omega_star = 0, the window condition fails "
            "and the profile degenerates to a step"
        )
    if degree_ratio > max_degree_ratio:
        notes.append("max degree is large relative to N")
    return {
        "n": st.n,
        "N": st.N,
        "delta": st.delta,
        "degree_ratio": degree_ratio,
        "sparse": degree_ratio <= max_degree_ratio,
        "window_ratio": window_ratio,
        "window_ok": (not regular) and window_ratio >= window_ratio_min,
        "lattice_ratio": lattice_ratio,
        "lattice_ok": (not regular) and lattice_ratio >= lattice_ratio_min,
        "regular": regular,
        "notes": notes,
    }


# --- sampling -------------------------------------------------------------


def sample_iid_degrees(
    pmf: dict[int, float],
    n: int,
    rng=None,
    allow_small: bool = False,
    max_parity_retries: int = 1000,
) -> DegreeSequence:
    """Draw ``n`` degrees IID from ``pmf`` and fix parity by redrawing.

    Parameters
    ----------
    pmf : dict
        Maps degree -> probability. Probabilities must be non-negative and
        sum to 1 within 1e-9.
    n : int
        Number of vertices.
    rng : Generator | int | None
        Generator or root seed.
    allow_small : bool
        Accept support below degree 3.
    max_parity_retries : int
        The last coordinate is redrawn until the degree sum is even, at most
        this many times.

    Raises
    ------
    UnsupportedDegree
        Support below 3 (or below 1 with ``allow_small``), or an invalid pmf.
    ParityRetriesExhausted
        Parity never balanced (e.g. a point mass on an odd degree with odd n).
    """
    rng = ensure_generator(rng, "iid-degrees")
    if n < 1:
        raise DegenerateStats("need n >= 1 vertices")
    support = np.array(sorted(int(d) for d in pmf), dtype=np.int64)
    probs = np.array([float(pmf[int(d)]) for d in support], dtype=np.float64)
    if support.size == 0 or probs.min() < 0.0 or abs(probs.sum() - 1.0) > 1e-9:
        raise UnsupportedDegree("pmf must have non-negative mass summing to 1")
    floor = 1 if allow_small else MIN_DEGREE
    live = support[probs > 0]
    if live.size == 0 or live.min() < floor:
        raise UnsupportedDegree(
            f"pmf support must be >= {floor} (got min {int(live.min()) if live.size else 'none'})"
        )
    draws = rng.choice(support, size=n, p=probs)
    total = int(draws.sum())
    retries = 0
    while total % 2 != 0:
        if retries >= max_parity_retries:
            raise ParityRetriesExhausted(
                f"degree sum still odd after {retries} redraws of the last vertex"
            )
        old = int(draws[-1])
        draws[-1] = rng.choice(support, p=probs)
        total += int(draws[-1]) - old
        retries += 1
    return validate(draws, allow_small=allow_small)


# --- file formats ---------------------------------------------------------


def degrees_from_counts(counts: dict, allow_small: bool = False) -> DegreeSequence:
    """Expand a {degree: count} histogram into a sequence (ascending order)."""
    items = sorted((int(d), int(c)) for d, c in counts.items())
    if any(c < 0 for _, c in items):
        raise DegenerateStats("counts must be non-negative")
    arr = np.repeat(
        np.array([d for d, _ in items], dtype=np.int64),
        np.array([c for _, c in items], dtype=np.int64),
    )
    return validate(arr, allow_small=allow_small)


def load_degrees(path, allow_small: bool = False) -> DegreeSequence:
    """Read a degree sequence from disk.

    Two formats are accepted: a JSON object ``{"counts": {"3": 500, ...}}``,
    or newline-delimited integers (one vertex per line, blank lines ignored).
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        if "counts" not in payload:
            raise DegenerateStats(f"{path}: JSON degree files need a 'counts' key")
        return degrees_from_counts(payload["counts"], allow_small=allow_small)
    values = [int(line) for line in text.split() if line.strip()]
    return validate(values, allow_small=allow_small)


def save_degrees(path, seq: DegreeSequence, fmt: str = "lines") -> None:
    """Write a sequence as newline-delimited ints (``lines``) or counts JSON."""
    p = Path(path)
    if fmt == "lines":
        p.write_text("\n".join(str(int(d)) for d in seq.degrees) + "\n")
    elif fmt == "counts":
        payload = {"counts": {str(d): c for d, c in sorted(seq.counts().items())}}
        p.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ValueError(f"unknown degree file format {fmt!r}")
