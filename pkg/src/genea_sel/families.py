"""Descendant-family decomposition of the Moran population.

At some time every individual founds its own family. Afterwards each family
is described by its numbers of fit and unfit members, which change by single
particles:

* resampling: an ordered pair of distinct individuals (parent, child) at total
  rate ``C(N, 2)``; the child takes the parent's family and type,
* selection: an ordered pair at rate ``alpha / N`` each (total ``alpha (N-1)``),
  effective only when the parent is fit,
* mutation: each individual at rate ``theta0`` (unfit to fit) or ``theta1``
  (fit to unfit); the family is unchanged.

These are exactly the Moran dynamics seen through family labels, so
``sum_i (Y_i + Z_i)^2`` after a time ``h`` has the same mean as the fraction
of ordered pairs (diagonal included) at distance at most ``h``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .moran import InvalidParameterError, ModelParams, initial_types, simulate_log
from .rng import map_replicates, replicate_rng
from .wf import Estimate

DEFAULT_CUTOFF = 50.0


@dataclass
class FamilyState:
    """Integer particle counts: ``counts[:n]`` fit, ``counts[n:]`` unfit members per family."""

    t: float
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1 or self.counts.size % 2:
            raise ValueError("counts must be a flat vector of even length")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.N < 1:
            raise ValueError("empty population")

    @property
    def n(self) -> int:
        return self.counts.size // 2

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def Y(self) -> np.ndarray:
        return self.counts[: self.n] / self.N

    @property
    def Z(self) -> np.ndarray:
        return self.counts[self.n:] / self.N

    def family_totals(self) -> np.ndarray:
        return self.counts[: self.n] + self.counts[self.n:]

    def masses(self) -> list[Fraction]:
        """Exact coordinates ``(Y_1..Y_n, Z_1..Z_n)``."""
        return [Fraction(int(c), self.N) for c in self.counts]

    def nonzero_families(self) -> int:
        return int(np.count_nonzero(self.family_totals()))

    def copy(self) -> "FamilyState":
        return FamilyState(self.t, self.counts.copy())


def init_families_from_population(types) -> FamilyState:
    """Every individual founds its own family (n = N)."""
    types = np.asarray(types).astype(np.int64)
    if types.size == 0:
        raise ValueError("types must be nonempty")
    if np.any((types != 0) & (types != 1)):
        raise ValueError("types must be 0 or 1")
    return FamilyState(0.0, np.concatenate([types, 1 - types]))


def init_split_families(fit: int, N: int, n: int) -> FamilyState:
    """``n`` families sharing ``fit`` fit and ``N - fit`` unfit particles as evenly as possible."""
    if not 0 <= fit <= N or n < 1:
        raise ValueError("need 0 <= fit <= N and n >= 1")
    y = np.full(n, fit // n)
    y[: fit % n] += 1
    z = np.full(n, (N - fit) // n)
    z[n - (N - fit) % n:] += 1
    return FamilyState(0.0, np.concatenate([y, z]))


def family_statistic(state: FamilyState) -> float:
    """``sum_i (Y_i + Z_i)^2``."""
    f = state.family_totals()
    return float(np.dot(f, f)) / state.N ** 2


def family_statistic_exact(state: FamilyState) -> Fraction:
    f = state.family_totals()
    return Fraction(int(np.dot(f, f)), state.N ** 2)


def _rates(params: ModelParams, N: int) -> tuple[float, float, float, float]:
    return 0.5 * N * (N - 1), params.alpha * (N - 1), N * params.theta0, N * params.theta1


def _pick(counts: np.ndarray, r: int, skip: int = -1) -> int:
    acc = 0
    for c in range(counts.size):
        acc += int(counts[c]) - (1 if c == skip else 0)
        if r < acc:
            return c
    raise AssertionError("index beyond population")


def step_family_event(state: FamilyState, params: ModelParams, rng: np.random.Generator) -> str:
    """Apply one (possibly vacuous) event in place; returns its kind.

    Reference implementation of the compiled chain, one event at a time.
    """
    N, n = state.N, state.n
    r_res, r_sel, r_m0, r_m1 = _rates(params, N)
    total = r_res + r_sel + r_m0 + r_m1
    state.t += rng.exponential(1.0 / total)
    v = rng.random() * total
    c = state.counts
    if v < r_res + r_sel:
        kind = "resample" if v < r_res else "select"
        p = _pick(c, int(rng.integers(N)))
        if kind == "select" and p >= n:
            return "select-vacuous"
        ch = _pick(c, int(rng.integers(N - 1)), skip=p)
        c[ch] -= 1
        c[p] += 1
        return kind
    i = _pick(c, int(rng.integers(N)))
    if v < r_res + r_sel + r_m0:
        if i >= n:
            c[i] -= 1
            c[i - n] += 1
            return "mutate0to1"
        return "mutate0to1-vacuous"
    if i < n:
        c[i] -= 1
        c[i + n] += 1
        return "mutate1to0"
    return "mutate1to0-vacuous"


def run_families(state: FamilyState, params: ModelParams, duration: float, rng: np.random.Generator,
                 stop_at_fixation: bool = False) -> float:
    """Advance ``state`` by ``duration`` (compiled chain); returns the fixation time or ``inf``.

    With ``stop_at_fixation`` the run ends at the first time one family holds
    every particle and ``state.t`` is that time.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    N = state.N
    counts = state.counts
    famtot = state.family_totals()
    total = sum(_rates(params, N))
    t0 = state.t
    if famtot.max() == N:
        return t0
    t, horizon = t0, t0 + duration
    fixed = math.inf
    while True:
        mean = total * (horizon - t)
        size = int(mean + 6 * math.sqrt(mean) + 32)
        w = rng.standard_exponential(size)
        u = rng.random(2 * size)
        t, _, done, fx = _kernels.family_events(counts, famtot, float(params.alpha), float(params.theta0),
                                                float(params.theta1), t, horizon, w, u, stop_at_fixation)
        if fx < fixed:
            fixed = fx
        if done:
            break
    state.t = t
    return fixed


def fixation_time(trajectory) -> float:
    """First time in a recorded ``(t, statistic)`` trajectory at which the statistic is 1."""
    for t, stat in trajectory:
        if stat >= 1.0:
            return float(t)
    return math.inf


def sample_fixation_time(params: ModelParams, rng: np.random.Generator,
                         cutoff: float = DEFAULT_CUTOFF, types=None) -> float:
    """Time until one founding family takes over, starting from singletons; ``inf`` past ``cutoff``."""
    if types is None:
        types = initial_types(params, rng)
    state = init_families_from_population(types)
    return run_families(state, params, cutoff, rng, stop_at_fixation=True)


def record_trajectory(state: FamilyState, params: ModelParams, duration: float, every: float,
                      rng: np.random.Generator) -> list[tuple[float, float, int]]:
    """Rows ``(t, family_statistic, nonzero families)`` on a regular time grid."""
    rows = [(state.t, family_statistic(state), state.nonzero_families())]
    steps = int(round(duration / every))
    for _ in range(steps):
        run_families(state, params, every, rng)
        rows.append((state.t, family_statistic(state), state.nonzero_families()))
    return rows


def write_trajectory_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "family_statistic", "nonzero_families"])
        for t, s, k in rows:
            w.writerow([repr(float(t)), repr(float(s)), int(k)])


class _FamilyReplicate:
    def __init__(self, params, T, h, seed, burn_in, frequency):
        self.args = (params, T, h, seed, burn_in, frequency)

    def __call__(self, i):
        params, T, h, seed, burn_in, frequency = self.args
        rng = replicate_rng(seed, i, stream=2)
        types = initial_types(params, rng, frequency(rng) if callable(frequency) else frequency)
        simulate_log(types, params, T, rng, burn_in=burn_in, record=False)
        state = init_families_from_population(types)
        if h > 0:
            run_families(state, params, h, rng)
        return family_statistic(state)


def estimate_cdf_via_families(params: ModelParams, T: float, h: float, replicates: int,
                              seed: int = 0, workers: int | None = 1, burn_in: float = 0.0,
                              frequency: float | Callable | None = None) -> Estimate:
    """Estimate ``P(R_{T+h} <= h)`` as the mean of ``sum_i (Y_i + Z_i)^2``.

    Types evolve for ``burn_in + T``, then every individual founds a family and
    the family chain runs for ``h``.
    """
    if h < 0 or T < 0:
        raise InvalidParameterError("T and h must be >= 0")
    if replicates < 1:
        raise InvalidParameterError("need at least one replicate")
    vals = np.array(map_replicates(_FamilyReplicate(params, T, h, seed, burn_in, frequency),
                                   replicates, workers))
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.inf
    return Estimate(float(vals.mean()), se, int(vals.size))


def jump_generator(phi: Callable[[np.ndarray], float], state: FamilyState, params: ModelParams) -> float:
    """``L^N phi`` at ``state`` by summing rate times increment over every possible jump.

    ``phi`` takes the coordinate vector ``counts / N``.
    """
    c = state.counts.astype(float)
    N, n = state.N, state.n
    x = c / N
    base = phi(x)
    out = 0.0
    m = c.size
    for a in range(m):          # parent coordinate
        if c[a] == 0:
            continue
        for b in range(m):      # child coordinate
            pairs = c[a] * (c[b] - (a == b))
            if pairs <= 0 or a == b:
                continue
            rate = 0.5 * pairs
            if a < n:
                rate += params.alpha / N * pairs
            x2 = x.copy()
            x2[a] += 1 / N
            x2[b] -= 1 / N
            out += rate * (phi(x2) - base)
    for i in range(n):
        for src, dst, th in ((i + n, i, params.theta0), (i, i + n, params.theta1)):
            if c[src] and th:
                x2 = x.copy()
                x2[src] -= 1 / N
                x2[dst] += 1 / N
                out += th * c[src] * (phi(x2) - base)
    return out
