"""Two-type Moran model with mutation and selection, with genealogical distances.

Rates (N individuals, types in {0, 1}, type 1 is fit):

* resampling: each unordered pair at rate 1; a fair coin picks which of the
  two reproduces (equivalently each ordered pair at rate 1/2),
* selection: each ordered pair ``(i, j)`` at rate ``alpha / N``; ``j`` is
  replaced by an offspring of ``i`` only if ``i`` is fit,
* mutation: each individual at rate ``theta0`` (0 -> 1) and ``theta1`` (1 -> 0).

Events are drawn from the aggregate rate and thinned, so vacuous selection
and mutation events still advance time and appear in the log.

``coal_time[i, j]`` is the time of the most recent common ancestor of ``i``
and ``j``; at time 0 everybody is related, so ``coal_time`` starts at 0 and
the distance ``r_t(i, j) = t - coal_time[i, j]`` never exceeds t.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels
from .stats import EmpiricalCdf


class InvalidParameterError(ValueError):
    pass


class EventKind(IntEnum):
    RESAMPLE = _kernels.RESAMPLE
    SELECT = _kernels.SELECT
    MUTATE_0TO1 = _kernels.MUTATE_0TO1
    MUTATE_1TO0 = _kernels.MUTATE_1TO0


@dataclass(frozen=True)
class ModelParams:
    N: int
    alpha: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    p0: float = 0.5

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidParameterError(f"N must be an integer >= 2, got {self.N}")
        for name in ("alpha", "theta0", "theta1"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be finite and >= 0, got {v}")
        if not 0.0 <= self.p0 <= 1.0:
            raise InvalidParameterError(f"p0 must lie in [0, 1], got {self.p0}")

    @property
    def resample_rate(self) -> float:
        return 0.5 * self.N * (self.N - 1)

    @property
    def selection_rate(self) -> float:
        return self.alpha * (self.N - 1)

    @property
    def total_rate(self) -> float:
        return self.resample_rate + self.selection_rate + self.N * (self.theta0 + self.theta1)


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: EventKind
    source: int | None
    target: int
    effective: bool

    @property
    def is_birth(self) -> bool:
        return self.effective and self.kind in (EventKind.RESAMPLE, EventKind.SELECT)


@dataclass
class EventLog:
    """Append-only, array-backed event log."""

    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    kinds: np.ndarray = field(default_factory=lambda: np.empty(0, np.int8))
    src: np.ndarray = field(default_factory=lambda: np.empty(0, np.int32))
    tgt: np.ndarray = field(default_factory=lambda: np.empty(0, np.int32))
    eff: np.ndarray = field(default_factory=lambda: np.empty(0, np.bool_))

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self) -> Iterator[EventRecord]:
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, k: int) -> EventRecord:
        s = int(self.src[k])
        return EventRecord(float(self.times[k]), EventKind(int(self.kinds[k])),
                           None if s < 0 else s, int(self.tgt[k]), bool(self.eff[k]))

    def arrays(self):
        return self.times, self.kinds, self.src, self.tgt, self.eff

    def append(self, rec: EventRecord) -> None:
        if len(self) and rec.time <= self.times[-1]:
            raise ValueError("event times must be strictly increasing")
        self.extend(EventLog(np.array([rec.time]), np.array([int(rec.kind)], np.int8),
                             np.array([-1 if rec.source is None else rec.source], np.int32),
                             np.array([rec.target], np.int32), np.array([rec.effective])))

    def extend(self, other: "EventLog") -> None:
        self.times = np.concatenate([self.times, other.times])
        self.kinds = np.concatenate([self.kinds, other.kinds])
        self.src = np.concatenate([self.src, other.src])
        self.tgt = np.concatenate([self.tgt, other.tgt])
        self.eff = np.concatenate([self.eff, other.eff])

    def shifted(self, dt: float) -> "EventLog":
        return EventLog(self.times + dt, self.kinds, self.src, self.tgt, self.eff)

    def write_csv(self, path: Path) -> None:
        names = {k.value: k.name.lower() for k in EventKind}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "kind", "source", "target", "effective"])
            for k in range(len(self)):
                s = int(self.src[k])
                w.writerow([repr(float(self.times[k])), names[int(self.kinds[k])],
                            "" if s < 0 else s, int(self.tgt[k]), int(self.eff[k])])


@dataclass
class PopulationState:
    t: float
    types: np.ndarray
    coal_time: np.ndarray
    event_log: EventLog | None = None

    @property
    def N(self) -> int:
        return self.types.size

    def distances(self) -> np.ndarray:
        """Matrix ``r_t(i, j) = t - coal_time[i, j]`` with zero diagonal."""
        r = self.t - self.coal_time
        np.fill_diagonal(r, 0.0)
        return r


def init_population(params: ModelParams, seed: int | np.random.Generator | None = None,
                    keep_log: bool = True) -> PopulationState:
    """Time-0 population: i.i.d. Bernoulli(p0) types, everybody related."""
    rng = np.random.default_rng(seed)
    types = (rng.random(params.N) < params.p0).astype(np.int8)
    return PopulationState(0.0, types, np.zeros((params.N, params.N)),
                           EventLog() if keep_log else None)


def _birth(state: PopulationState, source: int, target: int) -> None:
    c = state.coal_time
    state.types[target] = state.types[source]
    c[target, :] = c[source, :]
    c[:, target] = c[:, source]
    c[source, target] = c[target, source] = state.t
    c[target, target] = state.t


def step_event(state: PopulationState, params: ModelParams, rng: np.random.Generator) -> EventRecord:
    """Apply one (possibly vacuous) event in place and return its record."""
    N = state.N
    if params.N != N:
        raise InvalidParameterError("params.N does not match the population")
    total = params.total_rate
    state.t += rng.exponential(1.0 / total)
    v = rng.random() * total
    if v < params.resample_rate + params.selection_rate:
        kind = EventKind.RESAMPLE if v < params.resample_rate else EventKind.SELECT
        source = int(rng.integers(N))
        target = int(rng.integers(N - 1))
        target += target >= source
        ok = kind == EventKind.RESAMPLE or state.types[source] == 1
        if ok:
            _birth(state, source, target)
        rec = EventRecord(state.t, kind, source, target, bool(ok))
    else:
        target = int(rng.integers(N))
        if v < params.resample_rate + params.selection_rate + N * params.theta0:
            kind, before, after = EventKind.MUTATE_0TO1, 0, 1
        else:
            kind, before, after = EventKind.MUTATE_1TO0, 1, 0
        ok = state.types[target] == before
        if ok:
            state.types[target] = after
        rec = EventRecord(state.t, kind, None, target, bool(ok))
    np.fill_diagonal(state.coal_time, state.t)
    if state.event_log is not None:
        state.event_log.append(rec)
    return rec


def simulate_log(types: np.ndarray, params: ModelParams, duration: float,
                 rng: np.random.Generator, burn_in: float = 0.0, record: bool = True) -> EventLog:
    """Run the type process (in place on ``types``) and log the last ``duration`` units.

    The first ``burn_in`` units change types only. Logged times are measured
    from the end of the burn-in.
    """
    types = np.ascontiguousarray(types)
    if types.dtype != np.int8:
        raise TypeError("types must be an int8 array")
    pieces: list[EventLog] = []
    total = params.total_rate
    for horizon, rec in ((burn_in, False), (duration, record)):
        t = 0.0
        while t < horizon:
            mean = total * (horizon - t)
            size = int(mean + 6.0 * math.sqrt(mean) + 32)
            w = rng.standard_exponential(size)
            u = rng.random(size)
            if rec:
                buf = (np.empty(size), np.empty(size, np.int8), np.empty(size, np.int32),
                       np.empty(size, np.int32), np.empty(size, np.bool_))
            else:
                buf = (np.empty(0), np.empty(0, np.int8), np.empty(0, np.int32),
                       np.empty(0, np.int32), np.empty(0, np.bool_))
            t, used, done = _kernels.moran_events(types, float(params.alpha), float(params.theta0),
                                                  float(params.theta1), t, float(horizon),
                                                  w, u, rec, *buf)
            if rec:
                pieces.append(EventLog(*(a[:used] for a in buf)))
            if done:
                break
    log = EventLog()
    for p in pieces:
        log.extend(p)
    return log


def run_until(state: PopulationState, params: ModelParams, t_end: float,
              rng: np.random.Generator) -> PopulationState:
    """Advance ``state`` to ``t_end``, maintaining ``coal_time`` online.

    Discarding the waiting time that overshoots ``t_end`` is exact because the
    aggregate clock is memoryless.
    """
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} is before the current time {state.t}")
    if t_end == state.t:
        return state
    log = simulate_log(state.types, params, t_end - state.t, rng).shifted(state.t)
    _kernels.replay_coalescence(*log.arrays(), state.coal_time)
    if state.event_log is not None:
        state.event_log.extend(log)
    state.t = t_end
    np.fill_diagonal(state.coal_time, t_end)
    return state


def ancestor(event_log, i: int, t: float, h: float) -> int:
    """Ancestor at time ``h`` of individual ``i`` alive at time ``t``.

    Walks the log backwards from ``t``: whenever the current individual was
    the target of an effective birth at a time in ``(h, t]`` it is replaced by
    the source of that birth.
    """
    if h > t:
        raise ValueError(f"h={h} exceeds t={t}")
    if h < 0:
        raise ValueError("h must be >= 0")
    if isinstance(event_log, EventLog):
        times, kinds, src, tgt, eff = event_log.arrays()
        birth = eff & (kinds <= EventKind.SELECT) & (times > h) & (times <= t)
        idx = np.flatnonzero(birth)
        cur = i
        for k in idx[::-1]:
            if tgt[k] == cur:
                cur = int(src[k])
        return cur
    cur = i
    for rec in reversed(list(event_log)):
        if h < rec.time <= t and rec.is_birth and rec.target == cur:
            cur = rec.source
    return cur


def distance_statistic(state: PopulationState) -> tuple[EmpiricalCdf, EmpiricalCdf]:
    """Empirical laws of ``r_t(i, j)`` over all N^2 ordered pairs and over i != j."""
    r = state.distances()
    iu = np.triu_indices(state.N, 1)
    return EmpiricalCdf(r.ravel()), EmpiricalCdf(r[iu])


def type_frequency(state: PopulationState) -> float:
    return float(state.types.mean())


# ---------------------------------------------------------------------------
# replicate-level driver used by the experiments


@dataclass
class Replicate:
    """Distances among sampled individuals at the end of one run."""

    distances: np.ndarray   # K x K, zero diagonal
    types: np.ndarray       # all N types at the end of the run
    frequency: float

    @property
    def N(self) -> int:
        return self.types.size

    def off_diagonal(self) -> np.ndarray:
        return self.distances[np.triu_indices(self.distances.shape[0], 1)]

    def off_diagonal_cdf(self, h) -> np.ndarray:
        h = np.atleast_1d(np.asarray(h, dtype=float))
        d = np.sort(self.off_diagonal())
        return np.searchsorted(d, h, side="right") / d.size

    def full_matrix_cdf(self, h) -> np.ndarray:
        """Fraction of all N^2 ordered pairs (diagonal included) with ``r <= h``.

        Equals ``1/N + (1 - 1/N) * off-diagonal fraction``; exact when every
        individual was sampled and unbiased otherwise.
        """
        return 1.0 / self.N + (1.0 - 1.0 / self.N) * self.off_diagonal_cdf(h)


def initial_types(params: ModelParams, rng: np.random.Generator,
                  frequency: float | None = None) -> np.ndarray:
    p = params.p0 if frequency is None else frequency
    return (rng.random(params.N) < p).astype(np.int8)


def run_replicate(params: ModelParams, T: float, rng: np.random.Generator,
                  sample_size: int | None = None, burn_in: float = 0.0,
                  frequency: float | None = None) -> Replicate:
    """One run: burn-in on types only, then a genealogy window of length ``T``.

    Everybody is related at the start of the window. Distances among
    ``sample_size`` distinct random individuals (all when None) are recovered
    by tracing their lineages back through the window's log.
    """
    types = initial_types(params, rng, frequency)
    log = simulate_log(types, params, T, rng, burn_in=burn_in)
    N = params.N
    if sample_size is None or sample_size >= N:
        sample = np.arange(N)
    else:
        sample = np.sort(rng.choice(N, size=sample_size, replace=False))
    coal = _kernels.trace_coalescence(*log.arrays(), N, sample.astype(np.int64))
    dist = T - coal
    np.fill_diagonal(dist, 0.0)
    return Replicate(dist, types, float(types.mean()))
