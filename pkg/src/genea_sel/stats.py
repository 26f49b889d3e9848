"""Empirical distribution functions, DKW bands and CDF comparisons."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def dkw_band(m: float, delta: float) -> float:
    """Half-width ``eps`` with ``P(sup|F_m - F| > eps) <= delta`` (Massart's constant)."""
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * m))


class EmpiricalCdf:
    """Right-continuous step CDF of a sample.

    ``effective_m`` is the number of independent draws behind the sample and
    is what the confidence band uses. It defaults to the sample size; pass the
    replicate count when each replicate contributes several correlated values
    (e.g. many pairs from one genealogy).
    """

    def __init__(self, samples, effective_m: float | None = None):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("empty sample")
        if np.isnan(x).any():
            raise ValueError("sample contains NaN")
        self.samples = x
        self.effective_m = float(x.size if effective_m is None else effective_m)

    @property
    def m(self) -> int:
        return self.samples.size

    def query(self, h):
        """Fraction of samples ``<= h`` (vectorised)."""
        return np.searchsorted(self.samples, h, side="right") / self.m

    __call__ = query

    def band(self, delta: float = 0.01) -> float:
        return dkw_band(self.effective_m, delta)

    def mean(self) -> float:
        return float(self.samples.mean())

    def is_valid(self) -> bool:
        """Monotone, within [0, 1], with limits 0 and 1."""
        grid = np.concatenate([[-np.inf], self.samples, [np.inf]])
        q = self.query(grid)
        return bool(q[0] == 0.0 and q[-1] == 1.0 and np.all(np.diff(q) >= 0)
                    and np.all((q >= 0) & (q <= 1)))

    def sup_distance(self, cdf, lo: float = -np.inf, hi: float = np.inf) -> float:
        """``sup_h |F_m(h) - cdf(h)|`` over ``[lo, hi]`` for a continuous ``cdf``.

        Both one-sided limits of the step function are checked at every jump.
        """
        x = self.samples[(self.samples >= lo) & (self.samples <= hi)]
        pts = np.concatenate([x, [lo, hi]])
        pts = pts[np.isfinite(pts)]
        if pts.size == 0:
            return 0.0
        f = np.asarray(cdf(pts), dtype=float)
        right = self.query(pts)
        left = np.searchsorted(self.samples, pts, side="left") / self.m
        inside = (pts > lo) if np.isfinite(lo) else np.ones_like(pts, bool)
        d = np.abs(right - f).max()
        if inside.any():
            d = max(d, np.abs(left[inside] - f[inside]).max())
        return float(d)


@dataclass(frozen=True)
class DominanceVerdict:
    passed: bool
    max_violation: float
    at: float
    slack: float

    def as_dict(self) -> dict:
        return {"passed": self.passed, "max_violation": self.max_violation,
                "at": self.at, "slack": self.slack}


def default_slack(F: EmpiricalCdf, G: EmpiricalCdf, delta: float = 0.01) -> float:
    return 2.0 * (F.band(delta) + G.band(delta))


def dominance_check(F: EmpiricalCdf, G: EmpiricalCdf, slack: float | None = None,
                    delta: float = 0.01) -> DominanceVerdict:
    """Test ``F(h) >= G(h)`` for all h, i.e. the F-variable is stochastically smaller.

    The largest violation ``G - F`` is taken over the merged order statistics,
    where both step functions attain every value they take.
    """
    if slack is None:
        slack = default_slack(F, G, delta)
    grid = np.union1d(F.samples, G.samples)
    gap = G.query(grid) - F.query(grid)
    k = int(np.argmax(gap))
    worst = max(0.0, float(gap[k]))
    return DominanceVerdict(worst <= slack, worst, float(grid[k]), float(slack))


def laplace_estimate(F: EmpiricalCdf, lam: float) -> tuple[float, float]:
    """Sample mean of ``exp(-2 lam R)`` and its standard error.

    The factor 2 matches the convention of measuring distances as twice the
    time to the most recent common ancestor in the Laplace expansion.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    v = np.exp(-2.0 * lam * F.samples)
    se = float(v.std(ddof=1) / math.sqrt(F.effective_m)) if F.m > 1 else 0.0
    return float(v.mean()), se


def crossing_scan(F: EmpiricalCdf, G: EmpiricalCdf, delta: float = 0.01) -> list[tuple[float, float]]:
    """Intervals on which ``F - G`` changes sign beyond the combined DKW band.

    A point counts as significantly positive (negative) when ``F - G`` exceeds
    (falls below) the band; a crossing is reported between consecutive
    significant points of opposite sign.
    """
    band = F.band(delta) + G.band(delta)
    grid = np.union1d(F.samples, G.samples)
    d = F.query(grid) - G.query(grid)
    sign = np.where(d > band, 1, np.where(d < -band, -1, 0))
    idx = np.flatnonzero(sign)
    out = []
    for a, b in zip(idx[:-1], idx[1:]):
        if sign[a] != sign[b]:
            out.append((float(grid[a]), float(grid[b])))
    return out


def write_cdf_table(path: Path, grid, cdfs: dict[str, EmpiricalCdf], delta: float = 0.01) -> None:
    """CSV with columns ``h``, then per CDF ``<name>`` and ``<name>_band``."""
    grid = np.asarray(grid, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["h"]
        for name in cdfs:
            header += [name, f"{name}_band"]
        w.writerow(header)
        cols = {name: F.query(grid) for name, F in cdfs.items()}
        bands = {name: F.band(delta) for name, F in cdfs.items()}
        for i, h in enumerate(grid):
            row = [repr(float(h))]
            for name in cdfs:
                row += [repr(float(cols[name][i])), repr(bands[name])]
            w.writerow(row)


def read_cdf_table(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, i] for i, name in enumerate(header)}


def cdf_table_is_valid(table: dict[str, np.ndarray]) -> bool:
    """Every non-band column is nondecreasing in h and lies in [0, 1]."""
    h = table["h"]
    if np.any(np.diff(h) <= 0):
        return False
    for name, col in table.items():
        if name == "h" or name.endswith("_band"):
            continue
        if np.any(col < 0) or np.any(col > 1) or np.any(np.diff(col) < 0):
            return False
    return True
