"""Replicate drivers shared by the command line and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytics import EquilibriumSpec, neutral_cdf, sample_equilibrium, upper_bound_curve
from .families import estimate_cdf_via_families
from .moran import ModelParams, run_replicate
from .rng import map_replicates, replicate_rng
from .stats import EmpiricalCdf, dkw_band, dominance_check
from .wf import Estimate, SdeConfig, integrate_paths, observables, thm_key_estimator, thm_key_initial

Z99 = 2.5758293035489004
DEFAULT_EQUILIBRIUM_BURN_IN = 5.0


class _MoranReplicate:
    def __init__(self, params, T, seed, sample_size, burn_in, equilibrium, stream):
        self.args = (params, T, seed, sample_size, burn_in, equilibrium, stream)

    def __call__(self, i):
        params, T, seed, sample_size, burn_in, equilibrium, stream = self.args
        rng = replicate_rng(seed, i, stream)
        freq = None
        if equilibrium:
            spec = EquilibriumSpec(params.alpha, params.theta0, params.theta1)
            freq = float(sample_equilibrium(spec, rng))
        rep = run_replicate(params, T, rng, sample_size=sample_size, burn_in=burn_in, frequency=freq)
        return rep.off_diagonal(), rep.frequency


@dataclass
class MoranRun:
    """Off-diagonal distances of the sampled pairs, one array per replicate."""

    params: ModelParams
    T: float
    pairs: list
    frequencies: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def replicates(self) -> int:
        return len(self.pairs)

    def pooled(self) -> EmpiricalCdf:
        """Pooled pair distances; the band uses the replicate count as sample size."""
        return EmpiricalCdf(np.concatenate(self.pairs), effective_m=self.replicates)

    def replicate_cdfs(self, h) -> np.ndarray:
        h = np.atleast_1d(np.asarray(h, dtype=float))
        out = np.empty((self.replicates, h.size))
        for r, d in enumerate(self.pairs):
            out[r] = np.searchsorted(np.sort(d), h, side="right") / d.size
        return out

    def estimate(self, h: float, full_matrix: bool = False) -> Estimate:
        """Mean over replicates of the pair fraction with distance ``<= h``."""
        v = self.replicate_cdfs(h)[:, 0]
        if full_matrix:
            N = self.params.N
            v = 1.0 / N + (1.0 - 1.0 / N) * v
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
        return Estimate(float(v.mean()), se, int(v.size))

    def mean_distance(self) -> Estimate:
        v = np.array([d.mean() for d in self.pairs])
        return Estimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size)), int(v.size))


def run_moran(params: ModelParams, T: float, reps: int, seed: int = 0, sample_size: int | None = 16,
              burn_in: float = 0.0, equilibrium: bool = False, workers: int | None = 1,
              stream: int = 1) -> MoranRun:
    """Independent Moran runs with genealogy window ``[0, T]`` after ``burn_in``.

    ``equilibrium`` draws each replicate's initial fit frequency from the
    stationary law of the diffusion (types then i.i.d. given the frequency).
    """
    if reps < 1:
        raise ValueError("need at least one replicate")
    out = map_replicates(_MoranReplicate(params, T, seed, sample_size, burn_in, equilibrium, stream),
                         reps, workers)
    return MoranRun(params, T, [o[0] for o in out], np.array([o[1] for o in out]),
                    {"sample_size": sample_size, "burn_in": burn_in, "equilibrium": equilibrium,
                     "seed": seed, "reps": reps})


def sde_equilibrium_curve(cfg: SdeConfig, h_max: float, record_every: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``E[phi1]`` along paths started from the split state with a stationary fit frequency.

    Since the initial law does not depend on the look-back time, one set of
    paths gives ``P(R <= h)`` for every h on the recording grid.
    Returns ``(h, mean, stderr)``.
    """
    if cfg.mode != "equilibrium":
        raise ValueError("needs an equilibrium-mode configuration")
    rng = replicate_rng(cfg.seed, 0, stream=9)
    ybar = sample_equilibrium(EquilibriumSpec(cfg.alpha, cfg.theta0, cfg.theta1), rng, cfg.paths)
    rec = integrate_paths(thm_key_initial(ybar, cfg.n), cfg, h_max, rng, record_every=record_every)
    return rec.times, rec.phi1.mean(axis=0), rec.phi1.std(axis=0, ddof=1) / math.sqrt(cfg.paths)


def combined_ci_gap(a: Estimate, b: Estimate, z: float = Z99) -> dict:
    gap = a.mean - b.mean
    half = z * math.hypot(a.stderr, b.stderr)
    return {"gap": gap, "half_width": half, "agree": abs(gap) <= half}


def compare_estimators(params: ModelParams, T: float, h_values, reps: int, sde_n=(16, 32, 64),
                       dt: float = 1e-3, sde_paths: int = 500, seed: int = 0,
                       workers: int | None = 1) -> dict:
    """Distance matrix vs family chain (same finite N) and vs the n-family diffusion.

    The matrix and family routes estimate ``P(R_{T+h} <= h)`` including the
    diagonal. The diffusion estimates the large-population ``P(R_{T+h} <= h)``
    and is compared with the matrix route without the diagonal.
    """
    report = {"params": params.__dict__, "T": T, "reps": reps, "rows": []}
    for h in h_values:
        mrun = run_moran(params, T + h, reps, seed=seed, sample_size=None, workers=workers, stream=11)
        matrix_full = mrun.estimate(h, full_matrix=True)
        matrix_off = mrun.estimate(h)
        fam = estimate_cdf_via_families(params, T, h, reps, seed=seed, workers=workers)
        row = {"h": h, "matrix_full": matrix_full.as_dict(), "matrix_offdiag": matrix_off.as_dict(),
               "family": fam.as_dict(), "matrix_vs_family": combined_ci_gap(matrix_full, fam),
               "neutral": float(neutral_cdf(h, T + h)), "sde": []}
        for n in sde_n:
            cfg = SdeConfig(n=n, dt=dt, alpha=params.alpha, theta0=params.theta0, theta1=params.theta1,
                            seed=seed, paths=sde_paths, y0=params.p0)
            est = thm_key_estimator(cfg, T + h, h, workers=workers)
            row["sde"].append({"n": n, **est.as_dict(), "vs_matrix": combined_ci_gap(est, matrix_off)})
        report["rows"].append(row)
    return report


def alpha_sweep(alphas, N: int, T: float, reps: int, theta: float = 0.5, seed: int = 0,
                sample_size: int = 16, burn_in: float = DEFAULT_EQUILIBRIUM_BURN_IN,
                workers: int | None = 1, delta: float = 0.01) -> dict:
    """Equilibrium distance laws for several selection strengths.

    For every alpha: dominance over alpha = 0, the check against the
    large-selection upper curve (alpha >= 5) and the mean distance.
    """
    runs = {}
    for a in alphas:
        p = ModelParams(N, float(a), theta, theta)
        runs[float(a)] = run_moran(p, T, reps, seed=seed, sample_size=sample_size, burn_in=burn_in,
                                   equilibrium=True, workers=workers, stream=21)
    report = {"N": N, "T": T, "reps": reps, "theta": theta, "rows": []}
    base = runs.get(0.0)
    for a, run in runs.items():
        F = run.pooled()
        row = {"alpha": a, "mean_distance": run.mean_distance().as_dict(),
               "band": F.band(delta)}
        if base is not None and a > 0:
            row["dominance"] = dominance_check(F, base.pooled(), delta=delta).as_dict()
        if a >= 5:
            grid = np.linspace(0, T, 601)
            excess = F.query(grid) - upper_bound_curve(grid, a, theta)
            row["upper_curve_max_excess"] = float(excess.max())
            row["upper_curve_ok"] = bool(excess.max() <= F.band(delta))
        report["rows"].append(row)
    return {"report": report, "runs": runs}


def sandwich_check(F: EmpiricalCdf, alpha: float, theta: float, h_max: float,
                   delta: float = 0.01) -> dict:
    """``neutral - band <= F <= upper curve + band`` on ``[0, h_max]``.

    Both sides are step-versus-continuous comparisons, so they are checked at
    every jump of F (both one-sided limits) and at the interval ends.
    """
    band = F.band(delta)
    x = F.samples[(F.samples >= 0) & (F.samples <= h_max)]
    pts = np.unique(np.concatenate([x, [0.0, h_max]]))
    right = F.query(pts)
    left = np.searchsorted(F.samples, pts, side="left") / F.m
    low = float(np.max(neutral_cdf(pts) - np.minimum(left, right)))
    high = float(np.max(right - upper_bound_curve(pts, alpha, theta)))
    return {"band": band, "max_below_neutral": low, "max_above_upper": high,
            "passed": low <= band and high <= band}


__all__ = [
    "MoranRun", "run_moran", "sde_equilibrium_curve", "compare_estimators", "alpha_sweep",
    "sandwich_check", "combined_ci_gap", "dkw_band",
]
