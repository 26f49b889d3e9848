"""Euler-Maruyama integration of the n-family Wright-Fisher diffusion.

A state holds 2n coordinates: fit masses ``y_1..y_n`` then unfit masses
``z_1..z_n``, all nonnegative and summing to 1. The generator is

    1/2 sum_ij x_i (delta_ij - x_j) d_i d_j  +  sum_i b_i d_i

with drift ``b_y = alpha Zbar y + theta0 z - theta1 y`` and
``b_z = -alpha Ybar z + theta1 y - theta0 z`` (``Ybar = sum y``, ``Zbar = sum z``).
Paths are integrated in batches of shape ``(paths, 2n)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import map_replicates, replicate_rng

PATH_CHUNK = 50


@dataclass(frozen=True)
class SdeConfig:
    n: int
    dt: float = 1e-3
    alpha: float = 0.0
    theta0: float = 0.5
    theta1: float = 0.5
    seed: int = 0
    paths: int = 500
    noise: str = "explicit"         # or "eigh"
    mode: str = "transient"         # or "equilibrium"
    projection: str = "family"      # or "clamp"
    y0: float = 0.5                 # initial fit frequency in transient mode
    tol_fix: float = 1e-9

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        for name in ("alpha", "theta0", "theta1"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.noise not in ("explicit", "eigh"):
            raise ValueError(f"unknown noise factorisation {self.noise!r}")
        if self.projection not in ("family", "clamp"):
            raise ValueError(f"unknown projection {self.projection!r}")
        if self.mode not in ("transient", "equilibrium"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.y0 <= 1.0:
            raise ValueError("y0 must lie in [0, 1]")


def drift(x: np.ndarray, alpha: float, theta0: float, theta1: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    y, z = x[..., :n], x[..., n:]
    Y = y.sum(axis=-1, keepdims=True)
    Z = z.sum(axis=-1, keepdims=True)
    by = alpha * Z * y + theta0 * z - theta1 * y
    bz = -alpha * Y * z + theta1 * y - theta0 * z
    return np.concatenate([by, bz], axis=-1)


def covariance(x: np.ndarray, free: bool = False) -> np.ndarray:
    """``a_ij = x_i (delta_ij - x_j)``; over the first 2n-1 coordinates when ``free``."""
    x = np.asarray(x, dtype=float)
    if free:
        x = x[:-1]
    return np.diag(x) - np.outer(x, x)


def noise_increment(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``S xi`` with ``S = diag(sqrt x) - x sqrt(x)^T``, so ``S S^T = diag(x) - x x^T`` on the simplex.

    Batched over leading axes; O(n) per state.
    """
    s = np.sqrt(x)
    return s * xi - x * (s * xi).sum(axis=-1, keepdims=True)


@dataclass
class NoiseStats:
    fallbacks: int = 0


def noise_increment_eigh(x: np.ndarray, xi: np.ndarray, stats: NoiseStats | None = None) -> np.ndarray:
    """Symmetric square root of the covariance with eigenvalues clipped at 0.

    Falls back to independent coordinate noise ``sqrt(x(1-x)) xi`` when the
    decomposition fails.
    """
    x = np.atleast_2d(x)
    xi = np.atleast_2d(xi)
    out = np.empty_like(x)
    for p in range(x.shape[0]):
        a = np.diag(x[p]) - np.outer(x[p], x[p])
        try:
            w, v = np.linalg.eigh(a)
            out[p] = v @ (np.sqrt(np.clip(w, 0.0, None)) * (v.T @ xi[p]))
        except np.linalg.LinAlgError:
            if stats is not None:
                stats.fallbacks += 1
            out[p] = np.sqrt(x[p] * (1 - x[p])) * xi[p]
    return out


def project_clamp(x: np.ndarray) -> np.ndarray:
    """Clamp negative coordinates to 0 and renormalise to unit sum (in place)."""
    np.maximum(x, 0.0, out=x)
    x /= x.sum(axis=-1, keepdims=True)
    return x


def project(x: np.ndarray) -> np.ndarray:
    """Map an Euler update back onto the simplex, keeping family totals where possible (in place).

    A negative fit or unfit coordinate is set to 0 and its deficit is taken
    from the other coordinate of the same family, so family sizes (and hence
    ``phi1``) are untouched. Only a family whose total went negative is reset
    to 0 and the whole vector renormalised. Plain clamping would inject mass
    at every boundary visit of a coordinate and bias ``phi1`` downwards.
    """
    x2 = np.atleast_2d(x)
    n = x2.shape[-1] // 2
    y, z = x2[:, :n], x2[:, n:]
    f = y + z
    dead = f <= 0
    wiped = dead.all(axis=1)
    if wiped.any():
        # no family survives: fall back to clamping, then to the barycentre
        rows = np.maximum(x2[wiped], 0.0)
        rows[rows.sum(axis=1) == 0] = 1.0
        x2[wiped] = rows
        f = y + z
        dead = f <= 0
    ymask = (y < 0) & ~dead
    zmask = (z < 0) & ~dead
    y[ymask] = 0.0
    z[ymask] = f[ymask]
    z[zmask] = 0.0
    y[zmask] = f[zmask]
    y[dead] = 0.0
    z[dead] = 0.0
    x2 /= x2.sum(axis=-1, keepdims=True)
    return x


def em_step(x: np.ndarray, cfg: SdeConfig, rng: np.random.Generator,
            stats: NoiseStats | None = None) -> np.ndarray:
    """One Euler-Maruyama step followed by the simplex projection; returns a new array."""
    x = np.asarray(x, dtype=float)
    xi = rng.standard_normal(x.shape)
    if cfg.noise == "explicit":
        dw = noise_increment(x, xi)
    else:
        dw = noise_increment_eigh(x, xi, stats).reshape(x.shape)
    out = x + drift(x, cfg.alpha, cfg.theta0, cfg.theta1) * cfg.dt + math.sqrt(cfg.dt) * dw
    return project(out) if cfg.projection == "family" else project_clamp(out)


def observables(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(phi1, phi2, phi3)``: squared family sizes and the two selection functionals."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    y, z = x[..., :n], x[..., n:]
    f = y + z
    Y = y.sum(axis=-1, keepdims=True)
    d = y - f * Y
    phi1 = (f * f).sum(axis=-1)
    phi2 = (f * d).sum(axis=-1)
    phi3 = (d * d).sum(axis=-1) - 2 * phi2 * Y[..., 0]
    return phi1, phi2, phi3


def simulate_scalar_wf(y0, alpha: float, theta0: float, theta1: float, t: float, dt: float,
                       rng: np.random.Generator, size=None):
    """Endpoint of a clamped Euler path of ``dY = (-theta1 Y + theta0 (1-Y) + alpha Y (1-Y)) dt + sqrt(Y(1-Y)) dW``."""
    y = np.array(np.broadcast_to(np.asarray(y0, dtype=float), () if size is None else size))
    if np.any((y < 0) | (y > 1)):
        raise ValueError("y0 must lie in [0, 1]")
    steps = int(math.ceil(t / dt - 1e-12)) if t > 0 else 0
    for k in range(steps):
        h = min(dt, t - k * dt)
        b = -theta1 * y + theta0 * (1 - y) + alpha * y * (1 - y)
        y = y + b * h + np.sqrt(y * (1 - y) * h) * rng.standard_normal(y.shape)
        np.clip(y, 0.0, 1.0, out=y)
    return y if y.ndim else float(y)


def thm_key_initial(ybar: np.ndarray, n: int) -> np.ndarray:
    """Every family gets fit mass ``Ybar/n`` and unfit mass ``(1-Ybar)/n``."""
    ybar = np.atleast_1d(np.asarray(ybar, dtype=float))
    x = np.empty((ybar.size, 2 * n))
    x[:, :n] = ybar[:, None] / n
    x[:, n:] = (1 - ybar[:, None]) / n
    return x


@dataclass
class PathRecord:
    times: np.ndarray
    phi1: np.ndarray          # (paths, len(times))
    phi2: np.ndarray
    ybar: np.ndarray
    fixation: np.ndarray      # first time phi1 >= 1 - tol, inf if never
    final: np.ndarray
    fallbacks: int = 0


def integrate_paths(x0: np.ndarray, cfg: SdeConfig, duration: float, rng: np.random.Generator,
                    record_every: int | None = None) -> PathRecord:
    """Integrate a batch of states for ``duration``, tracking fixation of a single family."""
    x = project(np.array(np.atleast_2d(x0), dtype=float))
    steps = int(round(duration / cfg.dt))
    if not math.isclose(steps * cfg.dt, duration, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"duration {duration} is not a multiple of dt={cfg.dt}")
    stats = NoiseStats()
    rec_t, rec1, rec2, recy = [], [], [], []
    n = cfg.n

    def snapshot(t):
        p1, p2, _ = observables(x)
        rec_t.append(t)
        rec1.append(p1)
        rec2.append(p2)
        recy.append(x[:, :n].sum(axis=1))

    fix = np.full(x.shape[0], np.inf)
    p1, _, _ = observables(x)
    fix[p1 >= 1 - cfg.tol_fix] = 0.0
    if record_every:
        snapshot(0.0)
    for k in range(1, steps + 1):
        x = em_step(x, cfg, rng, stats)
        p1 = (np.add(x[:, :n], x[:, n:]) ** 2).sum(axis=1)
        newly = (p1 >= 1 - cfg.tol_fix) & np.isinf(fix)
        fix[newly] = k * cfg.dt
        if record_every and k % record_every == 0:
            snapshot(k * cfg.dt)
    as_arr = (lambda v: np.stack(v, axis=1)) if rec_t else (lambda v: np.empty((x.shape[0], 0)))
    return PathRecord(np.array(rec_t), as_arr(rec1), as_arr(rec2), as_arr(recy), fix, x,
                      stats.fallbacks)


def detect_fixation(times, phi1, tol: float = 1e-9) -> float:
    """First recorded time at which ``phi1 >= 1 - tol``; ``inf`` if none."""
    phi1 = np.asarray(phi1)
    hit = np.flatnonzero(phi1 >= 1 - tol)
    return float(np.asarray(times)[hit[0]]) if hit.size else math.inf


@dataclass
class Estimate:
    mean: float
    stderr: float
    count: int
    extra: dict = field(default_factory=dict)

    def ci(self, z: float = 2.5758293035489004) -> tuple[float, float]:
        return self.mean - z * self.stderr, self.mean + z * self.stderr

    def as_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "count": self.count, **self.extra}


def _initial_frequencies(cfg: SdeConfig, lead: float, rng: np.random.Generator, size: int) -> np.ndarray:
    if cfg.mode == "equilibrium":
        from .analytics import EquilibriumSpec, sample_equilibrium
        return np.asarray(sample_equilibrium(EquilibriumSpec(cfg.alpha, cfg.theta0, cfg.theta1), rng, size))
    return np.asarray(simulate_scalar_wf(cfg.y0, cfg.alpha, cfg.theta0, cfg.theta1, lead, cfg.dt, rng, size))


def _key_chunk(args):
    cfg, T, h, chunk = args
    rng = replicate_rng(cfg.seed, chunk, stream=7)
    size = min(PATH_CHUNK, cfg.paths - chunk * PATH_CHUNK)
    ybar = _initial_frequencies(cfg, T - h, rng, size)
    res = integrate_paths(thm_key_initial(ybar, cfg.n), cfg, h, rng)
    phi1, phi2, _ = observables(res.final)
    return phi1, phi2, res.fallbacks


class _KeyChunk:
    def __init__(self, cfg, T, h):
        self.args = (cfg, T, h)

    def __call__(self, chunk):
        return _key_chunk((*self.args, chunk))


def thm_key_estimator(cfg: SdeConfig, T: float, h: float, workers: int | None = 1) -> Estimate:
    """Mean of ``phi1`` after running the n-family diffusion for ``h`` from the split initial state.

    The fit frequency at time ``T - h`` comes from the scalar diffusion started
    at ``cfg.y0`` (transient mode) or from the stationary law (equilibrium
    mode). Paths are processed in fixed chunks with their own streams, so the
    result does not depend on ``workers``.
    """
    if not 0 < h < T and cfg.mode == "transient":
        raise ValueError(f"need 0 < h < T, got h={h}, T={T}")
    if not h > 0:
        raise ValueError("h must be > 0")
    chunks = -(-cfg.paths // PATH_CHUNK)
    out = map_replicates(_KeyChunk(cfg, T, h), chunks, workers)
    phi1 = np.concatenate([o[0] for o in out])
    phi2 = np.concatenate([o[1] for o in out])
    fallbacks = sum(o[2] for o in out)
    return Estimate(float(phi1.mean()), float(phi1.std(ddof=1) / math.sqrt(phi1.size)), int(phi1.size),
                    {"phi2_mean": float(phi2.mean()), "noise_fallbacks": int(fallbacks),
                     "n": cfg.n, "dt": cfg.dt})


def neutral_phi1_mean(n: int, t):
    """``E[phi1]`` without selection started from n equal families: ``e^{-t}/n + 1 - e^{-t}``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-t) / n - np.expm1(-t)


def bounding_ode(alpha: float, theta: float, n: int, t, m2bar: float):
    """Closed-form solution ``(f, g)`` of

        f' = 1 - f + 2 alpha g,                         f(0) = 1/n
        g' = -(3 + 2 theta + alpha) g + 4 alpha m2bar,  g(0) = 0
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    t = np.asarray(t, dtype=float)
    k = 3 + 2 * theta + alpha
    c = 4 * alpha * m2bar
    g = c / k * -np.expm1(-k * t)
    K = 2 * alpha * c / k
    et = np.exp(-t)
    f = et / n - np.expm1(-t) + K * (-np.expm1(-t) + (np.exp(-k * t) - et) / (k - 1))
    return f, g


def write_path_summary(path: Path, record: PathRecord) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "t", "phi1", "phi2", "ybar"])
        for p in range(record.phi1.shape[0]):
            for j, t in enumerate(record.times):
                w.writerow([p, repr(float(t)), repr(float(record.phi1[p, j])),
                            repr(float(record.phi2[p, j])), repr(float(record.ybar[p, j]))])
