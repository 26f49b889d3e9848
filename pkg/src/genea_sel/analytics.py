"""Closed-form laws for the pairwise genealogical distance and the type frequency.

* neutral law of the distance with a finite time horizon,
* second-order small-selection correction ``tau`` (equilibrium, theta0 = theta1 = 1/2),
* Laplace transform of the small-selection expansion (distance doubled),
* stationary density of the scalar Wright-Fisher diffusion, its first two
  moments of ``1 - Y`` and an inverse-CDF sampler,
* the large-selection upper curve ``(1 - e^{-h})(1 + 4(theta + 2 theta^2)/alpha)``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate


class ExpansionValidityWarning(UserWarning):
    """The small-alpha expansion is used outside the regime where it is accurate."""


class UnsupportedParameterError(ValueError):
    pass


SMALL_ALPHA_LIMIT = 0.5

# tau(h) = c8 e^{-8h} + c1h h e^{-h} + c3 e^{-3h} + c1 e^{-h}
TAU_COEFFS = {
    "exp8": Fraction(-1, 735),
    "h_exp1": Fraction(1, 42),
    "exp3": Fraction(1, 60),
    "exp1": Fraction(-3, 196),
}


def neutral_cdf(h, t: float = math.inf):
    """``P(R_t <= h)`` without selection: ``1 - e^{-h}`` below the horizon ``t``, 1 from ``t`` on."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be >= 0")
    out = np.where(h >= t, 1.0, -np.expm1(-h))
    return out if out.ndim else float(out)


def tau_at_zero_exact() -> Fraction:
    """``tau(0)`` in exact rational arithmetic (the ``h e^{-h}`` term vanishes)."""
    c = TAU_COEFFS
    return c["exp8"] + c["exp3"] + c["exp1"]


def tau(h):
    """Coefficient of ``alpha^2`` in the equilibrium distance CDF."""
    h = np.asarray(h, dtype=float)
    c = {k: float(v) for k, v in TAU_COEFFS.items()}
    e1 = np.exp(-h)
    out = c["exp8"] * np.exp(-8 * h) + c["h_exp1"] * h * e1 + c["exp3"] * np.exp(-3 * h) + c["exp1"] * e1
    return out if out.ndim else float(out)


def tau_prime(h):
    """Derivative of ``tau``, written out term by term."""
    h = np.asarray(h, dtype=float)
    e1 = np.exp(-h)
    out = (8 / 735 * np.exp(-8 * h) - h * e1 / 42 + e1 / 42
           - np.exp(-3 * h) / 20 + 3 * e1 / 196)
    return out if out.ndim else float(out)


def expansion_is_valid(alpha: float) -> bool:
    return abs(alpha) <= SMALL_ALPHA_LIMIT


def _advise(alpha: float) -> None:
    if not expansion_is_valid(alpha):
        warnings.warn(f"small-alpha expansion used at alpha={alpha} > {SMALL_ALPHA_LIMIT}",
                      ExpansionValidityWarning, stacklevel=3)


def small_alpha_cdf(h, alpha: float):
    """``P(R <= h) ~ 1 - e^{-h} + alpha^2 tau(h)`` in equilibrium with theta0 = theta1 = 1/2."""
    _advise(alpha)
    return neutral_cdf(h) + alpha * alpha * tau(h)


def small_alpha_density(h, alpha: float):
    _advise(alpha)
    h = np.asarray(h, dtype=float)
    out = np.exp(-h) + alpha * alpha * np.asarray(tau_prime(h))
    return out if out.ndim else float(out)


def laplace_expansion(lam: float, alpha: float) -> float:
    """``E[exp(-2 lam R)]`` to second order in alpha."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return 1.0 / (1 + 2 * lam) + alpha ** 2 * lam / (3 * (4 + lam) * (3 + 2 * lam) * (1 + 2 * lam) ** 2)


def upper_bound_curve(h, alpha: float, theta: float):
    """Large-selection upper curve ``(1 - e^{-h})(1 + 4(theta + 2 theta^2)/alpha)``, capped at 1."""
    if not alpha > 0:
        raise ValueError("the upper curve is an expansion in 1/alpha; alpha must be > 0")
    h = np.asarray(h, dtype=float)
    out = np.minimum(1.0, -np.expm1(-h) * (1 + 4 * (theta + 2 * theta * theta) / alpha))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# stationary law of the type frequency


@dataclass(frozen=True)
class EquilibriumSpec:
    alpha: float
    theta0: float = 0.5
    theta1: float = 0.5
    grid_size: int = 20001

    def __post_init__(self):
        if not (self.theta0 > 0 and self.theta1 > 0):
            raise UnsupportedParameterError("the stationary density needs theta0, theta1 > 0")
        if self.alpha < 0:
            raise UnsupportedParameterError("alpha must be >= 0")
        if self.grid_size < 3:
            raise UnsupportedParameterError("grid_size must be >= 3")

    @property
    def exponents(self) -> tuple[float, float]:
        return 2 * self.theta0 - 1, 2 * self.theta1 - 1


def _kernel(x, spec: EquilibriumSpec):
    # unnormalised density, scaled by e^{-2 alpha} so large alpha does not overflow
    a, b = spec.exponents
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(a * np.log(x) + b * np.log1p(-x) + 2 * spec.alpha * (x - 1))


def _piece(spec: EquilibriumSpec, k: int, lo: float, hi: float) -> float:
    # singular endpoint factors go into scipy's algebraic weight, the rest is smooth
    a, b = spec.exponents
    b = b + k
    wa = a if lo == 0.0 else 0.0
    wb = b if hi == 1.0 else 0.0

    def f(x):
        v = math.exp(2 * spec.alpha * (x - 1))
        if lo != 0.0:
            v *= x ** a
        if hi != 1.0:
            v *= (1 - x) ** b
        return v

    if wa == 0.0 and wb == 0.0:
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
    else:
        val, _ = integrate.quad(f, lo, hi, weight="alg", wvar=(wa, wb),
                                epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def _weighted_integral(spec: EquilibriumSpec, k: int = 0, lo: float = 0.0, hi: float = 1.0) -> float:
    """``int_lo^hi (1-x)^k x^a (1-x)^b e^{2 alpha (x-1)} dx`` over a subinterval of [0, 1]."""
    edges = [lo, hi]
    if spec.alpha > 5:
        # the mass sits within a few multiples of 1/alpha of x = 1
        edges += [1 - c / spec.alpha for c in (40, 10, 3, 1)]
    edges = sorted({e for e in edges if lo <= e <= hi})
    return sum(_piece(spec, k, a, b) for a, b in zip(edges[:-1], edges[1:]))


@lru_cache(maxsize=64)
def _normaliser(spec: EquilibriumSpec) -> float:
    return _weighted_integral(spec)


def equilibrium_density(x, spec: EquilibriumSpec):
    """Stationary density ``x^{2 theta0 - 1} (1-x)^{2 theta1 - 1} e^{2 alpha x}``, normalised."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("x must lie in (0, 1)")
    out = _kernel(x, spec) / _normaliser(spec)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EquilibriumMoments:
    m1: float               # E[1 - Y]
    m2: float               # E[(1 - Y)^2]
    method: str
    alpha_m1_limit: float   # limit of alpha * m1 as alpha grows (theta0 = theta1)
    alpha2_m2_limit: float  # limit of alpha^2 * m2

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def moments_closed_form(alpha: float) -> tuple[float, float]:
    """``E[1-Y]`` and ``E[(1-Y)^2]`` at theta0 = theta1 = 1/2."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0:
        return 0.5, 1.0 / 3.0
    em = math.expm1(2 * alpha)
    m1 = 0.5 * (1 / alpha - 2 / em)
    m2 = 0.5 * (1 / alpha ** 2 - 2 * (alpha + 1) / (alpha * em))
    return m1, m2


def moments_quadrature(alpha: float, theta0: float, theta1: float) -> tuple[float, float]:
    spec = EquilibriumSpec(alpha, theta0, theta1)
    z = _normaliser(spec)
    return _weighted_integral(spec, 1) / z, _weighted_integral(spec, 2) / z


def equilibrium_moments(alpha: float, theta0: float = 0.5, theta1: float = 0.5,
                        method: str = "auto") -> EquilibriumMoments:
    """Moments of ``1 - Y`` under the stationary law.

    ``auto`` uses the closed form at theta0 = theta1 = 1/2 (away from alpha = 0
    where it cancels badly) and quadrature otherwise.
    """
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    half = theta0 == 0.5 and theta1 == 0.5
    if method == "closed" and not half:
        raise UnsupportedParameterError("the closed form needs theta0 = theta1 = 1/2")
    use_closed = method == "closed" or (method == "auto" and half and (alpha == 0 or alpha >= 1e-2))
    if use_closed:
        m1, m2 = moments_closed_form(alpha)
        used = "closed"
    else:
        m1, m2 = moments_quadrature(alpha, theta0, theta1)
        used = "quadrature"
    th = theta0 if theta0 == theta1 else float("nan")
    return EquilibriumMoments(m1, m2, used, th, th * th + th / 2)


class EquilibriumSampler:
    """Inverse-CDF sampler of the stationary frequency on a tabulated grid.

    Interior cells are integrated by Gauss-Legendre, the two end cells (where
    the density may be singular) by weighted adaptive quadrature. Sampling
    interpolates the inverse CDF linearly.
    """

    def __init__(self, spec: EquilibriumSpec, order: int = 8):
        self.spec = spec
        grid = np.linspace(0.0, 1.0, spec.grid_size)
        nodes, weights = np.polynomial.legendre.leggauss(order)
        lo, hi = grid[1:-2], grid[2:-1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        interior = (_kernel(pts, spec) * weights[None, :]).sum(axis=1) * half
        first = _weighted_integral(spec, 0, 0.0, grid[1])
        last = _weighted_integral(spec, 0, grid[-2], 1.0)
        mass = np.concatenate([[first], interior, [last]])
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        self.total = float(cdf[-1])
        self.grid = grid
        self.cdf = cdf / cdf[-1]

    def cdf_at(self, x):
        return np.interp(x, self.grid, self.cdf)

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        return np.interp(u, self.cdf, self.grid)


@lru_cache(maxsize=16)
def equilibrium_sampler(spec: EquilibriumSpec) -> EquilibriumSampler:
    return EquilibriumSampler(spec)


def sample_equilibrium(spec: EquilibriumSpec, rng: np.random.Generator, size=None):
    return equilibrium_sampler(spec).sample(rng, size)


def write_curves_csv(path: Path, h_grid, alpha: float, theta: float = 0.5,
                     horizon: float = math.inf) -> None:
    """Columns ``h, neutral, small_alpha, upper_bound`` (the last empty at alpha = 0)."""
    h_grid = np.asarray(h_grid, dtype=float)
    neutral = neutral_cdf(h_grid, horizon)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpansionValidityWarning)
        small = small_alpha_cdf(h_grid, alpha)
    upper = upper_bound_curve(h_grid, alpha, theta) if alpha > 0 else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "neutral", "small_alpha", "upper_bound"])
        for i, h in enumerate(h_grid):
            w.writerow([repr(float(h)), repr(float(neutral[i])), repr(float(small[i])),
                        "" if upper is None else repr(float(upper[i]))])
