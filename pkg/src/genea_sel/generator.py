"""Exact action of the n-family diffusion generator on polynomial observables.

Variables are ``y1..yn, z1..zn`` plus the parameters ``alpha, theta0, theta1``,
which are ordinary polynomial symbols, so every identity is checked for all
parameter values at once. The last unfit coordinate is eliminated through
``zn = 1 - (y1 + ... + yn + z1 + ... + z(n-1))`` before the generator is
applied; the free coordinates are the first ``2n - 1``.

    L^res P = 1/2 sum_{i,j free} x_i (delta_ij - x_j) d_i d_j P
    L^sel P = alpha [ Zbar sum_i y_i d_{y_i} P - Ybar sum_{i<n} z_i d_{z_i} P ]
    L^mut P = sum_i (theta0 z_i - theta1 y_i) d_{y_i} P + sum_{i<n} (theta1 y_i - theta0 z_i) d_{z_i} P
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .polynomial import Polynomial, PolyRing

PARTS = ("res", "sel", "mut", "full")


class DimensionError(ValueError):
    pass


class FamilyRing(PolyRing):
    """Ring of the n-family observables with the three rate parameters as symbols."""

    def __init__(self, n: int):
        if n < 1:
            raise DimensionError("need at least one family")
        self.n = n
        super().__init__([f"y{i}" for i in range(1, n + 1)] + [f"z{i}" for i in range(1, n + 1)]
                         + ["alpha", "theta0", "theta1"])
        self.free = list(range(2 * n - 1))
        self.zn = 2 * n - 1

    def y(self, i: int) -> Polynomial:
        return self.var(i)

    def z(self, i: int) -> Polynomial:
        return self.var(self.n + i)

    @property
    def alpha(self) -> Polynomial:
        return self.var("alpha")

    @property
    def theta0(self) -> Polynomial:
        return self.var("theta0")

    @property
    def theta1(self) -> Polynomial:
        return self.var("theta1")

    def ybar(self) -> Polynomial:
        return self.sum(self.y(i) for i in range(self.n))

    def zbar(self) -> Polynomial:
        return self.sum(self.z(i) for i in range(self.n))

    def zn_value(self) -> Polynomial:
        return 1 - self.sum(self.var(i) for i in self.free)

    def zc(self, i: int) -> Polynomial:
        """Unfit coordinate i with the last one already eliminated."""
        return self.zn_value() if i == self.n - 1 else self.z(i)


@lru_cache(maxsize=None)
def family_ring(n: int) -> FamilyRing:
    return FamilyRing(n)


def constrain(P: Polynomial) -> Polynomial:
    """Eliminate the last unfit coordinate through the unit-sum constraint."""
    ring = P.ring
    if not isinstance(ring, FamilyRing):
        raise DimensionError("polynomial is not over a family ring")
    if not P.depends_on(ring.zn):
        return P
    return P.substitute(ring.zn, ring.zn_value())


def _resampling(P: Polynomial) -> Polynomial:
    # per monomial x^e (free part of degree d):
    #   1/2 sum_i x_i d_i^2 x^e = 1/2 sum_i e_i (e_i - 1) x^{e - 1_i}
    #   1/2 sum_ij x_i x_j d_i d_j x^e = 1/2 d (d - 1) x^e            (Euler)
    ring = P.ring
    free = ring.free
    units = [ring.unit(i) for i in free]
    acc: dict = {}
    for key, c in P.packed.items():
        e = ring.unpack(key)
        d = sum(e[i] for i in free)
        if d >= 2:
            acc[key] = acc.get(key, 0) - (d * (d - 1) // 2) * c
        for i, u in zip(free, units):
            k = e[i]
            if k >= 2:
                acc[key - u] = acc.get(key - u, 0) + (k * (k - 1) // 2) * c
    return Polynomial._raw(ring, acc)


def drift_polynomials(ring: FamilyRing, part: str) -> list[Polynomial]:
    """Drift coefficients of the free coordinates as constrained polynomials."""
    n = ring.n
    zero = ring.zero()
    b = [zero] * (2 * n - 1)
    ybar = ring.ybar()
    zbar = 1 - ybar
    zn = ring.zn_value()
    z = [ring.z(i) for i in range(n - 1)] + [zn]
    a, t0, t1 = ring.alpha, ring.theta0, ring.theta1
    if part in ("sel", "full"):
        for i in range(n):
            b[i] = b[i] + a * zbar * ring.y(i)
        for i in range(n - 1):
            b[n + i] = b[n + i] - a * ybar * ring.z(i)
    if part in ("mut", "full"):
        for i in range(n):
            b[i] = b[i] + t0 * z[i] - t1 * ring.y(i)
        for i in range(n - 1):
            b[n + i] = b[n + i] + t1 * ring.y(i) - t0 * ring.z(i)
    return b


def apply_generator(P: Polynomial, part: str = "full", n: int | None = None) -> Polynomial:
    """Exact image of the constrained polynomial ``P`` under a part of the generator."""
    if part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}")
    ring = P.ring
    if not isinstance(ring, FamilyRing):
        raise DimensionError("polynomial is not over a family ring")
    if n is not None and n != ring.n:
        raise DimensionError(f"polynomial has {ring.n} families, expected {n}")
    if P.depends_on(ring.zn):
        raise DimensionError("eliminate the last unfit coordinate first (see constrain)")
    out = ring.zero()
    if part in ("res", "full"):
        out = out + _resampling(P)
    if part != "res":
        terms = []
        for i, bi in enumerate(drift_polynomials(ring, part)):
            if not bi.is_zero():
                dP = P.diff(i)
                if not dP.is_zero():
                    terms.append(bi * dP)
        out = out + ring.sum(terms)
    return out


# ---------------------------------------------------------------------------
# observables


# Observables are built from the constrained unfit coordinates (``zc``), so
# they never depend on the eliminated variable.


def phi1(ring: FamilyRing) -> Polynomial:
    return ring.sum((ring.y(i) + ring.zc(i)) ** 2 for i in range(ring.n))


def phi2(ring: FamilyRing) -> Polynomial:
    Y = ring.ybar()
    return ring.sum((ring.y(i) + ring.zc(i)) * (ring.y(i) - (ring.y(i) + ring.zc(i)) * Y)
                    for i in range(ring.n))


def phi3(ring: FamilyRing) -> Polynomial:
    Y = ring.ybar()
    sq = ring.sum((ring.y(i) - (ring.y(i) + ring.zc(i)) * Y) ** 2 for i in range(ring.n))
    return sq - 2 * phi2(ring) * Y


def total_mass(ring: FamilyRing) -> Polynomial:
    """Sum of all 2n coordinates written in the raw variables (constrains to 1)."""
    return ring.ybar() + ring.zbar()


@dataclass
class IdentityCheck:
    name: str
    n: int
    difference: Polynomial = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.difference.is_zero()

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        text = f"[{status}] n={self.n} {self.name}"
        if not self.passed:
            text += f"\n    difference: {self.difference}"
        return text


def _check(name: str, n: int, observable: Polynomial, part: str, expected: Polynomial) -> IdentityCheck:
    image = apply_generator(constrain(observable), part)
    return IdentityCheck(name, n, image - constrain(expected))


def verify_pair_identities(n: int) -> list[IdentityCheck]:
    """``L phi1 = 1 - phi1 + 2 alpha phi2`` and ``L phi2 = -(3 + theta0 + theta1 - alpha) phi2 + alpha phi3``."""
    r = family_ring(n)
    p1, p2, p3 = phi1(r), phi2(r), phi3(r)
    a = r.alpha
    return [
        _check("L phi1 = 1 - phi1 + 2 alpha phi2", n, p1, "full", 1 - p1 + 2 * a * p2),
        _check("L phi2 = -(3 + theta0 + theta1 - alpha) phi2 + alpha phi3", n, p2, "full",
               -(3 + r.theta0 + r.theta1 - a) * p2 + a * p3),
    ]


def mapping_triples(n: int, m: int | None = None) -> list[tuple[str, Polynomial, str, Polynomial]]:
    """The nine (observable, generator part, expected image) triples.

    ``m`` is the power of ``Ybar`` or ``Zbar`` in the observables; by default it
    equals the family count ``n``.
    """
    r = family_ring(n)
    m = n if m is None else m
    Y = r.ybar()
    Z = 1 - Y
    a, t0, t1 = r.alpha, r.theta0, r.theta1
    syy = r.sum(r.y(i) ** 2 for i in range(n))
    szz = r.sum(r.zc(i) ** 2 for i in range(n))
    syz = r.sum(r.y(i) * r.zc(i) for i in range(n))
    c = Fraction(m * (m - 1), 2)

    def pw(P, k):
        # negative powers only arise with coefficient 0 (m = 0)
        return P ** k if k >= 0 else r.zero()

    return [
        ("Ybar^m sum y^2 | res", Y ** m * syy, "res",
         Y ** (m + 1) + (2 * m + c) * pw(Y, m - 1) * syy - (1 + 2 * m + c) * Y ** m * syy),
        ("Ybar^m sum y^2 | mut", Y ** m * syy, "mut",
         2 * t0 * Y ** m * syz + m * t0 * pw(Y, m - 1) * syy - (m * t0 + (m + 2) * t1) * Y ** m * syy),
        ("Ybar^m sum y^2 | sel", Y ** m * syy, "sel",
         (m + 2) * a * Y ** m * syy - (m + 2) * a * Y ** (m + 1) * syy),
        ("Zbar^m sum z^2 | res", Z ** m * szz, "res",
         Z ** (m + 1) + (2 * m + c) * pw(Z, m - 1) * szz - (1 + 2 * m + c) * Z ** m * szz),
        ("Zbar^m sum z^2 | mut", Z ** m * szz, "mut",
         2 * t1 * Z ** m * syz + m * t1 * pw(Z, m - 1) * szz - (m * t1 + (m + 2) * t0) * Z ** m * szz),
        ("Zbar^m sum z^2 | sel", Z ** m * szz, "sel",
         -(m + 2) * a * Z ** m * szz + (m + 2) * a * Z ** (m + 1) * szz),
        ("Ybar^m sum yz | res", Y ** m * syz, "res",
         (m + c) * pw(Y, m - 1) * syz - (1 + 2 * m + c) * Y ** m * syz),
        ("Ybar^m sum yz | mut", Y ** m * syz, "mut",
         t1 * Y ** m * syy + t0 * Y ** m * szz + m * t0 * pw(Y, m - 1) * syz
         - (m + 1) * (t0 + t1) * Y ** m * syz),
        # the second power of Ybar is m + 1; with m in both places the line is not an identity
        ("Ybar^m sum yz | sel", Y ** m * syz, "sel",
         (m + 1) * a * Y ** m * syz - (m + 2) * a * Y ** (m + 1) * syz),
    ]


def equal_power_selection_yz_image(n: int, m: int | None = None) -> Polynomial:
    """The selection image of ``Ybar^m sum y_i z_i`` with both powers of ``Ybar`` equal to m."""
    r = family_ring(n)
    m = n if m is None else m
    Y = r.ybar()
    syz = r.sum(r.y(i) * r.zc(i) for i in range(n))
    return (m + 1) * r.alpha * Y ** m * syz - (m + 2) * r.alpha * Y ** m * syz


def verify_mapping_table(n: int, m: int | None = None,
                          overrides: dict[str, Polynomial] | None = None) -> list[IdentityCheck]:
    """Apply the generator part to each observable and compare with the expected image.

    ``overrides`` replaces expected images by name (used for negative controls).
    """
    if n < 2:
        raise DimensionError("the table needs n >= 2")
    overrides = overrides or {}
    out = []
    for name, obs, part, expected in mapping_triples(n, m):
        out.append(_check(name, n, obs, part, overrides.get(name, expected)))
    return out


# ---------------------------------------------------------------------------
# numeric bridge to the diffusion integrator


def evaluation_point(ring: FamilyRing, x, alpha, theta0, theta1) -> list:
    x = list(x)
    if len(x) != 2 * ring.n:
        raise DimensionError(f"point has {len(x)} coordinates, expected {2 * ring.n}")
    return x + [alpha, theta0, theta1]


def numeric_generator_check(P: Polynomial, x, alpha: float, theta0: float, theta1: float,
                            part: str = "full") -> tuple[float, float]:
    """Evaluate the generator image of ``P`` at ``x`` in two independent ways.

    The first value evaluates the exact polynomial image. The second combines
    the numerical drift and covariance of the diffusion integrator with
    numerically evaluated first and second partial derivatives of ``P``.
    """
    from . import wf

    ring = P.ring
    n = ring.n
    Pc = constrain(P)
    point = evaluation_point(ring, x, alpha, theta0, theta1)
    symbolic = float(apply_generator(Pc, part).evaluate(point))

    x = np.asarray(x, dtype=float)
    free = ring.free
    grad = np.array([float(Pc.diff(i).evaluate(point)) for i in free])
    hess = np.array([[float(Pc.diff(i).diff(j).evaluate(point)) for j in free] for i in free])
    numeric = 0.0
    if part in ("res", "full"):
        numeric += 0.5 * float(np.sum(wf.covariance(x, free=True) * hess))
    if part != "res":
        a = alpha if part in ("sel", "full") else 0.0
        t0, t1 = (theta0, theta1) if part in ("mut", "full") else (0.0, 0.0)
        b = wf.drift(x, a, t0, t1)[: 2 * n - 1]
        numeric += float(b @ grad)
    return symbolic, numeric
