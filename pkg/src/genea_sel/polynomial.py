"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial lives in a ``PolyRing`` that fixes the variable names. Terms are
stored as ``{packed exponent: coefficient}``: the exponent of variable ``i``
occupies bits ``[16 i, 16 i + 16)`` of a Python int, so multiplying monomials
is one integer addition. Coefficients are kept as ``int`` whenever possible
and ``Fraction`` otherwise; zero coefficients are dropped.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

BITS = 16
MASK = (1 << BITS) - 1
MAX_EXPONENT = MASK


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


class PolyRing:
    def __init__(self, names: Sequence[str]):
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        self.names = tuple(names)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.nvars = len(self.names)

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"PolyRing({', '.join(self.names)})"

    # exponent packing
    def pack(self, e: Sequence[int]) -> int:
        if len(e) != self.nvars:
            raise ValueError("exponent length does not match the ring")
        key = 0
        for i, k in enumerate(e):
            if not 0 <= k <= MAX_EXPONENT:
                raise ValueError(f"exponent {k} out of range")
            key |= int(k) << (BITS * i)
        return key

    def unpack(self, key: int) -> tuple:
        return tuple((key >> (BITS * i)) & MASK for i in range(self.nvars))

    def unit(self, i: int) -> int:
        return 1 << (BITS * i)

    def exponent(self, key: int, i: int) -> int:
        return (key >> (BITS * i)) & MASK

    # constructors
    def const(self, c) -> "Polynomial":
        return Polynomial._raw(self, {0: c})

    def zero(self) -> "Polynomial":
        return Polynomial._raw(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def var(self, name_or_index) -> "Polynomial":
        i = self.index[name_or_index] if isinstance(name_or_index, str) else int(name_or_index)
        if not 0 <= i < self.nvars:
            raise IndexError(i)
        return Polynomial._raw(self, {self.unit(i): 1})

    def sum(self, polys: Iterable["Polynomial"]) -> "Polynomial":
        acc: dict = {}
        for p in polys:
            p._check(self)
            for k, c in p.packed.items():
                acc[k] = acc.get(k, 0) + c
        return Polynomial._raw(self, acc)


class Polynomial:
    __slots__ = ("ring", "packed", "_maxexp")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple, object] | None = None):
        """Build from ``{exponent tuple: rational coefficient}``."""
        acc: dict = {}
        for e, c in (terms or {}).items():
            if not isinstance(c, (int, Fraction)):
                if isinstance(c, Rational):
                    c = Fraction(c)
                else:
                    raise TypeError(f"coefficients must be rational, got {type(c).__name__}")
            k = ring.pack(tuple(e))
            acc[k] = acc.get(k, 0) + c
        self._init(ring, acc)

    @classmethod
    def _raw(cls, ring: PolyRing, acc: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p._init(ring, acc)
        return p

    def _init(self, ring, acc):
        self.ring = ring
        self.packed = {k: _norm(c) for k, c in acc.items() if c != 0}
        self._maxexp = None

    @property
    def terms(self) -> dict[tuple, object]:
        return {self.ring.unpack(k): c for k, c in self.packed.items()}

    def max_exponent(self) -> int:
        if self._maxexp is None:
            self._maxexp = max((max(self.ring.unpack(k)) for k in self.packed), default=0)
        return self._maxexp

    # -- arithmetic -------------------------------------------------------
    def _check(self, ring: PolyRing) -> None:
        if ring is not self.ring and ring != self.ring:
            raise ValueError("polynomials belong to different rings")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            other._check(self.ring)
            return other
        if isinstance(other, Rational):
            return self.ring.const(other if isinstance(other, (int, Fraction)) else Fraction(other))
        raise TypeError(f"cannot combine a polynomial with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self.packed)
        for k, c in other.packed.items():
            acc[k] = acc.get(k, 0) + c
        return Polynomial._raw(self.ring, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ring, {k: -c for k, c in self.packed.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c0 = self._coerce(other).packed.get(0, 0)
            return Polynomial._raw(self.ring, {k: c * c0 for k, c in self.packed.items()})
        other._check(self.ring)
        if self.max_exponent() + other.max_exponent() > MAX_EXPONENT:
            raise OverflowError("exponent exceeds the packed range")
        acc: dict = {}
        get = acc.get
        b = list(other.packed.items())
        for k1, c1 in self.packed.items():
            for k2, c2 in b:
                k = k1 + k2
                acc[k] = get(k, 0) + c1 * c2
        return Polynomial._raw(self.ring, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only nonnegative integer powers")
        out, base = self.ring.one(), self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.packed == other.packed

    def __hash__(self):
        return hash(frozenset(self.packed.items()))

    # -- structure --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.packed

    def __len__(self):
        return len(self.packed)

    def degree(self, variables: Iterable[int] | None = None) -> int:
        if not self.packed:
            return -1
        idx = list(range(self.ring.nvars)) if variables is None else list(variables)
        ex = self.ring.exponent
        return max(sum(ex(k, i) for i in idx) for k in self.packed)

    def depends_on(self, i: int) -> bool:
        shift = BITS * i
        return any((k >> shift) & MASK for k in self.packed)

    def diff(self, i: int) -> "Polynomial":
        shift = BITS * i
        unit = 1 << shift
        acc = {}
        for k, c in self.packed.items():
            e = (k >> shift) & MASK
            if e:
                acc[k - unit] = c * e
        return Polynomial._raw(self.ring, acc)

    def substitute(self, i: int, value: "Polynomial") -> "Polynomial":
        """Replace variable ``i`` by the polynomial ``value``."""
        value = self._coerce(value)
        shift = BITS * i
        powers = [self.ring.one()]
        acc: dict = {}
        for k, c in self.packed.items():
            e = (k >> shift) & MASK
            while len(powers) <= e:
                powers.append(powers[-1] * value)
            base = k - (e << shift)
            for g, d in powers[e].packed.items():
                h = base + g
                acc[h] = acc.get(h, 0) + c * d
        return Polynomial._raw(self.ring, acc)

    def evaluate(self, values) -> float:
        """Value at a point given as a sequence (one entry per variable) or a name mapping.

        Exact when all values are rational.
        """
        if isinstance(values, Mapping):
            vals = [values[name] for name in self.ring.names]
        else:
            vals = list(values)
            if len(vals) != self.ring.nvars:
                raise ValueError("point has the wrong dimension")
        total = 0
        for k, c in self.packed.items():
            term = c
            for v, e in zip(vals, self.ring.unpack(k)):
                if e:
                    term = term * v ** e
            total = total + term
        return total

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        if not self.packed:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(self.ring.names, e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")
