"""Constellation algebra, residue coverage and small prime utilities.

A constellation is stored as its tuple of gaps.  The points are the prefix
sums ``0, g1, g1+g2, ..., |s|``; ``nu`` counts the residues those points
cover modulo a prime and ``rho = p - nu`` the residue classes left free for
an instance generator.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Constellation",
    "PrimeTable",
    "points",
    "nu",
    "rho",
    "is_admissible",
    "is_nonconvex",
    "reverse",
    "head_child",
    "tail_child",
    "extend_right",
    "extend_left",
    "is_prime",
    "require_prime",
    "primes_upto",
    "primes_between",
    "next_prime",
    "prime_table",
    "pi",
    "primorial",
    "phi_primorial",
    "sci_parts",
    "format_sci",
]


@dataclass(frozen=True)
class Constellation:
    """An ordered tuple of positive even gaps."""

    gaps: tuple[int, ...]

    def __init__(self, gaps: Iterable[int]):
        gaps = tuple(int(g) for g in gaps)
        if not gaps:
            raise ValueError("a constellation needs at least one gap")
        for g in gaps:
            if g < 2 or g % 2:
                raise ValueError(f"gaps must be positive and even, got {g}")
        object.__setattr__(self, "gaps", gaps)

    @classmethod
    def from_offsets(cls, offsets: Sequence[int]) -> "Constellation":
        offs = [int(x) for x in offsets]
        if len(offs) < 2:
            raise ValueError("need at least two offsets")
        gaps = [b - a for a, b in zip(offs, offs[1:])]
        if any(g <= 0 for g in gaps):
            raise ValueError("offsets must be strictly increasing")
        return cls(gaps)

    @property
    def J(self) -> int:
        return len(self.gaps)

    @property
    def span(self) -> int:
        return sum(self.gaps)

    def __len__(self) -> int:
        return len(self.gaps)

    def __str__(self) -> str:
        return " ".join(map(str, self.gaps))


def _as_constellation(s) -> Constellation:
    return s if isinstance(s, Constellation) else Constellation(s)


def points(s) -> tuple[int, ...]:
    return tuple(accumulate(_as_constellation(s).gaps, initial=0))


# --------------------------------------------------------------------------
# primes

def _sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.flatnonzero(flags)


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit``; immutable, ``grow`` returns a new table."""

    limit: int
    primes: tuple[int, ...] = field(repr=False)

    @classmethod
    def build(cls, limit: int) -> "PrimeTable":
        limit = max(int(limit), 1)
        return cls(limit, tuple(int(p) for p in _sieve(limit)))

    def grow(self, limit: int) -> "PrimeTable":
        if limit <= self.limit:
            return self
        return PrimeTable.build(limit)

    def pi(self, x: int) -> int:
        if x > self.limit:
            raise ValueError(f"pi({x}) is beyond the table limit {self.limit}")
        return bisect.bisect_right(self.primes, x)

    def next_prime(self, x: int) -> int:
        i = bisect.bisect_right(self.primes, x)
        if i == len(self.primes):
            raise ValueError(f"no prime above {x} within the table limit {self.limit}")
        return self.primes[i]

    def between(self, lo: int, hi: int) -> tuple[int, ...]:
        """Primes q with lo <= q <= hi."""
        if hi > self.limit:
            raise ValueError(f"range end {hi} is beyond the table limit {self.limit}")
        i = bisect.bisect_left(self.primes, lo)
        j = bisect.bisect_right(self.primes, hi)
        return self.primes[i:j]

    def __contains__(self, n: int) -> bool:
        if n > self.limit:
            raise ValueError(f"{n} is beyond the table limit {self.limit}")
        i = bisect.bisect_left(self.primes, n)
        return i < len(self.primes) and self.primes[i] == n


@lru_cache(maxsize=None)
def _table_for_bucket(bucket: int) -> PrimeTable:
    return PrimeTable.build(1 << bucket)


def prime_table(limit: int) -> PrimeTable:
    """A shared table covering at least ``limit`` (sizes round up to powers of two)."""
    bucket = max(10, int(limit).bit_length())
    return _table_for_bucket(bucket)


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    if n < 1 << 20:
        return n in prime_table(n)
    if n % 2 == 0:
        return False
    return all(n % p for p in primes_upto(math.isqrt(n)))


def require_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return int(p)


def primes_upto(x: int) -> tuple[int, ...]:
    if x < 2:
        return ()
    return prime_table(x).between(2, x)


def primes_between(lo: int, hi: int) -> tuple[int, ...]:
    if hi < 2 or hi < lo:
        return ()
    return prime_table(hi).between(lo, hi)


def next_prime(x: int) -> int:
    return prime_table(2 * max(int(x), 2)).next_prime(x)


def pi(x: int) -> int:
    if x < 2:
        return 0
    return prime_table(x).pi(x)


def primorial(p: int) -> int:
    require_prime(p)
    return math.prod(primes_upto(p))


def phi_primorial(p: int) -> int:
    require_prime(p)
    return math.prod(q - 1 for q in primes_upto(p))


# --------------------------------------------------------------------------
# residues and admissibility

def nu(s, p: int) -> int:
    require_prime(p)
    return len({x % p for x in points(s)})


def rho(s, p: int) -> int:
    return p - nu(s, p)


def is_admissible(s) -> bool:
    s = _as_constellation(s)
    # q > J+1 cannot be covered by J+1 points
    return all(rho(s, q) > 0 for q in primes_upto(s.J + 1))


def is_nonconvex(s, pt: PrimeTable | None = None) -> bool:
    s = _as_constellation(s)
    if pt is None:
        pt = prime_table(max(s.span, s.J + 1))
    if pt.limit < s.span:
        raise ValueError(f"prime table limit {pt.limit} is below the span {s.span}")
    return pt.pi(s.span) < s.J


def reverse(s) -> Constellation:
    return Constellation(reversed(_as_constellation(s).gaps))


def head_child(parent) -> Constellation:
    """Drop the last gap."""
    parent = _as_constellation(parent)
    if parent.J < 2:
        raise ValueError("a single-gap constellation has no children")
    return Constellation(parent.gaps[:-1])


def tail_child(parent) -> Constellation:
    """Drop the first gap."""
    parent = _as_constellation(parent)
    if parent.J < 2:
        raise ValueError("a single-gap constellation has no children")
    return Constellation(parent.gaps[1:])


def extend_right(s, g: int) -> Constellation:
    return Constellation(_as_constellation(s).gaps + (g,))


def extend_left(s, g: int) -> Constellation:
    return Constellation((g,) + _as_constellation(s).gaps)


# --------------------------------------------------------------------------
# scientific rendering of exact values

def sci_parts(x, digits: int) -> tuple[int, int]:
    """Round a positive exact value to ``digits`` significant digits.

    Returns ``(m, e)`` with ``10**(digits-1) <= m < 10**digits`` and
    ``x ~= m * 10**(e - digits + 1)``.  Ties round half to even.
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("only positive values have a scientific rendering")
    if digits < 1:
        raise ValueError("digits must be >= 1")
    # exact floor(log10(x))
    e = len(str(x.numerator)) - len(str(x.denominator))
    if x < Fraction(10) ** e:
        e -= 1
    m = round(x / Fraction(10) ** (e - digits + 1))
    if m == 10**digits:
        m //= 10
        e += 1
    return m, e


def format_sci(x, digits: int = 4) -> str:
    """``<mantissa>e<exp>``, e.g. ``format_sci(2310, 3) == '2.31e3'``; zero renders as ``0``."""
    if x == 0:
        return "0"
    if x < 0:
        return "-" + format_sci(-x, digits)
    m, e = sci_parts(x, digits)
    ds = str(m)
    mantissa = ds[0] + ("." + ds[1:] if len(ds) > 1 else "")
    return f"{mantissa}e{e}"
