"""Explicit cycles of gaps G(p#) and exhaustive searches inside them.

G(p#) lists the gaps between consecutive p-rough numbers starting at 1 and
ending at p# + 1, so it has phi(p#) gaps summing to p#.  Everything here
materializes the cycle, which keeps it honest but limits it to small p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

import numpy as np

from . import core
from .core import Constellation, points

__all__ = [
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "GapCycle",
    "Kind",
    "Occurrence",
    "build_cycle",
    "build_cycle_bruteforce",
    "count_in_out",
    "count_point_survivals_crt",
    "find_occurrences",
    "next_cycle_by_recursion",
    "read_cycle",
    "verify_cycle",
    "write_cycle",
]

DEFAULT_BUDGET = 64 * 2**20


class BudgetExceeded(MemoryError):
    """Raised when a cycle would not fit the configured memory budget."""

    def __init__(self, p: int, required: int, budget: int):
        self.p, self.required, self.budget = p, required, budget
        super().__init__(
            f"G({p}#) needs about {required} bytes, budget is {budget} bytes"
        )


class Kind(str, Enum):
    EXACT = "exact-instance"
    DRIVING = "driving-term"


@dataclass(frozen=True)
class Occurrence:
    gamma0: int
    kind: Kind
    interior_rough_count: int


@dataclass(frozen=True, eq=False)
class GapCycle:
    stage: int
    gaps: np.ndarray

    @property
    def modulus(self) -> int:
        return core.primorial(self.stage)

    def __len__(self) -> int:
        return len(self.gaps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GapCycle):
            return NotImplemented
        return self.stage == other.stage and np.array_equal(self.gaps, other.gaps)

    def rough_points(self) -> np.ndarray:
        """The phi(p#) rough numbers in [1, p#)."""
        return 1 + np.concatenate(([0], np.cumsum(self.gaps[:-1], dtype=np.int64)))

    def rough_flags(self) -> np.ndarray:
        flags = np.zeros(self.modulus, dtype=bool)
        flags[self.rough_points()] = True
        return flags


def _required_bytes(p: int) -> int:
    # one flag byte per integer plus the int64 gap array
    P = core.primorial(p)
    return P + 2 + 8 * core.phi_primorial(p)


def build_cycle_bruteforce(p: int, budget: int = DEFAULT_BUDGET) -> GapCycle:
    core.require_prime(p)
    required = _required_bytes(p)
    if required > budget:
        raise BudgetExceeded(p, required, budget)
    P = core.primorial(p)
    flags = np.ones(P + 2, dtype=bool)
    flags[0] = False
    for q in core.primes_upto(p):
        flags[::q] = False
    rough = np.flatnonzero(flags)
    return GapCycle(p, np.diff(rough).astype(np.int64))


def next_cycle_by_recursion(cycle: GapCycle) -> GapCycle:
    """G(p#) -> G(q#): concatenate q copies, then fuse at q times each rough number."""
    q = core.next_prime(cycle.stage)
    P = cycle.modulus
    tiled = np.tile(cycle.gaps, q)
    pts = 1 + np.concatenate(([0], np.cumsum(tiled, dtype=np.int64)))
    fused = q * cycle.rough_points()
    keep = ~np.isin(pts, fused, assume_unique=True)
    out = GapCycle(q, np.diff(pts[keep]))
    assert len(out) == (q - 1) * len(cycle)
    assert int(pts[-1]) == q * P + 1
    return out


def build_cycle(p: int, budget: int = DEFAULT_BUDGET) -> GapCycle:
    """Brute force where it fits; otherwise recurse up from the largest stage that does."""
    core.require_prime(p)
    try:
        return build_cycle_bruteforce(p, budget)
    except BudgetExceeded:
        pass
    stage = 2
    for q in core.primes_upto(p):
        if _required_bytes(q) <= budget:
            stage = q
    cycle = build_cycle_bruteforce(stage, budget)
    while cycle.stage < p:
        nxt = core.next_prime(cycle.stage)
        # tiled points dominate the recursion's footprint
        needed = 16 * nxt * len(cycle)
        if needed > budget:
            raise BudgetExceeded(nxt, needed, budget)
        cycle = next_cycle_by_recursion(cycle)
    return cycle


def verify_cycle(cycle: GapCycle) -> list[str]:
    """Return the list of violated cycle invariants (empty when all hold)."""
    problems = []
    p = cycle.stage
    P = cycle.modulus
    phi = core.phi_primorial(p)
    gaps = cycle.gaps
    if len(gaps) != phi:
        problems.append(f"length {len(gaps)} != phi({p}#) = {phi}")
    if int(gaps.sum()) != P:
        problems.append(f"sum {int(gaps.sum())} != {p}# = {P}")
    if len(gaps) and int(gaps[-1]) != 2:
        problems.append(f"last gap {int(gaps[-1])} != 2")
    head = gaps[:-1]
    if not np.array_equal(head, head[::-1]):
        problems.append("leading phi-1 gaps are not a palindrome")
    pts = cycle.rough_points()
    if any(math.gcd(int(x), P) != 1 for x in pts) or math.gcd(P + 1, P) != 1:
        problems.append("a cycle point is not coprime to the primorial")
    return problems


# --------------------------------------------------------------------------
# searches

def _rough_counter(flags: np.ndarray):
    """F(n) = number of rough integers in [0, n), extended periodically."""
    P = len(flags)
    cum = np.concatenate(([0], np.cumsum(flags, dtype=np.int64)))
    per = int(cum[-1])

    def F(n):
        q, r = np.divmod(np.asarray(n, dtype=np.int64), P)
        return q * per + cum[r]

    return F


def _occurrences(cycle: GapCycle, s: Constellation, flags=None, counter=None):
    """(gamma0 array, interior rough counts) for every point-survival of s; any span."""
    P = cycle.modulus
    flags = cycle.rough_flags() if flags is None else flags
    cand = cycle.rough_points()
    for t in points(s)[1:]:
        cand = cand[flags[(cand + t) % P]]
    F = _rough_counter(flags) if counter is None else counter
    interior = F(cand + s.span) - F(cand + 1) - (s.J - 1)
    return cand, interior


def find_occurrences(cycle: GapCycle, s) -> list[Occurrence]:
    """Every gamma0 in [1, p#] whose whole point set is rough.

    The cycle is treated as periodic, so spans wider than p# are allowed.
    """
    s = s if isinstance(s, Constellation) else Constellation(s)
    cand, interior = _occurrences(cycle, s)
    return [
        Occurrence(int(g), Kind.EXACT if c == 0 else Kind.DRIVING, int(c))
        for g, c in zip(cand, interior)
    ]


def count_point_survivals_crt(s, p: int) -> int:
    core.require_prime(p)
    return math.prod(core.rho(s, q) for q in core.primes_upto(p))


def _alignment(child: Constellation, parent: Constellation, side: str | None) -> int:
    """Offset of the child's origin relative to the parent's origin."""
    right = parent.J == child.J + 1 and parent.gaps[:-1] == child.gaps
    left = parent.J == child.J + 1 and parent.gaps[1:] == child.gaps
    if side is None:
        side = "right" if right else "left" if left else None
    if side == "right" and right:
        return 0
    if side == "left" and left:
        return parent.gaps[0]
    raise ValueError(f"{parent} is not a one-gap extension of {child}")


def count_in_out(cycle: GapCycle, child, parent, side: str | None = None) -> tuple[int, int]:
    """Split the exact instances of ``child`` into (inside, outside) its parent.

    ``side='right'`` means parent = [child g]; ``'left'`` means [g child].
    When both hold and no side is given, ``'right'`` is used.
    """
    child = child if isinstance(child, Constellation) else Constellation(child)
    parent = parent if isinstance(parent, Constellation) else Constellation(parent)
    shift = _alignment(child, parent, side)
    P = cycle.modulus
    flags = cycle.rough_flags()
    F = _rough_counter(flags)
    c_g, c_int = _occurrences(cycle, child, flags, F)
    p_g, p_int = _occurrences(cycle, parent, flags, F)
    exact_child = c_g[c_int == 0]
    exact_parent = set(int(g) for g in p_g[p_int == 0])
    n_in = sum(1 for g in exact_child if (int(g) - shift) % P in exact_parent)
    return n_in, len(exact_child) - n_in


# --------------------------------------------------------------------------
# dump format

def write_cycle(cycle: GapCycle, fh: IO[str]) -> None:
    fh.write(
        f"# G(p#) p={cycle.stage} len={len(cycle)} sum={int(cycle.gaps.sum())}\n"
    )
    for g in cycle.gaps:
        fh.write(f"{int(g)}\n")


def read_cycle(lines: Iterable[str]) -> GapCycle:
    it = iter(lines)
    header = next(it).split()
    if header[:2] != ["#", "G(p#)"]:
        raise ValueError("missing cycle header")
    fields = dict(tok.split("=", 1) for tok in header[2:])
    gaps = np.array([int(line) for line in it if line.strip()], dtype=np.int64)
    cycle = GapCycle(int(fields["p"]), gaps)
    if len(gaps) != int(fields["len"]) or int(gaps.sum()) != int(fields["sum"]):
        raise ValueError("cycle dump does not match its header")
    return cycle
