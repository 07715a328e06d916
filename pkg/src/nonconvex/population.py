"""Population bookkeeping across sieve stages.

Populations are products of admissible-residue counts, so everything is
kept as exact integers or fractions; scientific notation only appears when
rendering.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Sequence

from . import core
from .core import Constellation

__all__ = [
    "InOutState",
    "RhoProfile",
    "TrajectoryRow",
    "WinfResult",
    "delta",
    "delta_count",
    "first_escape_prime",
    "inout_step",
    "inout_trajectory",
    "population",
    "rho_profile",
    "winf",
    "write_inout_csv",
    "write_rho_table",
    "write_winf_table",
]


def _c(s) -> Constellation:
    return s if isinstance(s, Constellation) else Constellation(s)


@dataclass(frozen=True)
class RhoProfile:
    s: Constellation
    entries: dict[int, int] = field(default_factory=dict)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(self.entries)


def rho_profile(s, lo: int, hi: int) -> RhoProfile:
    s = _c(s)
    return RhoProfile(s, {q: core.rho(s, q) for q in core.primes_between(lo, hi)})


def write_rho_table(rows: Iterable[tuple[object, RhoProfile]], fh: IO[str]) -> None:
    rows = list(rows)
    primes = rows[0][1].primes if rows else ()
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", *primes])
    for idx, prof in rows:
        w.writerow([idx, *(prof.entries[q] for q in primes)])


# --------------------------------------------------------------------------
# inside / outside dynamics

@dataclass(frozen=True)
class InOutState:
    stage: int
    n_out: int
    n_in: int

    @property
    def total(self) -> int:
        return self.n_out + self.n_in


def delta(child, parent, q: int) -> int:
    return core.rho(child, q) - core.rho(parent, q)


def inout_step(state: InOutState, rho_child: int, rho_parent: int, q: int | None = None) -> InOutState:
    """One sieve stage of the upper-triangular inside/outside model.

    Outside instances stay outside; an inside instance keeps ``rho_parent``
    lifts inside and, when ``delta = rho_child - rho_parent`` is 1, sheds one
    lift outside.
    """
    d = rho_child - rho_parent
    if d not in (0, 1):
        raise ValueError(
            f"rho_child - rho_parent = {d}; a one-gap extension only allows 0 or 1"
        )
    stage = q if q is not None else core.next_prime(state.stage)
    return InOutState(
        stage,
        rho_child * state.n_out + d * state.n_in,
        rho_parent * state.n_in,
    )


@dataclass(frozen=True)
class TrajectoryRow:
    prime: int
    n_out: int
    n_in: int

    @property
    def ratio(self) -> Fraction | float:
        """n_in / n_out, infinite while nothing has escaped."""
        if self.n_out == 0:
            return math.inf
        return Fraction(self.n_in, self.n_out)

    @property
    def fraction_inside(self) -> Fraction:
        total = self.n_in + self.n_out
        return Fraction(self.n_in, total) if total else Fraction(0)


def _check_pair(child: Constellation, parent: Constellation) -> None:
    if parent.J != child.J + 1 or child.gaps not in (parent.gaps[:-1], parent.gaps[1:]):
        raise ValueError(f"{parent} is not a one-gap extension of {child}")


def inout_trajectory(
    child,
    parent,
    start: int,
    end: int,
    initial: tuple[int, int] = (0, 1),
) -> list[TrajectoryRow]:
    """Iterate the model from ``initial = (n_out, n_in)`` at stage ``start`` through ``end``.

    The first row is the initial state itself.
    """
    child, parent = _c(child), _c(parent)
    _check_pair(child, parent)
    core.require_prime(start)
    state = InOutState(start, *initial)
    rows = [TrajectoryRow(start, state.n_out, state.n_in)]
    for q in core.primes_between(start + 1, end):
        state = inout_step(state, core.rho(child, q), core.rho(parent, q), q)
        rows.append(TrajectoryRow(q, state.n_out, state.n_in))
    return rows


def _render_ratio(x) -> str:
    if x == math.inf:
        return "inf"
    return f"{float(x):.12g}"


def write_inout_csv(
    rows: Iterable[TrajectoryRow], fh: IO[str], label: object | None = None, header: bool = True
) -> None:
    w = csv.writer(fh, lineterminator="\n")
    cols = ["prime", "n_out", "n_in", "ratio", "fraction_inside"]
    if header:
        w.writerow((["index"] if label is not None else []) + cols)
    for r in rows:
        row = [r.prime, r.n_out, r.n_in, _render_ratio(r.ratio), _render_ratio(r.fraction_inside)]
        w.writerow(([label] if label is not None else []) + row)


def first_escape_prime(child, parent, bound: int | None = None) -> int | None:
    """Smallest prime with rho(child) > rho(parent); ``None`` if none up to ``bound``.

    The default bound is the first prime above both J+2 and |s|/2 of the
    parent, past which delta is always 1.
    """
    child, parent = _c(child), _c(parent)
    _check_pair(child, parent)
    if bound is None:
        bound = core.next_prime(max(parent.J + 2, parent.span // 2))
    for q in core.primes_upto(bound):
        if core.rho(child, q) > core.rho(parent, q):
            return q
    return None


def delta_count(child, parent, lo: int, hi: int) -> int:
    child, parent = _c(child), _c(parent)
    _check_pair(child, parent)
    return sum(1 for q in core.primes_between(lo, hi) if delta(child, parent, q) == 1)


def population(s, through: int, after: int = 1) -> int:
    """Exact product of rho(s, q) over primes ``after < q <= through``."""
    s = _c(s)
    return math.prod(core.rho(s, q) for q in core.primes_between(after + 1, through))


# --------------------------------------------------------------------------
# asymptotic relative population

@dataclass(frozen=True)
class WinfResult:
    s: Constellation
    factor_small: int
    factor_large: Fraction
    admissible: bool

    @property
    def w_infinity(self) -> Fraction:
        return self.factor_small * self.factor_large

    def rendered(self, digits: int = 4) -> tuple[str, str, str]:
        return (
            core.format_sci(self.factor_small, digits),
            core.format_sci(self.factor_large, digits),
            core.format_sci(self.w_infinity, digits),
        )


def winf(s) -> WinfResult:
    """Both factors of the asymptotic relative population of ``s``.

    The first factor multiplies rho over q <= J+1; the second multiplies
    rho(q)/(q-J-1) over J+1 < q <= floor(|s|/2).
    """
    s = _c(s)
    small = population(s, s.J + 1)
    large = Fraction(1)
    for q in core.primes_between(s.J + 2, s.span // 2):
        large *= Fraction(core.rho(s, q), q - s.J - 1)
    return WinfResult(s, small, large, small > 0)


def write_winf_table(rows: Iterable[tuple[object, WinfResult]], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "factor_small", "factor_large", "w", "admissible"])
    for idx, r in rows:
        w.writerow([idx, *r.rendered(4), "true" if r.admissible else "false"])
