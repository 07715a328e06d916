"""Primorial coordinates and breadth-first enumeration of instances.

An instance generator is written in mixed radix as

    gamma0 = c0 + c_B * B# + c_q * q# + ...

with ``0 <= c0 < B#`` and each ``c_p`` below the prime after ``p``.  Moving
from stage p to the next prime q, the lifts of an instance are
``gamma0 + k * p#`` for ``k in range(q)``; the coefficient ``k`` becomes the
next digit.  No cycle is ever materialized, so the search reaches stages far
beyond the explicit oracle in :mod:`nonconvex.cycles`.
"""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from . import core
from .core import Constellation, points
from .cycles import Kind

__all__ = [
    "DEFAULT_BASE_PRIME",
    "DEFAULT_MAX_WIDTH",
    "S25_BASE_RESIDUE",
    "S25_PREFIX",
    "BfsResult",
    "InstanceNode",
    "MinExact",
    "PrimorialCoords",
    "UniquePrefix",
    "bfs_instances",
    "decode",
    "encode",
    "format_coords",
    "make_seed",
    "min_exact_instance",
    "parse_coords",
    "resume_bfs",
    "rough_constellation",
    "unique_prefix",
    "write_prefix_csv",
]

DEFAULT_BASE_PRIME = 11
DEFAULT_MAX_WIDTH = 10**6

# Unique instance of the (458,3240) head s_25 in G(131#), coefficients of 11#..127#.
S25_BASE_RESIDUE = 107
S25_PREFIX = (
    6, 8, 9, 5, 7, 1, 23, 38, 34, 46, 20, 13, 13, 39,
    42, 45, 54, 82, 79, 79, 82, 10, 11, 78, 14, 74, 55,
)


@dataclass(frozen=True)
class PrimorialCoords:
    base_prime: int
    base_residue: int
    coeffs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_digits(cls, base_prime: int, base_residue: int, digits: Sequence[int]):
        primes = []
        p = base_prime
        for _ in digits:
            primes.append(p)
            p = core.next_prime(p)
        return cls(base_prime, base_residue, tuple(zip(primes, map(int, digits))))

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.coeffs)

    @property
    def stage(self) -> int:
        """The stage whose primorial the coordinates determine gamma0 modulo."""
        if not self.coeffs:
            return self.base_prime
        return core.next_prime(self.coeffs[-1][0])

    def key(self) -> tuple[int, ...]:
        """Sort key: c0 first, then coefficients in prime order."""
        return (self.base_residue,) + self.digits

    def __int__(self) -> int:
        return decode(self)

    def __str__(self) -> str:
        return format_coords(self)


def encode(
    x: int, base_prime: int = DEFAULT_BASE_PRIME, stage: int | None = None
) -> PrimorialCoords:
    """Greedy mixed-radix digits of ``x``.

    With ``stage`` given, zero digits are kept up to that stage so the
    coordinates describe ``x`` as a residue modulo ``stage#``.
    """
    x = int(x)
    if x < 0:
        raise ValueError("only non-negative integers have primorial coordinates")
    core.require_prime(base_prime)
    x, c0 = divmod(x, core.primorial(base_prime))
    coeffs = []
    p = base_prime
    while x or (stage is not None and p < stage):
        r = core.next_prime(p)
        x, c = divmod(x, r)
        coeffs.append((p, c))
        p = r
    return PrimorialCoords(base_prime, c0, tuple(coeffs))


def _check(coords: PrimorialCoords) -> None:
    core.require_prime(coords.base_prime)
    if not 0 <= coords.base_residue < core.primorial(coords.base_prime):
        raise ValueError(f"base residue {coords.base_residue} outside [0, {coords.base_prime}#)")
    p = coords.base_prime
    for q, c in coords.coeffs:
        if q != p:
            raise ValueError(f"coefficient for {q}# where {p}# was expected")
        r = core.next_prime(p)
        if not 0 <= c < r:
            raise ValueError(f"coefficient {c} of {p}# outside [0, {r})")
        p = r


def decode(coords: PrimorialCoords) -> int:
    _check(coords)
    x = coords.base_residue
    P = core.primorial(coords.base_prime)
    for p, c in coords.coeffs:
        x += c * P
        P *= core.next_prime(p)
    return x


def format_coords(coords: PrimorialCoords) -> str:
    """``c0 +k1*P1 +k2*P2 ...``, zero coefficients included."""
    return " ".join([str(coords.base_residue)] + [f"+{c}*{p}#" for p, c in coords.coeffs])


_TERM = re.compile(r"^\+(\d+)\*(\d+)#$")


def parse_coords(text: str) -> PrimorialCoords:
    tokens = text.split()
    if not tokens:
        raise ValueError("empty coordinate text")
    c0 = int(tokens[0])
    coeffs = []
    for tok in tokens[1:]:
        m = _TERM.match(tok)
        if not m:
            raise ValueError(f"bad coordinate term {tok!r}")
        coeffs.append((int(m.group(2)), int(m.group(1))))
    base = coeffs[0][0] if coeffs else DEFAULT_BASE_PRIME
    coords = PrimorialCoords(base, c0, tuple(coeffs))
    _check(coords)
    return coords


def rough_constellation(gamma0: int, stage: int, span: int) -> Constellation:
    """The constellation of stage-rough numbers in [gamma0, gamma0 + span]."""
    core.require_prime(stage)
    P = core.primorial(stage)
    if math.gcd(gamma0, P) != 1:
        raise ValueError(f"{gamma0} is not {stage}-rough")
    offs = [t for t in range(span + 1) if math.gcd(gamma0 + t, P) == 1]
    return Constellation.from_offsets(offs)


# --------------------------------------------------------------------------
# breadth-first search

@dataclass(eq=False)
class InstanceNode:
    gamma0: int
    stage: int
    kind: Kind
    parent: int | None = None
    k: int | None = None
    # interior non-point offsets that are still rough at this stage
    interior: np.ndarray = field(default=None, repr=False)


def _interior_offsets(s: Constellation) -> np.ndarray:
    pts = set(points(s))
    return np.array([t for t in range(1, s.span) if t not in pts], dtype=np.int64)


def make_seed(s, gamma0: int, stage: int) -> InstanceNode:
    """Validate an occurrence of ``s`` at ``stage`` and work out its kind."""
    s = s if isinstance(s, Constellation) else Constellation(s)
    core.require_prime(stage)
    P = core.primorial(stage)
    if not 1 <= gamma0 <= P:
        raise ValueError(f"seed {gamma0} outside [1, {stage}#]")
    if any(math.gcd(gamma0 + t, P) != 1 for t in points(s)):
        raise ValueError(f"{gamma0} is not an occurrence of the constellation in G({stage}#)")
    cand = _interior_offsets(s)
    rough = np.array([math.gcd(gamma0 + int(t), P) == 1 for t in cand], dtype=bool)
    interior = cand[rough] if len(cand) else cand
    kind = Kind.EXACT if len(interior) == 0 else Kind.DRIVING
    return InstanceNode(gamma0, stage, kind, None, None, interior)


@dataclass
class BfsResult:
    s: Constellation
    seed: InstanceNode
    base_prime: int
    stages: list[int]
    nodes: list[list[InstanceNode]]
    truncated: bool = False
    truncated_stages: list[int] = field(default_factory=list)

    def counts(self) -> dict[int, int]:
        return {p: len(level) for p, level in zip(self.stages, self.nodes)}

    def level(self, p: int) -> list[InstanceNode]:
        return self.nodes[self.stages.index(p)]

    def coords(self, p: int, i: int) -> PrimorialCoords:
        """Primorial coordinates of node ``i`` at stage ``p``."""
        if p < self.base_prime:
            raise ValueError(f"stage {p} is below the base prime {self.base_prime}")
        return encode(self.level(p)[i].gamma0, self.base_prime, p)

    def first_exact_stage(self) -> int | None:
        for p, level in zip(self.stages, self.nodes):
            if any(n.kind is Kind.EXACT for n in level):
                return p
        return None


class _Recorder:
    """Append-only stage records: ``stage,parent,k,kind`` lines plus commit markers."""

    def __init__(self, fh: IO[str]):
        self.fh = fh

    def header(self, s: Constellation, seed: InstanceNode, base_prime: int) -> None:
        gaps = ",".join(map(str, s.gaps))
        self.fh.write(
            f"# bfs seed={seed.gamma0} stage={seed.stage} base={base_prime} gaps={gaps}\n"
        )

    def stage(self, p: int, level: list[InstanceNode], truncated: bool) -> None:
        for n in level:
            self.fh.write(f"{p},{n.parent},{n.k},{n.kind.value}\n")
        if truncated:
            self.fh.write(f"# truncated {p}\n")
        self.fh.write(f"# end {p} {len(level)}\n")
        self.fh.flush()


def _expand(
    s: Constellation,
    level: list[InstanceNode],
    p: int,
    max_width: int,
) -> tuple[list[InstanceNode], bool]:
    q = core.next_prime(p)
    P = core.primorial(p)
    inv = pow(P % q, -1, q)
    residues = {t % q for t in points(s)}
    out: list[InstanceNode] = []
    for i, node in enumerate(level):
        g = node.gamma0 % q
        forbidden = {(-(g + r) * inv) % q for r in residues}
        for k in range(q):
            if k in forbidden:
                continue
            if len(out) >= max_width:
                return out, True
            gamma = node.gamma0 + k * P
            if node.kind is Kind.EXACT:
                interior = node.interior
            else:
                interior = node.interior[(gamma % q + node.interior) % q != 0]
            kind = Kind.EXACT if len(interior) == 0 else Kind.DRIVING
            out.append(InstanceNode(gamma, q, kind, i, k, interior))
    return out, False


def bfs_instances(
    s,
    seed: InstanceNode,
    up_to: int,
    max_width: int = DEFAULT_MAX_WIDTH,
    max_depth: int | None = None,
    base_prime: int = DEFAULT_BASE_PRIME,
    record: str | os.PathLike | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> BfsResult:
    """Enumerate the lifts of ``seed`` stage by stage through ``up_to``.

    Each stage keeps at most ``max_width`` nodes; children are generated in
    order of (parent, k), so a truncated stage holds the lexicographically
    smallest coordinate sequences.
    """
    s = s if isinstance(s, Constellation) else Constellation(s)
    if not core.is_admissible(s):
        raise ValueError("breadth-first search needs an admissible constellation")
    if max_width < 1:
        raise ValueError("max_width must be positive")
    if seed.interior is None:
        seed = make_seed(s, seed.gamma0, seed.stage)
    result = BfsResult(s, seed, base_prime, [seed.stage], [[seed]])
    fh = open(record, "w") if record is not None else None
    try:
        rec = _Recorder(fh) if fh else None
        if rec:
            rec.header(s, seed, base_prime)
            rec.stage(seed.stage, [seed], False)
        _run(result, up_to, max_width, max_depth, rec, progress)
    finally:
        if fh:
            fh.close()
    return result


def _run(result, up_to, max_width, max_depth, rec, progress) -> None:
    depth = len(result.stages) - 1
    while True:
        p = result.stages[-1]
        q = core.next_prime(p)
        if q > up_to or (max_depth is not None and depth >= max_depth):
            return
        level, cut = _expand(result.s, result.nodes[-1], p, max_width)
        result.stages.append(q)
        result.nodes.append(level)
        if cut:
            result.truncated = True
            result.truncated_stages.append(q)
        if rec:
            rec.stage(q, level, cut)
        if progress:
            progress(q, len(level))
        depth += 1


_HEADER = re.compile(r"^# bfs seed=(\d+) stage=(\d+) base=(\d+) gaps=([\d,]+)$")


def resume_bfs(
    record: str | os.PathLike,
    up_to: int,
    max_width: int = DEFAULT_MAX_WIDTH,
    max_depth: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> BfsResult:
    """Rebuild a search from its record file and continue it, appending.

    Records after the last commit marker belong to an interrupted stage and
    are discarded.
    """
    with open(record) as fh:
        lines = fh.readlines()
    m = _HEADER.match(lines[0].strip()) if lines else None
    if not m:
        raise ValueError(f"{record}: not a search record")
    s = Constellation(int(g) for g in m.group(4).split(","))
    seed_gamma, seed_stage, base = int(m.group(1)), int(m.group(2)), int(m.group(3))
    seed = make_seed(s, seed_gamma, seed_stage)

    result = BfsResult(s, seed, base, [], [])
    keep = 1
    pending: list[tuple[int, int, str]] = []
    truncated_here = False
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if line.startswith("# truncated"):
            truncated_here = True
        elif line.startswith("# end"):
            stage = int(line.split()[2])
            if not result.stages:
                level = [seed]
            else:
                prev = result.nodes[-1]
                P = core.primorial(result.stages[-1])
                level = [
                    InstanceNode(prev[i].gamma0 + k * P, stage, Kind(kind), i, k)
                    for i, k, kind in pending
                ]
            result.stages.append(stage)
            result.nodes.append(level)
            if truncated_here:
                result.truncated = True
                result.truncated_stages.append(stage)
            pending, truncated_here, keep = [], False, lineno
        elif line:
            stage, parent, k, kind = line.split(",")
            if parent != "None":
                pending.append((int(parent), int(k), kind))

    # drop the interrupted tail, then restore interior offsets for the frontier
    with open(record, "w") as fh:
        fh.writelines(lines[:keep])
    frontier = result.nodes[-1]
    stage = result.stages[-1]
    P = core.primorial(stage)
    cand = _interior_offsets(s)
    for node in frontier:
        if node.kind is Kind.EXACT:
            node.interior = cand[:0]
        else:
            node.interior = np.array(
                [t for t in cand if math.gcd(node.gamma0 + int(t), P) == 1], dtype=np.int64
            )

    with open(record, "a") as fh:
        _run(result, up_to, max_width, max_depth, _Recorder(fh), progress)
    return result


@dataclass(frozen=True)
class MinExact:
    value: int | None
    stage: int
    lower_bound_only: bool


def min_exact_instance(s, result: BfsResult) -> MinExact:
    """Smallest exact-instance gamma0 at the deepest stage of a search."""
    stage = result.stages[-1]
    exact = [n.gamma0 for n in result.nodes[-1] if n.kind is Kind.EXACT]
    return MinExact(min(exact) if exact else None, stage, result.truncated)


# --------------------------------------------------------------------------
# unique prefixes

@dataclass(frozen=True)
class UniquePrefix:
    coords: PrimorialCoords
    last_unique_stage: int
    terminal_stage: int
    gamma0: int
    kind: Kind


def unique_prefix(
    s,
    seed: InstanceNode,
    base_prime: int = DEFAULT_BASE_PRIME,
    progress: Callable[[int, int], None] | None = None,
) -> UniquePrefix:
    """Follow the single lift of a unique seed until a stage has two or more."""
    s = s if isinstance(s, Constellation) else Constellation(s)
    if not core.is_admissible(s):
        raise ValueError("unique prefixes need an admissible constellation")
    from .cycles import count_point_survivals_crt

    n = count_point_survivals_crt(s, seed.stage)
    if n != 1:
        raise ValueError(f"seed is not unique: {n} occurrences at stage {seed.stage}")
    node = make_seed(s, seed.gamma0, seed.stage) if seed.interior is None else seed
    while True:
        level, _ = _expand(s, [node], node.stage, 2)
        q = core.next_prime(node.stage)
        if progress:
            progress(q, core.rho(s, q))
        if len(level) != 1:
            break
        node = level[0]
    if node.stage < base_prime:
        raise ValueError(f"prefix ends at stage {node.stage}, below the base prime {base_prime}")
    coords = encode(node.gamma0, base_prime, node.stage)
    return UniquePrefix(coords, node.stage, q, node.gamma0, node.kind)


def write_prefix_csv(rows: Iterable[tuple[int, PrimorialCoords]], fh: IO[str]) -> None:
    """One row per constellation: index, c0, then coefficients in prime order."""
    rows = list(rows)
    width = max((len(c.coeffs) for _, c in rows), default=0)
    base = rows[0][1].base_prime if rows else DEFAULT_BASE_PRIME
    primes = []
    p = base
    for _ in range(width):
        primes.append(p)
        p = core.next_prime(p)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "c0"] + [f"{p}#" for p in primes])
    for idx, c in rows:
        digits = list(c.digits) + [""] * (width - len(c.coeffs))
        w.writerow([idx, c.base_residue] + digits)
