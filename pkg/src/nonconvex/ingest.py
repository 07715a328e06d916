"""Reading constellation datasets and indexing the Engelsma family.

Tuple files hold one constellation per line as whitespace- or
comma-separated integers, either as offsets (``0 2 6 8``) or as gaps
(``2 4 2``).  A line ending in ``,`` or ``\\`` continues on the next line.
``#`` starts a comment; a comment after the numbers tags the record.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Callable, Iterable, Sequence

from . import core
from .core import Constellation
from .cycles import build_cycle_bruteforce, find_occurrences
from .primorial import DEFAULT_BASE_PRIME, PrimorialCoords, make_seed, unique_prefix

__all__ = [
    "FamilyIndex",
    "FamilyIndexError",
    "ParseError",
    "Record",
    "TupleFile",
    "build_family_index",
    "fixtures",
    "parse",
    "parse_text",
    "serialize",
    "write_jsonl",
]

FORMATS = ("offsets", "gaps")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = "<input>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


@dataclass(frozen=True)
class Record:
    constellation: Constellation
    line: int
    tags: tuple[str, ...] = ()


@dataclass
class TupleFile:
    path: str
    format: str
    records: list[Record] = field(default_factory=list)

    @property
    def constellations(self) -> list[Constellation]:
        return [r.constellation for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


def _tokens(body: str) -> list[str]:
    for ch in "[](),":
        body = body.replace(ch, " ")
    return body.split()


def parse_text(text: str, format: str = "offsets", source: str = "<input>") -> TupleFile:
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {format!r}")
    tf = TupleFile(source, format)
    seen: dict[Constellation, int] = {}
    buf: list[str] = []
    tags: list[str] = []
    start = None

    def finish(lineno: int) -> None:
        nonlocal buf, tags, start
        try:
            nums = [int(tok) for tok in buf]
        except ValueError as exc:
            raise ParseError(f"not an integer ({exc})", start, source) from None
        try:
            if format == "offsets":
                if len(nums) < 2:
                    raise ParseError("need at least two offsets", start, source)
                diffs = [b - a for a, b in zip(nums, nums[1:])]
                if any(d <= 0 for d in diffs):
                    raise ParseError("offsets are not strictly increasing", start, source)
                gaps = diffs
            else:
                gaps = nums
            for g in gaps:
                if g % 2:
                    raise ParseError(f"odd gap {g}", start, source)
            s = Constellation(gaps)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), start, source) from None
        if s in seen:
            raise ParseError(f"duplicate of the record on line {seen[s]}", start, source)
        seen[s] = start
        tf.records.append(Record(s, start, tuple(tags)))
        buf, tags, start = [], [], None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        body = body.strip()
        if not body:
            if buf and not comment.strip():
                raise ParseError("empty line inside a continued record", lineno, source)
            continue
        if start is None:
            start = lineno
        cont = body.endswith(",") or body.endswith("\\")
        buf.extend(_tokens(body.rstrip("\\")))
        if comment.strip():
            tags.extend(comment.split())
        if not cont:
            finish(lineno)
    if buf:
        raise ParseError("file ends inside a continued record", start, source)
    return tf


def parse(path: str | os.PathLike | IO[str], format: str = "offsets") -> TupleFile:
    if hasattr(path, "read"):
        return parse_text(path.read(), format, getattr(path, "name", "<stream>"))
    with open(path) as fh:
        return parse_text(fh.read(), format, os.fspath(path))


def serialize(records: TupleFile | Iterable[Constellation], format: str = "offsets") -> str:
    if isinstance(records, TupleFile):
        records = records.constellations
    out = io.StringIO()
    for s in records:
        nums = core.points(s) if format == "offsets" else s.gaps
        out.write(" ".join(map(str, nums)) + "\n")
    return out.getvalue()


def fixtures() -> TupleFile:
    """Bundled small tuples; the ``inadmissible`` tag marks negative controls."""
    text = resources.files("nonconvex").joinpath("data/fixtures.txt").read_text()
    return parse_text(text, "gaps", "fixtures.txt")


# --------------------------------------------------------------------------
# family index

class FamilyIndexError(ValueError):
    pass


@dataclass
class FamilyIndex:
    """Parents and children ordered by their unique primorial prefixes.

    With N parents (M = N/2 per mirror block):

    * parent ``j`` and parent ``N-1-j`` are reverses of each other;
    * for ``j < M``, head_child(parent j) is child ``j`` and
      tail_child(parent j) is child ``j + M``;
    * child ``i`` and child ``2N-1-i`` are reverses of each other.
    """

    parents: list[Constellation]
    children: list[Constellation]
    parent_prefixes: list[PrimorialCoords]
    child_prefixes: list[PrimorialCoords]
    mirror_lex_consistent: bool = True
    problems: list[str] = field(default_factory=list)

    @property
    def n_parents(self) -> int:
        return len(self.parents)

    @property
    def block(self) -> int:
        return len(self.parents) // 2

    def reverse_parent(self, j: int) -> int:
        return self.n_parents - 1 - j

    def reverse_child(self, i: int) -> int:
        return 2 * self.n_parents - 1 - i

    def head_of(self, j: int) -> int:
        N, M = self.n_parents, self.block
        return j if j < M else N + j - M

    def tail_of(self, j: int) -> int:
        N, M = self.n_parents, self.block
        return j + M if j < M else N + j

    def parent_of_child(self, i: int) -> tuple[int, str]:
        N, M = self.n_parents, self.block
        if i < M:
            return i, "head"
        if i < N:
            return i - M, "tail"
        if i < N + M:
            return i - N + M, "head"
        return i - N, "tail"

    def check(self) -> list[str]:
        problems = []
        N = self.n_parents
        for j, p in enumerate(self.parents):
            if p.gaps[0] != 2 or p.gaps[-1] != 2:
                problems.append(f"parent {j} does not begin and end with gap 2")
            if core.reverse(p) != self.parents[self.reverse_parent(j)]:
                problems.append(f"parent {self.reverse_parent(j)} is not the reverse of parent {j}")
            if core.head_child(p) != self.children[self.head_of(j)]:
                problems.append(f"child {self.head_of(j)} is not the head of parent {j}")
            if core.tail_child(p) != self.children[self.tail_of(j)]:
                problems.append(f"child {self.tail_of(j)} is not the tail of parent {j}")
        for i, c in enumerate(self.children):
            if core.reverse(c) != self.children[self.reverse_child(i)]:
                problems.append(f"child {self.reverse_child(i)} is not the reverse of child {i}")
        if len(self.children) != 2 * N:
            problems.append(f"{len(self.children)} children for {N} parents")
        return problems


def _prefix(s: Constellation, cycle, base_prime: int, what: str) -> PrimorialCoords:
    occ = find_occurrences(cycle, s)
    if not occ:
        raise FamilyIndexError(f"{what}: no occurrence in G({base_prime}#)")
    if len(occ) > 1:
        raise FamilyIndexError(
            f"{what}: {len(occ)} occurrences in G({base_prime}#), need a unique seed"
        )
    seed = make_seed(s, occ[0].gamma0, base_prime)
    return unique_prefix(s, seed, base_prime).coords


def build_family_index(
    parents: TupleFile | Sequence[Constellation],
    count: int | None = 58,
    J: int | None = 459,
    span: int | None = 3242,
    base_prime: int = DEFAULT_BASE_PRIME,
    strict: bool = True,
    progress: Callable[[str], None] | None = None,
) -> FamilyIndex:
    """Order a family of parents and derive its children.

    The half of each reversal pair with the smaller prefix goes in the
    first block, sorted by prefix; the second block mirrors it so that
    parent N-1-j is the reverse of parent j.  Children of the first-block
    parents are sorted by their own prefixes, and the remaining children
    mirror them.
    """
    if isinstance(parents, TupleFile):
        parents = parents.constellations
    parents = list(parents)
    if count is not None and len(parents) != count:
        raise FamilyIndexError(f"expected {count} parents, got {len(parents)}")
    for j, p in enumerate(parents):
        if J is not None and p.J != J:
            raise FamilyIndexError(f"parent record {j}: length {p.J}, expected {J}")
        if span is not None and p.span != span:
            raise FamilyIndexError(f"parent record {j}: span {p.span}, expected {span}")
        if p.J < 2:
            raise FamilyIndexError(f"parent record {j} has no children")
    members = set(parents)
    if len(members) != len(parents):
        raise FamilyIndexError("duplicate parents")
    for j, p in enumerate(parents):
        if core.reverse(p) not in members:
            raise FamilyIndexError(f"parent record {j} has no reversed partner")
        if core.reverse(p) == p:
            raise FamilyIndexError(f"parent record {j} is its own reverse")

    cycle = build_cycle_bruteforce(base_prime)
    prefix: dict[Constellation, PrimorialCoords] = {}
    for j, p in enumerate(parents):
        prefix[p] = _prefix(p, cycle, base_prime, f"parent record {j}")
        if progress:
            progress(f"parent {j + 1}/{len(parents)} prefix to stage {prefix[p].stage}")

    first = sorted(
        (p for p in parents if prefix[p].key() < prefix[core.reverse(p)].key()),
        key=lambda p: prefix[p].key(),
    )
    second = [core.reverse(p) for p in reversed(first)]
    ordered = first + second
    second_keys = [prefix[p].key() for p in second]
    mirror_lex = second_keys == sorted(second_keys, reverse=True)

    kids = []
    for j, p in enumerate(first):
        kids += [core.head_child(p), core.tail_child(p)]
    kid_prefix = {}
    for i, c in enumerate(kids):
        kid_prefix[c] = _prefix(c, cycle, base_prime, f"child {i} of the first block")
        if progress:
            progress(f"child {i + 1}/{len(kids)} prefix to stage {kid_prefix[c].stage}")
    kids.sort(key=lambda c: kid_prefix[c].key())
    children = kids + [core.reverse(c) for c in reversed(kids)]
    child_prefixes = [kid_prefix[c] for c in kids]
    child_prefixes += [
        _prefix(c, cycle, base_prime, "mirrored child") for c in children[len(kids):]
    ]

    index = FamilyIndex(
        ordered,
        children,
        [prefix[p] for p in ordered],
        child_prefixes,
        mirror_lex,
    )
    index.problems = index.check()
    if strict and index.problems:
        raise FamilyIndexError("; ".join(index.problems))
    return index


def write_jsonl(index: FamilyIndex, fh: IO[str]) -> None:
    """One JSON object per constellation: index, role, gaps, span, J."""
    for j, p in enumerate(index.parents):
        rec = {"index": j, "role": "parent", "gaps": list(p.gaps), "span": p.span, "J": p.J}
        fh.write(json.dumps(rec) + "\n")
    for i, c in enumerate(index.children):
        _, role = index.parent_of_child(i)
        rec = {"index": i, "role": role, "gaps": list(c.gaps), "span": c.span, "J": c.J}
        fh.write(json.dumps(rec) + "\n")
