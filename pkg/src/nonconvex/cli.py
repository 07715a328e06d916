"""Command-line interface.

Usage:
    nonconvex admissible tuples.txt
    nonconvex rho-table --parents engelsma459.txt --index 25 --primes 13..499
    nonconvex winf --parents engelsma459.txt
    nonconvex prefix --gaps 2,4,2 --base-prime 3
    nonconvex inout --child 2,4 --parent 2,4,2 --primes 3..13
    nonconvex cycle 13 --verify
    nonconvex verify

Exit codes: 0 success, 1 input error, 2 verification failure,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
from contextlib import contextmanager
from typing import Iterator, Sequence

from . import core, cycles, ingest, population, primorial, verify
from .core import Constellation

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3


class InputError(Exception):
    pass


def _prime_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        lo_i, hi_i = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW..HIGH, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"empty prime range {text!r}")
    return lo_i, hi_i


def _gaps(text: str) -> Constellation:
    try:
        return Constellation(int(g) for g in text.replace(" ", ",").split(",") if g)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


@contextmanager
def _output(path: str | None) -> Iterator:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _progress(args):
    if not getattr(args, "progress", False):
        return None
    return lambda *msg: print("[progress]", *msg, file=sys.stderr, flush=True)


def _family(args) -> ingest.FamilyIndex:
    tf = ingest.parse(args.parents, args.format)
    return ingest.build_family_index(tf, progress=_progress(args))


def _records(args) -> list[tuple[int, Constellation]]:
    """Resolve the input selection into (index, constellation) pairs."""
    if getattr(args, "gaps", None):
        recs = list(enumerate(args.gaps))
    elif getattr(args, "parents", None):
        fam = _family(args)
        pool = fam.parents if args.role == "parents" else fam.children
        recs = list(enumerate(pool))
    elif getattr(args, "fixtures", False):
        recs = list(enumerate(ingest.fixtures().constellations))
    elif getattr(args, "input", None):
        src = sys.stdin if args.input == "-" else args.input
        recs = list(enumerate(ingest.parse(src, args.format).constellations))
    else:
        raise InputError("no input: give a tuple file, --gaps, --fixtures or --parents")
    if getattr(args, "index", None):
        wanted = set(args.index)
        recs = [r for r in recs if r[0] in wanted]
    return recs


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="tuple file ('-' for stdin)")
    p.add_argument("--format", choices=ingest.FORMATS, default="offsets")
    p.add_argument("--gaps", type=_gaps, action="append", metavar="G1,G2,...",
                   help="a constellation given inline by its gaps (repeatable)")
    p.add_argument("--fixtures", action="store_true", help="use the bundled small tuples")
    p.add_argument("--parents", metavar="PATH",
                   help="Engelsma (459,3242) parents file; selects the derived family")
    p.add_argument("--role", choices=("children", "parents"), default="children")
    p.add_argument("--index", type=int, action="append", help="restrict to family/record index")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--progress", action="store_true")


# --------------------------------------------------------------------------
# subcommands

def cmd_admissible(args) -> int:
    recs = _records(args)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "J", "span", "admissible", "nonconvex", "pi_span"])
        for i, s in recs:
            w.writerow([
                i, s.J, s.span,
                str(core.is_admissible(s)).lower(),
                str(core.is_nonconvex(s)).lower(),
                core.pi(s.span),
            ])
    return EXIT_OK


def cmd_rho_table(args) -> int:
    lo, hi = args.primes
    rows = [(i, population.rho_profile(s, lo, hi)) for i, s in _records(args)]
    with _output(args.out) as fh:
        population.write_rho_table(rows, fh)
    return EXIT_OK


def cmd_winf(args) -> int:
    rows = [(i, population.winf(s)) for i, s in _records(args)]
    for i, r in rows:
        if not r.admissible:
            print(f"record {i}: inadmissible, w = 0", file=sys.stderr)
    with _output(args.out) as fh:
        population.write_winf_table(rows, fh)
    return EXIT_OK


def cmd_prefix(args) -> int:
    base = core.require_prime(args.base_prime)
    stage = core.require_prime(args.seed_stage or base)
    recs = _records(args)
    cyc = cycles.build_cycle_bruteforce(stage) if args.seed is None else None
    prefixes = []
    for i, s in recs:
        if args.seed is not None:
            gamma0 = args.seed
        else:
            occ = cycles.find_occurrences(cyc, s)
            if not occ:
                raise InputError(f"record {i}: no occurrence in G({stage}#)")
            if len(occ) > 1:
                raise InputError(
                    f"record {i}: {len(occ)} occurrences in G({stage}#), seed is not unique"
                )
            gamma0 = occ[0].gamma0
        try:
            seed = primorial.make_seed(s, gamma0, stage)
            up = primorial.unique_prefix(s, seed, base, progress=_progress(args))
        except ValueError as exc:
            raise InputError(f"record {i}: {exc}") from None
        prefixes.append((i, s, seed, up))
    with _output(args.out) as fh:
        for i, s, seed, up in prefixes:
            fh.write(
                f"{i}\tterminal={up.terminal_stage}\t~{core.format_sci(up.gamma0, 8)}"
                f"\t{primorial.format_coords(up.coords)}\n"
            )
            if args.through:
                _search_report(args, i, s, seed, base, fh)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            primorial.write_prefix_csv([(i, up.coords) for i, _, _, up in prefixes], fh)
    return EXIT_OK


def _search_report(args, i, s, seed, base, fh) -> None:
    """Per-stage node counts of the capped search, as comment lines."""
    prog = _progress(args)
    res = primorial.bfs_instances(
        s, seed, args.through, max_width=args.max_width, base_prime=base,
        record=args.record, progress=(lambda q, n: prog(f"stage {q}: {n} nodes")) if prog else None,
    )
    for q, n in res.counts().items():
        mark = " truncated" if q in res.truncated_stages else ""
        fh.write(f"# {i} stage={q} nodes={n}{mark}\n")
    m = primorial.min_exact_instance(s, res)
    value = "none" if m.value is None else str(m.value)
    bound = " lower-bound-only" if m.lower_bound_only else ""
    fh.write(f"# {i} min_exact_instance stage={m.stage} value={value}{bound}\n")


def cmd_inout(args) -> int:
    initial = tuple(int(x) for x in args.initial.split(","))
    if len(initial) != 2 or min(initial) < 0:
        raise InputError("--initial takes N_OUT,N_IN")
    pairs: list[tuple[object, Constellation, Constellation]] = []
    if args.parents:
        fam = _family(args)
        for i, child in enumerate(fam.children):
            if args.index and i not in args.index:
                continue
            j, _ = fam.parent_of_child(i)
            pairs.append((i, child, fam.parents[j]))
        start, end = args.primes or (131, 1627)
    else:
        if not (args.child and args.parent):
            raise InputError("give --child and --parent, or --parents")
        pairs.append((None, args.child, args.parent))
        if not args.primes:
            raise InputError("--primes START..END is required for an explicit pair")
        start, end = args.primes
    with _output(args.out) as fh:
        for n, (label, child, parent) in enumerate(pairs):
            try:
                rows = population.inout_trajectory(child, parent, start, end, initial)
            except ValueError as exc:
                raise InputError(str(exc)) from None
            population.write_inout_csv(rows, fh, label=label, header=n == 0)
    return EXIT_OK


def cmd_cycle(args) -> int:
    p = core.require_prime(args.p)
    budget = args.budget_mb * 2**20
    cyc = cycles.build_cycle(p, budget)
    status = EXIT_OK
    if args.verify:
        problems = cycles.verify_cycle(cyc)
        prev = core.primes_upto(p)[-2] if p > 2 else None
        if prev is not None:
            rec = cycles.next_cycle_by_recursion(cycles.build_cycle(prev, budget))
            if rec != cyc:
                problems.append(f"recursion from G({prev}#) differs")
        for msg in problems:
            print(f"FAIL {msg}", file=sys.stderr)
        print(
            f"G({p}#): length={len(cyc)} sum={int(cyc.gaps.sum())} "
            f"{'all invariants pass' if not problems else f'{len(problems)} failure(s)'}",
            file=sys.stderr,
        )
        status = EXIT_VERIFY if problems else EXIT_OK
        if args.out is None:
            return status
    with _output(args.out) as fh:
        cycles.write_cycle(cyc, fh)
    return status


def cmd_verify(args) -> int:
    results = verify.run_all()
    for r in results:
        line = f"{'PASS' if r.ok else 'FAIL'}  {r.name}"
        print(line + (f"  ({r.detail})" if r.detail else ""))
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonconvex",
        description="Admissible prime constellations across the cycles of gaps of Eratosthenes sieve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("admissible", help="J, span, admissibility and nonconvexity per record")
    _add_input(p)
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("rho-table", help="admissible residue counts over a prime range")
    _add_input(p)
    p.add_argument("--primes", type=_prime_range, required=True, metavar="LOW..HIGH")
    p.set_defaults(func=cmd_rho_table)

    p = sub.add_parser("winf", help="asymptotic relative populations")
    _add_input(p)
    p.set_defaults(func=cmd_winf)

    p = sub.add_parser("prefix", help="unique primorial prefixes from a seed in the base cycle")
    _add_input(p)
    p.add_argument("--base-prime", type=int, default=primorial.DEFAULT_BASE_PRIME, metavar="P")
    p.add_argument("--seed-stage", type=int, metavar="P", help="stage of the seed (default: base prime)")
    p.add_argument("--seed", type=int, metavar="GAMMA0", help="explicit seed instead of auto")
    p.add_argument("--through", type=int, metavar="P",
                   help="continue a breadth-first search to stage P and report node counts")
    p.add_argument("--max-width", type=_positive, default=primorial.DEFAULT_MAX_WIDTH, metavar="N",
                   help="cap on search nodes per stage")
    p.add_argument("--record", metavar="PATH", help="append-only search record (one seed only)")
    p.add_argument("--csv", metavar="PATH", help="also write the prefix table as CSV")
    p.set_defaults(func=cmd_prefix)

    p = sub.add_parser("inout", help="inside/outside-parent population trajectory")
    p.add_argument("--child", type=_gaps, metavar="G1,G2,...")
    p.add_argument("--parent", type=_gaps, metavar="G1,G2,...")
    p.add_argument("--parents", metavar="PATH")
    p.add_argument("--format", choices=ingest.FORMATS, default="offsets")
    p.add_argument("--index", type=int, action="append")
    p.add_argument("--primes", type=_prime_range, metavar="START..END")
    p.add_argument("--initial", default="0,1", metavar="N_OUT,N_IN")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_inout)

    p = sub.add_parser("cycle", help="dump or verify a cycle of gaps G(p#)")
    p.add_argument("p", type=int)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--budget-mb", type=_positive, default=cycles.DEFAULT_BUDGET // 2**20)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("verify", help="run the small-instance oracle suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except cycles.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, ingest.ParseError, ingest.FamilyIndexError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
