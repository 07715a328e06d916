"""Small-instance oracle suite.

Each check pits a fast path against an independent brute-force route on
materialized cycles G(p#) with p <= 13.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from . import core, cycles, population, primorial
from .core import Constellation

__all__ = ["CheckResult", "CHECKS", "random_admissible", "random_extension_pair", "run_all"]

ORACLE_PRIMES = (5, 7, 11, 13)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def random_admissible(rng: random.Random, max_J: int = 5, gaps=(2, 4, 6, 8, 10, 12)) -> Constellation:
    while True:
        s = Constellation(rng.choice(gaps) for _ in range(rng.randint(1, max_J)))
        if core.is_admissible(s):
            return s


def random_extension_pair(rng: random.Random, max_J: int = 5) -> tuple[Constellation, Constellation]:
    """A child with gaps in {2, 4} and its extension by a gap 2 on either side.

    Such children have no driving terms from G(3#) on, so every occurrence is
    an exact instance and the inside/outside model applies.
    """
    while True:
        child = Constellation(rng.choice((2, 4)) for _ in range(rng.randint(1, max_J)))
        if core.is_admissible(child):
            break
    parent = core.extend_right(child, 2) if rng.random() < 0.5 else core.extend_left(child, 2)
    return child, parent


def _cycles(upto: int = 13) -> dict[int, cycles.GapCycle]:
    return {p: cycles.build_cycle_bruteforce(p) for p in core.primes_upto(upto)}


def check_recursion() -> CheckResult:
    bad = []
    cyc = _cycles()
    for p in ORACLE_PRIMES:
        prev = cyc[core.primes_upto(p)[-2]]
        if cycles.next_cycle_by_recursion(prev) != cyc[p]:
            bad.append(f"recursion to G({p}#) differs from brute force")
        bad += [f"G({p}#): {msg}" for msg in cycles.verify_cycle(cyc[p])]
    return CheckResult("cycle recursion equals brute force", not bad, "; ".join(bad))


def check_rho_bruteforce(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(50):
        s = random_admissible(rng)
        pts = core.points(s)
        for q in core.primes_upto(100):
            free = sum(1 for r in range(q) if all((r + t) % q for t in pts))
            if free != core.rho(s, q):
                return CheckResult("rho matches residue enumeration", False, f"{s} mod {q}")
    return CheckResult("rho matches residue enumeration", True)


def check_crt_counts(seed: int = 0, trials: int = 100) -> CheckResult:
    rng = random.Random(seed)
    cyc = _cycles()
    for _ in range(trials):
        s = random_admissible(rng)
        for p in ORACLE_PRIMES:
            brute = len(cycles.find_occurrences(cyc[p], s))
            crt = cycles.count_point_survivals_crt(s, p)
            if brute != crt:
                return CheckResult(
                    "occurrence counts equal product of rho", False,
                    f"{s} in G({p}#): brute force {brute}, product {crt}",
                )
    return CheckResult("occurrence counts equal product of rho", True, f"{trials} constellations")


def matrix_vs_bruteforce(child, parent, start: int = 3, end: int = 13, cyc=None) -> list[str]:
    cyc = cyc or _cycles(end)
    n_in, n_out = cycles.count_in_out(cyc[start], child, parent)
    rows = population.inout_trajectory(child, parent, start, end, (n_out, n_in))
    bad = []
    for row in rows:
        got = cycles.count_in_out(cyc[row.prime], child, parent)
        if got != (row.n_in, row.n_out):
            bad.append(
                f"{child}/{parent} at {row.prime}: model (in={row.n_in}, out={row.n_out}), "
                f"brute force (in={got[0]}, out={got[1]})"
            )
    return bad


def check_matrix_model(seed: int = 0, pairs: int = 5) -> CheckResult:
    rng = random.Random(seed)
    cyc = _cycles()
    todo = [(Constellation((2, 4)), Constellation((2, 4, 2)))]
    todo += [random_extension_pair(rng) for _ in range(pairs)]
    bad = []
    for child, parent in todo:
        bad += matrix_vs_bruteforce(child, parent, cyc=cyc)
    step = population.inout_step(population.InOutState(3, 0, 1), 2, 1, 5)
    if (step.n_out, step.n_in) != (1, 1):
        bad.append(f"worked step gave {step}")
    return CheckResult("inside/outside model equals brute force", not bad, "; ".join(bad[:3]))


def check_delta(seed: int = 0, pairs: int = 20) -> CheckResult:
    rng = random.Random(seed)
    bad = []
    for _ in range(pairs):
        child, parent = random_extension_pair(rng)
        threshold = max(child.J + 1, parent.span // 2)
        for q in core.primes_upto(10 * parent.span):
            d = population.delta(child, parent, q)
            if d not in (0, 1) or (q > threshold and d != 1):
                bad.append(f"{child}/{parent}: delta({q}) = {d}")
                break
    return CheckResult("delta in {0,1}, and 1 past half the span", not bad, "; ".join(bad[:3]))


def check_bfs_vs_cycles(seed: int = 0, trials: int = 10) -> CheckResult:
    rng = random.Random(seed)
    cyc = _cycles()
    for _ in range(trials):
        s = random_admissible(rng, max_J=4)
        occ3 = cycles.find_occurrences(cyc[3], s)
        if not occ3:
            continue
        res = None
        for o in occ3:
            seed_node = primorial.make_seed(s, o.gamma0, 3)
            r = primorial.bfs_instances(s, seed_node, 13, base_prime=3)
            res = r if res is None else _merge(res, r)
        for p in ORACLE_PRIMES:
            got = {(n.gamma0, n.kind) for n in res.level(p)}
            want = {(o.gamma0, o.kind) for o in cycles.find_occurrences(cyc[p], s)}
            if got != want:
                return CheckResult("search nodes equal cycle occurrences", False, f"{s} at {p}")
    return CheckResult("search nodes equal cycle occurrences", True)


def _merge(a: primorial.BfsResult, b: primorial.BfsResult) -> primorial.BfsResult:
    for la, lb in zip(a.nodes, b.nodes):
        la.extend(lb)
    return a


def check_coords(seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    for _ in range(1000):
        x = rng.randrange(10**60)
        if primorial.decode(primorial.encode(x)) != x:
            return CheckResult("coordinates round-trip", False, str(x))
    return CheckResult("coordinates round-trip", True)


CHECKS: list[Callable[[], CheckResult]] = [
    check_recursion,
    check_rho_bruteforce,
    check_crt_counts,
    check_matrix_model,
    check_delta,
    check_bfs_vs_cycles,
    check_coords,
]


def run_all() -> list[CheckResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as exc:  # a crashing check is a failing check
            out.append(CheckResult(check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out
