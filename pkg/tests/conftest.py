import csv
import os
from pathlib import Path

import pytest

from nonconvex import core, cycles, ingest, primorial

DATA = Path(__file__).parent / "data"
ENGELSMA_ENV = "NONCONVEX_ENGELSMA_PARENTS"
ENGELSMA_FORMAT_ENV = "NONCONVEX_ENGELSMA_FORMAT"

_acceptance_lines: list[str] = []


def pytest_addoption(parser):
    parser.addoption(
        "--engelsma-parents",
        default=os.environ.get(ENGELSMA_ENV),
        help="path to the Engelsma (459,3242) parents file (offsets format by default)",
    )
    parser.addoption(
        "--engelsma-format",
        default=os.environ.get(ENGELSMA_FORMAT_ENV, "offsets"),
        choices=ingest.FORMATS,
    )


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL/SKIP line for the acceptance summary.

    Call with ``ok=None`` to mark a skip.  A test that ends without a verdict
    (for instance because it raised) is recorded as a failure.
    """
    seen = []

    def record(name: str, ok: bool | None, detail: str = "") -> bool | None:
        tag = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        _acceptance_lines.append(f"[{tag}] {name}" + (f" -- {detail}" if detail else ""))
        seen.append(name)
        return ok

    yield record
    if not seen:
        _acceptance_lines.append(f"[FAIL] {request.node.name} -- raised before a verdict")


@pytest.fixture(scope="session")
def small_cycles():
    return {p: cycles.build_cycle_bruteforce(p) for p in core.primes_upto(13)}


@pytest.fixture(scope="session")
def s25_gamma0():
    coords = primorial.PrimorialCoords.from_digits(
        11, primorial.S25_BASE_RESIDUE, primorial.S25_PREFIX
    )
    return primorial.decode(coords)


@pytest.fixture(scope="session")
def s25_parent(s25_gamma0):
    """Parent 25 rebuilt from its published unique instance in G(131#)."""
    return primorial.rough_constellation(s25_gamma0, 131, 3242)


@pytest.fixture(scope="session")
def table1():
    with open(DATA / "table1_s25_rho.csv") as fh:
        return {int(r["prime"]): int(r["rho"]) for r in csv.DictReader(fh)}


@pytest.fixture(scope="session")
def table2():
    with open(DATA / "table2_winf.csv") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for r in rows:
        vals = (r["factor_small"], r["factor_large"], r["w"])
        out[int(r["index"])] = vals
        out[int(r["reverse_index"])] = vals
    return out


@pytest.fixture(scope="session")
def engelsma_family(request):
    path = request.config.getoption("--engelsma-parents")
    if not path:
        pytest.skip(f"engelsma data absent: set {ENGELSMA_ENV} or --engelsma-parents")
    fmt = request.config.getoption("--engelsma-format")
    return ingest.build_family_index(ingest.parse(path, fmt))
