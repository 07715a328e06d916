import math
import random

import pytest
from hypothesis import given, strategies as st

from nonconvex import core
from nonconvex.core import Constellation, PrimeTable

gap_lists = st.lists(st.sampled_from([2, 4, 6, 8, 10, 12, 14]), min_size=1, max_size=8)


def trial_division_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


@pytest.mark.parametrize(
    "gaps, pts",
    [((2,), (0, 2)), ((2, 4, 2), (0, 2, 6, 8)), ((4, 2), (0, 4, 6))],
)
def test_points(gaps, pts):
    assert core.points(gaps) == pts


@pytest.mark.parametrize("bad", [(), (3,), (2, 0), (2, -2), (2, 5)])
def test_constellation_rejects_bad_gaps(bad):
    with pytest.raises(ValueError):
        Constellation(bad)


def test_from_offsets():
    assert Constellation.from_offsets([0, 2, 6, 8]).gaps == (2, 4, 2)
    with pytest.raises(ValueError):
        Constellation.from_offsets([0, 2, 2])


def test_nu_examples():
    assert core.nu((2,), 3) == 2
    # residues of {0,2,6,8} mod 7 are {0,2,6,1}
    assert core.nu((2, 4, 2), 7) == 4


def test_rho_examples():
    assert core.rho((2,), 5) == 3
    with pytest.raises(ValueError):
        core.rho((2,), 9)


def test_admissibility():
    assert core.is_admissible((2, 4, 2))
    assert not core.is_admissible((2, 2))
    assert core.is_admissible((2,))


def test_nonconvex_small():
    assert not core.is_nonconvex((2,))
    with pytest.raises(ValueError):
        core.is_nonconvex((2, 4, 2), PrimeTable.build(5))


def test_pi_spans():
    assert core.pi(3240) == 457
    assert core.pi(3242) == 457
    assert core.pi(8) == 4


def test_reverse_and_children():
    assert core.reverse((2, 4)).gaps == (4, 2)
    assert core.head_child((2, 4, 2)).gaps == (2, 4)
    assert core.tail_child((2, 4, 2)).gaps == (4, 2)
    assert core.extend_right((2, 4), 2).gaps == (2, 4, 2)
    assert core.extend_left((4, 2), 2).gaps == (2, 4, 2)
    with pytest.raises(ValueError):
        core.head_child((2,))
    with pytest.raises(ValueError):
        core.tail_child((2,))


def test_primorials():
    assert core.primorial(5) == 30
    assert core.phi_primorial(5) == 8
    assert core.format_sci(core.phi_primorial(457), 3) == "1.99e186"
    assert core.format_sci(458 * core.primorial(457), 6) == "1.00368e190"
    with pytest.raises(ValueError):
        core.primorial(6)


def test_prime_table_against_trial_division():
    pt = PrimeTable.build(10_000)
    count = 0
    for x in range(10_001):
        count += trial_division_is_prime(x)
        assert pt.pi(x) == count
    assert pt.primes == tuple(n for n in range(10_001) if trial_division_is_prime(n))


def test_prime_table_queries():
    pt = PrimeTable.build(100)
    assert pt.next_prime(89) == 97
    assert pt.between(10, 20) == (11, 13, 17, 19)
    assert pt.grow(50) is pt
    assert pt.grow(200).limit == 200
    with pytest.raises(ValueError):
        pt.pi(101)
    with pytest.raises(ValueError):
        pt.next_prime(97)


def test_is_prime_large():
    assert core.is_prime(2**31 - 1)
    assert not core.is_prime(2**31 + 1)


@pytest.mark.parametrize(
    "x, digits, text",
    [
        (2310, 3, "2.31e3"),
        (1, 4, "1.000e0"),
        (9999, 3, "1.00e4"),
        (12345, 4, "1.234e4"),  # half to even
        (12355, 4, "1.236e4"),
        (0, 4, "0"),
    ],
)
def test_format_sci(x, digits, text):
    assert core.format_sci(x, digits) == text


def test_format_sci_fraction():
    from fractions import Fraction

    assert core.format_sci(Fraction(1, 3), 3) == "3.33e-1"
    assert core.sci_parts(Fraction(1, 1000), 2) == (10, -3)


@given(gap_lists)
def test_rho_bounds(gaps):
    s = Constellation(gaps)
    for p in core.primes_upto(60):
        r = core.rho(s, p)
        assert 0 <= r <= p - 1
        assert r >= p - (s.J + 1)


@given(gap_lists)
def test_rho_counts_free_residues(gaps):
    s = Constellation(gaps)
    pts = core.points(s)
    for p in core.primes_upto(100):
        free = sum(1 for r in range(p) if all((r + t) % p for t in pts))
        assert free == core.rho(s, p)


@given(gap_lists)
def test_reversal_invariants(gaps):
    s = Constellation(gaps)
    r = core.reverse(s)
    assert core.reverse(r) == s
    assert (r.J, r.span) == (s.J, s.span)
    assert all(core.nu(r, p) == core.nu(s, p) for p in core.primes_upto(50))
    assert core.is_admissible(r) == core.is_admissible(s)
    assert core.is_nonconvex(r) == core.is_nonconvex(s)


@given(st.lists(st.sampled_from([2, 4, 6, 8]), min_size=2, max_size=8))
def test_children_drop_one_point(gaps):
    parent = Constellation(gaps)
    for child, dropped in ((core.head_child(parent), gaps[-1]), (core.tail_child(parent), gaps[0])):
        assert child.J == parent.J - 1
        assert child.span == parent.span - dropped
        for p in core.primes_upto(40):
            assert 0 <= core.nu(parent, p) - core.nu(child, p) <= 1
    assert core.extend_right(core.head_child(parent), gaps[-1]) == parent
    assert core.extend_left(core.tail_child(parent), gaps[0]) == parent


def test_admissibility_only_needs_small_primes():
    rng = random.Random(1)
    for _ in range(200):
        s = Constellation(rng.choice([2, 4, 6]) for _ in range(rng.randint(1, 6)))
        full = all(core.rho(s, q) > 0 for q in core.primes_upto(200))
        assert core.is_admissible(s) == full
