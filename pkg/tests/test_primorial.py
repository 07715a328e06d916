import random

import pytest
from hypothesis import given, strategies as st

from nonconvex import core, cycles, primorial as pm
from nonconvex.core import Constellation
from nonconvex.cycles import Kind
from nonconvex.verify import random_admissible


def test_encode_examples():
    assert pm.encode(107) == pm.PrimorialCoords(11, 107, ())
    assert pm.encode(2310) == pm.PrimorialCoords(11, 0, ((11, 1),))
    assert pm.encode(107 + 6 * 2310) == pm.PrimorialCoords(11, 107, ((11, 6),))
    assert pm.encode(107, stage=17).coeffs == ((11, 0), (13, 0))


def test_decode_examples():
    assert pm.decode(pm.PrimorialCoords(11, 0, ())) == 0
    assert pm.decode(pm.PrimorialCoords(11, 0, ((11, 0), (13, 0)))) == 0
    with pytest.raises(ValueError):
        pm.decode(pm.PrimorialCoords(11, 107, ((11, 13),)))
    with pytest.raises(ValueError):
        pm.decode(pm.PrimorialCoords(11, 2310, ()))
    with pytest.raises(ValueError):
        pm.decode(pm.PrimorialCoords(11, 0, ((13, 1),)))


def test_worked_example_magnitude(s25_gamma0):
    assert core.format_sci(s25_gamma0, 8) == "2.2313949e50"


@given(st.integers(min_value=0, max_value=10**60))
def test_roundtrip(x):
    assert pm.decode(pm.encode(x)) == x


@given(st.integers(min_value=0, max_value=10**40), st.sampled_from([2, 3, 5, 11, 13]))
def test_roundtrip_other_bases(x, base):
    c = pm.encode(x, base)
    assert pm.decode(c) == x
    assert pm.encode(pm.decode(c), base) == c


def test_text_format():
    c = pm.PrimorialCoords.from_digits(11, 107, (6, 8, 0))
    assert pm.format_coords(c) == "107 +6*11# +8*13# +0*17#"
    assert pm.parse_coords("107 +6*11# +8*13# +0*17#") == c
    assert pm.parse_coords(str(c)) == c
    with pytest.raises(ValueError):
        pm.parse_coords("107 +6*11# +8*17#")
    with pytest.raises(ValueError):
        pm.parse_coords("107 6*11#")


def test_coords_stage():
    assert pm.PrimorialCoords(11, 107, ()).stage == 11
    c = pm.PrimorialCoords.from_digits(11, 107, pm.S25_PREFIX)
    assert c.stage == 131


def test_make_seed():
    seed = pm.make_seed((2,), 5, 3)
    assert seed.kind is Kind.EXACT
    with pytest.raises(ValueError):
        pm.make_seed((2,), 7, 3)  # 9 is not 3-rough
    with pytest.raises(ValueError):
        pm.make_seed((2,), 7, 2)  # outside [1, 2]
    assert pm.make_seed((6,), 1, 3).kind is Kind.DRIVING


def test_bfs_twins():
    seed = pm.make_seed((2,), 5, 3)
    res = pm.bfs_instances((2,), seed, 7, base_prime=3)
    assert [n.gamma0 for n in res.level(5)] == [11, 17, 29]
    assert len(res.level(7)) == 3 * core.rho((2,), 7) == 15


def test_bfs_rejects_inadmissible():
    with pytest.raises(ValueError):
        pm.bfs_instances((2, 2), pm.InstanceNode(3, 2, Kind.EXACT), 7)


def test_bfs_children_structure():
    s = Constellation((2, 4, 2))
    res = pm.bfs_instances(s, pm.make_seed(s, 5, 3), 19, base_prime=3)
    for p, q in zip(res.stages, res.stages[1:]):
        prev, level = res.level(p), res.level(q)
        P = core.primorial(p)
        for i, parent in enumerate(prev):
            kids = [n for n in level if n.parent == i]
            assert len(kids) == core.rho(s, q)
            assert all(n.gamma0 == parent.gamma0 + n.k * P for n in kids)
            if parent.kind is Kind.EXACT:
                assert all(n.kind is Kind.EXACT for n in kids)
    counts = res.counts()
    for p in res.stages:
        assert counts[p] == cycles.count_point_survivals_crt(s, p)


def test_bfs_matches_cycles(small_cycles):
    rng = random.Random(11)
    checked = 0
    for _ in range(12):
        s = random_admissible(rng, max_J=4)
        occ3 = cycles.find_occurrences(small_cycles[3], s)
        if not occ3:
            continue
        results = [pm.bfs_instances(s, pm.make_seed(s, o.gamma0, 3), 13, base_prime=3) for o in occ3]
        for p in (5, 7, 11, 13):
            got = {(n.gamma0, n.kind) for r in results for n in r.level(p)}
            want = {(o.gamma0, o.kind) for o in cycles.find_occurrences(small_cycles[p], s)}
            assert got == want
        checked += 1
    assert checked >= 5


def test_bfs_caps():
    s = Constellation((2,))
    seed = pm.make_seed(s, 5, 3)
    res = pm.bfs_instances(s, seed, 13, max_width=10, base_prime=3)
    assert res.truncated
    assert max(res.counts().values()) == 10
    assert res.truncated_stages[0] == 7
    # capped stages keep the lexicographically smallest coefficient sequences
    full = pm.bfs_instances(s, seed, 7, base_prime=3)
    keys = sorted(full.coords(7, i).key() for i in range(len(full.level(7))))
    assert [res.coords(7, i).key() for i in range(10)] == keys[:10]
    res = pm.bfs_instances(s, seed, 13, max_depth=1, base_prime=3)
    assert res.stages == [3, 5]


def test_bfs_coords():
    s = Constellation((2, 4, 2))
    res = pm.bfs_instances(s, pm.make_seed(s, 5, 3), 11, base_prime=3)
    for i, n in enumerate(res.level(11)):
        c = res.coords(11, i)
        assert pm.decode(c) == n.gamma0
        assert c.stage == 11


def test_min_exact_instance():
    s = Constellation((2, 4, 2))
    res = pm.bfs_instances(s, pm.make_seed(s, 5, 3), 7, base_prime=3)
    m = pm.min_exact_instance(s, res)
    assert (m.value, m.stage, m.lower_bound_only) == (11, 7, False)
    capped = pm.bfs_instances(s, pm.make_seed(s, 5, 3), 11, max_width=2, base_prime=3)
    assert pm.min_exact_instance(s, capped).lower_bound_only
    s6 = Constellation((6,))
    res = pm.bfs_instances(s6, pm.make_seed(s6, 1, 3), 3, base_prime=3)
    assert pm.min_exact_instance(s6, res).value is None


def test_record_and_resume(tmp_path):
    s = Constellation((2, 4, 2))
    seed = pm.make_seed(s, 5, 3)
    path = tmp_path / "run.rec"
    pm.bfs_instances(s, seed, 7, base_prime=3, record=path)
    text = path.read_text()
    assert text.startswith("# bfs seed=5 stage=3 base=3 gaps=2,4,2\n")
    assert "# end 7 3\n" in text
    # simulate a crash partway through the next stage
    with open(path, "a") as fh:
        fh.write("11,0,1,exact-instance\n")
    resumed = pm.resume_bfs(path, 13)
    full = pm.bfs_instances(s, seed, 13, base_prime=3)
    assert resumed.stages == full.stages
    for p in full.stages:
        assert [n.gamma0 for n in resumed.level(p)] == [n.gamma0 for n in full.level(p)]
        assert [n.kind for n in resumed.level(p)] == [n.kind for n in full.level(p)]
    assert path.read_text().count("# end 11") == 1


def test_resume_driving_frontier(tmp_path):
    s = Constellation((6,))
    path = tmp_path / "run.rec"
    pm.bfs_instances(s, pm.make_seed(s, 1, 3), 3, base_prime=3, record=path)
    resumed = pm.resume_bfs(path, 11)
    full = pm.bfs_instances(s, pm.make_seed(s, 1, 3), 11, base_prime=3)
    for p in full.stages:
        assert [(n.gamma0, n.kind) for n in resumed.level(p)] == [
            (n.gamma0, n.kind) for n in full.level(p)
        ]


def test_unique_prefix_small():
    up = pm.unique_prefix((2,), pm.make_seed((2,), 5, 3), base_prime=3)
    assert (up.last_unique_stage, up.terminal_stage) == (3, 5)
    up = pm.unique_prefix((2, 4, 2), pm.make_seed((2, 4, 2), 5, 3), base_prime=3)
    # rho = 1 at 5, then 3 at 7
    assert (up.last_unique_stage, up.terminal_stage) == (5, 7)
    assert pm.decode(up.coords) == up.gamma0 == 11
    with pytest.raises(ValueError):
        pm.unique_prefix((2,), pm.make_seed((2,), 11, 5))


def test_unique_prefix_worked_example(s25_parent):
    head = core.head_child(s25_parent)
    occ = cycles.find_occurrences(cycles.build_cycle_bruteforce(11), head)
    assert [(o.gamma0, o.kind) for o in occ] == [(107, Kind.DRIVING)]
    up = pm.unique_prefix(head, pm.make_seed(head, 107, 11))
    assert up.coords.digits == pm.S25_PREFIX
    assert up.terminal_stage == 137


def test_worked_example_first_exact_stage(s25_parent):
    head = core.head_child(s25_parent)
    res = pm.bfs_instances(head, pm.make_seed(head, 107, 11), 139)
    assert res.first_exact_stage() == 113
    counts = res.counts()
    assert all(counts[p] == 1 for p in core.primes_between(11, 131))
    assert counts[137] == 2 and counts[139] == 4
    assert pm.min_exact_instance(head, res).value is not None


def test_rough_constellation(s25_parent):
    assert (s25_parent.J, s25_parent.span) == (459, 3242)
    assert s25_parent.gaps[0] == s25_parent.gaps[-1] == 2
    assert pm.rough_constellation(11, 7, 8).gaps == (2, 4, 2)
    with pytest.raises(ValueError):
        pm.rough_constellation(9, 7, 8)


def test_prefix_csv():
    import io

    rows = [(0, pm.PrimorialCoords.from_digits(11, 107, (6, 8))), (1, pm.PrimorialCoords.from_digits(11, 109, (6,)))]
    buf = io.StringIO()
    pm.write_prefix_csv(rows, buf)
    assert buf.getvalue() == "index,c0,11#,13#\n0,107,6,8\n1,109,6,\n"
