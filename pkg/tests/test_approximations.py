import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costlab.approximations import ChangeSet, change_set, decode, shift, speedup_transfer
from costlab.costfn import Approximation, c_fragment, total_cost
from costlab.dyadic import ZERO
from costlab.functionals import ConstantFunctional, identity_functional
from costlab.omega import evens, naturals, synthetic


def brute_pairs(a, n):
    """(n, k) is witnessed by stages s_0 < ... < s_k with consecutive disagreement."""
    vals = [a.bit(s, n) for s in range(len(a.snapshots))]
    ks = set()
    # longest alternating subsequence, found by search over all stage subsets
    best = 0

    def walk(last, length):
        nonlocal best
        best = max(best, length)
        for t in range(last + 1, len(vals)):
            if vals[t] != vals[last]:
                walk(t, length + 1)

    for s0 in range(len(vals)):
        walk(s0, 0)
    for k in range(best):
        ks.add((n, k))
    return ks


def test_change_set_examples():
    assert len(change_set(Approximation.constant("0110", 7))) == 0
    a = Approximation(("0000", "0001", "0001", "0000"))
    d = change_set(a)
    assert (3, 0) in d and (3, 1) in d and (3, 2) not in d
    assert d.pairs == ((3, 0), (3, 1))
    assert brute_pairs(a, 3) == {(3, 0), (3, 1)}
    d = change_set(Approximation(("00", "10", "11")))
    assert d.pairs == ((0, 0), (1, 0))


def test_decode_examples():
    assert decode(ChangeSet(()), "0", 0) == 0
    assert decode(ChangeSet(((2, 0), (2, 1))), "000", 2) == 0
    assert decode(ChangeSet(((0, 0),)), "1", 0) == 0


def random_approximation(rng, positions=64, max_changes=10, stages=120):
    flips = {n: sorted(rng.sample(range(1, stages + 1), rng.randint(0, max_changes))) for n in range(positions)}
    cur = [rng.choice("01") for _ in range(positions)]
    snaps = ["".join(cur)]
    for s in range(1, stages + 1):
        for n in range(positions):
            if s in flips[n]:
                cur[n] = "1" if cur[n] == "0" else "0"
        snaps.append("".join(cur))
    return Approximation(tuple(snaps))


@pytest.mark.parametrize("seed", range(5))
def test_decode_round_trip(seed):
    a = random_approximation(random.Random(seed))
    d = change_set(a)
    assert all(decode(d, a.snapshots[0], n) == a.bit(a.horizon, n) for n in range(64))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text("01", min_size=3, max_size=3), min_size=1, max_size=8))
def test_change_set_matches_brute_force(snaps):
    a = Approximation(tuple(snaps))
    d = change_set(a)
    assert set(d.pairs) == set().union(*(brute_pairs(a, n) for n in range(3)))
    # downward closed in k
    assert all((n, k - 1) in d for n, k in d.pairs if k)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text("01", min_size=4, max_size=4), min_size=2, max_size=8), st.integers(1, 7))
def test_change_set_monotone_in_stage_prefix(snaps, cut):
    a = Approximation(tuple(snaps))
    short = Approximation(tuple(snaps[: min(cut, len(snaps))]))
    assert change_set(short).pairs == change_set(a).pairs[: len(change_set(short))]


def test_change_set_json_round_trip():
    d = change_set(Approximation(("000", "010", "000", "001")))
    assert d.to_json() == "[[1, 0], [1, 1], [2, 0]]"
    assert ChangeSet.from_json(d.to_json()) == d


def test_shift():
    assert shift("1011") == "011"
    with pytest.raises(ValueError):
        shift("")
    a = Approximation(("10", "11", "01"))
    assert shift(a).snapshots == tuple(shift(x) for x in a.snapshots)
    assert shift(Approximation.constant("0101", 4)) == Approximation.constant("101", 4)


# --- speed-up transfer ----------------------------------------------------------------


@pytest.fixture(scope="module")
def long_stream():
    return synthetic(21, 400)


def test_speedup_identity_is_subsampling(long_stream):
    b = random_approximation(random.Random(3), positions=40, max_changes=4, stages=400)
    res = speedup_transfer(b, identity_functional(), long_stream, evens(), slack=3)
    assert res.stages == sorted(set(res.stages))
    for i, s in enumerate(res.stages):
        assert res.approximation.snapshots[i] == b.snapshots[s]
    assert all(row.ok for row in res.ledger)
    assert res.within_slack
    assert res.a_total == total_cost(res.approximation, c_fragment(long_stream, evens()))
    assert res.b_total <= res.b_full_total


@pytest.mark.parametrize("slack", [0, 1, 3, 5])
def test_speedup_ledger_bound_across_slack(long_stream, slack):
    b = random_approximation(random.Random(slack), positions=30, max_changes=6, stages=400)
    res = speedup_transfer(b, identity_functional(), long_stream, naturals(), slack=slack)
    assert all(row.ok for row in res.ledger)
    assert res.within_slack


def test_speedup_constant_psi(long_stream):
    b = random_approximation(random.Random(1), positions=10, stages=400)
    res = speedup_transfer(b, ConstantFunctional("0" * 500), long_stream, evens())
    assert len(set(res.approximation.snapshots)) == 1
    assert res.a_total == ZERO


def test_speedup_constant_b(long_stream):
    b = Approximation.constant("0110" * 25, 400)
    res = speedup_transfer(b, identity_functional(), long_stream, evens())
    assert len(set(res.approximation.snapshots)) == 1


def test_speedup_truncation_reported():
    b = Approximation.constant("01" * 50, 30)
    res = speedup_transfer(b, identity_functional(), synthetic(0, 30, "sparse"), evens(), slack=0)
    assert res.truncated is not None and res.truncated["horizon"] == 30
