import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from costlab.dyadic import ONE, ZERO, Dyadic
from costlab.omega import (
    INFINITY,
    LeftCEApprox,
    column_union,
    evens,
    fragment,
    naturals,
    odds,
    omega_source,
    parse_set,
    replay,
    synthetic,
    toy_machine,
)
from costlab.toy_machine import PROGRAM_TABLE


def stream(*vals):
    return LeftCEApprox([Dyadic.parse(v) for v in vals])


def test_toy_machine_table_is_small_and_prefix_free():
    programs = [p for p, _ in PROGRAM_TABLE]
    assert len(programs) <= 64
    for a in programs:
        for b in programs:
            assert a == b or not b.startswith(a)


def test_toy_machine_first_increment_is_half():
    shortest = min(PROGRAM_TABLE, key=lambda e: len(e[0]))
    assert len(shortest[0]) == 1
    omega = toy_machine(10)
    first = next(s for s in range(1, 11) if omega[s] != ZERO)
    assert omega[first] == Dyadic(1, 1)


def test_toy_machine_accumulates_halting_mass():
    omega = toy_machine(2000)
    expected = sum((Dyadic.pow2(-len(p)) for p, _ in PROGRAM_TABLE), ZERO)
    assert omega[2000] == expected < ONE
    assert omega[0] == ZERO


@pytest.mark.parametrize("profile", ["steady", "bursty", "sparse"])
def test_synthetic_is_left_ce(profile):
    s = synthetic(0, 200, profile)
    assert s[0] == ZERO
    assert all(s[i] <= s[i + 1] for i in range(200))
    assert s[200] < ONE
    assert synthetic(0, 200, profile).values == s.values


def test_synthetic_steady_strictly_increases():
    assert synthetic(3, 100).noop_stages == ()


def test_replay_roundtrip(tmp_path):
    src = synthetic(1, 30, "bursty")
    path = tmp_path / "s.jsonl"
    path.write_text(src.to_jsonl())
    back = replay(path)
    assert back.values == src.values
    assert omega_source("replay", path=path).values == src.values


def test_replay_rejects_decreasing(tmp_path):
    path = tmp_path / "bad.jsonl"
    rows = [{"stage": 0, "value": "0/2^0"}, {"stage": 1, "value": "1/2^1"}, {"stage": 2, "value": "1/2^2"}]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    with pytest.raises(ValueError):
        replay(path)


def test_replay_rejects_out_of_bounds(tmp_path):
    path = tmp_path / "bad.jsonl"
    rows = [{"stage": 0, "value": "0/2^0"}, {"stage": 1, "value": "1/2^0"}]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    with pytest.raises(ValueError):
        replay(path)


def test_k_index_examples():
    assert stream("0", "1/4").k_index(0, 1) == 2
    assert stream("0", "3/16").k_index(0, 1) == 2
    assert stream("0", "0").k_index(0, 1) == INFINITY
    with pytest.raises(ValueError):
        stream("0", "1/4").k_index(1, 0)


def test_k_index_monotone_and_bracketed():
    for omega in (toy_machine(400), synthetic(5, 120, "bursty")):
        T = omega.horizon
        for n in range(0, T, 7):
            for s in range(n, T):
                assert omega.k_index(n, s + 1) <= omega.k_index(n, s)
                if n + 1 <= s:
                    assert omega.k_index(n + 1, s) >= omega.k_index(n, s)
                k = omega.k_index(n, s)
                if k != INFINITY:
                    assert Dyadic.pow2(-k - 1) < omega.gap(n, s) <= Dyadic.pow2(-k)


def test_fragment_examples():
    omega = stream("0", "11/16")  # 0.1011
    assert omega.bits(1, 4) == "1011"
    assert fragment(omega, evens(), 1, 2) == "11"
    assert fragment(omega, odds(), 1, 2) == "01"
    assert fragment(omega, naturals(), 1, 4) == "1011"


def test_fragments_interleave_back():
    omega = toy_machine(2000)
    full = omega.bits(2000, 40)
    e = fragment(omega, evens(), 2000, 20)
    o = fragment(omega, odds(), 2000, 20)
    assert "".join(a + b for a, b in zip(e, o)) == full


def test_fragment_past_horizon():
    r = column_union([1], 2)
    r.horizon = 10
    with pytest.raises(ValueError):
        fragment(stream("0", "1/2"), r, 1, 20)


def test_column_union_examples():
    assert column_union([1], 2).elements(10) == [0, 2, 4, 6, 8]
    assert column_union([1, 2], 2).elements(10) == list(range(10))
    # residues 0,1 mod 4 below 12: 0,1,4,5,8,9
    assert column_union([1, 2], 4).count_below(12) == 6
    assert column_union([2, 4], 4).count_below(12) == 6
    with pytest.raises(ValueError):
        column_union([], 3)


@given(st.integers(0, 300))
def test_complement_partitions(m):
    r = parse_set("col:1/3")
    assert r.count_below(m) + r.complement().count_below(m) == m


def test_parse_set_names():
    assert parse_set("not:evens").elements(6) == [1, 3, 5]
    assert parse_set("zero+odds").elements(6) == [0, 1, 3, 5]
    assert parse_set("primes").elements(12) == [2, 3, 5, 7, 11]
