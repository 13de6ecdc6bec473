from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costlab.clopen import ClopenSet, ProductClopenSet, hat, lies_left
from costlab.dyadic import Dyadic


def all_strings(n):
    return ["".join(p) for p in product("01", repeat=n)]


def brute_measure(gens, depth):
    """Count length-``depth`` strings extending some generator."""
    hits = sum(1 for w in all_strings(depth) if any(w.startswith(g) for g in gens))
    return Dyadic(hits, depth)


def brute_product(pairs, depth):
    words = all_strings(depth)
    hits = sum(
        1
        for u in words
        for v in words
        if any(u.startswith(s) and v.startswith(t) for s, t in pairs)
    )
    return Dyadic(hits, 2 * depth)


bitstrings = st.text(alphabet="01", max_size=8)
gen_lists = st.lists(bitstrings, max_size=10)


# --- dyadic -----------------------------------------------------------------


def test_dyadic_canonical_form():
    assert Dyadic(4, 3) == Dyadic(1, 1)
    assert (Dyadic(4, 3).num, Dyadic(4, 3).exp) == (1, 1)
    assert (Dyadic(0, 7).num, Dyadic(0, 7).exp) == (0, 0)


def test_dyadic_roundtrip_text():
    for text in ["0/2^0", "3/2^4", "5/2^3", "1/2^0"]:
        assert str(Dyadic.parse(text)) == text
    assert Dyadic.parse("3/16") == Dyadic(3, 4)
    with pytest.raises(ValueError):
        Dyadic.parse("1/3")


def test_dyadic_subtraction_stays_nonnegative():
    with pytest.raises(ValueError):
        Dyadic(1, 2) - Dyadic(1, 1)


@given(st.integers(0, 1 << 40), st.integers(0, 30), st.integers(0, 1 << 40), st.integers(0, 30))
def test_dyadic_matches_fractions(a, e, b, f):
    x, y = Dyadic(a, e), Dyadic(b, f)
    fx, fy = x.to_fraction(), y.to_fraction()
    assert (x + y).to_fraction() == fx + fy
    assert (x * y).to_fraction() == fx * fy
    assert (x < y) == (fx < fy)
    assert max(x, y).to_fraction() == max(fx, fy)
    if fx >= fy:
        assert (x - y).to_fraction() == fx - fy


@pytest.mark.parametrize(
    "value,k", [("1/4", 2), ("3/16", 2), ("1/1", 0), ("1/8", 3), ("5/16", 1)]
)
def test_floor_neg_log2(value, k):
    d = Dyadic.parse(value)
    assert d.floor_neg_log2() == k
    assert Dyadic.pow2(-k - 1) < d <= Dyadic.pow2(-k)


# --- clopen sets ------------------------------------------------------------


@pytest.mark.parametrize(
    "gens,expected",
    [(["" ], "1/2^0"), (["00", "01", "1"], "1/2^0"), (["010", "1"], "5/2^3"), ([], "0/2^0")],
)
def test_measure_examples(gens, expected):
    assert ClopenSet(gens).measure() == Dyadic.parse(expected)


def test_measure_example_against_brute_force():
    assert brute_measure(["010", "1"], 3) == Dyadic(5, 3)


def test_set_algebra_examples():
    u = ClopenSet(["00"]) | ClopenSet(["01"])
    assert u == ClopenSet(["0"]) and u.measure() == Dyadic(1, 1)
    d = ClopenSet(["0"]) - ClopenSet(["01"])
    assert d == ClopenSet(["00"]) and d.measure() == Dyadic(1, 2)
    i = ClopenSet(["010", "1"]) & ClopenSet(["01"])
    assert i == ClopenSet(["010"]) and i.measure() == Dyadic(1, 3)
    assert i.measure() == brute_measure(["010"], 3)


@given(gen_lists)
def test_measure_matches_brute_force(gens):
    assert ClopenSet(gens).measure() == brute_measure(gens, 8)


@given(gen_lists)
def test_normalization_idempotent(gens):
    s = ClopenSet(gens)
    again = ClopenSet(s.gens)
    assert again == s and again.gens == s.gens
    assert all(not a.startswith(b) for a in s.gens for b in s.gens if a != b)


@given(gen_lists, gen_lists)
def test_inclusion_exclusion(a, b):
    a, b = ClopenSet(a), ClopenSet(b)
    assert (a | b).measure() + (a & b).measure() == a.measure() + b.measure()
    assert (a - b).measure() + (a & b).measure() == a.measure()
    assert (a - b).isdisjoint(b)


@given(gen_lists, gen_lists)
def test_set_algebra_matches_pointwise(a, b):
    sa, sb = ClopenSet(a), ClopenSet(b)
    for w in all_strings(8):
        ina = any(w.startswith(g) for g in a)
        inb = any(w.startswith(g) for g in b)
        assert (sa | sb).contains_cylinder(w) == (ina or inb)
        assert (sa & sb).contains_cylinder(w) == (ina and inb)
        assert (sa - sb).contains_cylinder(w) == (ina and not inb)


def test_lies_left_examples():
    assert lies_left("010", "011")
    assert not lies_left("01", "011")
    assert not lies_left("11", "10")


@given(bitstrings, bitstrings)
def test_lies_left_antisymmetric(t, a):
    assert not (lies_left(t, a) and lies_left(a, t))
    if t.startswith(a) or a.startswith(t):
        assert not lies_left(t, a)
    else:
        assert lies_left(t, a) != lies_left(a, t)


@given(bitstrings, bitstrings, bitstrings)
def test_lies_left_transitive(a, b, c):
    if lies_left(a, b) and lies_left(b, c):
        assert lies_left(a, c)


def test_hat():
    assert hat("001011") == "001010"
    assert hat("1") == "0"
    with pytest.raises(ValueError):
        hat("")


# --- product sets -----------------------------------------------------------


def test_product_examples():
    p = ProductClopenSet([("0", "1")])
    assert p.measure() == Dyadic(1, 2)
    assert p.proj1() == ClopenSet(["0"]) and p.proj2() == ClopenSet(["1"])
    q = ProductClopenSet([("0", "0"), ("1", "1")])
    assert q.measure() == Dyadic(1, 1)
    assert q.proj1() == ClopenSet.full() and q.proj2() == ClopenSet.full()
    r = ProductClopenSet([("00", "1"), ("0", "11")])
    assert r.measure() == brute_product([("00", "1"), ("0", "11")], 2) == Dyadic(3, 4)


pair_lists = st.lists(st.tuples(st.text("01", max_size=4), st.text("01", max_size=4)), max_size=6)


@settings(max_examples=60)
@given(pair_lists)
def test_product_measure_brute_force(pairs):
    assert ProductClopenSet(pairs).measure() == brute_product(pairs, 4)


@settings(max_examples=60)
@given(pair_lists, pair_lists)
def test_product_algebra(a, b):
    pa, pb = ProductClopenSet(a), ProductClopenSet(b)
    assert (pa | pb).measure() == brute_product(a + b, 4)
    assert (pa | pb).measure() + (pa & pb).measure() == pa.measure() + pb.measure()
    assert (pa - pb).measure() + (pa & pb).measure() == pa.measure()


@given(pair_lists)
def test_product_submultiplicative(pairs):
    p = ProductClopenSet(pairs)
    assert p.measure() <= p.proj1().measure() * p.proj2().measure()
