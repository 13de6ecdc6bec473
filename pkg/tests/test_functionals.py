import itertools
import random

import pytest

from costlab.clopen import ClopenSet, hat
from costlab.costfn import Approximation, CostFunction, c_omega, monotonicity_violation
from costlab.dyadic import ONE, ZERO, Dyadic
from costlab.functionals import (
    DelayQueue,
    FiniteFunctional,
    InconsistentAxiom,
    error_set,
    gamma_allocate,
    build_cA,
    preimage,
    solovay_assembly,
    u_set,
)
from costlab.omega import toy_machine


def brute_measure(pred, depth):
    """Measure of {Y : pred(Y↾depth)} by enumerating all strings of that depth."""
    hits = sum(1 for bits in itertools.product("01", repeat=depth) if pred("".join(bits)))
    return Dyadic(hits, depth)


def random_functional(rng, stages=6, per_stage=4, depth=5, out_len=6):
    f = FiniteFunctional()
    for s in range(stages):
        for _ in range(per_stage):
            o = "".join(rng.choice("01") for _ in range(rng.randint(1, depth)))
            t = "".join(rng.choice("01") for _ in range(rng.randint(0, out_len)))
            if f.is_consistent(o, t):
                f.add(s, o, t)
    return f


def test_preimage_examples():
    f = FiniteFunctional()
    assert not preimage(f, 5, "0")
    f.add(0, "0", "01")
    assert preimage(f, 0, "0") == ClopenSet(["0"])
    assert preimage(f, 0, "0").measure() == Dyadic(1, 1)
    f.add(1, "11", "")
    assert preimage(f, 1, "") == ClopenSet(["0", "11"])


def test_consistency_enforced():
    f = FiniteFunctional()
    f.add(0, "0", "01")
    with pytest.raises(InconsistentAxiom):
        f.add(1, "01", "00")
    f.add(1, "01", "011")
    assert f.compute(1, "0110") == "011"
    assert f.compute(0, "0110") == "01"
    assert f.use(1, "0110", 2) == 2


@pytest.mark.parametrize("seed", range(6))
def test_preimage_matches_brute_force(seed):
    f = random_functional(random.Random(seed))
    for sigma in ["", "0", "10", "011"]:
        got = preimage(f, 5, sigma).measure()
        assert got == brute_measure(lambda y: _computes(f, 5, y, sigma), 5)


def _computes(f, s, y, sigma):
    return any(y.startswith(ax.oracle) for ax in f.at(s)) and f.compute(s, y).startswith(sigma)


@pytest.mark.parametrize("seed", range(6))
def test_preimages_of_incomparable_outputs_disjoint(seed):
    f = random_functional(random.Random(seed))
    for a, b in [("0", "1"), ("01", "00"), ("110", "10")]:
        assert not (preimage(f, 5, a) & preimage(f, 5, b))


def test_error_set_examples():
    f = FiniteFunctional()
    f.add(0, "0", "10")
    assert error_set(f, 0, "11") == ClopenSet(["0"])
    g = FiniteFunctional()
    g.add(0, "1", "01")
    assert not error_set(g, 0, "00")


@pytest.mark.parametrize("seed", range(4))
def test_error_set_monotone_for_ce_target(seed):
    rng = random.Random(seed)
    f = random_functional(rng)
    target = ["0"] * 6
    last = ZERO
    for s in range(6):
        target[rng.randrange(6)] = "1"
        m = error_set(f, s, "".join(target)).measure()
        assert m >= last
        assert m == brute_measure(lambda y: _left(f.compute(s, y), "".join(target)), 5)
        last = m


def _left(tau, target):
    for a, b in zip(tau, target.ljust(len(tau), "0")):
        if a != b:
            return a < b
    return False


def test_hat_and_u_set():
    assert hat("001011") == "001010"
    assert hat("1") == "0"
    with pytest.raises(ValueError):
        hat("")
    assert not u_set(FiniteFunctional(), 0, "")


@pytest.mark.parametrize("seed", range(6))
def test_u_sets_on_nested_chain_disjoint(seed):
    f = random_functional(random.Random(seed), out_len=6)
    chain = ["0", "01", "011", "0110"]
    for a, b in itertools.combinations(chain, 2):
        assert not (u_set(f, 5, a) & u_set(f, 5, b))


def test_delay_queue():
    q = DelayQueue()
    q.submit("0", "1")
    q.submit("1", "00")
    assert q.release("00") == [("1", "00")]
    assert q.held == [("0", "1")]
    assert q.release("10") == [("0", "1")]


# --- Solovay assembly ------------------------------------------------------------------


def test_solovay_assembly_examples():
    f = FiniteFunctional()
    assert solovay_assembly(f, Approximation.constant("01", 5)).total == ZERO
    f.add(0, "01", "1")
    a = Approximation(("0", "0", "1"))
    res = solovay_assembly(f, a)
    assert res.total == Dyadic(1, 2)
    assert res.pieces[0][0] == 1


@pytest.mark.parametrize("seed", range(5))
def test_solovay_assembly_matches_resummation(seed):
    rng = random.Random(seed)
    f = random_functional(rng, out_len=4)
    snaps = ["".join(rng.choice("01") for _ in range(4)) for _ in range(7)]
    a = Approximation(tuple(snaps))
    total = ZERO
    for s in range(6):
        n = a.least_change(s + 1)
        if n is None:
            continue
        want = snaps[s + 1][: n + 1]
        total = total + brute_measure(lambda y: f.compute(s, y).startswith(want), 5)
    assert solovay_assembly(f, a).total == total


# --- c_A ---------------------------------------------------------------------------------


def test_cA_empty_functional():
    a = Approximation.from_enumeration({2: [1]}, 6, 6)
    build = build_cA(a, a, FiniteFunctional(), horizon=6)
    assert all(build.cost(x, s) == ZERO for s in range(7) for x in range(s))


def test_cA_single_oracle():
    a = Approximation.constant("0" * 9, 8)
    f = FiniteFunctional()
    f.add(2, "10", "0")
    build = build_cA(a, a, f, horizon=8)
    assert build.cost(0, 1) == ZERO
    assert all(build.cost(0, s) == Dyadic(1, 2) for s in range(2, 9))
    assert build.cost(1, 5) == ZERO


def test_cA_rejects_bad_speedup():
    c = Approximation.constant("00000", 4)
    a = Approximation(("00000", "00000", "10000", "10000", "10000"))
    with pytest.raises(ValueError):
        build_cA(c, a, FiniteFunctional(), horizon=4)


def delayed_functional(rng, c_enum, per_stage=3, depth=6):
    """Random consistent axioms whose outputs never lie right of C_s."""
    f = FiniteFunctional()
    for s in range(1, c_enum.horizon + 1):
        target = c_enum.snapshots[s]
        for _ in range(per_stage):
            o = "".join(rng.choice("01") for _ in range(rng.randint(2, depth)))
            m = rng.randint(1, len(target))
            t = target[:m]
            if rng.random() < 0.3:
                j = rng.randrange(m)
                if t[j] == "1":
                    t = t[:j] + "0" + t[j + 1:]
            if f.is_consistent(o, t):
                f.add(s, o, t)
    return f


@pytest.mark.parametrize("seed", range(4))
def test_cA_monotone_and_obedient(seed):
    rng = random.Random(seed)
    events = {s: [rng.randrange(12)] for s in range(1, 16) if rng.random() < 0.5}
    a = Approximation.from_enumeration(events, 16, 17)
    f = delayed_functional(rng, a)
    build = build_cA(a, a, f, horizon=16)
    assert monotonicity_violation(build.cost, 16) is None
    assert all(row["ok"] for row in build.ledger)
    assert build.ledger_total <= build.epsilon_total
    assert build.final_error <= ONE


# --- Γ allocator ----------------------------------------------------------------------------


def test_gamma_zero_cost():
    a = Approximation.constant("0000", 5)
    run = gamma_allocate(a, CostFunction(lambda x, s: ZERO, "zero"), 5)
    assert run.functional.axioms == [] and not run.violations


def test_gamma_single_level():
    quarter = CostFunction(lambda x, s: Dyadic(1, 2) if x == 0 else ZERO, "quarter")
    a = Approximation.constant("0000", 6)
    run = gamma_allocate(a, quarter, 6)
    assert not run.violations
    assert sum((Dyadic.pow2(-len(ax.oracle)) for ax in run.functional.axioms), ZERO) == Dyadic(1, 2)
    assert len({ax.stage for ax in run.functional.axioms}) == 1


def test_gamma_one_change():
    quarter = CostFunction(lambda x, s: Dyadic(1, 2) if x == 0 else ZERO, "quarter")
    a = Approximation(("0",) * 3 + ("1",) * 3)
    run = gamma_allocate(a, quarter, 5)
    assert not run.violations
    assert run.error_history[-1] == Dyadic(1, 2)
    assert run.live_history[-1][0] == Dyadic(1, 2)


@pytest.mark.parametrize("seed", range(3))
def test_gamma_exact_mass_on_stream(seed):
    omega = toy_machine(30 + 10 * seed).truncate(30).scaled(Dyadic(1, 2))
    rng = random.Random(seed)
    events = {s: [rng.randrange(10)] for s in range(1, 31) if rng.random() < 0.2}
    a = Approximation.from_enumeration(events, 30, 10)
    c = c_omega(omega)
    run = gamma_allocate(a, c, 30)
    assert not run.violations
    for t in range(1, 31):
        assert run.live_history[t] == [c(x, t) for x in range(t)]
        assert run.error_history[t] <= run.cost_history[t]
