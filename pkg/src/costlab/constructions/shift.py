"""A cost function c >= d and a c.e. set A obeying c whose shift does not.

Strategy e works against the enumeration B^e. It makes ``c(s-1, s)`` large
(at least ``α_e``) and ``c(s, ·)`` small (about ``2^-e α_e``), then puts s into
A once B^e has committed to ``s-1 ∉ B^e_s``. If B^e follows the shift
T(A), it must later add ``s-1`` at a price of at least ``α_e``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..costfn import Approximation, CostFunction, total_cost
from ..dyadic import ONE, ZERO, Dyadic
from .trace import StageTrace


def alphas(count: int) -> list[Dyadic]:
    """``α_0 = 1`` and ``α_{e+1} = 2^-e α_e``."""
    out = [ONE]
    for e in range(count - 1):
        out.append(out[-1].scale2(-e))
    return out


# --- enumerations to defeat ----------------------------------------------------------


class Enumeration:
    """A possibly partial enumeration ``B_0 ⊆ B_1 ⊆ ...``.

    ``value(t, u, history)`` returns ``B_t`` if it has converged by real
    stage u, else None. ``history[v]`` is A after stage v.
    """

    name = "enumeration"

    def value(self, t: int, u: int, history: list[frozenset[int]]) -> frozenset[int] | None:
        raise NotImplementedError


def shift_set(a: frozenset[int]) -> frozenset[int]:
    return frozenset(n - 1 for n in a if n > 0)


@dataclass
class Mirror(Enumeration):
    """``B_t = T(A_t)``, visible ``delay`` stages later; stops converging at ``stop``."""

    delay: int = 1
    stop: int | None = None

    @property
    def name(self):
        return f"mirror:{self.delay}" + (f":stop{self.stop}" if self.stop is not None else "")

    def value(self, t, u, history):
        if t + self.delay > u or (self.stop is not None and t >= self.stop):
            return None
        return shift_set(history[t])


class Partial(Enumeration):
    name = "partial"

    def value(self, t, u, history):
        return None


@dataclass
class RandomEnumeration(Enumeration):
    """An unrelated c.e. set: each stage adds a random small number with probability 1/3."""

    seed: int
    limit: int = 64

    def __post_init__(self):
        rng = random.Random(self.seed)
        self._adds: dict[int, int] = {}
        self._rng = rng

    @property
    def name(self):
        return f"random:{self.seed}"

    def value(self, t, u, history):
        if t + 1 > u:
            return None
        while len(self._adds) <= t:
            n = len(self._adds)
            self._adds[n] = self._rng.randrange(self.limit) if self._rng.random() < 1 / 3 else -1
        return frozenset(x for i, x in self._adds.items() if i <= t and x >= 0)


def family_from_spec(spec: str, count: int) -> list[Enumeration]:
    """``mirror:<d>`` (all mirrors with delay d), ``mirrors`` (delays 1..count),
    ``partial``, ``random:<seed>``, or a comma list of single entries."""
    if spec == "mirrors":
        return [Mirror(1 + e) for e in range(count)]
    if spec == "partial":
        return [Partial() for _ in range(count)]
    if "," in spec:
        parts = spec.split(",")
        if len(parts) != count:
            raise ValueError(f"family lists {len(parts)} entries for {count} strategies")
        return [family_from_spec(p, 1)[0] for p in parts]
    if spec.startswith("mirror:"):
        return [Mirror(int(spec.split(":")[1])) for _ in range(count)]
    if spec.startswith("random:"):
        seed = int(spec.split(":")[1])
        return [RandomEnumeration(seed + e) for e in range(count)]
    raise ValueError(f"unknown family {spec!r}")


# --- the construction ------------------------------------------------------------------


@dataclass
class Declarations:
    """``c(x, t) = max(d(x, t), α)`` over declarations ``(p, st, α)`` with x <= p, st <= t."""

    floor: CostFunction
    items: list[tuple[int, int, Dyadic]] = field(default_factory=list)

    def declare(self, position: int, stage: int, value: Dyadic) -> None:
        self.items.append((position, stage, value))

    def declared(self, x: int, t: int) -> Dyadic:
        best = ZERO
        for p, st, v in self.items:
            if x <= p and st <= t and v > best:
                best = v
        return best

    def __call__(self, x: int, t: int) -> Dyadic:
        if x >= t:
            return ZERO
        return max(self.floor(x, t), self.declared(x, t))

    def cost_function(self) -> CostFunction:
        return CostFunction(self.__call__, f"declared>={self.floor.name}", "custom")


@dataclass
class StrategyState:
    e: int
    alpha: Dyadic
    step: int = 1
    s: int = 0
    visits: int = 0
    spent: Dyadic = ZERO
    resets: int = 0
    done: bool = False
    b_stage: int = -1  # last converged stage of B^e
    b_cost: Dyadic = ZERO  # c⟨B^e_t⟩ up to b_stage
    b_prev: frozenset[int] = frozenset()
    cost_at: dict[int, Dyadic] = field(default_factory=dict)  # b_cost after each stage t

    @property
    def bound(self) -> Dyadic:
        return self.alpha.scale2(-self.e)


@dataclass
class ShiftRun:
    a: frozenset[int]
    approximation: Approximation
    cost: CostFunction
    strategies: list[StrategyState]
    trace: StageTrace
    a_total: Dyadic


def _least_diff(x: frozenset[int], y: frozenset[int]) -> int | None:
    diff = x ^ y
    return min(diff) if diff else None


def run_shift(d: CostFunction, family: list[Enumeration], horizon: int,
              keep_passing: bool = True, probes_per_stage: int = 8) -> ShiftRun:
    count = len(family)
    trace = StageTrace("shift", {"d": d.name, "family": [b.name for b in family], "horizon": horizon},
                       keep_passing=keep_passing)
    decl = Declarations(d)
    strategies = [StrategyState(e, al) for e, al in enumerate(alphas(count))]
    a: set[int] = set()
    history: list[frozenset[int]] = [frozenset()]
    rng = random.Random(horizon)

    def advance_b(st: StrategyState, u: int) -> None:
        """Pull newly converged stages of B^e and charge their least change."""
        b = family[st.e]
        while True:
            val = b.value(st.b_stage + 1, u, history)
            if val is None:
                return
            st.b_stage += 1
            t = st.b_stage
            if t > 0:
                x = _least_diff(st.b_prev, val)
                if x is not None:
                    st.b_cost = st.b_cost + decl(x, t)
            st.b_prev = val
            st.cost_at[t] = st.b_cost

    for u in range(1, horizon + 1):
        history.append(history[-1])  # A_u starts as A_{u-1}
        # phase 1: declarations
        for st in strategies:
            if st.done:
                continue
            if st.step == 1:
                st.s = u
                decl.declare(u - 1, u, st.alpha)
                trace.event(u, "declare", e=st.e, step=1, position=u - 1, value=st.alpha)
                _audit_declaration(trace, strategies, st, u, st.alpha, decl)
                st.step = 2
            elif st.step == 2 and u == st.s + 1:
                decl.declare(st.s, u, st.bound)
                trace.event(u, "declare", e=st.e, step=2, position=st.s, value=st.bound)
                _audit_declaration(trace, strategies, st, u, st.bound, decl)
                st.step = 3
        # phase 2: waits, with c(·, u) now final
        for st in strategies:
            if st.done:
                continue
            advance_b(st, u)
            if st.step == 3:
                s = st.s
                bs = family[st.e].value(s, u, history)
                if decl(s, u) > st.bound:
                    st.step, st.resets = 1, st.resets + 1
                    cause = "d" if d(s, u) > st.bound else "declaration"
                    trace.event(u, "reset", e=st.e, s=s, case="3a", cause=cause)
                elif s in a:
                    st.step, st.resets = 1, st.resets + 1
                    trace.event(u, "reset", e=st.e, s=s, case="3b")
                elif bs is not None and (s - 1) not in bs:
                    a.add(s)
                    history[u] = frozenset(a)
                    price = decl(s, u)
                    st.spent = st.spent + price
                    trace.event(u, "enumerate", e=st.e, x=s, cost=price)
                    trace.check("shift.cost", u, st.spent <= Dyadic.pow2(-st.e),
                                {"e": st.e, "spent": st.spent})
                    st.step = 4
            elif st.step == 4:
                s = st.s
                hit = next((r for r in range(s + 1, st.b_stage + 1)
                            if (s - 1) in family[st.e].value(r, u, history)), None)
                if hit is not None:
                    st.visits += 1
                    gain = st.cost_at[hit] - st.cost_at[s]
                    trace.check("shift.cycle", u, gain >= st.alpha,
                                {"e": st.e, "s": s, "r": hit, "gain": gain, "alpha": st.alpha})
                    trace.check("shift.visits", u, st.visits * st.alpha <= ONE,
                                {"e": st.e, "visits": st.visits, "alpha": st.alpha})
                    if st.cost_at[hit] >= ONE:
                        st.done = True
                        trace.event(u, "terminate", e=st.e, ledger=st.cost_at[hit])
                    else:
                        st.step = 1
        # c >= d on probes of this stage
        probes = {0, u - 1} | {rng.randrange(u) for _ in range(probes_per_stage)}
        probes |= {p for p, st_, _ in decl.items[-2 * count:] if p < u}
        for x in sorted(probes):
            trace.check("shift.floor", u, decl(x, u) >= d(x, u), {"x": x, "s": u})
        if trace.violated:
            break
    width = horizon + 2
    approx = Approximation(tuple("".join("1" if i in h else "0" for i in range(width)) for h in history))
    cost = decl.cost_function()
    a_total = total_cost(approx, cost)
    last = len(history) - 1
    for st in strategies:
        b = family[st.e]
        final = st.b_prev if st.b_stage >= 0 else None
        equal = final is not None and final == shift_set(history[last])
        if equal:
            parked = not st.done
            trace.check("shift.mirror", last, st.done and st.b_cost >= ONE or parked,
                        {"e": st.e, "enumeration": b.name, "ledger": st.b_cost, "step": st.step})
    budget = sum((Dyadic.pow2(-st.e) for st in strategies), ZERO)
    trace.check("shift.cost", last, a_total <= budget, {"a_total": a_total, "budget": budget})
    return ShiftRun(frozenset(a), approx, cost, strategies, trace, a_total)


def _audit_declaration(trace: StageTrace, strategies: list[StrategyState], actor: StrategyState,
                       u: int, value: Dyadic, decl: Declarations) -> None:
    """A junior declaration must not exceed any waiting senior's bound."""
    for st in strategies:
        if st.e < actor.e and not st.done and st.step == 3:
            trace.check("shift.declare", u, value <= st.bound,
                        {"senior": st.e, "junior": actor.e, "value": value, "bound": st.bound})
