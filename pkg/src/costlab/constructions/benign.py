"""From a benign cost function c to a computable R with ``c_{Ω,R}`` above c.

R is a sparse sequence ``m_0 < m_1 < ...`` chosen so that the weights
``2^-m_i · g(2^-(i+1)) / δ`` sum below 1. A left-c.e. β records every stage
where c outgrows ``c_{Ω,R}``; the stream Ω is built alongside β so that
``Ω_s - Ω_n`` always exceeds ``δ(β_s - β_n)``. Each increase of β at level i
is matched, within the same stage, by an increase of Ω of just over
``2^-m_i``, which lifts ``c_{Ω,R}(s,s+1)`` to at least ``2^-i``.
"""

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Callable
from dataclasses import dataclass

from ..costfn import CostFunction
from ..dyadic import ONE, ZERO, Dyadic
from ..omega import ComputableSet, LeftCEApprox
from .trace import StageTrace


def g_inverse(eps: Dyadic) -> int:
    """``⌈1/eps⌉``, the bound that fits ``c_Ω``."""
    if eps <= ZERO:
        raise ValueError("eps must be positive")
    return -(-(1 << eps.exp) // eps.num)


def choose_sequence(g: Callable[[Dyadic], int], delta: Dyadic, count: int,
                    start: list[int] | None = None) -> list[int]:
    """Least ``m_i > m_{i-1}`` with ``2^-m_i g(2^-(i+1)) / δ <= 2^-(i+2)``."""
    out: list[int] = list(start or [])
    for i in range(len(out), count):
        m = out[-1] + 1 if out else 0
        weight = Dyadic(g(Dyadic.pow2(-(i + 1)))).scale2(delta.floor_neg_log2())
        while weight.scale2(-m) > Dyadic.pow2(-(i + 2)):
            m += 1
        out.append(m)
    return out


class _Sparse:
    """Membership and counts for the growing sequence ``m_0 < m_1 < ...``."""

    def __init__(self, g, delta):
        self.g, self.delta = g, delta
        self.seq: list[int] = []
        self.members: set[int] = set()

    def _extend(self) -> None:
        self.seq = choose_sequence(self.g, self.delta, len(self.seq) + 1, self.seq)
        self.members.add(self.seq[-1])

    def element(self, i: int) -> int:
        while len(self.seq) <= i:
            self._extend()
        return self.seq[i]

    def __contains__(self, m: int) -> bool:
        while not self.seq or self.seq[-1] < m:
            self._extend()
        return m in self.members

    def count_below(self, k: int) -> int:
        while not self.seq or self.seq[-1] < k:
            self._extend()
        return bisect_left(self.seq, k)


@dataclass
class BenignRun:
    r: ComputableSet
    m: list[int]
    beta: LeftCEApprox
    omega: LeftCEApprox
    increments: dict[int, int]  # level i -> number of stages
    trace: StageTrace


def benign_to_fragment(g: Callable[[Dyadic], int], delta: Dyadic, base: LeftCEApprox, horizon: int,
                       cost: CostFunction | None = None, keep_passing: bool = True,
                       tick: int = 8) -> BenignRun:
    """Run the β/Ω construction for ``horizon`` stages.

    ``cost=None`` means c is ``c_Ω`` of the stream under construction; any
    other CostFunction is read as given. The stream is
    ``Ω_s = base_s / 4 + (forced increases) + Σ_{t<=s} 2^-(t+tick)``; the
    last term keeps it strictly increasing.
    """
    if delta <= ZERO or delta > ONE or Dyadic.pow2(-delta.floor_neg_log2()) != delta:
        raise ValueError("delta must be a power of two in (0, 1]")
    trace = StageTrace("benign", {"delta": delta, "base": getattr(base, "name", ""), "horizon": horizon,
                                  "cost": cost.name if cost else "self"}, keep_passing=keep_passing)
    seq = _Sparse(g, delta)
    # count_below over the sequence, cached by k
    f_cache: list[int] = []

    def f(k: int) -> int:
        while len(f_cache) <= k:
            f_cache.append(seq.count_below(len(f_cache)))
        return f_cache[k]

    # exact values held as integers over a common 2^E
    E = 0
    vals: list[int] = []
    beta: list[int] = []

    def rescale(e_new: int) -> None:
        nonlocal E
        if e_new <= E:
            return
        sh = e_new - E
        vals[:] = [v << sh for v in vals]
        beta[:] = [b << sh for b in beta]
        E = e_new

    def as_int(d: Dyadic) -> int:
        rescale(d.exp)
        return d.num << (E - d.exp)

    def k_of(gap: int) -> float:
        return float("inf") if gap <= 0 else E - (gap - 1).bit_length()

    quarter = Dyadic.pow2(-2)
    vals.append(as_int(base[0] * quarter))
    beta.append(0)
    forced_total = ZERO
    ticks = ZERO
    increments: dict[int, int] = {}
    row: list[int] = []  # f(k_s(n)) for n < s at the current stage s
    for s in range(horizon):
        t = s + 1
        ticks = ticks + Dyadic.pow2(-(t + tick))
        plain = base[min(t, base.horizon)] * quarter + forced_total + ticks

        def least_violation(extra: Dyadic) -> tuple[int, int] | None:
            top = as_int(plain + extra)
            for n in range(t):
                if cost is None:
                    # integer form of c(n,t) > c_{Ω,R}(n,s) for c = c_Ω
                    size = (top - vals[n] - 1).bit_length()
                    if n >= s or size > E - row[n]:
                        return n, max(0, E - size)
                    continue
                cn = cost(n, t)
                if cn > (ZERO if n >= s else Dyadic.pow2(-row[n])):
                    return n, max(0, cn.floor_neg_log2())
            return None

        hit = least_violation(ZERO)
        level = None
        extra = ZERO
        if hit is not None:
            # settle on a level i whose own forced increase keeps i the answer
            level = hit[1]
            while True:
                m_i = seq.element(level)
                extra = Dyadic.pow2(-m_i) + Dyadic.pow2(-(m_i + 8))
                again = least_violation(extra)
                if again[1] >= level:
                    hit = again
                    break
                level = again[1]
        if level is None:
            step = ZERO
        else:
            m_i = seq.element(level)
            step = Dyadic.pow2(-m_i).scale2(delta.floor_neg_log2())
            forced_total = forced_total + extra
            increments[level] = increments.get(level, 0) + 1
            trace.event(t, "beta", n=hit[0], i=level, m=m_i, step=step)
            bound = g(Dyadic.pow2(-(level + 1)))
            trace.check("benign.per-i", t, increments[level] <= bound,
                        {"i": level, "count": increments[level], "g": bound})
        top_d = plain + extra
        rescale(max(top_d.exp, step.exp))
        vals.append(as_int(top_d))
        beta.append(beta[-1] + as_int(step))
        gain = Dyadic(vals[t] - vals[s], E)
        rise = delta * Dyadic(beta[t] - beta[s], E)
        trace.check("benign.coupling", t, rise < gain, {"stage": t, "omega_gain": gain, "delta_beta": rise})
        # pointwise domination c(n,t) <= c_{Ω,R}(n,t) for all n < t
        row = [f(k_of(vals[t] - vals[n])) for n in range(t)]
        bad = None
        for n in range(t):
            if cost is None:
                ok = (vals[t] - vals[n] - 1).bit_length() <= E - row[n]
            else:
                ok = cost(n, t) <= Dyadic.pow2(-row[n])
            if not ok:
                bad = n
                break
        trace.check("benign.domination", t, bad is None, {"n": bad, "s": t})
        if trace.violated:
            break
    last = len(vals) - 1
    beta_final = Dyadic(beta[last], E)
    trace.check("benign.beta", last, beta_final < ONE, {"beta_T": beta_final})
    r = ComputableSet(lambda m: m in seq, "benign-R")
    return BenignRun(r, seq.seq[:], LeftCEApprox([Dyadic(b, E) for b in beta], name="beta"),
                     LeftCEApprox([Dyadic(v, E) for v in vals], name="coupled"), increments, trace)
