"""A c.e. set that is smart for a given cost function.

Each k owns the interval ``I_k = [2^k, 2^(k+1))``. Oracles that compute
the current A correctly up to length ``2^(k+1)`` accumulate in ``U_k``;
whenever ``μ(U_k)`` outgrows ``c(k,s)`` plus the error mass gained since
stage k, the least free element of ``I_k`` enters A, which moves every
oracle in ``U_k`` into the error set.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..clopen import ClopenSet
from ..costfn import Approximation, CostFunction, total_cost
from ..dyadic import ONE, ZERO, Dyadic
from ..functionals import (
    DelayContractError,
    DelayQueue,
    FiniteFunctional,
    left_of_padded,
    right_of_padded,
)
from .schedules import Schedule
from .trace import StageTrace


def floored(c: CostFunction) -> CostFunction:
    """``max(c(x,s), 2^-x)`` for x < s. Equivalent to c up to a constant when
    c dominates ``c_Ω``; guarantees at most ``2^k`` enumerations per k."""
    return CostFunction(lambda x, s: max(c(x, s), Dyadic.pow2(-x)), f"floor({c.name})", c.kind)


@dataclass
class SmartRun:
    a: frozenset[int]
    approximation: Approximation  # Â_s = A_{s+1}: the set as decided at the end of stage s
    tests: list[ClopenSet]  # U_k at the horizon
    errors: ClopenSet
    upsilon: FiniteFunctional
    counts: list[int]
    trace: StageTrace
    total: Dyadic  # total cost of Â under c
    total_floored: Dyadic

    @property
    def passed(self) -> bool:
        return self.trace.passed


def run_smart(c: CostFunction, schedule: Schedule, horizon: int, kmax: int = 4,
              floor: bool = True, strict: bool = False, keep_passing: bool = True) -> SmartRun:
    """Run the construction for ``horizon`` stages with levels ``k <= kmax``.

    ``strict=True`` makes a proposal lying right of A an error instead of
    holding it in the delay queue.
    """
    cost = floored(c) if floor else c
    width = 1 << (kmax + 1)
    trace = StageTrace("smart", {"cost": c.name, "schedule": schedule.name, "horizon": horizon,
                                 "kmax": kmax, "floor": floor}, keep_passing=keep_passing)
    schedule.reset()
    queue = DelayQueue()
    upsilon = FiniteFunctional("Upsilon")
    a: set[int] = set()
    live: list = []
    errors = ClopenSet()
    err_mass = ZERO
    err_at = {0: ZERO}  # μ(E_k) for k <= kmax
    tests = [ClopenSet() for _ in range(kmax + 1)]
    test_mass = [ZERO] * (kmax + 1)
    counts = [0] * (kmax + 1)
    snaps = ["0" * width]

    def bits() -> str:
        return "".join("1" if i in a else "0" for i in range(width))

    def absorb(target: str) -> None:
        nonlocal live, errors, err_mass
        wrong = [ax.oracle for ax in live if left_of_padded(ax.output, target)]
        if wrong:
            live = [ax for ax in live if not left_of_padded(ax.output, target)]
            errors = errors | ClopenSet(wrong)
            err_mass = errors.measure()

    for s in range(1, horizon + 1):
        target = bits()
        for oracle, output in schedule.propose(s, target):
            if right_of_padded(output, target):
                if strict:
                    raise DelayContractError(f"stage {s}: output {output!r} lies right of A_s")
                trace.event(s, "held", oracle=oracle, output=output)
            queue.submit(oracle, output)
        new = []
        for oracle, output in queue.release(target):
            if not upsilon.is_consistent(oracle, output):
                trace.event(s, "rejected", oracle=oracle, output=output)
                continue
            ax = upsilon.add(s, oracle, output)
            live.append(ax)
            new.append(ax)
        absorb(target)
        if s <= kmax:
            err_at[s] = err_mass
        live_ids = {id(ax) for ax in live}
        # U_k,s = U_k,s-1 ∪ V_k,s; a V_k,s cylinder comes from a live axiom that
        # is new, or from any live axiom at the first stage k+1
        for k in range(min(kmax, s - 1) + 1):
            need = 1 << (k + 1)
            source = live if s == k + 1 else [ax for ax in new if id(ax) in live_ids]
            cyl = [ax.oracle for ax in source if len(ax.output) >= need]
            if cyl:
                v = ClopenSet(cyl) - errors
                if v:
                    tests[k] = tests[k] | v
                    test_mass[k] = tests[k].measure()
        # service threats in increasing k, re-evaluating the error set in between
        for k in range(min(kmax, s - 1) + 1):
            if test_mass[k] > cost(k, s) + (err_mass - err_at[k]):
                free = [x for x in range(1 << k, 1 << (k + 1)) if x not in a]
                if not trace.check("smart.x-exists", s, bool(free), {"k": k, "count": counts[k]}):
                    break
                x = free[0]
                before = err_mass
                a.add(x)
                counts[k] += 1
                absorb(bits())
                trace.event(s, "enumerate", k=k, x=x, cost=cost(x, s), error=err_mass)
                trace.check("smart.paid", s, cost(x, s) < err_mass - before,
                            {"k": k, "x": x, "cost": cost(x, s), "gain": err_mass - before})
                trace.check("smart.count", s, counts[k] <= 1 << k, {"k": k, "count": counts[k]})
        for k in range(min(kmax, s - 1) + 1):
            rhs = cost(k, s) + (err_mass - err_at[k])
            trace.check("smart.diamond", s, test_mass[k] <= rhs,
                        {"k": k, "mu_U": test_mass[k], "rhs": rhs})
        snaps.append(bits())
        if trace.violated:
            break
    approx = Approximation(tuple(snaps))
    total = total_cost(approx, c)
    total_f = total_cost(approx, cost)
    trace.check("smart.total", len(snaps) - 1, total <= total_f <= err_mass <= ONE,
                {"total": total, "total_floored": total_f, "mu_E": err_mass})
    return SmartRun(frozenset(a), approx, tests, errors, upsilon, counts, trace, total, total_f)
