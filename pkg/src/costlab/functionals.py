"""Finite monotone oracle functionals and the measure-theoretic sets built from them.

A functional is a growing list of axioms ``(stage, oracle σ, output τ)``:
any oracle extending σ computes at least τ from that stage on. The value
on an oracle is the longest output among the applicable axioms, and the
axiom set is kept consistent, so outputs on comparable oracles are
comparable.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

from .clopen import ClopenSet, comparable, hat, lies_left
from .costfn import Approximation, CostFunction
from .dyadic import ONE, ZERO, Dyadic


class InconsistentAxiom(ValueError):
    pass


class DelayContractError(ValueError):
    """An axiom whose output lies right of the current target reached the functional."""


class AllocationError(RuntimeError):
    """The allocator ran out of free measure (a precondition was violated)."""


def agrees(tau: str, target: str) -> bool:
    """True iff ``tau`` is an initial segment of ``target`` padded with zeros."""
    if len(tau) <= len(target):
        return target.startswith(tau)
    return tau.startswith(target) and "1" not in tau[len(target):]


def left_of_padded(tau: str, target: str) -> bool:
    return lies_left(tau, target.ljust(len(tau), "0"))


def right_of_padded(tau: str, target: str) -> bool:
    return lies_left(target.ljust(len(tau), "0"), tau)


@dataclass(frozen=True)
class Axiom:
    stage: int
    oracle: str
    output: str


class FiniteFunctional:
    """A c.e. set of consistent axioms."""

    def __init__(self, name: str = "Upsilon"):
        self.name = name
        self.axioms: list[Axiom] = []

    def conflicts(self, oracle: str, output: str) -> Axiom | None:
        for ax in self.axioms:
            if comparable(ax.oracle, oracle) and not comparable(ax.output, output):
                return ax
        return None

    def is_consistent(self, oracle: str, output: str) -> bool:
        return self.conflicts(oracle, output) is None

    def add(self, stage: int, oracle: str, output: str, check: bool = True) -> Axiom:
        """Append an axiom; ``check=False`` skips the consistency scan for
        callers that are consistent by construction."""
        if self.axioms and stage < self.axioms[-1].stage:
            raise ValueError("axioms must be added in stage order")
        bad = self.conflicts(oracle, output) if check else None
        if bad is not None:
            raise InconsistentAxiom(f"{(oracle, output)} conflicts with {bad}")
        ax = Axiom(stage, oracle, output)
        self.axioms.append(ax)
        return ax

    def at(self, s: int) -> list[Axiom]:
        return [ax for ax in self.axioms if ax.stage <= s]

    def compute(self, s: int, x: str) -> str:
        """Output at stage s on the finite oracle string x."""
        best = ""
        for ax in self.axioms:
            if ax.stage <= s and x.startswith(ax.oracle) and len(ax.output) > len(best):
                best = ax.output
        return best

    def use(self, s: int, x: str, n: int) -> int | None:
        """Least oracle length needed at stage s to compute output bit n on x."""
        uses = [
            len(ax.oracle)
            for ax in self.axioms
            if ax.stage <= s and x.startswith(ax.oracle) and len(ax.output) > n
        ]
        return min(uses) if uses else None

    def preimage(self, s: int, sigma: str) -> ClopenSet:
        """Oracles whose stage-s output extends sigma."""
        return ClopenSet(ax.oracle for ax in self.axioms if ax.stage <= s and ax.output.startswith(sigma))

    def to_json(self) -> list[dict]:
        return [{"stage": a.stage, "oracle": a.oracle, "output": a.output} for a in self.axioms]

    @classmethod
    def from_json(cls, rows: Iterable[dict], name: str = "Upsilon") -> FiniteFunctional:
        f = cls(name)
        for r in sorted(rows, key=lambda r: r["stage"]):
            f.add(r["stage"], r["oracle"], r["output"])
        return f

    def dumps(self) -> str:
        return json.dumps(self.to_json())


class LocalFunctional:
    """Bitwise functional: output bit n is ``rule(X[n:n+window])``, with use ``n + window``.

    ``window = 1`` with the identity rule is the natural reduction with
    use ``n + 1``; ``window = 0`` gives a constant functional of length
    ``max_len``. Stage-independent.
    """

    def __init__(self, rule: Callable[[str], str], window: int, max_len: int = 1 << 12,
                 name: str = "Psi"):
        self.rule = rule
        self.window = window
        self.max_len = max_len
        self.name = name

    def compute(self, s: int, x: str) -> str:
        n_out = self.max_len if self.window == 0 else max(0, len(x) - self.window + 1)
        n_out = min(n_out, self.max_len)
        return "".join(self.rule(x[n:n + self.window]) for n in range(n_out))

    def use(self, s: int, x: str, n: int) -> int | None:
        if n >= len(self.compute(s, x)):
            return None
        return n + self.window

    def preimage(self, s: int, sigma: str) -> ClopenSet:
        if self.window == 1 and self.rule("0") == "0" and self.rule("1") == "1":
            return ClopenSet([sigma])
        raise NotImplementedError("preimage is only shipped for the identity functional")


def identity_functional(max_len: int = 1 << 12) -> LocalFunctional:
    return LocalFunctional(lambda w: w, 1, max_len, name="identity")


class ConstantFunctional(LocalFunctional):
    """Ignores the oracle and outputs ``bits`` with use 0."""

    def __init__(self, bits: str):
        super().__init__(lambda w: "0", 0, len(bits), name=f"const:{bits}")
        self.bits = bits

    def compute(self, s: int, x: str) -> str:
        return self.bits

    def use(self, s: int, x: str, n: int) -> int | None:
        return 0 if n < len(self.bits) else None


# --- sets built from a functional -----------------------------------------------


def preimage(f: FiniteFunctional, s: int, sigma: str) -> ClopenSet:
    return f.preimage(s, sigma)


def error_set(f: FiniteFunctional, s: int, target: str) -> ClopenSet:
    """Oracles whose stage-s output lies left of ``target`` (zero-padded)."""
    return ClopenSet(ax.oracle for ax in f.axioms if ax.stage <= s and left_of_padded(ax.output, target))


def u_set(f: FiniteFunctional, s: int, sigma: str) -> ClopenSet:
    """Oracles computing ``hat(sigma)`` by stage s; empty for the empty string."""
    if not sigma:
        return ClopenSet()
    return f.preimage(s, hat(sigma))


class DelayQueue:
    """Holds axioms until their output no longer lies right of the target."""

    def __init__(self):
        self.held: list[tuple[str, str]] = []

    def submit(self, oracle: str, output: str) -> None:
        self.held.append((oracle, output))

    def release(self, target: str) -> list[tuple[str, str]]:
        out, keep = [], []
        for oracle, output in self.held:
            (keep if right_of_padded(output, target) else out).append((oracle, output))
        self.held = keep
        return out


# --- Solovay test assembly ----------------------------------------------------------


@dataclass
class SolovayAssembly:
    pieces: list[tuple[int, ClopenSet]]  # (stage, B_s)
    total: Dyadic


def solovay_assembly(f: FiniteFunctional, a: Approximation) -> SolovayAssembly:
    """For each stage s where A changes, ``B_s`` generates the oracles computing
    ``hat(A_s ↾ n_s+1)`` by stage s, n_s being the least change from A_s to A_{s+1}."""
    pieces = []
    total = ZERO
    for s in range(len(a.snapshots) - 1):
        n = a.least_change(s + 1)
        if n is None:
            continue
        sigma = a.snapshots[s].ljust(n + 1, "0")[: n + 1]
        b = u_set(f, s, sigma)
        pieces.append((s, b))
        total = total + b.measure()
    return SolovayAssembly(pieces, total)


# --- the cost function c_A ------------------------------------------------------------


def advance(a: Approximation) -> Approximation:
    """``Â_s = A_{s+1}``: moves each change to the stage at which it was decided."""
    return Approximation(a.snapshots[1:] + a.snapshots[-1:])


@dataclass
class CostTable:
    """Precomputed ``c(x, s)`` for ``x < s <= horizon`` (zero elsewhere)."""

    rows: list[list[Dyadic]]  # rows[s][x]
    horizon: int
    name: str = "table"

    def cost_function(self) -> CostFunction:
        def ev(x, s):
            if s > self.horizon:
                s = self.horizon
            return self.rows[s][x] if x < len(self.rows[s]) else ZERO

        return CostFunction(ev, self.name, "custom")


@dataclass
class CABuild:
    cost: CostFunction
    table: CostTable
    errors: list[ClopenSet]  # errors[s] = E_s (relative to C_s)
    ledger: list[dict] = field(default_factory=list)
    ledger_total: Dyadic = ZERO
    epsilon_total: Dyadic = ZERO  # additive bound: Σ μ(E_{s+1} - E_{x+1}) over the changes

    @property
    def final_error(self) -> Dyadic:
        return self.errors[-1].measure()


def build_cA(c_enum: Approximation, a: Approximation, upsilon: FiniteFunctional,
             psi=None, horizon: int | None = None) -> CABuild:
    """``c_A(x, s) = μ(⋃_{x<t<=s} V_{x,t})`` with
    ``V_{x,t} = {Y : Υ_t^Y ≺ C_t and A_t↾x+1 ⪯ Ψ(Υ_t^Y)}``.

    ``psi`` defaults to the identity with use x+1 (the case C = A). Raises
    ValueError unless ``A_s↾s ⪯ Ψ(C_s)`` at every stage and C is c.e.
    """
    T = horizon if horizon is not None else min(c_enum.horizon, a.horizon)
    psi = psi or identity_functional()
    if not c_enum.is_ce():
        raise ValueError("C must be given by an enumeration")
    for s in range(T + 1):
        out = psi.compute(s, c_enum.snapshots[s])
        want = a.snapshots[s].ljust(s, "0")[:s]
        if not out.startswith(want):
            raise ValueError(f"speed-up precondition fails at stage {s}: A_s↾s={want!r}, Ψ(C_s)={out!r}")
    for ax in upsilon.axioms:
        if ax.stage <= T and right_of_padded(ax.output, c_enum.snapshots[ax.stage]):
            raise DelayContractError(f"axiom {ax} lies right of C at its stage")

    errors = [error_set(upsilon, s, c_enum.snapshots[s]) for s in range(T + 1)]
    unions = [ClopenSet() for _ in range(T + 1)]  # unions[x] = ⋃_{x<t<=s} V_{x,t} so far
    rows: list[list[Dyadic]] = [[] for _ in range(T + 1)]
    psi_cache: dict[str, str] = {}
    for t in range(1, T + 1):
        live = [
            ax for ax in upsilon.axioms
            if ax.stage <= t and agrees(ax.output, c_enum.snapshots[t])
        ]
        images = []
        for ax in live:
            if ax.output not in psi_cache:
                psi_cache[ax.output] = psi.compute(t, ax.output)
            images.append((ax.oracle, psi_cache[ax.output]))
        at = a.snapshots[t]
        for x in range(t):
            want = at.ljust(x + 1, "0")[: x + 1]
            v = ClopenSet(o for o, img in images if img.startswith(want)) - errors[t]
            if v:
                unions[x] = unions[x] | v
        rows[t] = [unions[x].measure() for x in range(t)]
    table = CostTable(rows, T, name="c_A")
    build = CABuild(table.cost_function(), table, errors)
    _obedience_ledger(build, a, T)
    return build


def _obedience_ledger(build: CABuild, a: Approximation, T: int) -> None:
    """Per change ``A_s ≠ A_{s+1}`` at least x: compare ``c_A(x, s)`` with ``μ(E_{s+1} - E_{x+1})``.

    The bounds overlap across changes, so the run total is compared with
    their sum (the cost of the additive error-real cost function), not with
    ``μ(E_final)``.
    """
    total = eps_total = ZERO
    for s in range(1, T):
        x = a.least_change(s + 1)
        if x is None:
            continue
        cost = build.cost(x, s)
        bound = (build.errors[s + 1] - build.errors[min(x + 1, T)]).measure()
        build.ledger.append({"stage": s, "x": x, "cost": cost, "bound": bound, "ok": cost <= bound})
        total = total + cost
        eps_total = eps_total + bound
    build.ledger_total = total
    build.epsilon_total = eps_total


# --- the Γ allocator ------------------------------------------------------------------


@dataclass
class _Cell:
    oracle: str
    output: str


@dataclass
class GammaRun:
    functional: FiniteFunctional
    live_history: list[list[Dyadic]]  # live_history[t][x] = live mass at level x
    error_history: list[Dyadic]
    cost_history: list[Dyadic]
    violations: list[dict]


def _split_take(oracle: str, amount: Dyadic) -> tuple[list[str], list[str]]:
    """Split ``[oracle]`` into pieces of total measure ``amount`` and the rest."""
    size = Dyadic.pow2(-len(oracle))
    if amount >= size:
        return [oracle], []
    if not amount:
        return [], [oracle]
    taken, rest = [], []
    node = oracle
    remaining = amount
    # walk down: keep left halves while they fit
    while remaining:
        half = Dyadic.pow2(-(len(node) + 1))
        if remaining >= half:
            taken.append(node + "0")
            remaining = remaining - half
            node = node + "1"
        else:
            rest.append(node + "1")
            node = node + "0"
        if not remaining:
            rest.append(node)
    return taken, rest


class _FreeSpace:
    """Buddy-style allocator over Cantor space, coarsest blocks first."""

    def __init__(self):
        self.free = ClopenSet.full()

    def take(self, amount: Dyadic) -> list[str]:
        out: list[str] = []
        remaining = amount
        while remaining:
            j = remaining.floor_neg_log2()
            if Dyadic.pow2(-j) > remaining:
                j += 1
            block = Dyadic.pow2(-j)
            cands = [g for g in self.free.gens if len(g) <= j]
            if not cands:
                raise AllocationError(f"no free block of measure {block}")
            g = min(cands, key=lambda w: (-len(w), w))
            piece = g + "0" * (j - len(g))
            self.free = self.free - ClopenSet([piece])
            out.append(piece)
            remaining = remaining - block
        return out

    def measure(self) -> Dyadic:
        return self.free.measure()


def gamma_allocate(a: Approximation, c: CostFunction, horizon: int,
                   speedup: Callable[[int], int] | None = None) -> GammaRun:
    """Build Γ so that at every stage t and level x < t the live mass
    ``μ({Y : A_{f(t)}↾x+1 ⪯ Γ_t^Y} - E_Γ,t)`` equals ``c(x, t)`` exactly.

    A must be c.e.; costs must be dyadic with ``c(0, t) < 1/2``.
    """
    f = speedup or (lambda t: t)
    if not a.is_ce():
        raise ValueError("Γ allocation needs a c.e. approximation")
    gamma = FiniteFunctional("Gamma")
    space = _FreeSpace()
    live: list[_Cell] = []
    error = ZERO
    acc_cost = ZERO
    live_hist: list[list[Dyadic]] = [[]]
    err_hist = [ZERO]
    cost_hist = [ZERO]
    violations: list[dict] = []
    prev_target = a.snapshots[f(0)]
    for t in range(1, horizon + 1):
        target = a.snapshots[f(t)]
        if c(0, t) >= Dyadic(1, 1):
            raise AllocationError(f"c(0,{t}) = {c(0, t)} is not below 1/2")
        # A moved: cells computing a now-wrong prefix join the error set
        width = max(len(prev_target), len(target))
        p = next((i for i in range(width)
                  if prev_target.ljust(width, "0")[i] != target.ljust(width, "0")[i]), None)
        if p is not None:
            acc_cost = acc_cost + c(p, t)
            keep = []
            for cell in live:
                if agrees(cell.output, target):
                    keep.append(cell)
                else:
                    error = error + Dyadic.pow2(-len(cell.oracle))
            live = keep
        prev_target = target
        # top-down: fix the mass at each level x = t-1, ..., 0
        for x in range(t - 1, -1, -1):
            want = c(x, t)
            have = sum((Dyadic.pow2(-len(cl.oracle)) for cl in live if len(cl.output) >= x + 1), ZERO)
            if have > want:
                violations.append({"stage": t, "x": x, "kind": "overshoot", "have": str(have), "want": str(want)})
                continue
            deficit = want - have
            new_out = target.ljust(x + 1, "0")[: x + 1]
            for length in range(x, 0, -1):
                if not deficit:
                    break
                for cell in [cl for cl in live if len(cl.output) == length]:
                    if not deficit:
                        break
                    taken, rest = _split_take(cell.oracle, deficit)
                    live.remove(cell)
                    for o in rest:
                        live.append(_Cell(o, cell.output))
                    for o in taken:
                        gamma.add(t, o, new_out, check=False)
                        live.append(_Cell(o, new_out))
                        deficit = deficit - Dyadic.pow2(-len(o))
            if deficit:
                for o in space.take(deficit):
                    gamma.add(t, o, new_out, check=False)
                    live.append(_Cell(o, new_out))
        levels = [
            sum((Dyadic.pow2(-len(cl.oracle)) for cl in live if len(cl.output) >= x + 1), ZERO)
            for x in range(t)
        ]
        for x in range(t):
            if levels[x] != c(x, t):
                violations.append({"stage": t, "x": x, "kind": "mass", "have": str(levels[x]), "want": str(c(x, t))})
        if error > acc_cost:
            violations.append({"stage": t, "kind": "error-exceeds-cost", "error": str(error), "cost": str(acc_cost)})
        total = error + sum((Dyadic.pow2(-len(cl.oracle)) for cl in live), ZERO)
        if total > ONE:
            violations.append({"stage": t, "kind": "overfull", "mass": str(total)})
        live_hist.append(levels)
        err_hist.append(error)
        cost_hist.append(acc_cost)
    return GammaRun(gamma, live_hist, err_hist, cost_hist, violations)
