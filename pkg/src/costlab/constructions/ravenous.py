"""Ravenous product sets on ``Q = 2^ω x (2^ω - E)``, and the stage pair (f, g).

For each k the sets ``V^k_n`` are fed rectangles ``[σ] x [τ]`` with
``[σ] ⊆ U_{n,s}`` (an X-side test for ``c_{Ω,R^∁}``) and ``Φ_s^τ`` extending
``A_s↾n+1``, up to the goal ``2^-k (Ω_{n+1} - Ω_n)``. One set per k is awake
at a time; a set that reaches its goal sleeps and the least set below half
its goal wakes. Measure leaves Q whenever A changes under a fed τ, which is
what lets the sparse stages f(s) pay for the ``c_{Ω,R}``-cost of A.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..clopen import ClopenSet, ProductClopenSet
from ..costfn import Approximation, c_fragment, total_cost
from ..dyadic import ZERO, Dyadic
from ..functionals import FiniteFunctional, _split_take, error_set
from ..omega import INFINITY, ComputableSet, StreamQueries
from .capture import TestSchedule
from .schedules import Schedule
from .trace import StageTrace


@dataclass
class PrefixTest(TestSchedule):
    """``U_n[s] = ⋃_i [X_i ↾ (|C ∩ k_s(n)| + j)]`` for ``2^j`` fixed points X_i.

    With C the complement of R this has measure at most ``c_{Ω,R^∁}(n,s)``,
    is nondecreasing in s and nested in n, and every X_i lies in every U_n.
    """

    omega: StreamQueries
    c_set: ComputableSet
    points: list[str]

    def __post_init__(self):
        j = len(self.points).bit_length() - 1
        if len(self.points) != 1 << j:
            raise ValueError("the number of points must be a power of two")
        self.j = j

    @property
    def name(self):
        return f"prefix({self.c_set.name},{len(self.points)})"

    def length(self, n: int, s: int) -> int | None:
        if n >= s:
            return None
        k = self.omega.k_index(n, s)
        if k == INFINITY:
            return None
        return self.c_set.count_below(k) + self.j

    def at(self, n, s):
        ell = self.length(n, s)
        if ell is None:
            return ClopenSet()
        if ell > min(len(p) for p in self.points):
            raise ValueError(f"test points are shorter than {ell}")
        return ClopenSet(p[:ell] for p in self.points)

    @classmethod
    def seeded(cls, omega, c_set, seed: int, count: int = 2, length: int = 96) -> PrefixTest:
        rng = random.Random(seed)
        return cls(omega, c_set, ["".join(rng.choice("01") for _ in range(length)) for _ in range(count)])


def random_ce(seed: int, horizon: int, width: int = 24, count: int = 6) -> Approximation:
    """A c.e. approximation: ``count`` numbers below ``width`` entering at random stages."""
    rng = random.Random(seed)
    xs = rng.sample(range(width), count)
    events: dict[int, list[int]] = {}
    for x in xs:
        events.setdefault(rng.randint(1, horizon), []).append(x)
    return Approximation.from_enumeration(events, horizon, width)


@dataclass
class LayeredCopy(Schedule):
    """Φ on layered cells ``1^j 0 w`` with ``|w| = width``.

    Cell i of every layer activates at stage ``1 + i * spacing``. An active
    cell in layer j copies the current A, ``2^j`` more bits per stage, up to
    ``2^(j+3)`` bits. A cell whose output falls left of A stays dead, since
    later axioms must extend its old output; fresh cells pick up the new A.
    """

    seed: int
    layers: int = 7
    width: int = 4
    spacing: int = 16

    def __post_init__(self):
        self.name = f"layered-copy:{self.seed}"
        self.reset()

    def reset(self):
        rng = random.Random(self.seed)
        order = list(range(1 << self.width))
        self.cells = []
        for j in range(self.layers):
            rng.shuffle(order)
            for rank, i in enumerate(order):
                self.cells.append(("1" * j + "0" + format(i, f"0{self.width}b"), j, 1 + rank * self.spacing))
        self.out = {cell: "" for cell, _, _ in self.cells}

    def propose(self, stage, target):
        proposals = []
        for cell, j, start in self.cells:
            if stage < start:
                continue
            old = self.out[cell]
            size = min(1 << (j + 3), len(old) + (1 << j))
            new = target[:size].ljust(size, "0")
            if new == old or not new.startswith(old):
                continue  # finished, or dead
            self.out[cell] = new
            proposals.append((cell, new))
        return proposals


def _take(candidate: ProductClopenSet, amount: Dyadic) -> ProductClopenSet:
    """A subset of ``candidate`` of measure exactly ``min(amount, μ(candidate))``."""
    pairs: list[tuple[str, str]] = []
    left = amount
    for sigma, t in candidate.rows:
        if not left:
            break
        for tau in t:
            if not left:
                break
            size = Dyadic.pow2(-(len(sigma) + len(tau)))
            if size <= left:
                pairs.append((sigma, tau))
                left = left - size
                continue
            part, _ = _split_take(tau, left.scale2(len(sigma)))
            for p in part:
                pairs.append((sigma, p))
            left = ZERO
    return ProductClopenSet(pairs)


@dataclass
class _Family:
    """The sets ``V^k_n`` for one k."""

    k: int
    sets: dict[int, ProductClopenSet] = field(default_factory=dict)
    occupied: ProductClopenSet = field(default_factory=ProductClopenSet)
    awake: int | None = 0
    slept: dict[int, Dyadic] = field(default_factory=dict)  # n -> μ(E) when it went to sleep
    half_ok: list[int] = field(default_factory=list)  # per stage: least n below half its goal


@dataclass
class RavenousRun:
    families: list[_Family]
    f: list[list[int]]  # per k
    g: list[list[int]]
    approximations: list[Approximation]  # per k: Â_s = A_{f(s+1)}
    totals: list[Dyadic]
    error_mass: list[Dyadic]  # μ(E_s) by stage
    truncated: list[dict | None]
    trace: StageTrace


def run_ravenous(r: ComputableSet, x_test: TestSchedule, phi_schedule: Schedule, a: Approximation,
                 omega: StreamQueries, kmax: int, horizon: int,
                 keep_passing: bool = True) -> RavenousRun:
    if not a.is_ce():
        raise ValueError("the approximation of A must be c.e.")
    if a.horizon < horizon:
        raise ValueError("the approximation is shorter than the horizon")
    trace = StageTrace("ravenous", {"r": r.name, "test": x_test.name, "phi": phi_schedule.name,
                                    "kmax": kmax, "horizon": horizon}, keep_passing=keep_passing)
    phi_schedule.reset()
    phi = FiniteFunctional("Phi")
    goals_base = [omega[n + 1] - omega[n] for n in range(horizon)]
    families = [_Family(k) for k in range(kmax + 1)]
    error_mass: list[Dyadic] = [ZERO]
    errors = ClopenSet()

    def goal(k: int, n: int) -> Dyadic:
        return goals_base[n].scale2(-k) if n < horizon else ZERO

    for s in range(1, horizon + 1):
        target = a.snapshots[s]
        for oracle, output in phi_schedule.propose(s, target):
            if phi.is_consistent(oracle, output):
                phi.add(s, oracle, output)
        errors = error_set(phi, s, target)
        mu_e = errors.measure()
        error_mass.append(mu_e)
        for fam in families:
            k = fam.k
            masses = {n: v.remove2(errors).measure() for n, v in fam.sets.items()}
            awake_count = 0 if fam.awake is None else 1
            n = fam.awake
            if n is not None:
                have = masses.get(n, ZERO)
                want = goal(k, n)
                if have < want:
                    u = x_test.at(n, s)
                    p = phi.preimage(s, target[: n + 1].ljust(n + 1, "0")) - errors
                    cand = ProductClopenSet._from_rows(tuple((sig, p) for sig in u)) if p else ProductClopenSet()
                    cand = cand - fam.occupied
                    piece = _take(cand, want - have) if cand else ProductClopenSet()
                    if piece:
                        trace.check("ravenous.disjoint", s, not (piece & fam.occupied),
                                    {"k": k, "n": n})
                        fam.sets[n] = fam.sets.get(n, ProductClopenSet()) | piece
                        fam.occupied = fam.occupied | piece
                        have = have + piece.measure()
                        masses[n] = have
                        trace.event(s, "feed", k=k, n=n, mass=piece.measure(), total=have, goal=want)
                trace.check("ravenous.goal", s, have <= want, {"k": k, "n": n, "mu": have, "goal": want})
                if have == want:
                    fam.slept[n] = mu_e
                    nxt = next((m for m in range(horizon) if masses.get(m, ZERO) < goal(k, m).scale2(-1)), None)
                    trace.event(s, "sleep", k=k, n=n, wake=nxt)
                    if nxt is not None and nxt in fam.slept:
                        drop = mu_e - fam.slept[nxt]
                        half = goal(k, nxt).scale2(-1)
                        trace.check("ravenous.wake", s, drop > half,
                                    {"k": k, "n": nxt, "drop": drop, "half_goal": half})
                    fam.awake = nxt
            else:
                nxt = next((m for m in range(horizon) if masses.get(m, ZERO) < goal(k, m).scale2(-1)), None)
                if nxt is not None:
                    if nxt in fam.slept:
                        drop = mu_e - fam.slept[nxt]
                        half = goal(k, nxt).scale2(-1)
                        trace.check("ravenous.wake", s, drop > half,
                                    {"k": k, "n": nxt, "drop": drop, "half_goal": half})
                    fam.awake = nxt
                    trace.event(s, "wake", k=k, n=nxt)
            hungry = any(masses.get(m, ZERO) < goal(k, m).scale2(-1) for m in range(horizon))
            trace.check("ravenous.awake", s, awake_count == 1 or (awake_count == 0 and not hungry),
                        {"k": k, "awake": n})
            fam.half_ok.append(next((m for m in range(horizon)
                                     if masses.get(m, ZERO) < goal(k, m).scale2(-1)), horizon))
        if trace.violated:
            break
    last = len(error_mass) - 1
    # pairwise disjointness at the end: measures add up
    for fam in families:
        parts = sum((v.measure() for v in fam.sets.values()), ZERO)
        trace.check("ravenous.disjoint", last, parts == fam.occupied.measure(),
                    {"k": fam.k, "sum": parts, "union": fam.occupied.measure()})
    f_all, g_all, approxes, totals, truncated = [], [], [], [], []
    for fam in families:
        f, g, why = _stage_pair(omega, fam.half_ok, last)
        f_all.append(f)
        g_all.append(g)
        truncated.append(why)
        if why is not None:
            trace.event(last, "truncated", k=fam.k, **why)
        approx, total = _audit_changes(trace, fam.k, r, omega, a, f, error_mass, last)
        approxes.append(approx)
        totals.append(total)
    return RavenousRun(families, f_all, g_all, approxes, totals, error_mass, truncated, trace)


def _stage_pair(omega: StreamQueries, half_ok: list[int], last: int) -> tuple[list[int], list[int], dict | None]:
    """Search f(s) > f(s-1) and g(s) >= s+1 with both conditions, up to stage ``last``.

    ``half_ok[t-1]`` is the least n whose set is below half its goal after stage t.
    """
    f: list[int] = []
    g: list[int] = []
    s = 0
    while True:
        lo = (f[-1] if f else 0) + 1
        found = None
        for ft in range(max(lo, s), last + 1):
            # least g >= s+1 with Ω_f - Ω_n <= 2(Ω_g - Ω_n) for all n < s; that is
            # Ω_f + Ω_n <= 2Ω_g, and the worst n is s-1 since Ω is nondecreasing
            gt = s + 1
            worst = omega[ft] + omega[s - 1] if s else None
            while gt <= ft and worst is not None and worst > omega[gt].scale2(1):
                gt += 1
            if gt > ft:
                continue
            if half_ok[ft - 1] >= gt:
                found = (ft, gt)
                break
        if found is None:
            return f, g, {"s": s, "searched_to": last}
        f.append(found[0])
        g.append(found[1])
        s += 1


def _audit_changes(trace: StageTrace, k: int, r: ComputableSet, omega: StreamQueries, a: Approximation,
                   f: list[int], error_mass: list[Dyadic], last: int) -> tuple[Approximation, Dyadic]:
    """Check each change of ``Â_s = A_{f(s+1)}`` against the growth of E."""
    cost = c_fragment(omega, r)
    if len(f) < 2:
        approx = Approximation((a.snapshots[f[0]] if f else a.snapshots[0],))
        return approx, ZERO
    approx = Approximation(tuple(a.snapshots[f[i + 1]] for i in range(len(f) - 1)))
    for s in range(1, approx.horizon + 1):
        n = approx.least_change(s)
        if n is None or n >= s:
            continue
        gain = error_mass[f[s + 1]] - error_mass[f[s]]
        need = cost(n, s).scale2(-(k + 3))
        trace.check("ravenous.change", last, gain >= need,
                    {"k": k, "s": s, "n": n, "gain": gain, "need": need})
    total = total_cost(approx, cost)
    final_e = error_mass[f[-1]]
    trace.check("ravenous.total", last, total <= final_e.scale2(k + 3),
                {"k": k, "total": total, "mu_E": final_e, "changes": sum(
                    1 for s in range(1, approx.horizon + 1) if approx.least_change(s) is not None)})
    return approx, total


def default_ravenous(seed: int, omega: StreamQueries, r: ComputableSet, horizon: int,
                     kmax: int = 3) -> RavenousRun:
    """The seeded setting used by the test corpus and the command line."""
    test = PrefixTest.seeded(omega, r.complement(), seed)
    phi = LayeredCopy(seed)
    a = random_ce(seed, horizon)
    return run_ravenous(r, test, phi, a, omega, kmax, horizon)
