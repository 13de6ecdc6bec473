"""Cost functions, total cost of approximations, domination and benignity."""

from __future__ import annotations

import csv
import io
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

from .dyadic import ONE, ZERO, Dyadic
from .omega import INFINITY, ComputableSet, StreamQueries, column_union


@dataclass(frozen=True)
class CostFunction:
    """A stage-indexed cost ``c(x, s)``; zero whenever ``x >= s``."""

    eval: Callable[[int, int], Dyadic]
    name: str
    kind: str = "custom"

    def __call__(self, x: int, s: int) -> Dyadic:
        if x >= s:
            return ZERO
        return self.eval(x, s)

    def limit(self, x: int, horizon: int) -> Dyadic:
        """Finite-horizon stand-in for the limit ``c(x) = lim_s c(x, s)``."""
        return self(x, horizon)


@dataclass(frozen=True)
class Approximation:
    """Stage-indexed snapshots ``A_0, A_1, ...`` as 0/1 strings.

    Positions past the end of a snapshot read as 0.
    """

    snapshots: tuple[str, ...]

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("an approximation needs at least one snapshot")
        for snap in self.snapshots:
            if snap.strip("01"):
                raise ValueError(f"bad snapshot {snap!r}")

    @classmethod
    def from_snapshots(cls, snaps: Iterable[str]) -> Approximation:
        return cls(tuple(snaps))

    @classmethod
    def constant(cls, bits: str, horizon: int) -> Approximation:
        return cls((bits,) * (horizon + 1))

    @classmethod
    def from_enumeration(cls, events: dict[int, Iterable[int]], horizon: int,
                         length: int) -> Approximation:
        """A c.e. approximation: ``events[s]`` lists numbers entering at stage s."""
        cur = ["0"] * length
        snaps = []
        for s in range(horizon + 1):
            for x in events.get(s, ()):
                cur[x] = "1"
            snaps.append("".join(cur))
        return cls(tuple(snaps))

    @property
    def horizon(self) -> int:
        return len(self.snapshots) - 1

    @property
    def final(self) -> str:
        return self.snapshots[-1]

    @property
    def length(self) -> int:
        return max(len(a) for a in self.snapshots)

    def bit(self, s: int, x: int) -> int:
        snap = self.snapshots[s]
        return int(snap[x]) if x < len(snap) else 0

    def least_change(self, s: int) -> int | None:
        """Least x with ``A_{s-1}(x) != A_s(x)``, or None."""
        a, b = self.snapshots[s - 1], self.snapshots[s]
        n = max(len(a), len(b))
        a, b = a.ljust(n, "0"), b.ljust(n, "0")
        for x in range(n):
            if a[x] != b[x]:
                return x
        return None

    def is_ce(self) -> bool:
        """True iff bits only ever go from 0 to 1."""
        return all(
            not (self.bit(s - 1, x) and not self.bit(s, x))
            for s in range(1, len(self.snapshots))
            for x in range(len(self.snapshots[s - 1]))
        )


# --- constructors -------------------------------------------------------------


def c_omega(omega: StreamQueries, name: str = "c_omega") -> CostFunction:
    """``c(x, s) = Ω_s - Ω_x``. Also serves as any additive cost ``c_α``."""
    return CostFunction(lambda x, s: omega.gap(x, s), name, "additive")


def c_fragment(omega: StreamQueries, r: ComputableSet) -> CostFunction:
    """``c(n, s) = 2^-|R ∩ k_s(n)|``, and 0 when ``Ω_s = Ω_n``."""

    def ev(n, s):
        k = omega.k_index(n, s)
        if k == INFINITY:
            return ZERO
        return Dyadic.pow2(-r.count_below(k))

    return CostFunction(ev, f"c_omega,{r.name}", "fragment")


def c_power_profile(omega: StreamQueries, k: int, n: int) -> CostFunction:
    """Discrete stand-in for ``(Ω_s - Ω_x)^(k/n)``: the fragment cost of R({1..k}, n)."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return c_fragment(omega, column_union(range(1, k + 1), n))


def scaled(c: CostFunction, factor: Dyadic) -> CostFunction:
    return CostFunction(lambda x, s: c(x, s) * factor, f"{factor}*{c.name}", c.kind)


def pointwise_max(c: CostFunction, d: CostFunction) -> CostFunction:
    return CostFunction(lambda x, s: max(c(x, s), d(x, s)), f"max({c.name},{d.name})")


# --- diagnostics ----------------------------------------------------------------


def monotonicity_violation(c: CostFunction, horizon: int,
                           xs: Iterable[int] | None = None) -> tuple[str, int, int] | None:
    """First ``(kind, x, s)`` breaking either monotonicity inequality, or None."""
    xs = range(horizon) if xs is None else xs
    for x in xs:
        for s in range(x + 1, horizon + 1):
            v = c(x, s)
            if s < horizon and v > c(x, s + 1):
                return ("decreases-in-s", x, s)
            if v < c(x + 1, s):
                return ("increases-in-x", x, s)
    return None


def total_cost(a: Approximation, c: CostFunction) -> Dyadic:
    """Sum over stages s of ``c(x, s)`` for the least x changed at s."""
    total = ZERO
    for s in range(1, len(a.snapshots)):
        x = a.least_change(s)
        if x is not None:
            total = total + c(x, s)
    return total


@dataclass
class IdentityReport:
    passed: bool
    checks: int
    witness: dict | None = None


def product_identity_check(omega: StreamQueries, r: ComputableSet, horizon: int,
                           cost_r: CostFunction | None = None,
                           cost_rc: CostFunction | None = None) -> IdentityReport:
    """Check ``c_{Ω,R}(n,s) · c_{Ω,R^c}(n,s) = 2^-k_s(n)`` for all ``n < s <= horizon``."""
    cost_r = cost_r or c_fragment(omega, r)
    cost_rc = cost_rc or c_fragment(omega, r.complement())
    checks = 0
    for s in range(1, horizon + 1):
        for n in range(s):
            k = omega.k_index(n, s)
            want = ZERO if k == INFINITY else Dyadic.pow2(-k)
            got = cost_r(n, s) * cost_rc(n, s)
            checks += 1
            if got != want:
                return IdentityReport(False, checks, {"n": n, "s": s, "got": str(got), "want": str(want)})
    return IdentityReport(True, checks)


def _dyadic_pow(d: Dyadic, k: int) -> Dyadic:
    out = ONE
    for _ in range(k):
        out = out * d
    return out


def power_ratio_within(omega: StreamQueries, k: int, n: int, horizon: int,
                       bound_exp: int = 2) -> tuple[int, int] | None:
    """Check ``2^-b <= c(x,s) / (Ω_s-Ω_x)^(k/n) <= 2^b`` exactly for all pairs.

    Raised to the n-th power both sides stay dyadic. Returns the first
    failing ``(x, s)`` or None.
    """
    c = c_power_profile(omega, k, n)
    for s in range(1, horizon + 1):
        for x in range(s):
            gap = omega.gap(x, s)
            if not gap:
                continue
            lhs = _dyadic_pow(c(x, s), n)
            rhs = _dyadic_pow(gap, k)
            if not (rhs <= lhs.scale2(bound_exp * n) and lhs <= rhs.scale2(bound_exp * n)):
                return (x, s)
    return None


def _geometric_grid(limit: int) -> list[int]:
    pts = {0}
    v = 1
    while v < limit:
        pts.add(v)
        pts.add(v + v // 2)
        v *= 2
    return sorted(p for p in pts if p < limit)


@dataclass
class DominationReport:
    """Finite-horizon estimate of ``d <= κ·c`` on limits taken at the horizon."""

    constant: Dyadic | None
    exponent: int | None
    trend: str
    witness: dict | None = None
    exponents: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        if self.trend == "growing":
            return {"trend": "growing", "witness": self.witness}
        return {"constant": str(self.constant), "exponent": self.exponent, "trend": self.trend}


def _ratio_exponent(d: Dyadic, c: Dyadic) -> int:
    """Least j >= 0 with ``d <= 2^j · c`` (both positive)."""
    j = 0
    while d > c.scale2(j):
        j += 1
    return j


def dominates(c: CostFunction, d: CostFunction, horizon: int,
              probes: Iterable[int] | None = None) -> DominationReport:
    """Least power of two κ with ``d(x, T) <= κ·c(x, T)`` on probed x.

    The probe set is a geometric grid plus every point where either column
    changes value. If some probe has ``c = 0 < d`` no constant works; if the
    needed exponent keeps rising across the late checkpoints the trend is
    reported as ``growing``. Either way this is an estimate, not a proof.
    """
    T = horizon
    if probes is None:
        pts = set(_geometric_grid(T))
        prev_c = prev_d = None
        for x in range(T):
            cv, dv = c(x, T), d(x, T)
            if cv != prev_c or dv != prev_d:
                pts.add(x)
            prev_c, prev_d = cv, dv
        probes = sorted(pts)
    exps: list[tuple[int, int]] = []
    for x in probes:
        cv, dv = c(x, T), d(x, T)
        if not dv:
            continue
        if not cv:
            return DominationReport(None, None, "growing", {"x": x, "c": str(cv), "d": str(dv)}, exps)
        exps.append((x, _ratio_exponent(dv, cv)))
    if not exps:
        return DominationReport(ONE, 0, "bounded", None, exps)
    best = max(e for _, e in exps)
    # running maxima over geometric blocks [2^i, 2^{i+1})
    blocks: dict[int, int] = {}
    for x, e in exps:
        b = x.bit_length()
        blocks[b] = max(blocks.get(b, 0), e)
    keys = sorted(blocks)
    running, maxima = 0, []
    for b in keys:
        running = max(running, blocks[b])
        maxima.append(running)
    growing = len(maxima) >= 4 and maxima[-1] > maxima[-2] > maxima[-3]
    if growing:
        x_at = max(exps, key=lambda p: p[1])[0]
        return DominationReport(None, None, "growing", {"x": x_at, "exponent": best}, exps)
    return DominationReport(Dyadic.pow2(best), best, "bounded", None, exps)


# --- benignity --------------------------------------------------------------------


def benign_bound(kind: str, eps: Dyadic, r: ComputableSet | None = None) -> int:
    """Computable bound on the length of an ε-expensive interleaved sequence.

    ``c_omega``: ``ceil(1/ε)``. ``c_fragment``: ``2^m`` for the least m with
    ``2^-|R ∩ m| < ε``.
    """
    if not eps:
        raise ValueError("eps must be positive")
    if kind == "c_omega":
        if eps >= ONE:
            return 1
        return -(-(1 << eps.exp) // eps.num)
    if kind == "c_fragment":
        if r is None:
            raise ValueError("c_fragment bound needs the set R")
        m = 0
        while Dyadic.pow2(-r.count_below(m)) >= eps:
            m += 1
        return 1 << m
    raise ValueError(f"no shipped benignity bound for {kind!r}")


def check_interleaving(seq: Sequence[tuple[int, int]]) -> None:
    prev_s = None
    for n, s in seq:
        if not n < s or (prev_s is not None and not prev_s <= n):
            raise ValueError(f"sequence is not interleaved n1 < s1 <= n2 < s2 ...: {list(seq)}")
        prev_s = s


def benign_witness_verify(c: CostFunction, eps: Dyadic, seq: Sequence[tuple[int, int]],
                          bound: int) -> bool:
    """Pass iff the sequence, when all its costs are ``>= eps``, has length ``<= bound``."""
    check_interleaving(seq)
    if any(c(n, s) < eps for n, s in seq):
        return True
    return len(seq) <= bound


def longest_expensive_sequence(c: CostFunction, eps: Dyadic, horizon: int,
                               monotone: bool = False) -> list[tuple[int, int]]:
    """Longest interleaved sequence with every ``c(n_i, s_i) >= eps`` and ``s_ℓ <= horizon``.

    Exact: for a start n the earliest qualifying s leaves the most room, so
    a right-to-left dynamic program over n is exhaustive. ``monotone=True``
    (c nondecreasing in s) finds each earliest s by bisection.
    """
    T = horizon
    first_s: list[int | None] = [None] * (T + 1)
    for n in range(T):
        if monotone:
            if c(n, T) < eps:
                continue
            lo, hi = n + 1, T
            while lo < hi:
                mid = (lo + hi) // 2
                if c(n, mid) >= eps:
                    hi = mid
                else:
                    lo = mid + 1
            first_s[n] = lo
            continue
        for s in range(n + 1, T + 1):
            if c(n, s) >= eps:
                first_s[n] = s
                break
    best = [0] * (T + 2)
    take = [False] * (T + 1)
    for n in range(T, -1, -1):
        best[n] = best[n + 1]
        s = first_s[n]
        if s is not None and 1 + best[s] > best[n]:
            best[n] = 1 + best[s]
            take[n] = True
    seq, n = [], 0
    while n <= T:
        if take[n]:
            seq.append((n, first_s[n]))
            n = first_s[n]
        else:
            n += 1
    return seq


# --- limit profile ------------------------------------------------------------------


@dataclass
class LimitProfile:
    column: list[Dyadic]
    nonincreasing: bool
    violation: int | None
    tail_max: Dyadic


def limit_profile(c: CostFunction, horizon: int) -> LimitProfile:
    """``c(x, T)`` for ``x <= T``, with a monotonicity flag and the tail maximum.

    The tail maximum (over ``x >= T/2``) is only a proxy for the limit
    condition; nothing about the infinite limit is decided here.
    """
    col = [c(x, horizon) for x in range(horizon + 1)]
    bad = next((x for x in range(horizon) if col[x] < col[x + 1]), None)
    tail = max(col[horizon // 2:], default=ZERO)
    return LimitProfile(col, bad is None, bad, tail)


def cost_table_csv(c: CostFunction, xs: Iterable[int], stages: Iterable[int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "s", "cost"])
    stages = list(stages)
    for x in xs:
        for s in stages:
            w.writerow([x, s, str(c(x, s))])
    return buf.getvalue()
