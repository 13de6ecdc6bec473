"""Change-sets, decoding, the shift operator and speed-up transfer of approximations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import overload

from .costfn import Approximation, c_fragment, total_cost
from .dyadic import ZERO, Dyadic
from .omega import INFINITY, ComputableSet, StreamQueries


@dataclass(frozen=True)
class ChangeSet:
    """``(n, k)`` is present iff position n changed at least ``k + 1`` times."""

    pairs: tuple[tuple[int, int], ...]

    def __contains__(self, item) -> bool:
        return item in self._lookup

    @property
    def _lookup(self) -> frozenset:
        return frozenset(self.pairs)

    def least_absent(self, n: int) -> int:
        present = self._lookup
        k = 0
        while (n, k) in present:
            k += 1
        return k

    def to_json(self) -> str:
        return json.dumps([list(p) for p in self.pairs])

    @classmethod
    def from_json(cls, text: str) -> ChangeSet:
        return cls(tuple((n, k) for n, k in json.loads(text)))

    def __len__(self):
        return len(self.pairs)


def change_set(a: Approximation) -> ChangeSet:
    """Entries listed in the order their witnessing stage appears (ties by n)."""
    counts: dict[int, int] = {}
    out: list[tuple[int, int]] = []
    for s in range(1, len(a.snapshots)):
        prev, cur = a.snapshots[s - 1], a.snapshots[s]
        width = max(len(prev), len(cur))
        prev, cur = prev.ljust(width, "0"), cur.ljust(width, "0")
        for n in range(width):
            if prev[n] != cur[n]:
                k = counts.get(n, 0)
                out.append((n, k))
                counts[n] = k + 1
    return ChangeSet(tuple(out))


def decode(d: ChangeSet, a0: str, n: int) -> int:
    """The final value at n: ``a0(n)`` flipped once per recorded change."""
    start = int(a0[n]) if n < len(a0) else 0
    return start ^ (d.least_absent(n) & 1)


@overload
def shift(a: str) -> str: ...
@overload
def shift(a: Approximation) -> Approximation: ...


def shift(a):
    """Delete the first bit (stagewise for approximations)."""
    if isinstance(a, Approximation):
        if any(not snap for snap in a.snapshots):
            raise ValueError("cannot shift an empty snapshot")
        return Approximation(tuple(snap[1:] for snap in a.snapshots))
    if not a:
        raise ValueError("cannot shift the empty string")
    return a[1:]


# --- speed-up transfer ---------------------------------------------------------------


@dataclass
class TransferLedgerRow:
    i: int
    n: int
    k: int | float
    a_cost: Dyadic
    b_cost: Dyadic
    allowance: int  # |R ∩ [k, k+b)|

    @property
    def ok(self) -> bool:
        return self.a_cost <= self.b_cost.scale2(self.allowance)


@dataclass
class TransferResult:
    approximation: Approximation
    stages: list[int]  # s(0), s(1), ...
    ledger: list[TransferLedgerRow] = field(default_factory=list)
    a_total: Dyadic = ZERO
    b_total: Dyadic = ZERO
    b_full_total: Dyadic = ZERO
    truncated: dict | None = None
    slack: int = 3

    @property
    def within_slack(self) -> bool:
        return self.a_total <= self.b_total.scale2(self.slack)


def _k(omega: StreamQueries, n: int, s: int) -> int | float:
    return INFINITY if n >= s else omega.k_index(n, s)


def speedup_transfer(b: Approximation, psi, omega: StreamQueries, r: ComputableSet,
                     slack: int = 3, horizon: int | None = None) -> TransferResult:
    """Sub-sample ``A_i = Ψ(B_{s(i)})`` at stages where the k-index of every
    position n <= i is within ``slack`` of the k-index of its use.

    ``s(i)`` is the least stage after ``s(i-1)`` at which the output has
    length > i and ``k_s(φ_s(n)) <= slack + k_{i+1}(n)`` for all n <= i.
    Stops with a truncation report when no such stage exists.
    """
    T = min(b.horizon, omega.horizon) if horizon is None else horizon
    stages: list[int] = []
    snaps: list[str] = []
    truncated = None
    prev = -1
    i = 0
    while i + 1 <= T:
        found = None
        for s in range(prev + 1, T + 1):
            out = psi.compute(s, b.snapshots[s])
            if len(out) <= i:
                continue
            ok = True
            for n in range(i + 1):
                use = psi.use(s, b.snapshots[s], n)
                if use is None or _k(omega, use, s) > slack + _k(omega, n, i + 1):
                    ok = False
                    break
            if ok:
                found = (s, out)
                break
        if found is None:
            truncated = {"i": i, "after_stage": prev, "horizon": T}
            break
        prev = found[0]
        stages.append(found[0])
        snaps.append(found[1])
        i += 1
    if not snaps:
        snaps = [psi.compute(0, b.snapshots[0])]
    a = Approximation(tuple(snaps))
    cost = c_fragment(omega, r)
    res = TransferResult(a, stages, truncated=truncated, slack=slack)
    res.b_full_total = total_cost(b.__class__(b.snapshots[: T + 1]), cost)
    for i in range(len(stages) - 1):
        n = a.least_change(i + 1)
        if n is None or n > i:
            continue
        k = _k(omega, n, i + 1)
        a_cost = cost(n, i + 1)
        b_cost = ZERO
        for t in range(stages[i] + 1, stages[i + 1] + 1):
            x = b.least_change(t)
            if x is not None:
                b_cost = b_cost + cost(x, t)
        allowance = slack if k == INFINITY else r.count_below(k + slack) - r.count_below(k)
        res.ledger.append(TransferLedgerRow(i, n, k, a_cost, b_cost, allowance))
        res.a_total = res.a_total + a_cost
        res.b_total = res.b_total + b_cost
    return res
