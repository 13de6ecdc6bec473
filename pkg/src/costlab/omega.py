"""Left-c.e. approximations (Omega-like streams), computable sets, fragments."""

from __future__ import annotations

import json
import math
import random
from collections.abc import Callable, Iterable
from pathlib import Path

from .dyadic import ONE, ZERO, Dyadic
from .toy_machine import PROGRAM_TABLE

INFINITY = math.inf


class StreamQueries:
    """Queries shared by frozen and growing left-c.e. streams.

    Subclasses provide ``__getitem__(stage)`` and ``horizon``.
    """

    def gap(self, n: int, s: int) -> Dyadic:
        """``Ω_s - Ω_n`` for ``n <= s``."""
        if n > s:
            raise ValueError(f"gap needs n <= s, got n={n}, s={s}")
        return self[s] - self[n]

    def k_index(self, n: int, s: int) -> int | float:
        """``floor(-log2(Ω_s - Ω_n))``, or ``INFINITY`` when the gap is 0."""
        d = self.gap(n, s)
        if not d:
            return INFINITY
        return d.floor_neg_log2()

    def bits(self, s: int, length: int) -> str:
        """First ``length`` bits of the binary expansion of ``Ω_s``."""
        return self[s].bits(length)


class LeftCEApprox(StreamQueries):
    """A finite prefix ``Ω_0 = 0 <= Ω_1 <= ... <= Ω_T < bound``.

    Stages with zero increment are allowed and listed in ``noop_stages``.
    """

    def __init__(self, values: Iterable[Dyadic], bound: Dyadic = ONE, name: str = ""):
        self.values: tuple[Dyadic, ...] = tuple(values)
        self.bound = bound
        self.name = name
        if not self.values or self.values[0] != ZERO:
            raise ValueError("a left-c.e. approximation starts at 0")
        for s in range(1, len(self.values)):
            if self.values[s] < self.values[s - 1]:
                raise ValueError(f"stream decreases at stage {s}")
        if self.values[-1] >= bound:
            raise ValueError(f"stream reaches the bound {bound}")
        self.noop_stages = tuple(
            s for s in range(1, len(self.values)) if self.values[s] == self.values[s - 1]
        )

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, s: int) -> Dyadic:
        if s < 0:
            raise IndexError(s)
        return self.values[s]

    def __len__(self):
        return len(self.values)

    def truncate(self, horizon: int) -> LeftCEApprox:
        return LeftCEApprox(self.values[: horizon + 1], self.bound, self.name)

    def scaled(self, factor: Dyadic) -> LeftCEApprox:
        return LeftCEApprox((v * factor for v in self.values), self.bound, f"{self.name}*{factor}")

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"stage": s, "value": str(v)}) + "\n" for s, v in enumerate(self.values)
        )

    def __repr__(self):
        return f"LeftCEApprox({self.name!r}, horizon={self.horizon}, last={self.values[-1]})"


# --- sources ----------------------------------------------------------------


def toy_machine(horizon: int, table=PROGRAM_TABLE) -> LeftCEApprox:
    """Run the shipped prefix-free machine for ``horizon`` stages."""
    _check_prefix_free([p for p, _ in table])
    inc = [ZERO] * (horizon + 1)
    for program, stage in table:
        if stage <= horizon:
            inc[stage] = inc[stage] + Dyadic.pow2(-len(program))
    values = [ZERO]
    for s in range(1, horizon + 1):
        values.append(values[-1] + inc[s])
    return LeftCEApprox(values, name="toy-machine")


def _check_prefix_free(programs: list[str]) -> None:
    ordered = sorted(programs)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            raise ValueError(f"program table is not prefix-free: {a!r} < {b!r}")


BURST_PROFILES = ("steady", "bursty", "sparse")


def synthetic(seed: int, horizon: int, profile: str = "steady") -> LeftCEApprox:
    """Seeded stream; each step adds a random dyadic fraction of the remaining gap to 1.

    ``steady`` moves every stage by a fraction in [1/256, 1/4]; ``bursty``
    mixes rare large jumps with tiny ones and some idle stages; ``sparse``
    idles on most stages.
    """
    if profile not in BURST_PROFILES:
        raise ValueError(f"unknown burst profile {profile!r}")
    rng = random.Random(seed)
    values = [ZERO]
    for _ in range(horizon):
        cur = values[-1]
        remaining = ONE - cur
        if profile == "steady":
            frac = Dyadic(rng.randint(1, 64), 8)
        elif profile == "bursty":
            roll = rng.random()
            if roll < 0.3:
                frac = ZERO
            elif roll < 0.4:
                frac = Dyadic(rng.randint(64, 128), 8)
            else:
                frac = Dyadic(rng.randint(1, 16), 12)
        else:
            frac = ZERO if rng.random() < 0.8 else Dyadic(rng.randint(1, 64), 8)
        values.append(cur + remaining * frac)
    return LeftCEApprox(values, name=f"synthetic({seed},{profile})")


def replay(path: str | Path, bound: Dyadic = ONE) -> LeftCEApprox:
    """Read a JSON-lines stream of ``{"stage": s, "value": "m/2^e"}`` records."""
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["stage"] != len(values):
            raise ValueError(f"line {lineno}: expected stage {len(values)}, got {rec['stage']}")
        values.append(Dyadic.parse(rec["value"]))
    return LeftCEApprox(values, bound, name=f"replay({Path(path).name})")


def omega_source(kind: str, horizon: int = 0, seed: int = 0, profile: str = "steady",
                 path: str | Path | None = None) -> LeftCEApprox:
    if kind == "toy-machine":
        return toy_machine(horizon)
    if kind == "synthetic":
        return synthetic(seed, horizon, profile)
    if kind == "replay":
        if path is None:
            raise ValueError("replay needs a path")
        stream = replay(path)
        return stream.truncate(horizon) if horizon and horizon < stream.horizon else stream
    raise ValueError(f"unknown omega source {kind!r}")


def k_index(omega: StreamQueries, n: int, s: int) -> int | float:
    return omega.k_index(n, s)


# --- computable sets ----------------------------------------------------------


class ComputableSet:
    """A decidable set of naturals, with counting and enumeration below a horizon."""

    def __init__(self, member: Callable[[int], bool], name: str, horizon: int = 1 << 16):
        self.member = member
        self.name = name
        self.horizon = horizon
        self._counts = [0]  # _counts[m] = |R ∩ m|
        self._elements: list[int] = []

    def __contains__(self, n: int) -> bool:
        return n >= 0 and bool(self.member(n))

    def _grow(self, m: int) -> None:
        if m > self.horizon:
            raise ValueError(f"{self.name}: position {m} is past the horizon {self.horizon}")
        while len(self._counts) <= m:
            x = len(self._counts) - 1
            hit = x in self
            if hit:
                self._elements.append(x)
            self._counts.append(self._counts[-1] + hit)

    def count_below(self, m: int | float) -> int:
        """``|R ∩ [0, m)|``."""
        if m == INFINITY:
            raise ValueError("count below infinity")
        m = max(0, int(m))
        self._grow(m)
        return self._counts[m]

    def nth(self, m: int) -> int:
        """The m-th element (0-based) of R."""
        while len(self._elements) <= m:
            self._grow(len(self._counts))
        return self._elements[m]

    def elements(self, below: int) -> list[int]:
        self._grow(below)
        return self._elements[: self._counts[below]]

    def complement(self) -> ComputableSet:
        member = self.member
        if self.name.startswith("not:"):
            name = self.name[4:]
        else:
            name = f"not:{self.name}"
        return ComputableSet(lambda n: not member(n), name, self.horizon)

    def __repr__(self):
        return f"ComputableSet({self.name})"


def naturals() -> ComputableSet:
    return ComputableSet(lambda n: True, "naturals")


def evens() -> ComputableSet:
    return ComputableSet(lambda n: n % 2 == 0, "evens")


def odds() -> ComputableSet:
    return ComputableSet(lambda n: n % 2 == 1, "odds")


def column_union(T: Iterable[int], n: int) -> ComputableSet:
    """``R(T, n)``: union of the residue classes ``j-1 + nℕ`` for j in T."""
    T = sorted(set(T))
    if n < 1:
        raise ValueError("n must be at least 1")
    if not T:
        raise ValueError("T must be nonempty")
    if T[0] < 1 or T[-1] > n:
        raise ValueError(f"T must be a subset of 1..{n}")
    residues = frozenset(j - 1 for j in T)
    return ComputableSet(lambda x: x % n in residues, f"col:{','.join(map(str, T))}/{n}")


def from_elements(elements: Iterable[int], name: str | None = None) -> ComputableSet:
    members = frozenset(elements)
    return ComputableSet(members.__contains__, name or f"set:{sorted(members)}")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


_NAMED = {
    "naturals": naturals,
    "N": naturals,
    "evens": evens,
    "odds": odds,
    "squares": lambda: ComputableSet(lambda n: math.isqrt(n) ** 2 == n, "squares"),
    "primes": lambda: ComputableSet(_is_prime, "primes"),
    "pow2": lambda: ComputableSet(lambda n: n > 0 and n & (n - 1) == 0, "pow2"),
    "zero+odds": lambda: ComputableSet(lambda n: n == 0 or n % 2 == 1, "zero+odds"),
}


def parse_set(text: str) -> ComputableSet:
    """Named sets: ``naturals``, ``evens``, ``odds``, ``squares``, ``primes``,
    ``pow2``, ``zero+odds``; columns ``col:1,2/4``; complements ``not:<set>``."""
    if text.startswith("not:"):
        return parse_set(text[4:]).complement()
    if text.startswith("col:"):
        body = text[4:]
        ts, n = body.split("/")
        return column_union([int(t) for t in ts.split(",")], int(n))
    if text in _NAMED:
        return _NAMED[text]()
    raise ValueError(f"unknown set {text!r}")


def fragment(omega: StreamQueries, r: ComputableSet, s: int, length: int) -> str:
    """Bits of ``Ω_s`` at the first ``length`` positions of R, in order."""
    if length == 0:
        return ""
    positions = [r.nth(m) for m in range(length)]
    expansion = omega.bits(s, positions[-1] + 1)
    return "".join(expansion[p] for p in positions)
