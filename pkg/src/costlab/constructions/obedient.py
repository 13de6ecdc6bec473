"""A c.e. set obeying c that meets simple-set style requirements.

Requirement e watches a c.e. set W_e and, once, enumerates the least
``x ∈ W_{e,s}`` with ``x >= 2e`` and ``c(x,s) <= 2^-e``. At most one
requirement acts per stage (highest priority first), so the ledger of
enumeration prices coincides with the total cost of the run.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..costfn import Approximation, CostFunction, total_cost
from ..dyadic import ZERO, Dyadic
from .trace import StageTrace


class CESet:
    """A c.e. set given by its finite stages ``W_s``."""

    name = "ce"

    def at(self, s: int) -> frozenset[int]:
        raise NotImplementedError


@dataclass
class Arithmetic(CESet):
    """``{x < s : x ≡ offset mod step}`` from stage ``start`` on."""

    step: int = 1
    offset: int = 0
    start: int = 1

    @property
    def name(self):
        return f"mod{self.step}+{self.offset}@{self.start}"

    def at(self, s):
        if s < self.start:
            return frozenset()
        return frozenset(range(self.offset, s, self.step))


class Empty(CESet):
    name = "empty"

    def at(self, s):
        return frozenset()


@dataclass
class Scripted(CESet):
    """``events[t]`` lists the elements enumerated at stage t."""

    events: dict[int, list[int]]
    label: str = "script"

    @property
    def name(self):
        return self.label

    def at(self, s):
        return frozenset(x for t, xs in self.events.items() if t <= s for x in xs)


@dataclass
class RandomCE(CESet):
    """Each stage adds one random number below ``limit`` with probability ``rate``."""

    seed: int
    limit: int = 200
    rate: float = 0.3

    def __post_init__(self):
        self._adds: list[int] = []
        self._rng = random.Random(self.seed)

    @property
    def name(self):
        return f"random:{self.seed}"

    def at(self, s):
        while len(self._adds) <= s:
            self._adds.append(self._rng.randrange(self.limit) if self._rng.random() < self.rate else -1)
        return frozenset(x for x in self._adds[1 : s + 1] if x >= 0)


def w_family_from_spec(spec: str) -> list[CESet]:
    """Comma list of ``naturals@t``, ``evens@t``, ``odds@t``, ``random:<seed>``,
    ``empty``; or a path to a JSON list of ``{stage: [elements]}`` scripts."""
    if not spec:
        return []
    if spec.endswith(".json"):
        data = json.loads(Path(spec).read_text())
        return [Scripted({int(k): v for k, v in d.items()}, f"script{i}") for i, d in enumerate(data)]
    out: list[CESet] = []
    for part in spec.split(","):
        kind, _, arg = part.partition("@")
        start = int(arg) if arg else 1
        if kind == "naturals":
            out.append(Arithmetic(1, 0, start))
        elif kind == "evens":
            out.append(Arithmetic(2, 0, start))
        elif kind == "odds":
            out.append(Arithmetic(2, 1, start))
        elif kind == "empty":
            out.append(Empty())
        elif kind.startswith("random:"):
            out.append(RandomCE(int(kind.split(":")[1])))
        else:
            raise ValueError(f"unknown c.e. set {part!r}")
    return out


@dataclass
class ObedientRun:
    a: frozenset[int]
    approximation: Approximation
    served: dict[int, tuple[int, int]]  # e -> (stage, x)
    ledger: Dyadic
    total: Dyadic
    trace: StageTrace


def run_obedient_ce(c: CostFunction, family: list[CESet], horizon: int,
                    keep_passing: bool = True) -> ObedientRun:
    trace = StageTrace("obedient", {"cost": c.name, "family": [w.name for w in family],
                                    "horizon": horizon}, keep_passing=keep_passing)
    a: set[int] = set()
    served: dict[int, tuple[int, int]] = {}
    ledger = ZERO
    events: dict[int, list[int]] = {}
    for s in range(1, horizon + 1):
        for e, w in enumerate(family):
            if e in served:
                continue
            ceiling = Dyadic.pow2(-e)
            x = next((x for x in sorted(w.at(s)) if x >= 2 * e and x not in a and c(x, s) <= ceiling), None)
            if x is None:
                continue
            price = c(x, s)
            a.add(x)
            served[e] = (s, x)
            events[s] = [x]
            ledger = ledger + price
            trace.event(s, "enumerate", e=e, x=x, cost=price)
            trace.check("obedient.ceiling", s, price <= ceiling, {"e": e, "x": x, "cost": price})
            break
    width = max([horizon + 1, *(x + 1 for x in a)])
    approx = Approximation.from_enumeration(events, horizon, width)
    total = total_cost(approx, c)
    budget = sum((Dyadic.pow2(-e) for e in range(len(family))), ZERO)
    trace.check("obedient.resum", horizon, ledger == total, {"ledger": ledger, "resummed": total})
    trace.check("obedient.total", horizon, total <= budget, {"total": total, "budget": budget})
    return ObedientRun(frozenset(a), approx, served, ledger, total, trace)
