"""Append-only stage traces with invariant verdicts, JSON-lines and CSV export."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

from ..clopen import ClopenSet
from ..dyadic import Dyadic

# invariant id -> the inequality or rule it checks
ANCHORS: dict[str, str] = {
    "smart.diamond": "mu(U_k,s) <= c(k,s) + mu(E_s+1 - E_k) at every stage",
    "smart.count": "at most 2^k enumerations into I_k",
    "smart.x-exists": "I_k - A_s is nonempty when k requests an element",
    "smart.paid": "c(x,s) < mu(E_s+1 - E_s) for each enumeration",
    "smart.total": "total c-cost of the run <= mu(E_final) <= 1",
    "shift.floor": "c(x,s) >= d(x,s) everywhere probed",
    "shift.cost": "enumeration cost of strategy e <= 2^-e",
    "shift.visits": "strategy e reaches the final step at most 1/alpha_e times",
    "shift.cycle": "each completed cycle adds >= alpha_e to the mirror's cost",
    "shift.declare": "declaration c(s,s+1) >= 2^-e alpha_e never pushes c(s,u) past a senior bound",
    "shift.mirror": "mirror equal to T(A) at the horizon has cost >= 1 or is parked",
    "obedient.total": "total cost <= sum_e 2^-e",
    "obedient.ceiling": "each enumeration costs <= 2^-e",
    "obedient.resum": "ledger equals independent re-summation",
    "capture.bound": "mu(U_n) <= 2 * 2^-|R cap min(k_T(n), n)|",
    "capture.nested": "U_n+1 subset of U_n",
    "capture.member": "fragment prefix lies in U_n",
    "noncapture.k": "|S cap m| - |R cap m| > 1 - log2 eps reached within the horizon",
    "noncapture.summand": "mu(U_n_s,s) <= 2^-k-1 eps per stage",
    "noncapture.relocations": "at most 2^k+1 relocations",
    "noncapture.bound": "mu(V) <= eps",
    "benign.coupling": "delta (beta_s - beta_n) < Omega_s - Omega_n",
    "benign.domination": "c(n,s) <= c_Omega,R(n,s) for all n < s <= T",
    "benign.beta": "beta_T < 1",
    "benign.per-i": "at most g(2^-(i+1)) increments at level i",
    "ravenous.awake": "exactly one awake set per k",
    "ravenous.disjoint": "V^k_n pairwise disjoint across n",
    "ravenous.goal": "mu(V^k_n cap Q) <= 2^-k (Omega_n+1 - Omega_n)",
    "ravenous.wake": "re-awakening follows a drop of mu(Q) > 2^-(k+1) (Omega_n+1 - Omega_n)",
    "ravenous.fg": "Omega_f(s) - Omega_n <= 2 (Omega_g(s) - Omega_n)",
    "ravenous.change": "mu(E_f(s+1) - E_f(s)) >= 2^-k-3 c_Omega,R(n,s) per change",
    "ravenous.total": "total c_Omega,R cost <= 2^k+3 mu(E)",
    "gamma.mass": "live mass at level x equals c(x,t)",
    "transfer.ratio": "A-cost <= 2^|R cap [k,k+b)| B-cost per change",
    "cA.ledger": "c_A(x,s) <= mu(E_s+1 - E_x+1) per change",
    "check.product-identity": "c_Omega,R(n,s) * c_Omega,R^c(n,s) = 2^-k_s(n) for n < s <= T",
    "check.benign-omega": "no eps-expensive interleaved sequence for c_Omega longer than ceil(1/eps)",
    "check.benign-fragment": "no eps-expensive interleaved sequence for c_Omega,R longer than 2^m",
    "check.criterion": "max_m (|S cap m| - |R cap m|) trend matches the expectation",
    "costfn.monotone": "c(x,s) nondecreasing in s and nonincreasing in x on the grid",
}


def jsonable(value: Any) -> Any:
    if isinstance(value, Dyadic):
        return str(value)
    if isinstance(value, ClopenSet):
        return value.to_json()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, float) and value == float("inf"):
        return "inf"
    return value


@dataclass
class _Tally:
    checks: int = 0
    failures: int = 0
    witness: Any = None


@dataclass
class StageTrace:
    """Events and verdicts of one run. The first failed verdict freezes the run."""

    name: str
    config: dict = field(default_factory=dict)
    records: list[dict] = field(default_factory=list)
    tallies: dict[str, _Tally] = field(default_factory=dict)
    violated: bool = False
    first_failure: dict | None = None
    keep_passing: bool = True
    _last_stage: int = 0

    def _stage(self, stage: int) -> None:
        if stage < self._last_stage:
            raise ValueError(f"trace stages must be nondecreasing ({stage} after {self._last_stage})")
        self._last_stage = stage

    def event(self, stage: int, kind: str, **payload) -> None:
        if self.violated:
            return
        self._stage(stage)
        self.records.append({"stage": stage, "kind": kind, "payload": jsonable(payload)})

    def check(self, invariant: str, stage: int, ok: bool, witness: dict | None = None) -> bool:
        """Record a verdict; returns ``ok``."""
        if invariant not in ANCHORS:
            raise KeyError(f"unknown invariant {invariant!r}")
        if self.violated:
            return ok
        self._stage(stage)
        tally = self.tallies.setdefault(invariant, _Tally())
        tally.checks += 1
        rec = {"invariant": invariant, "stage": stage, "pass": bool(ok), "witness": jsonable(witness or {})}
        if not ok:
            tally.failures += 1
            tally.witness = rec["witness"]
            self.violated = True
            self.first_failure = rec
        elif tally.witness is None:
            tally.witness = rec["witness"]
        if self.keep_passing or not ok:
            self.records.append(rec)
        return ok

    @property
    def passed(self) -> bool:
        return not self.violated

    @property
    def events(self) -> list[dict]:
        return [r for r in self.records if "kind" in r]

    @property
    def verdicts(self) -> list[dict]:
        return [r for r in self.records if "invariant" in r]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def summary_rows(self) -> list[dict]:
        return [
            {
                "invariant": inv,
                "anchor": ANCHORS[inv],
                "checks": t.checks,
                "failures": t.failures,
                "witness": json.dumps(t.witness, sort_keys=True),
            }
            for inv, t in sorted(self.tallies.items())
        ]

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["invariant", "anchor", "checks", "failures", "witness"], lineterminator="\n")
        w.writeheader()
        w.writerows(self.summary_rows())
        return buf.getvalue()

    def merge_tallies(self, other: StageTrace) -> None:
        for inv, t in other.tallies.items():
            mine = self.tallies.setdefault(inv, _Tally())
            mine.checks += t.checks
            mine.failures += t.failures
            if t.failures and mine.witness is None or (t.failures and mine.failures == t.failures):
                mine.witness = t.witness
            elif mine.witness is None:
                mine.witness = t.witness
        if other.violated and not self.violated:
            self.violated = True
            self.first_failure = other.first_failure
