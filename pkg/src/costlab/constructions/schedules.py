"""Adversary schedules for Υ: seeded generators and JSON scripts.

A schedule proposes ``(oracle, output)`` pairs at each stage after seeing
the current target string. Proposals pass through a DelayQueue before they
become axioms, so a schedule may propose anything.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path


class Schedule:
    name = "schedule"

    def reset(self) -> None:
        pass

    def propose(self, stage: int, target: str) -> list[tuple[str, str]]:
        raise NotImplementedError


class EmptySchedule(Schedule):
    name = "empty"

    def propose(self, stage, target):
        return []


def _resolve(output, target: str) -> str:
    if isinstance(output, dict):
        m = output["copy"]
        return target.ljust(m, "0")[:m]
    return output


@dataclass
class ScriptedSchedule(Schedule):
    """``stages`` maps a stage to proposals; ``every`` is proposed at each stage.

    An output may be a literal bit string or ``{"copy": m}``, meaning the
    first m bits of the current target.
    """

    stages: dict[int, list] = field(default_factory=dict)
    every: list = field(default_factory=list)
    name: str = "script"

    def propose(self, stage, target):
        items = list(self.stages.get(stage, [])) + list(self.every)
        return [(o, _resolve(t, target)) for o, t in items]

    @classmethod
    def from_json(cls, data: dict | str | Path) -> ScriptedSchedule:
        if not isinstance(data, dict):
            data = json.loads(Path(data).read_text())
        stages = {int(k): v for k, v in data.get("stages", {}).items()}
        return cls(stages, data.get("every", []), data.get("name", "script"))


@dataclass
class RandomSchedule(Schedule):
    """Seeded adaptive adversary.

    Each stage it proposes up to ``burst`` axioms with probability ``rate``:
    an oracle of length 1..``max_oracle`` and a copy of the current target
    of random length up to ``out_len``. With probability ``p_right`` one 0
    bit is flipped to 1 (lies right: exercises the delay queue), with
    ``p_left`` one 1 bit is flipped to 0 (an immediate error).
    """

    seed: int
    rate: float = 0.6
    burst: int = 2
    max_oracle: int = 5
    out_len: int = 32
    p_right: float = 0.1
    p_left: float = 0.05

    def __post_init__(self):
        self.name = f"random:{self.seed}"
        self.reset()

    def reset(self):
        self.rng = random.Random(self.seed)

    def propose(self, stage, target):
        rng = self.rng
        out = []
        for _ in range(self.burst):
            if rng.random() >= self.rate:
                continue
            oracle = "".join(rng.choice("01") for _ in range(rng.randint(1, self.max_oracle)))
            m = rng.randint(1, self.out_len)
            tau = list(target.ljust(m, "0")[:m])
            roll = rng.random()
            if roll < self.p_right:
                zeros = [i for i, b in enumerate(tau) if b == "0"]
                if zeros:
                    tau[rng.choice(zeros)] = "1"
            elif roll < self.p_right + self.p_left:
                ones = [i for i, b in enumerate(tau) if b == "1"]
                if ones:
                    tau[rng.choice(ones)] = "0"
            out.append((oracle, "".join(tau)))
        return out


def schedule_from_spec(spec: str, out_len: int = 32) -> Schedule:
    """``empty``, ``random:<seed>``, or a path to a JSON script."""
    if spec == "empty":
        return EmptySchedule()
    if spec.startswith("random:"):
        return RandomSchedule(int(spec.split(":", 1)[1]), out_len=out_len)
    return ScriptedSchedule.from_json(spec)
