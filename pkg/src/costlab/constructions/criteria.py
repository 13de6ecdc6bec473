"""Finite-horizon estimates: the counting criterion and a dense partition."""

from __future__ import annotations

from dataclasses import dataclass

from ..omega import ComputableSet


@dataclass
class CriterionReport:
    """``max_{m<=M} (|S∩m| - |R∩m|)`` with its running maximum at ``m = 2^i``.

    A finite-horizon estimate: ``bounded`` means the running maximum did not
    move over the last quarter-range ``(M/4, M]``, nothing more.
    """

    b: int
    argmax: int
    horizon: int
    checkpoints: list[tuple[int, int]]  # (m, running max up to m)
    trend: str
    label: str = "finite-horizon estimate"

    def to_json(self) -> dict:
        return {"b": self.b, "argmax": self.argmax, "horizon": self.horizon, "trend": self.trend,
                "checkpoints": [list(c) for c in self.checkpoints], "label": self.label}


def criterion_check(r: ComputableSet, s: ComputableSet, horizon: int) -> CriterionReport:
    best, arg = 0, 0
    running = []
    marks = {1 << i for i in range(horizon.bit_length())} | {horizon, horizon // 4}
    for m in range(horizon + 1):
        d = s.count_below(m) - r.count_below(m)
        if d > best:
            best, arg = d, m
        if m in marks:
            running.append((m, best))
    quarter = dict(running)[horizon // 4]
    trend = "growing" if best > quarter else "bounded"
    return CriterionReport(best, arg, horizon, running, trend)


def block_ends(count: int, horizon: int) -> list[tuple[int, int, int]]:
    """Round-robin blocks ``(part, start, end)`` covering ``[0, horizon)``.

    Block b goes to part ``b mod count`` on its j-th visit (``j = b // count + 1``)
    and has length ``(2^j - 1)·start + 1``, so the part holds more than
    ``1 - 2^-j`` of ``[0, end)``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    out = []
    start, b = 0, 0
    while start < horizon:
        j = b // count + 1
        end = start + ((1 << j) - 1) * start + 1
        out.append((b % count, start, min(end, horizon)))
        start, b = end, b + 1
    return out


def density_partition(count: int, horizon: int) -> list[ComputableSet]:
    """``count`` disjoint sets covering ``[0, horizon)``, each dense at its own block ends."""
    blocks = block_ends(count, horizon)
    owner = [0] * horizon
    for part, start, end in blocks:
        for x in range(start, end):
            owner[x] = part
    if count == 1:
        return [ComputableSet(lambda x: x < horizon, "partition:0/1", horizon)]
    return [ComputableSet(lambda x, i=i: x < horizon and owner[x] == i, f"partition:{i}/{count}", horizon)
            for i in range(count)]
