"""Finite clopen subsets of Cantor space and of its square.

Bit strings are plain ``str`` objects over ``"0"``/``"1"``. A clopen set is
kept as its canonical generating antichain: no generator extends another,
and no two siblings ``w0``, ``w1`` both appear (they are merged into ``w``).
Two clopen sets are equal exactly when their canonical antichains are.
"""

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Iterable, Iterator

from .dyadic import ZERO, Dyadic


def check_bits(sigma: str) -> str:
    if sigma.strip("01"):
        raise ValueError(f"not a bit string: {sigma!r}")
    return sigma


def is_prefix(p: str, q: str) -> bool:
    """True iff ``p`` is an initial segment of ``q`` (``p ⪯ q``)."""
    return q.startswith(p)


def comparable(p: str, q: str) -> bool:
    return p.startswith(q) or q.startswith(p)


def lies_left(t: str, a: str) -> bool:
    """True iff ``t`` branches off ``a`` to the left.

    That is, at the first position where they differ ``t`` has a 0 and ``a``
    a 1. Comparable strings (one a prefix of the other) are never left of
    each other.
    """
    for x, y in zip(t, a):
        if x != y:
            return x == "0"
    return False


def hat(sigma: str) -> str:
    """Flip the final bit of a nonempty string."""
    if not sigma:
        raise ValueError("hat of the empty string is undefined")
    return sigma[:-1] + ("1" if sigma[-1] == "0" else "0")


def _normalize(gens: Iterable[str]) -> tuple[str, ...]:
    stack: list[str] = []
    last_kept: str | None = None
    for g in sorted(set(gens)):
        if last_kept is not None and g.startswith(last_kept):
            continue
        last_kept = g
        stack.append(g)
        # merge sibling pairs bottom-up
        while len(stack) >= 2:
            a, b = stack[-2], stack[-1]
            if a and len(a) == len(b) and a[:-1] == b[:-1] and a[-1] == "0" and b[-1] == "1":
                stack[-2:] = [a[:-1]]
                last_kept = stack[-1]
            else:
                break
    return tuple(stack)


def _cover_minus(x: str, holes: list[str]) -> list[str]:
    """Antichain for ``[x]`` minus the union of ``[h]`` (each h extends x)."""
    if not holes:
        return [x]
    if x in holes:
        return []
    out = []
    for b in "01":
        child = x + b
        out.extend(_cover_minus(child, [h for h in holes if h.startswith(child)]))
    return out


class ClopenSet:
    """A finite union of cylinders ``[σ]`` in Cantor space."""

    __slots__ = ("gens", "_set")

    def __init__(self, gens: Iterable[str] = ()):
        gens = list(gens)
        for g in gens:
            check_bits(g)
        self.gens: tuple[str, ...] = _normalize(gens)
        self._set = frozenset(self.gens)

    @classmethod
    def _trusted(cls, gens: Iterable[str]) -> ClopenSet:
        obj = cls.__new__(cls)
        obj.gens = _normalize(gens)
        obj._set = frozenset(obj.gens)
        return obj

    @classmethod
    def full(cls) -> ClopenSet:
        return cls._trusted([""])

    def __iter__(self) -> Iterator[str]:
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)

    def __bool__(self):
        return bool(self.gens)

    def __eq__(self, other):
        return isinstance(other, ClopenSet) and self.gens == other.gens

    def __hash__(self):
        return hash(self.gens)

    def __repr__(self):
        return f"ClopenSet({list(self.gens)!r})"

    def measure(self) -> Dyadic:
        if not self.gens:
            return ZERO
        depth = max(len(g) for g in self.gens)
        return Dyadic(sum(1 << (depth - len(g)) for g in self.gens), depth)

    def _prefix_in(self, sigma: str) -> str | None:
        for i in range(len(sigma) + 1):
            if sigma[:i] in self._set:
                return sigma[:i]
        return None

    def _extensions(self, sigma: str) -> list[str]:
        i = bisect_left(self.gens, sigma)
        out = []
        while i < len(self.gens) and self.gens[i].startswith(sigma):
            out.append(self.gens[i])
            i += 1
        return out

    def contains_cylinder(self, sigma: str) -> bool:
        """True iff ``[sigma]`` is a subset of this set."""
        return self._prefix_in(sigma) is not None

    def meets_cylinder(self, sigma: str) -> bool:
        return self._prefix_in(sigma) is not None or bool(self._extensions(sigma))

    def __or__(self, other: ClopenSet) -> ClopenSet:
        return ClopenSet._trusted(self.gens + other.gens)

    def __and__(self, other: ClopenSet) -> ClopenSet:
        out = []
        for x in self.gens:
            if other._prefix_in(x) is not None:
                out.append(x)
            else:
                out.extend(other._extensions(x))
        return ClopenSet._trusted(out)

    def __sub__(self, other: ClopenSet) -> ClopenSet:
        out = []
        for x in self.gens:
            if other._prefix_in(x) is not None:
                continue
            out.extend(_cover_minus(x, other._extensions(x)))
        return ClopenSet._trusted(out)

    def issubset(self, other: ClopenSet) -> bool:
        return all(other.contains_cylinder(g) for g in self.gens)

    def isdisjoint(self, other: ClopenSet) -> bool:
        return not (self & other)

    def complement(self) -> ClopenSet:
        return ClopenSet.full() - self

    def shift(self) -> ClopenSet:
        """Image under deletion of the first bit (the shift on Cantor space)."""
        return ClopenSet._trusted("" if not g else g[1:] for g in self.gens)

    def to_json(self) -> list[str]:
        return list(self.gens)


def union_all(sets: Iterable[ClopenSet]) -> ClopenSet:
    gens: list[str] = []
    for s in sets:
        gens.extend(s.gens)
    return ClopenSet._trusted(gens)


def _atoms(entries: list[tuple[str, object, ClopenSet]]):
    """Refine rectangles ``[σ] x T`` onto disjoint first-coordinate atoms.

    ``entries`` holds ``(σ, tag, T)`` triples. Returns ``(atom, {tag: T'})``
    pairs where the atoms form an antichain and ``T'`` is the union of all
    ``T`` with that tag whose ``σ`` is a prefix of the atom.
    """
    out = []

    def walk(node, active, pending):
        if not pending:
            if active:
                out.append((node, active))
            return
        for b in "01":
            child = node + b
            act = dict(active)
            rest = []
            for e in pending:
                sigma, tag, t = e
                if sigma == child:
                    act[tag] = act[tag] | t if tag in act else t
                elif sigma.startswith(child):
                    rest.append(e)
            walk(child, act, rest)

    root: dict = {}
    pending = []
    for e in entries:
        sigma, tag, t = e
        if sigma == "":
            root[tag] = root[tag] | t if tag in root else t
        else:
            pending.append(e)
    walk("", root, pending)
    return out


class ProductClopenSet:
    """A finite union of rectangles ``[σ] x [τ]`` in the product space.

    Stored in split normal form: first coordinates form an antichain, and
    each maps to the clopen set of second coordinates above it, so the
    rectangles are disjoint and measure is a plain sum.
    """

    __slots__ = ("rows",)

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        entries = [(check_bits(s), 0, ClopenSet([t])) for s, t in pairs]
        self.rows = self._rows_from(_atoms(entries), lambda d: d.get(0))

    @staticmethod
    def _rows_from(atoms, pick) -> tuple[tuple[str, ClopenSet], ...]:
        rows = {}
        for atom, parts in atoms:
            t = pick(parts)
            if t:
                rows[atom] = t
        # merge sibling rows with identical second coordinates
        changed = True
        while changed:
            changed = False
            for sigma in sorted(rows, key=len, reverse=True):
                if not sigma or sigma not in rows or sigma[-1] != "0":
                    continue
                sib = sigma[:-1] + "1"
                if rows.get(sib) == rows[sigma]:
                    rows[sigma[:-1]] = rows.pop(sigma)
                    del rows[sib]
                    changed = True
        return tuple(sorted(rows.items()))

    @classmethod
    def _from_rows(cls, rows) -> ProductClopenSet:
        obj = cls.__new__(cls)
        obj.rows = rows
        return obj

    @classmethod
    def rectangle(cls, sigma: str, t: ClopenSet) -> ProductClopenSet:
        return cls._from_rows(((sigma, t),) if t else ())

    def _combine(self, other: ProductClopenSet, pick) -> ProductClopenSet:
        entries = [(s, 0, t) for s, t in self.rows] + [(s, 1, t) for s, t in other.rows]
        return ProductClopenSet._from_rows(self._rows_from(_atoms(entries), pick))

    def __or__(self, other):
        return self._combine(other, lambda d: union_all(d.values()))

    def __and__(self, other):
        return self._combine(other, lambda d: d[0] & d[1] if 0 in d and 1 in d else None)

    def __sub__(self, other):
        return self._combine(other, lambda d: (d[0] - d[1] if 1 in d else d[0]) if 0 in d else None)

    def __bool__(self):
        return bool(self.rows)

    def __eq__(self, other):
        return isinstance(other, ProductClopenSet) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"ProductClopenSet({[(s, list(t)) for s, t in self.rows]!r})"

    def rectangles(self) -> Iterator[tuple[str, str]]:
        for s, t in self.rows:
            for g in t:
                yield s, g

    def measure(self) -> Dyadic:
        total = ZERO
        for s, t in self.rows:
            total = total + t.measure().scale2(-len(s))
        return total

    def proj1(self) -> ClopenSet:
        return ClopenSet._trusted(s for s, _ in self.rows)

    def proj2(self) -> ClopenSet:
        return union_all(t for _, t in self.rows)

    def restrict2(self, allowed: ClopenSet) -> ProductClopenSet:
        """Intersect with ``2^ω x allowed``."""
        atoms = [(s, {0: t & allowed}) for s, t in self.rows]
        return ProductClopenSet._from_rows(self._rows_from(atoms, lambda d: d[0]))

    def remove2(self, banned: ClopenSet) -> ProductClopenSet:
        """Intersect with ``2^ω x (complement of banned)``."""
        atoms = [(s, {0: t - banned}) for s, t in self.rows]
        return ProductClopenSet._from_rows(self._rows_from(atoms, lambda d: d[0]))

    def to_json(self) -> list[list[str]]:
        return [[s, g] for s, g in self.rectangles()]
