"""Tests built from a fragment of the stream, and the open set that defeats
a test too small for the fragment's complement.

``G_σ`` is the cylinder fixing the bits of σ that sit at positions in R,
read in order: a single string of length ``|R ∩ |σ||``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..clopen import ClopenSet
from ..dyadic import ZERO, Dyadic
from ..functionals import _split_take
from ..omega import INFINITY as INF
from ..omega import ComputableSet, StreamQueries, fragment
from .trace import StageTrace


def g_string(sigma: str, r: ComputableSet) -> str:
    return "".join(sigma[p] for p in r.elements(len(sigma)))


@dataclass
class CaptureRun:
    tests: list[ClopenSet]  # U_n for n <= nmax
    bounds: list[Dyadic]
    trace: StageTrace


def build_capture_test(omega: StreamQueries, r: ComputableSet, horizon: int, nmax: int = 50,
                       k_shift: int = 0, keep_passing: bool = True) -> CaptureRun:
    """``U_n = ⋃_{s∈[n,T]} G_{Ω_s↾n}`` for n <= nmax, with its three checks.

    ``k_shift`` adds to ``k_T(n)`` in the bound (a negative control when > 0).
    The level used is ``min(k_T(n), n)``: when the gap is below ``2^-n``
    the live values still share at most two n-bit prefixes.
    """
    trace = StageTrace("capture", {"r": r.name, "horizon": horizon, "nmax": nmax,
                                   "k_shift": k_shift}, keep_passing=keep_passing)
    # bits of each distinct stream value, with the first stage it appears
    prefixes: list[tuple[int, str]] = []
    last = None
    for s in range(horizon + 1):
        v = omega.bits(s, nmax)
        if v != last:
            prefixes.append((s, v))
            last = v
    tests: list[ClopenSet] = []
    bounds: list[Dyadic] = []
    for n in range(nmax + 1):
        # a value first seen before n still holds at stage n if it is the latest one
        live = [bits for i, (s, bits) in enumerate(prefixes)
                if s >= n or i + 1 == len(prefixes) or prefixes[i + 1][0] > n]
        u = ClopenSet({g_string(b[:n], r) for b in live})
        k = omega.k_index(n, horizon)
        # a gap <= 2^-min(k,n) leaves at most two prefixes of that length
        kk = min(k, n) + k_shift
        bound = Dyadic.pow2(1 - r.count_below(kk))
        mu = u.measure()
        trace.check("capture.bound", n, mu <= bound,
                    {"n": n, "mu_U": mu, "bound": bound, "k_T": k, "strings": len(u)})
        if tests:
            trace.check("capture.nested", n, u.issubset(tests[-1]), {"n": n})
        frag = fragment(omega, r, horizon, r.count_below(n))
        trace.check("capture.member", n, u.contains_cylinder(frag), {"n": n, "prefix": frag})
        tests.append(u)
        bounds.append(bound)
        if trace.violated:
            break
    return CaptureRun(tests, bounds, trace)


# --- non-capture ------------------------------------------------------------------------


class TestSchedule:
    """A test given stagewise: ``at(n, s)`` is ``U_n[s]``, nondecreasing in s."""

    name = "test"

    def at(self, n: int, s: int) -> ClopenSet:
        raise NotImplementedError


class EmptyTest(TestSchedule):
    name = "empty"

    def at(self, n, s):
        return ClopenSet()


def join_cylinders(x_bits: str, y_bits: str, max_free: int = 12) -> ClopenSet:
    """``{X ⊕ Y : X extends x_bits, Y extends y_bits}`` as a clopen set."""
    length = max(2 * len(x_bits) - 1, 2 * len(y_bits), 0)
    fixed: dict[int, str] = {2 * m: b for m, b in enumerate(x_bits)}
    fixed.update({2 * m + 1: b for m, b in enumerate(y_bits)})
    free = [p for p in range(length) if p not in fixed]
    if len(free) > max_free:
        raise ValueError(f"join leaves {len(free)} free positions; use a more balanced split")
    gens = []
    for mask in range(1 << len(free)):
        cur = dict(fixed)
        for j, p in enumerate(free):
            cur[p] = "1" if mask >> j & 1 else "0"
        gens.append("".join(cur[p] for p in range(length)))
    return ClopenSet(gens)


@dataclass
class JoinCaptureTest(TestSchedule):
    """A test aimed at ``Ω_R ⊕ Ω_{R^∁}`` with ``μ(U_n[s]) <= c_{Ω,S}(n,s)·c_{Ω,R^∁}(n,s)``.

    At stage s the candidate is the join cylinder of ``Ω_s↾n`` split along R;
    whatever part of it is new is trimmed to the remaining budget.
    """

    omega: StreamQueries
    s_set: ComputableSet
    r: ComputableSet
    _cache: dict[int, tuple[int, ClopenSet]] = field(default_factory=dict, repr=False)

    @property
    def name(self):
        return f"join-capture(S={self.s_set.name},R={self.r.name})"

    def budget(self, n: int, s: int) -> Dyadic:
        k = self.omega.k_index(n, s)
        if k == INF:
            return ZERO
        rc = k - self.r.count_below(k)
        return Dyadic.pow2(-(self.s_set.count_below(k) + rc))

    def _candidate(self, n: int, s: int) -> ClopenSet:
        sigma = self.omega.bits(s, n)
        x = "".join(sigma[p] for p in range(n) if p in self.r)
        y = "".join(sigma[p] for p in range(n) if p not in self.r)
        return join_cylinders(x, y)

    def at(self, n, s):
        if s < n:
            return ClopenSet()
        t, u = self._cache.get(n, (n - 1, ClopenSet()))
        if t > s:  # replay from scratch for an earlier stage
            t, u = n - 1, ClopenSet()
        while t < s:
            t += 1
            room = self.budget(n, t) - u.measure()
            if room <= ZERO:
                continue
            new = self._candidate(n, t) - u
            if not new:
                continue
            if new.measure() <= room:
                u = u | new
                continue
            taken: list[str] = []
            for g in new:
                if room <= ZERO:
                    break
                part, _ = _split_take(g, room)
                taken.extend(part)
                room = room - sum((Dyadic.pow2(-len(p)) for p in part), ZERO)
            u = u | ClopenSet(taken)
        self._cache[n] = (t, u)
        return u


def find_k(s_set: ComputableSet, r: ComputableSet, eps: Dyadic, limit: int) -> int | None:
    """Least k with ``|S∩k| - |R∩k| > 1 - log2 eps``, searching k <= limit."""
    j = eps.floor_neg_log2()
    if Dyadic.pow2(-j) != eps:
        raise ValueError("eps must be a power of two")
    for k in range(limit + 1):
        if s_set.count_below(k) - r.count_below(k) > 1 + j:
            return k
    return None


@dataclass
class NoncaptureRun:
    k: int | None
    v: ClopenSet
    locations: list[tuple[int, int]]  # (stage, n_s) at each relocation
    trace: StageTrace

    @property
    def relocations(self) -> int:
        return len(self.locations)


def build_noncapture_open(test: TestSchedule, s_set: ComputableSet, r: ComputableSet,
                          omega: StreamQueries, eps: Dyadic, horizon: int,
                          keep_passing: bool = True) -> NoncaptureRun:
    """Run the location rule for ``n_s`` and collect ``V = ⋃_{s>k} U_{n_s,s}``."""
    trace = StageTrace("noncapture", {"test": test.name, "s": s_set.name, "r": r.name,
                                      "eps": eps, "horizon": horizon}, keep_passing=keep_passing)
    k = find_k(s_set, r, eps, horizon)
    trace.check("noncapture.k", 0, k is not None, {"k": k, "searched": horizon})
    if k is None:
        return NoncaptureRun(None, ClopenSet(), [], trace)
    summand = Dyadic.pow2(-k - 1) * eps
    rc = r.complement()

    def product_bound(n: int, s: int) -> Dyadic:
        kk = omega.k_index(n, s)
        if kk == INF:
            return ZERO
        return Dyadic.pow2(-(s_set.count_below(kk) + rc.count_below(kk)))

    def relocate(s: int) -> int:
        return next(n for n in range(k, s + 1) if omega.k_index(n, s) > k)

    v = ClopenSet()
    n_cur = None
    locations: list[tuple[int, int]] = []
    for s in range(k, horizon + 1):
        if s == k or omega.k_index(n_cur, s) < k:
            n_cur = relocate(s)
            locations.append((s, n_cur))
            trace.event(s, "relocate", n=n_cur)
            trace.check("noncapture.relocations", s, len(locations) <= 1 << (k + 1),
                        {"count": len(locations), "limit": 1 << (k + 1)})
        if s == k:
            continue
        u = test.at(n_cur, s)
        mu = u.measure()
        trace.check("noncapture.summand", s, mu <= product_bound(n_cur, s) and mu <= summand,
                    {"n": n_cur, "mu_U": mu, "bound": summand})
        v = v | u
        if trace.violated:
            break
    mu_v = v.measure()
    trace.check("noncapture.bound", horizon, mu_v <= eps, {"mu_V": mu_v, "eps": eps})
    return NoncaptureRun(k, v, locations, trace)


__all__ = [
    "CaptureRun", "EmptyTest", "JoinCaptureTest", "NoncaptureRun", "TestSchedule",
    "build_capture_test", "build_noncapture_open", "find_k", "g_string", "join_cylinders",
]
