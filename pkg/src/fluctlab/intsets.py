"""Compressed run-list sets of integers.

A :class:`RunSet` is a finite union of *pieces*.  A piece is either a solid
interval or an arithmetic progression of equal-length runs
``[s + j*p, s + j*p + L - 1]`` for ``j < c``.  Pieces may overlap; every
query (cardinality, membership, canonical runs) resolves the overlap exactly.

The block sets of the counterexample construction are an interval followed by
a periodic tail, so they need three pieces no matter how many runs they have.
Cardinalities are Python ints and never overflow.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator, Sequence

import numpy as np

#: largest period for which a residue mask is materialised
MASK_LIMIT = 1 << 22
#: largest number of runs a set may expand into before we refuse
RUN_LIMIT = 2_000_000


class RunSetTooLarge(ValueError):
    """Raised when an operation would have to materialise too many runs."""


@dataclass(frozen=True, order=True)
class Piece:
    start: int
    length: int
    period: int
    count: int

    @property
    def solid(self) -> bool:
        return self.count == 1

    @property
    def stop(self) -> int:
        """Exclusive end of the span."""
        return self.start + (self.count - 1) * self.period + self.length

    @property
    def last(self) -> int:
        return self.stop - 1

    @property
    def size(self) -> int:
        return self.length * self.count

    def __contains__(self, x: int) -> bool:
        if x < self.start or x >= self.stop:
            return False
        return self.solid or (x - self.start) % self.period < self.length

    def runs(self) -> Iterator[tuple[int, int]]:
        for j in range(self.count):
            a = self.start + j * self.period
            yield a, a + self.length - 1

    def shift(self, t: int) -> "Piece":
        return Piece(self.start + t, self.length, self.period, self.count)

    def negate(self) -> "Piece":
        return Piece(-self.last, self.length, self.period, self.count)


def make_piece(start: int, length: int, period: int, count: int) -> Piece | None:
    """Normalised piece constructor; ``None`` for an empty piece."""
    if count <= 0 or length <= 0:
        return None
    if count == 1 or length >= period:
        total = (count - 1) * period + length
        return Piece(start, total, total, 1)
    return Piece(start, length, period, count)


def solid(a: int, b: int) -> Piece | None:
    """Piece for the inclusive interval [a, b]."""
    return make_piece(a, b - a + 1, b - a + 1, 1)


def _sum_pieces(p: Piece, q: Piece) -> list[Piece]:
    if p.solid and q.solid:
        return [solid(p.start + q.start, p.last + q.last)]
    if q.solid:
        p, q = q, p
    if p.solid:
        # interval + progression widens every run by the interval's length - 1
        w = p.length
        new = make_piece(q.start + p.start, q.length + w - 1, q.period, q.count)
        return [new]
    if p.period == q.period:
        new = make_piece(p.start + q.start, p.length + q.length - 1, p.period, p.count + q.count - 1)
        return [new]
    # incompatible periods: expand the shorter progression
    if p.count > q.count:
        p, q = q, p
    if p.count > RUN_LIMIT:
        raise RunSetTooLarge("progression sum would expand %d runs" % p.count)
    out = []
    for a, b in p.runs():
        out.extend(_sum_pieces(solid(a, b), q))
    return out


def _merge_runs(runs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[list[int]] = []
    for a, b in sorted(runs):
        if merged and a <= merged[-1][1] + 1:
            if b > merged[-1][1]:
                merged[-1][1] = b
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


class RunSet:
    """Immutable finite set of integers stored as (possibly overlapping) pieces."""

    __slots__ = ("pieces", "_size", "_runs")

    def __init__(self, pieces: Iterable[Piece | None] = ()):
        self.pieces: tuple[Piece, ...] = tuple(sorted(p for p in pieces if p is not None))
        self._size: int | None = None
        self._runs: tuple[tuple[int, int], ...] | None = None

    # construction -------------------------------------------------------
    @classmethod
    def interval(cls, a: int, b: int) -> "RunSet":
        return cls([solid(a, b)] if b >= a else [])

    @classmethod
    def from_runs(cls, runs: Iterable[tuple[int, int]]) -> "RunSet":
        rs = cls(solid(a, b) for a, b in runs if b >= a)
        return rs

    @classmethod
    def from_elements(cls, xs: Iterable[int]) -> "RunSet":
        xs = sorted(set(int(x) for x in xs))
        runs: list[tuple[int, int]] = []
        for x in xs:
            if runs and x == runs[-1][1] + 1:
                runs[-1] = (runs[-1][0], x)
            else:
                runs.append((x, x))
        out = cls.from_runs(runs)
        out._runs = tuple(runs)
        return out

    @classmethod
    def progression(cls, start: int, length: int, period: int, count: int) -> "RunSet":
        return cls([make_piece(start, length, period, count)])

    # sweep ----------------------------------------------------------------
    def _segments(self) -> Iterator[tuple[int, int, list[Piece]]]:
        """Yield (x0, x1, active) over elementary segments [x0, x1)."""
        if not self.pieces:
            return
        cuts = sorted({p.start for p in self.pieces} | {p.stop for p in self.pieces})
        # pieces sorted by start; active set maintained incrementally
        by_start = sorted(self.pieces, key=lambda p: p.start)
        active: list[Piece] = []
        k = 0
        for x0, x1 in zip(cuts, cuts[1:]):
            while k < len(by_start) and by_start[k].start <= x0:
                active.append(by_start[k])
                k += 1
            active = [p for p in active if p.stop > x0]
            if active:
                yield x0, x1, active

    @staticmethod
    def _residue_count(x0: int, x1: int, active: Sequence[Piece]) -> int:
        periods = {p.period for p in active}
        if len(periods) == 1:
            # one period, any size: merge the residue arcs on the circle
            (modulus,) = periods
            arcs = []
            for p in active:
                r = p.start % modulus
                if r + p.length <= modulus:
                    arcs.append((r, r + p.length - 1))
                else:
                    arcs.append((r, modulus - 1))
                    arcs.append((0, r + p.length - modulus - 1))
            arcs = _merge_runs(arcs)
            total = sum(b - a + 1 for a, b in arcs)

            def below_arcs(x: int) -> int:
                q, r = divmod(x, modulus)
                return q * total + sum(min(b + 1, r) - a for a, b in arcs if a < r)

            return below_arcs(x1) - below_arcs(x0)
        modulus = 1
        for p in periods:
            modulus = modulus * p // gcd(modulus, p)
            if modulus > MASK_LIMIT:
                break
        if modulus <= MASK_LIMIT:
            mask = np.zeros(modulus, dtype=bool)
            for p in active:
                r = p.start % p.period
                for off in range(0, modulus, p.period):
                    lo = r + off
                    hi = lo + p.length
                    if hi <= modulus:
                        mask[lo:hi] = True
                    else:
                        mask[lo:] = True
                        mask[: hi - modulus] = True
            cum = np.concatenate(([0], np.cumsum(mask, dtype=np.int64)))
            total = int(cum[-1])

            def below(x: int) -> int:
                q, r = divmod(x, modulus)
                return q * total + int(cum[r])

            return below(x1) - below(x0)
        # fall back to explicit runs clipped to the segment
        runs = []
        n = 0
        for p in active:
            j0 = max(0, (x0 - p.start - p.length) // p.period)
            j1 = min(p.count, (x1 - p.start) // p.period + 1)
            n += j1 - j0
            if n > RUN_LIMIT:
                raise RunSetTooLarge("segment needs %d runs" % n)
            for j in range(j0, j1):
                a = p.start + j * p.period
                runs.append((max(a, x0), min(a + p.length - 1, x1 - 1)))
        return sum(b - a + 1 for a, b in _merge_runs(r for r in runs if r[1] >= r[0]))

    @property
    def size(self) -> int:
        if self._size is None:
            if self._runs is not None:
                self._size = sum(b - a + 1 for a, b in self._runs)
            elif len(self.pieces) == 1:
                self._size = self.pieces[0].size
            else:
                n = 0
                for x0, x1, active in self._segments():
                    if any(p.solid for p in active):
                        n += x1 - x0
                    else:
                        n += self._residue_count(x0, x1, active)
                self._size = n
        return self._size

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return bool(self.pieces)

    def __contains__(self, x: int) -> bool:
        return any(x in p for p in self.pieces)

    @property
    def min(self) -> int:
        return min(p.start for p in self.pieces)

    @property
    def max(self) -> int:
        return max(p.last for p in self.pieces)

    @property
    def run_count_bound(self) -> int:
        return sum(p.count for p in self.pieces)

    def runs(self, limit: int = RUN_LIMIT) -> tuple[tuple[int, int], ...]:
        """Canonical sorted disjoint inclusive runs."""
        if self._runs is None:
            if self.run_count_bound > limit:
                raise RunSetTooLarge("set has up to %d runs" % self.run_count_bound)
            self._runs = tuple(_merge_runs(r for p in self.pieces for r in p.runs()))
        return self._runs

    def __iter__(self) -> Iterator[int]:
        for a, b in self.runs():
            yield from range(a, b + 1)

    # algebra ----------------------------------------------------------------
    def compact(self) -> "RunSet":
        """Drop progression pieces swallowed by solid ones and merge solids."""
        solids = _merge_runs((p.start, p.last) for p in self.pieces if p.solid)
        starts = [a for a, _ in solids]
        keep: list[Piece] = [solid(a, b) for a, b in solids]
        for p in self.pieces:
            if p.solid:
                continue
            i = bisect.bisect_right(starts, p.start) - 1
            if i >= 0 and solids[i][1] >= p.last:
                continue
            keep.append(p)
        out = RunSet(keep)
        out._size = self._size
        return out

    def shift(self, t: int) -> "RunSet":
        out = RunSet(p.shift(t) for p in self.pieces)
        out._size = self._size
        if self._runs is not None:
            out._runs = tuple((a + t, b + t) for a, b in self._runs)
        return out

    def negate(self) -> "RunSet":
        out = RunSet(p.negate() for p in self.pieces)
        out._size = self._size
        if self._runs is not None:
            out._runs = tuple((-b, -a) for a, b in reversed(self._runs))
        return out

    def union(self, other: "RunSet") -> "RunSet":
        return RunSet(self.pieces + other.pieces).compact()

    def minkowski(self, other: "RunSet") -> "RunSet":
        """{a + b : a in self, b in other}."""
        out: list[Piece] = []
        for p in self.pieces:
            for q in other.pieces:
                out.extend(_sum_pieces(p, q))
        return RunSet(out).compact()

    def union_size(self, other: "RunSet") -> int:
        return RunSet(self.pieces + other.pieces).size

    def intersection_size(self, other: "RunSet") -> int:
        return self.size + other.size - self.union_size(other)

    def difference_size(self, other: "RunSet") -> int:
        return self.union_size(other) - other.size

    def symdiff_size(self, other: "RunSet") -> int:
        return 2 * self.union_size(other) - self.size - other.size

    def intersection(self, other: "RunSet") -> "RunSet":
        a, b = self.runs(), other.runs()
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        res = RunSet.from_runs(out)
        res._runs = tuple(out)
        return res

    def difference(self, other: "RunSet") -> "RunSet":
        b = other.runs()
        out = []
        j = 0
        for lo, hi in self.runs():
            while j < len(b) and b[j][1] < lo:
                j += 1
            k = j
            cur = lo
            while k < len(b) and b[k][0] <= hi:
                if b[k][0] > cur:
                    out.append((cur, b[k][0] - 1))
                cur = max(cur, b[k][1] + 1)
                k += 1
            if cur <= hi:
                out.append((cur, hi))
        res = RunSet.from_runs(out)
        res._runs = tuple(out)
        return res

    def issubset(self, other: "RunSet") -> bool:
        return other.union_size(self) == other.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunSet):
            return NotImplemented
        if self.size != other.size:
            return False
        return self.union_size(other) == self.size

    def __hash__(self) -> int:
        return hash(("RunSet", self.size))

    def __repr__(self) -> str:
        if self.run_count_bound <= 8:
            return "RunSet(%s)" % ",".join(
                str(a) if a == b else "%d..%d" % (a, b) for a, b in self.runs()
            )
        return "RunSet(<%d pieces, size %d>)" % (len(self.pieces), self.size)

    # text form ----------------------------------------------------------------
    def to_tokens(self) -> list[str]:
        """Tokens ``a``, ``a..b`` or ``a..b:p:c`` (c copies spaced by p)."""
        toks = []
        for p in RunSet(self.compact().pieces).pieces:
            a, b = p.start, p.start + p.length - 1
            base = str(a) if a == b else "%d..%d" % (a, b)
            toks.append(base if p.solid else "%s:%d:%d" % (base, p.period, p.count))
        return toks

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "RunSet":
        pieces = []
        for tok in tokens:
            head, *rep = tok.split(":")
            if ".." in head:
                a_s, b_s = head.split("..", 1)
                a, b = int(a_s), int(b_s)
            else:
                a = b = int(head)
            if b < a:
                raise ValueError("bad run token %r" % tok)
            if rep:
                period, count = int(rep[0]), int(rep[1])
                pieces.append(make_piece(a, b - a + 1, period, count))
            else:
                pieces.append(solid(a, b))
        return cls(pieces)


def periodic_indicator_count(s: RunSet, period: int, low: int, high: int, shift: int = 0) -> int:
    """#{z in s : (z + shift) mod period in [low, high)} for 0 <= low < high <= period."""
    if not s:
        return 0
    lo, hi = s.min, s.max
    first = lo - ((lo + shift - low) % period)
    count = (hi - first) // period + 1
    mask = RunSet.progression(first, high - low, period, count)
    return s.intersection_size(mask)
