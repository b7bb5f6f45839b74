"""Discrete groups and exact finite subsets.

Supported groups are the integers ``Z``, the lattices ``Z^d`` and the
discrete Heisenberg group ``H3`` with product
``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')``.

Elements are plain Python values: ``int`` for ``Z`` and tuples of ints
otherwise.  Tuples compare lexicographically, which is the canonical order.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Any, Hashable, Iterable, Iterator

from .intsets import RunSet

Element = Hashable


class GroupMismatch(ValueError):
    pass


class Group:
    tag: str = ""
    identity: Any = None
    abelian: bool = True

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def coerce(self, g):
        raise NotImplementedError

    def generators(self) -> list:
        """Symmetric generating set containing the identity."""
        raise NotImplementedError

    def random_element(self, rng, radius: int):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Group) and other.tag == self.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return "Group(%s)" % self.tag


class IntegerGroup(Group):
    tag = "Z"
    identity = 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def coerce(self, g):
        if isinstance(g, (tuple, list)):
            (g,) = g
        return int(g)

    def generators(self):
        return [-1, 0, 1]

    def random_element(self, rng, radius):
        return int(rng.integers(-radius, radius + 1))


class LatticeGroup(Group):
    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = d
        self.tag = "Z^%d" % d
        self.identity = (0,) * d

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def coerce(self, g):
        g = tuple(int(x) for x in g)
        if len(g) != self.d:
            raise ValueError("expected %d coordinates, got %r" % (self.d, g))
        return g

    def generators(self):
        gens = [self.identity]
        for i in range(self.d):
            for s in (1, -1):
                e = [0] * self.d
                e[i] = s
                gens.append(tuple(e))
        return gens

    def random_element(self, rng, radius):
        return tuple(int(x) for x in rng.integers(-radius, radius + 1, size=self.d))


class HeisenbergGroup(Group):
    tag = "H3"
    identity = (0, 0, 0)
    abelian = False

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def coerce(self, g):
        g = tuple(int(x) for x in g)
        if len(g) != 3:
            raise ValueError("Heisenberg elements are integer triples, got %r" % (g,))
        return g

    def generators(self):
        return [(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]

    def random_element(self, rng, radius):
        return tuple(int(x) for x in rng.integers(-radius, radius + 1, size=3))


Z = IntegerGroup()
H3 = HeisenbergGroup()


def lattice(d: int) -> Group:
    return Z if d == 1 else LatticeGroup(d)


def group_from_tag(tag: str) -> Group:
    if tag == "Z":
        return Z
    if tag == "H3":
        return H3
    if tag.startswith("Z^"):
        return lattice(int(tag[2:]))
    raise ValueError("unknown group tag %r" % tag)


class FiniteSubset:
    """Immutable finite subset of a group.

    Over ``Z`` a subset may carry a run-list (:class:`RunSet`), a dense sorted
    tuple, or both; every operation gives the same answer for either form and
    takes the run-list path when both operands have one.
    """

    __slots__ = ("group", "_elems", "_runs")

    def __init__(self, group: Group, elements: Iterable = (), *, runs: RunSet | None = None):
        self.group = group
        self._runs = runs
        if runs is not None and group is not Z:
            raise ValueError("run-list form only exists over Z")
        if runs is None:
            self._elems = tuple(sorted({group.coerce(g) for g in elements}))
        else:
            self._elems = None

    # constructors --------------------------------------------------------
    @classmethod
    def interval(cls, a: int, b: int) -> "FiniteSubset":
        return cls(Z, runs=RunSet.interval(a, b))

    @classmethod
    def from_runs(cls, runs: Iterable[tuple[int, int]]) -> "FiniteSubset":
        return cls(Z, runs=RunSet.from_runs(runs))

    @classmethod
    def from_runset(cls, rs: RunSet) -> "FiniteSubset":
        return cls(Z, runs=rs)

    def with_runs(self) -> "FiniteSubset":
        """Same set, run-list form (Z only)."""
        if self._runs is not None:
            return self
        return FiniteSubset(Z, runs=RunSet.from_elements(self._elems))

    def dense(self) -> "FiniteSubset":
        """Same set, dense form only."""
        if self._elems is not None and self._runs is None:
            return self
        return FiniteSubset(self.group, self.elements)

    # basic queries -------------------------------------------------------
    @property
    def runset(self) -> RunSet | None:
        return self._runs

    @property
    def elements(self) -> tuple:
        if self._elems is None:
            self._elems = tuple(self._runs)
        return self._elems

    @property
    def size(self) -> int:
        if self._runs is not None:
            return self._runs.size
        return len(self._elems)

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return self.size > 0

    def __iter__(self) -> Iterator:
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        if self._runs is not None:
            return g in self._runs
        return g in self._elemset()

    def _elemset(self) -> frozenset:
        return frozenset(self.elements)

    def runs(self) -> tuple[tuple[int, int], ...]:
        return self.with_runs()._runs.runs()

    @property
    def max(self):
        return self._runs.max if self._runs is not None else self._elems[-1]

    @property
    def min(self):
        return self._runs.min if self._runs is not None else self._elems[0]

    def _check(self, other: "FiniteSubset") -> None:
        if other.group != self.group:
            raise GroupMismatch("%s vs %s" % (self.group.tag, other.group.tag))

    def _both_runs(self, other) -> bool:
        return self._runs is not None and other._runs is not None

    def _lift(self, other):
        """Return run-list forms when either operand carries one (Z only)."""
        if self.group is Z and (self._runs is not None or other._runs is not None):
            return self.with_runs()._runs, other.with_runs()._runs
        return None

    # set algebra ---------------------------------------------------------
    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        self._check(other)
        lifted = self._lift(other)
        if lifted:
            return FiniteSubset(Z, runs=lifted[0].union(lifted[1]))
        return FiniteSubset(self.group, self._elemset() | other._elemset())

    def intersection(self, other: "FiniteSubset") -> "FiniteSubset":
        self._check(other)
        lifted = self._lift(other)
        if lifted:
            return FiniteSubset(Z, runs=lifted[0].intersection(lifted[1]))
        return FiniteSubset(self.group, self._elemset() & other._elemset())

    def difference(self, other: "FiniteSubset") -> "FiniteSubset":
        self._check(other)
        lifted = self._lift(other)
        if lifted:
            return FiniteSubset(Z, runs=lifted[0].difference(lifted[1]))
        return FiniteSubset(self.group, self._elemset() - other._elemset())

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def union_size(self, other: "FiniteSubset") -> int:
        self._check(other)
        lifted = self._lift(other)
        if lifted:
            return lifted[0].union_size(lifted[1])
        return len(self._elemset() | other._elemset())

    def intersection_size(self, other: "FiniteSubset") -> int:
        return self.size + other.size - self.union_size(other)

    def difference_size(self, other: "FiniteSubset") -> int:
        return self.union_size(other) - other.size

    def symdiff_size(self, other: "FiniteSubset") -> int:
        return 2 * self.union_size(other) - self.size - other.size

    def issubset(self, other: "FiniteSubset") -> bool:
        return self.union_size(other) == other.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSubset):
            return NotImplemented
        if other.group != self.group or other.size != self.size:
            return False
        return self.union_size(other) == self.size

    def __hash__(self) -> int:
        return hash((self.group.tag, self.size))

    def __repr__(self) -> str:
        if self._runs is not None:
            return "FiniteSubset(Z, %r)" % self._runs
        if len(self._elems) > 12:
            return "FiniteSubset(%s, <%d elements>)" % (self.group.tag, len(self._elems))
        return "FiniteSubset(%s, %r)" % (self.group.tag, list(self._elems))

    # group operations ----------------------------------------------------
    def product(self, other: "FiniteSubset") -> "FiniteSubset":
        return set_product(self, other)

    def inverse(self) -> "FiniteSubset":
        return set_inverse(self)

    def translate(self, g, side: str = "right") -> "FiniteSubset":
        return translate(self, g, side)


def set_product(a: FiniteSubset, b: FiniteSubset) -> FiniteSubset:
    """{x*y : x in a, y in b}."""
    a._check(b)
    lifted = a._lift(b)
    if lifted:
        return FiniteSubset(Z, runs=lifted[0].minkowski(lifted[1]))
    mul = a.group.mul
    return FiniteSubset(a.group, {mul(x, y) for x in a.elements for y in b.elements})


def set_inverse(a: FiniteSubset) -> FiniteSubset:
    if a._runs is not None:
        return FiniteSubset(Z, runs=a._runs.negate())
    inv = a.group.inv
    return FiniteSubset(a.group, (inv(x) for x in a.elements))


def translate(a: FiniteSubset, g, side: str = "right") -> FiniteSubset:
    """Right translate ``a*g`` or left translate ``g*a``."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    g = a.group.coerce(g)
    if a._runs is not None:
        return FiniteSubset(Z, runs=a._runs.shift(g))
    mul = a.group.mul
    if side == "right":
        return FiniteSubset(a.group, (mul(x, g) for x in a.elements))
    return FiniteSubset(a.group, (mul(g, x) for x in a.elements))


def union_all(sets: Iterable[FiniteSubset], group: Group | None = None) -> FiniteSubset:
    sets = list(sets)
    if not sets:
        if group is None:
            raise ValueError("empty union needs a group")
        return FiniteSubset(group)
    if sets[0].group is Z and any(s.runset is not None for s in sets):
        from .intsets import RunSet as _RS

        pieces = [p for s in sets for p in s.with_runs().runset.pieces]
        return FiniteSubset(Z, runs=_RS(pieces).compact())
    return reduce(FiniteSubset.union, sets)


def symdiff_ratio(a: FiniteSubset, b: FiniteSubset) -> Fraction:
    """|a symmetric-difference b| / |a| as an exact rational."""
    a._check(b)
    if a.size == 0:
        raise ValueError("symdiff_ratio of an empty set")
    return Fraction(a.symdiff_size(b), a.size)
