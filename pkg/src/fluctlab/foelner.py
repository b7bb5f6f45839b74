"""Foelner sequences: builtin families, temperedness, goodness and thinning.

Every certificate here is exact and restricted to a finite horizon; nothing
is extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .groups import H3, FiniteSubset, Group, Z, lattice, set_inverse, set_product, translate, union_all


@dataclass(frozen=True)
class FoelnerSequence:
    group: Group
    sets: tuple[FiniteSubset, ...]
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.sets:
            raise ValueError("a sequence needs at least one set")
        for n, s in enumerate(self.sets, 1):
            if s.group != self.group:
                raise ValueError("F_%d lives in %s, not %s" % (n, s.group.tag, self.group.tag))
            if s.size == 0:
                raise ValueError("F_%d is empty" % n)

    @property
    def horizon(self) -> int:
        return len(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, n: int) -> FiniteSubset:
        """1-based access: ``seq[1]`` is F_1."""
        if not 1 <= n <= len(self.sets):
            raise IndexError("index %d outside 1..%d" % (n, len(self.sets)))
        return self.sets[n - 1]

    def tail(self, n0: int) -> "FoelnerSequence":
        return FoelnerSequence(self.group, self.sets[n0 - 1:], {"tail_of": self.provenance, "n0": n0})

    def subsequence(self, indices: Sequence[int]) -> "FoelnerSequence":
        return FoelnerSequence(
            self.group, tuple(self[i] for i in indices), {"subsequence_of": self.provenance, "indices": list(indices)}
        )

    def prefix(self, horizon: int) -> "FoelnerSequence":
        return FoelnerSequence(self.group, self.sets[:horizon], self.provenance)


def explicit_sequence(sets: Sequence[FiniteSubset], group: Group | None = None) -> FoelnerSequence:
    sets = tuple(sets)
    return FoelnerSequence(group or sets[0].group, sets, {"kind": "explicit"})


def heisenberg_ball(n: int) -> FiniteSubset:
    gens = FiniteSubset(H3, H3.generators())
    ball = gens
    for _ in range(n - 1):
        ball = set_product(ball, gens)
    return ball


def builtin_sequence(kind: str, horizon: int, *, dimension: int = 1, base: int | None = None) -> FoelnerSequence:
    """Builtin Foelner sequences, eagerly materialised up to ``horizon``.

    intervals: [0, n-1] (or [0, base**n - 1] when ``base`` is given);
    powers: [0, base**n - 1]; boxes: [-n, n]^d; heisenberg_balls: S^n with
    S = {e, (+-1,0,0), (0,+-1,0)}.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    prov = {"kind": kind, "horizon": horizon}
    if kind in ("intervals", "powers"):
        if kind == "powers" and base is None:
            raise ValueError("powers needs a base")
        if base is not None and base < 2:
            raise ValueError("base must be >= 2")
        if base is None:
            sets = [FiniteSubset.interval(0, n - 1) for n in range(1, horizon + 1)]
        else:
            prov["base"] = base
            sets = [FiniteSubset.interval(0, base ** n - 1) for n in range(1, horizon + 1)]
        return FoelnerSequence(Z, tuple(sets), prov)
    if kind == "boxes":
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        prov["dimension"] = dimension
        if dimension == 1:
            return FoelnerSequence(Z, tuple(FiniteSubset.interval(-n, n) for n in range(1, horizon + 1)), prov)
        import itertools

        g = lattice(dimension)
        sets = tuple(
            FiniteSubset(g, itertools.product(range(-n, n + 1), repeat=dimension)) for n in range(1, horizon + 1)
        )
        return FoelnerSequence(g, sets, prov)
    if kind == "heisenberg_balls":
        gens = FiniteSubset(H3, H3.generators())
        sets = [gens]
        for _ in range(horizon - 1):
            sets.append(set_product(sets[-1], gens))
        return FoelnerSequence(H3, tuple(sets), prov)
    raise ValueError("unknown sequence kind %r" % kind)


# temperedness -----------------------------------------------------------------

@dataclass
class TemperednessReport:
    horizon: int
    left: dict[int, Fraction]
    right: dict[int, Fraction]
    degenerate: list[int]

    @property
    def max_left(self) -> Fraction:
        return max(self.left.values(), default=Fraction(0))

    @property
    def max_right(self) -> Fraction:
        return max(self.right.values(), default=Fraction(0))

    @property
    def max_bi(self) -> Fraction:
        return max(self.max_left, self.max_right)

    def is_tempered(self, c, side: str = "both") -> bool:
        c = Fraction(c)
        ok_left = self.max_left <= c
        ok_right = self.max_right <= c
        return {"left": ok_left, "right": ok_right, "both": ok_left and ok_right}[side]


def tempered_report(seq: FoelnerSequence, horizon: int | None = None, *, sides: str = "both") -> TemperednessReport:
    """Exact left/right ratios |U_{i<n} F_i^-1 F_n| / |F_n| for 2 <= n <= horizon."""
    horizon = seq.horizon if horizon is None else horizon
    if horizon > seq.horizon:
        raise ValueError("horizon %d beyond materialised %d" % (horizon, seq.horizon))
    left: dict[int, Fraction] = {}
    right: dict[int, Fraction] = {}
    degenerate = []
    inverses: FiniteSubset | None = None
    has_identity = False
    e = seq.group.identity
    for n in range(1, horizon + 1):
        f = seq[n]
        if inverses is not None:
            size = f.size
            if sides in ("both", "left"):
                left[n] = Fraction(set_product(inverses, f).size, size)
            if sides in ("both", "right"):
                right[n] = left[n] if seq.group.abelian and n in left else Fraction(set_product(f, inverses).size, size)
            if not has_identity:
                degenerate.append(n)
        inv = set_inverse(f)
        inverses = inv if inverses is None else union_all([inverses, inv])
        has_identity = has_identity or e in f
    return TemperednessReport(horizon, left, right, degenerate)


# goodness -----------------------------------------------------------------------

@dataclass(frozen=True)
class GoodnessResult:
    good: bool
    n: int | None = None
    condition: int | None = None
    witness: Any = None

    def __bool__(self) -> bool:
        return self.good


def _max_right_defect(fn: FiniteSubset, candidates: FiniteSubset, bound: Fraction):
    """First f in candidates with |F_n minus F_n f| >= bound, else None."""
    rs = fn.runset
    if rs is not None and len(rs.pieces) == 1 and rs.pieces[0].solid:
        # interval: defect(f) = min(|f|, |F_n|), worst at an extreme candidate
        for f in sorted({candidates.min, candidates.max}, key=lambda v: (-abs(v), v)):
            if min(abs(f), fn.size) >= bound:
                return f
        return None
    for f in candidates.elements:
        if fn.difference_size(translate(fn, f, "right")) >= bound:
            return f
    return None


def is_lambda_good(seq: FoelnerSequence, lam, horizon: int | None = None, *, conditions=(1, 2)) -> GoodnessResult:
    """Check both goodness conditions for every n <= horizon.

    1: |U_{i<n} F_i^-1 F_n minus F_n| <= lam |F_n|
    2: |F_n minus F_n f| < lam |F_n| for every f in F_i, i < n
    """
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    horizon = seq.horizon if horizon is None else horizon
    inverses = None
    earlier = None
    for n in range(1, horizon + 1):
        f = seq[n]
        if inverses is not None:
            bound = lam * f.size
            if 1 in conditions:
                excess = set_product(inverses, f).difference_size(f)
                if excess > bound:
                    return GoodnessResult(False, n, 1, excess)
            if 2 in conditions:
                bad = _max_right_defect(f, earlier, bound)
                if bad is not None:
                    return GoodnessResult(False, n, 2, bad)
        inv = set_inverse(f)
        inverses = inv if inverses is None else union_all([inverses, inv])
        earlier = f if earlier is None else union_all([earlier, f])
    return GoodnessResult(True)


def goodness_tail_index(seq: FoelnerSequence, lam, lam_prime, horizon: int | None = None, *, check_tempered: bool = True):
    """Least n0 such that (F_n)_{n >= n0} is lam'-good up to horizon, else None."""
    lam, lam_prime = Fraction(lam), Fraction(lam_prime)
    if not 0 < lam < lam_prime < 1:
        raise ValueError("need 0 < lambda < lambda' < 1")
    horizon = seq.horizon if horizon is None else horizon
    if check_tempered:
        rep = tempered_report(seq, horizon)
        if not rep.is_tempered(1 + lam):
            raise ValueError(
                "sequence is not (1+%s)-bi-tempered up to %d (left %s, right %s)"
                % (lam, horizon, rep.max_left, rep.max_right)
            )
    for n0 in range(1, horizon + 1):
        if is_lambda_good(seq.tail(n0), lam_prime, horizon - n0 + 1):
            return n0
    return None


# thinning -----------------------------------------------------------------------

@dataclass
class ThinningResult:
    indices: list[int]
    stages: list[list[int]]
    schedule: list[Fraction]
    complete: bool


def _ratios(prior: Sequence[FiniteSubset], f: FiniteSubset) -> tuple[Fraction, Fraction]:
    if not prior:
        return Fraction(0), Fraction(0)
    inv = union_all([set_inverse(p) for p in prior])
    left = Fraction(set_product(inv, f).size, f.size)
    right = left if f.group.abelian else Fraction(set_product(f, inv).size, f.size)
    return left, right


def thin_strongly_tempered(seq: FoelnerSequence, schedule, horizon: int | None = None, *, stage_length: int = 3) -> ThinningResult:
    """Greedy forward selection of a strongly tempered subsequence.

    Stage k accepts an index only if, for every earlier stage j <= k, the new
    set keeps the tail selected from stage j onwards c_j-bi-tempered.  Each
    stage but the last closes after ``stage_length`` selections; the last one
    runs to the horizon.
    """
    schedule = [Fraction(c) for c in schedule]
    if not schedule or any(c <= 1 for c in schedule) or any(a <= b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing and > 1")
    horizon = seq.horizon if horizon is None else horizon
    stages: list[list[int]] = [[]]
    for n in range(1, horizon + 1):
        k = len(stages) - 1
        f = seq[n]
        accept = True
        for j in range(k + 1):
            prior = [seq[i] for st in stages[j:] for i in st]
            left, right = _ratios(prior, f)
            if left > schedule[j] or right > schedule[j]:
                accept = False
                break
        if not accept:
            continue
        stages[-1].append(n)
        if len(stages[-1]) >= stage_length and len(stages) < len(schedule):
            stages.append([])
    complete = len(stages) == len(schedule) and len(stages[-1]) >= stage_length
    return ThinningResult([i for st in stages for i in st], stages, schedule, complete)


def folner_defect(seq: FoelnerSequence, k: FiniteSubset, n: int) -> Fraction:
    """max over g in K of |g F_n symdiff F_n| / |F_n|."""
    f = seq[n]
    worst = Fraction(0)
    for g in k.elements:
        worst = max(worst, Fraction(translate(f, g, "left").symdiff_size(f), f.size))
    return worst
