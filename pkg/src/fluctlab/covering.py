"""Epsilon-disjoint families, disjointification and the Vitali-type selection.

The flow-based certifier is the oracle for every greedy in this module: a
family is epsilon-disjoint iff a bipartite quota problem (each element used
at most once, set j demanding ceil((1-eps)|F_j|) elements) is feasible.
Elements with the same membership pattern are merged into weighted atoms, so
the flow network stays small even when the sets are astronomically large.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import networkx as nx

from .foelner import FoelnerSequence, explicit_sequence, is_lambda_good, tempered_report
from .groups import FiniteSubset, Group, Z, set_inverse, set_product, translate, union_all
from .intsets import RunSet


class PreconditionError(ValueError):
    """A documented precondition does not hold; ``witness`` says why."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


def quota(size: int, eps) -> int:
    return math.ceil((1 - Fraction(eps)) * size)


# atoms ------------------------------------------------------------------------

@dataclass
class _Atom:
    members: tuple[int, ...]
    size: int
    runs: tuple[tuple[int, int], ...] = ()  # interval atoms (Z)
    elements: tuple = ()  # dense atoms

    def take(self, offset: int, amount: int):
        """The sub-portion [offset, offset+amount) of this atom."""
        if self.runs:
            (a, b), = self.runs
            return ("runs", (a + offset, a + offset + amount - 1))
        return ("elems", self.elements[offset:offset + amount])


def _atoms(family: Sequence[FiniteSubset]) -> list[_Atom]:
    if family and family[0].group is Z and any(s.runset is not None for s in family):
        runs = [s.runs() for s in family]
        cuts = sorted({a for rs in runs for a, _ in rs} | {b + 1 for rs in runs for _, b in rs})
        atoms = []
        pointers = [0] * len(family)
        for x0, x1 in zip(cuts, cuts[1:]):
            members = []
            for j, rs in enumerate(runs):
                p = pointers[j]
                while p < len(rs) and rs[p][1] < x0:
                    p += 1
                pointers[j] = p
                if p < len(rs) and rs[p][0] <= x0:
                    members.append(j)
            if members:
                atoms.append(_Atom(tuple(members), x1 - x0, runs=((x0, x1 - 1),)))
        return atoms
    where = defaultdict(list)
    for j, s in enumerate(family):
        for g in s.elements:
            where[g].append(j)
    groups = defaultdict(list)
    for g, js in where.items():
        groups[tuple(js)].append(g)
    return [_Atom(k, len(v), elements=tuple(sorted(v))) for k, v in sorted(groups.items())]


def _build_witnesses(family, atoms, alloc) -> list[FiniteSubset]:
    offsets = [0] * len(atoms)
    out = []
    for j, s in enumerate(family):
        runs, elems = [], []
        for a, amount in sorted(alloc[j].items()):
            if amount <= 0:
                continue
            kind, part = atoms[a].take(offsets[a], amount)
            offsets[a] += amount
            if kind == "runs":
                runs.append(part)
            else:
                elems.extend(part)
        if runs:
            out.append(FiniteSubset.from_runset(RunSet.from_runs(runs)))
        else:
            out.append(FiniteSubset(s.group, elems))
    return out


@dataclass
class DisjointnessCertificate:
    feasible: bool
    eps: Fraction
    quotas: list[int]
    witnesses: list[FiniteSubset] | None = None
    #: indices J with |union F_j| < sum of quotas over J (Hall violation)
    blocking: list[int] | None = None
    method: str = "greedy"

    def __bool__(self) -> bool:
        return self.feasible


def certify_epsilon_disjoint(family: Sequence[FiniteSubset], eps, *, greedy_first: bool = True) -> DisjointnessCertificate:
    """Decide epsilon-disjointness exactly; return witnesses or a Hall violation."""
    eps = Fraction(eps)
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    family = list(family)
    quotas = [quota(s.size, eps) for s in family]
    if not family:
        return DisjointnessCertificate(True, eps, quotas, [])
    atoms = _atoms(family)
    by_set = defaultdict(list)
    for a, atom in enumerate(atoms):
        for j in atom.members:
            by_set[j].append(a)

    if greedy_first:
        remaining = [atom.size for atom in atoms]
        alloc = [dict() for _ in family]
        ok = True
        for j in sorted(range(len(family)), key=lambda j: (family[j].size, j)):
            need = quotas[j]
            for a in sorted(by_set[j], key=lambda a: (len(atoms[a].members), a)):
                if need == 0:
                    break
                take = min(need, remaining[a])
                if take:
                    alloc[j][a] = take
                    remaining[a] -= take
                    need -= take
            if need:
                ok = False
                break
        if ok:
            return DisjointnessCertificate(True, eps, quotas, _build_witnesses(family, atoms, alloc), method="greedy")

    g = nx.DiGraph()
    for j, q in enumerate(quotas):
        g.add_edge("s", ("set", j), capacity=q)
        for a in by_set[j]:
            g.add_edge(("set", j), ("atom", a))  # uncapacitated
    for a, atom in enumerate(atoms):
        g.add_edge(("atom", a), "t", capacity=atom.size)
    value, flow = nx.maximum_flow(g, "s", "t")
    if value == sum(quotas):
        alloc = [{a: flow[("set", j)].get(("atom", a), 0) for a in by_set[j]} for j in range(len(family))]
        return DisjointnessCertificate(True, eps, quotas, _build_witnesses(family, atoms, alloc), method="flow")
    _, (source_side, _) = nx.minimum_cut(g, "s", "t")
    blocking = sorted(node[1] for node in source_side if isinstance(node, tuple) and node[0] == "set")
    return DisjointnessCertificate(False, eps, quotas, None, blocking, method="flow")


def check_witnesses(family: Sequence[FiniteSubset], witnesses: Sequence[FiniteSubset], eps) -> bool:
    """Witnesses are subsets, pairwise disjoint, and meet every quota."""
    if len(witnesses) != len(family):
        return False
    for s, w in zip(family, witnesses):
        if not w.issubset(s) or w.size < quota(s.size, eps):
            return False
    nonempty = [w for w in witnesses if w.size]
    if not nonempty:
        return True
    return union_all(nonempty).size == sum(w.size for w in nonempty)


def check_blocking(family: Sequence[FiniteSubset], blocking: Sequence[int], eps) -> bool:
    """Verify a Hall violation: the union of the blocking sets is too small."""
    if not blocking:
        return False
    union = union_all([family[j] for j in blocking])
    return union.size < sum(quota(family[j].size, eps) for j in blocking)


# disjointification -------------------------------------------------------------

@dataclass
class DisjointifyResult:
    selected: list[list]
    family: list[FiniteSubset]
    witnesses: list[FiniteSubset]
    pairs: list[tuple[Any, int]]
    union_size: int
    center_count: int
    eps: Fraction
    bound_ok: bool

    @property
    def bound(self) -> Fraction:
        return self.eps / 5 * self.center_count


def _right_set(f: FiniteSubset, d) -> FiniteSubset:
    return translate(f, d, "right")


def epsilon_disjointify(scales: Sequence[FiniteSubset], centers: Sequence[Sequence], eps, *, check: bool = True) -> DisjointifyResult:
    """Pick D_j within C_j so that {F_j d} is eps-disjoint with a large union.

    Greedy scan from the largest scale down, centers in canonical order; a
    center is kept when its translate retains at least (1-eps) of its size
    outside everything kept so far.  ``bound_ok`` records whether the union
    reaches (eps/5)|C|.
    """
    eps = Fraction(eps)
    if len(scales) != len(centers):
        raise ValueError("one center set per scale")
    if check:
        if not 0 < eps <= Fraction(1, 2):
            raise PreconditionError("eps must lie in (0, 1/2]", eps)
        if len(scales) > 1:
            rep = tempered_report(explicit_sequence(scales), sides="left")
            if rep.max_left > 2:
                worst = max(rep.left, key=rep.left.get)
                raise PreconditionError("scales are not 2-tempered", (worst, rep.left[worst]))
        seen = {}
        for j, cs in enumerate(centers):
            for c in cs:
                if c in seen and seen[c] != j:
                    raise PreconditionError("center sets are not disjoint", c)
                seen[c] = j
    group = scales[0].group if scales else Z
    covered: FiniteSubset | None = None
    selected: list[list] = [[] for _ in scales]
    family, witnesses, pairs = [], [], []
    for j in range(len(scales) - 1, -1, -1):
        f = scales[j]
        need = (1 - eps) * f.size
        for d in sorted(set(centers[j])):
            s = _right_set(f, d)
            new = s if covered is None else s.difference(covered)
            if new.size >= need:
                selected[j].append(d)
                family.append(s)
                witnesses.append(new)
                pairs.append((d, j + 1))
                covered = s if covered is None else union_all([covered, s])
    total_centers = len({c for cs in centers for c in cs})
    union_size = covered.size if covered is not None else 0
    return DisjointifyResult(
        selected, family, witnesses, pairs, union_size, total_centers, eps, union_size >= eps / 5 * total_centers
    )


# Vitali-type selection -----------------------------------------------------------

@dataclass
class CoveringSelection:
    pairs: list[tuple[Any, int]]
    sets: list[FiniteSubset]
    witnesses: list[FiniteSubset]
    eps: Fraction
    outcome: str
    union_size: int
    covered_centers: int
    center_count: int
    scale_unions: dict[int, FiniteSubset] = field(default_factory=dict)

    @property
    def union(self) -> FiniteSubset | None:
        return union_all(self.sets) if self.sets else None


def validate_assignment(assignment: Mapping[Any, Sequence[int]], horizon: int) -> int:
    lengths = {len(v) for v in assignment.values()}
    if len(lengths) > 1:
        raise PreconditionError("scale lists have different lengths", sorted(lengths))
    for c, ns in assignment.items():
        if any(a >= b for a, b in zip(ns, ns[1:])):
            raise PreconditionError("scale list not strictly increasing", c)
        if ns and (ns[0] < 1 or ns[-1] > horizon):
            raise PreconditionError("scale index outside 1..%d" % horizon, c)
    return lengths.pop() if lengths else 0


def vitali_select(
    seq: FoelnerSequence,
    centers: FiniteSubset,
    assignment: Mapping[Any, Sequence[int]],
    eps,
    *,
    check_preconditions: bool = True,
    condition_one_only: bool = False,
) -> CoveringSelection:
    """Descent over scales with W-masking; see the module docstring.

    For the largest assigned scale m the m-section of the assignment is
    disjointified; each lower scale only keeps centers outside
    U_{n' > n} U_{i < n'} F_i^-1 F_n' D_n', which makes the unions F_n D_n of
    different scales pairwise disjoint.
    """
    eps = Fraction(eps)
    assignment = {seq.group.coerce(c): list(v) for c, v in assignment.items()}
    if set(assignment) != set(centers.elements):
        raise PreconditionError("assignment keys differ from the center set")
    q = validate_assignment(assignment, seq.horizon)
    m = max((ns[-1] for ns in assignment.values() if ns), default=0)
    if check_preconditions:
        if not 0 < eps < 1:
            raise PreconditionError("eps must lie in (0, 1)", eps)
        if q < math.ceil(20 / eps ** 2):
            raise PreconditionError("q = %d < 20/eps^2" % q, q)
        conds = (1,) if condition_one_only else (1, 2)
        res = is_lambda_good(seq, eps / 8, m, conditions=conds)
        if not res:
            raise PreconditionError("sequence is not (eps/8)-good", (res.n, res.condition, res.witness))
    by_scale = defaultdict(set)
    for c, ns in assignment.items():
        for n in ns:
            by_scale[n].add(c)

    prefix_inv: list[FiniteSubset | None] = [None] * (m + 1)
    acc = None
    for n in range(1, m + 1):
        prefix_inv[n] = acc
        inv = set_inverse(seq[n])
        acc = inv if acc is None else union_all([acc, inv])

    mask: FiniteSubset | None = None
    pairs, sets, witnesses = [], [], []
    scale_unions: dict[int, FiniteSubset] = {}
    for n in range(m, 0, -1):
        cn = sorted(c for c in by_scale.get(n, ()) if mask is None or c not in mask)
        if not cn:
            continue
        res = epsilon_disjointify([seq[n]], [cn], eps, check=False)
        if not res.pairs:
            continue
        d_n = FiniteSubset(seq.group, res.selected[0])
        pairs.extend((d, n) for d in res.selected[0])
        sets.extend(res.family)
        witnesses.extend(res.witnesses)
        fd = set_product(seq[n], d_n)
        scale_unions[n] = fd
        if prefix_inv[n] is not None:
            grow = set_product(prefix_inv[n], fd)
            mask = grow if mask is None else union_all([mask, grow])

    c_size = centers.size
    if sets:
        union = union_all(sets)
        union_size = union.size
        covered = sum(1 for c in centers.elements if c in union)
    else:
        union_size = covered = 0
    if union_size >= 2 * c_size:
        outcome = "expansive"
    elif covered >= (1 - eps) * c_size:
        outcome = "covering"
    else:
        outcome = "postcondition-failed"
    return CoveringSelection(pairs, sets, witnesses, eps, outcome, union_size, covered, c_size, scale_unions)


# growth step -------------------------------------------------------------------------

class InsufficientCrossings(ValueError):
    """Orbit data runs out of crossings before the step can be taken."""


@dataclass(frozen=True)
class Crossings:
    """Alternating crossing scales of one orbit point: ups[0] < downs[0] < ups[1] < ...

    ``ups`` are scales where the average first reaches >= beta after the
    previous down (or from the start), ``downs`` where it then drops <= alpha.
    """

    ups: tuple[int, ...]
    downs: tuple[int, ...]


def check_step_constants(alpha, beta, S, eps, delta) -> list[str]:
    """The three inequalities tying eps to delta; returns the violated ones."""
    alpha, beta, S, eps, delta = map(Fraction, (alpha, beta, S, eps, delta))
    bad = []
    if not (beta - 4 * eps * S) * (1 - eps) / alpha >= 1 + delta:
        bad.append("(beta-4 eps S)(1-eps)/alpha >= 1+delta")
    if not (1 - eps) * (1 + delta) >= 1 + delta / 2:
        bad.append("(1-eps)(1+delta) >= 1+delta/2")
    if not (1 - eps) * (1 + delta / 2) >= 1:
        bad.append("1-eps >= (1+delta/2)^-1")
    return bad


@dataclass
class GrowthResult:
    pairs: list[tuple[Any, int]]
    intermediate: list[tuple[Any, int]]
    size_before: int
    size_intermediate: int
    size_after: int
    outcomes: tuple[str, str]
    crossing_ok: bool
    disjoint_ok: bool
    eps: Fraction
    delta: Fraction

    @property
    def ratio(self) -> Fraction | None:
        return Fraction(self.size_after, self.size_before) if self.size_before else None

    @property
    def growth_ok(self) -> bool:
        return self.size_before == 0 or self.ratio >= 1 + self.delta / 2

    @property
    def verified(self) -> bool:
        return self.crossing_ok and self.disjoint_ok and self.growth_ok


def _pair_union(seq, pairs):
    return union_all([_right_set(seq[n], c) for c, n in pairs]) if pairs else None


def _owners(seq, pairs, union):
    owner = {}
    for c, n in sorted(pairs):
        for g in _right_set(seq[n], c).elements:
            owner.setdefault(g, (c, n))
    return {g: owner[g] for g in union.elements}


def _next_scales(seq_list, after, q, what, c):
    later = [m for m in seq_list if m > after]
    if len(later) < q:
        raise InsufficientCrossings("%s has %d %s after scale %d, need %d" % (c, len(later), what, after, q))
    return later[:q]


def growth_step(
    seq: FoelnerSequence,
    orbit: Mapping[Any, Crossings],
    current: Sequence[tuple[Any, int]],
    alpha,
    beta,
    S,
    eps,
    delta,
    q: int,
    *,
    n_k: int | None = None,
    check_constants: bool = True,
    strict: bool = True,
    condition_one_only: bool = False,
) -> GrowthResult:
    """One growth step: q downcrossings then q upcrossings, each through vitali_select at eps/2.

    Every point g of the current union is owned by the first pair (c, n)
    whose set contains it and borrows c's next q crossings.  The selected
    (g, n) pairs are pulled back to (c(g), n).  Conclusions (i)-(iii) are
    evaluated exactly and reported; they are not assumed.  ``strict`` is
    passed on to vitali_select as its precondition check.
    """
    eps, delta = Fraction(eps), Fraction(delta)
    if check_constants:
        bad = check_step_constants(alpha, beta, S, eps, delta)
        if bad:
            raise PreconditionError("step constants violate " + "; ".join(bad), bad)
    current = sorted(set(current))
    for c, n in current:
        if c not in orbit or n not in orbit[c].ups:
            raise PreconditionError("(%s, %d) is not an upcrossing in the orbit data" % (c, n), (c, n))
    if not current:
        return GrowthResult([], [], 0, 0, 0, ("empty", "empty"), True, True, eps, delta)
    half = eps / 2
    union_k = _pair_union(seq, current)

    def stage(pairs, union, source):
        owner = _owners(seq, pairs, union)
        assignment = {g: _next_scales(getattr(orbit[c], source), n, q, source, c) for g, (c, n) in owner.items()}
        sel = vitali_select(
            seq, union, assignment, half, check_preconditions=strict, condition_one_only=condition_one_only
        )
        return sorted({(owner[g][0], n) for g, n in sel.pairs}), sel.outcome

    mid, out1 = stage(current, union_k, "downs")
    union_mid = _pair_union(seq, mid)
    nxt, out2 = stage(mid, union_mid, "ups") if mid else ([], "empty")
    union_next = _pair_union(seq, nxt)

    crossing_ok = True
    for c, n in nxt:
        ups = orbit[c].ups
        if n not in ups or (n_k is not None and ups.index(n) >= n_k + 2 * q):
            crossing_ok = False
    family = [_right_set(seq[n], c) for c, n in nxt]
    disjoint_ok = bool(certify_epsilon_disjoint(family, eps))
    return GrowthResult(
        nxt,
        mid,
        union_k.size,
        union_mid.size if union_mid is not None else 0,
        union_next.size if union_next is not None else 0,
        (out1, out2),
        crossing_ok,
        disjoint_ok,
        eps,
        delta,
    )
