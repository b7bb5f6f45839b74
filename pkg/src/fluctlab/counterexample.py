"""Slow decay of mu(D_N): block sets A_n^{l,N}, their properties, and the tower stages.

Block sets are three-piece RunSets (a solid prefix, a progression of
length-l runs with period 2l, a possibly truncated last run), so sizes and
phi-sums stay exact at any scale.

Stage functions live on the dyadic odometer.  Stage k has a tower of height
h_k = 2^j_k, split into 2^r_k columns by the next r_k coordinates; on the
selected columns the label at level v is phi_l(v), elsewhere it is the
previous stage's label.  A point is therefore an integer w mod H_k =
h_k 2^r_k, and T acts as w -> w + 1.  Exact measures come from a
hierarchical count: windows inside one column reduce to residues mod 2l
(phi columns) or to the previous stage's histogram (old columns); only the
W positions per column boundary are evaluated explicitly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .dynamics import System, count_fluctuations, count_fluctuations_masks, gap_masks, prf
from .foelner import FoelnerSequence, explicit_sequence, tempered_report
from .groups import FiniteSubset, Z
from .intsets import RunSet, make_piece, periodic_indicator_count


class ConstructionInfeasible(ValueError):
    """The requested parameters cannot satisfy a step of the construction."""


class DepthBudgetExceeded(ValueError):
    pass


def phi(l: int, t):
    """1 on 2l N_0 + [0, l-1]; works elementwise on arrays."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if isinstance(t, np.ndarray):
        return ((t % (2 * l)) < l).astype(np.int64)
    if t < 0:
        raise ValueError("phi is defined on N_0")
    return 1 if t % (2 * l) < l else 0


def gap_for(lam) -> tuple[Fraction, Fraction]:
    lam = Fraction(lam)
    w = lam / (5 * (4 + lam))
    return Fraction(1, 2) - w, Fraction(1, 2) + w


# blocks ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockSequence:
    lam: Fraction
    l: int
    N: int
    sets: tuple[FiniteSubset, ...]
    maxima: tuple[int, ...]  # M_0 .. M_2N

    @property
    def base(self) -> FiniteSubset:
        """A_0 = [0, M_0], the convention behind the n = 1 ratio."""
        return FiniteSubset.interval(0, self.maxima[0])

    def __getitem__(self, n: int) -> FiniteSubset:
        return self.base if n == 0 else self.sets[n - 1]

    def sequence(self) -> FoelnerSequence:
        return FoelnerSequence(Z, self.sets, {"kind": "blocks", "lambda": str(self.lam), "l": self.l, "N": self.N})


def next_block(lam: Fraction, l: int, m_prev: int, odd: bool) -> RunSet:
    solid_end = math.floor(2 / lam * m_prev)
    reach = (2 + lam) / lam * m_prev
    if odd:
        first, limit = 0, math.floor(reach)
    else:
        first, limit = l, math.floor(reach - 2 * l + 1)
    pieces = [make_piece(0, solid_end + 1, 1, 1)]
    if limit >= first:
        starts = (limit - first) // (2 * l) + 1
        full = (limit - first - l + 1) // (2 * l) + 1 if limit - first + 1 >= l else 0
        if full:
            pieces.append(make_piece(first, l, 2 * l, full))
        if full < starts:
            start = first + 2 * l * full
            pieces.append(make_piece(start, limit - start + 1, 1, 1))
    return RunSet(pieces)


def build_block_sequence(lam, l: int, N: int) -> BlockSequence:
    lam = Fraction(lam)
    if lam <= 0 or l < 4 or N < 1:
        raise ValueError("need lambda > 0, l >= 4, N >= 1")
    maxima = [l * l]
    sets = []
    for n in range(1, 2 * N + 1):
        rs = next_block(lam, l, maxima[-1], odd=n % 2 == 1)
        sets.append(FiniteSubset.from_runset(rs))
        maxima.append(rs.max)
    return BlockSequence(lam, l, N, tuple(sets), tuple(maxima))


@dataclass
class PropertyReport:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)
    bound: Any = None
    detail: dict = field(default_factory=dict)


def verify_property_a(b: BlockSequence) -> PropertyReport:
    """|U_{i<n} A_i^-1 A_n| / |A_n| <= 1 + lambda for n = 1..2N, with A_0 = [0, l^2]."""
    seq = FoelnerSequence(Z, (b.base,) + b.sets)
    rep = tempered_report(seq, sides="left")
    ratios = {n - 1: r for n, r in rep.left.items()}
    bound = 1 + b.lam
    return PropertyReport("a", all(r <= bound for r in ratios.values()), ratios, bound)


def verify_property_b(b: BlockSequence, radius: int | None = None) -> PropertyReport:
    """max |(t + A_n) symdiff A_n| / |A_n| over |t| <= floor(sqrt l); passes iff <= 2/sqrt(l)."""
    radius = math.isqrt(b.l) if radius is None else radius
    worst, arg = Fraction(0), (None, 0)
    per_n = {}
    for n, a in enumerate(b.sets, 1):
        rs = a.runset
        best = Fraction(0)
        for t in range(-radius, radius + 1):
            r = Fraction(rs.shift(t).symdiff_size(rs), rs.size)
            if r > best:
                best = r
                if r > worst:
                    worst, arg = r, (n, t)
        per_n[n] = best
    # ratio <= 2/sqrt(l)  <=>  ratio^2 * l <= 4
    passed = worst * worst * b.l <= 4
    return PropertyReport("b", passed, per_n, "2/sqrt(%d)" % b.l, {"max": worst, "argmax": arg})


def block_averages(b: BlockSequence, i: int, k: int = 0) -> list[Fraction]:
    """(1/|A_n|) sum_{z in A_n} phi_l(z + 2lk + i), n = 1..2N."""
    return [
        Fraction(periodic_indicator_count(a.runset, 2 * b.l, 0, b.l, 2 * b.l * k + i), a.size) for a in b.sets
    ]


def verify_property_c(b: BlockSequence, i: int, k: int = 0, *, strict: bool = False) -> PropertyReport:
    """Averages along A_1..A_2N of a shifted phi_l and their fluctuation count.

    Checks odd-n averages against 1/2 + lam/(4(4+lam)) - 4/l, even-n against
    1/2 - lam/(4(4+lam)) + 4/l, and that the count across the gap is N.
    ``separated`` records whether those bounds alone force the averages across
    the gap; with ``strict`` an unseparated gap raises.
    """
    if not 0 <= i <= b.l / 4 or k < 0:
        raise ValueError("need 0 <= i <= l/4 and k >= 0")
    lam, l = b.lam, b.l
    alpha, beta = gap_for(lam)
    lower = Fraction(1, 2) + lam / (4 * (4 + lam)) - Fraction(4, l)
    upper = Fraction(1, 2) - lam / (4 * (4 + lam)) + Fraction(4, l)
    separated = lower >= beta and upper <= alpha
    if strict and not separated:
        raise ConstructionInfeasible("l=%d too small: bounds %s / %s do not separate (%s, %s)" % (l, lower, upper, alpha, beta))
    avgs = block_averages(b, i, k)
    bounds_ok = all((a >= lower) if n % 2 == 1 else (a <= upper) for n, a in enumerate(avgs, 1))
    count = count_fluctuations(avgs, alpha, beta)
    return PropertyReport(
        "c",
        bounds_ok and count == b.N,
        {n: a for n, a in enumerate(avgs, 1)},
        (lower, upper),
        {"count": count, "alpha": alpha, "beta": beta, "separated": separated, "bounds_ok": bounds_ok},
    )


# concatenation -------------------------------------------------------------------------

@dataclass
class ConcatenatedSequence:
    sequence: FoelnerSequence
    blocks: list[BlockSequence]
    ls: list[int]
    starts: list[int]  # 1-based index of each block's first set
    desk: bool

    def block_end(self, m: int) -> int:
        return self.starts[m] + 2 * self.blocks[m].N - 1

    def block_for(self, n_pairs: int) -> int | None:
        """Least m with l_m >= n_pairs."""
        for m, l in enumerate(self.ls):
            if l >= n_pairs:
                return m
        return None


def build_concatenated_foelner(l0: int, block_pairs: int | None = None, stages: int = 2, lam=1, *, desk: bool = True) -> ConcatenatedSequence:
    """Concatenate blocks A^{l_m, N_m}, l_{m+1} = max A_{2N_m}^{l_m, N_m}.

    Faithful mode (desk=False) uses N_m = l_m and needs l0 > 100; desk mode
    uses ``block_pairs`` for every block.
    """
    lam = Fraction(lam)
    if desk:
        if block_pairs is None or block_pairs < 1:
            raise ValueError("desk mode needs block_pairs >= 1")
    elif l0 <= 100:
        raise ValueError("faithful mode needs l0 > 100")
    blocks, ls, starts, sets = [], [l0], [], []
    for m in range(stages):
        n_pairs = block_pairs if desk else ls[m]
        b = build_block_sequence(lam, ls[m], n_pairs)
        starts.append(len(sets) + 1)
        sets.extend(b.sets)
        blocks.append(b)
        ls.append(b.maxima[-1])
    prov = {"kind": "concatenated", "l0": l0, "stages": stages, "lambda": str(lam), "desk": desk}
    if desk:
        prov["block_pairs"] = block_pairs
    return ConcatenatedSequence(FoelnerSequence(Z, tuple(sets), prov), blocks, ls, starts, desk)


# stage functions ---------------------------------------------------------------------

@dataclass(frozen=True)
class StageFunction:
    stage: int
    depth: int  # tower height h = 2^depth
    r: int  # column bits
    selected: tuple[int, ...]
    l: int
    parent: "StageFunction | None" = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def height(self) -> int:
        return 1 << self.depth

    @property
    def bits(self) -> int:
        return self.depth + self.r

    @property
    def period(self) -> int:
        return 1 << self.bits

    def labels(self, w) -> np.ndarray:
        """f_k at states w (any integers; reduced mod the period)."""
        w = np.asarray(w, dtype=np.int64) % self.period
        if self.stage == 0:
            return np.zeros(w.shape, dtype=np.int64)
        v = w & (self.height - 1)
        col = w >> self.depth
        sel = np.zeros(1 << self.r, dtype=bool)
        sel[list(self.selected)] = True
        out = self.parent.labels(v)
        on = sel[col]
        out[on] = phi(self.l, v[on])
        return out

    def label_array(self) -> np.ndarray:
        if self.bits > 24:
            raise DepthBudgetExceeded("refusing to materialise 2^%d labels" % self.bits)
        return self.labels(np.arange(self.period, dtype=np.int64))

    def lineage(self) -> list["StageFunction"]:
        out, s = [], self
        while s is not None:
            out.append(s)
            s = s.parent
        return out[::-1]


def zero_stage() -> StageFunction:
    return StageFunction(0, 0, 0, (), 0)


def subbase_choice(delta, r: int | None = None, *, min_r: int = 1) -> tuple[int, int, Fraction]:
    """(r, count, shortfall): count = floor(0.99 delta 2^r) sub-cylinders, shortfall < delta/100."""
    delta = Fraction(delta)
    target = Fraction(99, 100) * delta
    if r is not None:
        count = math.floor(target * 2 ** r)
        return r, count, target - Fraction(count, 2 ** r)
    for rr in range(min_r, 64):
        count = math.floor(target * 2 ** rr)
        short = target - Fraction(count, 2 ** rr)
        if count > 0 and short < delta / 100:
            return rr, count, short
    raise ConstructionInfeasible("no column split found for delta=%s" % delta)


class StageEvaluator:
    """Exact fluctuation-count histograms of stage functions along a sequence."""

    def __init__(self, seq: FoelnerSequence, alpha, beta):
        self.seq = seq
        self.alpha, self.beta = Fraction(alpha), Fraction(beta)
        self._cache: dict = {}
        self._runs: dict[int, np.ndarray] = {}

    def window(self, horizon: int) -> int:
        w = 0
        for n in range(1, horizon + 1):
            f = self.seq[n]
            if f.min < 0:
                raise ValueError("sets must lie in N_0")
            w = max(w, f.max)
        return w

    def _set_runs(self, n: int) -> np.ndarray:
        if n not in self._runs:
            self._runs[n] = np.asarray(self.seq[n].runs(), dtype=np.int64).reshape(-1, 2)
        return self._runs[n]

    def counts_from_labels(self, labels: np.ndarray, offsets: np.ndarray, horizon: int) -> np.ndarray:
        """Fluctuation counts of windows starting at ``offsets`` into ``labels``."""
        prefix = np.concatenate([[0], np.cumsum(labels)]).astype(np.int64)
        offsets = np.asarray(offsets, dtype=np.int64)
        cols = []
        for n in range(1, horizon + 1):
            runs = self._set_runs(n)
            total = np.zeros(len(offsets), dtype=np.int64)
            chunk = max(1, 2_000_000 // max(1, len(offsets)))
            for k in range(0, len(runs), chunk):
                a, b = runs[k:k + chunk, 0], runs[k:k + chunk, 1]
                base = offsets[:, None]
                total += (prefix[base + b + 1] - prefix[base + a]).sum(axis=1)
            cols.append(total)
        num = np.stack(cols, axis=1)
        den = [self.seq[n].size for n in range(1, horizon + 1)]
        low, high = gap_masks(num, den, self.alpha, self.beta)
        return count_fluctuations_masks(low, high)

    def explicit_counts(self, stage: StageFunction, positions: np.ndarray, horizon: int) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.int64)
        w = self.window(horizon)
        lo, hi = int(positions.min()), int(positions.max()) + w
        labels = stage.labels(np.arange(lo, hi + 1, dtype=np.int64))
        return self.counts_from_labels(labels, positions - lo, horizon)

    def phi_counts(self, l: int, horizon: int) -> list[int]:
        """Count for a window starting at level v of a phi column, by v mod 2l."""
        key = ("phi", l, horizon)
        if key not in self._cache:
            out = []
            for rho in range(2 * l):
                vals = [
                    Fraction(periodic_indicator_count(self.seq[n].runset, 2 * l, 0, l, rho), self.seq[n].size)
                    for n in range(1, horizon + 1)
                ]
                out.append(count_fluctuations(vals, self.alpha, self.beta))
            self._cache[key] = out
        return self._cache[key]

    def histogram(self, stage: StageFunction, horizon: int) -> Counter:
        """Number of states w in Z/H with each fluctuation count."""
        key = ("hist", id(stage), horizon)
        if key in self._cache:
            return self._cache[key][1]
        if stage.stage == 0:
            # constant averages never cross a gap
            hist = Counter({0: 1})
            self._cache[key] = (stage, hist)
            return hist
        h, cols = stage.height, 1 << stage.r
        w = self.window(horizon)
        if w >= h:
            raise DepthBudgetExceeded("window %d does not fit in tower height %d" % (w, h))
        parent = stage.parent
        if h % parent.period:
            raise ValueError("tower height must be a multiple of the previous period")
        sel = set(stage.selected)
        n_sel = len(sel)
        hist: Counter = Counter()
        last_inner = h - 1 - w
        two_l = 2 * stage.l
        for rho, c in enumerate(self.phi_counts(stage.l, horizon)):
            if rho <= last_inner and n_sel:
                hist[c] += n_sel * ((last_inner - rho) // two_l + 1)
        tail = np.arange(h - w, h, dtype=np.int64)
        if n_sel < cols:
            parent_hist = self.histogram(parent, horizon)
            mult = h // parent.period
            tail_counts = Counter(self.explicit_counts(parent, tail, horizon).tolist())
            for c in set(parent_hist) | set(tail_counts):
                hist[c] += (cols - n_sel) * (mult * parent_hist.get(c, 0) - tail_counts.get(c, 0))
        kinds = Counter((s in sel, (s + 1) % cols in sel) for s in range(cols))
        u = np.arange(h - w, h + w, dtype=np.int64)
        for (here, nxt), mult_kind in kinds.items():
            labels = np.zeros(len(u), dtype=np.int64)
            left, right = u < h, u >= h
            labels[left] = phi(stage.l, u[left]) if here else parent.labels(u[left])
            labels[right] = phi(stage.l, u[right] - h) if nxt else parent.labels(u[right] - h)
            counts = self.counts_from_labels(labels, np.arange(w, dtype=np.int64), horizon)
            for c, k in Counter(counts.tolist()).items():
                hist[c] += mult_kind * k
        assert sum(hist.values()) == stage.period
        self._cache[key] = (stage, hist)
        return hist

    def mu(self, stage: StageFunction, N: int, horizon: int) -> Fraction:
        hist = self.histogram(stage, horizon)
        return Fraction(sum(v for c, v in hist.items() if c >= N), stage.period)


class StageSystem(System):
    """Odometer states w mod H_k with the stage-k observable, for sampling."""

    def __init__(self, stage: StageFunction):
        self.kind = "dyadic_odometer"
        self.stage = stage
        self.scale = 1
        self.bound = Fraction(1)

    def sample(self, seed, start, count):
        u = prf(prf(np.uint64(seed), np.uint64(2)), np.arange(start, start + count, dtype=np.uint64))
        return (u >> np.uint64(64 - self.stage.bits)).astype(np.int64) if self.stage.bits else np.zeros(count, np.int64)

    def act(self, g, x):
        return (x + g) % self.stage.period

    def observe(self, x):
        return Fraction(int(self.stage.labels(np.asarray([x]))[0]))

    def window_sums(self, points, f):
        runs = np.asarray(f.runs(), dtype=np.int64).reshape(-1, 2)
        lo, hi = int(runs[:, 0].min()), int(runs[:, 1].max())
        out = np.zeros(len(points), dtype=np.int64)
        span = np.arange(lo, hi + 1, dtype=np.int64)
        for k, x in enumerate(np.asarray(points, dtype=np.int64)):
            pre = np.concatenate([[0], np.cumsum(self.stage.labels(x + span))])
            out[k] = (pre[runs[:, 1] - lo + 1] - pre[runs[:, 0] - lo]).sum()
        return out

    def enumerate_points(self):
        if self.stage.bits > 22:
            raise TypeError("use StageEvaluator for exact values at this depth")
        return np.arange(self.stage.period, dtype=np.int64)

    def describe(self):
        return {"kind": self.kind, "bits": self.stage.bits, "stage": self.stage.stage}


# tower update and the staged run --------------------------------------------------------

@dataclass
class TowerReport:
    stage: int
    block: int
    l: int
    depth: int
    r: int
    selected: int
    threshold: Fraction
    horizon: int
    L: int
    eps: Fraction
    delta: Fraction
    shortfall: Fraction
    mu_new: dict[int, Fraction]
    mu_old: dict[int, Fraction]
    disagreement_bound: Fraction
    conclusion1: bool
    conclusion2: bool
    conclusion3: bool

    @property
    def ok(self) -> bool:
        return self.conclusion1 and self.conclusion2 and self.conclusion3


def tower_update(
    f: StageFunction,
    concat: ConcatenatedSequence,
    evaluator: StageEvaluator,
    eps,
    delta,
    n_prime: int,
    N_prime: int,
    N_dprime: int,
    *,
    r: int | None = None,
    depth_budget: int = 62,
) -> tuple[StageFunction, TowerReport]:
    """One application of the tower lemma with exact checks of its three conclusions."""
    eps, delta = Fraction(eps), Fraction(delta)
    if not 0 < delta < 1 or not 0 < eps < min(delta / 100, 1 - delta):
        raise ValueError("need 0 < eps < min(delta/100, 1-delta)")
    m = concat.block_for(N_dprime)
    if m is None or m >= len(concat.blocks):
        raise ConstructionInfeasible("no built block has l_m >= %d" % N_dprime)
    seq = concat.sequence
    L = max(seq[n].max for n in range(1, n_prime + 1)) if n_prime else 0
    max_a = concat.blocks[m].maxima[-1]
    threshold = (L + max_a) / (eps / 4)
    depth = max(f.bits, math.floor(threshold).bit_length())
    while (1 << depth) <= threshold:
        depth += 1
    r, count, shortfall = subbase_choice(delta, r)
    if depth + r > depth_budget:
        raise DepthBudgetExceeded("stage needs %d bits, budget %d" % (depth + r, depth_budget))
    new = StageFunction(
        f.stage + 1,
        depth,
        r,
        tuple(range(count)),
        concat.ls[m],
        f,
        {"eps": str(eps), "delta": str(delta), "n_prime": n_prime, "N_prime": N_prime, "N_dprime": N_dprime, "block": m},
    )
    horizon = max(n_prime, concat.block_end(m))
    mu_new = {N: evaluator.mu(new, N, horizon) for N in sorted(set(range(1, N_prime + 1)) | {N_dprime})}
    mu_old = {N: evaluator.mu(f, N, n_prime) for N in range(1, N_prime + 1)}
    c1 = mu_new[N_dprime] > delta / 10
    disagreement = Fraction(count * ((1 << depth) + max(L, 1) - 1), new.period)
    c2 = disagreement <= delta
    c3 = all(mu_new[N] >= min(mu_old[N] - eps, Fraction(1, 10)) for N in mu_old)
    report = TowerReport(
        new.stage, m, concat.ls[m], depth, r, count, threshold, horizon, L, eps, delta, shortfall,
        mu_new, mu_old, disagreement, c1, c2, c3,
    )
    return new, report


def schedule_from_omega(omega: Callable[[int], Any], K: int, n_max: int = 10 ** 6) -> list[int]:
    """N_k = min{N >= 1 : omega(N) < 2^-(k+1)/10}, k = 1..K."""
    out = []
    for k in range(1, K + 1):
        target = Fraction(1, 10 * 2 ** (k + 1))
        n = 1
        while not Fraction(omega(n)) < target:
            n += 1
            if n > n_max:
                raise ConstructionInfeasible("omega does not drop below %s by N=%d" % (target, n_max))
        out.append(n)
    return out


@dataclass
class CounterexampleReport:
    Ns: list[int]
    stages: list[TowerReport]
    final: StageFunction | None
    horizon: int
    rows: list[dict]
    feasible: bool
    failure: str | None
    concat: ConcatenatedSequence
    tolerance: Fraction

    @property
    def passed(self) -> bool:
        return self.feasible and all(s.ok for s in self.stages) and all(r["pass"] for r in self.rows)


def run_counterexample(
    omega: Callable[[int], Any],
    K: int,
    lam=1,
    l0: int = 16,
    block_pairs: int = 2,
    *,
    desk: bool = True,
    depth_budget: int = 62,
    r: int | None = None,
) -> CounterexampleReport:
    """Iterate the tower lemma for k = 1..K with delta = 2^-k and report exact mu(D_{N_i})."""
    lam = Fraction(lam)
    Ns = schedule_from_omega(omega, K)
    alpha, beta = gap_for(lam)
    stages_needed = 1
    concat = build_concatenated_foelner(l0, block_pairs, stages_needed, lam, desk=desk)
    while max(Ns) > concat.ls[-2] and stages_needed < 4:
        stages_needed += 1
        concat = build_concatenated_foelner(l0, block_pairs, stages_needed, lam, desk=desk)
    evaluator = StageEvaluator(concat.sequence, alpha, beta)
    f, n_prev = zero_stage(), 1
    reports: list[TowerReport] = []
    tolerance = Fraction(0)
    failure = None
    for k in range(1, K + 1):
        delta = Fraction(1, 2 ** k)
        prev = {i: evaluator.mu(f, Ns[i - 1], n_prev) for i in range(1, k)}
        eps = None
        for e in range(1, 80):
            cand = Fraction(1, 2 ** e)
            if cand < min(delta / 100, 1 - delta) and all(prev[i] - cand > Fraction(1, 10 * 2 ** i) for i in prev):
                eps = cand
                break
        if eps is None:
            failure = "stage %d: no eps keeps mu(D_N_i) above 2^-i/10 (values %s)" % (k, {i: str(v) for i, v in prev.items()})
            break
        try:
            f, rep = tower_update(
                f, concat, evaluator, eps, delta, n_prev, Ns[k - 2] if k > 1 else 0, Ns[k - 1], r=r, depth_budget=depth_budget
            )
        except (ConstructionInfeasible, DepthBudgetExceeded) as exc:
            failure = "stage %d: %s" % (k, exc)
            break
        reports.append(rep)
        tolerance += rep.shortfall
        n_prev = rep.horizon
    rows = []
    if reports:
        for i in range(1, len(reports) + 1):
            mu = evaluator.mu(f, Ns[i - 1], n_prev)
            bound = Fraction(1, 10 * 2 ** i)
            rows.append({"stage": i, "N": Ns[i - 1], "mu": mu, "bound": bound, "tolerance": tolerance, "pass": mu > bound - tolerance})
    return CounterexampleReport(Ns, reports, f if reports else None, n_prev, rows, failure is None, failure, concat, tolerance)
