"""Concrete actions, ergodic averages, fluctuation counts and mu(D_N).

Actions compose as T_g T_h = T_{hg}.  Averages are kept as integer numerator
arrays over exact denominators wherever the observable is rational, so every
comparison against the gap endpoints is exact; only the rotation is float.
Randomness comes from a keyed splitmix64 function of (seed, counter), which
makes every sample reproducible on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Any, Callable, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .covering import Crossings
from .foelner import FoelnerSequence
from .groups import FiniteSubset, Group, Z

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def prf(key, data) -> np.ndarray:
    """Keyed 64-bit hash; ``key`` and ``data`` broadcast."""
    key = np.asarray(key, dtype=np.uint64)
    data = np.asarray(data, dtype=np.uint64)
    return _mix(_mix(key) ^ _mix(data ^ np.uint64(0x5851F42D4C957F2D)))


def uniforms(seed: int, start: int, count: int, stream: int = 0) -> np.ndarray:
    """Uniform doubles for counters start..start+count-1 of one stream."""
    key = prf(np.uint64(seed & _MASK64), np.uint64(stream))
    u = prf(key, np.arange(start, start + count, dtype=np.uint64))
    return (u >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def _encode(group: Group, elems: Sequence) -> np.ndarray:
    """Injective-enough 64-bit codes for group elements (Z: two's complement)."""
    if group is Z:
        return np.asarray([g & _MASK64 for g in elems], dtype=np.uint64)
    arr = np.asarray(elems, dtype=np.int64).reshape(len(elems), -1)
    h = np.zeros(len(elems), dtype=np.uint64)
    for k in range(arr.shape[1]):
        h = _mix(h ^ arr[:, k].astype(np.uint64))
    return h


def _scaled_ints(values) -> tuple[np.ndarray, int]:
    fr = [Fraction(v) for v in values]
    scale = reduce(math.lcm, (f.denominator for f in fr), 1)
    return np.asarray([int(f * scale) for f in fr], dtype=np.int64), scale


# systems ------------------------------------------------------------------------

class System:
    """A measure-preserving action with a bounded observable.

    ``window_sums(points, F)`` returns sum_{g in F} f(T_g x) for each point,
    as integers in units of 1/scale when ``exact`` and as floats otherwise.
    """

    kind: str = ""
    group: Group = Z
    exact: bool = True
    scale: int = 1
    bound: Fraction = Fraction(1)

    def sample(self, seed: int, start: int, count: int):
        raise NotImplementedError

    def act(self, g, x):
        raise NotImplementedError

    def observe(self, x):
        raise NotImplementedError

    def window_sums(self, points, f: FiniteSubset) -> np.ndarray:
        raise NotImplementedError

    def enumerate_points(self):
        raise TypeError("%s is not exactly enumerable" % self.kind)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind}


class PeriodicSystem(System):
    """Z acting on Z/m by translation; covers finite_cyclic and the odometer levels.

    On the odometer a level-labelled observable depends on the first J
    coordinates only, and adding one with carry acts on them as v -> v+1 mod
    2^J, so the level v is the whole state.
    """

    def __init__(self, labels, kind: str = "finite_cyclic", **meta):
        ints, scale = _scaled_ints(labels)
        if len(ints) == 0:
            raise ValueError("need at least one point")
        self.kind = kind
        self.labels = ints
        self.scale = scale
        self.m = len(ints)
        self.meta = meta
        self.bound = Fraction(int(np.abs(ints).max()), scale)
        self.prefix = np.concatenate([[0], np.cumsum(ints)]).astype(np.int64)
        self.total = int(self.prefix[-1])

    def sample(self, seed, start, count):
        return np.minimum((uniforms(seed, start, count) * self.m).astype(np.int64), self.m - 1)

    def act(self, g, x):
        return (x + g) % self.m

    def observe(self, x):
        return Fraction(int(self.labels[x % self.m]), self.scale)

    def _cum(self, t: np.ndarray) -> np.ndarray:
        q, r = np.divmod(t, self.m)
        return q * self.total + self.prefix[r]

    def window_sums(self, points, f):
        points = np.asarray(points, dtype=np.int64)
        runs = np.asarray(f.runs(), dtype=np.int64).reshape(-1, 2) if f.group is Z else None
        if runs is None:
            raise TypeError("periodic systems are Z-actions")
        out = np.zeros(len(points), dtype=np.int64)
        chunk = max(1, 4_000_000 // max(1, len(points)))
        for k in range(0, len(runs), chunk):
            a, b = runs[k:k + chunk, 0], runs[k:k + chunk, 1]
            base = points[:, None]
            out += (self._cum(base + b + 1) - self._cum(base + a)).sum(axis=1)
        return out

    def enumerate_points(self):
        return np.arange(self.m, dtype=np.int64)

    def shifted(self, c) -> "PeriodicSystem":
        c = Fraction(c)
        return PeriodicSystem([Fraction(int(v), self.scale) + c for v in self.labels], self.kind, **self.meta)

    def describe(self):
        return {"kind": self.kind, "size": self.m, **self.meta}


def finite_cyclic(m: int, labels=None, *, support=None) -> PeriodicSystem:
    """Z/m with f given by ``labels`` (length m) or the indicator of ``support``."""
    if m < 1:
        raise ValueError("m must be positive")
    if labels is None:
        support = set(support or ())
        labels = [1 if i in support else 0 for i in range(m)]
    if len(labels) != m:
        raise ValueError("need one label per point")
    return PeriodicSystem(labels, "finite_cyclic")


def dyadic_odometer(depth: int, labels) -> PeriodicSystem:
    """Odometer with an observable reading the first ``depth`` coordinates.

    ``labels`` is a length-2^depth sequence indexed by tower level, or a
    function of the level array.
    """
    if not 0 <= depth <= 26:
        raise ValueError("depth must lie in 0..26 for level enumeration")
    m = 1 << depth
    if callable(labels):
        labels = list(labels(np.arange(m)))
    if len(labels) != m:
        raise ValueError("need 2^depth labels")
    return PeriodicSystem(labels, "dyadic_odometer", depth=depth)


class RotationSystem(System):
    """x -> x + theta mod 1 with f the indicator of [low, high)."""

    exact = False

    def __init__(self, theta: float, low: float = 0.0, high: float = 0.5):
        self.kind = "irrational_rotation"
        self.theta = float(theta) % 1.0
        self.low, self.high = float(low), float(high)
        self.bound = Fraction(1)

    def sample(self, seed, start, count):
        return uniforms(seed, start, count)

    def act(self, g, x):
        return (x + g * self.theta) % 1.0

    def observe(self, x):
        return 1.0 if self.low <= x % 1.0 < self.high else 0.0

    def window_sums(self, points, f):
        if f.size > 10 ** 7:
            raise ValueError("rotation horizon capped at 1e7 summands")
        g = np.asarray(f.elements, dtype=np.float64)
        pts = np.asarray(points, dtype=np.float64)
        out = np.zeros(len(pts))
        chunk = max(1, 2_000_000 // max(1, len(g)))
        for k in range(0, len(pts), chunk):
            y = np.mod(pts[k:k + chunk, None] + g[None, :] * self.theta, 1.0)
            out[k:k + chunk] = ((y >= self.low) & (y < self.high)).sum(axis=1)
        return out

    def describe(self):
        return {"kind": self.kind, "theta": self.theta, "interval": [self.low, self.high]}


def irrational_rotation(theta: float = math.sqrt(2) - 1, interval=(0.0, 0.5)) -> RotationSystem:
    return RotationSystem(theta, *interval)


class BernoulliSystem(System):
    """Full shift over a group with i.i.d. symbols; (T_g x)(h) = x(gh), f(x) = value of x(e).

    Hence f(T_g x) = value of x(g).  A point is a 64-bit key and x(g) is a
    keyed hash of g, so configurations are never materialised.
    """

    def __init__(self, group: Group, probs=(Fraction(1, 2), Fraction(1, 2)), values=None, seed: int = 0):
        probs = [Fraction(p) for p in probs]
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError("symbol probabilities must be nonnegative and sum to 1")
        self.kind = "bernoulli_shift"
        self.group = group
        self.probs = probs
        values = list(range(len(probs))) if values is None else list(values)
        self.values, self.scale = _scaled_ints(values)
        self.bound = Fraction(int(np.abs(self.values).max()), self.scale)
        self.cuts = np.cumsum([float(p) for p in probs])[:-1]
        self.seed = seed

    def sample(self, seed, start, count):
        key = prf(np.uint64((seed ^ self.seed) & _MASK64), np.uint64(1))
        return prf(key, np.arange(start, start + count, dtype=np.uint64))

    def symbols(self, keys, codes) -> np.ndarray:
        u = (prf(np.asarray(keys)[:, None], codes[None, :]) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        return np.searchsorted(self.cuts, u, side="right")

    def act(self, g, x):
        # (key, h) stands for the configuration k -> x_key(hk); T_g sends it to (key, hg)
        key, h = x if isinstance(x, tuple) else (x, self.group.identity)
        return (key, self.group.mul(h, g))

    def observe(self, x):
        if isinstance(x, tuple):
            key, g = x
        else:
            key, g = x, self.group.identity
        sym = self.symbols(np.asarray([key], dtype=np.uint64), _encode(self.group, [g]))[0, 0]
        return Fraction(int(self.values[sym]), self.scale)

    def window_sums(self, points, f):
        if f.size > 10 ** 6:
            raise ValueError("window too large for lazy Bernoulli evaluation")
        codes = _encode(self.group, list(f.elements))
        keys = np.asarray(points, dtype=np.uint64)
        out = np.zeros(len(keys), dtype=np.int64)
        chunk = max(1, 4_000_000 // max(1, len(codes)))
        for k in range(0, len(keys), chunk):
            out[k:k + chunk] = self.values[self.symbols(keys[k:k + chunk], codes)].sum(axis=1)
        return out

    def describe(self):
        return {"kind": self.kind, "group": self.group.tag, "probs": [str(p) for p in self.probs], "seed": self.seed}


def bernoulli_shift(group: Group = Z, probs=(Fraction(1, 2), Fraction(1, 2)), values=None, seed: int = 0) -> BernoulliSystem:
    return BernoulliSystem(group, probs, values, seed)


# averages and fluctuations ------------------------------------------------------

def ergodic_average(sys: System, x, f: FiniteSubset):
    """(1/|F|) sum_{g in F} f(T_g x); a Fraction on exact systems."""
    if f.size == 0:
        raise ValueError("empty averaging set")
    s = sys.window_sums(np.asarray([x]) if not isinstance(x, np.ndarray) else x[:1], f)[0]
    if sys.exact:
        return Fraction(int(s), sys.scale * f.size)
    return float(s) / f.size


def average_matrix(sys: System, points, seq: FoelnerSequence, horizon: int):
    """Numerators (points x horizon) and denominators of A_n f, n = 1..horizon."""
    if horizon > seq.horizon:
        raise ValueError("horizon beyond the sequence")
    cols = [sys.window_sums(points, seq[n]) for n in range(1, horizon + 1)]
    num = np.stack(cols, axis=1) if cols else np.zeros((len(points), 0))
    den = [sys.scale * seq[n].size for n in range(1, horizon + 1)]
    return num, den


def gap_masks(num: np.ndarray, den: Sequence[int], alpha, beta, exact: bool = True):
    """Boolean arrays (A <= alpha, A >= beta), exact via cross-multiplication."""
    if not exact:
        a = num / np.asarray(den, dtype=np.float64)
        return a <= float(alpha), a >= float(beta)
    alpha, beta = Fraction(alpha), Fraction(beta)
    low = np.empty(num.shape, dtype=bool)
    high = np.empty(num.shape, dtype=bool)
    for j, d in enumerate(den):
        col = num[:, j]
        big = max(abs(int(col.max(initial=0))), abs(int(col.min(initial=0)))) * max(alpha.denominator, beta.denominator)
        lim_a, lim_b = alpha.numerator * d, beta.numerator * d
        if big < 2 ** 62 and abs(lim_a) < 2 ** 62 and abs(lim_b) < 2 ** 62:
            low[:, j] = col * alpha.denominator <= lim_a
            high[:, j] = col * beta.denominator >= lim_b
        else:
            obj = col.astype(object)
            low[:, j] = np.asarray([v * alpha.denominator <= lim_a for v in obj], dtype=bool)
            high[:, j] = np.asarray([v * beta.denominator >= lim_b for v in obj], dtype=bool)
    return low, high


def count_fluctuations(values: Sequence, alpha, beta) -> int:
    """Maximal N with n_1 < ... < n_2N, odd terms <= alpha, even terms >= beta."""
    if not alpha < beta:
        raise ValueError("need alpha < beta")
    n, seeking_low = 0, True
    for v in values:
        if seeking_low:
            if v <= alpha:
                seeking_low = False
        elif v >= beta:
            n += 1
            seeking_low = True
    return n


def count_fluctuations_masks(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Row-wise greedy count from precomputed gap masks."""
    count = np.zeros(low.shape[0], dtype=np.int64)
    seeking_low = np.ones(low.shape[0], dtype=bool)
    for j in range(low.shape[1]):
        hit_low = seeking_low & low[:, j]
        hit_high = ~seeking_low & high[:, j]
        count += hit_high
        seeking_low = (seeking_low & ~hit_low) | hit_high
    return count


def crossing_scales(values: Sequence, alpha, beta) -> Crossings:
    """Alternating scales: first reach >= beta, then <= alpha, and so on (1-based)."""
    ups, downs, seeking_up = [], [], True
    for n, v in enumerate(values, 1):
        if seeking_up and v >= beta:
            ups.append(n)
            seeking_up = False
        elif not seeking_up and v <= alpha:
            downs.append(n)
            seeking_up = True
    return Crossings(tuple(ups), tuple(downs))


def orbit_crossings(sys: System, x, seq: FoelnerSequence, alpha, beta, horizon: int) -> Crossings:
    num, den = average_matrix(sys, np.asarray([x]), seq, horizon)
    if sys.exact:
        vals = [Fraction(int(v), d) for v, d in zip(num[0], den)]
    else:
        vals = [float(v) / d for v, d in zip(num[0], den)]
    return crossing_scales(vals, Fraction(alpha) if sys.exact else float(alpha), Fraction(beta) if sys.exact else float(beta))


# estimation -----------------------------------------------------------------------

@dataclass(frozen=True)
class FluctuationQuery:
    alpha: Fraction
    beta: Fraction
    N: int
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if not self.alpha < self.beta:
            raise ValueError("need alpha < beta")
        if self.N < 0 or self.horizon < 1:
            raise ValueError("need N >= 0 and horizon >= 1")


@dataclass
class EstimateReport:
    estimate: float
    hits: int
    samples: int
    ci_low: float
    ci_high: float
    seed: int | None
    exact: bool
    query: FluctuationQuery
    value: Fraction | None = None

    def covers(self, x) -> bool:
        return self.ci_low <= float(x) <= self.ci_high


def wilson_interval(hits: int, n: int, level: float = 0.95) -> tuple[float, float]:
    lo, hi = proportion_confint(hits, n, alpha=1 - level, method="wilson")
    est = hits / n
    return min(float(lo), est), max(float(hi), est)


def fluctuation_counts(sys: System, points, seq: FoelnerSequence, alpha, beta, horizon: int) -> np.ndarray:
    num, den = average_matrix(sys, points, seq, horizon)
    low, high = gap_masks(num, den, alpha, beta, sys.exact)
    return count_fluctuations_masks(low, high)


def sample_counts(sys, seq, alpha, beta, horizon, samples, seed, batch: int = 2000) -> np.ndarray:
    """Fluctuation counts of points 0..samples-1 of the seeded stream."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    out = []
    for start in range(0, samples, batch):
        pts = sys.sample(seed, start, min(batch, samples - start))
        out.append(fluctuation_counts(sys, pts, seq, alpha, beta, horizon))
    return np.concatenate(out)


def estimate_mu_DN(sys: System, seq: FoelnerSequence, query: FluctuationQuery, samples: int, seed: int) -> EstimateReport:
    if query.horizon > seq.horizon:
        raise ValueError("query horizon beyond the sequence")
    counts = sample_counts(sys, seq, query.alpha, query.beta, query.horizon, samples, seed)
    return _report(counts, query, seed)


def _report(counts: np.ndarray, query: FluctuationQuery, seed) -> EstimateReport:
    hits = int((counts >= query.N).sum())
    n = len(counts)
    lo, hi = wilson_interval(hits, n)
    return EstimateReport(hits / n, hits, n, lo, hi, seed, False, query)


def estimate_decay(sys, seq, alpha, beta, Ns: Sequence[int], horizon: int, samples: int, seed: int) -> list[EstimateReport]:
    """Estimates for several N on one shared sample (monotone in N by construction)."""
    counts = sample_counts(sys, seq, alpha, beta, horizon, samples, seed)
    return [_report(counts, FluctuationQuery(alpha, beta, n, horizon), seed) for n in Ns]


def exact_mu_DN(sys: System, seq: FoelnerSequence, query: FluctuationQuery) -> Fraction:
    pts = sys.enumerate_points()
    if query.N == 0:
        return Fraction(1)
    counts = fluctuation_counts(sys, pts, seq, query.alpha, query.beta, query.horizon)
    return Fraction(int((counts >= query.N).sum()), len(pts))


# theorem constants ---------------------------------------------------------------

class NoFeasibleEpsilon(ValueError):
    pass


@dataclass(frozen=True)
class BoundConstants:
    alpha: Fraction
    beta: Fraction
    S: Fraction
    delta: Fraction
    eps: Fraction
    q: int
    lam: Fraction
    c1: Fraction
    #: c0 = c0_base ** c0_exponent, kept exact
    c0_base: Fraction = field(default=Fraction(1))
    c0_exponent: Fraction = field(default=Fraction(0))

    @property
    def c0(self) -> float:
        return math.exp(float(self.c0_exponent) * math.log(self.c0_base))

    def bound(self, N: int) -> float:
        """c1 * c0^N, the theorem's upper bound for mu(D_N)."""
        return float(self.c1) * math.exp(N * float(self.c0_exponent) * math.log(self.c0_base))


def step_inequalities(alpha, beta, S, eps, delta) -> dict[str, bool]:
    alpha, beta, S, eps, delta = map(Fraction, (alpha, beta, S, eps, delta))
    return {
        "growth": (beta - 4 * eps * S) * (1 - eps) / alpha >= 1 + delta,
        "half-growth": (1 - eps) * (1 + delta) >= 1 + delta / 2,
        "first-step": (1 - eps) * (1 + delta / 2) >= 1,
    }


def theorem_bound(alpha, beta, S, *, max_k: int = 200) -> BoundConstants:
    """delta, eps, q, lambda, c0, c1 for 0 < alpha < beta <= S."""
    alpha, beta, S = Fraction(alpha), Fraction(beta), Fraction(S)
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    if S < beta:
        raise ValueError("need S >= beta (apply the shift wrapper first)")
    delta = min((beta / alpha - 1) / 2, Fraction(1, 2))
    for k in range(1, max_k):
        eps = Fraction(1, 4 * 2 ** k)
        if all(step_inequalities(alpha, beta, S, eps, delta).values()):
            break
    else:
        raise NoFeasibleEpsilon("no dyadic eps down to 2^-%d works for gap (%s, %s), S=%s" % (max_k, alpha, beta, S))
    q = math.ceil(20 / (eps / 2) ** 2)
    base = 1 + delta / 2
    return BoundConstants(alpha, beta, S, delta, eps, q, eps / 16, base ** 3, base, Fraction(-1, 2 * q))


def theorem_bound_general(alpha, beta, sup_norm) -> BoundConstants:
    """Shift (alpha, beta) by ||f||_inf so the observable becomes nonnegative, bounded by 2||f||."""
    s = Fraction(sup_norm)
    return theorem_bound(Fraction(alpha) + s, Fraction(beta) + s, 2 * s)
