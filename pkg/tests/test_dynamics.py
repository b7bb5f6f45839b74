from fractions import Fraction
import itertools
import math
import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fluctlab.dynamics import (
    FluctuationQuery,
    NoFeasibleEpsilon,
    bernoulli_shift,
    count_fluctuations,
    count_fluctuations_masks,
    crossing_scales,
    dyadic_odometer,
    ergodic_average,
    estimate_decay,
    estimate_mu_DN,
    exact_mu_DN,
    finite_cyclic,
    fluctuation_counts,
    irrational_rotation,
    orbit_crossings,
    sample_counts,
    step_inequalities,
    theorem_bound,
    theorem_bound_general,
    uniforms,
)
from fluctlab.foelner import builtin_sequence, explicit_sequence
from fluctlab.groups import H3, FiniteSubset, Z, lattice


def exhaustive_fluctuations(values, alpha, beta):
    best = 0
    n = len(values)
    for k in range(1, n // 2 + 1):
        for idx in itertools.combinations(range(n), 2 * k):
            if all(values[i] <= alpha if j % 2 == 0 else values[i] >= beta for j, i in enumerate(idx)):
                best = k
                break
    return best


def test_count_examples():
    assert count_fluctuations([0.5] * 6, 0.25, 0.75) == 0
    assert count_fluctuations([0, 1, 0, 1], 0.25, 0.75) == 2
    assert count_fluctuations([1, 0], 0.25, 0.75) == 0
    with pytest.raises(ValueError):
        count_fluctuations([0], 1, 1)


@settings(max_examples=400)
@given(st.lists(st.integers(0, 4), max_size=10), st.integers(0, 3), st.integers(1, 4))
def test_greedy_matches_exhaustive(vals, a, width):
    alpha, beta = Fraction(a, 4) + Fraction(1, 16), Fraction(a + width, 4) - Fraction(1, 16)
    values = [Fraction(v, 4) for v in vals]
    assert count_fluctuations(values, alpha, beta) == exhaustive_fluctuations(values, alpha, beta)


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(0, 3), min_size=6, max_size=6), min_size=1, max_size=8))
def test_mask_counter_matches_scalar(rows):
    arr = np.asarray(rows)
    low, high = arr <= 1, arr >= 2
    got = count_fluctuations_masks(low, high)
    assert list(got) == [count_fluctuations(r, 1, 2) for r in rows]


def test_crossing_scales():
    c = crossing_scales([1, 0, 0, 1, 1, 0], 0.2, 0.8)
    assert c.ups == (1, 4) and c.downs == (2, 6)


def test_average_examples():
    sys = finite_cyclic(4, support=[0])
    assert ergodic_average(sys, 0, FiniteSubset.interval(0, 3)) == Fraction(1, 4)
    one = finite_cyclic(5, [1] * 5)
    assert ergodic_average(one, 3, FiniteSubset(Z, [0, 7, -12])) == 1
    with pytest.raises(ValueError):
        ergodic_average(one, 0, FiniteSubset(Z, []))
    rot = irrational_rotation(math.sqrt(2) - 1)
    assert abs(ergodic_average(rot, 0.1, FiniteSubset.interval(0, 9999)) - 0.5) < 0.02


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-3, 3), min_size=1, max_size=12),
    st.lists(st.integers(-40, 40), min_size=1, max_size=15, unique=True),
    st.integers(0, 50),
    st.integers(-2, 2),
)
def test_cyclic_average_brute_force_and_affine(labels, elems, x, c):
    m = len(labels)
    sys = finite_cyclic(m, labels)
    f = FiniteSubset(Z, elems).with_runs()
    brute = Fraction(sum(labels[(x + g) % m] for g in elems), len(elems))
    got = ergodic_average(sys, x % m, f)
    assert got == brute
    assert min(labels) <= got <= max(labels)
    assert ergodic_average(sys.shifted(c), x % m, f) == got + c


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=4, max_size=16), st.integers(-3, 3))
def test_shift_reduction_pointwise(labels, c):
    sys = finite_cyclic(len(labels), labels)
    seq = builtin_sequence("intervals", 8)
    alpha, beta = Fraction(3, 2), Fraction(5, 2)
    pts = sys.enumerate_points()
    plain = fluctuation_counts(sys, pts, seq, alpha, beta, 8)
    moved = fluctuation_counts(sys.shifted(c), pts, seq, alpha + c, beta + c, 8)
    assert (plain == moved).all()


def test_action_law():
    rng = random.Random(3)
    cyc = finite_cyclic(13, list(range(13)))
    for _ in range(50):
        g, h, x = rng.randint(-30, 30), rng.randint(-30, 30), rng.randint(0, 12)
        assert cyc.act(g, cyc.act(h, x)) == cyc.act(h + g, x)
    rot = irrational_rotation()
    for _ in range(50):
        g, h, x = rng.randint(-30, 30), rng.randint(-30, 30), rng.random()
        d = abs(rot.act(g, rot.act(h, x)) - rot.act(h + g, x))
        assert min(d, 1 - d) < 1e-9
    bern = bernoulli_shift(H3, seed=5)
    key = int(bern.sample(1, 0, 1)[0])
    for _ in range(50):
        g = tuple(rng.randint(-3, 3) for _ in range(3))
        h = tuple(rng.randint(-3, 3) for _ in range(3))
        lhs = bern.act(g, bern.act(h, key))
        rhs = bern.act(H3.mul(h, g), key)
        assert bern.observe(lhs) == bern.observe(rhs)
        single = bern.window_sums(np.asarray([key], dtype=np.uint64), FiniteSubset(H3, [H3.mul(h, g)]))[0]
        assert bern.observe(rhs) == single


def test_bernoulli_marginals():
    sys = bernoulli_shift(Z, seed=1)
    keys = sys.sample(7, 0, 4000)
    f = FiniteSubset.interval(0, 63)
    mean = sys.window_sums(keys, f).sum() / (4000 * 64)
    assert abs(mean - 0.5) < 0.01
    skew = bernoulli_shift(lattice(2), probs=[Fraction(3, 4), Fraction(1, 4)], seed=2)
    box = FiniteSubset(lattice(2), itertools.product(range(8), repeat=2))
    mean = skew.window_sums(skew.sample(1, 0, 2000), box).sum() / (2000 * 64)
    assert abs(mean - 0.25) < 0.01


def test_uniform_stream_is_counter_based():
    a = uniforms(9, 0, 100)
    b = np.concatenate([uniforms(9, 0, 37), uniforms(9, 37, 63)])
    assert (a == b).all() and 0 <= a.min() and a.max() < 1


def test_exact_examples():
    sys = finite_cyclic(8, support=[0])
    seq = explicit_sequence([FiniteSubset(Z, [0]), FiniteSubset.interval(0, 7)])
    q = FluctuationQuery(Fraction(1, 20), Fraction(1, 2), 1, 2)
    brute = 0
    for x in range(8):
        vals = [Fraction(1 if x == 0 else 0), Fraction(1, 8)]
        brute += count_fluctuations(vals, q.alpha, q.beta) >= 1
    assert exact_mu_DN(sys, seq, q) == Fraction(brute, 8) == 0
    seq2 = explicit_sequence([FiniteSubset(Z, [0]), FiniteSubset(Z, [1])])
    assert exact_mu_DN(sys, seq2, q) == Fraction(1, 8)
    assert exact_mu_DN(sys, seq, FluctuationQuery(Fraction(1, 20), Fraction(1, 2), 0, 2)) == 1
    with pytest.raises(TypeError):
        exact_mu_DN(irrational_rotation(), seq, q)


def test_constant_observable_estimate_zero():
    sys = finite_cyclic(10, [1] * 10)
    seq = builtin_sequence("intervals", 5)
    rep = estimate_mu_DN(sys, seq, FluctuationQuery(Fraction(1, 2), 2, 1, 5), 500, 1)
    assert rep.estimate == 0 and rep.ci_low == 0


def test_estimates_cover_exact_cyclic():
    rng = random.Random(11)
    seq = builtin_sequence("intervals", 12)
    covered = 0
    for trial in range(20):
        sys = finite_cyclic(64, [rng.randint(0, 1) for _ in range(64)])
        q = FluctuationQuery(Fraction(2, 5), Fraction(3, 5), 1, 12)
        exact = exact_mu_DN(sys, seq, q)
        rep = estimate_mu_DN(sys, seq, q, 1000, trial)
        covered += rep.covers(exact)
        assert rep.ci_low <= rep.estimate <= rep.ci_high
    assert covered >= 18


def test_monotone_in_N_and_M():
    sys = bernoulli_shift(Z, seed=4)
    seq = builtin_sequence("intervals", 30)
    alpha, beta = Fraction(1, 3), Fraction(2, 3)
    short = sample_counts(sys, seq, alpha, beta, 10, 800, 2)
    long = sample_counts(sys, seq, alpha, beta, 30, 800, 2)
    assert (long >= short).all()
    reps = estimate_decay(sys, seq, alpha, beta, [0, 1, 2, 3, 4], 30, 800, 2)
    ests = [r.estimate for r in reps]
    assert ests == sorted(ests, reverse=True) and ests[0] == 1


def test_determinism_and_batches():
    sys = bernoulli_shift(Z, seed=4)
    seq = builtin_sequence("intervals", 10)
    a = sample_counts(sys, seq, Fraction(1, 3), Fraction(2, 3), 10, 500, 8, batch=64)
    b = sample_counts(sys, seq, Fraction(1, 3), Fraction(2, 3), 10, 500, 8, batch=500)
    assert (a == b).all()


def test_odometer_parity_exact_vs_estimate():
    sys = dyadic_odometer(10, lambda v: v % 2)
    seq = explicit_sequence([FiniteSubset(Z, [0]), FiniteSubset(Z, [0, 1]), FiniteSubset(Z, [1])])
    q = FluctuationQuery(Fraction(1, 4), Fraction(3, 4), 1, 3)
    exact = exact_mu_DN(sys, seq, q)
    # x even: 0, 1/2, 1 -> one fluctuation; x odd: 1, 1/2, 0 -> none
    assert exact == Fraction(1, 2)
    rep = estimate_mu_DN(sys, seq, q, 4000, 3)
    assert rep.covers(exact)


def test_orbit_crossings():
    sys = finite_cyclic(4, [0, 1, 0, 1])
    seq = explicit_sequence([FiniteSubset(Z, [0]), FiniteSubset(Z, [1]), FiniteSubset(Z, [2]), FiniteSubset(Z, [3])])
    c = orbit_crossings(sys, 0, seq, Fraction(1, 4), Fraction(3, 4), 4)
    assert c.ups == (2, 4) and c.downs == (3,)


def test_theorem_bound_reference():
    b = theorem_bound(1, 2, 2)
    assert b.delta == Fraction(1, 2) and b.eps == Fraction(1, 32)
    assert (2 - 8 * b.eps) * (1 - b.eps) >= Fraction(3, 2)
    assert (1 - b.eps) * Fraction(3, 2) >= Fraction(5, 4)
    assert 1 - b.eps >= Fraction(4, 5)
    assert not all(step_inequalities(1, 2, 2, 2 * b.eps, b.delta).values())
    assert b.q == math.ceil(20 / (b.eps / 2) ** 2) and b.lam == b.eps / 16
    assert b.c1 == Fraction(125, 64)


@pytest.mark.parametrize("seed", range(5))
def test_theorem_bound_symbolic(seed):
    rng = random.Random(seed)
    alpha = Fraction(rng.randint(1, 20), rng.randint(1, 10))
    beta = alpha + Fraction(rng.randint(1, 20), rng.randint(1, 10))
    S = beta + rng.randint(0, 5)
    b = theorem_bound(alpha, beta, S)
    d = sympy.Rational(b.delta.numerator, b.delta.denominator)
    assert sympy.Rational(b.c0_base.numerator, b.c0_base.denominator) ** sympy.Rational(-1, 2 * b.q) == (1 + d / 2) ** sympy.Rational(-1, 2 * b.q)
    assert sympy.Rational(b.c1.numerator, b.c1.denominator) == (1 + d / 2) ** 3
    assert abs(b.c0 - float((1 + d / 2) ** sympy.Rational(-1, 2 * b.q))) < 1e-15
    a, bb, s, e = (sympy.Rational(v.numerator, v.denominator) for v in (alpha, beta, S, b.eps))
    assert (bb - 4 * e * s) * (1 - e) / a >= 1 + d
    assert (1 - e) * (1 + d) >= 1 + d / 2
    assert 1 - e >= 1 / (1 + d / 2)
    assert b.delta == min((beta / alpha - 1) / 2, Fraction(1, 2))


def test_theorem_bound_errors_and_wrapper():
    with pytest.raises(ValueError):
        theorem_bound(2, 1, 3)
    with pytest.raises(ValueError):
        theorem_bound(1, 2, 1)
    with pytest.raises(NoFeasibleEpsilon):
        theorem_bound(1, Fraction(1001, 1000), 1000, max_k=5)
    w = theorem_bound_general(-1, 1, 2)
    assert (w.alpha, w.beta, w.S) == (1, 3, 4)
