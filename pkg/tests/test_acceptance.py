"""Acceptance criteria, each at its stated tolerance; one verdict line per criterion."""

import itertools
import json
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy

from fluctlab.cli import main
from fluctlab.counterexample import (
    build_block_sequence,
    build_concatenated_foelner,
    run_counterexample,
    verify_property_a,
    verify_property_b,
    verify_property_c,
)
from fluctlab.covering import certify_epsilon_disjoint, epsilon_disjointify, vitali_select
from fluctlab.dynamics import (
    FluctuationQuery,
    bernoulli_shift,
    count_fluctuations,
    estimate_decay,
    estimate_mu_DN,
    exact_mu_DN,
    finite_cyclic,
    step_inequalities,
    theorem_bound,
)
from fluctlab.foelner import builtin_sequence, is_lambda_good, tempered_report
from fluctlab.groups import FiniteSubset, Z

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_criterion_01_block_properties(criterion):
    start = time.monotonic()
    failures = []
    for lam, l, N in itertools.product([Fraction(1, 2), Fraction(1)], [16, 64, 256], [2, 4]):
        b = build_block_sequence(lam, l, N)
        a, bb = verify_property_a(b), verify_property_b(b)
        if not (a.passed and bb.passed):
            failures.append((lam, l, N, a.passed, bb.passed))
    elapsed = time.monotonic() - start
    ok = not failures and elapsed < 60
    criterion(1, ok, "12 parameter sets, failures=%s, %.2fs" % (failures, elapsed))
    assert ok


def test_criterion_02_property_c(criterion):
    b = build_block_sequence(1, 256, 4)
    bad = []
    for k in (0, 1):
        for i in range(65):
            rep = verify_property_c(b, i, k)
            if not rep.passed:
                bad.append((i, k, rep.detail["count"], rep.detail["bounds_ok"]))
    ok = not bad
    criterion(2, ok, "%d of 130 (i, k) fail; first %s (i, k, count, bounds_ok)" % (len(bad), bad[:2]))
    assert ok


def vitali_instance(seed):
    rng = random.Random(seed)
    base = rng.choice([32, 48, 64])
    horizon = rng.randint(80, 88)
    width = rng.choice([10, 1000, 10 ** 6, base ** 40])
    centers = sorted(set(rng.randrange(-width, width + 1) for _ in range(rng.randint(1, 12))))
    assignment = {c: sorted(rng.sample(range(1, horizon + 1), 80)) for c in centers}
    return base, horizon, centers, assignment


def test_criterion_03_covering_dichotomy(criterion):
    eps = Fraction(1, 2)
    seqs = {}
    failures = []
    for seed in range(500):
        base, horizon, centers, assignment = vitali_instance(seed)
        key = (base, horizon)
        if key not in seqs:
            seqs[key] = builtin_sequence("powers", horizon, base=base)
            assert is_lambda_good(seqs[key], Fraction(1, 16))
        sel = vitali_select(seqs[key], FiniteSubset(Z, centers), assignment, eps)
        if sel.outcome == "postcondition-failed" or not certify_epsilon_disjoint(sel.sets, eps):
            failures.append(seed)
    ok = not failures
    criterion(3, ok, "500 instances, q=80, eps=1/2, lambda=1/16; failures=%s" % failures[:5])
    assert ok


def disjointify_instance(seed):
    rng = random.Random(seed)
    kind = rng.choice(["powers", "intervals", "boxes"])
    L = rng.randint(1, 6)
    seq = builtin_sequence(kind, L, base=rng.choice([2, 3, 4]) if kind == "powers" else None)
    centers = [[] for _ in range(L)]
    for c in rng.sample(range(-300, 300), rng.randint(1, 60)):
        centers[rng.randrange(L)].append(c)
    eps = rng.choice([Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 10)])
    return list(seq.sets), centers, eps


def test_criterion_04_disjointify(criterion):
    failures = []
    for seed in range(200):
        scales, centers, eps = disjointify_instance(seed)
        res = epsilon_disjointify(scales, centers, eps)
        total = sum(len(c) for c in centers)
        if not (certify_epsilon_disjoint(res.family, eps) and res.union_size >= eps / 5 * total):
            failures.append(seed)
    ok = not failures
    criterion(4, ok, "200 instances; failures=%s" % failures[:5])
    assert ok


def exhaustive_count(values, alpha, beta):
    """Largest N over every index subset reading low, high, low, high, ..."""
    best = 0
    n = len(values)
    for mask in range(1 << n):
        picked = [values[j] for j in range(n) if mask >> j & 1]
        if len(picked) % 2 or len(picked) // 2 <= best:
            continue
        if all(v <= alpha for v in picked[0::2]) and all(v >= beta for v in picked[1::2]):
            best = len(picked) // 2
    return best


def test_criterion_05_fluctuation_oracle(criterion):
    rng = random.Random(2026)
    grid = [Fraction(k, 8) for k in range(9)]
    mismatches = 0
    for _ in range(10 ** 4):
        a, b = sorted(rng.sample(grid, 2))
        values = [rng.choice(grid) for _ in range(rng.randint(0, 10))]
        if count_fluctuations(values, a, b) != exhaustive_count(values, a, b):
            mismatches += 1
    criterion(5, mismatches == 0, "10^4 sequences, %d mismatches" % mismatches)
    assert mismatches == 0


def test_criterion_06_monte_carlo_vs_exact(criterion):
    rng = random.Random(6)
    covered = nontrivial = 0
    for trial in range(100):
        m = rng.randint(1, 256)
        sys = finite_cyclic(m, [rng.randint(0, 1) for _ in range(m)])
        seq = builtin_sequence("intervals", rng.randint(4, 12))
        alpha = Fraction(rng.randint(3, 5), 10)
        q = FluctuationQuery(alpha, alpha + Fraction(rng.randint(1, 2), 10), rng.randint(1, 2), seq.horizon)
        exact = exact_mu_DN(sys, seq, q)
        nontrivial += 0 < exact < 1
        covered += estimate_mu_DN(sys, seq, q, 1000, seed=trial).covers(exact)
    ok = covered >= 93
    criterion(6, ok, "Wilson 95%% CI covers exact value in %d/100 configurations (%d with 0 < mu < 1)" % (covered, nontrivial))
    assert ok


def test_criterion_07_constants(criterion):
    b = theorem_bound(1, 2, 2)
    ineq = step_inequalities(b.alpha, b.beta, b.S, b.eps, b.delta)
    delta, q = sympy.Rational(1, 2), sympy.Integer(b.q)
    c0 = sympy.Rational(b.c0_base.numerator, b.c0_base.denominator) ** sympy.Rational(b.c0_exponent.numerator, b.c0_exponent.denominator)
    c0_ok = sympy.simplify(c0 - (1 + delta / 2) ** (-1 / (2 * q))) == 0 and abs(float(c0) - b.c0) < 1e-15
    c1_ok = sympy.Rational(b.c1.numerator, b.c1.denominator) == (1 + delta / 2) ** 3
    ok = b.delta == Fraction(1, 2) and all(ineq.values()) and c0_ok and c1_ok and b.q >= 20 / (b.eps / 2) ** 2
    criterion(7, ok, "delta=%s eps=%s q=%d c1=%s c0=%.10f inequalities=%s" % (b.delta, b.eps, b.q, b.c1, b.c0, ineq))
    assert ok


def test_criterion_08_empirical_decay(criterion):
    start = time.monotonic()
    sys = bernoulli_shift(Z, (Fraction(1, 2), Fraction(1, 2)), (0, 1))
    seq = builtin_sequence("powers", 6, base=4)
    ests = estimate_decay(sys, seq, Fraction(2, 5), Fraction(3, 5), [0, 1, 2, 3], 6, 10 ** 4, seed=8)
    mu = [e.estimate for e in ests]
    elapsed = time.monotonic() - start
    strict = all(x > y for x, y in zip(mu, mu[1:]))
    ok = strict and mu[3] < mu[1] / 2 and elapsed < 300
    criterion(8, ok, "estimates N=0..3: %s (strictly decreasing: %s), %.1fs" % (mu, strict, elapsed))
    assert ok


def test_criterion_09_counterexample_stages(criterion):
    rep = run_counterexample(lambda n: Fraction(1, 2 ** n), 2, 1, 16, 2)
    rows = {r["stage"]: r for r in rep.rows}
    values = {k: float(r["mu"]) for k, r in rows.items()}
    ok = (
        rep.feasible
        and len(rep.stages) == 2
        and all(s.ok for s in rep.stages)
        and rep.tolerance < Fraction(1, 100)
        and all(k in rows and rows[k]["mu"] > Fraction(1, 10 * 2 ** k) - rep.tolerance for k in (1, 2))
    )
    criterion(9, ok, "N_k=%s mu=%s tol=%s failure=%s" % (rep.Ns, values, float(rep.tolerance), rep.failure))
    assert ok


def test_criterion_10_concatenation(criterion):
    c = build_concatenated_foelner(16, 2, 2, 1)
    rep = tempered_report(c.sequence, sides="left")
    ok = rep.is_tempered(2, "left")
    criterion(10, ok, "%d sets, max left ratio %s <= 1 + lambda = 2" % (len(c.sequence), float(rep.max_left)))
    assert ok


def test_criterion_11_reproducibility(criterion, tmp_path):
    differing = []
    for path in sorted(CONFIGS.glob("*.json")):
        cfg = json.loads(path.read_text())
        outs = []
        for run in ("a", "b"):
            out = tmp_path / path.stem / run
            main([cfg["experiment"], "--config", str(path), "--out", str(out)])
            outs.append((out / "report.csv").read_bytes())
        if outs[0] != outs[1]:
            differing.append(path.stem)
    ok = not differing
    criterion(11, ok, "shipped configs rerun byte-identically; differing=%s" % differing)
    assert ok
