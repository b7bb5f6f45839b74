"""Config-driven experiment runner: ``fluctlab <experiment> --config cfg.json --out DIR``.

Each run writes ``report.csv`` (fixed columns, see ``COLUMNS``) and
``summary.txt``.  Exit status: 0 all certified checks pass, 1 a certified
check failed, 2 the config is invalid, 3 the time budget ran out.
report.csv holds no timings, so reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import __version__
from .counterexample import (
    build_block_sequence,
    build_concatenated_foelner,
    run_counterexample,
    verify_property_a,
    verify_property_b,
    verify_property_c,
)
from .covering import epsilon_disjointify, certify_epsilon_disjoint, growth_step, vitali_select
from .dynamics import (
    FluctuationQuery,
    NoFeasibleEpsilon,
    bernoulli_shift,
    estimate_decay,
    exact_mu_DN,
    finite_cyclic,
    dyadic_odometer,
    irrational_rotation,
    orbit_crossings,
    step_inequalities,
    theorem_bound,
    theorem_bound_general,
)
from .foelner import builtin_sequence, is_lambda_good, tempered_report
from .groups import Z, FiniteSubset
from .textio import dump_selection, dump_stage, load_sequence

CSV_VERSION = "1"
COLUMNS = ["version", "experiment", "item", "index", "quantity", "exact", "decimal", "ci_low", "ci_high", "seed", "verdict"]
EXPERIMENTS = ["check-sequence", "cover", "decay-curve", "bound-constants", "counterexample", "proof-step"]
STOCHASTIC = {"decay-curve"}


class ConfigError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("fluctlab").joinpath("config.schema.json").read_text())


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message) from None
    if cfg["experiment"] in STOCHASTIC and "seed" not in cfg:
        raise ConfigError("%s is stochastic and needs a seed" % cfg["experiment"])
    gap = cfg.get("gap")
    if gap and not Fraction(gap["alpha"]) < Fraction(gap["beta"]):
        raise ConfigError("gap needs alpha < beta")


def fmt_exact(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return "%d/%d" % (x.numerator, x.denominator)
    return ""


def fmt_decimal(x) -> str:
    if x is None or x == "" or isinstance(x, bool):
        return ""
    return format(float(x), ".12g")


@dataclass
class Report:
    experiment: str
    seed: int | None
    rows: list[list[str]] = field(default_factory=list)
    checks: list[tuple[str, bool]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    extra_files: dict[str, str] = field(default_factory=dict)

    def add(self, item, quantity, value, *, index="", ci=None, seeded=False, verdict=""):
        exact = fmt_exact(value) if not isinstance(value, float) else ""
        lo, hi = ci if ci is not None else ("", "")
        self.rows.append([
            CSV_VERSION, self.experiment, str(item), str(index), quantity, exact, fmt_decimal(value),
            fmt_decimal(lo), fmt_decimal(hi), str(self.seed) if seeded else "", verdict,
        ])

    def check(self, name: str, ok: bool) -> bool:
        self.checks.append((name, bool(ok)))
        self.add("check", name, None, verdict="pass" if ok else "fail")
        return ok

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(self.rows)
        return buf.getvalue()


class Budget:
    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.monotonic()

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def check(self, where: str = "") -> None:
        if self.seconds is not None and self.elapsed > self.seconds:
            raise BudgetExceeded("budget of %gs exceeded %s" % (self.seconds, where))


# builders ------------------------------------------------------------------------

def build_sequence(spec: dict):
    kind = spec["kind"]
    if kind == "file":
        return load_sequence(Path(spec["path"]).read_text())
    if kind == "blocks":
        return build_block_sequence(Fraction(spec.get("lambda", 1)), spec["l"], spec["N"]).sequence()
    if kind == "concatenated":
        return build_concatenated_foelner(spec["l"], spec["N"], spec.get("stages", 2), Fraction(spec.get("lambda", 1))).sequence
    if "horizon" not in spec:
        raise ConfigError("sequence kind %s needs a horizon" % kind)
    return builtin_sequence(kind, spec["horizon"], dimension=spec.get("dimension", 1), base=spec.get("base"))


def dyadic_alternating(depth: int) -> list[int]:
    """1 on [2^(n-1), 2^n) for odd n (and at 0): dyadic averages from 0 keep alternating."""
    f = [0] * (1 << depth)
    for n in range(1, depth + 1):
        for t in range(1 << (n - 1), 1 << n):
            f[t] = n % 2
    f[0] = 1
    return f


def build_system(spec: dict, seed: int | None):
    kind = spec["kind"]
    if kind == "bernoulli":
        p = Fraction(spec.get("p", "1/2"))
        return bernoulli_shift(Z, (1 - p, p), seed=0)
    if kind == "finite_cyclic":
        labels = [Fraction(v) for v in spec["labels"]]
        return finite_cyclic(len(labels), labels)
    if kind == "rotation":
        return irrational_rotation(spec.get("theta", math.sqrt(2) - 1), tuple(spec.get("interval", (0.0, 0.5))))
    if kind == "odometer":
        labels = [Fraction(v) for v in spec["labels"]]
        depth = spec.get("depth", max(0, len(labels).bit_length() - 1))
        return dyadic_odometer(depth, labels)
    if kind == "dyadic_alternating":
        depth = spec.get("depth", 14)
        return finite_cyclic(1 << depth, dyadic_alternating(depth))
    raise ConfigError("unknown system %r" % kind)


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError("%s needs %s" % (cfg["experiment"], ", ".join(missing)))


def _gap(cfg: dict) -> tuple[Fraction, Fraction]:
    return Fraction(cfg["gap"]["alpha"]), Fraction(cfg["gap"]["beta"])


# decay fit -------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    c0: float
    c1: float
    residual: float
    points: int


def fit_decay(rows: Sequence[tuple[int, float]]) -> DecayFit:
    """Least squares fit of log(estimate) = log c1 + N log c0 over rows with positive estimates."""
    pts = [(n, float(e)) for n, e in rows if float(e) > 0]
    if len(pts) < 3:
        raise ValueError("need at least 3 rows with positive estimates")
    x = np.array([n for n, _ in pts], dtype=float)
    y = np.log(np.array([e for _, e in pts]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DecayFit(float(np.exp(slope)), float(np.exp(intercept)), resid, len(pts))


def fit_below_bound(fit: DecayFit, bound, Ns: Sequence[int]) -> bool:
    return all(fit.c1 * fit.c0 ** n <= bound.bound(n) * (1 + 1e-12) for n in Ns)


# experiments ------------------------------------------------------------------------

def run_check_sequence(cfg: dict, rep: Report, budget: Budget) -> None:
    _need(cfg, "sequence")
    seq = build_sequence(cfg["sequence"])
    sides = "left" if cfg["sequence"]["kind"] in ("blocks", "concatenated") else "both"
    tr = tempered_report(seq, sides=sides)
    budget.check("after temperedness")
    for n in sorted(tr.left):
        rep.add("tempered", "left_ratio", tr.left[n], index=n)
        if n in tr.right:
            rep.add("tempered", "right_ratio", tr.right[n], index=n)
    rep.add("tempered", "max_left", tr.max_left)
    if sides == "both":
        rep.add("tempered", "max_right", tr.max_right)
    rep.notes.append("horizon %d, max left ratio %s" % (seq.horizon, fmt_decimal(tr.max_left)))
    if "tempered_c" in cfg:
        rep.check("tempered at %s" % Fraction(cfg["tempered_c"]), tr.is_tempered(Fraction(cfg["tempered_c"]), sides))
    if "lambda_good" in cfg:
        good = is_lambda_good(seq, Fraction(cfg["lambda_good"]))
        rep.add("goodness", "first_violation", good.n if good.n is not None else None)
        rep.check("lambda-good at %s" % Fraction(cfg["lambda_good"]), good.good)


def _cover_centers(spec, rng: random.Random) -> list[int]:
    if isinstance(spec, list):
        return sorted(set(spec))
    if spec["high"] - spec["low"] + 1 < spec["count"]:
        raise ConfigError("center range smaller than count")
    return sorted(rng.sample(range(spec["low"], spec["high"] + 1), spec["count"]))


def run_cover(cfg: dict, rep: Report, budget: Budget) -> None:
    _need(cfg, "sequence", "cover")
    cov = cfg["cover"]
    if isinstance(cov["centers"], dict) and "seed" not in cfg:
        raise ConfigError("random centers need a seed")
    rng = random.Random(cfg.get("seed", 0))
    seq = build_sequence(cfg["sequence"])
    if seq.group is not Z:
        raise ConfigError("cover runs on Z sequences")
    eps = Fraction(cov["eps"])
    centers = _cover_centers(cov["centers"], rng)
    if cov["mode"] == "vitali":
        q = cov.get("scales_per_center", min(seq.horizon, math.ceil(20 / eps ** 2)))
        if q > seq.horizon:
            raise ConfigError("scales_per_center exceeds the sequence horizon")
        assignment = {c: sorted(rng.sample(range(1, seq.horizon + 1), q)) for c in centers}
        sel = vitali_select(seq, FiniteSubset(Z, centers), assignment, eps, check_preconditions=cov.get("check_preconditions", True))
        budget.check("after selection")
        cert = certify_epsilon_disjoint(sel.sets, eps)
        rep.add("selection", "outcome", None, verdict=sel.outcome)
        rep.add("selection", "pairs", len(sel.pairs))
        rep.add("selection", "union_size", sel.union_size)
        rep.add("selection", "centers", sel.center_count)
        rep.add("selection", "covered_centers", sel.covered_centers)
        rep.check("outcome is expansive or covering", sel.outcome in ("expansive", "covering"))
        rep.check("eps-disjoint certificate", cert.feasible)
        rep.extra_files["selection.txt"] = dump_selection(Z, eps, sel.outcome, sel.pairs, cert.witnesses or [])
        rep.notes.append("vitali selection: %s, %d pairs" % (sel.outcome, len(sel.pairs)))
    else:
        per_scale: list[list[int]] = [[] for _ in range(seq.horizon)]
        for c in centers:
            per_scale[rng.randrange(seq.horizon)].append(c)
        res = epsilon_disjointify(list(seq.sets), per_scale, eps)
        budget.check("after disjointification")
        cert = certify_epsilon_disjoint(res.family, eps)
        rep.add("disjointify", "selected", len(res.pairs))
        rep.add("disjointify", "union_size", res.union_size)
        rep.add("disjointify", "bound", res.bound)
        rep.check("eps-disjoint certificate", cert.feasible)
        rep.check("union >= eps/5 |C|", res.bound_ok)
        rep.extra_files["selection.txt"] = dump_selection(Z, eps, "disjointify", res.pairs, res.witnesses)
        rep.notes.append("disjointify: %d of %d centers kept" % (len(res.pairs), len(centers)))


def run_decay_curve(cfg: dict, rep: Report, budget: Budget) -> None:
    _need(cfg, "system", "sequence", "gap", "N", "samples")
    sysm = build_system(cfg["system"], cfg["seed"])
    seq = build_sequence(cfg["sequence"])
    alpha, beta = _gap(cfg)
    Ns = sorted(set(cfg["N"]))
    horizon = cfg.get("horizon", seq.horizon)
    ests = estimate_decay(sysm, seq, alpha, beta, Ns, horizon, cfg["samples"], cfg["seed"])
    budget.check("after sampling")
    for e in ests:
        rep.add("estimate", "mu_D_N", e.estimate, index=e.query.N, ci=(e.ci_low, e.ci_high), seeded=True)
    if cfg.get("exact"):
        for n in Ns:
            val = exact_mu_DN(sysm, seq, FluctuationQuery(alpha, beta, n, horizon))
            rep.add("exact", "mu_D_N", val, index=n)
            budget.check("during exact enumeration")
    values = [e.estimate for e in ests]
    rep.check("estimates non-increasing in N", all(a >= b for a, b in zip(values, values[1:])))
    if cfg.get("require_strict_decrease"):
        rep.check("estimates strictly decreasing in N", all(a > b for a, b in zip(values, values[1:])))
    try:
        fit = fit_decay([(n, v) for n, v in zip(Ns, values)])
    except ValueError as exc:
        rep.notes.append("no decay fit: %s" % exc)
        return
    rep.add("fit", "c0_hat", fit.c0)
    rep.add("fit", "c1_hat", fit.c1)
    rep.add("fit", "residual", fit.residual)
    rep.notes.append("fit c0=%s c1=%s residual=%s over %d points" % (fmt_decimal(fit.c0), fmt_decimal(fit.c1), fmt_decimal(fit.residual), fit.points))
    try:
        if alpha > 0:
            bound = theorem_bound(alpha, beta, max(beta, sysm.bound))
        else:
            bound = theorem_bound_general(alpha, beta, sysm.bound)
    except (ValueError, NoFeasibleEpsilon) as exc:
        rep.notes.append("no theorem constants: %s" % exc)
        return
    positive = [n for n, v in zip(Ns, values) if v > 0]
    rep.add("fit", "theorem_c0", bound.c0)
    rep.check("fit below theorem bound", fit_below_bound(fit, bound, positive))


def run_bound_constants(cfg: dict, rep: Report, budget: Budget) -> None:
    _need(cfg, "gap")
    alpha, beta = _gap(cfg)
    try:
        if "sup_norm" in cfg:
            b = theorem_bound_general(alpha, beta, Fraction(cfg["sup_norm"]))
        else:
            b = theorem_bound(alpha, beta, Fraction(cfg.get("S", beta)))
    except NoFeasibleEpsilon as exc:
        rep.notes.append(str(exc))
        rep.check("feasible eps", False)
        return
    for name in ("alpha", "beta", "S", "delta", "eps", "q", "lam", "c1"):
        rep.add("constants", name, getattr(b, name))
    rep.add("constants", "c0", b.c0)
    rep.add("constants", "c0_base", b.c0_base)
    rep.add("constants", "c0_exponent", b.c0_exponent)
    for n in cfg.get("N", []):
        rep.add("bound", "c1_c0_pow_N", b.bound(n), index=n)
    ineq = step_inequalities(b.alpha, b.beta, b.S, b.eps, b.delta)
    for name, ok in ineq.items():
        rep.check("inequality %s" % name, ok)
    rep.check("q >= 20/(eps/2)^2", b.q >= 20 / (b.eps / 2) ** 2)
    rep.notes.append("delta=%s eps=%s q=%d c1=%s c0=%s" % (b.delta, b.eps, b.q, b.c1, fmt_decimal(b.c0)))


def run_counterexample_exp(cfg: dict, rep: Report, budget: Budget) -> None:
    if "blocks" not in cfg and "stages" not in cfg:
        raise ConfigError("counterexample needs blocks and/or stages")
    if "blocks" in cfg:
        bc = cfg["blocks"]
        b = build_block_sequence(Fraction(bc["lambda"]), bc["l"], bc["N"])
        pa = verify_property_a(b)
        for n, r in pa.values.items():
            rep.add("property_a", "left_ratio", r, index=n)
        rep.check("property (a): (1+lambda)-tempered", pa.passed)
        pb = verify_property_b(b)
        for n, r in pb.values.items():
            rep.add("property_b", "max_symdiff_ratio", r, index=n)
        rep.check("property (b): invariance <= 2/sqrt(l)", pb.passed)
        budget.check("after properties a, b")
        if bc.get("check_c"):
            ok = True
            for k in bc.get("shifts", [0]):
                for i in bc.get("offsets", [0]):
                    pc = verify_property_c(b, i, k)
                    rep.add("property_c", "count", pc.detail["count"], index="i=%d;k=%d" % (i, k))
                    ok = ok and pc.passed
            rep.add("property_c", "separated", None, verdict=str(pc.detail["separated"]).lower())
            rep.check("property (c): bounds and N fluctuations", ok)
            budget.check("after property c")
    if "stages" in cfg:
        sc = cfg["stages"]
        ratio, scale = Fraction(sc.get("omega_ratio", "1/2")), Fraction(sc.get("omega_scale", 1))
        out = run_counterexample(
            lambda n: scale * ratio ** n, sc["K"], Fraction(sc.get("lambda", 1)), sc.get("l0", 16),
            sc.get("block_pairs", 2), depth_budget=sc.get("depth_budget", 62),
        )
        budget.check("after stages")
        for s in out.stages:
            rep.add("stage", "depth", s.depth, index=s.stage)
            rep.add("stage", "r", s.r, index=s.stage)
            rep.add("stage", "eps", s.eps, index=s.stage)
            rep.add("stage", "disagreement_bound", s.disagreement_bound, index=s.stage)
            for name, ok in (("1", s.conclusion1), ("2", s.conclusion2), ("3", s.conclusion3)):
                rep.check("stage %d conclusion (%s)" % (s.stage, name), ok)
        for row in out.rows:
            rep.add("decay", "mu_D_N_k", row["mu"], index="k=%d;N=%d" % (row["stage"], row["N"]))
            rep.add("decay", "bound", row["bound"], index=row["stage"])
            rep.add("decay", "tolerance", row["tolerance"], index=row["stage"], verdict="pass" if row["pass"] else "fail")
            rep.check("stage %d: mu(D_N) > 2^-k/10 - tol" % row["stage"], row["pass"])
        rep.check("construction feasible", out.feasible)
        if out.failure:
            rep.notes.append(out.failure)
        if out.final is not None:
            rep.extra_files["stage.txt"] = dump_stage(out.final)
        rep.notes.append("N_k = %s, desk mode, tolerance %s" % (out.Ns, out.tolerance))


def run_proof_step(cfg: dict, rep: Report, budget: Budget) -> None:
    _need(cfg, "system", "sequence", "gap", "step")
    sysm = build_system(cfg["system"], cfg.get("seed"))
    seq = build_sequence(cfg["sequence"])
    alpha, beta = _gap(cfg)
    st = cfg["step"]
    horizon = cfg.get("horizon", seq.horizon)
    orbit = {c: orbit_crossings(sysm, c, seq, alpha, beta, horizon) for c in st["centers"]}
    current = [(c, orbit[c].ups[0]) for c in st["centers"] if orbit[c].ups]
    res = growth_step(
        seq, orbit, current, alpha, beta, Fraction(st.get("S", 1)), Fraction(st["eps"]), Fraction(st["delta"]), st["q"],
        check_constants=st.get("check_constants", True), strict=st.get("strict", True),
    )
    budget.check("after growth step")
    rep.add("step", "size_before", res.size_before)
    rep.add("step", "size_intermediate", res.size_intermediate)
    rep.add("step", "size_after", res.size_after)
    rep.add("step", "ratio", res.ratio)
    rep.add("step", "outcomes", None, verdict="/".join(res.outcomes))
    rep.check("crossing index", res.crossing_ok)
    rep.check("eps-disjoint", res.disjoint_ok)
    rep.check("growth >= 1 + delta/2", res.growth_ok)


RUNNERS = {
    "check-sequence": run_check_sequence,
    "cover": run_cover,
    "decay-curve": run_decay_curve,
    "bound-constants": run_bound_constants,
    "counterexample": run_counterexample_exp,
    "proof-step": run_proof_step,
}


def run(cfg: dict, out: Path, budget_seconds: float | None = None) -> int:
    validate_config(cfg)
    budget = Budget(budget_seconds if budget_seconds is not None else cfg.get("budget_seconds"))
    rep = Report(cfg["experiment"], cfg.get("seed"))
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    try:
        RUNNERS[cfg["experiment"]](cfg, rep, budget)
        budget.check("at the end")
        status = 0 if rep.passed else 1
    except BudgetExceeded as exc:
        rep.notes.append(str(exc))
        status = 3
    summary = [
        "fluctlab %s  %s" % (__version__, cfg["experiment"]),
        "config: %s" % json.dumps(cfg, sort_keys=True),
        "seed: %s" % cfg.get("seed", "none"),
        "status: %s" % {0: "ok", 1: "certified check failed", 3: "budget exceeded"}[status],
    ]
    summary += ["check %-4s %s" % ("pass" if ok else "FAIL", name) for name, ok in rep.checks]
    summary += ["note: %s" % n for n in rep.notes]
    summary.append("wall time: %.3fs" % budget.elapsed)
    if status != 3:
        (out / "report.csv").write_text(rep.csv_text())
        for name, text in rep.extra_files.items():
            (out / name).write_text(text)
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fluctlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--budget-seconds", type=float)
    args = parser.parse_args(argv)
    try:
        cfg = json.loads(args.config.read_text())
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg.setdefault("experiment", args.experiment)
        if cfg["experiment"] != args.experiment:
            raise ConfigError("config is for %s, not %s" % (cfg["experiment"], args.experiment))
        if args.seed is not None:
            cfg["seed"] = args.seed
        return run(cfg, args.out, args.budget_seconds)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
