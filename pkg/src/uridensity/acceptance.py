"""The twelve acceptance criteria with their tolerances, runnable from the CLI and pytest.

Every criterion uses fixed seeds, so its report is deterministic; runtimes and
memory peaks are reported as booleans against their limits (the measured
figures go to the optional ``echo`` callback, not into the report).
"""

from __future__ import annotations

import math
import tempfile
import time
import tracemalloc
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import densities, hinf, local, markov, multibase, poisson, predicates, sampler
from ._numeric import accurate_sum
from .rng import RngStream

LOG10_2 = math.log10(2.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        body = "; ".join(f"{name}: {detail}" + ("" if ok else " [failed]") for name, ok, detail in self.checks)
        return f"[{status}] {self.number:2d} {self.title}: {body}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in self.checks],
        }


class _Checks:
    def __init__(self, echo: Callable[[str], None] | None):
        self.items: list[tuple[str, bool, str]] = []
        self.echo = echo

    def add(self, name: str, ok: bool, detail: str) -> None:
        self.items.append((name, bool(ok), detail))

    def timed(self, name: str, seconds: float, limit: float) -> None:
        if self.echo:
            self.echo(f"    {name}: {seconds:.2f} s (limit {limit:g} s)")
        self.add(name, seconds < limit, f"< {limit:g} s")


def _g(x: float) -> str:
    return f"{x:.6g}"


# -- 1, 2 ---------------------------------------------------------------------

SEEDS = tuple(range(1, 11))


def _seed_sweep(A, target: float, tol: float, ck: _Checks) -> list[float]:
    vals = [densities.uri_density_mc(A, 5000, 40, seed=s).value for s in SEEDS]
    worst = max(abs(v - target) for v in vals)
    ck.add("max |estimate - target| over 10 seeds", worst <= tol, f"{_g(worst)} <= {tol}")
    return vals


def criterion_1(ck: _Checks) -> None:
    t0 = time.perf_counter()
    _seed_sweep(predicates.leading_digit(1), LOG10_2, 0.02, ck)
    ck.timed("runtime", time.perf_counter() - t0, 120.0)


def criterion_2(ck: _Checks) -> None:
    _seed_sweep(predicates.multiples_of(3), 1.0 / 3.0, 0.02, ck)


# -- 3, 4 ---------------------------------------------------------------------

def _histogram(values: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Frequencies on ``lo..hi`` plus one overflow cell for values above ``hi``."""
    v = np.minimum(values, hi + 1) - lo
    return np.bincount(v, minlength=hi - lo + 2) / values.size


def criterion_3(ck: _Checks) -> None:
    draws = 10**6
    rng = RngStream(3, 0)
    gaps = np.fromiter((sampler.next_gap(1, rng) for _ in range(draws)), dtype=np.int64, count=draws)
    firsts = []
    brng = RngStream(3, 1)
    for _ in range(draws // 10**5):
        mem = sampler.bernoulli_membership(100, 10**5, brng)[:, 1:]
        hit = mem.any(axis=1)
        # first member after 1; 101 marks "beyond 100"
        firsts.append(np.where(hit, mem.argmax(axis=1) + 2, 101))
    bern = np.concatenate(firsts)
    tv = 0.5 * np.abs(_histogram(gaps, 2, 100) - _histogram(bern, 2, 100)).sum()
    ck.add("TV(next_gap(1), Bernoulli first element after 1) on {2..100}", tv < 0.005, f"{_g(tv)} < 0.005")


def criterion_4(ck: _Checks) -> None:
    reps, n = 10**6, 10
    rng = RngStream(4, 0)
    counts = np.zeros(n + 1, dtype=np.int64)
    for _ in range(reps // 10**5):
        mem = sampler.bernoulli_membership(n, 10**5, rng)
        top = n - np.argmax(mem[:, ::-1], axis=1)
        counts += np.bincount(top, minlength=n + 1)
    dev = float(np.abs(counts[1:] / reps - 1.0 / n).max())
    ck.add("max cell deviation of max(E ∩ {1..10}) from 1/10", dev < 0.005, f"{_g(dev)} < 0.005")


# -- 5 ------------------------------------------------------------------------

def criterion_5(ck: _Checks) -> None:
    reps = 10**5
    for k in (5, 10, 15, 20):
        cdf = markov.chain_distribution(1.0, k, reps, RngStream(5, k))
        d = markov.grid_distance(cdf)
        bound = 0.9**k + 0.01
        ck.add(f"k={k} grid distance", d <= bound, f"{_g(d)} <= {_g(bound)}")
    cdf = markov.chain_distribution("benford", 1, reps, RngStream(5, 100))
    ks = markov.kolmogorov_distance(cdf)
    ck.add("one-step invariance, Kolmogorov distance", ks < 0.01, f"{_g(ks)} < 0.01")


# -- 6 ------------------------------------------------------------------------

def criterion_6(ck: _Checks) -> None:
    t0 = time.perf_counter()
    tab = densities.flehinger_table(predicates.leading_digit(1), 10**6, 8, keep=(1, 8))
    lo1, hi1 = tab.decade_extremes(1, 10**5, 10**6)
    lo8, hi8 = tab.decade_extremes(8, 10**5, 10**6)
    elapsed = time.perf_counter() - t0
    tol = 0.9**8 + 0.005
    dev = max(abs(hi8 - LOG10_2), abs(lo8 - LOG10_2))
    ck.add("k=8 extremes within (9/10)^8 + 0.005 of log10 2", dev <= tol,
           f"max {_g(hi8)}, min {_g(lo8)}, deviation {_g(dev)} <= {_g(tol)}")
    ratio = (hi1 - lo1) / (hi8 - lo8)
    ck.add("spread contraction k=1 -> k=8", ratio >= 5, f"{_g(hi1 - lo1)} / {_g(hi8 - lo8)} = {_g(ratio)} >= 5")
    ck.timed("runtime", elapsed, 30.0)


# -- 7 ------------------------------------------------------------------------

def criterion_7(ck: _Checks) -> None:
    n_trunc = 10**7
    worst_mass = worst_id = 0.0
    for row in local.pmf_rows(10, n_trunc):
        if row.k < 2:
            continue
        mass = accurate_sum(row.values)
        oracle = 1.0 - local.count_tail_probability(row.k, n_trunc)
        worst_mass = max(worst_mass, abs(mass - oracle))
        worst_id = max(worst_id, abs(mass + row.tail_mass - 1.0))
    ck.add("(a) row mass vs 1 - closed-form tail, k<=10, n_trunc=1e7", worst_mass <= 1e-9,
           f"{_g(worst_mass)} <= 1e-9")
    ck.add("(a) mass + tail_mass = 1", worst_id <= 1e-12, f"{_g(worst_id)} <= 1e-12")

    rows = list(local.pmf_rows(10, 200))
    diff = max(abs(r.p(n) - local.pmf_explicit(r.k, n)) for r in rows[1:] for n in range(r.k, 201))
    ck.add("(b) recursion vs explicit formula, k<=10, n<=200", diff <= 1e-12, f"{_g(diff)} <= 1e-12")

    bad = [r.k for r in local.pmf_rows(20, 10**6) if r.k >= 3 and not local.mode_and_unimodality(r)[1]]
    ck.add("(c) unimodal rows 3<=k<=20 at n_trunc=1e6", not bad, "all unimodal" if not bad else f"k={bad}")

    rep = local.f_ratio_check(30, 2000)
    ck.add("(d) f-ratio sandwich bounds, k<=30, n<=2000", rep["bound_violations"] == 0 and rep["entries"] > 0,
           f"{rep['bound_violations']} violations in {rep['entries']} entries")

    F = local.f_ratio(5, 6)
    spots = {
        "P_2(5)": (local.pmf_row(2, 5).p(5), 1 / 20),
        "P_3(3)": (local.pmf_row(3, 3).p(3), 1 / 6),
        "f_4(3)": (F[3, 4], 1.0),
        "f_6(5)": (F[5, 6], 6.0),
    }
    exact_ok = (local.pmf_explicit(2, 5, exact=True) == Fraction(1, 20)
                and local.pmf_explicit(3, 3, exact=True) == Fraction(1, 6))
    spot_ok = exact_ok and all(abs(v - t) <= 1e-15 * max(1.0, t) for v, t in spots.values())
    ck.add("(e) spot values", spot_ok, ", ".join(f"{k}={_g(v)}" for k, (v, _) in spots.items()))


# -- 8 ------------------------------------------------------------------------

def criterion_8(ck: _Checks) -> None:
    tracemalloc.start()
    t0 = time.perf_counter()
    try:
        row = local.pmf_row(10, 10**7)
        est = local.local_probability(row, predicates.mantissa_in(1, 2))
        elapsed = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    renorm = local.renormalized(est, row)
    ck.add("tail mass", row.tail_mass < 0.05, f"{_g(row.tail_mass)} < 0.05")
    ck.add("renormalized P(M(N_10) in [1,2))", abs(renorm - LOG10_2) <= 0.02,
           f"{_g(renorm)}, |diff| {_g(abs(renorm - LOG10_2))} <= 0.02")
    ck.timed("runtime", elapsed, 60.0)
    if ck.echo:
        ck.echo(f"    traced peak memory: {peak / 1e6:.1f} MB (limit 200 MB)")
    ck.add("traced peak memory", peak < 200e6, "< 200 MB")


# -- 9 ------------------------------------------------------------------------

def nu_hat_grid_error() -> float:
    import itertools

    worst = 0.0
    for bases in ((2, 3), (2, 3, 5)):
        for m in itertools.product(range(-5, 6), repeat=len(bases)):
            if abs(multibase.theta(m, bases)) <= 10:
                worst = max(worst, abs(multibase.nu_hat(m, bases) - multibase.nu_hat_quadrature(m, bases)))
    return worst


def criterion_9(ck: _Checks) -> None:
    fam = multibase.BaseFamily((2, 3), (Fraction(3, 2), 2))
    res = multibase.factorization_test(fam, 5000, 40, seed=9)
    joint = res["joint"].value
    ck.add("joint estimate vs 0.3691", abs(joint - 0.3691) <= 0.02, f"{_g(joint)}, |diff| {_g(abs(joint - 0.3691))}")
    diff, se = abs(res["difference"]), res["combined_se"]
    ck.add("|joint - m1*m2| <= 3 SE", diff <= 3 * se, f"{_g(diff)} <= {_g(3 * se)}")
    err = nu_hat_grid_error()
    ck.add("closed form vs quadrature, |m_i|<=5, |theta|<=10", err <= 1e-9, f"{_g(err)} <= 1e-9")
    v = multibase.mult_independence_check((2, 8))
    w = v.witness
    holds = w is not None and Fraction(2) ** w[0] * Fraction(8) ** w[1] == 1
    ck.add("(2,8) dependent with witness", v.status == "dependent" and holds, v.describe((2, 8)))


# -- 10 -----------------------------------------------------------------------

def criterion_10(ck: _Checks) -> None:
    samples = 10**5
    rng = RngStream(10, 0)
    in2 = np.empty(samples, dtype=bool)
    counts = np.empty(samples)
    for i in range(samples):
        s = poisson.sample_process(1.0, 10.0, rng)
        in2[i] = 2 in poisson.derive_uri(s)
        counts[i] = len(s)
    p2 = float(in2.mean())
    ck.add("derived P(2 in E)", abs(p2 - 0.5) <= 0.005, f"{_g(p2)}, |diff| {_g(abs(p2 - 0.5))} <= 0.005")
    s3, s6 = poisson.double_occupancy_series(10**3), poisson.double_occupancy_series(10**6)
    ck.add("double-occupancy sums 1e3 vs 1e6", abs(s6 - s3) < 0.002, f"{_g(abs(s6 - s3))} < 0.002")
    mc = float(counts.mean())
    ck.add("mean count on (1,10]", abs(mc - math.log(10)) <= 0.02, f"{_g(mc)} vs {_g(math.log(10))}")


# -- 11 -----------------------------------------------------------------------

def criterion_11(ck: _Checks) -> None:
    A = predicates.leading_digit(1)
    tab = densities.flehinger_table(A, 10**4, 3)
    worst = 0.0
    ok = True
    for i, n in enumerate((10**2, 10**3, 10**4)):
        for k in (1, 2, 3):
            est = hinf.hinf_mc(A, n, k, 10**5, RngStream(11, 3 * i + k))
            z = abs(est.value - tab.value(n, k)) / est.error_bound
            worst = max(worst, z)
            ok &= z <= 3
    ck.add("hinf_mc vs exact P_n^k on {1e2,1e3,1e4}x{1,2,3}", ok, f"max |z| {_g(worst)} <= 3")
    est = hinf.hinf_mc(predicates.finite_set([1]), 2, 2, 10**5, RngStream(11, 0))
    z = abs(est.value - 0.75) / est.error_bound
    ck.add("P(Y~_2 = 1 | n=2) = 3/4", z <= 3, f"{_g(est.value)}, |z| {_g(z)} <= 3")


# -- 12 -----------------------------------------------------------------------

REPRO_RUNS: dict[str, list[str]] = {
    "sample": ["sample", "--seed", "12", "--count", "50"],
    "benford": ["benford", "--seed", "12", "--digit", "1", "--elems", "300", "--reps", "4"],
    "flehinger": ["flehinger", "--digit", "1", "--nmax", "20000", "--kmax", "3", "--stride", "7"],
    "logdensity": ["logdensity", "--seed", "12", "--digit", "1", "--n", "1000,10000", "--gap-reps", "3"],
    "localpmf": ["localpmf", "--k", "5", "--ntrunc", "5000", "--stride", "13"],
    "localpmf-json": ["localpmf", "--k", "5", "--ntrunc", "5000", "--digit", "1", "--format", "json"],
    "multibase": ["multibase", "--seed", "12", "--bases", "2,3", "--thresholds", "1.5,2", "--elems", "300",
                  "--reps", "4"],
    "coupling": ["coupling", "--seed", "12", "--samples", "300", "--nmax-large", "10000"],
    "hinf": ["hinf", "--seed", "12", "--n", "100,1000", "--k", "1,2", "--reps", "2000"],
    "acceptance": ["acceptance", "--only", "11", "--format", "json"],
}


def reproducibility_check(runs: dict[str, list[str]] | None = None) -> dict[str, bool]:
    """Run each command twice, and once more from its saved config; compare bytes."""
    from . import cli
    from .output import RunConfig, sidecar_path

    runs = REPRO_RUNS if runs is None else runs
    out: dict[str, bool] = {}
    with tempfile.TemporaryDirectory() as tmp:
        for name, argv in runs.items():
            blobs = []
            for rep in range(2):
                path = Path(tmp) / f"{name}.{rep}.out"
                cfg = cli.config_from_args(cli.build_parser().parse_args(argv + ["--out", str(path)]))
                cli.run(cfg)
                blobs.append(path.read_bytes())
                side = sidecar_path(path).read_bytes()
                again = RunConfig.load(sidecar_path(path))
                blobs.append(side.replace(str(path).encode(), b"<out>"))
            again.out = str(Path(tmp) / f"{name}.replay.out")
            cli.run(again)
            replay = Path(again.out).read_bytes()
            out[name] = blobs[0] == blobs[2] and blobs[1] == blobs[3] and replay == blobs[0] and len(blobs[0]) > 0
    return out


def criterion_12(ck: _Checks) -> None:
    res = reproducibility_check()
    bad = [k for k, ok in res.items() if not ok]
    ck.add("byte-identical re-runs and config replays", not bad,
           f"{len(res) - len(bad)}/{len(res)} commands identical" + (f", differing: {bad}" if bad else ""))


CRITERIA: dict[int, tuple[str, Callable[[_Checks], None]]] = {
    1: ("Benford via URI-density", criterion_1),
    2: ("natural density implies URI-density", criterion_2),
    3: ("gap sampler vs Bernoulli sampler", criterion_3),
    4: ("uniform maximum property", criterion_4),
    5: ("mantissa chain contraction", criterion_5),
    6: ("Flehinger bracketing", criterion_6),
    7: ("local-density recursion", criterion_7),
    8: ("local Benford", criterion_8),
    9: ("multibase", criterion_9),
    10: ("Poisson coupling", criterion_10),
    11: ("backward chain vs Flehinger", criterion_11),
    12: ("reproducibility", criterion_12),
}


def run_criterion(number: int, echo: Callable[[str], None] | None = None) -> CriterionResult:
    title, fn = CRITERIA[number]
    ck = _Checks(echo)
    fn(ck)
    return CriterionResult(number, title, all(ok for _, ok, _ in ck.items) and bool(ck.items), ck.items)


def run_all(only=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if only is None else sorted(set(only))
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}")
    return [run_criterion(n, echo) for n in numbers]
