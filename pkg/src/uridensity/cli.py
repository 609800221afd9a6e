"""Command-line front end.

Every subcommand is a pure function of a :class:`RunConfig`; with ``--out`` the
config is written next to the output as ``<out>.config.json`` and
``uridensity --config <that file>`` reproduces the output byte for byte.

Exit codes: 0 ok, 2 usage error, 3 invalid parameter, 4 memory budget
exceeded, 5 element-size cap exceeded, 6 acceptance failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from typing import Callable, TextIO

import numpy as np

from . import densities, hinf, local, multibase, poisson
from .errors import ElementSizeError, MemoryBudgetError, ParameterError
from .mantissa import as_rational, benford_cdf
from .output import RunConfig, csv_text, json_text, sidecar_path, write_text
from .predicates import SetPredicate, parse_predicate
from .rng import MASK64, RngStream
from .sampler import DEFAULT_MAX_DIGITS, UriStream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARAMETER = 3
EXIT_MEMORY = 4
EXIT_ELEMENT_SIZE = 5
EXIT_ACCEPTANCE = 6

SEED_ENV = "URIDENSITY_SEED"

DEFAULT_FORMAT = {
    "sample": "text",
    "benford": "json",
    "flehinger": "csv",
    "logdensity": "csv",
    "localpmf": "csv",
    "multibase": "json",
    "coupling": "json",
    "hinf": "csv",
    "acceptance": "text",
}


class AcceptanceFailure(Exception):
    pass


# -- helpers ------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        out.append(int(float(part)) if "e" in part.lower() else int(part))
    return out


def _positive(params: dict, *names: str) -> None:
    for n in names:
        if int(params[n]) < 1:
            raise ParameterError(f"--{n.replace('_', '-')} must be >= 1")


def _predicate(params: dict) -> SetPredicate:
    base = int(params.get("base", 10))
    try:
        if params.get("set"):
            return parse_predicate(params["set"], base)
        if params.get("mantissa_below") is not None:
            return parse_predicate(f"mantissa-below:{params['mantissa_below']}", base)
        return parse_predicate(f"digit:{params.get('digit', 1)}", base)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None


def _benford_target(params: dict) -> float | None:
    if params.get("set"):
        return None
    b = int(params.get("base", 10))
    if params.get("mantissa_below") is not None:
        return benford_cdf(as_rational(params["mantissa_below"]), b)
    d = int(params.get("digit", 1))
    return benford_cdf(as_rational(d + 1), b) - benford_cdf(as_rational(d), b)


def _emit(fmt: str, header: list[str], rows: list[list], obj_key: str, extra: dict,
          comment: str | None = None) -> str:
    if fmt == "csv":
        return csv_text(header, rows, comment)
    body = dict(extra)
    body[obj_key] = [dict(zip(header, r)) for r in rows]
    return json_text(body)


# -- subcommands --------------------------------------------------------------

def cmd_sample(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "count")
    s = UriStream(RngStream(cfg.seed, int(p.get("stream_id", 0))), max_digits=p.get("max_digits"))
    elems = s.take(int(p["count"]))
    if cfg.format == "text":
        fh.writelines(f"{n}\n" for n in elems)
    elif cfg.format == "csv":
        fh.write(csv_text(["index", "value"], [(i + 1, n) for i, n in enumerate(elems)]))
    else:
        fh.write(json_text({"seed": cfg.seed, "elements": [str(n) for n in elems]}))


def cmd_benford(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "elems", "reps")
    A = _predicate(p)
    est = densities.uri_density_mc(A, int(p["elems"]), int(p["reps"]), cfg.seed, p.get("max_digits"))
    target = _benford_target(p)
    row = [A.id, est.value, est.error_bound, est.size, target]
    header = ["predicate", "value", "stderr", "size", "target"]
    if cfg.format == "csv":
        fh.write(csv_text(header, [row]))
    else:
        fh.write(json_text({"seed": cfg.seed, "elems": int(p["elems"]), "reps": int(p["reps"]),
                            **dict(zip(header, row))}))


def _flehinger_ns(p: dict, n_max: int) -> list[int] | range:
    if p.get("n"):
        ns = _int_list(p["n"])
        if any(not 1 <= n <= n_max for n in ns):
            raise ParameterError(f"--n entries must lie in [1, {n_max}]")
        return ns
    stride = int(p.get("stride", 1))
    if stride < 1:
        raise ParameterError("--stride must be >= 1")
    return range(1, n_max + 1, stride)


def cmd_flehinger(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "nmax")
    n_max, k_max = int(p["nmax"]), int(p["kmax"])
    if k_max < 0:
        raise ParameterError("--kmax must be >= 0")
    ks = _int_list(p["k"]) if p.get("k") else list(range(1, k_max + 1)) or [0]
    A = _predicate(p)
    tab = densities.flehinger_table(A, n_max, k_max, keep=ks,
                                    memory_budget=int(p.get("memory_budget", densities.DEFAULT_MEMORY_BUDGET)))
    ns = _flehinger_ns(p, n_max)
    err = repr(float(tab.error_bound))
    if cfg.format == "csv":
        fh.write("n,k,value,error_bound\n")
        for k in sorted(tab.rows):
            vals = tab.rows[k]
            buf = [f"{n},{k},{float(vals[n - 1])!r},{err}\n" for n in ns]
            fh.write("".join(buf))
    else:
        rows = [{"n": n, "k": k, "value": v, "error_bound": tab.error_bound} for n, k, v in tab.iter_rows(ns)]
        fh.write(json_text({"predicate": A.id, "n_max": n_max, "k_max": k_max, "rows": rows}))


def cmd_logdensity(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    ns = _int_list(p["n"])
    if not ns or min(ns) < 2:
        raise ParameterError("--n entries must be >= 2")
    gap_reps = int(p.get("gap_reps", 0))
    if gap_reps < 0:
        raise ParameterError("--gap-reps must be >= 0")
    A = _predicate(p)
    header = ["n", "log_partial", "error_bound", "natural_partial"]
    if gap_reps:
        if min(ns) < 10:
            raise ParameterError("--gap-reps needs every n >= 10")
        header += ["gap_mean", "gap_stderr"]
    rows = []
    for i, n in enumerate(ns):
        lp = densities.log_partial(A, n)
        row = [n, lp.value, lp.error_bound, densities.natural_partial(A, n).value]
        if gap_reps:
            g = np.array([densities.uri_log_gap(A, n, RngStream(cfg.seed, i * gap_reps + r), lp.value)
                          for r in range(gap_reps)])
            se = float(g.std(ddof=1) / math.sqrt(gap_reps)) if gap_reps > 1 else 0.0
            row += [float(g.mean()), se]
        rows.append(row)
    fh.write(_emit(cfg.format, header, rows, "rows", {"predicate": A.id}))


def cmd_localpmf(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "k", "ntrunc")
    k, n_trunc = int(p["k"]), int(p["ntrunc"])
    if k > n_trunc:
        raise ParameterError("--k must not exceed --ntrunc")
    row = local.pmf_row(k, n_trunc)
    if cfg.format == "csv":
        ns = _flehinger_ns(p, n_trunc)
        local.write_pmf_csv(row, fh, ns)
        return
    mode, uni = local.mode_and_unimodality(row) if k >= 3 else (int(np.argmax(row.values)), True)
    report = {"k": k, "n_trunc": n_trunc, "tail_mass": row.tail_mass, "mass_residual": row.mass_residual,
              "mode": mode, "unimodal": uni}
    if p.get("set") or p.get("digit") is not None or p.get("mantissa_below") is not None:
        A = _predicate(p)
        est = local.local_probability(row, A)
        report["local"] = {"predicate": A.id, "value": est.value, "error_bound": est.error_bound,
                           "renormalized": local.renormalized(est, row)}
    report["f_ratio"] = local.f_ratio_check(int(p.get("f_kmax", 20)), int(p.get("f_nmax", 200)))
    fh.write(json_text(report))


def cmd_multibase(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "elems", "reps")
    bases = _int_list(p["bases"])
    verdict = multibase.mult_independence_check(bases, int(p.get("exponent_bound", 6)))
    report: dict = {"bases": bases, "verdict": verdict.to_dict(bases)}
    rows = [["verdict", verdict.status, ""]]
    pair_dependent = any(
        multibase.mult_independence_check((a, b)).status == "dependent"
        for i, a in enumerate(bases) for b in bases[i + 1:]
    )
    if pair_dependent and not p.get("override"):
        report["estimate"] = "skipped: multiplicatively dependent bases (use --override to force)"
    elif p.get("thresholds"):
        ts = [as_rational(t) for t in str(p["thresholds"]).split(",")]
        fam = multibase.BaseFamily(bases, ts)
        res = multibase.factorization_test(fam, int(p["elems"]), int(p["reps"]), cfg.seed,
                                           override=bool(p.get("override", False)))
        report.update({
            "thresholds": [str(t) for t in fam.thresholds],
            "joint": res["joint"].to_dict(),
            "marginals": [m.to_dict() for m in res["marginals"]],
            "product_of_marginals": res["product_of_marginals"],
            "difference": res["difference"],
            "combined_se": res["combined_se"],
            "target": res["target"],
        })
        rows.append(["joint", res["joint"].value, res["joint"].error_bound])
        for b, m in zip(bases, res["marginals"]):
            rows.append([f"marginal_b{b}", m.value, m.error_bound])
        rows.append(["difference", res["difference"], res["combined_se"]])
        rows.append(["target", res["target"], 0.0])
    if cfg.format == "csv":
        fh.write(csv_text(["quantity", "value", "error_bound"], rows))
    else:
        fh.write(json_text(report))


def coupling_report(seed: int, samples: int, nmax_small: int, nmax_large: int) -> dict:
    """Poisson-process diagnostics; each quantity uses its own stream."""
    rng = RngStream(seed, 0)
    in2 = np.empty(samples)
    counts = np.empty(samples)
    empty_5_10 = np.empty(samples)
    for i in range(samples):
        s = poisson.sample_process(1.0, 10.0, rng)
        e = poisson.derive_uri(s, 10)
        in2[i] = 2 in e
        counts[i] = len(s)
        empty_5_10[i] = s.count_in(5.0, 10.0) == 0

    def est(x):
        return {"value": float(x.mean()), "stderr": float(x.std(ddof=1) / math.sqrt(x.size))}

    cells = {}
    for j, m in enumerate((10, 100, 1000)):
        r = RngStream(seed, 1 + j)
        dbl = np.empty(samples)
        for i in range(samples):
            c = poisson.cell_counts(poisson.sample_process(float(m), float(m + 100), r), m, m + 100)
            dbl[i] = np.count_nonzero(c >= 2)
        expect = math.fsum(poisson.double_occupancy_terms(np.arange(m + 1, m + 101)).tolist())
        cells[str(m)] = {**est(dbl), "expected": expect}
    s_small = poisson.double_occupancy_series(nmax_small)
    s_large = poisson.double_occupancy_series(nmax_large)
    return {
        "seed": seed,
        "samples": samples,
        "p_two_in_derived_set": {**est(in2), "expected": 0.5},
        "mean_count_1_10": {**est(counts), "expected": math.log(10.0)},
        "p_empty_5_10": {**est(empty_5_10), "expected": 0.5},
        "double_occupied_cells_per_100": cells,
        "double_occupancy_partial_sums": {
            "n_small": nmax_small, "n_large": nmax_large,
            "small": s_small, "large": s_large, "difference": s_large - s_small,
            # tail of sum 1/(2n^2) beyond n_small
            "tail_bound": 1.0 / (2 * nmax_small),
        },
    }


def cmd_coupling(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "samples", "nmax_small", "nmax_large")
    if int(p["samples"]) < 2:
        raise ParameterError("--samples must be >= 2")
    rep = coupling_report(cfg.seed, int(p["samples"]), int(p["nmax_small"]), int(p["nmax_large"]))
    if cfg.format == "json":
        fh.write(json_text(rep))
        return
    rows = [
        ["p_two_in_derived_set", rep["p_two_in_derived_set"]["value"], rep["p_two_in_derived_set"]["stderr"], 0.5],
        ["mean_count_1_10", rep["mean_count_1_10"]["value"], rep["mean_count_1_10"]["stderr"], math.log(10.0)],
        ["p_empty_5_10", rep["p_empty_5_10"]["value"], rep["p_empty_5_10"]["stderr"], 0.5],
    ]
    for m, c in rep["double_occupied_cells_per_100"].items():
        rows.append([f"double_occupied_cells_{m}_{int(m) + 100}", c["value"], c["stderr"], c["expected"]])
    d = rep["double_occupancy_partial_sums"]
    rows.append([f"double_occupancy_sum_{d['n_small']}", d["small"], d["tail_bound"], ""])
    rows.append([f"double_occupancy_sum_{d['n_large']}", d["large"], 1.0 / (2 * d["n_large"]), ""])
    fh.write(csv_text(["quantity", "value", "error_bound", "expected"], rows))


def cmd_hinf(cfg: RunConfig, fh: TextIO) -> None:
    p = cfg.params
    _positive(p, "reps")
    ns, ks = _int_list(p["n"]), _int_list(p["k"])
    if not ns or not ks or min(ns) < 1 or min(ks) < 1:
        raise ParameterError("--n and --k entries must be >= 1")
    A = _predicate(p)
    tab = densities.flehinger_table(A, max(ns), max(ks), keep=ks)
    rows = []
    for i, n in enumerate(ns):
        for j, k in enumerate(ks):
            est = hinf.hinf_mc(A, n, k, int(p["reps"]), RngStream(cfg.seed, i * len(ks) + j))
            exact = tab.value(n, k)
            z = (est.value - exact) / est.error_bound if est.error_bound > 0 else 0.0
            rows.append([n, k, exact, est.value, est.error_bound, z])
    fh.write(_emit(cfg.format, ["n", "k", "exact", "mc", "stderr", "z"], rows, "rows", {"predicate": A.id}))


def cmd_acceptance(cfg: RunConfig, fh: TextIO) -> None:
    from . import acceptance

    only = _int_list(cfg.params["only"]) if cfg.params.get("only") else None
    results = acceptance.run_all(only=only, echo=lambda s: print(s, file=sys.stderr))
    if cfg.format == "json":
        fh.write(json_text({"results": [r.to_dict() for r in results],
                            "passed": all(r.passed for r in results)}))
    else:
        fh.writelines(r.line() + "\n" for r in results)
    if not all(r.passed for r in results):
        raise AcceptanceFailure("acceptance criteria failed")


COMMANDS: dict[str, Callable[[RunConfig, TextIO], None]] = {
    "sample": cmd_sample,
    "benford": cmd_benford,
    "flehinger": cmd_flehinger,
    "logdensity": cmd_logdensity,
    "localpmf": cmd_localpmf,
    "multibase": cmd_multibase,
    "coupling": cmd_coupling,
    "hinf": cmd_hinf,
    "acceptance": cmd_acceptance,
}


def run(cfg: RunConfig, stdout: TextIO | None = None) -> None:
    """Execute ``cfg``; with ``cfg.out`` set, write the output and its sidecar there."""
    if cfg.subcommand not in COMMANDS:
        raise ParameterError(f"unknown subcommand {cfg.subcommand!r}")
    if not 0 <= cfg.seed <= MASK64:
        raise ParameterError("--seed must fit in 64 unsigned bits")
    allowed = ("text", "csv", "json") if cfg.subcommand in ("sample", "acceptance") else ("csv", "json")
    if cfg.format not in allowed:
        raise ParameterError(f"{cfg.subcommand} supports --format {'|'.join(allowed)}")
    stdout = sys.stdout if stdout is None else stdout
    if cfg.out is None:
        COMMANDS[cfg.subcommand](cfg, stdout)
        return
    buf = io.StringIO()
    try:
        COMMANDS[cfg.subcommand](cfg, buf)
    finally:
        # acceptance failures still leave their report behind
        if buf.tell():
            write_text(cfg.out, buf.getvalue())
            write_text(sidecar_path(cfg.out), json_text(cfg.to_dict()))


# -- argument parsing ---------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _add_predicate_args(sp: argparse.ArgumentParser, digit_default: int | None = 1) -> None:
    sp.add_argument("--digit", type=int, default=digit_default, help="leading digit d (default %(default)s)")
    sp.add_argument("--mantissa-below", default=None, help="rational threshold t: mantissa < t")
    sp.add_argument("--set", default=None,
                    help="predicate spec: all, empty, digit:D, mantissa-below:T, mantissa-in:LO:HI, "
                         "mult:M, residue:M:R, set:V1,V2")
    sp.add_argument("--base", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"64-bit seed (default ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=("text", "csv", "json"), default=None)
    common.add_argument("--out", default=None, help="output file; a .config.json sidecar is written beside it")

    ap = argparse.ArgumentParser(prog="uridensity", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", default=None, help="re-run a saved RunConfig sidecar")
    sub = ap.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    sp = sub.add_parser("sample", parents=[common], help="prefix of a URI stream")
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--stream-id", type=int, default=0)
    sp.add_argument("--max-digits", type=int, default=DEFAULT_MAX_DIGITS)

    sp = sub.add_parser("benford", parents=[common], help="URI-density Monte Carlo estimate")
    _add_predicate_args(sp)
    sp.add_argument("--elems", type=int, default=5000)
    sp.add_argument("--reps", type=int, default=40)
    sp.add_argument("--max-digits", type=int, default=DEFAULT_MAX_DIGITS)

    sp = sub.add_parser("flehinger", parents=[common], help="iterated Cesaro table P_n^k")
    _add_predicate_args(sp)
    sp.add_argument("--nmax", type=int, default=10**6)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--k", default=None, help="comma list of rows to emit (default 1..kmax)")
    sp.add_argument("--n", default=None, help="comma list of n to emit (overrides --stride)")
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--memory-budget", type=int, default=densities.DEFAULT_MEMORY_BUDGET)

    sp = sub.add_parser("logdensity", parents=[common], help="logarithmic and natural partial densities")
    _add_predicate_args(sp)
    sp.add_argument("--n", default="1000000", help="comma list of n")
    sp.add_argument("--gap-reps", type=int, default=0, help="replicas of the URI/log gap per n")

    sp = sub.add_parser("localpmf", parents=[common], help="law of N_k: export (csv) or report (json)")
    _add_predicate_args(sp, digit_default=None)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--ntrunc", type=int, default=10**6)
    sp.add_argument("--n", default=None, help="comma list of n to export")
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--f-kmax", type=int, default=20)
    sp.add_argument("--f-nmax", type=int, default=200)

    sp = sub.add_parser("multibase", parents=[common], help="joint mantissae in several bases")
    sp.add_argument("--bases", default="2,3")
    sp.add_argument("--thresholds", default="1.5,2")
    sp.add_argument("--elems", type=int, default=5000)
    sp.add_argument("--reps", type=int, default=40)
    sp.add_argument("--exponent-bound", type=int, default=6)
    sp.add_argument("--override", action="store_true", help="run even for dependent bases")

    sp = sub.add_parser("coupling", parents=[common], help="Poisson-process coupling diagnostics")
    sp.add_argument("--samples", type=int, default=10**4)
    sp.add_argument("--nmax-small", type=int, default=10**3)
    sp.add_argument("--nmax-large", type=int, default=10**6)

    sp = sub.add_parser("hinf", parents=[common], help="backward chain vs Flehinger table")
    _add_predicate_args(sp)
    sp.add_argument("--n", default="100,1000,10000")
    sp.add_argument("--k", default="1,2,3")
    sp.add_argument("--reps", type=int, default=10**5)

    sp = sub.add_parser("acceptance", parents=[common], help="run the acceptance suite")
    sp.add_argument("--only", default=None, help="comma list of criterion numbers")
    return ap


_NOT_PARAMS = {"subcommand", "seed", "format", "out", "config"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _NOT_PARAMS}
    seed = ns.seed if ns.seed is not None else _default_seed()
    fmt = ns.format or DEFAULT_FORMAT[ns.subcommand]
    return RunConfig(ns.subcommand, seed, params, fmt, ns.out)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if ns.config:
            if ns.subcommand:
                ap.print_usage(sys.stderr)
                print("uridensity: --config cannot be combined with a subcommand", file=sys.stderr)
                return EXIT_USAGE
            cfg = RunConfig.load(ns.config)
        elif not ns.subcommand:
            ap.print_usage(sys.stderr)
            return EXIT_USAGE
        else:
            cfg = config_from_args(ns)
        run(cfg)
    except AcceptanceFailure as exc:
        print(f"uridensity: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    except MemoryBudgetError as exc:
        print(f"uridensity: memory budget exceeded: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except ElementSizeError as exc:
        print(f"uridensity: element size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_ELEMENT_SIZE
    except (ParameterError, ValueError, KeyError, OSError) as exc:
        print(f"uridensity: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
