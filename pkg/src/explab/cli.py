"""Batch front-end: exponent tables, ensemble experiments with Fig.-style
histogram/reference-curve data, and cross-module verification suites.

Exit codes: 0 success, 1 computation error, 2 usage error. Every command
writes a manifest listing its resolved configuration and output files.
All internal math is in nats; ``--unit bits`` rescales written output.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import ensemble, exponents, refdist, typecalc
from .channel import (
    Channel,
    InputDistribution,
    bhattacharyya_matrix,
    bsc,
    cutoff_rate,
    load_channel_file,
    mutual_information,
    uniform_input,
)
from .errors import Diverging, ExplabError, RateOutOfRange

LN2 = math.log(2.0)
DIAG_MIN_SAMPLES = 1000


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# --- argument resolution ------------------------------------------------------


def _resolve_channel(args) -> tuple[Channel, InputDistribution]:
    if args.bsc is not None:
        ch, qfile = bsc(args.bsc), None
    elif args.channel is not None:
        ch, qfile = load_channel_file(args.channel)
    else:
        raise SystemExit2("one of --bsc or --channel is required")
    if args.q == "uniform":
        q = qfile if qfile is not None else uniform_input(ch.input_size)
    else:
        with open(args.q, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        arr = doc["Q"] if isinstance(doc, dict) else doc
        q = InputDistribution(np.asarray(arr, dtype=np.float64))
    return ch, q


def _resolve_seed(args) -> int:
    env = os.environ.get("EXPLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit2(f"EXPLAB_SEED={env!r} is not an integer") from None
    return args.seed


def _parse_rates(args, cap: float) -> list[float]:
    rates: list[float] = []
    if args.rates:
        if ":" in args.rates:
            lo, hi, count = args.rates.split(":")
            rates.extend(np.linspace(float(lo), float(hi), int(count)).tolist())
        else:
            rates.extend(float(tok) for tok in args.rates.split(","))
    if args.rate:
        rates.extend(args.rate)
    if not rates:
        raise SystemExit2("no rates given: use --rates or --rate")
    for r in rates:
        if not 0.0 <= r < cap:
            raise ExplabError(
                f"rate {r:.12g} outside [0, I(Q,W) = {cap:.12g})"
            )
    return rates


class SystemExit2(Exception):
    """Usage error, mapped to exit code 2."""


@dataclass
class Manifest:
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    unit: str
    outputs: list[str]
    started: float

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, "manifest.json")
        doc = {
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "seed": self.seed,
            "unit": self.unit,
            "outputs": sorted(self.outputs),
            "duration_seconds": time.time() - self.started,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# --- exponents command ----------------------------------------------------------


def cmd_exponents(args, argv) -> int:
    started = time.time()
    ch, q = _resolve_channel(args)
    cap = mutual_information(ch, q)
    rates = _parse_rates(args, cap)
    scale = 1.0 if args.unit == "nats" else 1.0 / LN2
    rcrit = exponents.critical_rate(q, ch)

    os.makedirs(args.out, exist_ok=True)
    table = os.path.join(args.out, "exponents.csv")
    with open(table, "w", encoding="utf-8") as fh:
        fh.write("rate,e_rce,e_ex,e_sp,e_trc,above_r_crit,trc_branch\n")
        for r in rates:
            rce = exponents.e_rce(r, q, ch).value
            ex = exponents.e_ex(r, q, ch).value
            trc = exponents.e_trc(r, q, ch).value
            try:
                sp = _fmt(exponents.e_sp(r, q, ch).value * scale) if r > 0 else ""
            except Diverging:
                sp = "inf"
            if r >= rcrit:
                branch = exponents.TrcBranch.HIGH_RATE_RCE.value
            elif r > 0:
                branch = exponents.e_trc_direct(r, q, ch).branch.value
            else:
                branch = ""
            fh.write(
                f"{_fmt(r * scale)},{_fmt(rce * scale)},{_fmt(ex * scale)},"
                f"{sp},{_fmt(trc * scale)},{int(r >= rcrit)},{branch}\n"
            )
    manifest = Manifest(
        "exponents",
        argv,
        {
            "channel": ch.w.tolist(),
            "q": q.q.tolist(),
            "rates": rates,
            "r_crit": rcrit,
            "mutual_information": cap,
        },
        None,
        args.unit,
        [table],
        started,
    )
    manifest.write(args.out)
    print(f"wrote {table} (R_crit = {_fmt(rcrit * scale)} {args.unit})")
    return 0


# --- simulate command -------------------------------------------------------------


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def cmd_simulate(args, argv) -> int:
    started = time.time()
    ch, q = _resolve_channel(args)
    seed = _resolve_seed(args)
    config = ensemble.EnsembleConfig(
        kind=args.ensemble, q=q, n=args.n, m=args.m, trials=args.trials, seed=seed
    )
    d = bhattacharyya_matrix(ch)
    run = ensemble.run_concentration_experiment(
        config, d, bins=args.bins, threads=args.threads
    )
    scale = 1.0 if args.unit == "nats" else 1.0 / LN2

    os.makedirs(args.out, exist_ok=True)
    outputs = []

    samples_path = os.path.join(args.out, "samples.csv")
    _write_csv(samples_path, "v_per_n", ((s * scale,) for s in run.samples))
    outputs.append(samples_path)

    hist_path = os.path.join(args.out, "histogram.csv")
    _write_csv(
        hist_path,
        "bin_center,count",
        zip(run.bin_centers * scale, run.bin_counts.astype(float)),
    )
    outputs.append(hist_path)

    doc = run.to_document()
    mu, sigma = run.mean, math.sqrt(run.variance) if run.variance > 0 else 1.0
    l_ref = args.l_ref if args.l_ref else config.m * (config.m - 1)
    if run.samples.size >= DIAG_MIN_SAMPLES:
        # the two Fig.-style overlays, written as densities in output units
        grid = np.linspace(
            run.bin_edges[0] - 2 * sigma, run.bin_edges[-1] + 2 * sigma, 513
        )
        gauss = refdist._phi((grid - mu) / sigma) / sigma
        _write_csv(
            os.path.join(args.out, "ref_gaussian.csv"),
            "x,density",
            zip(grid * scale, gauss / scale),
        )
        outputs.append(os.path.join(args.out, "ref_gaussian.csv"))
        ref = refdist.ReferenceDistribution.normalized_min_of_gaussians(l_ref)
        ming = ref.pdf((grid - mu) / sigma) / sigma
        _write_csv(
            os.path.join(args.out, "ref_min_gauss.csv"),
            "x,density",
            zip(grid * scale, ming / scale),
        )
        outputs.append(os.path.join(args.out, "ref_min_gauss.csv"))
        normed = (run.samples - mu) / sigma
        doc["diagnostics"] = {
            "L": l_ref,
            "ks_normalized_min_gauss": refdist.kolmogorov_distance(normed, ref),
            "ks_gaussian": refdist.kolmogorov_distance(
                normed, refdist.ReferenceDistribution.standard_gaussian()
            ),
        }
    else:
        print(
            f"warning: distribution diagnostics suppressed below "
            f"{DIAG_MIN_SAMPLES} samples",
            file=sys.stderr,
        )

    doc["unit"] = args.unit
    run_path = os.path.join(args.out, "run.json")
    with open(run_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(run_path)

    manifest = Manifest(
        "simulate", argv, doc["config"], seed, args.unit, outputs, started
    )
    manifest.write(args.out)
    print(
        f"wrote {len(outputs)} files to {args.out} "
        f"(mean = {_fmt(run.mean * scale)} {args.unit})"
    )
    if "diagnostics" in doc:
        dg = doc["diagnostics"]
        print(
            f"KS to normalized min-of-{dg['L']} Gaussians: "
            f"{dg['ks_normalized_min_gauss']:.4f}; "
            f"KS to Gaussian: {dg['ks_gaussian']:.4f}"
        )
    return 0


# --- verify command ----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    residual: float


def _tiny_corpus(p: float, count: int = 60) -> list[ensemble.Codebook]:
    """Deterministic corpus of small codebooks for the bound sandwich."""
    books = [
        ensemble.Codebook(np.array([[0, 0, 0], [1, 1, 1]], dtype=np.uint8)),
        ensemble.Codebook(np.array([[0, 0, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)),
        ensemble.Codebook(np.array([[0, 0], [0, 0]], dtype=np.uint8)),
    ]
    q = uniform_input(2)
    i = 0
    while len(books) < count:
        n = 2 + i % 9  # blocklengths 2..10
        m = 2 + i % 3
        cfg = ensemble.EnsembleConfig("iid", q, n=n, m=m, trials=1, seed=1234)
        books.append(ensemble.sample_codebook(cfg, i))
        i += 1
    return books


def suite_sandwich(p: float = 0.11) -> list[Check]:
    ch = bsc(p)
    worst_low = worst_high = 0.0
    worst_m2 = 0.0
    for cb in _tiny_corpus(p):
        exact = ensemble.exact_error_probability(cb, ch)
        lower = ensemble.de_caen_lower_bound(cb, ch)
        upper = ensemble.union_bound_pe(cb, ch)
        worst_low = max(worst_low, lower - exact)
        worst_high = max(worst_high, exact - upper)
        if cb.m == 2:
            worst_m2 = max(worst_m2, abs(lower - exact), abs(upper - exact))
    return [
        Check("de_caen <= exact", worst_low <= 1e-12, worst_low),
        Check("exact <= union", worst_high <= 1e-12, worst_high),
        Check("M=2 collapse", worst_m2 <= 1e-12, worst_m2),
    ]


def suite_trc(p: float = 0.11) -> list[Check]:
    ch, q = bsc(p), uniform_input(2)
    d = bhattacharyya_matrix(ch).d
    rcrit = exponents.critical_rate(q, ch)
    rates = np.linspace(rcrit / 40, rcrit * 39 / 40, 20)
    qq_flat = np.outer(q.q, q.q).ravel()
    gap_closed = gap_grid = lam_res = 0.0
    for r in rates:
        direct = exponents.e_trc_direct(float(r), q, ch)
        closed = exponents.e_trc(float(r), q, ch)
        gap_closed = max(gap_closed, abs(direct.exponent - closed.value))
        if direct.branch is exponents.TrcBranch.BOUNDARY_P_STAR:
            div = typecalc._kl_raw(direct.p_opt.p.ravel(), qq_flat)
            lam_res = max(lam_res, abs(div - 2.0 * float(r)))

        def objective(stack: np.ndarray) -> np.ndarray:
            flat = stack.reshape(-1, 4)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = flat * np.log(flat / qq_flat[None, :])
            terms[flat == 0] = 0.0
            return terms.sum(axis=1) + flat @ d.ravel() - float(r)

        gval, _ = typecalc.simplex_grid_minimize(objective, 2.0 * float(r), q, 0.005)
        gap_grid = max(gap_grid, abs(direct.exponent - gval))
    return [
        Check("e_trc vs e_trc_direct", gap_closed <= 2e-3, gap_closed),
        Check("e_trc_direct vs grid oracle", gap_grid <= 2e-3, gap_grid),
        Check("lambda* residual", lam_res <= 1e-8, lam_res),
    ]


def suite_identities(p: float = 0.11) -> list[Check]:
    ch, q = bsc(p), uniform_input(2)
    d = bhattacharyya_matrix(ch).d
    r0 = cutoff_rate(ch, q)
    checks = []
    checks.append(
        Check(
            "R0 = E0_iid(1)",
            abs(r0 - exponents.e0_iid(1.0, q, ch)) <= 1e-12,
            abs(r0 - exponents.e0_iid(1.0, q, ch)),
        )
    )
    rce0 = exponents.e_rce(0.0, q, ch).value
    checks.append(Check("E_rce(0) = R0", abs(rce0 - r0) <= 1e-10, abs(rce0 - r0)))
    cc_gap = max(
        abs(exponents.e0_cc(rho, q, ch) - exponents.e0_iid(rho, q, ch))
        for rho in (0.25, 0.5, 0.75, 1.0)
    )
    checks.append(Check("E0_cc = E0_iid on BSC", cc_gap <= 1e-8, cc_gap))

    qq_flat = np.outer(q.q, q.q).ravel()

    def objective(stack: np.ndarray) -> np.ndarray:
        flat = stack.reshape(-1, 4)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = flat * np.log(flat / qq_flat[None, :])
        terms[flat == 0] = 0.0
        return terms.sum(axis=1) + flat @ d.ravel()

    gval, _ = typecalc.simplex_grid_minimize(objective, np.inf, q, 0.005)
    checks.append(
        Check("R0 joint-type identity (grid)", abs(gval - r0) <= 2e-3, abs(gval - r0))
    )
    i_qw = mutual_information(ch, q)
    checks.append(Check("R0 <= I(Q,W)", r0 <= i_qw + 1e-12, max(0.0, r0 - i_qw)))
    return checks


def suite_orderings(ps=(0.05, 0.11, 0.25)) -> list[Check]:
    checks = []
    for p in ps:
        ch, q = bsc(p), uniform_input(2)
        cap = mutual_information(ch, q)
        rcrit = exponents.critical_rate(q, ch)
        rates = np.linspace(0.0, cap * 0.98, 50)
        worst_order = worst_ex = worst_high = worst_sp = 0.0
        for r in rates:
            r = float(r)
            rce = exponents.e_rce(r, q, ch).value
            trc = exponents.e_trc(r, q, ch).value
            ex = exponents.e_ex(r, q, ch).value
            worst_order = max(worst_order, rce - trc)
            if r <= rcrit:
                # above R_crit the raw expurgated supremum drops below the
                # random-coding exponent and the comparison is vacuous
                worst_ex = max(worst_ex, trc - ex)
            if r >= rcrit:
                worst_high = max(worst_high, abs(trc - rce))
                sp = exponents.e_sp(r, q, ch).value
                worst_sp = max(worst_sp, abs(sp - rce))
        r0_gap = abs(exponents.e_rce(0.0, q, ch).value - cutoff_rate(ch, q))
        checks.extend(
            [
                Check(f"p={p}: E_rce <= E_trc", worst_order <= 1e-9, worst_order),
                Check(f"p={p}: E_trc <= E_ex below R_crit", worst_ex <= 1e-9, worst_ex),
                Check(
                    f"p={p}: E_trc = E_rce above R_crit",
                    worst_high <= 1e-6,
                    worst_high,
                ),
                Check(
                    f"p={p}: E_sp = E_rce above R_crit", worst_sp <= 1e-6, worst_sp
                ),
                Check(f"p={p}: E_rce(0) = R0", r0_gap <= 1e-10, r0_gap),
            ]
        )
    return checks


SUITES = {
    "sandwich": suite_sandwich,
    "trc": suite_trc,
    "identities": suite_identities,
    "orderings": suite_orderings,
}


def cmd_verify(args, argv) -> int:
    started = time.time()
    if args.suite == "all":
        names = list(SUITES)
    elif args.suite in SUITES:
        names = [args.suite]
    else:
        raise SystemExit2(
            f"unknown suite {args.suite!r}; choose from "
            f"{', '.join(list(SUITES) + ['all'])}"
        )
    lines = []
    ok = True
    for name in names:
        for check in SUITES[name]():
            status = "PASS" if check.passed else "FAIL"
            ok &= check.passed
            lines.append(
                f"[{status}] {name}: {check.name} (max residual {check.residual:.3e})"
            )
    report = "\n".join(lines)
    print(report)
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "verify_report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report + "\n")
    Manifest(
        "verify", argv, {"suites": names}, None, "nats", [report_path], started
    ).write(args.out)
    return 0 if ok else 1


# --- entry point -----------------------------------------------------------------


def _add_channel_args(sp):
    sp.add_argument("--bsc", type=float, default=None, metavar="P",
                    help="binary symmetric channel with crossover P")
    sp.add_argument("--channel", default=None, metavar="FILE",
                    help='JSON file {"W": rows, "Q": optional vector}')
    sp.add_argument("--q", default="uniform", metavar="uniform|FILE",
                    help="input distribution (default uniform)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="explab",
        description="Error-exponent tables and random-code concentration experiments",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exponents", help="tabulate the exponent family over rates")
    _add_channel_args(ex)
    ex.add_argument("--rates", default=None, metavar="LO:HI:N or list",
                    help="rate grid, e.g. 0:0.3:50 or 0.05,0.1")
    ex.add_argument("--rate", type=float, action="append", default=None,
                    help="single rate (repeatable)")
    ex.add_argument("--unit", choices=("nats", "bits"), default="nats")
    ex.add_argument("--out", default="explab-out")
    ex.set_defaults(func=cmd_exponents)

    sim = sub.add_parser("simulate", help="run a code-ensemble experiment")
    _add_channel_args(sim)
    sim.add_argument("--ensemble", choices=("iid", "cc"), default="iid")
    sim.add_argument("--m", type=int, required=True, help="number of codewords")
    sim.add_argument("--n", type=int, required=True, help="blocklength")
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0,
                     help="master seed (EXPLAB_SEED overrides)")
    sim.add_argument("--bins", type=int, default=60)
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--l-ref", type=int, default=None,
                     help="L of the min-of-Gaussians overlay (default M(M-1))")
    sim.add_argument("--unit", choices=("nats", "bits"), default="nats")
    sim.add_argument("--out", default="explab-out")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run cross-module invariant suites")
    ver.add_argument("--suite", default="all",
                     help=f"one of {', '.join(list(SUITES) + ['all'])}")
    ver.add_argument("--out", default="explab-out")
    ver.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, argv)
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ExplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
