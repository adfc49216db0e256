"""Experiment runner.

Every subcommand derives all randomness from --seed, writes CSV with full
round-trip precision plus a JSON run manifest, and (for curve commands)
renders a PNG next to the CSV unless --no-plot is given. Results are
bit-identical across runs and across --threads values for a fixed seed.

Subcommands:
  fig1           bound curves (upper bound, Gaussian and Fourier MIMO MC)
  fig3           support-detection error curves vs the analytic lines
  threshold      bisect the SNR where the MIMO bound meets H(b) + R_c
  asymptotics    gap constants and required-SNR formulas
  subband        subband scenario required SNR
  codebook-demo  block-coding demo: message + support-sequence error rates
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from pathlib import Path

from . import asymptotics as asy
from . import bounds, detection, runio
from .detection import DetectorMode
from .model import MatrixKind, ProblemDims, Snr, make_dims

__all__ = ["main"]

DEFAULT_SEED = 20260814

_MODE_NAMES = {
    "full": DetectorMode.FULL_ML,
    "nn-genie": DetectorMode.NN_GENIE,
    "single-genie": DetectorMode.SINGLE_NN_GENIE,
}


class CliError(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliError("usage", message)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise CliError("usage", f"{flag}: expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise CliError("usage", f"{flag}: empty list")
    return values


def _parse_int_list(text: str, flag: str) -> list[int]:
    return [int(round(v)) for v in _parse_float_list(text, flag)]


def _matrix_kind(name: str) -> MatrixKind:
    return MatrixKind.GAUSSIAN_IID if name == "gaussian" else MatrixKind.FOURIER_SUBMATRIX


def _dims_from(args: argparse.Namespace) -> ProblemDims:
    return make_dims(args.n, args.p, args.q)


def _finish(
    args: argparse.Namespace,
    csv_path: Path,
    header: list[str],
    rows: list[list],
    parameters: dict,
    extra_outputs: list[Path] | None = None,
) -> None:
    runio.write_csv(csv_path, header, rows)
    outputs = [csv_path] + list(extra_outputs or [])
    manifest = runio.write_manifest(
        csv_path,
        seed=args.seed,
        command=args.command_line,
        parameters=parameters,
        outputs=outputs,
    )
    for path in outputs:
        print(f"[{args.command}] wrote {path}")
    print(f"[{args.command}] manifest {manifest}")


def cmd_fig1(args: argparse.Namespace) -> int:
    dims = _dims_from(args)
    grid = _parse_float_list(args.snr_db, "--snr-db")
    rows = []
    gauss_series, gauss_se, four_series, four_se, imup_series = [], [], [], [], []
    for i, db in enumerate(grid):
        snr = Snr.from_db(db)
        imup = bounds.upper_bound_imup(dims.p, snr)
        g = bounds.mimo_mi_mc(
            dims, MatrixKind.GAUSSIAN_IID, snr, args.trials, args.seed,
            threads=args.threads, label=f"fig1-gauss-{i}",
        )
        f = bounds.mimo_mi_mc(
            dims, MatrixKind.FOURIER_SUBMATRIX, snr, args.trials, args.seed,
            threads=args.threads, label=f"fig1-fourier-{i}",
        )
        print(
            f"[fig1] snr={db:g} dB: gauss={g.mean_bits:.4f} (se {g.std_error_bits:.4f}) "
            f"fourier={f.mean_bits:.4f} (se {f.std_error_bits:.4f}) imup={imup.mean_bits:.4f}"
        )
        rows.append([db, imup.mean_bits, g.mean_bits, g.std_error_bits, f.mean_bits, f.std_error_bits])
        imup_series.append(imup.mean_bits)
        gauss_series.append(g.mean_bits)
        gauss_se.append(g.std_error_bits)
        four_series.append(f.mean_bits)
        four_se.append(f.std_error_bits)
    csv_path = Path(args.out)
    extra: list[Path] = []
    if not args.no_plot:
        from . import plots

        png = csv_path.with_suffix(".png")
        plots.plot_bound_curves(
            png, grid,
            {
                "MIMO lower bound (Gaussian)": (gauss_series, gauss_se),
                "MIMO lower bound (Fourier)": (four_series, four_se),
                "upper bound p log2(1+SNR)": (imup_series, None),
            },
        )
        extra.append(png)
    _finish(
        args, csv_path,
        ["snr_db", "i_mup_bits", "i_mimo_gauss_bits", "i_mimo_gauss_se",
         "i_fourier_bits", "i_fourier_se"],
        rows,
        {"n": dims.n, "p": dims.p, "q": dims.q, "snr_db": grid,
         "trials": args.trials, "threads": args.threads},
        extra,
    )
    return 0


def cmd_fig3(args: argparse.Namespace) -> int:
    dims = _dims_from(args)
    grid = _parse_float_list(args.snr_db, "--snr-db")
    trial_list = _parse_int_list(args.trials, "--trials")
    if len(trial_list) == 1:
        trial_list = trial_list * len(grid)
    if len(trial_list) != len(grid):
        raise CliError("usage", "--trials must give one count, or one per SNR point")
    mode_names = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in mode_names if m not in _MODE_NAMES]
    if bad:
        raise CliError("usage", f"unknown detector mode(s) {bad}; choose from {sorted(_MODE_NAMES)}")
    modes = [_MODE_NAMES[m] for m in mode_names]
    kind = _matrix_kind(args.kind)

    curves = detection.support_error_mc(
        dims, kind, [Snr.from_db(db) for db in grid], modes,
        trial_list, args.seed, threads=args.threads,
    )
    pairwise = [analytic_pairwise(dims, db) for db in grid]
    union = [dims.q * (dims.n - dims.q) * pw for pw in pairwise]

    header = [
        "snr_db",
        "p_err_full", "p_err_full_hw",
        "p_err_nn_genie", "p_err_nn_genie_hw",
        "p_err_single_genie", "p_err_single_genie_hw",
        "analytic_pairwise", "analytic_union",
    ]
    col_of = {
        DetectorMode.FULL_ML: ("p_err_full", "p_err_full_hw"),
        DetectorMode.NN_GENIE: ("p_err_nn_genie", "p_err_nn_genie_hw"),
        DetectorMode.SINGLE_NN_GENIE: ("p_err_single_genie", "p_err_single_genie_hw"),
    }
    rows = []
    for i, db in enumerate(grid):
        row = {name: None for name in header}
        row["snr_db"] = db
        for mode in modes:
            est = curves.estimates[mode][i]
            val_col, hw_col = col_of[mode]
            row[val_col] = est.p_err
            row[hw_col] = est.wilson_half_width
        row["analytic_pairwise"] = pairwise[i]
        row["analytic_union"] = union[i]
        rows.append([row[name] for name in header])
        shown = " ".join(
            f"{m.value}={curves.estimates[m][i].p_err:.3e}" for m in modes
        )
        print(f"[fig3] snr={db:g} dB trials={trial_list[i]}: {shown} "
              f"pairwise={pairwise[i]:.3e} union={union[i]:.3e}")

    csv_path = Path(args.out)
    extra: list[Path] = []
    if not args.no_plot:
        from . import plots

        png = csv_path.with_suffix(".png")
        plots.plot_error_curves(
            png, grid,
            {m.value: [curves.estimates[m][i].p_err for i in range(len(grid))] for m in modes},
            {"pairwise": pairwise, "union bound": union},
        )
        extra.append(png)
    _finish(
        args, csv_path, header, rows,
        {"n": dims.n, "p": dims.p, "q": dims.q, "snr_db": grid,
         "trials": trial_list, "modes": mode_names, "kind": args.kind,
         "threads": args.threads},
        extra,
    )
    return 0


def analytic_pairwise(dims: ProblemDims, snr_db: float) -> float:
    from . import analytic_error

    return analytic_error.pairwise_error(dims.p, dims.q, Snr.from_db(snr_db))


def cmd_threshold(args: argparse.Namespace) -> int:
    dims = _dims_from(args)
    kind = _matrix_kind(args.kind)
    result = bounds.find_threshold_db(
        dims, kind, args.r_c, args.trials, args.seed,
        lo_db=args.lo_db, hi_db=args.hi_db, tol_db=args.tol_db,
        threads=args.threads,
    )
    for i, (db, mean, se) in enumerate(result.evaluations):
        print(f"[threshold] eval {i}: {db:.4f} dB -> {mean:.4f} bits (se {se:.4f})")
    if result.status == "converged":
        print(
            f"[threshold] {result.threshold_db:.3f} dB "
            f"(CI {result.ci_lo_db:.3f}..{result.ci_hi_db:.3f}) "
            f"target {result.target_bits:.4f} bits"
        )
    else:
        print(f"[threshold] status={result.status} target {result.target_bits:.4f} bits "
              f"not bracketed in [{args.lo_db:g}, {args.hi_db:g}] dB")
    csv_path = Path(args.out)
    _finish(
        args, csv_path,
        ["n", "p", "q", "r_c_bits", "matrix_kind", "trials_per_eval",
         "target_bits", "status", "threshold_db", "ci_lo_db", "ci_hi_db",
         "evaluations"],
        [[dims.n, dims.p, dims.q, args.r_c, args.kind, args.trials,
          result.target_bits, result.status, result.threshold_db,
          result.ci_lo_db, result.ci_hi_db, len(result.evaluations)]],
        {"n": dims.n, "p": dims.p, "q": dims.q, "r_c": args.r_c,
         "kind": args.kind, "trials": args.trials, "lo_db": args.lo_db,
         "hi_db": args.hi_db, "tol_db": args.tol_db, "threads": args.threads},
    )
    return 0


def cmd_asymptotics(args: argparse.Namespace) -> int:
    q_r, p_r, r_cp = args.q_ratio, args.p_ratio, args.r_cp
    psi = None
    if args.kind == "gaussian":
        c_gap = asy.gap_gaussian(q_r / p_r)
    elif args.kind == "fourier":
        c_gap = asy.gap_fourier(p_r, q_r)
        psi = asy.fourier_gap_psi(p_r, q_r)
    else:
        c_gap = 0.0
    snr_plain = asy.required_snr(q_r, p_r, r_cp, 0.0)
    snr_gap = asy.required_snr(q_r, p_r, r_cp, c_gap)
    try:
        vs_plain = asy.required_snr_very_sparse(q_r, p_r, r_cp, 0.0).to_db()
        vs_gap = asy.required_snr_very_sparse(q_r, p_r, r_cp, c_gap).to_db()
    except ValueError:
        vs_plain = vs_gap = None  # very-sparse form undefined at q_R in {0,1}
    print(f"[asymptotics] q_R={q_r:g} p_R={p_r:g} beta={q_r / p_r:.4f} kind={args.kind}")
    print(f"[asymptotics] gap constant: {c_gap:.6f} bits/measurement"
          + (f" (psi={psi:.6f})" if psi is not None else ""))
    print(f"[asymptotics] required SNR: {snr_plain.to_db():.4f} dB without gap, "
          f"{snr_gap.to_db():.4f} dB with gap")
    if vs_plain is not None:
        print(f"[asymptotics] very-sparse approx: {vs_plain:.4f} dB without gap, "
              f"{vs_gap:.4f} dB with gap")
    _finish(
        args, Path(args.out),
        ["q_ratio", "p_ratio", "beta", "matrix_kind", "r_cp_bits",
         "c_gap_bits_per_meas", "psi", "snr_db_no_gap", "snr_db_with_gap",
         "snr_db_very_sparse_no_gap", "snr_db_very_sparse_with_gap"],
        [[q_r, p_r, q_r / p_r, args.kind, r_cp, c_gap, psi,
          snr_plain.to_db(), snr_gap.to_db(), vs_plain, vs_gap]],
        {"q_ratio": q_r, "p_ratio": p_r, "r_cp": r_cp, "kind": args.kind},
    )
    return 0


def cmd_subband(args: argparse.Namespace) -> int:
    scenario = asy.SubbandScenario(
        k=args.k, w_hz=args.w_hz, t_s=args.t_s,
        q_ratio=args.q_ratio, p_ratio=args.p_ratio, r_c_bits=args.r_c,
    )
    plan = asy.subband_required_snr(scenario, args.c_gap)
    factor = args.k / (args.w_hz * args.t_s)
    print(f"[subband] K={args.k} W={args.w_hz:g} Hz T={args.t_s:g} s "
          f"resolvable factor K/(W*T)={factor:.6g}")
    print(f"[subband] support entropy: exact {plan.entropy_exact_bits:.4f} bits, "
          f"Stirling {plan.entropy_stirling_bits:.4f} bits")
    print(f"[subband] required SNR {plan.snr.to_db():.4f} dB "
          f"(log2(1+SNR) = {plan.log2_one_plus_snr:.6f})")
    _finish(
        args, Path(args.out),
        ["k", "w_hz", "t_s", "q_ratio", "p_ratio", "r_c_bits", "c_gap_bits",
         "occupied_subbands", "entropy_exact_bits", "entropy_stirling_bits",
         "resolvable_factor", "log2_one_plus_snr", "snr_db"],
        [[args.k, args.w_hz, args.t_s, args.q_ratio, args.p_ratio, args.r_c,
          args.c_gap, scenario.occupied_subbands, plan.entropy_exact_bits,
          plan.entropy_stirling_bits, factor, plan.log2_one_plus_snr,
          plan.snr.to_db()]],
        {"k": args.k, "w_hz": args.w_hz, "t_s": args.t_s,
         "q_ratio": args.q_ratio, "p_ratio": args.p_ratio,
         "r_c": args.r_c, "c_gap": args.c_gap},
    )
    return 0


def cmd_codebook_demo(args: argparse.Namespace) -> int:
    dims = _dims_from(args)
    block_lengths = _parse_int_list(args.block_lengths, "--block-lengths")
    message_counts = _parse_int_list(args.num_messages, "--num-messages")
    snr = Snr.from_db(args.snr_db)
    h_b = bounds.support_entropy_bits(dims.n, dims.q)
    rows = []
    plot_rows = []
    for nuses in block_lengths:
        for m in message_counts:
            cfg = detection.CodebookDemoConfig(
                dims=dims, block_length=nuses, num_messages=m, snr=snr,
                support_known_at_tx=not args.support_unknown,
            )
            res = detection.codebook_demo(cfg, args.trials, args.seed, threads=args.threads)
            r_c = math.log2(m) / nuses
            print(f"[codebook-demo] N={nuses} M={m} r_c={r_c:.4f} b/use: "
                  f"msg_err={res.message_error.p_err:.4f} "
                  f"sup_err={res.support_error.p_err:.4f}")
            rows.append([
                nuses, m, r_c, r_c + h_b, args.snr_db,
                not args.support_unknown, args.trials,
                res.message_error.p_err, res.message_error.wilson_half_width,
                res.support_error.p_err, res.support_error.wilson_half_width,
            ])
            plot_rows.append({
                "block_length": nuses, "num_messages": m,
                "msg_err": res.message_error.p_err,
                "sup_err": res.support_error.p_err,
            })
    csv_path = Path(args.out)
    extra: list[Path] = []
    if not args.no_plot:
        from . import plots

        png = csv_path.with_suffix(".png")
        plots.plot_codebook_curves(png, plot_rows)
        extra.append(png)
    _finish(
        args, csv_path,
        ["block_length", "num_messages", "r_c_bits_per_use",
         "total_rate_bits_per_use", "snr_db", "support_known", "trials",
         "msg_err", "msg_err_hw", "sup_seq_err", "sup_seq_err_hw"],
        rows,
        {"n": dims.n, "p": dims.p, "q": dims.q,
         "block_lengths": block_lengths, "num_messages": message_counts,
         "snr_db": args.snr_db, "trials": args.trials,
         "support_known": not args.support_unknown, "threads": args.threads},
        extra,
    )
    return 0


def _add_common(sub: argparse.ArgumentParser, *, out_default: str) -> None:
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED,
                     help="master seed; all randomness derives from it")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker processes; results identical for any value")
    sub.add_argument("--out", default=out_default, help="output CSV path")


def _add_dims(sub: argparse.ArgumentParser, n: int = 10, p: int = 3, q: int = 6) -> None:
    sub.add_argument("--n", type=int, default=n)
    sub.add_argument("--p", type=int, default=p)
    sub.add_argument("--q", type=int, default=q)


def build_parser() -> _Parser:
    parser = _Parser(prog="sublandau",
                     description="Bounds and detection-error experiments for "
                                 "coded sparse signals sampled below the Landau rate")
    subs = parser.add_subparsers(dest="command", required=True)

    fig1 = subs.add_parser("fig1", parents=[], help="bound curves vs SNR")
    _add_dims(fig1)
    fig1.add_argument("--snr-db", default="0,5,10,15,20,25")
    fig1.add_argument("--trials", type=int, default=20000)
    fig1.add_argument("--no-plot", action="store_true")
    _add_common(fig1, out_default="fig1.csv")
    fig1.set_defaults(func=cmd_fig1)

    fig3 = subs.add_parser("fig3", help="detection error curves vs SNR")
    _add_dims(fig3)
    fig3.add_argument("--snr-db", default="8,13,18,23,28,32")
    fig3.add_argument("--trials", default="20000",
                      help="one count, or one per SNR point (comma list)")
    fig3.add_argument("--modes", default="full,nn-genie,single-genie")
    fig3.add_argument("--kind", choices=["gaussian", "fourier"], default="gaussian")
    fig3.add_argument("--no-plot", action="store_true")
    _add_common(fig3, out_default="fig3.csv")
    fig3.set_defaults(func=cmd_fig3)

    thr = subs.add_parser("threshold", help="SNR where the MIMO bound meets H(b)+R_c")
    _add_dims(thr)
    thr.add_argument("--r-c", type=float, default=0.0, help="content rate R_c in bits/use")
    thr.add_argument("--kind", choices=["gaussian", "fourier"], default="gaussian")
    thr.add_argument("--trials", type=int, default=100000)
    thr.add_argument("--lo-db", type=float, default=0.0)
    thr.add_argument("--hi-db", type=float, default=20.0)
    thr.add_argument("--tol-db", type=float, default=0.05)
    _add_common(thr, out_default="threshold.csv")
    thr.set_defaults(func=cmd_threshold)

    asym = subs.add_parser("asymptotics", help="gap constants and required SNR")
    asym.add_argument("--q-ratio", type=float, required=True)
    asym.add_argument("--p-ratio", type=float, required=True)
    asym.add_argument("--r-cp", type=float, default=0.0,
                      help="content bits per measurement R_cp")
    asym.add_argument("--kind", choices=["gaussian", "fourier", "none"], default="gaussian")
    _add_common(asym, out_default="asymptotics.csv")
    asym.set_defaults(func=cmd_asymptotics)

    sb = subs.add_parser("subband", help="subband scenario required SNR")
    sb.add_argument("--k", type=int, required=True, help="number of subbands")
    sb.add_argument("--w-hz", type=float, required=True, help="total bandwidth")
    sb.add_argument("--t-s", type=float, required=True, help="observation interval")
    sb.add_argument("--q-ratio", type=float, required=True)
    sb.add_argument("--p-ratio", type=float, required=True)
    sb.add_argument("--r-c", type=float, default=0.0, help="total content bits per interval")
    sb.add_argument("--c-gap", type=float, default=0.0, help="gap constant in bits")
    _add_common(sb, out_default="subband.csv")
    sb.set_defaults(func=cmd_subband)

    demo = subs.add_parser("codebook-demo", help="block-coding demo error rates")
    _add_dims(demo, n=4, p=2, q=2)
    demo.add_argument("--block-lengths", default="2,4,8", help="comma list of N")
    demo.add_argument("--num-messages", default="1,4", help="comma list of M")
    demo.add_argument("--snr-db", type=float, default=10.0)
    demo.add_argument("--trials", type=int, default=200)
    demo.add_argument("--support-unknown", action="store_true",
                      help="codebook over content only; supports chosen by the channel")
    demo.add_argument("--no-plot", action="store_true")
    _add_common(demo, out_default="codebook_demo.csv")
    demo.set_defaults(func=cmd_codebook_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.command_line = "sublandau " + " ".join(shlex.quote(a) for a in argv)
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
              file=sys.stderr)
        return 2
    except (ValueError, detection.CombinatorialBudgetError) as exc:
        print(json.dumps({"error": {"code": "domain", "message": str(exc)}}),
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": {"code": "io", "message": str(exc)}}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
