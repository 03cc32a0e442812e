"""Command line front end: ``sosvol {volume,approx,bound,rate,oracle}``.

Exit codes: 0 success, 1 usage or parse error, 2 violated standing assumption
(origin not interior to K, K not inside X or the unit ball), 3 solver failure
(every hierarchy level failed, or an approximation LP could not be solved).
CSV floats carry 17 significant digits; run times only appear with
``--timings`` so that repeated runs with the same seed are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

from . import approx, hierarchy, montecarlo, sdp
from .poly import BASES, CHEBYSHEV, MONOMIAL
from .problemfile import ProblemFile, ProblemFileError, load
from .semialg import AssumptionError, certify_assumptions

EXIT_OK, EXIT_USAGE, EXIT_ASSUMPTION, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("sosvol")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sosvol", description="Moment-SOS volume upper bounds and their convergence.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("file", help="problem file (JSON)")
        if seed:
            sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=Path, default=None, help="directory for CSV and report files")
        sp.add_argument("--timings", action="store_true", help="include wall-clock times in outputs")

    v = sub.add_parser("volume", help="run the hierarchy sweep")
    common(v)
    v.add_argument("--dmin", type=int, default=None)
    v.add_argument("--dmax", type=int, default=None)
    v.add_argument("--step", type=int, default=None)
    v.add_argument("--basis", choices=BASES, default=None)
    v.add_argument("--tol", type=_positive, default=None, help="solver feasibility and gap tolerance")
    v.add_argument("--samples", type=int, default=None, help="Monte Carlo samples for the oracle")
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--sdpa", action="store_true", help="also dump each level as SDPA sparse format")

    a = sub.add_parser("approx", help="one-sided approximation, modulus and tube estimates")
    common(a)
    a.add_argument("--degrees", type=_int_list, default=None)
    a.add_argument("--grid", type=int, default=None, help="LP grid points (default 40x the space dimension)")
    a.add_argument("--t-values", type=_float_list, default=None)
    a.add_argument("--basis", choices=BASES, default=None)
    a.add_argument("--samples", type=int, default=None)
    a.add_argument("--inner-samples", type=int, default=None)
    a.add_argument("--vol-ref", type=float, default=None)

    b = sub.add_parser("bound", help="evaluate the closed-form degree bound")
    b.add_argument("--epsilon", type=_positive, required=True)
    b.add_argument("--c1", type=_positive, default=1.0)
    b.add_argument("--c2", type=_positive, default=1.0)
    b.add_argument("--cG", type=_positive, default=1.0)
    b.add_argument("--r", type=_positive, default=1.0)
    b.add_argument("--n", type=int, default=1)
    b.add_argument("--k-degree", type=int, default=None, help="degree for the k(d) factor (default c3)")

    r = sub.add_parser("rate", help="fit decay models to a (d, value) CSV")
    r.add_argument("csv", type=Path)
    r.add_argument("--vol-ref", type=float, default=0.0)
    r.add_argument("--out", type=Path, default=None)

    o = sub.add_parser("oracle", help="Monte Carlo volume of K")
    common(o)
    o.add_argument("--samples", type=int, default=None)
    o.add_argument("--low-discrepancy", action="store_true")
    return p


# helpers --------------------------------------------------------------------------


def _pick(flag, problem: ProblemFile, key: str, default):
    if flag is not None:
        return flag
    return problem.option(key, default)


def _emit(text: str, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        (out / name).write_text(text, encoding="utf-8")


def _prepare_out(out: Path | None) -> None:
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)


def _geometry_lines(geo) -> list[str]:
    return [
        f"interior margin min g_i(0): {geo.interior_margin:.10g}",
        f"inner box half-width s*:    {geo.inner_box_half_width:.10g}",
        f"r = 1/s*:                   {geo.r:.10g}",
        f"vol X:                      {geo.outer_volume:.10g}",
        f"inclusion K in X in B_n:    statistically certified ({geo.inclusion_samples} samples)",
    ]


def _reference(problem: ProblemFile, seed: int, samples: int):
    """(vol_ref, std_error, exact) from the problem options or the Monte Carlo oracle."""
    exact = problem.option("vol_ref")
    if exact is not None:
        return exact, 0.0, True
    est = montecarlo.volume(problem.K.normalized(), problem.X, samples, seed)
    return est.value, est.std_error, False


# commands -------------------------------------------------------------------------


def cmd_volume(args) -> int:
    problem = load(args.file)
    dmin = _pick(args.dmin, problem, "dmin", 2)
    dmax = _pick(args.dmax, problem, "dmax", 10)
    step = _pick(args.step, problem, "step", 2)
    if dmax < dmin:
        raise UsageError(f"--dmax ({dmax}) must be >= --dmin ({dmin})")
    if dmin % 2 or step % 2 or step <= 0 or dmin < 0:
        raise UsageError("--dmin and --step must be even and --step positive")
    seed = _pick(args.seed, problem, "seed", 0)
    n = problem.dimension
    basis = _pick(args.basis, problem, "basis", MONOMIAL)
    tol = _pick(args.tol, problem, "tol", None)
    opts = hierarchy.default_options(n)
    if tol is not None:
        opts = sdp.SolverOptions(feas_tol=tol, gap_tol=tol)
    samples = _pick(args.samples, problem, "samples", 1_000_000)
    workers = _pick(args.workers, problem, "workers", 1)
    _prepare_out(args.out)

    t0 = time.perf_counter()
    geo = certify_assumptions(problem.K, problem.X, seed=seed)
    t_geo = time.perf_counter() - t0
    t0 = time.perf_counter()
    vol_ref, vol_se, exact = _reference(problem, seed, samples)
    t_mc = time.perf_counter() - t0
    t0 = time.perf_counter()
    seq = hierarchy.run(
        problem.K, problem.X, dmin, dmax, step, basis, opts,
        reference_volume=vol_ref if exact else None,
        workers=workers, cert_tol=problem.option("cert_tol", 1e-6),
    )
    t_h = time.perf_counter() - t0

    if args.out is not None:
        seq.write_csv(args.out / "hierarchy.csv", timings=args.timings)
        if args.sdpa:
            from .sdpa import write_sdpa

            for d in seq.degrees:
                asm = hierarchy.assemble(problem.K, problem.X, d, basis)
                write_sdpa(asm.problem, args.out / f"level_{d:03d}.dat-s", f"hierarchy level d={d}, basis {basis}")

    lines = [f"problem: {problem.source}", "", "geometry", *("  " + s for s in _geometry_lines(geo)), ""]
    lines.append("hierarchy")
    lines.append(f"  {'d':>4}  {'v_d':>20}  {'cert_residual':>13}  {'gap':>10}  status")
    for lv in seq.levels:
        gap = lv.solver_gaps.get("gap", math.nan)
        note = " (chebyshev retry)" if lv.retried else ""
        lines.append(f"  {lv.d:>4}  {lv.v_d:>20.15g}  {lv.cert_residual:>13.3g}  {gap:>10.3g}  {lv.status}{note}")
    lines.append(f"  monotone within 1e-6: {'yes' if seq.is_monotone() else 'NO'}")
    lines.append("")
    if exact:
        lines.append(f"reference volume (declared exact): {vol_ref:.15g}")
        lines.append(f"  all bounds above reference: {'yes' if seq.above_reference() else 'NO'}")
    else:
        lines.append(f"oracle volume ({samples} samples, seed {seed}): {vol_ref:.10g} +- {vol_se:.3g} (1 s.e.)")
    solved = seq.solved()
    if solved:
        best = solved[-1].v_d
        lines.append(f"tightest bound v_{solved[-1].d} = {best:.15g}; gap to reference {best - vol_ref:.6g}")
        lines.append(f"looseness vol X / v_d = {problem.X.volume / best:.6g}")
    if args.timings:
        lines += ["", f"seconds: geometry {t_geo:.3f}, oracle {t_mc:.3f}, hierarchy {t_h:.3f}"]
    _emit("\n".join(lines) + "\n", args.out, "report.txt")
    if not solved:
        log.error("no hierarchy level was solved")
        return EXIT_SOLVER
    return EXIT_OK


def cmd_approx(args) -> int:
    problem = load(args.file)
    n = problem.dimension
    seed = _pick(args.seed, problem, "seed", 0)
    degrees = _pick(args.degrees, problem, "degrees", [4, 8, 16])
    t_values = _pick(args.t_values, problem, "t_values", [0.05, 0.1])
    grid = _pick(args.grid, problem, "grid", None)
    basis = _pick(args.basis, problem, "basis", CHEBYSHEV if n == 1 else MONOMIAL)
    samples = _pick(args.samples, problem, "samples", 200_000)
    inner = _pick(args.inner_samples, problem, "inner_samples", 64)
    if not degrees or any(d < 0 for d in degrees):
        raise UsageError("--degrees must be a non-empty list of non-negative integers")
    if any(not 0.0 <= t <= 1.0 for t in t_values):
        raise UsageError("--t-values must lie in [0, 1]")
    _prepare_out(args.out)

    geo = certify_assumptions(problem.K, problem.X, seed=seed)
    if args.vol_ref is not None:
        vol_ref, vol_se, exact = args.vol_ref, 0.0, True
    else:
        vol_ref, vol_se, exact = _reference(problem, seed, 1_000_000)

    t0 = time.perf_counter()
    sweep = [
        approx.best_upper_L1(problem.K, problem.X, d, grid, basis, vol_ref, vol_se, seed=seed)
        for d in sorted(degrees)
    ]
    t_lp = time.perf_counter() - t0
    t0 = time.perf_counter()
    cloud = None
    if any(t > 0 for t in t_values):
        cloud = approx.boundary_cloud(problem.K, problem.X, seed=seed)
    mods = [
        approx.avg_modulus(problem.K, problem.X, t, samples, inner, seed, cloud=cloud)
        if t > 0 else approx.ModulusEstimate(0.0, 0.0, 0.0, 0.0)
        for t in t_values
    ]
    t_mod = time.perf_counter() - t0

    if args.out is not None:
        approx.write_approx_csv(args.out / "approx.csv", sweep)
        approx.write_modulus_csv(args.out / "modulus.csv", mods)

    src = "declared exact" if exact else f"Monte Carlo, s.e. {vol_se:.3g}"
    lines = [f"problem: {problem.source}", "", "geometry", *("  " + s for s in _geometry_lines(geo)), ""]
    lines.append(f"one-sided L1 approximation (vol_ref = {vol_ref:.15g}, {src}; basis {basis})")
    lines.append(f"  {'d':>4}  {'e_d':>20}  {'d*e_d':>12}  {'sup_norm':>12}  {'violation':>10}  grid")
    for s in sweep:
        lines.append(
            f"  {s.d:>4}  {s.e_d:>20.15g}  {s.d * s.e_d:>12.6g}  {s.sup_norm:>12.6g}  {s.violation:>10.2g}  {s.grid_size}"
        )
    e = [s.e_d for s in sweep]
    lines.append(f"  non-increasing within 1e-9: {'yes' if all(b <= a + 1e-9 for a, b in zip(e, e[1:])) else 'NO'}")
    de = [s.d * s.e_d for s in sweep if s.d > 0 and s.e_d > 0]
    if len(de) >= 2:
        lines.append(f"  max/min of d*e_d: {max(de) / min(de):.6g}")
        lines.append(f"  empirical c1 = max d*e_d: {max(de):.6g}")
    sups = [s.sup_norm for s in sweep]
    growth = sups[-1] > 1.5 * sups[0]
    lines.append(f"  sup-norm growth >50% (Gibbs probe): {'yes' if growth else 'no'} (empirical evidence only)")
    lines.append("")
    lines.append(f"averaged modulus vs tube volume ({samples} outer samples, {inner} inner, seed {seed})")
    lines.append(f"  {'t':>6}  {'omega_bar':>12}  {'tube_vol':>12}  {'std_error':>10}  omega <= tube + 3 s.e.")
    for m in mods:
        lines.append(
            f"  {m.t:>6.4g}  {m.omega_bar:>12.6g}  {m.tube_vol:>12.6g}  {m.std_error:>10.3g}  {'yes' if m.consistent() else 'NO'}"
        )
    pos = [m for m in mods if m.t > 0]
    if len(pos) >= 2 and pos[0].tube_vol > 0:
        lo, hi = pos[0], pos[-1]
        ratio = hi.tube_vol / lo.tube_vol
        lines.append(
            f"  tube ratio vol(t={hi.t:g}) / vol(t={lo.t:g}) = {ratio:.6g} (linear growth predicts {hi.t / lo.t:.6g})"
        )
    if args.timings:
        lines += ["", f"seconds: LP sweep {t_lp:.3f}, modulus and tubes {t_mod:.3f}"]
    _emit("\n".join(lines) + "\n", args.out, "report.txt")
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be a positive integer")
    inputs = approx.DegreeBoundInputs(args.epsilon, args.c1, args.c2, args.cG, args.r, args.n)
    bound = approx.eval_degree_bound(inputs)
    asym = approx.asymptotic_degree_bound(inputs)
    kd = args.k_degree if args.k_degree is not None else inputs.c3
    value = f"{bound.value:.10g}" if not bound.overflow else "overflow (see log10)"
    asym_text = f"log = {asym.log_value:.10g}, log10 = {asym.log10:.10g}" if math.isfinite(asym.log_value) else "overflow"
    lines = [
        f"epsilon = {inputs.epsilon:g}, c1 = {inputs.c1:g}, c2 = {inputs.c2:g}, cG = {inputs.c_G:g}, r = {inputs.r:g}, n = {inputs.n}",
        f"c3 = ceil(2 c1 / epsilon) = {inputs.c3}",
        f"k({kd}) = 3^{kd + 1} r^{kd} = {approx.k_factor(kd, inputs.r):.10g}",
        f"bound: log = {bound.log_value:.15g}, log10 = {bound.log10:.15g}",
        f"bound value: {value}",
        f"asymptotic form exp[(3rn)^(2c1/eps) / eps^(3c2)]: {asym_text}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _read_series(path: Path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise ProblemFileError("empty CSV", source=str(path))
    header = [h.strip() for h in rows[0]]
    if "d" not in header:
        raise ProblemFileError("CSV needs a 'd' column", 1, 1, str(path))
    for name in ("v_d", "e_d", "value"):
        if name in header:
            col = header.index(name)
            break
    else:
        col = 1 if header.index("d") == 0 else 0
    di = header.index("d")
    status = header.index("solver_status") if "solver_status" in header else None
    ds, vs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if status is not None and row[status] != sdp.OPTIMAL:
            continue
        try:
            ds.append(int(float(row[di])))
            vs.append(float(row[col]))
        except (ValueError, IndexError):
            raise ProblemFileError("malformed row", lineno, 1, str(path)) from None
    return ds, vs, header[col]


def cmd_rate(args) -> int:
    ds, vs, column = _read_series(args.csv)
    fits = approx.rate_fit(ds, vs, args.vol_ref)
    text = f"source: {args.csv} (column {column})\n" + approx.format_rate_report(fits, args.vol_ref)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    _emit(text, args.out, "rate.txt")
    return EXIT_OK


def cmd_oracle(args) -> int:
    problem = load(args.file)
    seed = _pick(args.seed, problem, "seed", 0)
    samples = _pick(args.samples, problem, "samples", 1_000_000)
    if samples < 1:
        raise UsageError("--samples must be >= 1")
    _prepare_out(args.out)
    t0 = time.perf_counter()
    est = montecarlo.volume(problem.K.normalized(), problem.X, samples, seed, args.low_discrepancy)
    secs = time.perf_counter() - t0
    se = "" if est.std_error is None else f"{est.std_error:.17g}"
    if args.out is not None:
        with open(args.out / "oracle.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["value", "std_error", "samples", "seed", "hits", "low_discrepancy"])
            w.writerow([f"{est.value:.17g}", se, est.samples, est.seed, est.hits, int(est.low_discrepancy)])
    lines = [f"problem: {problem.source}", f"vol K ~ {est.value:.10g}"]
    if est.std_error is None:
        lines.append("low-discrepancy estimate: no standard error available")
    else:
        lo, hi = est.interval(4.0)
        lines.append(f"std error {est.std_error:.3g}; 4 s.e. interval [{lo:.10g}, {hi:.10g}]")
    lines.append(f"{samples} samples, seed {seed}, vol X = {problem.X.volume:.10g}")
    if args.timings:
        lines.append(f"seconds: {secs:.3f}")
    _emit("\n".join(lines) + "\n", args.out, "oracle.txt")
    return EXIT_OK


COMMANDS = {"volume": cmd_volume, "approx": cmd_approx, "bound": cmd_bound, "rate": cmd_rate, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProblemFileError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssumptionError as exc:
        print(f"assumption violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except approx.InsufficientData as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (approx.LpInfeasible, approx.GridTooCoarse, sdp.SolverError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except approx.DegenerateBoundary as exc:
        print(f"degenerate boundary: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION


if __name__ == "__main__":
    sys.exit(main())
