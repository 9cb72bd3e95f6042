"""Command-line front end: run each construction end to end and emit the
spec JSON, sample CSV, report JSON, and rendered figures.

Exit codes: 0 success, 2 validation failure, 3 numerical failure; failures
print one `quarteig: <kind>: <reason>` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import construct, plots, serialize, verify
from .kernels import PiecewisePotential, StateVector4, propagate
from .zeros import race_brackets, race_zeros, solve_race_tie

SHOOT_TOL = 1e-9
PIECEWISE_MATCH_TOL = 1e-8
DECAY_FIT_RTOL = 1e-2
BOUND_STATE_TOL = 1e-3
SQUARE_GAP_TOL = 2e-3
SPECTRA_IDENTITY_RTOL = 1e-10
EXACT_FIELD_TOL = 1e-12


class CheckFailure(RuntimeError):
    """A re-run verification check did not meet its tolerance."""


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("QUARTEIG_OUT") or "quarteig_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _positive(name: str, value: float) -> float:
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def _scan_grid(args) -> np.ndarray:
    if not args.scan_lo > 0.0 or not args.scan_hi > args.scan_lo:
        raise ValueError("scan bounds must satisfy 0 < lo < hi")
    if args.scan_points < 2:
        raise ValueError("scan needs at least 2 points")
    return np.linspace(args.scan_lo, args.scan_hi, args.scan_points)


def _cmd_singular(args, parity: str) -> int:
    name = "singular" if parity == "odd" else "even_variant"
    _positive("grid step", args.grid_step)
    grid = _scan_grid(args)
    out = _out_dir(args)
    if parity == "odd":
        example, sample = construct.singular_example(args.grid_step)
    else:
        example, sample = construct.even_variant(args.grid_step)
    mismatches = np.array([verify.shoot_singular(lam, parity=parity) for lam in grid])
    serialize.dump_json(serialize.singular_document(example), out / f"{name}_example.json")
    serialize.write_eigenfunction_csv(out / f"{name}_eigenfunction.csv", sample)
    serialize.write_scan_csv(out / f"{name}_scan.csv", grid, mismatches)
    if not args.no_plots:
        plots.render_profile(
            out / f"{name}_eigenfunction.png",
            sample.grid,
            sample.values,
            example.lam,
            f"{parity} point-interaction eigenfunction",
        )
        plots.render_scan(
            out / f"{name}_scan.png",
            grid,
            mismatches,
            example.lam,
            f"{parity} decay-condition mismatch scan",
        )
    at_root = verify.shoot_singular(example.lam, parity=parity)
    print(f"{name}: mismatch_at_root={at_root:.3e} norm_squared={example.norm_squared:.12g} out={out}")
    return 0


def _cmd_piecewise(args) -> int:
    _positive("k0", args.k0)
    _positive("A", args.A)
    _positive("grid step", args.grid_step)
    if not args.a < 0.0:
        raise ValueError(f"a must be negative, got {args.a}")
    out = _out_dir(args)
    spec = construct.build_embedded_potential(args.k0, args.a, args.A)
    sample = construct.synthesize_eigenfunction(spec, args.grid_step)
    X = args.X if args.X is not None else 25.0 / args.k0
    sol = verify.eigensolve_symmetric(verify.discretize_quartic(spec.full_potential(), X, args.n))
    report = verify.detect_embedded(sol, spec.lam, decay_rate=spec.k0)
    serialize.dump_json(serialize.piecewise_document(spec), out / "piecewise_spec.json")
    serialize.write_eigenfunction_csv(out / "piecewise_eigenfunction.csv", sample)
    serialize.dump_json(serialize.report_document(report), out / "piecewise_report.json")
    serialize.write_eigenvalue_csv(out / "piecewise_spectrum.csv", report.eigenvalues)
    if not args.no_plots:
        plots.render_profile(
            out / "piecewise_eigenfunction.png",
            sample.grid,
            sample.values,
            spec.lam,
            "piecewise-constant potential eigenfunction",
        )
        plots.render_spectrum(
            out / "piecewise_spectrum.png",
            report.eigenvalues,
            spec.lam,
            window=1.0,
            title=f"discrete spectrum near the target ({report.verdict.value})",
        )
    print(
        f"piecewise: verdict={report.verdict.value} nearest={report.nearest:.10g} "
        f"gap={report.gap:.3e} ipr={report.ipr:.3e} out={out}"
    )
    return 0


def _cmd_hsquare(args) -> int:
    out = _out_dir(args)
    well = construct.sech_well()
    hop, lop = verify.discretize_schrodinger_and_square(well.v, args.X, args.n)
    hsol = verify.eigensolve_symmetric(hop)
    lsol = verify.eigensolve_symmetric(lop)
    kappa = well.bound_energies[0]
    report = verify.detect_embedded(
        lsol, kappa**2, decay_rate=math.sqrt(-kappa), gap_tol=SQUARE_GAP_TOL
    )
    serialize.dump_json(
        serialize.hsquare_document(args.X, args.n, well.bound_energies),
        out / "hsquare_spec.json",
    )
    serialize.write_eigenvalue_csv(out / "hsquare_h_spectrum.csv", hsol.eigenvalues)
    serialize.write_eigenvalue_csv(out / "hsquare_l_spectrum.csv", lsol.eigenvalues)
    serialize.dump_json(serialize.report_document(report), out / "hsquare_report.json")
    if not args.no_plots:
        plots.render_spectrum(
            out / "hsquare_spectrum.png",
            report.eigenvalues,
            kappa**2,
            window=1.0,
            title=f"squared-operator spectrum near the target ({report.verdict.value})",
        )
    bound = hsol.eigenvalues[int(np.argmin(np.abs(hsol.eigenvalues - kappa)))]
    print(
        f"hsquare: bound={bound:.10g} verdict={report.verdict.value} "
        f"nearest={report.nearest:.10g} gap={report.gap:.3e} out={out}"
    )
    return 0


def _race_start(spec) -> StateVector4:
    """Jet of the decaying profile propagated to the inner breakpoint, the
    start data of the zero race the construction solved."""
    k0 = spec.k0
    amp = math.exp(k0 * spec.a)
    start = StateVector4(spec.a, amp, k0 * amp, k0**2 * amp, k0**3 * amp)
    leg = PiecewisePotential(((spec.a, spec.b, spec.A),))
    return propagate(leg, start, spec.b)


def _cmd_sweep(args) -> int:
    _positive("k0", args.k0)
    _positive("A", args.A)
    if not args.a < 0.0:
        raise ValueError(f"a must be negative, got {args.a}")
    if args.points < 2:
        raise ValueError("sweep needs at least 2 points")
    out = _out_dir(args)
    spec = construct.build_embedded_potential(args.k0, args.a, args.A)
    start = _race_start(spec)
    b_high, b_low = race_brackets(start)
    bracket = solve_race_tie(start)
    bs = np.linspace(b_low, b_high, args.points)
    z1s, z3s = [], []
    for b in bs:
        z1, z3 = race_zeros(float(b), start)
        z1s.append(z1)
        z3s.append(z3)
    serialize.write_race_csv(out / "sweep_race.csv", bs, z1s, z3s)
    if not args.no_plots:
        plots.render_race(
            out / "sweep_race.png",
            bs,
            z1s,
            z3s,
            bracket.b_star,
            "zero race across the continuation bracket",
        )
    print(
        f"sweep: bracket=({b_low:.6g}, {b_high:.6g}) b_star={bracket.b_star:.12g} "
        f"points={args.points} out={out}"
    )
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_piecewise(doc: dict) -> str:
    spec = serialize.piecewise_from_document(doc)
    sample = construct.synthesize_eigenfunction(spec)
    u1, u3 = verify.shoot_piecewise(spec, spec.lam)
    if abs(u1) + abs(u3) >= PIECEWISE_MATCH_TOL:
        raise CheckFailure(f"matching mismatch {abs(u1) + abs(u3):.3e} at the claimed eigenvalue")
    fit = construct.fit_decay_rate(sample)
    if abs(fit / spec.k0 - 1.0) > DECAY_FIT_RTOL:
        raise CheckFailure(f"tail decay rate {fit:.6g} differs from k0 = {spec.k0:.6g}")
    bps = np.array(spec.full_potential().breakpoints)
    if np.max(np.abs(bps + bps[::-1])) > EXACT_FIELD_TOL:
        raise CheckFailure("extended potential is not even")
    return f"kind=piecewise k0={spec.k0:.6g} B={spec.B:.12g}"


def _verify_singular(doc: dict) -> str:
    example = serialize.singular_from_document(doc)
    if example.parity == "odd":
        expected, _ = construct.singular_example()
        norm_target = 3.0 * math.pi / 4.0 + 1.0
    else:
        expected, _ = construct.even_variant()
        norm_target = math.pi / 4.0 + 1.0
    if abs(example.amplitude - expected.amplitude) > EXACT_FIELD_TOL:
        raise CheckFailure(f"amplitude {example.amplitude!r} is not the matched value")
    if abs(example.lam - expected.lam) > EXACT_FIELD_TOL:
        raise CheckFailure(f"eigenvalue {example.lam!r} differs from the construction")
    for got, want in zip(example.interfaces, expected.interfaces):
        drift = max(abs(got.c - want.c), abs(got.beta - want.beta), abs(got.gamma - want.gamma))
        if drift > EXACT_FIELD_TOL:
            raise CheckFailure(f"interface at {got.c:.6g} drifted by {drift:.3e}")
    mismatch = verify.shoot_singular(example.lam, parity=example.parity)
    if mismatch >= SHOOT_TOL:
        raise CheckFailure(f"shooting mismatch {mismatch:.3e} at the claimed eigenvalue")
    if abs(example.norm_squared - norm_target) > 1e-6:
        raise CheckFailure(f"squared norm {example.norm_squared!r} off the closed form")
    return f"kind={'singular' if example.parity == 'odd' else 'even_variant'}"


def _verify_hsquare(doc: dict) -> str:
    if doc.get("potential") != serialize.SECH_WELL_TOKEN:
        raise ValueError(f"unknown potential {doc.get('potential')!r}")
    X = float(doc["X"])
    n = int(doc["n"])
    energies = [float(e) for e in doc["bound_energies"]]
    well = construct.sech_well()
    if len(energies) != len(well.bound_energies) or any(
        abs(e - w) > EXACT_FIELD_TOL for e, w in zip(energies, well.bound_energies)
    ):
        raise CheckFailure("bound energies differ from the built-in well")
    hop, lop = verify.discretize_schrodinger_and_square(well.v, X, n)
    hsol = verify.eigensolve_symmetric(hop)
    lsol = verify.eigensolve_symmetric(lop)
    for e in energies:
        gap = float(np.min(np.abs(hsol.eigenvalues - e)))
        if gap >= BOUND_STATE_TOL:
            raise CheckFailure(f"no discrete bound state within {BOUND_STATE_TOL} of {e}")
        report = verify.detect_embedded(lsol, e**2, gap_tol=SQUARE_GAP_TOL)
        if report.verdict is not verify.Verdict.EMBEDDED_CANDIDATE:
            raise CheckFailure(f"no embedded candidate at {e**2}")
    scale = float(np.max(np.abs(lsol.eigenvalues)))
    drift = float(np.max(np.abs(np.sort(hsol.eigenvalues**2) - lsol.eigenvalues)))
    if drift > SPECTRA_IDENTITY_RTOL * scale:
        raise CheckFailure(f"squared-spectrum identity violated by {drift:.3e}")
    return f"kind=hsquare X={X:g} n={n}"


def _cmd_verify(args) -> int:
    doc = serialize.load_json(args.spec)
    if "pieces" in doc:
        summary = _verify_piecewise(doc)
    elif "interfaces" in doc:
        summary = _verify_singular(doc)
    elif "potential" in doc:
        summary = _verify_hsquare(doc)
    else:
        raise ValueError("unrecognized document shape")
    print(f"verify: ok {summary}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub) -> None:
    sub.add_argument("--out", default=None, help="output directory (default $QUARTEIG_OUT or ./quarteig_out)")
    sub.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _add_scan(sub) -> None:
    sub.add_argument("--grid-step", type=float, default=1e-3)
    sub.add_argument("--scan-lo", type=float, default=0.25)
    sub.add_argument("--scan-hi", type=float, default=3.0)
    sub.add_argument("--scan-points", type=int, default=45)


def _add_triple(sub) -> None:
    sub.add_argument("--k0", type=float, default=1.0)
    sub.add_argument("--a", type=float, default=-3.0)
    sub.add_argument("--A", type=float, default=1.0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quarteig",
        description="Fourth-order operators on the line with an eigenvalue "
        "embedded in the continuous spectrum: build, sample, and verify.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("singular", help="odd point-interaction example")
    _add_scan(s)
    _add_common(s)

    s = subs.add_parser("even-variant", help="even point-interaction variant")
    _add_scan(s)
    _add_common(s)

    s = subs.add_parser("piecewise", help="even piecewise-constant potential")
    _add_triple(s)
    s.add_argument("--X", type=float, default=None, help="half-width (default 25/k0)")
    s.add_argument("--n", type=int, default=1500)
    s.add_argument("--grid-step", type=float, default=1e-3)
    _add_common(s)

    s = subs.add_parser("hsquare", help="square of a Schrodinger operator")
    s.add_argument("--X", type=float, default=20.0)
    s.add_argument("--n", type=int, default=1000)
    _add_common(s)

    s = subs.add_parser("verify", help="re-read an emitted spec and re-run its checks")
    s.add_argument("spec", help="path to an emitted JSON document")

    s = subs.add_parser("sweep", help="zero positions across the continuation bracket")
    _add_triple(s)
    s.add_argument("--points", type=int, default=40)
    _add_common(s)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "singular":
            return _cmd_singular(args, "odd")
        if args.command == "even-variant":
            return _cmd_singular(args, "even")
        if args.command == "piecewise":
            return _cmd_piecewise(args)
        if args.command == "hsquare":
            return _cmd_hsquare(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (RuntimeError, ArithmeticError) as exc:
        print(f"quarteig: numerical: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"quarteig: validation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
