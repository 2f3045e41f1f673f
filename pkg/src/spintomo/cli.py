"""Command-line front end.

Subcommands: simulate, reconstruct, roundtrip, condition, appendix-demo.
Every command is deterministic given its inputs and seed; structured outputs
are JSON, tabular study outputs are CSV on stdout (or --out). Exit codes:
0 success, 2 bad input, 3 singular or rank-deficient system, 4 I/O error.
The environment variable SPINTOMO_SEED supplies the default seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from .coherent import outcome_distribution, coherent_probabilities, sample_counts
from .errors import IncompleteDataError, RankDeficientDesignError, SingularBlockError
from .grid import GridSpec, build_grid, default_grid_spec
from .measurement import (
    MODE_COHERENT,
    MODE_MULTIPOLE,
    CoherentRecord,
    MeasurementSet,
    OutcomeRecord,
    read_measurement_set,
    write_measurement_set,
)
from .multipole import (
    aliasing_defect,
    cone_design_matrix,
    corrected_cone_design,
    pi_l_from_probabilities,
    reconstruct_multipole,
    single_cone_design,
)
from .policy import DEFAULT_POLICY
from .recon import condition_report, reconstruct
from .spin import DensityMatrix, Direction, TwiceSpin, random_density, validate_density


def _default_seed() -> int:
    return int(os.environ.get("SPINTOMO_SEED", "0"))


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(data: dict, path: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _write_lines(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _policy(args: argparse.Namespace):
    policy = DEFAULT_POLICY
    if getattr(args, "max_condition", None) is not None:
        policy = dataclasses.replace(policy, max_condition=args.max_condition)
    return policy


def cmd_simulate(args: argparse.Namespace) -> int:
    rho = DensityMatrix.from_json_dict(_read_json(args.state))
    s = rho.twice_s
    report = validate_density(rho, tol=DEFAULT_POLICY.psd_tol)
    if report.hermiticity_defect > DEFAULT_POLICY.hermiticity_tol:
        raise ValueError(f"state matrix is not Hermitian (defect {report.hermiticity_defect:.3e})")
    if args.shots > 0 and not report.physical:
        raise ValueError(
            f"refusing to sample shots from an unphysical state (min eigenvalue {report.min_eigenvalue:.3e})"
        )
    rng = np.random.default_rng(args.seed)

    if args.mode == MODE_COHERENT:
        spec = default_grid_spec(s, r=args.r, delta=args.delta)
        grid = build_grid(spec)
        records = []
        if args.shots == 0:
            probs = coherent_probabilities(rho, grid.directions)
            for point, p in zip(grid.points, probs):
                records.append(
                    CoherentRecord(
                        q=point.q,
                        r_index=point.r_index,
                        theta=point.direction.theta,
                        phi=point.direction.phi,
                        p_s=float(p),
                        shots=0,
                    )
                )
        else:
            for point in grid.points:
                dist = outcome_distribution(rho, point.direction)
                counts = sample_counts(dist, args.shots, rng).counts
                records.append(
                    CoherentRecord(
                        q=point.q,
                        r_index=point.r_index,
                        theta=point.direction.theta,
                        phi=point.direction.phi,
                        p_s=int(counts[0]) / args.shots,
                        shots=args.shots,
                        count_s=int(counts[0]),
                    )
                )
        meas = MeasurementSet(twice_s=s, mode=MODE_COHERENT, records=records, grid=spec)
    else:
        design = corrected_cone_design(s)
        records = []
        for j, theta in enumerate(design.thetas):
            for a, phi in enumerate(design.azimuths):
                d = Direction(theta=theta, phi=float(phi))
                dist = outcome_distribution(rho, d)
                if args.shots == 0:
                    records.append(
                        OutcomeRecord(
                            cone=j, azimuth=a, theta=theta, phi=float(phi),
                            probs=tuple(float(p) for p in dist.probs), shots=0,
                        )
                    )
                else:
                    counts = sample_counts(dist, args.shots, rng).counts
                    records.append(
                        OutcomeRecord(
                            cone=j, azimuth=a, theta=theta, phi=float(phi),
                            probs=tuple(int(c) / args.shots for c in counts),
                            shots=args.shots, counts=tuple(int(c) for c in counts),
                        )
                    )
        meas = MeasurementSet(twice_s=s, mode=MODE_MULTIPOLE, records=records, design=design)

    write_measurement_set(meas, args.out)
    return 0


def _multipole_probs(meas: MeasurementSet) -> np.ndarray:
    design = meas.design
    n = meas.twice_s.dim
    shape = (len(design.thetas), design.azimuth_count, n)
    probs = np.zeros(shape)
    seen = np.zeros(shape[:2], dtype=int)
    for rec in meas.records:
        if not (0 <= rec.cone < shape[0] and 0 <= rec.azimuth < shape[1]):
            raise IncompleteDataError(f"design label (cone={rec.cone}, azimuth={rec.azimuth}) out of range")
        if len(rec.probs) != n:
            raise IncompleteDataError(f"record (cone={rec.cone}, azimuth={rec.azimuth}) has {len(rec.probs)} outcomes, expected {n}")
        seen[rec.cone, rec.azimuth] += 1
        probs[rec.cone, rec.azimuth] = rec.probs
    if (seen != 1).any():
        j, a = np.argwhere(seen != 1)[0]
        word = "duplicate" if seen[j, a] > 1 else "missing"
        raise IncompleteDataError(f"{word} measurement for design point (cone={j}, azimuth={a})")
    return probs


def cmd_reconstruct(args: argparse.Namespace) -> int:
    meas = read_measurement_set(args.meas)
    policy = _policy(args)
    if meas.mode == MODE_COHERENT:
        rho, diag = reconstruct(
            meas, renormalize=args.renormalize, project_psd=args.project_psd, policy=policy
        )
    else:
        rho, diag = reconstruct_multipole(
            _multipole_probs(meas), meas.design, meas.twice_s,
            renormalize=args.renormalize, project_psd=args.project_psd, policy=policy,
        )
    _write_json(rho.to_json_dict(), args.out)
    if args.diagnostics is not None:
        _write_json(diag.to_json_dict(), args.diagnostics)
    print(
        f"trace_defect={diag.trace_defect:.3e} hermiticity_defect={diag.hermiticity_defect:.3e} "
        f"min_eigenvalue={diag.min_eigenvalue:.3e}",
        file=sys.stderr,
    )
    return 0


def cmd_roundtrip(args: argparse.Namespace) -> int:
    s = TwiceSpin(args.twice_s)
    spec = default_grid_spec(s, r=args.r, delta=args.delta)
    grid = build_grid(spec)
    lines = ["trial,shots,max_abs_error,trace_defect,hermiticity_defect,min_eig"]
    for trial in range(args.trials):
        rho = random_density(s, np.random.default_rng([args.seed, trial, 0]))
        records = []
        if args.shots == 0:
            probs = coherent_probabilities(rho, grid.directions)
            for point, p in zip(grid.points, probs):
                records.append(CoherentRecord(
                    q=point.q, r_index=point.r_index,
                    theta=point.direction.theta, phi=point.direction.phi,
                    p_s=float(p), shots=0,
                ))
        else:
            rng = np.random.default_rng([args.seed, trial, 1])
            for point in grid.points:
                dist = outcome_distribution(rho, point.direction)
                counts = sample_counts(dist, args.shots, rng).counts
                records.append(CoherentRecord(
                    q=point.q, r_index=point.r_index,
                    theta=point.direction.theta, phi=point.direction.phi,
                    p_s=int(counts[0]) / args.shots, shots=args.shots, count_s=int(counts[0]),
                ))
        meas = MeasurementSet(twice_s=s, mode=MODE_COHERENT, records=records, grid=spec)
        rho_hat, diag = reconstruct(meas, policy=_policy(args))
        err = float(np.abs(rho_hat.entries - rho.entries).max())
        lines.append(
            f"{trial},{args.shots},{err!r},{diag.trace_defect!r},"
            f"{diag.hermiticity_defect!r},{diag.min_eigenvalue!r}"
        )
    _write_lines(lines, args.out)
    return 0


def cmd_condition(args: argparse.Namespace) -> int:
    s = TwiceSpin(args.twice_s)
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    rs = np.linspace(args.r_min, args.r_max, args.steps)
    lines = ["r,m,kappa"]
    best: tuple[float, float] | None = None
    for r in map(float, rs):
        if abs(r - 1.0) < 1e-6 or r <= 0:
            print(f"warning: skipping r={r!r} (circle radii would coincide)", file=sys.stderr)
            continue
        report = condition_report(s, GridSpec(twice_s=s, r=float(r), delta=args.delta))
        for m, kappa in enumerate(report.effective):
            lines.append(f"{float(r)!r},{m},{kappa!r}")
        worst = report.worst_effective
        if best is None or worst < best[0]:
            best = (worst, float(r))
    _write_lines(lines, args.out)
    if best is not None:
        print(f"recommended r = {best[1]!r} (worst-case kappa = {best[0]:.6e})", file=sys.stderr)
    return 0


def cmd_appendix_demo(args: argparse.Namespace) -> int:
    s = TwiceSpin(args.twice_s)
    ts = s.twice_s
    n = s.dim
    out = sys.stdout

    report = aliasing_defect(s)
    out.write(f"azimuthal averaging on a single cone, spin 2s={ts}\n")
    out.write(f"  {n}-point average:   max defect against the aliased identity = {report.max_defect_aliased:.3e}\n")
    out.write(f"  {2 * ts + 1}-point average:   max defect against the pure delta     = {report.max_defect_corrected:.3e}\n")
    out.write(f"  aliased mode pairs (m, m') with |m - m'| = {n}:\n")
    for m, mp in report.aliased_pairs:
        out.write(f"    ({m:+d}, {mp:+d})\n")

    single = cone_design_matrix(s, single_cone_design(s))
    corrected = cone_design_matrix(s, corrected_cone_design(s))
    out.write(f"single-cone design ({n} azimuths): rank {single.rank} of {single.n_unknowns} unknowns")
    out.write(" (rank-deficient, reconstruction impossible)\n" if not single.full_rank else "\n")
    out.write(f"corrected design ({n} cones x {2 * ts + 1} azimuths): rank {corrected.rank} of {corrected.n_unknowns} unknowns")
    out.write(" (full rank)\n" if corrected.full_rank else "\n")

    design = corrected_cone_design(s)
    rho = random_density(s, np.random.default_rng([args.seed, 0]))
    probs = np.zeros((len(design.thetas), design.azimuth_count, n))
    pi0_worst = 0.0
    for j, theta in enumerate(design.thetas):
        for a, phi in enumerate(design.azimuths):
            dist = outcome_distribution(rho, Direction(theta=theta, phi=float(phi)))
            probs[j, a] = dist.probs
            pi0_worst = max(pi0_worst, abs(pi_l_from_probabilities(dist, 0) - 1.0))
    rho_hat, _ = reconstruct_multipole(probs, design, s)
    err = float(np.abs(rho_hat.entries - rho.entries).max())
    out.write(f"corrected-design round trip on a random state: max entry error = {err:.3e}\n")
    out.write(f"band-0 combination across all directions: max |Pi_0 - 1| = {pi0_worst:.3e}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintomo",
        description="Simulate Stern-Gerlach coherent-state probabilities and reconstruct spin density matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward-simulate a measurement set from a state file")
    p.add_argument("state", help="density matrix JSON file")
    p.add_argument("--out", required=True, help="output measurement JSON file")
    p.add_argument("--mode", choices=[MODE_COHERENT, MODE_MULTIPOLE], default=MODE_COHERENT)
    p.add_argument("--r", type=float, default=None, help="radial base of the grid (default: tuned per spin)")
    p.add_argument("--delta", type=float, default=None, help="azimuthal shift (default: 1/(2s+1))")
    p.add_argument("--shots", type=int, default=0, help="shots per direction; 0 = exact probabilities")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct the density matrix from a measurement file")
    p.add_argument("meas", help="measurement JSON file")
    p.add_argument("--out", default=None, help="output density matrix JSON file (default: stdout)")
    p.add_argument("--diagnostics", default=None, help="optional diagnostics JSON file")
    p.add_argument("--renormalize", action="store_true", help="divide the estimate by its trace")
    p.add_argument("--project-psd", action="store_true", help="clip negative eigenvalues, then renormalize")
    p.add_argument("--max-condition", type=float, default=None, help="refusal threshold for block solves")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("roundtrip", help="simulate + reconstruct random states, emit an error table")
    p.add_argument("--twice-s", type=int, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--max-condition", type=float, default=None)
    p.add_argument("--out", default=None, help="output CSV file (default: stdout)")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("condition", help="scan the radial base r against block condition numbers")
    p.add_argument("--twice-s", type=int, required=True)
    p.add_argument("--r-min", type=float, required=True)
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out", default=None, help="output CSV file (default: stdout)")
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("appendix-demo", help="demonstrate the aliasing failure and its corrected design")
    p.add_argument("--twice-s", type=int, required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_appendix_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SingularBlockError, RankDeficientDesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (IncompleteDataError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
