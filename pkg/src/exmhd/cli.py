"""Command-line entry point: ``exmhd <command> ...``.

Exit codes: 0 ok, 1 check failed, 2 bad input, 3 runtime abort.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import ConfigError, SimConfig
from .equilibria import as_state, beltrami3, mhs_residual, slab2, MhsCandidate
from .exterior import d, inner
from .hodge import hodge_decompose
from .invariants import ReportFlags, default_battery, report
from .lattice import build_box
from .mhd import Closure, DensityError, NonFiniteError, run
from .snapshot import SnapshotError, read_snapshot, write_snapshot

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ABORT = 0, 1, 2, 3
EQ_TOL = 1e-10


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def csv_text(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if reports:
        writer.writerow(reports[0].columns())
        for rep in reports:
            writer.writerow([format_float(v) for v in rep.values()])
    return buf.getvalue()


def write_csv(reports, path) -> None:
    Path(path).write_text(csv_text(reports), encoding="utf-8")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _print_results(results) -> int:
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_identities(args) -> int:
    bad = [n for n in args.n if not 2 <= n <= 6]
    if bad:
        print(f"error: dimensions must lie in [2, 6], got {bad}", file=sys.stderr)
        return EXIT_INPUT
    results = checks.identity_suite(args.n, points=args.points)
    results += checks.hodge_suite([c for c in ((3, 1), (3, 2), (4, 2), (5, 2)) if c[0] in args.n])
    return _print_results(results)


def cmd_oracle(args) -> int:
    bad = [n for n in args.n if not 2 <= n <= 6]
    if bad:
        print(f"error: dimensions must lie in [2, 6], got {bad}", file=sys.stderr)
        return EXIT_INPUT
    return _print_results(checks.oracle_suite(args.n, samples=args.samples))


def cmd_run(args) -> int:
    try:
        cfg = SimConfig.load(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    csv_path = out_dir / cfg.csv
    snap_dir = out_dir / cfg.snapshot_dir if cfg.snapshot_dir else None

    def on_snapshot(step, state):
        snap_dir.mkdir(parents=True, exist_ok=True)
        write_snapshot(snap_dir / f"snap_{step:06d}.nfrm", state, euler=cfg.mode == "euler")

    try:
        result = run(cfg, on_snapshot=on_snapshot if snap_dir else None)
    except (DensityError, NonFiniteError) as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(result.reports, csv_path)
    print(f"wrote {len(result.reports)} report rows to {csv_path}")
    return EXIT_OK


def _closure_from_args(args) -> Closure:
    return Closure(kind=args.closure, rho0=args.rho0, c=args.c, K=args.K, gamma=args.gamma, mu0=args.mu0)


def cmd_invariants(args) -> int:
    try:
        snap = read_snapshot(args.snapshot)
        closure = _closure_from_args(args)
    except (OSError, SnapshotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not snap.is_state:
        print("error: snapshot holds a single form, not an MHD state", file=sys.stderr)
        return EXIT_INPUT
    state = snap.obj
    if args.symmetric_axis is not None and not 0 <= args.symmetric_axis < state.box.n:
        print("error: symmetric axis out of range", file=sys.stderr)
        return EXIT_INPUT
    flags = ReportFlags(mhd=not snap.euler, symmetric_axis=args.symmetric_axis)
    try:
        rep = report(state, closure, default_battery(), flags)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(csv_text([rep]))
    return EXIT_OK


def _decompose_lines(label, w) -> tuple[list[str], float]:
    parts = hodge_decompose(w)
    total = inner(w, w)
    norms = {name: inner(getattr(parts, name), getattr(parts, name)) for name in ("exact", "coexact", "harmonic")}
    pyth = abs(sum(norms.values()) - total) / max(total, 1e-300)
    lines = [f"{label}: |w|={math.sqrt(total):.17g}"]
    lines += [f"  {name:<8s} norm={math.sqrt(v):.17g}" for name, v in norms.items()]
    lines.append(f"  pythagoras residual={pyth:.3e}")
    return lines, pyth


def cmd_decompose(args) -> int:
    try:
        snap = read_snapshot(args.snapshot)
    except (OSError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if snap.is_state:
        state = snap.obj
        B = d(state.A) if state.xi is None else d(state.A) + state.xi
        targets = [("u", state.u), ("B", B)]
    else:
        w = snap.obj
        if not 0 < w.degree < w.box.n:
            print(f"error: decomposition needs 0 < k < n, got k={w.degree}", file=sys.stderr)
            return EXIT_INPUT
        targets = [(f"{w.degree}-form", w)]
    worst = 0.0
    for label, w in targets:
        lines, pyth = _decompose_lines(label, w)
        print("\n".join(lines))
        worst = max(worst, pyth)
    return EXIT_OK if worst <= 1e-9 else EXIT_FAIL


def cmd_equilibrium(args) -> int:
    try:
        if args.name == "beltrami3":
            box = build_box(3, [args.points] * 3)
            a, b, c = (args.params + [1.0, 1.0, 1.0])[:3]
            cand = beltrami3(box, a, b, c)
        elif args.name == "slab2":
            box = build_box(2, [args.points] * 2)
            amp = args.params[0] if args.params else 0.3
            cand = slab2(box, lambda x: 1.0 + amp * np.sin(x))
        else:
            print(f"error: unknown fixture {args.name!r} (beltrami3, slab2)", file=sys.stderr)
            return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.noise > 0:
        rng = np.random.default_rng(args.seed)
        h = cand.h + args.noise * (np.abs(cand.h).max() or 1.0) * rng.standard_normal(cand.h.shape)
        cand = MhsCandidate(cand.B, h, cand.rho0, cand.mu0)
    force, closed = mhs_residual(cand)
    print(f"fixture={args.name} force_res={force:.3e} closure_res={closed:.3e}")
    ok = force <= EQ_TOL and closed <= EQ_TOL
    if args.snapshot:
        write_snapshot(args.snapshot, as_state(cand))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exmhd", description="Ideal MHD with differential forms on flat n-tori.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("identities", help="exterior calculus and Hodge identity suite")
    s.add_argument("--n", type=_int_list, default=[2, 3, 4, 5])
    s.add_argument("--points", type=int, default=16)
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("oracle", help="pointwise algebra against dense tensors")
    s.add_argument("--n", type=_int_list, default=[2, 3, 4, 5, 6])
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("run", help="run a simulation from a JSON config")
    s.add_argument("config")
    s.add_argument("--out-dir", default=None, help="directory for CSV and snapshots (default: cwd)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("invariants", help="evaluate invariants of a state snapshot")
    s.add_argument("snapshot")
    s.add_argument("--closure", default="isothermal", choices=["incompressible", "isothermal", "polytropic"])
    s.add_argument("--rho0", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=5.0 / 3.0)
    s.add_argument("--mu0", type=float, default=1.0)
    s.add_argument("--symmetric-axis", type=int, default=None, help="0-based axis")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("decompose", help="Hodge-decompose a snapshot")
    s.add_argument("snapshot")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("equilibrium", help="residuals of an equilibrium fixture")
    s.add_argument("name", help="beltrami3 or slab2")
    s.add_argument("params", nargs="*", type=float, help="beltrami3: a b c; slab2: amplitude")
    s.add_argument("--points", type=int, default=16)
    s.add_argument("--noise", type=float, default=0.0, help="relative noise added to h")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--snapshot", default=None, help="write the fixture as a static state")
    s.set_defaults(func=cmd_equilibrium)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
