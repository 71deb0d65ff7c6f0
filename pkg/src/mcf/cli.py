"""Command line front end.

Every subcommand is deterministic given its full flag set (seed
included); CSV output uses '.' decimals, ',' separators, a header row
and LF line endings, so files can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import algorithms, brun_highdim, densities, experiments, natext
from .errors import BoundaryError, DomainError, UnsupportedError
from .linalg import seeded_rng


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _parse_vector(text: str, exact: bool):
    parts = [p for p in text.replace(",", " ").split() if p]
    if exact:
        return tuple(Fraction(p) for p in parts)
    return tuple(float(p) for p in parts)


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_orbit(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    exact = args.mode == "exact"
    if args.start is not None:
        x = _parse_vector(args.start, exact)
    elif exact:
        raise DomainError("exact mode needs an explicit --start")
    else:
        x = None
    a = _parse_vector(args.dual, exact) if args.dual else None

    d = spec.dim
    header = ["n", "branch"] + [f"x{i+1}" for i in range(d)] + [f"a{i+1}" for i in range(d)]
    lines = [",".join(header)]
    if exact:
        state = natext.natext_state(x, a if a is not None else (1,) * d, exact=True)
        for n in range(args.steps + 1):
            try:
                label = algorithms.classify(spec, state.x).label
            except BoundaryError as exc:
                print(f"orbit truncated at step {n}: {exc}", file=sys.stderr)
                break
            row = [str(n), label] + [str(c) for c in state.x] + [str(c) for c in state.a]
            lines.append(",".join(row))
            if n < args.steps:
                _, state = natext.natext_step(spec, state)
    else:
        start = None
        if x is not None:
            if a is None:
                a = (1.0,) * d
            start = natext.natext_state(x, a)
        count = 0
        for s in experiments.orbit_cloud(spec, start=start, n=args.steps,
                                         seed=args.seed):
            row = ([str(s.n), s.branch] + [repr(c) for c in s.x]
                   + [repr(c) for c in s.a])
            lines.append(",".join(row))
            count += 1
        if count < args.steps + 1:
            print(f"orbit truncated after {count} samples (partition boundary)",
                  file=sys.stderr)
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_audit(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    report = natext.bijectivity_audit(spec, n_samples=args.samples,
                                      seed=args.seed, threads=args.threads)
    text = report.to_csv() if args.format == "csv" else report.to_text()
    _write(text, args.out)
    if report.total_violations:
        print(f"error category=audit-violations: "
              f"{report.total_violations} violations", file=sys.stderr)
        return 1
    return 0


def _cmd_density_check(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    model = densities.density_model(args.algo)
    d = spec.dim

    def one_point(k):
        # one RNG stream per point: the sweep is independent of the
        # thread count by construction
        rng = seeded_rng(args.seed, stream=k)
        while True:
            x = tuple(rng.dirichlet([1.0] * d))
            try:
                return x, float(densities.transfer_residual(spec, model, x))
            except (BoundaryError, DomainError):
                continue

    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one_point, range(args.points)))
    else:
        results = [one_point(k) for k in range(args.points)]

    lines = [",".join([f"x{i+1}" for i in range(d)] + ["residual"])]
    worst = 0.0
    for x, r in results:
        worst = max(worst, r)
        lines.append(",".join([repr(c) for c in x] + [repr(r)]))
    _write("\n".join(lines) + "\n", args.out)
    print(f"max residual over {args.points} points: {worst!r}")
    if args.fail_above is not None and worst > args.fail_above:
        print(f"error category=residual: max residual {worst!r} above "
              f"{args.fail_above!r}", file=sys.stderr)
        return 1
    return 0


def _cmd_mass(args) -> int:
    model = densities.density_model(args.algo)
    result = densities.total_mass(model, method=args.method, tol=args.tol,
                                  seed=args.seed)
    if args.out:
        _write(result.to_csv(), args.out)
    if result.infinite:
        print(f"total mass of {model.name}: infinite")
    else:
        print(f"total mass of {model.name}: {result.value!r} "
              f"(method={result.method}, error estimate {result.error!r})")
    return 0


def _cmd_dilog(args) -> int:
    diff = densities.dilog_identity_check()
    print(f"dilogarithm identity defect: {diff!r}")
    return 0


def _cmd_hist(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    model = densities.density_model(args.algo)
    comp = densities.empirical_density(spec, model, n_steps=args.steps,
                                       bins=args.bins, seed=args.seed)
    if args.out:
        _write(comp.to_csv(), args.out)
    print(f"histogram vs {model.name} density: L1={comp.l1!r} sup={comp.sup!r} "
          f"restarts={comp.restarts} outside={comp.outside}")
    return 0


def _cmd_brun_d(args) -> int:
    d = args.dim
    rng = seeded_rng(args.seed, stream=0)
    lines = ["point,closed_form,recursion"]
    for _ in range(args.points):
        x = brun_highdim.random_sorted_rational(d, rng)
        closed = brun_highdim.brun_density_d(x)
        rec = brun_highdim.polytope_volume_recursive(brun_highdim.density_polytope(x))
        lines.append(f"{'|'.join(str(c) for c in x)},{closed},{rec}")
        if closed != rec:
            _write("\n".join(lines) + "\n", args.out)
            print("error category=mismatch: recursion differs from closed form",
                  file=sys.stderr)
            return 1
    print(f"d={d}: recursion equals the closed form exactly at {args.points} points")
    failures = 0
    for k in range(args.oracle_points):
        x = brun_highdim.random_sorted_rational(d, rng)
        p = brun_highdim.density_polytope(x)
        exact = float(brun_highdim.polytope_volume_recursive(p))
        est, se = brun_highdim.polytope_volume_oracle(
            p, n_samples=args.oracle_samples, seed=args.seed + 1 + k)
        ok = abs(est - exact) <= 3.0 * se
        print(f"oracle point {k}: exact={exact!r} estimate={est!r} "
              f"stderr={se!r} ok={ok}")
        failures += not ok
    if args.out:
        _write("\n".join(lines) + "\n", args.out)
    if failures:
        print(f"error category=oracle: {failures} oracle points beyond 3 sigma",
              file=sys.stderr)
        return 1
    return 0


def _cmd_panels(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    order = None if args.order == "none" else args.order
    samples = experiments.orbit_cloud(spec, n=args.steps, seed=args.seed)
    grids = experiments.render_panels(spec, samples, resolution=args.res,
                                      window=tuple(args.window),
                                      draw_order=order)
    for key, grid in grids.items():
        grid.write_ppm(f"{args.out}-{key.replace('_', '-')}.ppm")
    print(f"wrote 4 panels with prefix {args.out}")
    return 0


def _cmd_fractal(args) -> int:
    spec = algorithms.get_algorithm(args.algo)
    order = None if args.order == "none" else args.order
    grid = experiments.render_fractal(
        spec, args.steps, window=tuple(args.window), resolution=args.res,
        draw_order=order, seed=args.seed, projection=args.projection,
        restart_on_boundary=args.restart_on_boundary)
    data = grid.write_ppm(args.out)
    print(f"wrote {args.out}: {len(data)} bytes, "
          f"occupancy {grid.occupancy()!r}")
    return 0


def _cmd_symmetry(args) -> int:
    img, w, h = experiments.read_ppm(args.image)
    grid = experiments.occupancy_grid_from_rgb(img, tuple(args.window))
    report = experiments.symmetry_probe(grid, tolerance=args.tolerance)
    sys.stdout.write(report.to_text())
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    algos = ", ".join(algorithms.registry_names())
    parser = argparse.ArgumentParser(
        prog="mcf",
        description="Additive multidimensional continued fraction algorithms: "
                    "orbits, natural-extension audits, invariant densities, "
                    "masses and dual-domain rasters.",
        epilog=f"registered algorithms: {algos} "
               "(brun and brun-sorted accept 'd=<n>', e.g. 'brun d=4'); "
               "density models additionally include brun-sup")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        return p

    p = add("orbit", _cmd_orbit, "natural-extension orbit as CSV")
    p.add_argument("--algo", required=True)
    p.add_argument("--mode", choices=["float", "exact"], default="float")
    p.add_argument("--start", help="comma-separated coordinates (fractions in exact mode)")
    p.add_argument("--dual", help="comma-separated dual coordinates")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = add("audit", _cmd_audit, "bijectivity audit of the natural extension domain")
    p.add_argument("--algo", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out")

    p = add("density-check", _cmd_density_check,
            "transfer-operator residual sweep as CSV")
    p.add_argument("--algo", required=True)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--fail-above", type=float)
    p.add_argument("--out")

    p = add("mass", _cmd_mass, "total mass of an invariant density")
    p.add_argument("--algo", required=True)
    p.add_argument("--method", default="auto",
                   choices=["auto", "reduced-1d", "adaptive-2d", "monte-carlo"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    add("dilog", _cmd_dilog, "dilogarithm identity check")

    p = add("hist", _cmd_hist, "orbit histogram against the closed-form density")
    p.add_argument("--algo", required=True)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = add("brun-d", _cmd_brun_d,
            "d-dimensional density / polytope-volume cross-check")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--oracle-points", type=int, default=3)
    p.add_argument("--oracle-samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = add("panels", _cmd_panels, "four orbit panels (x_n, a_n, x_n+1, a_n+1)")
    p.add_argument("--algo", required=True)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--window", type=float, nargs=4,
                   default=list(experiments.PANEL_WINDOW),
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--order", default="none",
                   choices=["none", "poincare-last", "ar-last"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output file prefix")

    p = add("fractal", _cmd_fractal, "raster of the dual orbit cloud")
    p.add_argument("--algo", required=True)
    p.add_argument("--steps", type=int, default=2_000_000)
    p.add_argument("--res", type=int, default=1024)
    p.add_argument("--window", type=float, nargs=4,
                   default=[-0.6, 0.6, -0.6, 0.6],
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--order", default="poincare-last",
                   choices=["none", "poincare-last", "ar-last"])
    p.add_argument("--projection", default="embed", choices=["embed", "beta"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--restart-on-boundary", action="store_true")
    p.add_argument("--out", required=True)

    p = add("symmetry", _cmd_symmetry, "order-3 symmetry probe of a raster")
    p.add_argument("--image", required=True, help="binary P6 file")
    p.add_argument("--window", type=float, nargs=4, default=[-1.0, 1.0, -1.0, 1.0],
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--tolerance", type=int, default=1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BoundaryError as exc:
        print(f"error category=boundary: {exc}", file=sys.stderr)
    except UnsupportedError as exc:
        print(f"error category=unsupported: {exc}", file=sys.stderr)
    except DomainError as exc:
        print(f"error category=domain: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error category=io: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
