"""Command-line interface.

Subcommands:

* ``kernel``   -- kernel values by both quadrature routes for a list of offsets
* ``spectrum`` -- full Dirichlet spectrum of a domain
* ``bounds``   -- eigenvalue-sum bound report (CSV/JSON, optional SVG plot)
* ``verify``   -- aggregated invariant suite, JSON report
* ``sweep``    -- bound-gap summary over a family of domains and orders
* ``plot``     -- SVG of the eigenvalue-average staircase against both bounds

Exit codes: 0 success, 2 usage/parse error, 3 numeric failure, 4 a
verification inequality failed.  All output is deterministic for a fixed
command line and seed; wall-clock timings go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bounds import BoundReport, verify_bounds
from .domains import Domain, make_box, make_l_shape, make_random_connected, read_domain
from .exceptions import ConvergenceError, DomainFormatError, NumericError
from .kernel import AlphaParam, QuadratureSpec, kernel_fourier, kernel_time_integral
from .operator import assemble, boundary_term
from .reporting import significant
from .spectrum import eigen_decompose, write_eigenvector_csv, write_spectrum_csv
from .verify import run_verification

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_VERIFICATION = 4

DEFAULT_MAX_SIZE = 4000
_GENERATOR_DIMS = (1, 2, 3)


# ---------------------------------------------------------------------------
# argument plumbing


def _add_quadrature_flags(parser):
    parser.add_argument("--grid", type=int, default=None,
                        help="Fourier grid points per dimension (even, >= 16)")
    parser.add_argument("--rel-tol", type=float, default=None,
                        help="relative tolerance of the time-integral route")
    parser.add_argument("--abs-tol", type=float, default=None,
                        help="absolute tolerance of the time-integral route")


def _add_domain_flags(parser):
    parser.add_argument("--domain-file", help="JSON domain file")
    parser.add_argument("--family", choices=("box", "l_shape", "random"),
                        help="generated domain family")
    parser.add_argument("--dim", type=int, default=None, help="lattice dimension")
    parser.add_argument("--sides", help="comma-separated box side lengths")
    parser.add_argument("--arm", type=int, help="L-shape arm length")
    parser.add_argument("--size", type=int, help="random family vertex count")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE,
                        help="size guard on |domain| (default 4000)")


def _add_output_flags(parser, formats=("csv", "json")):
    parser.add_argument("--output", default="-", help="output path ('-' = stdout)")
    if formats:
        parser.add_argument("--format", choices=formats, default=formats[0],
                            help="output format")


def _quadrature_from(args) -> QuadratureSpec:
    kwargs = {}
    if getattr(args, "grid", None) is not None:
        kwargs["fourier_grid_per_dim"] = args.grid
    if getattr(args, "rel_tol", None) is not None:
        kwargs["rel_tol"] = args.rel_tol
    if getattr(args, "abs_tol", None) is not None:
        kwargs["abs_tol"] = args.abs_tol
    return QuadratureSpec(**kwargs)


def _resolve_domain(args) -> Domain:
    if args.domain_file:
        domain = read_domain(args.domain_file)
    elif args.family == "box":
        if not args.sides:
            raise ValueError("--family box requires --sides")
        sides = [int(s) for s in args.sides.split(",") if s.strip()]
        dim = args.dim if args.dim is not None else len(sides)
        if dim not in _GENERATOR_DIMS:
            raise ValueError(f"generator dimension must be one of {_GENERATOR_DIMS}")
        domain = make_box(dim, sides)
    elif args.family == "l_shape":
        if args.arm is None:
            raise ValueError("--family l_shape requires --arm")
        domain = make_l_shape(args.arm)
    elif args.family == "random":
        if args.size is None:
            raise ValueError("--family random requires --size")
        dim = args.dim if args.dim is not None else 2
        if dim not in _GENERATOR_DIMS:
            raise ValueError(f"generator dimension must be one of {_GENERATOR_DIMS}")
        domain = make_random_connected(dim, args.size, args.seed)
    else:
        raise ValueError("no domain given: use --domain-file or --family")
    if len(domain) > args.max_size:
        raise ValueError(
            f"domain has {len(domain)} vertices, above the size guard "
            f"{args.max_size} (raise with --max-size)"
        )
    return domain


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _parse_offsets(spec: str, dim: int):
    offsets = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = [int(c) for c in chunk.split(",") if c.strip()]
        if len(coords) != dim:
            raise ValueError(f"offset {chunk!r} has {len(coords)} coordinates, expected {dim}")
        if not any(coords):
            raise ValueError("offsets must be nonzero")
        offsets.append(tuple(coords))
    if not offsets:
        raise ValueError("no offsets given")
    return offsets


def _parse_int_list(spec: str):
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) == 2:
            start, stop = parts
            step = 1
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ValueError(f"bad range {spec!r}; use start:stop[:step]")
        if step < 1 or stop < start:
            raise ValueError(f"bad range {spec!r}")
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",") if p.strip()]


def _parse_float_list(spec: str):
    return [float(p) for p in spec.split(",") if p.strip()]


def _thread_count(tasks: int) -> int:
    limit = os.cpu_count() or 1
    env = os.environ.get("FRACLAP_THREADS")
    if env:
        limit = min(limit, max(1, int(env)))
    return max(1, min(tasks, limit))


# ---------------------------------------------------------------------------
# SVG plot


def _svg_polyline(points, color, width=1.5, dash=None):
    coords = " ".join(f"{x:.6g},{y:.6g}" for x, y in points)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
            f'{extra} points="{coords}"/>')


def render_bounds_svg(report: BoundReport, title: str) -> str:
    """Self-contained SVG: eigenvalue-average staircase, both bound curves,
    and eligibility shading."""
    width, height = 760, 520
    left, right, top, bottom = 70, 20, 46, 56
    plot_w = width - left - right
    plot_h = height - top - bottom
    n = report.omega_size
    values = [r.avg for r in report.rows]
    values += [r.upper_avg for r in report.rows if r.upper_avg is not None]
    values += [r.lower_avg for r in report.rows if r.lower_avg is not None]
    y_max = 1.05 * max(values)
    x_min, x_max = 0.5, n + 0.5

    def sx(k):
        return left + (k - x_min) / (x_max - x_min) * plot_w

    def sy(v):
        return top + plot_h - v / y_max * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="24" font-family="sans-serif" font-size="15">{title}</text>',
    ]
    # eligibility shading
    if report.ranges.k_max_upper_avg >= 1:
        parts.append(
            f'<rect x="{sx(0.5):.6g}" y="{top}" '
            f'width="{sx(report.ranges.k_max_upper_avg + 0.5) - sx(0.5):.6g}" '
            f'height="{plot_h}" fill="#4878cf" opacity="0.07"/>'
        )
    if report.ranges.k_max_lower >= 1:
        parts.append(
            f'<rect x="{sx(0.5):.6g}" y="{top}" '
            f'width="{sx(report.ranges.k_max_lower + 0.5) - sx(0.5):.6g}" '
            f'height="{plot_h}" fill="#6acc65" opacity="0.10"/>'
        )
    # axes
    parts.append(f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
                 f'y2="{top + plot_h}" stroke="black"/>')
    parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
                 f'stroke="black"/>')
    x_ticks = sorted({1, max(1, n // 4), max(1, n // 2), max(1, 3 * n // 4), n})
    for k in x_ticks:
        parts.append(f'<line x1="{sx(k):.6g}" y1="{top + plot_h}" x2="{sx(k):.6g}" '
                     f'y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{sx(k):.6g}" y="{top + plot_h + 20}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="middle">{k}</text>')
    for i in range(6):
        v = y_max * i / 5.0
        parts.append(f'<line x1="{left - 5}" y1="{sy(v):.6g}" x2="{left}" '
                     f'y2="{sy(v):.6g}" stroke="black"/>')
        parts.append(f'<text x="{left - 9}" y="{sy(v) + 4:.6g}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'text-anchor="end">{v:.3g}</text>')
    parts.append(f'<text x="{left + plot_w / 2:.6g}" y="{height - 14}" '
                 f'font-family="sans-serif" font-size="13" text-anchor="middle">k</text>')
    # staircase of running averages
    stair = []
    for r in report.rows:
        stair.append((sx(r.k - 0.5), sy(r.avg)))
        stair.append((sx(r.k + 0.5), sy(r.avg)))
    parts.append(_svg_polyline(stair, "#222222", width=1.8))
    upper_pts = [(sx(r.k), sy(r.upper_avg)) for r in report.rows if r.upper_avg is not None]
    if upper_pts:
        parts.append(_svg_polyline(upper_pts, "#4878cf", width=1.6))
    lower_pts = [(sx(r.k), sy(r.lower_avg)) for r in report.rows if r.lower_avg is not None]
    if lower_pts:
        parts.append(_svg_polyline(lower_pts, "#6acc65", width=1.6))
    next_pts = [(sx(r.k), sy(r.upper_next)) for r in report.rows
                if r.upper_next is not None and r.upper_next <= y_max]
    if next_pts:
        parts.append(_svg_polyline(next_pts, "#4878cf", width=1.2, dash="5,4"))
    legend = [
        ("#222222", "eigenvalue average", None),
        ("#4878cf", "upper bound (average)", None),
        ("#4878cf", "upper bound (next eigenvalue)", "5,4"),
        ("#6acc65", "lower bound", None),
    ]
    ly = top + 12
    for color, label, dash in legend:
        parts.append(_svg_polyline([(left + plot_w - 235, ly), (left + plot_w - 205, ly)],
                                   color, width=2.0, dash=dash))
        parts.append(f'<text x="{left + plot_w - 198}" y="{ly + 4}" '
                     f'font-family="sans-serif" font-size="11">{label}</text>')
        ly += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_kernel(args) -> int:
    if args.dim is None:
        raise ValueError("kernel requires --dim")
    if args.dim < 1:
        raise ValueError(f"dimension must be >= 1, got {args.dim}")
    alpha = AlphaParam(args.alpha)
    quad = _quadrature_from(args)
    offsets = _parse_offsets(args.offsets, args.dim)
    rows = []
    for off in offsets:
        via_time = kernel_time_integral(off, alpha, quad)
        via_fourier = kernel_fourier(off, alpha, quad)
        rows.append((off, via_time, via_fourier, abs(via_time - via_fourier)))
    if args.format == "json":
        payload = [
            {
                "offset": list(off),
                "q_time": t,
                "q_fourier": f,
                "abs_diff": d,
            }
            for off, t, f, d in rows
        ]
        _write_text(args.output, json.dumps(payload, indent=2) + "\n")
    else:
        lines = ["offset,q_time,q_fourier,abs_diff"]
        for off, t, f, d in rows:
            off_text = " ".join(str(c) for c in off)
            lines.append(f"{off_text},{t:.17g},{f:.17g},{d:.17g}")
        _write_text(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    domain = _resolve_domain(args)
    alpha = AlphaParam(args.alpha)
    quad = _quadrature_from(args)
    spectrum = eigen_decompose(assemble(domain, alpha, quad))
    if args.format == "json":
        payload = {
            "dim": domain.dim,
            "alpha": alpha.alpha,
            "omega_size": len(domain),
            "eigenvalues": [float(x) for x in spectrum.eigenvalues],
        }
        _write_text(args.output, json.dumps(payload, indent=2) + "\n")
    else:
        if args.output == "-":
            lines = ["k,lambda_k"]
            lines += [f"{k},{lam:.17g}" for k, lam in
                      enumerate(spectrum.eigenvalues, start=1)]
            _write_text("-", "\n".join(lines) + "\n")
        else:
            write_spectrum_csv(spectrum, args.output)
    if args.eigenvectors:
        write_eigenvector_csv(spectrum, args.eigenvectors)
    return EXIT_OK


def _bounds_report(args):
    domain = _resolve_domain(args)
    alpha = AlphaParam(args.alpha)
    quad = _quadrature_from(args)
    op = assemble(domain, alpha, quad)
    boundary = boundary_term(domain, alpha, quad)
    spectrum = eigen_decompose(op)
    report = verify_bounds(domain, alpha, spectrum, boundary)
    return domain, report


def _cmd_bounds(args) -> int:
    domain, report = _bounds_report(args)
    if args.format == "json":
        _write_text(args.output, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        _write_text(args.output, report.to_csv())
    if args.plot:
        title = (f"|domain| = {report.omega_size}, d = {report.dim}, "
                 f"alpha = {significant(report.alpha, 6)}")
        _write_text(args.plot, render_bounds_svg(report, title))
    if not report.all_pass:
        bad = ", ".join(str(r.k) for r in report.violations())
        print(f"bound violation at k = {bad}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def _cmd_plot(args) -> int:
    _, report = _bounds_report(args)
    title = (f"|domain| = {report.omega_size}, d = {report.dim}, "
             f"alpha = {significant(report.alpha, 6)}")
    _write_text(args.output, render_bounds_svg(report, title))
    return EXIT_OK


def _cmd_verify(args) -> int:
    domain = _resolve_domain(args)
    alpha = AlphaParam(args.alpha)
    quad = _quadrature_from(args)
    report = run_verification(domain, alpha, quad, seed=args.seed,
                              skip_ground_state=args.skip_ground_state)
    _write_text(args.output, report.to_json() + "\n")
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        print(f"verification failed: {names}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


_SWEEP_HEADER = (
    "family,instance,alpha,dim,omega_size,lambda_1,boundary,"
    "rel_gap_upper_avg,rel_gap_upper_next,rel_gap_lower"
)


def _sweep_domain(family: str, dim: int, instance: int, seed: int) -> Domain:
    if family == "box":
        return make_box(dim, [instance] * dim)
    if family == "l_shape":
        return make_l_shape(instance)
    return make_random_connected(dim, instance, seed)


def _sweep_row(args, family, dim, instance, alpha_value):
    start = time.perf_counter()
    domain = _sweep_domain(family, dim, instance, args.seed)
    if len(domain) > args.max_size:
        raise ValueError(
            f"sweep instance {instance} has {len(domain)} vertices, above the "
            f"size guard {args.max_size}"
        )
    alpha = AlphaParam(alpha_value)
    quad = _quadrature_from(args)
    op = assemble(domain, alpha, quad)
    boundary = boundary_term(domain, alpha, quad)
    spectrum = eigen_decompose(op)
    report = verify_bounds(domain, alpha, spectrum, boundary)

    def mean_gap(select):
        gaps = [select(r) for r in report.rows if select(r) is not None]
        return significant(float(np.mean(gaps))) if gaps else ""

    row = ",".join([
        family,
        str(instance),
        significant(alpha_value),
        str(domain.dim),
        str(len(domain)),
        significant(float(spectrum.eigenvalues[0])),
        significant(boundary.value),
        mean_gap(lambda r: None if r.upper_avg is None
                 else (r.upper_avg - r.avg) / r.upper_avg),
        mean_gap(lambda r: None if r.upper_next is None
                 else (r.upper_next - r.lambda_next) / r.upper_next),
        mean_gap(lambda r: None if r.lower_avg is None
                 else (r.avg - r.lower_avg) / r.avg),
    ])
    return row, time.perf_counter() - start


def _cmd_sweep(args) -> int:
    if args.family is None:
        raise ValueError("sweep requires --family")
    dim = args.dim if args.dim is not None else (2 if args.family != "box" else 1)
    if args.family == "l_shape":
        dim = 2
    if dim not in _GENERATOR_DIMS:
        raise ValueError(f"generator dimension must be one of {_GENERATOR_DIMS}")
    instances = _parse_int_list(args.sizes)
    alphas = _parse_float_list(args.alphas)
    tasks = [(instance, a) for instance in instances for a in alphas]
    workers = _thread_count(len(tasks))

    def run(task):
        instance, a = task
        return _sweep_row(args, args.family, dim, instance, a)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    lines = [_SWEEP_HEADER] + [row for row, _ in results]
    _write_text(args.output, "\n".join(lines) + "\n")
    for (instance, a), (_, elapsed) in zip(tasks, results):
        print(f"sweep {args.family} instance={instance} alpha={a}: "
              f"{elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclap",
        description="Dirichlet fractional Laplacian on finite lattice domains: "
                    "kernels, spectra, and eigenvalue-sum bound verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", help="kernel values by both routes")
    p_kernel.add_argument("--dim", type=int, required=False)
    p_kernel.add_argument("--alpha", type=float, required=True)
    p_kernel.add_argument("--offsets", required=True,
                          help='e.g. "1,2,3" (d=1) or "1,0;1,1" (d=2)')
    _add_quadrature_flags(p_kernel)
    _add_output_flags(p_kernel)

    p_spec = sub.add_parser("spectrum", help="full Dirichlet spectrum")
    p_spec.add_argument("--alpha", type=float, required=True)
    p_spec.add_argument("--eigenvectors", default=None,
                        help="also write the eigenvector matrix CSV here")
    _add_domain_flags(p_spec)
    _add_quadrature_flags(p_spec)
    _add_output_flags(p_spec)

    p_bounds = sub.add_parser("bounds", help="eigenvalue-sum bound report")
    p_bounds.add_argument("--alpha", type=float, required=True)
    p_bounds.add_argument("--plot", default=None, help="also write an SVG here")
    _add_domain_flags(p_bounds)
    _add_quadrature_flags(p_bounds)
    _add_output_flags(p_bounds)

    p_verify = sub.add_parser("verify", help="aggregated invariant suite")
    p_verify.add_argument("--alpha", type=float, required=True)
    p_verify.add_argument("--skip-ground-state", action="store_true",
                          help="skip the ground-state positivity check")
    _add_domain_flags(p_verify)
    _add_quadrature_flags(p_verify)
    _add_output_flags(p_verify, formats=None)

    p_sweep = sub.add_parser("sweep", help="bound-gap summary over a family")
    p_sweep.add_argument("--family", choices=("box", "l_shape", "random"))
    p_sweep.add_argument("--dim", type=int, default=None)
    p_sweep.add_argument("--sizes", required=True,
                         help='instances, e.g. "10:100:10" or "10,20,50"')
    p_sweep.add_argument("--alphas", required=True, help='e.g. "0.5,1.0,1.5"')
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
    _add_quadrature_flags(p_sweep)
    _add_output_flags(p_sweep, formats=None)

    p_plot = sub.add_parser("plot", help="SVG of averages against both bounds")
    p_plot.add_argument("--alpha", type=float, required=True)
    _add_domain_flags(p_plot)
    _add_quadrature_flags(p_plot)
    _add_output_flags(p_plot, formats=None)

    return parser


_DISPATCH = {
    "kernel": _cmd_kernel,
    "spectrum": _cmd_spectrum,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.command](args)
    except (DomainFormatError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, NumericError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
