"""Aggregated invariant suite for one (domain, alpha) pair.

Runs every cross-route consistency check the package exposes: heat-kernel
structure, dual-method kernel agreement, matrix invariants, spectral
structure, Parseval and multiplier-form identities, plane-wave and projection
inequalities, and the full bound report.  Produces a CheckReport suitable for
JSON output; all randomness is drawn from one seeded generator.
"""

from __future__ import annotations

import math

import numpy as np

from . import bounds as bounds_mod
from .domains import Domain
from .fourier import multiplier_form_check, plancherel_check, plane_wave_bound_check
from .kernel import (
    AlphaParam,
    QuadratureSpec,
    heat_kernel,
    heat_kernel_1d,
    heat_mass_radius,
    kernel_fourier,
    kernel_time_integral,
)
from .operator import assemble, boundary_term, quadratic_form, solve_poisson
from .reporting import CheckReport
from .spectrum import RESIDUAL_TOL, eigen_decompose, validate_spectrum

__all__ = ["run_verification"]

_DUAL_TOL = 1e-8
_MASS_TOL = 1e-10
_SEMIGROUP_TOL = 1e-10
_FORM_ROUTE_TOL = 1e-10
_POISSON_TOL = 1e-9
_TRACE_TOL = 1e-8
_PLANCHEREL_TOL = 1e-12
_FORM_CHECK_TOL = 1e-6
_SLACK = 1e-8


def _heat_checks(report: CheckReport, dim: int, rng) -> None:
    times = (0.5, 1.0, 4.0)
    offsets = rng.integers(-4, 5, size=(6, dim))
    worst_asym = 0.0
    smallest = math.inf
    for t in times:
        for off in offsets:
            x = tuple(int(c) for c in off)
            y = tuple([0] * dim)
            forward = heat_kernel(t, x, y)
            backward = heat_kernel(t, y, x)
            worst_asym = max(worst_asym, abs(forward - backward))
            smallest = min(smallest, forward)
    report.add("heat_symmetry", worst_asym == 0.0, worst_asym, 0.0,
               detail="p(t,x,y) must equal p(t,y,x) exactly")
    report.add("heat_positivity", smallest > 0.0, smallest, 0.0,
               detail="p(t,x,y) must be strictly positive for t > 0")

    worst_mass = 0.0
    for t in times:
        radius = heat_mass_radius(t, 1, eps=1e-13)
        total = heat_kernel_1d(t, 0) + 2.0 * sum(
            heat_kernel_1d(t, m) for m in range(1, radius + 1)
        )
        worst_mass = max(worst_mass, abs(1.0 - total) * dim)
    report.add("heat_mass", worst_mass <= _MASS_TOL, worst_mass, _MASS_TOL,
               detail="truncated kernel mass must reach 1")

    worst_semi = 0.0
    for s, t in ((0.3, 0.7), (0.7, 0.3)):
        for m in range(-5, 6):
            convolved = sum(
                heat_kernel_1d(s, k) * heat_kernel_1d(t, m - k) for k in range(-40, 41)
            )
            worst_semi = max(worst_semi, abs(heat_kernel_1d(s + t, m) - convolved))
    report.add("heat_semigroup", worst_semi <= _SEMIGROUP_TOL, worst_semi, _SEMIGROUP_TOL,
               detail="p(s+t) must match the convolution of p(s) and p(t)")


def _kernel_checks(report: CheckReport, dim: int, alpha: AlphaParam,
                   quad: QuadratureSpec) -> None:
    offsets = [tuple([1] + [0] * (dim - 1)), tuple([2] + [0] * (dim - 1))]
    if dim >= 2:
        offsets.append(tuple([1] * dim))
        offsets.append(tuple([3, 1] + [0] * (dim - 2)))
    worst = 0.0
    for off in offsets:
        via_time = kernel_time_integral(off, alpha, quad)
        via_fourier = kernel_fourier(off, alpha, quad)
        worst = max(worst, abs(via_time - via_fourier) / via_fourier)
    report.add("kernel_dual_agreement", worst <= _DUAL_TOL, worst, _DUAL_TOL,
               detail="time-integral and Fourier kernel values must agree")
    if dim == 1 and alpha.alpha == 1.0:
        worst_cf = max(
            abs(kernel_fourier((m,), alpha, quad) - 4.0 / (math.pi * (4 * m * m - 1)))
            for m in range(1, 9)
        )
        report.add("kernel_closed_form", worst_cf <= 1e-10, worst_cf, 1e-10,
                   detail="d=1, alpha=1 kernel must match 4/(pi (4 m^2 - 1))")


def _matrix_checks(report: CheckReport, op, boundary, rng) -> None:
    matrix = op.entries
    n = len(op)
    asym = float(np.abs(matrix - matrix.T).max())
    report.add("matrix_symmetry", asym == 0.0, asym, 0.0,
               detail="assembled matrix must be exactly symmetric")
    diag_defect = float(np.abs(np.diag(matrix) - op.total_mass).max())
    report.add("matrix_diagonal", diag_defect == 0.0, diag_defect, 0.0,
               detail="diagonal must equal the total kernel mass")
    off = matrix[~np.eye(n, dtype=bool)]
    worst_off = float(off.max()) if off.size else -math.inf
    report.add("matrix_offdiagonal_negative", off.size == 0 or worst_off < 0.0,
               worst_off, 0.0, detail="off-diagonal entries must be negative")
    min_row = float(matrix.sum(axis=1).min())
    report.add("matrix_rowsum_positive", min_row > 0.0, min_row, 0.0,
               detail="row sums equal outgoing boundary mass and must be positive")

    identity_value = n * op.total_mass - float(np.abs(off).sum())
    rel = abs(identity_value - boundary.value) / max(1.0, boundary.value)
    report.add("boundary_identity", rel <= 1e-10, rel, 1e-10,
               detail="complement identity must reproduce the boundary term")

    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    via_matrix = quadratic_form(op, u, v, route="matrix")
    via_pairs = quadratic_form(op, u, v, route="double-sum")
    rel = abs(via_matrix - via_pairs) / max(1.0, abs(via_matrix))
    report.add("quadratic_form_routes", rel <= _FORM_ROUTE_TOL, rel, _FORM_ROUTE_TOL,
               detail="matrix and pairwise-sum evaluations must agree")

    w = rng.normal(size=n)
    recovered = solve_poisson(op, op.entries @ w)
    rel = float(np.linalg.norm(recovered - w) / np.linalg.norm(w))
    report.add("poisson_roundtrip", rel <= _POISSON_TOL, rel, _POISSON_TOL,
               detail="solve(L, L w) must recover w")


def _spectrum_checks(report: CheckReport, op, spectrum, skip_ground_state) -> None:
    report.extend(validate_spectrum(spectrum, skip_ground_state=skip_ground_state))
    scale = max(1.0, float(spectrum.eigenvalues[-1]))
    report.add("eigen_residual", spectrum.residual_norm <= RESIDUAL_TOL * scale,
               spectrum.residual_norm, RESIDUAL_TOL * scale,
               detail="max eigenpair residual")
    trace_target = len(op) * op.total_mass
    rel = abs(float(spectrum.eigenvalues.sum()) - trace_target) / trace_target
    report.add("trace_identity", rel <= _TRACE_TOL, rel, _TRACE_TOL,
               detail="eigenvalue sum must equal |domain| * total mass")


def _fourier_checks(report: CheckReport, op, boundary, rng) -> None:
    domain = op.domain
    n = len(domain)
    worst_plancherel = 0.0
    for _ in range(3):
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        worst_plancherel = max(worst_plancherel, plancherel_check(domain, u))
    report.add("plancherel", worst_plancherel <= _PLANCHEREL_TOL,
               worst_plancherel, _PLANCHEREL_TOL,
               detail="Parseval identity on the exact trapezoid grid")

    worst_form = 0.0
    for _ in range(2):
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        worst_form = max(worst_form, multiplier_form_check(op, u))
    report.add("multiplier_form", worst_form <= _FORM_CHECK_TOL,
               worst_form, _FORM_CHECK_TOL,
               detail="quadratic form must match the multiplier integral")

    worst = math.inf
    for _ in range(20):
        z = rng.uniform(-math.pi, math.pi, size=domain.dim)
        slack = plane_wave_bound_check(domain, op.alpha, boundary, z, op=op)
        rhs_scale = max(1.0, laplacian_symbol(z) ** (op.alpha.alpha / 2.0) * n
                        + boundary.value)
        worst = min(worst, slack / rhs_scale)
    report.add("plane_wave_bound", worst >= -_SLACK, worst, _SLACK,
               detail="normalized slack of the plane-wave bound over 20 frequencies")


def _projection_checks(report: CheckReport, domain, alpha, spectrum, boundary, rng) -> None:
    n = len(domain)
    worst = math.inf
    for _ in range(20):
        k = int(rng.integers(1, n + 1))
        radius = float(rng.uniform(1e-3, math.pi))
        check = bounds_mod.projection_inequality_check(
            domain, alpha, spectrum, boundary, k, radius
        )
        worst = min(worst, check.slack / check.scale)
    report.add("projection_inequality", worst >= -_SLACK, worst, _SLACK,
               detail="normalized slack over 20 random (k, radius) draws")


def run_verification(domain: Domain, alpha: AlphaParam,
                     quad: QuadratureSpec | None = None, seed: int = 0,
                     skip_ground_state: bool = False) -> CheckReport:
    """Full cross-route verification for one domain and fractional order."""
    quad = quad or QuadratureSpec()
    rng = np.random.default_rng(seed)
    report = CheckReport()
    _heat_checks(report, domain.dim, rng)
    _kernel_checks(report, domain.dim, alpha, quad)

    op = assemble(domain, alpha, quad)
    boundary = boundary_term(domain, alpha, quad)
    _matrix_checks(report, op, boundary, rng)

    spectrum = eigen_decompose(op)
    _spectrum_checks(report, op, spectrum, skip_ground_state)
    _fourier_checks(report, op, boundary, rng)
    if domain.dim <= 3:
        _projection_checks(report, domain, alpha, spectrum, boundary, rng)

    bound_report = bounds_mod.verify_bounds(domain, alpha, spectrum, boundary)
    worst_margin = 0.0
    for row in bound_report.rows:
        for margin, bound in (
            (row.margin_upper_avg, row.upper_avg),
            (row.margin_upper_next, row.upper_next),
            (row.margin_lower, row.lower_avg),
        ):
            if margin is not None:
                worst_margin = min(worst_margin, margin / max(1.0, abs(bound)))
    report.add("eigenvalue_bounds", bound_report.all_pass, worst_margin, _SLACK,
               detail="every eligible bound inequality must hold within slack")
    return report
