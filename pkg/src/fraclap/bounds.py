"""Upper and lower bounds for Dirichlet eigenvalue sums, and their checks.

For a finite domain of n lattice vertices, the averaged spectral counting
obeys two-sided estimates of Kroger / Berezin-Li-Yau type:

    upper:  (1/k) sum_{i<=k} lambda_i
              <= (2 pi)^a * d/(d+a) * (k/(V_d n))^(a/d) + boundary/n
    next :  lambda_{k+1}
              <= (2 pi)^a * d 2^((d+a)/d)/(d+a) * (k/(V_d n))^(a/d) + 2 boundary/n
    lower:  (1/k) sum_{i<=k} lambda_i
              >= (2 pi)^a * d/(d+a) * (k/(V_d n))^(a/d)
                 - (2 pi)^(2a) * (1/12)^(a/2) * d/(d+2a) * (k/(V_d n))^(2a/d)

each valid on an explicit range of k (see ``eligibility``).  ``verify_bounds``
evaluates every eligible inequality against a computed spectrum and reports
signed margins; ``projection_inequality_check`` exercises the integrated
projection inequality the upper bounds come from, for an arbitrary ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .domains import Domain
from .exceptions import EligibilityError
from .kernel import AlphaParam
from .operator import BoundaryMeasure
from .reporting import significant
from .spectrum import SpectrumResult

__all__ = [
    "unit_ball_volume",
    "eligibility",
    "EligibleRanges",
    "upper_avg_bound",
    "upper_next_bound",
    "lower_avg_bound",
    "symbol_minorant",
    "minorant_cut_radius",
    "ball_symbol_integral",
    "projection_inequality_check",
    "ProjectionCheck",
    "BoundRow",
    "BoundReport",
    "verify_bounds",
]

#: Slack separating genuine inequality violations from floating-point noise.
INEQUALITY_SLACK = 1e-8

_ANGULAR_POINTS = 256
_POLAR_POINTS = 64


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim!r}")
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True)
class EligibleRanges:
    """Largest admissible k for each of the three bounds (0 = none)."""

    k_max_upper_avg: int
    k_max_upper_next: int
    k_max_lower: int


def _clamped_floor(fraction: float, size: int) -> int:
    return max(0, min(size, int(math.floor(fraction * size + 1e-9))))


def eligibility(dim: int, alpha: AlphaParam, omega_size: int) -> EligibleRanges:
    """Admissible index ranges of the three bounds for a domain of given size.

    The thresholds are min(1, V_d/2^d), min(1, V_d/2^(d+1)) and
    min(1, (2^(1-1/a) sqrt(3) / (2 pi))^d V_d) times the domain size.
    """
    if omega_size < 1:
        raise ValueError(f"domain size must be >= 1, got {omega_size!r}")
    volume = unit_ball_volume(dim)
    a = alpha.alpha
    upper_avg = min(1.0, volume / 2.0 ** dim)
    upper_next = min(1.0, volume / 2.0 ** (dim + 1))
    lower = min(1.0, (2.0 ** (1.0 - 1.0 / a) * math.sqrt(3.0) / (2.0 * math.pi)) ** dim * volume)
    return EligibleRanges(
        _clamped_floor(upper_avg, omega_size),
        _clamped_floor(upper_next, omega_size),
        _clamped_floor(lower, omega_size),
    )


def _weyl_leading(k: int, dim: int, a: float, omega_size: int) -> float:
    ratio = k / (unit_ball_volume(dim) * omega_size)
    return (2.0 * math.pi) ** a * dim / (dim + a) * ratio ** (a / dim)


def upper_avg_bound(k: int, dim: int, alpha: AlphaParam, omega_size: int,
                    boundary: BoundaryMeasure) -> float:
    """Upper bound for the average of the first k eigenvalues."""
    k_max = eligibility(dim, alpha, omega_size).k_max_upper_avg
    if not 1 <= k <= k_max:
        raise EligibilityError(
            f"k={k} outside the admissible range 1..{k_max} of the averaged upper bound"
        )
    return _weyl_leading(k, dim, alpha.alpha, omega_size) + boundary.value / omega_size


def upper_next_bound(k: int, dim: int, alpha: AlphaParam, omega_size: int,
                     boundary: BoundaryMeasure) -> float:
    """Upper bound for the single eigenvalue lambda_{k+1}."""
    k_max = eligibility(dim, alpha, omega_size).k_max_upper_next
    if not 1 <= k <= k_max:
        raise EligibilityError(
            f"k={k} outside the admissible range 1..{k_max} of the next-eigenvalue bound"
        )
    a = alpha.alpha
    return (
        2.0 ** ((dim + a) / dim) * _weyl_leading(k, dim, a, omega_size)
        + 2.0 * boundary.value / omega_size
    )


def lower_avg_bound(k: int, dim: int, alpha: AlphaParam, omega_size: int) -> float:
    """Lower bound for the average of the first k eigenvalues."""
    k_max = eligibility(dim, alpha, omega_size).k_max_lower
    if not 1 <= k <= k_max:
        raise EligibilityError(
            f"k={k} outside the admissible range 1..{k_max} of the lower bound"
        )
    a = alpha.alpha
    ratio = k / (unit_ball_volume(dim) * omega_size)
    second = (
        (2.0 * math.pi) ** (2.0 * a)
        * (1.0 / 12.0) ** (a / 2.0)
        * dim / (dim + 2.0 * a)
        * ratio ** (2.0 * a / dim)
    )
    return _weyl_leading(k, dim, a, omega_size) - second


# ---------------------------------------------------------------------------
# the radial minorant of the symbol power


def minorant_cut_radius(alpha: AlphaParam) -> float:
    """Radius where the polynomial branch of the minorant peaks.

    The branch r^a - (1/12)^(a/2) r^(2a) increases up to
    r* = sqrt(3) * 2^(1 - 1/a), where it attains 12^(a/2)/4; cutting exactly
    there keeps the minorant continuous, radially nondecreasing, and below the
    symbol power everywhere on the cube.  (Always r* <= sqrt(6) < pi.)
    """
    return math.sqrt(3.0) * 2.0 ** (1.0 - 1.0 / alpha.alpha)


def _minorant_radial(r: float, alpha: AlphaParam) -> float:
    a = alpha.alpha
    if r <= minorant_cut_radius(alpha):
        return r ** a - (1.0 / 12.0) ** (a / 2.0) * r ** (2.0 * a)
    return 0.25 * 12.0 ** (a / 2.0)


def symbol_minorant(z, alpha: AlphaParam) -> float:
    """Radially nondecreasing minorant of the symbol power Phi(z)^(alpha/2).

    On |z| <= r* it is |z|^a - (1/12)^(a/2) |z|^(2a); beyond the cut it is
    the plateau 12^(a/2)/4.  Used to minimize spectral integrals over
    admissible densities in the lower bound.
    """
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if zz.ndim != 1:
        raise ValueError("z must be a single point of the cube [-pi, pi]^d")
    if np.any(np.abs(zz) > math.pi):
        raise ValueError(f"coordinate outside [-pi, pi]: {z!r}")
    return _minorant_radial(float(np.linalg.norm(zz)), alpha)


# ---------------------------------------------------------------------------
# ball integrals of the symbol power


def _symbol_power_on_directions(directions: np.ndarray, r: float, a: float) -> np.ndarray:
    phi = np.sum(2.0 - 2.0 * np.cos(r * directions), axis=-1)
    return phi ** (a / 2.0)


def ball_symbol_integral(dim: int, alpha: AlphaParam, radius: float) -> tuple[float, float]:
    """Integral of Phi^(alpha/2) over the centered ball of the given radius.

    Returns (value, majorant), where the majorant d V_d R^(d+a) / (d+a) is
    the closed-form consequence of Phi(z)^(a/2) <= |z|^a used by the upper
    bounds.  Radial-shell quadrature: the angular average is smooth and is
    integrated by a periodic trapezoid (and Gauss-Legendre in the polar angle
    for d=3); the radial factor r^(d-1) times the shell average is handed to
    an adaptive integrator.  Requires radius <= pi so the ball fits the cube.
    """
    a = alpha.alpha
    if not 0.0 < radius <= math.pi:
        raise ValueError(f"radius must lie in (0, pi], got {radius!r}")
    if dim == 1:
        value, _ = quad(lambda z: (2.0 * math.sin(z / 2.0)) ** a, 0.0, radius,
                        epsabs=1e-13, epsrel=1e-12)
        value *= 2.0
    elif dim == 2:
        theta = 2.0 * math.pi * np.arange(_ANGULAR_POINTS) / _ANGULAR_POINTS
        directions = np.stack([np.cos(theta), np.sin(theta)], axis=-1)

        def shell(r):
            return r * float(np.mean(_symbol_power_on_directions(directions, r, a))) \
                * 2.0 * math.pi

        value, _ = quad(shell, 0.0, radius, epsabs=1e-12, epsrel=1e-11, limit=200)
    elif dim == 3:
        theta = 2.0 * math.pi * np.arange(_ANGULAR_POINTS) / _ANGULAR_POINTS
        nodes, weights = np.polynomial.legendre.leggauss(_POLAR_POINTS)
        sin_polar = np.sqrt(1.0 - nodes ** 2)
        directions = np.stack(
            [
                sin_polar[:, None] * np.cos(theta)[None, :],
                sin_polar[:, None] * np.sin(theta)[None, :],
                np.broadcast_to(nodes[:, None], (_POLAR_POINTS, _ANGULAR_POINTS)),
            ],
            axis=-1,
        )

        def shell(r):
            sphere = np.mean(_symbol_power_on_directions(directions, r, a), axis=1)
            return r * r * float(weights @ sphere) * 2.0 * math.pi

        value, _ = quad(shell, 0.0, radius, epsabs=1e-12, epsrel=1e-11, limit=200)
    else:
        raise NotImplementedError(
            f"radial-shell quadrature implemented for dimensions 1..3, got {dim}"
        )
    majorant = dim * unit_ball_volume(dim) * radius ** (dim + a) / (dim + a)
    return value, majorant


@dataclass(frozen=True)
class ProjectionCheck:
    """Both sides of the integrated projection inequality for one (k, R)."""

    k: int
    radius: float
    lhs: float
    rhs: float
    ball_integral: float
    ball_majorant: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.lhs), abs(self.rhs))


def projection_inequality_check(domain: Domain, alpha: AlphaParam,
                                spectrum: SpectrumResult, boundary: BoundaryMeasure,
                                k: int, radius: float) -> ProjectionCheck:
    """Evaluate the integrated projection inequality on a centered ball.

    For any 1 <= k <= n and ball B of radius R <= pi,

        lambda_{k+1} (n |B| - (2 pi)^d k)
            <= n * int_B Phi^(a/2) - (2 pi)^d sum_{j<=k} lambda_j + |B| * boundary,

    with lambda_{n+1} taken as 0 at k = n.  The returned record carries both
    sides; slack = rhs - lhs should only ever be negative by numeric noise.
    """
    n = len(domain)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k!r}")
    if not 0.0 < radius <= math.pi:
        raise ValueError(f"radius must lie in (0, pi], got {radius!r}")
    d = domain.dim
    lam = spectrum.eigenvalues
    lam_next = float(lam[k]) if k < n else 0.0
    ball_volume = unit_ball_volume(d) * radius ** d
    two_pi_d = (2.0 * math.pi) ** d
    ball_integral, ball_majorant = ball_symbol_integral(d, alpha, radius)
    lhs = lam_next * (n * ball_volume - two_pi_d * k)
    rhs = n * ball_integral - two_pi_d * float(lam[:k].sum()) + ball_volume * boundary.value
    return ProjectionCheck(k, radius, lhs, rhs, ball_integral, ball_majorant)


# ---------------------------------------------------------------------------
# per-domain bound report


@dataclass(frozen=True)
class BoundRow:
    """Bound evaluations at one index k; ineligible entries are None."""

    k: int
    avg: float
    lambda_next: float
    upper_avg: float | None
    upper_next: float | None
    lower_avg: float | None
    margin_upper_avg: float | None
    margin_upper_next: float | None
    margin_lower: float | None

    @property
    def eligible_upper_avg(self) -> bool:
        return self.upper_avg is not None

    @property
    def eligible_upper_next(self) -> bool:
        return self.upper_next is not None

    @property
    def eligible_lower(self) -> bool:
        return self.lower_avg is not None


_CSV_HEADER = (
    "k,avg_k,upper_avg,lower_avg,lambda_next,upper_next,"
    "eligible_upper_avg,eligible_upper_next,eligible_lower,"
    "margin_upper_avg,margin_lower,margin_upper_next"
)


@dataclass
class BoundReport:
    """Eligibility-aware bound evaluations for every k of one spectrum."""

    dim: int
    alpha: float
    omega_size: int
    boundary: float
    ranges: EligibleRanges
    rows: list

    @property
    def all_pass(self) -> bool:
        return not self.violations()

    def violations(self):
        """Rows violating an eligible inequality beyond the shared slack."""
        bad = []
        for row in self.rows:
            for margin, bound in (
                (row.margin_upper_avg, row.upper_avg),
                (row.margin_upper_next, row.upper_next),
                (row.margin_lower, row.lower_avg),
            ):
                if margin is not None and margin < -INEQUALITY_SLACK * max(1.0, abs(bound)):
                    bad.append(row)
                    break
        return bad

    @property
    def no_eligible_lower(self) -> bool:
        return self.ranges.k_max_lower == 0

    def to_csv(self) -> str:
        def cell(value):
            return "" if value is None else significant(value)

        lines = [_CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        str(r.k),
                        significant(r.avg),
                        cell(r.upper_avg),
                        cell(r.lower_avg),
                        significant(r.lambda_next),
                        cell(r.upper_next),
                        str(int(r.eligible_upper_avg)),
                        str(int(r.eligible_upper_next)),
                        str(int(r.eligible_lower)),
                        cell(r.margin_upper_avg),
                        cell(r.margin_lower),
                        cell(r.margin_upper_next),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "alpha": self.alpha,
            "omega_size": self.omega_size,
            "boundary": significant(self.boundary),
            "k_max_upper_avg": self.ranges.k_max_upper_avg,
            "k_max_upper_next": self.ranges.k_max_upper_next,
            "k_max_lower": self.ranges.k_max_lower,
            "no_eligible_lower": self.no_eligible_lower,
            "all_pass": self.all_pass,
            "rows": [
                {
                    "k": r.k,
                    "avg_k": significant(r.avg),
                    "upper_avg": None if r.upper_avg is None else significant(r.upper_avg),
                    "lower_avg": None if r.lower_avg is None else significant(r.lower_avg),
                    "lambda_next": significant(r.lambda_next),
                    "upper_next": None if r.upper_next is None else significant(r.upper_next),
                    "eligible_upper_avg": r.eligible_upper_avg,
                    "eligible_upper_next": r.eligible_upper_next,
                    "eligible_lower": r.eligible_lower,
                    "margin_upper_avg": None if r.margin_upper_avg is None
                    else significant(r.margin_upper_avg),
                    "margin_lower": None if r.margin_lower is None
                    else significant(r.margin_lower),
                    "margin_upper_next": None if r.margin_upper_next is None
                    else significant(r.margin_upper_next),
                }
                for r in self.rows
            ],
        }


def verify_bounds(domain: Domain, alpha: AlphaParam, spectrum: SpectrumResult,
                  boundary: BoundaryMeasure) -> BoundReport:
    """Evaluate every eligible bound against the computed spectrum.

    Margins are signed as bound-minus-value for upper bounds and
    value-minus-bound for the lower bound, so a nonnegative margin means the
    inequality holds; violations beyond the shared slack flip ``all_pass``.
    """
    n = len(domain)
    if len(spectrum) != n:
        raise ValueError("spectrum size does not match the domain")
    d = domain.dim
    lam = spectrum.eigenvalues
    ranges = eligibility(d, alpha, n)
    running = np.cumsum(lam)
    rows = []
    for k in range(1, n + 1):
        avg = float(running[k - 1] / k)
        lam_next = float(lam[k]) if k < n else 0.0
        upper = upper_next = lower = None
        m_upper = m_next = m_lower = None
        if k <= ranges.k_max_upper_avg:
            upper = upper_avg_bound(k, d, alpha, n, boundary)
            m_upper = upper - avg
        if k <= ranges.k_max_upper_next:
            upper_next = upper_next_bound(k, d, alpha, n, boundary)
            m_next = upper_next - lam_next
        if k <= ranges.k_max_lower:
            lower = lower_avg_bound(k, d, alpha, n)
            m_lower = avg - lower
        rows.append(BoundRow(k, avg, lam_next, upper, upper_next, lower,
                             m_upper, m_next, m_lower))
    return BoundReport(d, alpha.alpha, n, boundary.value, ranges, rows)
