"""Lattice heat kernel and the nonlocal kernel of the fractional Laplacian.

The fractional Laplacian of order ``alpha`` in (0, 2) on the integer lattice
Z^d acts as

    (-Delta)^(alpha/2) u(x) = sum_{y != x} Q_alpha(x, y) (u(x) - u(y)),

where the pair weight is the Bochner time integral of the heat semigroup,

    Q_alpha(x, y) = 1/|Gamma(-alpha/2)| * int_0^inf t^(-1-alpha/2) p(t, x, y) dt,

and p is the lattice heat kernel.  On Z^d the kernel factorizes over
coordinates into e^(-2t) I_m(2t) with I_m the modified Bessel function of the
first kind, and Q_alpha is simultaneously the (negated) Fourier coefficient of
the multiplier Phi(xi)^(alpha/2), Phi(xi) = sum_i (2 - 2 cos xi_i).

This module computes Q_alpha by both routes:

* ``kernel_time_integral`` -- adaptive quadrature of the time integral,
  the high-accuracy reference (roughly 1e-12 relative at the defaults);
* ``kernel_fourier`` -- periodic-trapezoid cosine coefficients of
  Phi^(alpha/2), Richardson-extrapolated in the known leading error order
  d + alpha; one grid evaluation yields every offset at once, which is what
  bulk table fills use.

``total_mass`` returns S_alpha = sum_{y != x} Q_alpha(x, y), the cube average
of the multiplier; it is the diagonal entry of the whole-lattice operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy.integrate import quad
from scipy.special import ive

from .exceptions import ConvergenceError

__all__ = [
    "AlphaParam",
    "QuadratureSpec",
    "KernelTable",
    "laplacian_symbol",
    "heat_kernel_1d",
    "heat_kernel",
    "heat_mass_radius",
    "kernel_time_integral",
    "kernel_fourier",
    "total_mass",
    "canonical_offset",
]

#: Default trapezoid points per dimension for the Fourier route.  The d=1
#: value is sized so that cube quadratures of Phi^(alpha/2) against smooth
#: trig-polynomial weights (see fourier.form_check) stay below 1e-6 relative
#: even at alpha = 0.5; the kernel coefficients themselves are Richardson
#: extrapolated and are far more accurate than the raw grid.
DEFAULT_GRID_PER_DIM = {1: 16384, 2: 512, 3: 128}
_FALLBACK_GRID = 32

#: Number of grid-doubling refinements used for extrapolation and for the
#: returned error estimate.
_RICHARDSON_LEVELS = 2

#: Above this argument scipy's `ive` underflows to nan; switch to the
#: large-argument expansion (DLMF 10.40.1), which is accurate to ~1e-15 there.
_IVE_ASYMPTOTIC_Z = 1.0e8

#: Total vanishing order |m|_1 beyond which the near-zero piece of the time
#: integral is below 1e-60 and is skipped outright.
_NEAR_PIECE_MAX_ORDER = 60


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class AlphaParam:
    """Validated fractional order with its kernel normalizer.

    ``inv_gamma`` is 1/|Gamma(-alpha/2)| computed through the reflection
    Gamma(-alpha/2) = -(2/alpha) Gamma(1 - alpha/2), so only gamma on (0, 1)
    is ever evaluated.
    """

    alpha: float
    inv_gamma: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 < alpha < 2.0:
            raise ValueError(
                f"fractional order must lie strictly inside (0, 2), got {alpha!r}"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(
            self, "inv_gamma", alpha / (2.0 * math.gamma(1.0 - alpha / 2.0))
        )


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and grid sizes for the two kernel quadrature routes.

    ``fourier_grid_per_dim=None`` selects the per-dimension default from
    DEFAULT_GRID_PER_DIM; an explicit value must be even and at least 16.
    ``time_split`` separates the near-zero piece of the time integral (where
    the integrand has a known algebraic vanishing/singularity order) from the
    log-substituted tail.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    fourier_grid_per_dim: int | None = None
    time_split: float = 1.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0.0 < value <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {value!r}")
        if self.fourier_grid_per_dim is not None:
            n = self.fourier_grid_per_dim
            if n < 16 or n % 2 != 0:
                raise ValueError(
                    f"fourier_grid_per_dim must be even and >= 16, got {n!r}"
                )
        if self.time_split <= 0.0:
            raise ValueError(f"time_split must be positive, got {self.time_split!r}")

    def grid_points(self, dim: int) -> int:
        """Trapezoid points per dimension used for dimension ``dim``."""
        if self.fourier_grid_per_dim is not None:
            return self.fourier_grid_per_dim
        return DEFAULT_GRID_PER_DIM.get(dim, _FALLBACK_GRID)


def canonical_offset(offset) -> tuple[int, ...]:
    """Canonical key of a lattice offset: absolute coordinates sorted descending.

    The multiplier Phi is invariant under coordinate sign flips and
    permutations, so one key serves the whole symmetry orbit.
    """
    arr = np.atleast_1d(np.asarray(offset))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"offset must be a nonempty integer vector, got {offset!r}")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.round(arr)
        if np.any(rounded != arr):
            raise ValueError(f"offset coordinates must be integers, got {offset!r}")
        arr = rounded.astype(np.int64)
    return tuple(sorted((int(abs(c)) for c in arr), reverse=True))


# ---------------------------------------------------------------------------
# symbol and heat kernel


def laplacian_symbol(z) -> float:
    """Spectral symbol of the lattice Laplacian, sum_i (2 - 2 cos z_i).

    Each coordinate must lie in [-pi, pi]; the value lies in [0, 4d].
    """
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if zz.ndim != 1:
        raise ValueError("z must be a single point of the cube [-pi, pi]^d")
    if np.any(np.abs(zz) > math.pi):
        raise ValueError(f"coordinate outside [-pi, pi]: {z!r}")
    return float(np.sum(2.0 - 2.0 * np.cos(zz)))


def _ive_scaled(m: int, z: float) -> float:
    """e^{-z} I_m(z) for z >= 0, stable over the whole tail range.

    scipy's `ive` loses to nan past z ~ 1e9; beyond _IVE_ASYMPTOTIC_Z the
    large-argument expansion I_m(z) e^{-z} ~ (2 pi z)^{-1/2} sum_k a_k(m)/z^k
    is already accurate to machine precision.
    """
    if z <= _IVE_ASYMPTOTIC_Z:
        return float(ive(m, z))
    mu = 4.0 * m * m
    s = 1.0
    term = 1.0
    for k in range(1, 18):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * z * k)
        s += term
        if abs(term) < 1e-18 * abs(s):
            break
    return s / math.sqrt(2.0 * math.pi * z)


def heat_kernel_1d(t: float, m: int) -> float:
    """One-dimensional lattice heat kernel p(t, 0, m) = e^{-2t} I_{|m|}(2t)."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    m = abs(int(m))
    if t == 0.0:
        return 1.0 if m == 0 else 0.0
    return _ive_scaled(m, 2.0 * t)


def heat_kernel(t: float, x, y) -> float:
    """Heat kernel p(t, x, y) on Z^d, the product of coordinate kernels."""
    xv = np.atleast_1d(np.asarray(x))
    yv = np.atleast_1d(np.asarray(y))
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError(f"dimension mismatch between {x!r} and {y!r}")
    out = 1.0
    for xi, yi in zip(xv, yv):
        out *= heat_kernel_1d(t, int(xi) - int(yi))
    return out


def _coordinate_tail_bound(t: float, radius: int) -> float:
    """Chernoff bound on P(|X| > radius) for the 1d continuous-time walk.

    The walk's moment generating function is exp(2t(cosh theta - 1));
    optimizing theta = asinh(radius / 2t) gives the standard bound.
    """
    if t == 0.0:
        return 0.0
    theta = math.asinh(radius / (2.0 * t))
    return 2.0 * math.exp(2.0 * t * (math.cosh(theta) - 1.0) - theta * radius)


def heat_mass_radius(t: float, dim: int, eps: float = 1e-12) -> int:
    """Box radius M with sum over |y - x|_inf <= M of p(t, x, y) >= 1 - eps."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    if t == 0.0:
        return 0
    radius = 1
    while dim * _coordinate_tail_bound(t, radius) > eps:
        radius += 1
        if radius > 10_000_000:
            raise ConvergenceError("heat mass radius search did not terminate")
    return radius


# ---------------------------------------------------------------------------
# Fourier route: one trapezoid grid yields every coefficient at once


def _symbol_power_halfgrid(dim: int, alpha: float, n: int) -> np.ndarray:
    """Phi^(alpha/2) on the closed half grid xi_j = 2 pi j / n, 0 <= j <= n/2."""
    j = np.arange(n // 2 + 1)
    one_dim = 2.0 - 2.0 * np.cos(2.0 * np.pi * j / n)
    out = np.zeros([n // 2 + 1] * dim)
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = n // 2 + 1
        out = out + one_dim.reshape(shape)
    return out ** (alpha / 2.0)


def _trapezoid_coefficients(dim: int, alpha: float, n: int) -> np.ndarray:
    """c_m = (1/n^d) sum_j Phi^(a/2)(xi_j) cos<m, xi_j> for 0 <= m_i <= n/2.

    The full periodic sum reduces to a type-I DCT of the half grid because the
    symbol is even in every coordinate.
    """
    values = _symbol_power_halfgrid(dim, alpha, n)
    return scipy.fft.dctn(values, type=1) / float(n) ** dim


@lru_cache(maxsize=24)
def _coefficient_table(dim: int, alpha: float, n_base: int):
    """Extrapolated coefficient table and its per-entry error estimate.

    The trapezoid aliasing error of coefficient m decays like A n^{-(d+alpha)}
    with smooth corrections two orders down, so two Richardson steps on grids
    (n, 2n, 4n) remove the first two orders.  The error estimate is the
    difference between the final extrapolant and the finer single-step one.
    """
    levels = [
        _trapezoid_coefficients(dim, alpha, n_base << i)
        for i in range(_RICHARDSON_LEVELS + 1)
    ]
    order = dim + alpha
    penultimate = levels[-1]
    while len(levels) > 1:
        weight = 2.0 ** order
        levels = [
            (weight * fine[tuple(slice(0, s) for s in coarse.shape)] - coarse)
            / (weight - 1.0)
            for coarse, fine in zip(levels, levels[1:])
        ]
        if len(levels) > 1:
            penultimate = levels[-1]
        order += 2.0
    table = levels[0]
    err = np.abs(table - penultimate[tuple(slice(0, s) for s in table.shape)])
    table.flags.writeable = False
    err.flags.writeable = False
    return table, err


def _grid_covering(quad: QuadratureSpec, dim: int, max_coord: int) -> int:
    """Grid size whose coefficient table reaches offsets up to max_coord."""
    n = quad.grid_points(dim)
    while n // 2 < max_coord:
        n *= 2
    return n


def kernel_fourier(offset, alpha: AlphaParam, quad: QuadratureSpec | None = None) -> float:
    """Kernel value via the negated cosine coefficient of Phi^(alpha/2)."""
    key = canonical_offset(offset)
    if not any(key):
        raise ValueError("kernel is defined only for distinct vertices (offset != 0)")
    quad = quad or QuadratureSpec()
    n = _grid_covering(quad, len(key), key[0])
    table, _ = _coefficient_table(len(key), alpha.alpha, n)
    value = -float(table[key])
    if not value > 0.0:
        raise ConvergenceError(
            f"Fourier coefficient at offset {key} is not positive: {value!r}",
            achieved=value,
        )
    return value


def total_mass(dim: int, alpha: AlphaParam, quad: QuadratureSpec | None = None) -> float:
    """S_alpha: cube average of Phi^(alpha/2), the lattice diagonal entry."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim!r}")
    quad = quad or QuadratureSpec()
    table, _ = _coefficient_table(dim, alpha.alpha, quad.grid_points(dim))
    return float(table.flat[0])


# ---------------------------------------------------------------------------
# time-integral route: adaptive quadrature of the Bochner integral


def _ive_ratio(m: int, t: float) -> float:
    """e^{-2t} I_m(2t) / t^m, finite down to t -> 0 (limit 1/m!).

    For small t the direct ratio underflows, so the power series
    I_m(2t)/t^m = sum_k t^{2k} / (k! (m+k)!) is used instead.
    """
    if t > 0.5:
        return float(ive(m, 2.0 * t)) / t ** m
    term = 1.0 / math.factorial(m)
    total = term
    k = 1
    while True:
        term *= t * t / (k * (m + k))
        total += term
        if term < 1e-18 * total or k > 80:
            break
        k += 1
    return math.exp(-2.0 * t) * total


def _tail_cutoff(d: int, alpha: float, budget: float, split: float) -> float:
    """Upper integration limit T so that int_T^inf t^{-1-a/2} p dt <= budget.

    Two kernel bounds give two candidate cutoffs: p <= 1 and the on-diagonal
    decay p <= (4t)^{-d/2}; whichever admits the smaller T wins.
    """
    t_flat = ((2.0 / alpha) / budget) ** (2.0 / alpha)
    t_algebraic = ((2.0 ** (1 - d) / (d + alpha)) / budget) ** (2.0 / (d + alpha))
    return max(1.5 * split, min(t_flat, t_algebraic, 1e300))


def _quad_checked(func, a, b, epsabs, epsrel, what, **kwargs):
    """scipy quad with the warning path turned into data."""
    result = quad(func, a, b, epsabs=epsabs, epsrel=epsrel, full_output=1, **kwargs)
    value, abserr = result[0], result[1]
    converged = len(result) < 4
    message = what if converged else f"{what}: {result[3]}"
    return value, abserr, converged, message


def kernel_time_integral(
    offset, alpha: AlphaParam, quad_spec: QuadratureSpec | None = None
) -> float:
    """Kernel value via the time integral of the heat kernel.

    The integrand t^{-1-alpha/2} p(t, ., .) vanishes to order |m|_1 - 1 -
    alpha/2 at t = 0; that algebraic factor is handed to the quadrature as an
    explicit weight on (0, split].  The tail is integrated under t = e^s up to
    a cutoff with a certified remainder.  The achieved error estimate is
    checked against the requested tolerances.
    """
    key = canonical_offset(offset)
    if not any(key):
        raise ValueError("kernel is defined only for distinct vertices (offset != 0)")
    quad_spec = quad_spec or QuadratureSpec()
    d = len(key)
    nu = sum(key)
    a = alpha.alpha
    ig = alpha.inv_gamma
    split = quad_spec.time_split
    abs_budget = 0.25 * quad_spec.abs_tol

    # near piece: weight t^{nu - 1 - alpha/2} times the analytic factor
    near_err = 0.0
    if nu <= _NEAR_PIECE_MAX_ORDER:
        def regular_factor(t, _key=key):
            out = 1.0
            for mi in _key:
                out *= _ive_ratio(mi, t)
            return out

        near, err, ok, info = _quad_checked(
            regular_factor, 0.0, split,
            epsabs=abs_budget / ig, epsrel=0.1 * quad_spec.rel_tol,
            what="near piece", weight="alg", wvar=(nu - 1.0 - a / 2.0, 0.0),
            limit=200,
        )
        near_err = err
        if not ok and err > 10.0 * abs_budget / ig:
            raise ConvergenceError(
                f"near-zero quadrature for offset {key} did not converge ({info})",
                achieved=ig * err,
            )
    else:
        # bounded by split^{nu - a/2} / ((nu - a/2) prod m_i!) -- utterly negligible
        near = 0.0

    def tail_integrand(u, _key=key, _a=a):
        t = math.exp(u)
        out = math.exp(-u * _a / 2.0)
        for mi in _key:
            out *= _ive_scaled(mi, 2.0 * t)
        return out

    def integrate_tail(lo, hi):
        t_peak = sum(v * v for v in key) / (4.0 * (1.0 + a / 2.0 + d / 2.0))
        pts = [math.log(t_peak)] if lo < math.log(t_peak) < hi else None
        return _quad_checked(
            tail_integrand, lo, hi,
            epsabs=abs_budget / ig, epsrel=0.1 * quad_spec.rel_tol,
            what="tail piece", limit=400, points=pts,
        )

    cutoff = _tail_cutoff(d, a, abs_budget / ig, split)
    tail, tail_err, ok, info = integrate_tail(math.log(split), math.log(cutoff))
    if not ok and tail_err > 10.0 * abs_budget / ig:
        raise ConvergenceError(
            f"tail quadrature for offset {key} did not converge ({info})",
            achieved=ig * tail_err,
        )

    value = ig * (near + tail)

    # the absolute budget may be far looser than rel_tol * value demands;
    # extend the cutoff once if so
    fine_budget = max(min(quad_spec.abs_tol, quad_spec.rel_tol * value) / 4.0, 1e-17)
    fine_cutoff = _tail_cutoff(d, a, fine_budget / ig, split)
    if fine_cutoff > cutoff:
        extra, extra_err, ok, info = integrate_tail(
            math.log(cutoff), math.log(fine_cutoff)
        )
        tail += extra
        tail_err += extra_err
        cutoff = fine_cutoff
        value = ig * (near + tail)

    truncation = ig * 2.0 ** (1 - d) / (d + a) * cutoff ** (-(d + a) / 2.0)
    achieved = ig * (near_err + tail_err) + truncation
    allowed = max(quad_spec.abs_tol, quad_spec.rel_tol * abs(value))
    if achieved > allowed:
        raise ConvergenceError(
            f"time integral for offset {key} reached error {achieved:.3e} "
            f"> allowed {allowed:.3e}",
            achieved=achieved,
        )
    if not value > 0.0:
        raise ConvergenceError(
            f"time integral at offset {key} is not positive: {value!r}",
            achieved=achieved,
        )
    return value


# ---------------------------------------------------------------------------
# kernel table


@dataclass
class KernelTable:
    """Cache of kernel values keyed by canonical offset.

    Lookups canonicalize first, so an offset, its negation, and any coordinate
    permutation hit the same entry.  Population is single-writer: `fill` and
    `get` mutate the table, everything else only reads.
    """

    dim: int
    alpha: AlphaParam
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    entries: dict = field(default_factory=dict)
    methods: dict = field(default_factory=dict)
    accuracy: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim!r}")

    def coefficient_arrays(self, max_coord: int):
        """Extrapolated coefficient array (and error array) covering offsets
        with coordinates up to ``max_coord``; index = canonical offset."""
        n = _grid_covering(self.quad, self.dim, max(max_coord, 1))
        return _coefficient_table(self.dim, self.alpha.alpha, n)

    def get(self, offset, method: str = "fourier") -> float:
        key = canonical_offset(offset)
        if len(key) != self.dim:
            raise ValueError(
                f"offset {offset!r} has dimension {len(key)}, table has {self.dim}"
            )
        if not any(key):
            raise ValueError("kernel is defined only for distinct vertices")
        if key in self.entries:
            return self.entries[key]
        if method == "fourier":
            table, err = self.coefficient_arrays(key[0])
            value = -float(table[key])
            estimate = float(err[key])
        elif method == "time":
            value = q_alpha_time_integral(key, self.alpha, self.quad)
            estimate = max(self.quad.abs_tol, self.quad.rel_tol * value)
        else:
            raise ValueError(f"unknown kernel method {method!r}")
        if not value > 0.0:
            raise ConvergenceError(
                f"kernel value at {key} is not positive: {value!r}", achieved=value
            )
        self.entries[key] = value
        self.methods[key] = method
        self.accuracy[key] = estimate
        return value

    def fill(self, offsets, method: str = "fourier") -> None:
        """Populate many offsets; for the Fourier route one grid serves all."""
        keys = {canonical_offset(off) for off in offsets}
        keys.discard(tuple([0] * self.dim))
        if not keys:
            return
        if method == "fourier":
            max_coord = max(key[0] for key in keys)
            table, err = self.coefficient_arrays(max_coord)
            for key in keys:
                value = -float(table[key])
                if not value > 0.0:
                    raise ConvergenceError(
                        f"kernel value at {key} is not positive: {value!r}",
                        achieved=value,
                    )
                self.entries[key] = value
                self.methods[key] = "fourier"
                self.accuracy[key] = float(err[key])
        else:
            for key in sorted(keys):
                self.get(key, method=method)
