"""Fourier-side verification of the assembled operator.

Every function on a finite domain pairs with the lattice exponentials
e^{i<x,z>}; Parseval turns vertex-space inner products into cube integrals of
those pairings, and the operator's quadratic form into a cube integral of the
multiplier Phi^(alpha/2) against |pairing|^2.  These identities give
independent, quadrature-based checks of the matrix route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import Domain
from .kernel import AlphaParam, laplacian_symbol
from .operator import OperatorMatrix, assemble, quadratic_form

__all__ = [
    "FourierProbe",
    "pairing",
    "plancherel_check",
    "multiplier_form_check",
    "plane_wave_bound_check",
]

_MAX_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class FourierProbe:
    """A cube frequency with the pairing of a vector against its exponential."""

    z: tuple
    pairing: complex


def _check_cube_point(z, dim: int) -> np.ndarray:
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if zz.shape != (dim,):
        raise ValueError(f"z must be a point of [-pi, pi]^{dim}, got {z!r}")
    if np.any(np.abs(zz) > math.pi):
        raise ValueError(f"coordinate outside [-pi, pi]: {z!r}")
    return zz


def pairing(domain: Domain, u, z) -> complex:
    """Finite exponential sum sum_x u(x) e^{-i<x, z>}."""
    zz = _check_cube_point(z, domain.dim)
    vec = np.asarray(u)
    if vec.shape != (len(domain),):
        raise ValueError("vector length does not match the domain size")
    phases = domain.as_array() @ zz
    return complex(np.sum(vec * np.exp(-1j * phases)))


def probe(domain: Domain, u, z) -> FourierProbe:
    return FourierProbe(tuple(float(c) for c in np.atleast_1d(z)), pairing(domain, u, z))


def plancherel_check(domain: Domain, u) -> float:
    """Relative defect of the Parseval identity for one vector.

    The cube integral of |pairing|^2 is evaluated by a per-dimension uniform
    trapezoid with 2*extent + 3 points, which integrates trigonometric
    polynomials of the occurring degrees exactly; the result should match
    <u, u> to machine precision.
    """
    vec = np.asarray(u)
    if vec.shape != (len(domain),):
        raise ValueError("vector length does not match the domain size")
    norm_sq = float(np.real(np.vdot(vec, vec)))
    if norm_sq == 0.0:
        raise ValueError("plancherel_check requires a nonzero vector")
    counts = [2 * e + 3 for e in domain.coordinate_extents()]
    grids = [(-math.pi + 2.0 * math.pi * np.arange(nk) / nk) for nk in counts]
    mesh = np.meshgrid(*grids, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    total_points = points.shape[0]
    chunk = max(1, _MAX_CHUNK_ELEMENTS // max(1, len(domain)))
    acc = 0.0
    coords = domain.as_array()
    for start in range(0, total_points, chunk):
        block = points[start:start + chunk]
        phases = coords @ block.T
        values = vec @ np.exp(-1j * phases)
        acc += float(np.sum(np.abs(values) ** 2))
    quadrature = acc / total_points
    return abs(quadrature - norm_sq) / norm_sq


def multiplier_form_check(op: OperatorMatrix, u, grid_per_dim: int | None = None) -> float:
    """Relative gap between the quadratic form and its multiplier integral.

    The right side (2 pi)^{-d} int Phi^(a/2) |<u, h_z>|^2 dz is evaluated by
    the plain periodic trapezoid at the kernel's default grid (no
    extrapolation, so refining the grid visibly shrinks the result).
    """
    domain = op.domain
    vec = np.asarray(u, dtype=complex)
    if vec.shape != (len(domain),):
        raise ValueError("vector length does not match the domain size")
    if not np.any(vec):
        raise ValueError("multiplier_form_check requires a nonzero vector")
    d = domain.dim
    n = grid_per_dim or op.kernel_table.quad.grid_points(d)
    if n // 2 < domain.max_offset_coordinate():
        raise ValueError(
            f"grid of {n} points per dimension cannot resolve offsets up to "
            f"{domain.max_offset_coordinate()}"
        )
    padded = np.zeros([n] * d, dtype=complex)
    for vertex, value in zip(domain.as_array(), vec):
        padded[tuple(int(c) % n for c in vertex)] += value
    power = np.abs(np.fft.fftn(padded)) ** 2
    axis = 2.0 - 2.0 * np.cos(2.0 * math.pi * np.arange(n) / n)
    symbol = np.zeros([n] * d)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = n
        symbol = symbol + axis.reshape(shape)
    integral = float(np.mean(symbol ** (op.alpha.alpha / 2.0) * power))
    form = quadratic_form(op, vec, vec).real
    return abs(integral - form) / abs(form)


def plane_wave_bound_check(domain: Domain, alpha: AlphaParam, boundary, z,
                           op: OperatorMatrix | None = None) -> float:
    """Signed slack of the plane-wave quadratic form bound at frequency z.

    The quadratic form of the restricted exponential e^{i<x,z>} is bounded by
    Phi(z)^(a/2) |domain| + boundary; returns rhs - lhs, which should only be
    negative by rounding.  At z = 0 the form equals the boundary term exactly
    and the slack vanishes.
    """
    zz = _check_cube_point(z, domain.dim)
    if op is None:
        op = assemble(domain, alpha)
    wave = np.exp(1j * (domain.as_array() @ zz))
    lhs = abs(quadratic_form(op, wave, wave))
    rhs = laplacian_symbol(zz) ** (alpha.alpha / 2.0) * len(domain) + boundary.value
    return rhs - lhs
