"""Central-moment relaxation with a fixed high-order schedule and adaptive scaling.

The single-cell :func:`collide` goes through :func:`cskf.moments.build_basis`.
Whole blocks use :func:`collide_field`, an unrolled numba kernel that works on
the separable monomials directly and applies the update as an increment, so
the conserved moments are untouched up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _cmr_kernel, moments
from .lattice import Q

A_DEFAULT = -4.0
B_DEFAULT = 5.0
G_MAX_DEFAULT = 0.115
NU_PRIME_LIMIT = 1.0 / 6.0


class ViscosityOverflowError(ValueError):
    """Scaled artificial viscosity reached the s = 1 singularity."""


def _default_nu_prime() -> np.ndarray:
    nu_p = np.zeros(Q)
    nu_p[9:17] = 0.005
    nu_p[17:23] = 0.007
    nu_p[23:26] = 0.009
    nu_p[26] = 0.01
    return nu_p


@dataclass(frozen=True)
class RelaxationSpec:
    nu: float = 0.0
    nu_prime: np.ndarray = field(default_factory=_default_nu_prime)
    a: float = A_DEFAULT
    b: float = B_DEFAULT
    g_max: float = G_MAX_DEFAULT
    adaptive: bool = True

    def __post_init__(self):
        nu_p = np.asarray(self.nu_prime, dtype=float)
        if nu_p.shape != (Q,):
            raise ValueError("nu_prime must have 27 entries")
        object.__setattr__(self, "nu_prime", nu_p)
        if self.nu < 0:
            raise ValueError("viscosity must be non-negative")
        hi = nu_p[9:]
        # zero is admitted so the unstabilized operator (s = 2) can be run
        if np.any(hi < 0) or np.any(hi >= NU_PRIME_LIMIT):
            raise ValueError("high-order artificial viscosities must lie in [0, 1/6)")
        if self.g_max <= 0:
            raise ValueError("g_max must be positive")

    def with_nu(self, nu: float) -> "RelaxationSpec":
        return replace(self, nu=float(nu))

    @property
    def max_factor(self) -> float:
        return max(1.0, self.b) if self.adaptive else 1.0


def default_schedule(nu: float = 0.0) -> RelaxationSpec:
    return RelaxationSpec(nu=float(nu))


@dataclass(frozen=True)
class RelaxationDiagonal:
    s: np.ndarray


def adaptive_factor(grad_norm, spec: RelaxationSpec):
    """Scale applied to the high-order artificial viscosities.

    Args:
        grad_norm: |grad u| (scalar or array), lattice units.
        spec: supplies a, b and g_max.

    Returns:
        max(1, a * min(g, g_max) / g_max + b), same shape as ``grad_norm``.
    """
    g = np.minimum(np.asarray(grad_norm, dtype=float), spec.g_max)
    if np.any(g < 0):
        raise ValueError("gradient norm must be non-negative")
    out = np.maximum(1.0, spec.a * g / spec.g_max + spec.b)
    return float(out) if out.ndim == 0 else out


def relaxation_diagonal(spec: RelaxationSpec, factor: float = 1.0) -> RelaxationDiagonal:
    if factor < 1.0:
        raise ValueError("adaptive factor must be >= 1")
    scaled = factor * spec.nu_prime[9:]
    if np.any(scaled >= NU_PRIME_LIMIT):
        raise ViscosityOverflowError(
            f"factor {factor} pushes an artificial viscosity to {scaled.max():.4g} >= 1/6")
    s = np.zeros(Q)
    s[4:9] = 1.0 / (3.0 * spec.nu + 0.5)
    s[9:] = 1.0 / (3.0 * scaled + 0.5)
    return RelaxationDiagonal(s=s)


def viscosity_from_rate(s: float) -> float:
    return (1.0 / s - 0.5) / 3.0


def collide(f, rho: float, u, S: RelaxationDiagonal) -> np.ndarray:
    """Post-collision populations for one cell."""
    basis = moments.build_basis(u)
    m = moments.to_moments(f, basis)
    meq = moments.equilibrium_moments(rho, basis.u)
    return np.asarray(f, dtype=float) - basis.T @ (S.s * (m - meq))


# --- block kernels -----------------------------------------------------------

def collide_field(f: np.ndarray, active: np.ndarray, factor: np.ndarray, spec: RelaxationSpec,
                  rho_out: np.ndarray, u_out: np.ndarray) -> None:
    """Collide ``f`` (27, N) in place where ``active`` is set.

    ``rho_out`` / ``u_out`` receive the macroscopic fields of the updated
    populations in every cell.
    """
    s_low = 1.0 / (3.0 * spec.nu + 0.5)
    if np.any(factor * spec.nu_prime[9:].max() >= NU_PRIME_LIMIT):
        raise ViscosityOverflowError("adaptive factor pushes an artificial viscosity to 1/6")
    _cmr_kernel.collide_kernel(f, active, factor, s_low, spec.nu_prime, rho_out, u_out)


def macroscopics_field(f: np.ndarray, rho_out: np.ndarray, u_out: np.ndarray) -> None:
    """Density and velocity of ``f`` (27, N) with the same summation order as the collision."""
    _cmr_kernel.macros_kernel(f, rho_out, u_out)


# --- gradients ----------------------------------------------------------------

def _derivative(q: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return 0.5 * (np.roll(q, -1, axis=axis) - np.roll(q, 1, axis=axis))
    if q.shape[axis] < 3:
        if q.shape[axis] == 1:
            return np.zeros_like(q)
        return np.gradient(q, axis=axis, edge_order=1)
    return np.gradient(q, axis=axis, edge_order=2)


def velocity_gradient_field(u: np.ndarray, periodic=(True, True, True)) -> np.ndarray:
    """G[a, b] = d u_a / d x_b for a velocity field of shape (3, X, Y, Z)."""
    grad = np.empty((3, 3) + u.shape[1:])
    for a in range(3):
        for b in range(3):
            grad[a, b] = _derivative(u[a], b, periodic[b])
    return grad


def gradient_norm(u: np.ndarray, periodic=(True, True, True)) -> np.ndarray:
    """Frobenius norm of the velocity gradient per cell."""
    acc = np.zeros(u.shape[1:])
    for a in range(3):
        for b in range(3):
            d = _derivative(u[a], b, periodic[b])
            acc += d * d
    return np.sqrt(acc)
