"""Interaction energies, potentials and reference values."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import gammaln

from .geometry import (
    KernelSpec,
    SpherePoint,
    TangentVector,
    kernel_gradient_rows,
    kernel_matrix,
)
from .measures import DiscreteMeasure, check_same_dim, fejes_toth_class_sizes

COMPENSATED_ABOVE = 1000
SIMPSON_NODES = 100_001


class Convention(enum.Enum):
    HALF = "half"  # E = B(mu, mu) / 2
    PLAIN = "plain"  # E = B(mu, mu)

    @classmethod
    def parse(cls, value) -> "Convention":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    @property
    def factor(self) -> float:
        return 0.5 if self is Convention.HALF else 1.0


@dataclass(frozen=True)
class EnergyReport:
    value: float
    convention: Convention
    kernel: KernelSpec


def _weighted_sum(K: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
    if K.shape[0] > COMPENSATED_ABOVE or K.shape[1] > COMPENSATED_ABOVE:
        return math.fsum((w[:, None] * K * v[None, :]).ravel())
    return float(w @ K @ v)


def bilinear_form(spec: KernelSpec, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    check_same_dim(mu, nu)
    K = kernel_matrix(spec, mu.points, nu.points)
    return _weighted_sum(K, mu.weights, nu.weights)


def energy_value(spec: KernelSpec, mu: DiscreteMeasure, convention=Convention.HALF) -> float:
    return Convention.parse(convention).factor * bilinear_form(spec, mu, mu)


def energy(spec: KernelSpec, mu: DiscreteMeasure, convention=Convention.HALF) -> EnergyReport:
    conv = Convention.parse(convention)
    return EnergyReport(energy_value(spec, mu, conv), conv, spec)


def points_energy(spec: KernelSpec, P: np.ndarray, w: np.ndarray) -> float:
    """Half-convention energy of raw atom arrays (no validation)."""
    return 0.5 * _weighted_sum(kernel_matrix(spec, P, P), w, w)


def conjectured_value(d: int, N=math.inf, convention=Convention.HALF, strict: bool = True) -> float:
    """Energy of the evenly spread basis configuration with N particles.

    ``N = inf`` gives the continuum value d/(2d+2) (Half convention).  With
    ``strict`` the value for N < d+1 raises, since no orthonormal-support
    configuration then uses all N particles on distinct axes.
    """
    conv = Convention.parse(convention)
    if N is None or math.isinf(N):
        return 2.0 * conv.factor * d / (2 * d + 2)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if strict and N < d + 1:
        raise ValueError(f"N={N} < d+1={d + 1}: no configuration fills every axis")
    same_axis = sum(n * n for n in fejes_toth_class_sizes(d, N))
    return 2.0 * conv.factor * (N * N - same_axis) / (2.0 * N * N)


def potential(spec: KernelSpec, mu: DiscreteMeasure, x) -> float:
    coords = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
    return float(kernel_matrix(spec, coords, mu.points)[0] @ mu.weights)


def potential_values(spec: KernelSpec, mu: DiscreteMeasure, X: np.ndarray) -> np.ndarray:
    return kernel_matrix(spec, X, mu.points) @ mu.weights


def euler_lagrange_residual(spec: KernelSpec, mu: DiscreteMeasure, probe_count: int = 10_000, seed: int = 0) -> float:
    """How far the support falls short of the potential's maximum (0 for a certificate)."""
    if spec.is_infinite:
        raise ValueError("residual requires a finite exponent")
    on_support = potential_values(spec, mu, mu.points)
    top = float(on_support.max())
    if probe_count > 0:
        rng = np.random.default_rng(seed)
        probes = rng.standard_normal((probe_count, mu.dim + 1))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        top = max(top, float(potential_values(spec, mu, probes).max()))
    return max(0.0, top - float(on_support.min()))


def uniform_energy(d: int, alpha: float, convention=Convention.HALF, nodes: int = SIMPSON_NODES) -> float:
    """Energy of the uniform measure on S^d under ``Lambda**alpha``.

    The integrand depends only on the angle theta to a fixed pole and is
    symmetric about pi/2, so only [0, pi/2] is integrated.  The substitution
    theta = (pi/2) s**m removes the theta**alpha endpoint singularity so
    composite Simpson keeps its fourth-order rate.
    """
    if d < 1 or not (0 < alpha < math.inf):
        raise ValueError("need d >= 1 and finite alpha > 0")
    m = max(1, math.ceil(5.0 / (alpha + 1.0)))
    s = np.linspace(0.0, 1.0, nodes)
    theta = 0.5 * math.pi * s**m
    jac = 0.5 * math.pi * m * s ** (m - 1)
    lam0 = theta * (2.0 / math.pi)
    integrand = lam0**alpha * np.sin(theta) ** (d - 1) * jac
    half_integral = simpson(integrand, x=s)
    # int_0^pi sin^{d-1} = sqrt(pi) Gamma(d/2) / Gamma((d+1)/2)
    log_norm = 0.5 * math.log(math.pi) + gammaln(d / 2.0) - gammaln((d + 1) / 2.0)
    mean_kernel = 2.0 * half_integral / math.exp(log_norm)
    return Convention.parse(convention).factor * mean_kernel


def kernel_sup_diff(alpha: float, beta: float) -> float:
    """max over s in [0, 1] of |s**alpha - s**beta|."""
    if not (0 < alpha < math.inf and 0 < beta < math.inf):
        raise ValueError("exponents must be finite and positive")
    if alpha == beta:
        return 0.0
    s = (beta / alpha) ** (1.0 / (alpha - beta))
    candidates = [abs(s**alpha - s**beta), 0.0]  # endpoints s=0, s=1 both give 0
    return max(candidates)


def energy_gradient_array(spec: KernelSpec, P: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(n, d+1) gradient of the Half energy with respect to the atom positions."""
    G, _ = kernel_gradient_rows(spec, P, P)
    n = P.shape[0]
    G[np.arange(n), np.arange(n)] = 0.0
    return w[:, None] * np.einsum("ijk,j->ik", G, w)


def energy_gradient(spec: KernelSpec, mu: DiscreteMeasure) -> list[TangentVector]:
    grads = energy_gradient_array(spec, mu.points, mu.weights)
    return [TangentVector(SpherePoint(p), g) for p, g in zip(mu.points, grads)]
