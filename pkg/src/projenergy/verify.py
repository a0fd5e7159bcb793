"""Numerical checks of the majorization bound and the second-moment identities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import Convention, energy_value
from .geometry import KernelSpec, f_alpha, g_quadratic
from .measures import DiscreteMeasure

EQUALITY_TOL = 1e-9
EQUALITY_WINDOW = 1e-6
GAP_TOL = 1e-12
ANCHORS = np.array([-1.0, 0.0, 1.0])


@dataclass(frozen=True)
class MajorizationReport:
    alpha: float
    min_gap: float
    min_gap_at: float
    equality_points: list = field(repr=False)
    passed: bool
    # smallest and largest |t| where h < 0, or None
    violation_range: tuple[float, float] | None = None


def _anchor_refinement(grid_size: int) -> np.ndarray:
    # for alpha just below 2 the violation sits within ~1e-8 of |t| = 1,
    # far inside one uniform grid cell
    u = np.geomspace(1e-16, 1e-2, max(grid_size // 10, 100))
    near_one = np.concatenate([1.0 - u, u - 1.0])
    near_zero = np.concatenate([u, -u])
    return np.concatenate([ANCHORS, near_one, near_zero])


def majorization_check(alpha: float, grid_size: int = 100_000) -> MajorizationReport:
    """Scan h(t) = (1 - t^2) - f_alpha(t) over [-1, 1].

    Passes when h >= 0 everywhere and h vanishes only next to -1, 0 and 1.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    t = np.union1d(np.linspace(-1.0, 1.0, grid_size), _anchor_refinement(grid_size))
    h = g_quadratic(t) - f_alpha(alpha, t)
    k = int(np.argmin(h))
    zeros = t[np.abs(h) <= EQUALITY_TOL]
    near_anchor = np.min(np.abs(zeros[:, None] - ANCHORS[None, :]), axis=1) <= EQUALITY_WINDOW
    passed = bool(h[k] >= -GAP_TOL and np.all(near_anchor))
    bad = np.abs(t[h < -GAP_TOL])
    span = (float(bad.min()), float(bad.max())) if bad.size else None
    return MajorizationReport(float(alpha), float(h[k]), float(t[k]), zeros.tolist(), passed, span)


@dataclass(frozen=True)
class MomentMatrix:
    entries: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def moment_matrix(mu: DiscreteMeasure) -> MomentMatrix:
    P = mu.points
    M = (P * mu.weights[:, None]).T @ P
    return MomentMatrix(0.5 * (M + M.T))


@dataclass(frozen=True)
class FrameReport:
    tr_I2: float
    lower_bound: float
    tight: bool
    energy_g: float
    identity_error: float

    @property
    def identity_holds(self) -> bool:
        return self.identity_error <= 1e-12


def frame_bound_check(mu: DiscreteMeasure) -> FrameReport:
    I = moment_matrix(mu).entries
    tr_I2 = float(np.sum(I * I))
    lower = 1.0 / (mu.dim + 1)
    e_g = energy_value(KernelSpec.quadratic(), mu, Convention.PLAIN)
    return FrameReport(
        tr_I2=tr_I2,
        lower_bound=lower,
        tight=abs(tr_I2 - lower) <= 1e-9,
        energy_g=e_g,
        identity_error=abs(e_g - (1.0 - tr_I2)),
    )


@dataclass(frozen=True)
class ChainReport:
    e_f: float
    e_g: float
    e_g_sigma: float
    passed: bool

    @property
    def all_equal(self) -> bool:
        return max(self.e_f, self.e_g, self.e_g_sigma) - min(self.e_f, self.e_g, self.e_g_sigma) <= EQUALITY_TOL


def chain_check(mu: DiscreteMeasure, alpha: float) -> ChainReport:
    """E_f(mu) <= E_g(mu) <= E_g(sigma) = d/(d+1), all in the Plain convention."""
    if alpha < 2:
        raise ValueError(f"the chain is only asserted for alpha >= 2, got {alpha}")
    e_f = energy_value(KernelSpec.power(alpha), mu, Convention.PLAIN)
    e_g = energy_value(KernelSpec.quadratic(), mu, Convention.PLAIN)
    e_sigma = mu.dim / (mu.dim + 1)
    passed = e_f <= e_g + GAP_TOL and e_g <= e_sigma + GAP_TOL
    return ChainReport(e_f, e_g, e_sigma, bool(passed))
