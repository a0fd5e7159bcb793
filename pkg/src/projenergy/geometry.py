"""Metric primitives on the sphere S^d and on projective space RP^d.

Points live in R^{d+1}.  Angles are computed as ``2*atan2(|x-y|, |x+y|)``,
which equals ``arccos(x.y)`` but keeps full relative precision near
coincident and antipodal pairs.

The array helpers (``pairwise_*``, ``kernel_matrix``, ``potential_gradients``)
are the vectorized workhorses used by the energy and optimizer modules; the
``SpherePoint`` functions wrap them for single pairs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-9
KINK_TOL = 1e-9
COINCIDENT_TOL = 1e-7
GRAD_CAP = 1e6
TWO_OVER_PI = 2.0 / math.pi


class DimensionError(ValueError):
    """Raised when points of different ambient dimension are combined."""


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """Unit vector in R^{d+1}; renormalized on construction."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 2:
            raise ValueError("a point on S^d needs d >= 1, i.e. at least 2 coordinates")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        n = np.linalg.norm(c)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        if abs(n - 1.0) > UNIT_TOL:
            c = c / n
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    @classmethod
    def basis(cls, d: int, i: int) -> "SpherePoint":
        e = np.zeros(d + 1)
        e[i] = 1.0
        return cls(e)

    @classmethod
    def from_angle(cls, theta: float) -> "SpherePoint":
        """Point on S^1 at polar angle ``theta``."""
        return cls(np.array([math.cos(theta), math.sin(theta)]))

    def __neg__(self) -> "SpherePoint":
        return SpherePoint(-self.coords)

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"SpherePoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Vector in the tangent space of the sphere at ``base``.

    ``capped`` is set by :func:`grad_kernel` when the gradient magnitude was
    clipped at a coincidence singularity.
    """

    base: SpherePoint
    vec: np.ndarray
    capped: bool = field(default=False)

    def __post_init__(self):
        v = np.array(self.vec, dtype=float).reshape(-1)
        b = self.base.coords
        if v.shape != b.shape:
            raise DimensionError(f"tangent vector has {v.size} coords, base has {b.size}")
        normal = float(v @ b)
        if abs(normal) > UNIT_TOL * max(1.0, float(np.linalg.norm(v))):
            raise ValueError(f"vector is not tangent at base (v.base = {normal:.3e})")
        if normal != 0.0:
            v = v - normal * b
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    @classmethod
    def zero(cls, base: SpherePoint) -> "TangentVector":
        return cls(base, np.zeros_like(base.coords))


class KernelFamily(enum.Enum):
    LAMBDA_POWER = "lambda_power"
    QUADRATIC_G = "quadratic_g"


@dataclass(frozen=True)
class KernelSpec:
    """Interaction kernel: ``Lambda**alpha`` or ``g(t) = 1 - t**2``.

    ``alpha = math.inf`` selects the orthogonality indicator, realized with the
    angular tolerance ``orth_tol`` (radians).
    """

    alpha: float = 1.0
    family: KernelFamily = KernelFamily.LAMBDA_POWER
    orth_tol: float = 1e-9

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (0 < self.orth_tol <= 1e-3):
            raise ValueError(f"orth_tol must lie in (0, 1e-3], got {self.orth_tol}")

    @classmethod
    def power(cls, alpha: float, orth_tol: float = 1e-9) -> "KernelSpec":
        return cls(alpha=float(alpha), family=KernelFamily.LAMBDA_POWER, orth_tol=orth_tol)

    @classmethod
    def quadratic(cls) -> "KernelSpec":
        return cls(alpha=2.0, family=KernelFamily.QUADRATIC_G)

    @property
    def is_infinite(self) -> bool:
        return self.family is KernelFamily.LAMBDA_POWER and math.isinf(self.alpha)

    def describe(self) -> str:
        if self.family is KernelFamily.QUADRATIC_G:
            return "g(t)=1-t^2"
        if self.is_infinite:
            return f"Lambda^inf (orth_tol={self.orth_tol:g})"
        return f"Lambda^{self.alpha:g}"


# -- array helpers -----------------------------------------------------------


def _as_rows(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[None, :] if X.ndim == 1 else X


def _check_same_dim(X: np.ndarray, Y: np.ndarray):
    if X.shape[-1] != Y.shape[-1]:
        raise DimensionError(f"dimension mismatch: R^{X.shape[-1]} vs R^{Y.shape[-1]}")


def _chord_pair(X, Y):
    X, Y = _as_rows(X), _as_rows(Y)
    _check_same_dim(X, Y)
    diff = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=-1)
    summ = np.linalg.norm(X[:, None, :] + Y[None, :, :], axis=-1)
    return diff, summ


def pairwise_sphere_distance(X, Y) -> np.ndarray:
    """Matrix of geodesic distances between the rows of X and Y."""
    diff, summ = _chord_pair(X, Y)
    return 2.0 * np.arctan2(diff, summ)


def pairwise_projective_rho(X, Y) -> np.ndarray:
    """Matrix of projective distances ``min(rho(x,y), rho(x,-y))``."""
    diff, summ = _chord_pair(X, Y)
    return 2.0 * np.arctan2(np.minimum(diff, summ), np.maximum(diff, summ))


def pairwise_lambda(X, Y) -> np.ndarray:
    return TWO_OVER_PI * pairwise_projective_rho(X, Y)


def kernel_matrix(spec: KernelSpec, X, Y) -> np.ndarray:
    """Kernel values between every row of X and every row of Y."""
    X, Y = _as_rows(X), _as_rows(Y)
    _check_same_dim(X, Y)
    if spec.family is KernelFamily.QUADRATIC_G:
        t = np.clip(X @ Y.T, -1.0, 1.0)
        return 1.0 - t * t
    if spec.is_infinite:
        t = np.abs(X @ Y.T)
        return (t <= math.sin(spec.orth_tol)).astype(float)
    lam = pairwise_lambda(X, Y)
    if spec.alpha == 1.0:
        return lam
    return lam**spec.alpha


def lambda_power_derivative(alpha: float, rho: np.ndarray) -> np.ndarray:
    """d/d(rho) of ``Lambda_0(rho)**alpha`` with the kink and coincidence policies.

    Returns ``(deriv, capped)`` arrays.  The derivative is 0 within KINK_TOL of
    pi/2, and 0 near rho in {0, pi} when alpha > 1.  For alpha <= 1 the
    magnitude there is clipped to GRAD_CAP.
    """
    rho = np.asarray(rho, dtype=float)
    lam0 = TWO_OVER_PI * np.minimum(rho, math.pi - rho)
    slope = np.where(rho < math.pi / 2, TWO_OVER_PI, -TWO_OVER_PI)
    near_pole = (rho < COINCIDENT_TOL) | (rho > math.pi - COINCIDENT_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        if alpha == 1.0:
            factor = np.ones_like(lam0)
        else:
            factor = alpha * lam0 ** (alpha - 1.0)
    deriv = factor * slope
    capped = np.zeros(rho.shape, dtype=bool)
    if alpha > 1.0:
        deriv = np.where(near_pole, 0.0, deriv)
    else:
        big = near_pole & ~(np.abs(deriv) <= GRAD_CAP)
        deriv = np.where(big, slope * GRAD_CAP, deriv)
        capped = big
    deriv = np.where(np.abs(rho - math.pi / 2) <= KINK_TOL, 0.0, deriv)
    return deriv, capped


def kernel_gradient_rows(spec: KernelSpec, X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Riemannian gradients of ``k(., y_j)`` at each ``x_i``.

    Returns an (n, m, d+1) array of tangent vectors at the rows of X and an
    (n, m) boolean array marking capped entries.
    """
    X, Y = _as_rows(X), _as_rows(Y)
    _check_same_dim(X, Y)
    if spec.is_infinite:
        raise ValueError("gradient requires a finite exponent")
    t = np.clip(X @ Y.T, -1.0, 1.0)
    # tangential component of y at x
    U = Y[None, :, :] - t[:, :, None] * X[:, None, :]
    if spec.family is KernelFamily.QUADRATIC_G:
        return (-2.0 * t)[:, :, None] * U, np.zeros(t.shape, dtype=bool)
    rho = pairwise_sphere_distance(X, Y)
    deriv, capped = lambda_power_derivative(spec.alpha, rho)
    unorm = np.linalg.norm(U, axis=-1)
    # grad rho = -U/|U|; |U| = sin(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where((unorm > 0) & (deriv != 0), -deriv / unorm, 0.0)
    capped = capped | ((unorm == 0) & (deriv != 0))
    return coef[:, :, None] * U, capped


def exp_rows(X: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Exponential map applied row-wise; rows are renormalized."""
    n = np.linalg.norm(V, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        direction = np.where(n > 0, V / n, 0.0)
    out = X * np.cos(n) + direction * np.sin(n)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def random_tangent(base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unit tangent directions at the rows of ``base``, uniformly distributed."""
    base = _as_rows(base)
    g = rng.standard_normal(base.shape)
    g -= np.sum(g * base, axis=-1, keepdims=True) * base
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


# -- single-point API --------------------------------------------------------


def _pair(x: SpherePoint, y: SpherePoint):
    if x.coords.size != y.coords.size:
        raise DimensionError(f"dimension mismatch: S^{x.dim} vs S^{y.dim}")
    return x.coords, y.coords


def geodesic_distance(x: SpherePoint, y: SpherePoint) -> float:
    a, b = _pair(x, y)
    return float(2.0 * math.atan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def projective_rho(x: SpherePoint, y: SpherePoint) -> float:
    a, b = _pair(x, y)
    diff, summ = np.linalg.norm(a - b), np.linalg.norm(a + b)
    return float(2.0 * math.atan2(min(diff, summ), max(diff, summ)))


def projective_kernel(x: SpherePoint, y: SpherePoint) -> float:
    return TWO_OVER_PI * projective_rho(x, y)


def kernel_value(spec: KernelSpec, x: SpherePoint, y: SpherePoint) -> float:
    a, b = _pair(x, y)
    return float(kernel_matrix(spec, a, b)[0, 0])


def f_alpha(alpha: float, t):
    """The kernel ``Lambda**alpha`` written as a function of ``t = x.y``."""
    return (TWO_OVER_PI * np.arccos(np.abs(np.clip(t, -1.0, 1.0)))) ** alpha


def g_quadratic(t):
    t = np.asarray(t, dtype=float)
    return 1.0 - t * t


def exp_map(v: TangentVector) -> SpherePoint:
    n = v.norm
    if n >= math.pi:
        raise ValueError(f"tangent vector norm {n:.6g} is outside the injectivity radius pi")
    if n == 0.0:
        return v.base
    return SpherePoint(exp_rows(v.base.coords[None, :], v.vec[None, :])[0])


def log_map(x: SpherePoint, base: SpherePoint) -> TangentVector:
    a, b = _pair(x, base)
    rho = geodesic_distance(x, base)
    if rho >= math.pi - 1e-9:
        raise ValueError("log map undefined at (near-)antipodal points")
    if rho == 0.0:
        return TangentVector.zero(base)
    u = a - float(a @ b) * b
    return TangentVector(base, rho * u / np.linalg.norm(u))


def grad_kernel(spec: KernelSpec, x: SpherePoint, y: SpherePoint) -> TangentVector:
    """Riemannian gradient of ``kernel_value(spec, ., y)`` at x."""
    a, b = _pair(x, y)
    g, capped = kernel_gradient_rows(spec, a, b)
    return TangentVector(x, g[0, 0], capped=bool(capped[0, 0]))
