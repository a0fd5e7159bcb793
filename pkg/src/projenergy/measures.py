"""Discrete probability measures on S^d and the special configurations."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import DimensionError, SpherePoint, pairwise_projective_rho

WEIGHT_DROP = 1e-15
MERGE_TOL = 1e-9
LOAD_TOL = 1e-6


class MeasureFormatError(ValueError):
    """A measure file could not be parsed or failed validation."""


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms on S^d.

    ``points`` is an (n, d+1) array of unit vectors and ``weights`` an (n,)
    array summing to one.  Both are normalized and frozen on construction.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        P = np.array(self.points, dtype=float)
        if P.ndim != 2 or P.shape[1] < 2 or P.shape[0] == 0:
            raise ValueError(f"points must be a nonempty (n, d+1) array with d >= 1, got shape {P.shape}")
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != P.shape[0]:
            raise ValueError(f"{P.shape[0]} points but {w.size} weights")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        keep = w >= WEIGHT_DROP
        if not np.any(keep):
            raise ValueError("measure has no mass")
        P, w = P[keep], w[keep]
        norms = np.linalg.norm(P, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero vector cannot be normalized onto the sphere")
        P = P / norms[:, None]
        w = w / w.sum()
        P.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, points, weights=None) -> "DiscreteMeasure":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if weights is None:
            weights = np.full(P.shape[0], 1.0 / P.shape[0])
        return cls(P, weights)

    @classmethod
    def dirac(cls, x) -> "DiscreteMeasure":
        coords = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
        return cls(coords[None, :], np.ones(1))

    @classmethod
    def on_circle(cls, angles, weights=None) -> "DiscreteMeasure":
        a = np.asarray(angles, dtype=float)
        return cls.from_points(np.column_stack([np.cos(a), np.sin(a)]), weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.size

    @property
    def atoms(self) -> list[tuple[SpherePoint, float]]:
        return [(SpherePoint(p), float(w)) for p, w in zip(self.points, self.weights)]

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.size) <= tol))

    def transformed(self, M) -> "DiscreteMeasure":
        """Push forward under the linear map ``x -> M x``."""
        M = np.asarray(M, dtype=float)
        if M.shape != (self.dim + 1, self.dim + 1):
            raise DimensionError(f"matrix shape {M.shape} does not act on R^{self.dim + 1}")
        return DiscreteMeasure(self.points @ M.T, self.weights)

    def with_signs(self, signs) -> "DiscreteMeasure":
        s = np.asarray(signs, dtype=float).reshape(-1, 1)
        return DiscreteMeasure(self.points * s, self.weights)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }

    def __repr__(self):
        return f"DiscreteMeasure(dim={self.dim}, atoms={self.size})"


def check_same_dim(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.dim != nu.dim:
        raise DimensionError(f"measures live on S^{mu.dim} and S^{nu.dim}")


class MeasureClass(enum.Enum):
    PN_EQ = "PNEq"
    P_ON = "POn"
    P_ON_EQ = "POnEq"
    P_DELTA = "PDelta"
    P_DELTA_EQ = "PDeltaEq"
    PN_DELTA_EQ = "PNDeltaEq"
    OTHER = "Other"


def equidistributed_basis(d: int) -> DiscreteMeasure:
    if d < 1:
        raise ValueError("d must be >= 1")
    return DiscreteMeasure(np.eye(d + 1), np.full(d + 1, 1.0 / (d + 1)))


def fejes_toth_class_sizes(d: int, N: int) -> list[int]:
    """Number of the N particles assigned to each of the d+1 basis axes."""
    if N < 1:
        raise ValueError("N must be >= 1")
    q, r = divmod(N, d + 1)
    return [q + 1] * r + [q] * (d + 1 - r)


def fejes_toth_config(d: int, N: int) -> DiscreteMeasure:
    """N equal masses spread over e_0..e_d as evenly as possible, coincident atoms merged."""
    if d < 1:
        raise ValueError("d must be >= 1")
    sizes = np.array(fejes_toth_class_sizes(d, N), dtype=float)
    used = sizes > 0
    return DiscreteMeasure(np.eye(d + 1)[used], sizes[used] / N)


def random_configuration(d: int, N: int, seed: int, weighted: bool = False) -> DiscreteMeasure:
    if d < 1 or N < 1:
        raise ValueError("d and N must be >= 1")
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((N, d + 1))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    if weighted:
        w = rng.dirichlet(np.ones(N))
    else:
        w = np.full(N, 1.0 / N)
    return DiscreteMeasure(P, w)


def canonical_signs(points: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude coordinate (lowest index on ties) is positive."""
    P = np.asarray(points, dtype=float)
    idx = np.argmax(np.abs(P), axis=1)
    s = np.sign(P[np.arange(P.shape[0]), idx])
    s[s == 0] = 1.0
    return P * s[:, None]


def project_to_rp(mu: DiscreteMeasure, merge_tol: float = MERGE_TOL) -> DiscreteMeasure:
    """Canonical sign representative of each atom, with projectively coincident atoms merged."""
    P = canonical_signs(mu.points)
    dist = pairwise_projective_rho(P, P)
    owner = np.full(mu.size, -1)
    reps: list[int] = []
    for i in range(mu.size):
        if owner[i] >= 0:
            continue
        owner[i] = len(reps)
        close = (dist[i] <= merge_tol) & (owner < 0)
        owner[close] = len(reps)
        reps.append(i)
    if len(reps) == mu.size:
        if np.array_equal(P, mu.points):
            return mu
        return DiscreteMeasure(P, mu.weights)
    w = np.zeros(len(reps))
    np.add.at(w, owner, mu.weights)
    return DiscreteMeasure(P[reps], w)


def _orthonormal_support(points: np.ndarray, tol: float) -> bool:
    G = np.abs(points @ points.T)
    np.fill_diagonal(G, 0.0)
    return bool(np.all(G <= tol))


def classify(mu: DiscreteMeasure, tol: float = 1e-6, n_points: int | None = None) -> MeasureClass:
    """Coarsest named class containing ``mu``.

    Orthonormal-support classes are reported in their projective form
    (PDelta / PDeltaEq).  Pass ``n_points`` to recognize PNDeltaEq, which
    cannot be inferred from merged atoms alone.
    """
    d = mu.dim
    proj = project_to_rp(mu, merge_tol=max(tol, MERGE_TOL))
    orth = _orthonormal_support(proj.points, tol)
    if orth and proj.size == d + 1:
        if np.all(np.abs(proj.weights - 1.0 / (d + 1)) <= tol):
            return MeasureClass.P_DELTA_EQ
        if n_points is None:
            return MeasureClass.P_DELTA
    if orth and n_points is not None and proj.size <= d + 1:
        expected = sorted(fejes_toth_config(d, n_points).weights)
        got = sorted(proj.weights)
        if len(expected) == len(got) and np.allclose(expected, got, atol=tol, rtol=0):
            return MeasureClass.PN_DELTA_EQ
        if proj.size == d + 1:
            return MeasureClass.P_DELTA
    if mu.is_uniform(tol):
        return MeasureClass.PN_EQ
    return MeasureClass.OTHER


# -- file format --------------------------------------------------------------


def measure_from_dict(data: dict) -> DiscreteMeasure:
    try:
        d = int(data["dim"])
        P = np.array(data["points"], dtype=float)
        w = np.array(data["weights"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MeasureFormatError(f"malformed measure: {exc}") from exc
    if d < 1:
        raise MeasureFormatError(f"dim must be >= 1, got {d}")
    if P.ndim != 2 or P.shape[1] != d + 1 or P.shape[0] == 0:
        raise MeasureFormatError(f"points must be a nonempty list of {d + 1}-vectors")
    if w.shape != (P.shape[0],):
        raise MeasureFormatError(f"{P.shape[0]} points but weights of shape {w.shape}")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
        raise MeasureFormatError("non-finite entries")
    if np.any(w < 0):
        raise MeasureFormatError("negative weight")
    if abs(w.sum() - 1.0) > LOAD_TOL:
        raise MeasureFormatError(f"weights sum to {w.sum():.12g}, not 1")
    norms = np.linalg.norm(P, axis=1)
    if np.any(np.abs(norms - 1.0) > LOAD_TOL):
        raise MeasureFormatError("a point is not within 1e-6 of unit norm")
    return DiscreteMeasure(P, w)


def load_measure(path) -> DiscreteMeasure:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MeasureFormatError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MeasureFormatError("top-level JSON value must be an object")
    return measure_from_dict(data)


def save_measure(mu: DiscreteMeasure, path):
    # json writes floats with repr, which round-trips exactly
    Path(path).write_text(json.dumps(mu.to_dict(), indent=1) + "\n")
