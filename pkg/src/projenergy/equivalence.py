"""Essential equivalence: equality of measures on RP^d up to an orthogonal map."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import pairwise_projective_rho
from .measures import DiscreteMeasure, check_same_dim, project_to_rp

ATOM_GUARD = 64
SIGN_ENUM_MAX = 16
SIGN_EDGE_MIN = 1e-3


@dataclass(frozen=True)
class EquivalenceWitness:
    """Outcome of an equivalence test.

    ``atom_matching`` pairs atom indices of ``project_to_rp(mu)`` with those
    of ``project_to_rp(nu)`` (same merge tolerance as the test).  ``rotation``
    maps the matched mu atoms onto the nu atoms up to sign.
    """

    equivalent: bool
    rotation: np.ndarray | None
    atom_matching: list[tuple[int, int]] | None
    residual: float


def _procrustes(X: np.ndarray, Y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Orthogonal R minimizing sum_i w_i |R x_i - y_i|^2."""
    H = (Y * w[:, None]).T @ X
    U, _, Vt = np.linalg.svd(H)
    return U @ Vt


def _batched_procrustes(X, Y, w, signs):
    # signs: (k, n)
    H = np.einsum("n,na,sn,nb->sab", w, Y, signs, X)
    U, _, Vt = np.linalg.svd(H)
    return U @ Vt


def _residual(R, X, Y) -> float:
    return float(np.max(np.diag(pairwise_projective_rho(X @ R.T, Y))))


def _propagated_signs(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Signs s with s_i s_j (x_i.x_j) matching (y_i.y_j), spread along strong Gram entries."""
    n = X.shape[0]
    Gx, Gy = X @ X.T, Y @ Y.T
    s = np.zeros(n)
    for root in range(n):
        if s[root] != 0:
            continue
        s[root] = 1.0
        frontier = [root]
        while frontier:
            i = frontier.pop()
            strength = np.abs(Gx[i])
            for j in np.argsort(-strength):
                if s[j] != 0 or strength[j] < SIGN_EDGE_MIN:
                    continue
                s[j] = s[i] * np.sign(Gx[i, j]) * np.sign(Gy[i, j])
                frontier.append(j)
    return s


def _align(X, Y, w, tol):
    """Best (residual, R) over sign choices for an already matched pair of atom lists."""
    n = X.shape[0]
    s = _propagated_signs(X, Y)
    R = _procrustes(X * s[:, None], Y, w)
    best = (_residual(R, X, Y), R)
    if best[0] <= tol:
        return best
    if n <= SIGN_ENUM_MAX:
        # global sign is immaterial; fix s_0 = +1
        for chunk in _sign_chunks(n):
            Rs = _batched_procrustes(X, Y, w, chunk)
            moved = np.einsum("sab,nb->sna", Rs, X)
            res = np.array([np.max(np.diag(pairwise_projective_rho(m, Y))) for m in moved])
            k = int(np.argmin(res))
            if res[k] < best[0]:
                best = (float(res[k]), Rs[k])
            if best[0] <= tol:
                break
        return best
    for _ in range(50):
        R = best[1]
        s = np.sign(np.sum((X @ R.T) * Y, axis=1))
        s[s == 0] = 1.0
        R = _procrustes(X * s[:, None], Y, w)
        res = _residual(R, X, Y)
        if res >= best[0]:
            break
        best = (res, R)
    return best


def _sign_chunks(n, chunk=4096):
    rest = itertools.product((1.0, -1.0), repeat=n - 1)
    while True:
        block = list(itertools.islice(rest, chunk))
        if not block:
            return
        yield np.hstack([np.ones((len(block), 1)), np.array(block)])


def _bijections(Dx, Dy, wx, wy, tol):
    """Yield atom bijections preserving weights and projective distances within tol."""
    n = len(wx)
    prof_x = np.sort(Dx, axis=1)
    prof_y = np.sort(Dy, axis=1)
    allowed = (np.abs(wx[:, None] - wy[None, :]) <= tol) & np.all(
        np.abs(prof_x[:, None, :] - prof_y[None, :, :]) <= tol, axis=-1
    )
    order = np.argsort(allowed.sum(axis=1), kind="stable")
    assign = np.full(n, -1)
    used = np.zeros(n, dtype=bool)

    def extend(depth):
        if depth == n:
            yield assign.copy()
            return
        i = order[depth]
        placed = order[:depth]
        for j in np.nonzero(allowed[i] & ~used)[0]:
            if depth and np.any(np.abs(Dx[i, placed] - Dy[j, assign[placed]]) > tol):
                continue
            assign[i], used[j] = j, True
            yield from extend(depth + 1)
            assign[i], used[j] = -1, False

    yield from extend(0)


def essentially_equivalent(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = 1e-6) -> EquivalenceWitness:
    check_same_dim(mu, nu)
    merge = max(tol, 1e-9)
    a, b = project_to_rp(mu, merge), project_to_rp(nu, merge)
    if a.size > ATOM_GUARD or b.size > ATOM_GUARD:
        raise ValueError(f"more than {ATOM_GUARD} projective atoms; matching search refused")
    if a.size != b.size:
        return EquivalenceWitness(False, None, None, math.inf)
    if np.abs(np.sort(a.weights) - np.sort(b.weights)).max() > tol:
        return EquivalenceWitness(False, None, None, math.inf)
    Dx = pairwise_projective_rho(a.points, a.points)
    Dy = pairwise_projective_rho(b.points, b.points)
    best_res, best = math.inf, None
    for perm in _bijections(Dx, Dy, a.weights, b.weights, tol):
        Y = b.points[perm]
        res, R = _align(a.points, Y, 0.5 * (a.weights + b.weights[perm]), tol)
        if res < best_res:
            best_res, best = res, (R, perm)
        if res <= tol:
            break
    if best is None:
        return EquivalenceWitness(False, None, None, math.inf)
    R, perm = best
    matching = [(int(i), int(j)) for i, j in enumerate(perm)]
    ok = best_res <= tol and np.max(np.abs(R @ R.T - np.eye(R.shape[0]))) <= 1e-9
    return EquivalenceWitness(bool(ok), R, matching, float(best_res))


def is_in_PDelta(mu: DiscreteMeasure, tol: float = 1e-6) -> bool:
    a = project_to_rp(mu, max(tol, 1e-9))
    if a.size != mu.dim + 1 or np.any(a.weights <= 0):
        return False
    G = np.abs(a.points @ a.points.T)
    np.fill_diagonal(G, 0.0)
    return bool(np.all(G <= tol))
