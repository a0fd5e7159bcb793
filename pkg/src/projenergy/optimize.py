"""Energy maximization, threshold scans and local-stability experiments."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .energy import conjectured_value, energy_gradient_array, energy_value, points_energy
from .equivalence import essentially_equivalent, is_in_PDelta
from .geometry import (
    KernelSpec,
    SpherePoint,
    exp_rows,
    kernel_matrix,
    pairwise_lambda,
    pairwise_sphere_distance,
    random_tangent,
)
from .measures import DiscreteMeasure, fejes_toth_config, random_configuration

log = logging.getLogger(__name__)

STEP_FLOOR = 1e-14
ORTHO_TOL = 1e-9
SMOOTHING_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8)


@dataclass(frozen=True)
class AscentOptions:
    restarts: int = 8
    max_iters: int = 5000
    initial_step: float = 1.0
    grad_tol: float = 1e-8
    energy_tol: float = 1e-15
    seed: int = 0
    workers: int = 1
    warm_start: bool = True

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.workers < 1:
            raise ValueError("restarts, max_iters and workers must be >= 1")
        if not (self.initial_step > 0 and self.grad_tol > 0 and self.energy_tol > 0):
            raise ValueError("step and tolerances must be positive")


@dataclass
class RestartTrace:
    energies: list[float]
    iterations: int
    converged: bool
    stop_reason: str


@dataclass
class AscentResult:
    best: DiscreteMeasure
    best_energy: float
    per_restart_energies: list[float]
    iterations: list[int]
    converged_flags: list[bool]
    finals: list[DiscreteMeasure] = field(repr=False, default_factory=list)
    traces: list[RestartTrace] = field(repr=False, default_factory=list)


def restart_seed(seed: int, index: int) -> int:
    """Independent deterministic stream per (master seed, index)."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _smoothed_objective(z, n, alpha, eps, w):
    """Negated Half energy with |t| replaced by sqrt(t^2 + eps^2), and its gradient.

    Atoms are parametrized by unnormalized vectors z, so the search is
    unconstrained.  The smoothing removes the ridge at orthogonal pairs.
    """
    Z = z.reshape(n, -1)
    nr = np.linalg.norm(Z, axis=1)
    X = Z / nr[:, None]
    T = X @ X.T
    root = np.sqrt(T * T + eps * eps)
    s = np.minimum(root / math.sqrt(1.0 + eps * eps), 1.0 - 1e-15)
    lam = (2.0 / math.pi) * np.arccos(s)
    K = lam**alpha
    np.fill_diagonal(K, 0.0)
    E = 0.5 * (w @ K @ w)
    dK = alpha * lam ** (alpha - 1.0) * (-(2.0 / math.pi) / np.sqrt(1.0 - s * s))
    dK *= T / root / math.sqrt(1.0 + eps * eps)
    np.fill_diagonal(dK, 0.0)
    gX = (np.outer(w, w) * dK) @ X
    gZ = (gX - np.sum(gX * X, axis=1)[:, None] * X) / nr[:, None]
    return -E, -gZ.ravel()


def smoothed_warm_start(P: np.ndarray, w: np.ndarray, alpha: float) -> np.ndarray:
    """L-BFGS on a sequence of smoothed kernels, sharpening towards the true one."""
    n = P.shape[0]
    z = P.ravel()
    for eps in SMOOTHING_SCHEDULE:
        res = minimize(
            _smoothed_objective,
            z,
            args=(n, alpha, eps, w),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 2000, "gtol": 1e-14, "ftol": 1e-16},
        )
        z = res.x
    X = z.reshape(n, -1)
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def ascend(spec: KernelSpec, P: np.ndarray, w: np.ndarray, opts: AscentOptions) -> tuple[np.ndarray, RestartTrace]:
    """Gradient ascent of the Half energy over atom positions at fixed weights.

    Each iteration moves every atom along the exponential map of its
    per-unit-mass gradient, halving the step from ``initial_step`` until the
    energy does not decrease.  The recorded energies are nondecreasing.
    """
    E = points_energy(spec, P, w)
    energies = [E]
    reason = "max_iters"
    it = 0
    window = 200
    while it < opts.max_iters:
        V = energy_gradient_array(spec, P, w) / w[:, None]
        gnorm = float(np.max(np.linalg.norm(V, axis=1)))
        if gnorm < opts.grad_tol:
            reason = "gradient"
            break
        # keep every displacement inside the injectivity radius
        step = min(opts.initial_step, 0.5 * math.pi / gnorm)
        while step >= STEP_FLOOR:
            Pn = exp_rows(P, step * V)
            En = points_energy(spec, Pn, w)
            if En >= E:
                break
            step *= 0.5
        else:
            reason = "step_underflow"
            break
        P, E = Pn, En
        energies.append(E)
        it += 1
        if len(energies) > window and energies[-1] - energies[-1 - window] < opts.energy_tol:
            reason = "energy_plateau"
            break
    return P, RestartTrace(energies, it, reason != "max_iters", reason)


def maximize_particles(d: int, N: int, alpha: float, opts: AscentOptions = AscentOptions()) -> AscentResult:
    """Best of ``opts.restarts`` ascents over N equal-mass particles on S^d."""
    if not (0 < alpha < math.inf):
        raise ValueError("alpha must be finite and positive")
    if N < 1 or d < 1:
        raise ValueError("need d >= 1 and N >= 1")
    spec = KernelSpec.power(alpha)
    w = np.full(N, 1.0 / N)

    def run(k):
        P = random_configuration(d, N, restart_seed(opts.seed, k)).points
        if N == 1:
            return P, RestartTrace([0.0], 0, True, "single_atom")
        if opts.warm_start:
            P = smoothed_warm_start(P, w, alpha)
        return ascend(spec, P, w, opts)

    if opts.workers > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            runs = list(pool.map(run, range(opts.restarts)))
    else:
        runs = [run(k) for k in range(opts.restarts)]
    finals = [DiscreteMeasure(P, w) for P, _ in runs]
    traces = [t for _, t in runs]
    energies = [t.energies[-1] for t in traces]
    k = int(np.argmax(energies))
    return AscentResult(
        best=finals[k],
        best_energy=energies[k],
        per_restart_energies=energies,
        iterations=[t.iterations for t in traces],
        converged_flags=[t.converged for t in traces],
        finals=finals,
        traces=traces,
    )


# -- weights ------------------------------------------------------------------


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / k > 0)[0][-1]
    theta = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(v + theta, 0.0)


def maximize_weights(support, alpha: float, iters: int = 10_000) -> DiscreteMeasure:
    """Maximize the Half energy over the weight simplex with positions fixed."""
    P = np.array([p.coords if isinstance(p, SpherePoint) else p for p in support], dtype=float)
    n = P.shape[0]
    if n == 0:
        raise ValueError("support must be nonempty")
    uniform = np.full(n, 1.0 / n)
    G = np.abs(P @ P.T / np.outer(np.linalg.norm(P, axis=1), np.linalg.norm(P, axis=1)))
    np.fill_diagonal(G, 0.0)
    if n == 1 or np.all(G <= ORTHO_TOL):
        return DiscreteMeasure(P, uniform)
    K = kernel_matrix(KernelSpec.power(alpha), P, P)
    np.fill_diagonal(K, 0.0)
    step = 1.0 / (2.0 * np.max(K.sum(axis=1)))
    w = uniform
    for _ in range(iters):
        nxt = project_simplex(w + step * (K @ w))
        if np.max(np.abs(nxt - w)) < 1e-15:
            w = nxt
            break
        w = nxt
    return DiscreteMeasure(P, w)


# -- threshold scan -------------------------------------------------------------


class ThresholdInconsistency(RuntimeError):
    """Verdicts were not monotone in alpha even after widening the bracket."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


@dataclass
class ThresholdSample:
    alpha: float
    best_energy: float
    conjectured: float
    verdict: str  # "above", "below" or "tie"

    @property
    def gap(self) -> float:
        return self.best_energy - self.conjectured


@dataclass
class ThresholdEstimate:
    """Heuristic bracket for the exponent above which the basis configuration wins.

    The bracket is an upper-confidence estimate from a non-certified search,
    not a proof.  ``trivial`` marks N <= d+1, where no scan is needed.
    """

    d: int
    N: int
    bracket: tuple[float, float]
    samples: list[ThresholdSample]
    tolerance: float
    trivial: bool = False
    widened: bool = False
    flags: list[str] = field(default_factory=list)


def threshold_verdict(d, N, alpha, opts, margin=1e-7, eq_tol=1e-6) -> ThresholdSample:
    """Compare the best configuration found at ``alpha`` with the basis configuration.

    "below": something beats it.  "tie": a non-equivalent configuration
    matches it within ``margin`` (maximizer not unique).  "above" otherwise.
    """
    result = maximize_particles(d, N, alpha, opts)
    target = conjectured_value(d, N, strict=False)
    best = result.best_energy
    if best > target + margin:
        verdict = "below"
    elif best >= target - margin:
        same = essentially_equivalent(result.best, fejes_toth_config(d, N), eq_tol).equivalent
        verdict = "above" if same else "tie"
    else:
        # the search never reached the basis value; no witness against it
        verdict = "above"
    return ThresholdSample(alpha, best, target, verdict)


def estimate_threshold(
    d: int,
    N: int,
    alpha_lo: float,
    alpha_hi: float,
    alpha_tol: float = 0.05,
    opts: AscentOptions = AscentOptions(restarts=16),
    margin: float = 1e-7,
    eq_tol: float = 1e-6,
) -> ThresholdEstimate:
    if not (0 < alpha_lo < alpha_hi):
        raise ValueError("need 0 < alpha_lo < alpha_hi")
    if N <= d + 1:
        return ThresholdEstimate(d, N, (0.0, alpha_lo), [], alpha_tol, trivial=True)

    samples: list[ThresholdSample] = []

    def probe(alpha):
        s = threshold_verdict(d, N, alpha, opts, margin, eq_tol)
        samples.append(s)
        log.info("alpha=%.6g best=%.12g verdict=%s", alpha, s.best_energy, s.verdict)
        return s.verdict == "above"

    est = ThresholdEstimate(d, N, (alpha_lo, alpha_hi), samples, alpha_tol)
    lo, hi = alpha_lo, alpha_hi
    lo_above, hi_above = probe(lo), probe(hi)
    if lo_above and not hi_above:
        est.flags.append(f"inconsistent verdicts on [{lo:g}, {hi:g}]; widening")
        est.widened = True
        lo, hi = lo / 2.0, hi * 2.0
        lo_above, hi_above = probe(lo), probe(hi)
        if lo_above and not hi_above:
            est.bracket = (lo, hi)
            raise ThresholdInconsistency("verdicts not monotone in alpha after widening", est)
    if lo_above:
        est.bracket = (0.0, lo)
        est.flags.append("basis configuration already wins at alpha_lo")
        return est
    if not hi_above:
        est.bracket = (hi, math.inf)
        est.flags.append("basis configuration still beaten at alpha_hi")
        return est
    while hi - lo > alpha_tol:
        mid = 0.5 * (lo + hi)
        if probe(mid):
            hi = mid
        else:
            lo = mid
    est.bracket = (lo, hi)
    ordered = sorted(samples, key=lambda s: s.alpha)
    seen_above = False
    for s in ordered:
        if s.verdict == "above":
            seen_above = True
        elif seen_above:
            est.flags.append(f"non-monotone verdict at alpha={s.alpha:g}")
    return est


# -- local stability -------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    trials: int
    violations: int
    max_energy_gain: float
    radius: float
    alpha: float


def perturb_fragments(xi_hat: DiscreteMeasure, r: float, k_split: int, rng: np.random.Generator) -> DiscreteMeasure:
    """Split atoms into random fragments and move each by less than r.

    Coupling every fragment to its parent atom shows the result is within
    d_inf < r of ``xi_hat``.
    """
    if r == 0:
        return xi_hat
    pts, wts = [], []
    dim = xi_hat.dim
    for p, m in zip(xi_hat.points, xi_hat.weights):
        k = int(rng.integers(1, k_split + 1))
        share = rng.dirichlet(np.ones(k)) * m
        base = np.repeat(p[None, :], k, axis=0)
        radius = r * rng.random(k) ** (1.0 / dim)
        V = random_tangent(base, rng) * radius[:, None]
        pts.append(exp_rows(base, V))
        wts.append(share)
    return DiscreteMeasure(np.vstack(pts), np.concatenate(wts))


def stability_experiment(
    xi_hat: DiscreteMeasure,
    alpha: float,
    r: float,
    k_split: int = 5,
    trials: int = 1000,
    seed: int = 0,
) -> StabilityReport:
    """Count random d_inf-close perturbations that raise the energy."""
    if not is_in_PDelta(xi_hat):
        raise ValueError("xi_hat must be supported on an orthonormal basis (up to sign)")
    if not (1 < alpha < math.inf):
        raise ValueError("alpha must satisfy 1 < alpha < inf")
    if not (0 <= r < math.pi / 4):
        raise ValueError("radius must lie in [0, pi/4)")
    if k_split < 1:
        raise ValueError("k_split must be >= 1")
    spec = KernelSpec.power(alpha)
    base = energy_value(spec, xi_hat)
    rng = np.random.default_rng(seed)
    violations, gain = 0, -math.inf
    for _ in range(trials):
        xi = perturb_fragments(xi_hat, r, k_split, rng)
        delta = energy_value(spec, xi) - base
        gain = max(gain, delta)
        if delta > 1e-12:
            violations += 1
    return StabilityReport(trials, violations, float(gain), float(r), float(alpha))


# -- aggregation inequality --------------------------------------------------------


@dataclass(frozen=True)
class AggregationReport:
    xbar: SpherePoint
    c_empirical: float
    radius: float
    sample_count: int
    c_target: float

    @property
    def passed(self) -> bool:
        return self.c_empirical >= self.c_target


def recentered_deficit(nu_list: list[DiscreteMeasure], X: np.ndarray) -> np.ndarray:
    """F(x) = sum_i int (1 - Lambda(x, y)) dnu_i(y) at each row of X."""
    X = np.atleast_2d(X)
    total = np.zeros(X.shape[0])
    for nu in nu_list:
        total += (1.0 - pairwise_lambda(X, nu.points)) @ nu.weights
    return total


def _cap_exp(d: int, v: np.ndarray) -> np.ndarray:
    """exp map at e_0 from tangent coordinates along e_1..e_d."""
    V = np.hstack([np.zeros((v.shape[0], 1)), v])
    base = np.zeros_like(V)
    base[:, 0] = 1.0
    return exp_rows(base, V)


def _vertex_candidates(nu_list, d, limit=5000):
    atoms = np.vstack([nu.points for nu in nu_list])
    combos = itertools.combinations(range(atoms.shape[0]), d)
    out = []
    for c in itertools.islice(combos, limit):
        A = atoms[list(c)]
        _, _, Vt = np.linalg.svd(A)
        x = Vt[-1]
        out.append(x if x[0] >= 0 else -x)
    return np.array(out)


def aggregation_constant(
    nu_list: list[DiscreteMeasure],
    r: float = 0.05,
    c_target: float = 0.5,
    sample_count: int = 10_000,
    seed: int = 0,
) -> AggregationReport:
    """Empirical constant C in F(x) >= C rho(x, xbar) over the cap D(e_0, r).

    e_i is the i-th coordinate vector; ``nu_list[i-1]`` must live in D(e_i, r).
    xbar is taken as the minimizer of F over the cap.
    """
    if not nu_list:
        raise ValueError("need at least one measure")
    d = nu_list[0].dim
    if len(nu_list) != d:
        raise ValueError(f"need exactly d={d} measures, got {len(nu_list)}")
    if not (0 < c_target < 2 / math.pi):
        raise ValueError("c_target must lie in (0, 2/pi)")
    eye = np.eye(d + 1)
    for i, nu in enumerate(nu_list, start=1):
        if nu.dim != d or np.any(pairwise_sphere_distance(nu.points, eye[i]) >= r):
            raise ValueError(f"measure {i} is not supported in the cap D(e_{i}, r)")

    e0 = eye[0]

    def in_cap(X):
        return pairwise_sphere_distance(X, e0)[:, 0] < r

    def objective(v):
        x = _cap_exp(d, v[None, :])
        if np.linalg.norm(v) >= r:
            return 10.0 + np.linalg.norm(v)
        return float(recentered_deficit(nu_list, x)[0])

    starts = [e0[None, :]]
    verts = _vertex_candidates(nu_list, d)
    if verts.size:
        starts.append(verts[in_cap(verts)])
    rng = np.random.default_rng(seed)
    starts.append(_cap_exp(d, random_tangent(np.eye(d + 1)[:1].repeat(8, 0), rng)[:, 1:] * r * 0.5))
    cand = np.vstack(starts)
    vals = recentered_deficit(nu_list, cand)
    order = np.argsort(vals)[:4]
    best_x, best_f = cand[order[0]], float(vals[order[0]])
    for k in order:
        x = cand[k]
        rho = math.acos(min(1.0, x[0]))
        tangent = x[1:] / max(np.linalg.norm(x[1:]), 1e-300) * rho
        res = minimize(objective, tangent, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        if res.fun < best_f and np.linalg.norm(res.x) < r:
            best_x, best_f = _cap_exp(d, res.x[None, :])[0], float(res.fun)

    v = random_tangent(np.tile(e0, (sample_count, 1)), rng)[:, 1:]
    v *= (r * rng.random(sample_count) ** (1.0 / d))[:, None]
    X = _cap_exp(d, v)
    dist = pairwise_sphere_distance(X, best_x)[:, 0]
    keep = dist > 1e-8
    ratio = recentered_deficit(nu_list, X[keep]) / dist[keep]
    c_emp = float(ratio.min()) if ratio.size else math.inf
    return AggregationReport(SpherePoint(best_x), c_emp, float(r), int(sample_count), float(c_target))
