"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed in the
pytest terminal summary, or directly when this file is run as a script.
"""

import math
import time

import numpy as np

from projenergy.energy import energy_gradient, energy_value
from projenergy.equivalence import essentially_equivalent
from projenergy.geometry import KernelSpec, SpherePoint, TangentVector, exp_map, grad_kernel
from projenergy.measures import DiscreteMeasure, equidistributed_basis, fejes_toth_config, random_configuration
from projenergy.optimize import AscentOptions, maximize_particles, stability_experiment
from projenergy.transport import assignment_bruteforce, dinf_distance, dp_distance
from projenergy.verify import chain_check, frame_bound_check, majorization_check, moment_matrix

from conftest import finite_difference_directional, random_orthogonal, unit_tangent

RESULTS: list[str] = []


def record(number, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


def test_c1_basis_optimal_for_d_plus_one_particles():
    worst_gap, worst_time = 0.0, 0.0
    for d in (1, 2, 3):
        t0 = time.perf_counter()
        res = maximize_particles(d, d + 1, 2.5, AscentOptions(restarts=16))
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_gap = max(worst_gap, abs(res.best_energy - d / (2 * d + 2)))
    record(1, worst_gap <= 1e-6 and worst_time < 10,
           f"N=d+1, alpha=2.5: max |E - d/(2d+2)| = {worst_gap:.2e} (tol 1e-6), slowest run {worst_time:.2f}s (< 10s)")


def test_c2_six_particles_on_s2():
    t0 = time.perf_counter()
    res = maximize_particles(2, 6, 2.0, AscentOptions(restarts=32))
    gap = abs(res.best_energy - 1 / 3)
    equiv = essentially_equivalent(res.best, fejes_toth_config(2, 6)).equivalent
    elapsed = time.perf_counter() - t0
    record(2, gap <= 1e-6 and equiv and elapsed < 60,
           f"d=2, N=6, alpha=2: |E - 1/3| = {gap:.2e}, equivalent to basis: {equiv}, {elapsed:.2f}s (< 60s)")


def test_c3_majorization_threshold():
    t0 = time.perf_counter()
    passing = [majorization_check(a).passed for a in np.arange(2.0, 6.0 + 1e-9, 0.25)]
    failing = [majorization_check(a) for a in (1.0, 1.5, 1.9)]
    near_one = all(r.violation_range is not None and 1 - r.violation_range[1] <= 0.05 for r in failing)
    elapsed = time.perf_counter() - t0
    ok = all(passing) and not any(r.passed for r in failing) and near_one and elapsed < 5
    record(3, ok, f"passes on 2..6 step 0.25: {all(passing)}; fails at 1, 1.5, 1.9: "
                  f"{not any(r.passed for r in failing)}; violations reach |t|=1: {near_one}; {elapsed:.2f}s (< 5s)")


def test_c4_chain():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    ok_chain = True
    for d in (1, 2, 3):
        for k in range(100):
            mu = random_configuration(d, int(rng.integers(1, 10)), seed=1000 * d + k, weighted=bool(k % 2))
            ok_chain &= all(chain_check(mu, a).passed for a in (2.0, 4.0))
    ok_equal = True
    for d in (1, 2, 3):
        for k in range(10):
            mu = equidistributed_basis(d).transformed(random_orthogonal(d, k))
            mu = mu.with_signs(rng.choice([-1.0, 1.0], size=d + 1))
            ok_equal &= all(chain_check(mu, a).all_equal for a in (2.0, 4.0))
    not_equal_off = not chain_check(random_configuration(2, 5, seed=0), 2.0).all_equal
    elapsed = time.perf_counter() - t0
    record(4, ok_chain and ok_equal and not_equal_off and elapsed < 30,
           f"300 random measures pass: {ok_chain}; equality within 1e-9 on rotated equidistributed bases: {ok_equal}; "
           f"strict off that class: {not_equal_off}; {elapsed:.2f}s (< 30s)")


def _same_value(a, b):
    # distinct optimal permutations can tie exactly in real arithmetic but
    # round differently; allow that last-bit slack and nothing more
    return abs(a - b) <= 2 * np.spacing(max(a, b))


def test_c5_transport_sandwich():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    sandwich, exact, compared, bitwise = True, True, 0, 0
    for _ in range(100):
        d, N = int(rng.integers(1, 3)), int(rng.integers(2, 11))
        mu = random_configuration(d, N, seed=int(rng.integers(1 << 30)))
        nu = random_configuration(d, N, seed=int(rng.integers(1 << 30)))
        dinf = dinf_distance(mu, nu)[0]
        values = {math.inf: dinf}
        for p in (1, 2):
            values[p] = dp_distance(mu, nu, p)[0]
            sandwich &= N ** (-1 / p) * dinf <= values[p] <= dinf + 1e-10
        if N <= 7:
            for p, v in values.items():
                oracle = assignment_bruteforce(mu, nu, p)
                exact &= _same_value(v, oracle)
                bitwise += v == oracle
                compared += 1
    elapsed = time.perf_counter() - t0
    record(5, sandwich and exact and elapsed < 60,
           f"sandwich on 100 pairs: {sandwich}; solver == brute force for N <= 7: {exact} "
           f"({bitwise}/{compared} bit-identical, rest tied optima within 2 ulp); {elapsed:.2f}s (< 60s)")


def test_c6_local_stability():
    t0 = time.perf_counter()
    violations, cases = 0, 0
    for d in (1, 2, 3):
        for alpha in (1.5, 2.0, 3.0):
            for w in (np.full(d + 1, 1 / (d + 1)), np.concatenate([[0.6], np.full(d, 0.4 / d)])):
                xi = DiscreteMeasure(np.eye(d + 1), w)
                violations += stability_experiment(xi, alpha, 0.05, k_split=5, trials=1000, seed=cases).violations
                cases += 1
    elapsed = time.perf_counter() - t0
    record(6, violations == 0 and elapsed < 120,
           f"{violations} violations over {cases} settings x 1000 trials (r=0.05, k_split=5); {elapsed:.2f}s (< 120s)")


def test_c7_circle_alpha_one():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    worst = 0.0
    for k in range(100):
        mu = random_configuration(1, int(rng.integers(1, 12)), seed=k, weighted=True)
        sym = DiscreteMeasure(np.vstack([mu.points, mu.points @ rot.T]), np.concatenate([mu.weights, mu.weights]))
        worst = max(worst, abs(energy_value(KernelSpec.power(1), sym) - 0.25))
    elapsed = time.perf_counter() - t0
    record(7, worst <= 1e-9 and elapsed < 5,
           f"100 quarter-turn symmetrized measures: max |E_1 - 1/4| = {worst:.2e} (tol 1e-9); {elapsed:.2f}s (< 5s)")


def test_c8_frame_potential():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    X = rng.standard_normal((100_000, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    tr = moment_matrix(DiscreteMeasure.from_points(X)).entries
    tr_i2 = float(np.sum(tr * tr))

    def boot():
        S = X[rng.integers(0, X.shape[0], X.shape[0])]
        I = S.T @ S / S.shape[0]
        return float(np.sum(I * I))

    se = float(np.std([boot() for _ in range(200)]))
    mc_ok = abs(tr_i2 - 1 / 3) <= 3 * se
    worst = max(frame_bound_check(random_configuration(1 + k % 3, 1 + k % 12, seed=k, weighted=True)).identity_error
                for k in range(100))
    elapsed = time.perf_counter() - t0
    record(8, mc_ok and worst <= 1e-12 and elapsed < 10,
           f"Tr(I^2) = {tr_i2:.8f}, |. - 1/3| = {abs(tr_i2 - 1 / 3):.2e} vs 3 SE = {3 * se:.2e}; "
           f"max |E_g - (1 - Tr I^2)| = {worst:.1e} (tol 1e-12); {elapsed:.2f}s (< 10s)")


def _lambda_pow(alpha, y):
    def f(x):
        t = abs(float(np.clip(x @ y, -1, 1))) / float(np.linalg.norm(x))
        return ((2 / math.pi) * math.acos(min(t, 1.0))) ** alpha

    return f


def _safe(rho):
    return 0.01 < rho < math.pi - 0.01 and abs(rho - math.pi / 2) > 0.01


def test_c9_gradient_finite_differences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst, kernel_checks, energy_checks = 0.0, 0, 0
    while kernel_checks < 1000:
        d = int(rng.integers(1, 4))
        x, y = SpherePoint(rng.standard_normal(d + 1)), SpherePoint(rng.standard_normal(d + 1))
        if not _safe(math.acos(float(np.clip(x.coords @ y.coords, -1, 1)))):
            continue
        alpha = float(rng.uniform(1.1, 6))
        u = unit_tangent(rng, x.coords)
        fd = finite_difference_directional(_lambda_pow(alpha, y.coords), x.coords, u)
        an = grad_kernel(KernelSpec.power(alpha), x, y).vec @ u
        worst = max(worst, abs(an - fd) / max(abs(fd), 1e-3))
        kernel_checks += 1
    while energy_checks < 1000:
        d, N = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        mu = random_configuration(d, N, seed=int(rng.integers(1 << 30)), weighted=True)
        rho = np.arccos(np.clip(np.abs(mu.points @ mu.points.T), 0, 1))
        off = ~np.eye(N, dtype=bool)
        if np.any(np.abs(rho[off] - math.pi / 2) <= 0.01) or np.any(rho[off] <= 0.01):
            continue
        spec = KernelSpec.power(float(rng.uniform(1.1, 6)))
        i = int(rng.integers(N))
        u = unit_tangent(rng, mu.points[i])
        h = 1e-5

        def moved(s):
            P = mu.points.copy()
            P[i] = exp_map(TangentVector(SpherePoint(P[i]), s * u)).coords
            return energy_value(spec, DiscreteMeasure(P, mu.weights))

        fd = (moved(h) - moved(-h)) / (2 * h)
        an = energy_gradient(spec, mu)[i].vec @ u
        worst = max(worst, abs(an - fd) / max(abs(fd), 1e-3))
        energy_checks += 1
    elapsed = time.perf_counter() - t0
    record(9, worst < 1e-5 and elapsed < 10,
           f"1000 kernel + 1000 energy gradient checks: max relative error {worst:.2e} (< 1e-5); {elapsed:.2f}s (< 10s)")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(RESULTS))
