import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projenergy.geometry import (
    DimensionError,
    KernelSpec,
    SpherePoint,
    TangentVector,
    exp_map,
    geodesic_distance,
    grad_kernel,
    kernel_value,
    log_map,
    projective_kernel,
    projective_rho,
)

from conftest import finite_difference_directional, random_point, unit_tangent

E0, E1 = SpherePoint.basis(2, 0), SpherePoint.basis(2, 1)


def test_geodesic_distance_basic():
    assert geodesic_distance(E0, E0) == 0.0
    assert geodesic_distance(E0, -E0) == pytest.approx(math.pi, abs=1e-15)
    assert geodesic_distance(E0, E1) == pytest.approx(math.pi / 2, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        geodesic_distance(E0, SpherePoint.basis(3, 0))
    with pytest.raises(DimensionError):
        projective_kernel(E0, SpherePoint.basis(1, 0))


def test_construction_normalizes():
    p = SpherePoint([3.0, 4.0])
    assert np.linalg.norm(p.coords) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        SpherePoint([0.0, 0.0])
    with pytest.raises(ValueError):
        SpherePoint([1.0])


def test_projective_kernel_examples():
    assert projective_kernel(E0, E1) == 1.0
    assert projective_kernel(E0, -E0) == 0.0
    x = SpherePoint.from_angle(math.pi / 4)
    assert projective_kernel(SpherePoint.from_angle(0.0), x) == pytest.approx(0.5, abs=1e-15)


def test_kernel_value_examples():
    y = SpherePoint([0.5, math.sqrt(0.75), 0.0])
    assert kernel_value(KernelSpec.power(2), E0, E1) == 1.0
    assert kernel_value(KernelSpec.power(math.inf), E0, y) == 0.0
    assert kernel_value(KernelSpec.power(math.inf), E0, E1) == 1.0
    assert kernel_value(KernelSpec.quadratic(), E0, y) == pytest.approx(0.75, abs=1e-15)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec.power(0)
    with pytest.raises(ValueError):
        KernelSpec.power(1, orth_tol=0.1)


def test_symmetry_range_antipodal(rng):
    specs = [KernelSpec.power(a) for a in (0.5, 1, 2, 3.7)] + [KernelSpec.quadratic()]
    for _ in range(300):
        d = int(rng.integers(1, 5))
        x, y = random_point(rng, d), random_point(rng, d)
        for s in specs:
            assert kernel_value(s, x, y) == kernel_value(s, y, x)
        lam = projective_kernel(x, y)
        assert 0.0 <= lam <= 1.0
        assert projective_kernel(-x, y) == lam == projective_kernel(x, -y)


def test_lambda_one_iff_orthogonal(rng):
    for _ in range(100):
        x = random_point(rng, 3)
        y = SpherePoint(unit_tangent(rng, x.coords))
        assert abs(x.coords @ y.coords) <= 1e-9
        assert projective_kernel(x, y) == pytest.approx(1.0, abs=1e-9)
        z = random_point(rng, 3)
        if abs(x.coords @ z.coords) > 1e-6:
            assert projective_kernel(x, z) < 1.0


def test_projective_rho_consistency(rng):
    assert projective_rho(E0, -E0) == 0.0
    assert projective_rho(E0, E1) == pytest.approx(math.pi / 2, abs=1e-15)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        x, y = random_point(rng, d), random_point(rng, d)
        assert abs(math.pi / 2 * projective_kernel(x, y) - projective_rho(x, y)) <= 1e-12
        assert projective_rho(x, y) == pytest.approx(min(geodesic_distance(x, y), geodesic_distance(x, -y)), abs=1e-12)


def test_distance_matches_arccos(rng):
    for _ in range(100):
        x, y = random_point(rng, 2), random_point(rng, 2)
        assert geodesic_distance(x, y) == pytest.approx(math.acos(np.clip(x.coords @ y.coords, -1, 1)), abs=1e-12)


def test_exp_map_examples():
    assert exp_map(TangentVector.zero(E0)) == E0
    q = exp_map(TangentVector(E0, (math.pi / 2) * E1.coords))
    assert np.allclose(q.coords, E1.coords, atol=1e-15)
    with pytest.raises(ValueError):
        exp_map(TangentVector(E0, math.pi * E1.coords))


def test_tangent_vector_rejects_normal_component():
    with pytest.raises(ValueError):
        TangentVector(E0, E0.coords)


def test_log_map_examples():
    assert log_map(E0, E0).norm == 0.0
    v = log_map(E1, E0)
    assert np.allclose(v.vec, (math.pi / 2) * E1.coords, atol=1e-15)
    with pytest.raises(ValueError):
        log_map(-E0, E0)


def test_exp_log_round_trip(rng):
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 5))
        base = random_point(rng, d)
        theta = rng.uniform(0, 3)
        v = TangentVector(base, theta * unit_tangent(rng, base.coords))
        x = exp_map(v)
        assert abs(np.linalg.norm(x.coords) - 1) <= 1e-9
        back = log_map(x, base)
        worst = max(worst, np.max(np.abs(back.vec - v.vec)))
        assert back.norm == pytest.approx(geodesic_distance(x, base), abs=1e-12)
        worst = max(worst, np.max(np.abs(exp_map(back).coords - x.coords)))
    assert worst < 1e-8


def test_grad_kernel_policies():
    spec = KernelSpec.power(2)
    assert grad_kernel(spec, E0, E1).norm == 0.0  # kink at the maximum
    assert grad_kernel(spec, E0, E0).norm == 0.0
    g = grad_kernel(KernelSpec.power(0.2), E0, SpherePoint([1.0, 1e-12, 0.0]))
    assert g.capped and g.norm == pytest.approx(1e6 * 2 / math.pi)


def _lambda_pow(alpha, y):
    def f(x):
        t = abs(np.clip(x @ y, -1, 1)) / np.linalg.norm(x)
        return ((2 / math.pi) * math.acos(min(t, 1.0))) ** alpha

    return f


def test_grad_kernel_finite_difference_example():
    # d=1, alpha=2, x at angle pi/4 from y
    y = SpherePoint.from_angle(0.0)
    x = SpherePoint.from_angle(math.pi / 4)
    g = grad_kernel(KernelSpec.power(2), x, y)
    u = np.array([-math.sin(math.pi / 4), math.cos(math.pi / 4)])
    fd = finite_difference_directional(_lambda_pow(2, y.coords), x.coords, u)
    assert g.vec @ u == pytest.approx(fd, rel=1e-6)


def _excluded(rho):
    return abs(rho - math.pi / 2) <= 0.01 or rho <= 0.01 or rho >= math.pi - 0.01


def test_grad_kernel_random_finite_differences(rng):
    checked = 0
    while checked < 1000:
        d = int(rng.integers(1, 5))
        x, y = random_point(rng, d), random_point(rng, d)
        if _excluded(geodesic_distance(x, y)):
            continue
        alpha = rng.uniform(1.1, 5)
        g = grad_kernel(KernelSpec.power(alpha), x, y)
        assert abs(g.vec @ x.coords) <= 1e-9
        f = _lambda_pow(alpha, y.coords)
        for _ in range(2):
            u = unit_tangent(rng, x.coords)
            fd = finite_difference_directional(f, x.coords, u)
            an = g.vec @ u
            assert abs(an - fd) <= 1e-5 * max(abs(fd), 1e-3)
        checked += 1


def test_grad_quadratic_finite_difference(rng):
    for _ in range(50):
        x, y = random_point(rng, 2), random_point(rng, 2)
        g = grad_kernel(KernelSpec.quadratic(), x, y)
        u = unit_tangent(rng, x.coords)
        fd = finite_difference_directional(lambda z: 1 - (z @ y.coords) ** 2, x.coords, u)
        assert g.vec @ u == pytest.approx(fd, rel=1e-6, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(0.0, 2 * math.pi))
def test_circle_kernel_closed_form(a, b):
    # on S^1 Lambda is the angular gap folded into [0, pi/2], rescaled
    gap = abs(a - b) % math.pi
    expected = (2 / math.pi) * min(gap, math.pi - gap)
    got = projective_kernel(SpherePoint.from_angle(a), SpherePoint.from_angle(b))
    assert got == pytest.approx(expected, abs=1e-9)
