import math

import numpy as np
import pytest

from granup import tensor
from granup.checks import central_gradient, random_admissible_states, stress_from_invariants
from granup.errors import GradientSingularError, InvalidStateError
from granup.params import MaterialParams, YieldShape
from granup.yield_surface import (
    OUTSIDE,
    SurfaceState,
    consistency_kernel,
    critical_state_phi,
    critical_state_point,
    critical_state_residual,
    csl_slope,
    hardening_derivatives,
    lode_g,
    meridian_f,
    sample_sections,
    yield_gradient,
    yield_value,
)

SHAPE = YieldShape()


def g_oracle(theta, beta=0.19, gamma=0.9):
    return 1.0 / math.cos(beta * math.pi / 6.0 - math.acos(gamma * math.cos(3.0 * theta)) / 3.0)


def fhat_of(sig, p_c, c, shape=SHAPE):
    return consistency_kernel(np.asarray(sig, float), p_c, c, shape.M, shape.m, shape.alpha, shape.beta, shape.gamma)


def test_surface_state_validation():
    with pytest.raises(InvalidStateError):
        SurfaceState(0.0)
    with pytest.raises(InvalidStateError):
        SurfaceState(1.0, -0.1)


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 6, 1.0, math.pi / 3])
def test_lode_function_matches_closed_form(theta):
    assert lode_g(theta, SHAPE) == pytest.approx(g_oracle(theta), rel=1e-14)


def test_lode_function_values():
    assert lode_g(0.0, SHAPE) == pytest.approx(1.0012947, abs=1e-7)
    assert lode_g(math.pi / 3, SHAPE) == pytest.approx(1.4314551, abs=1e-7)


def test_symmetric_section_has_constant_g():
    shape = YieldShape(beta=1.0, gamma=0.0)
    assert lode_g(0.0, shape) == pytest.approx(lode_g(math.pi / 3, shape), rel=1e-14)


def test_meridian_vanishes_at_both_apexes():
    s = SurfaceState(10.0, 2.0)
    assert meridian_f(-2.0, s, SHAPE) == 0.0
    assert meridian_f(10.0, s, SHAPE) == 0.0
    assert meridian_f(4.0, s, SHAPE) < 0.0


def test_outside_sentinel_and_gradient_domain():
    s = SurfaceState(10.0, 0.0)
    beyond_cap = -12.0 * tensor.IDENTITY
    tensile = 1.0 * tensor.IDENTITY
    assert yield_value(beyond_cap, s, SHAPE) is OUTSIDE
    assert yield_value(tensile, s, SHAPE) is OUTSIDE
    with pytest.raises(GradientSingularError):
        yield_gradient(beyond_cap, s, SHAPE)
    # rounding slack just beyond the apex is accepted
    assert yield_value(-10.0 * (1 + 1e-13) * tensor.IDENTITY, s, SHAPE) == pytest.approx(0.0, abs=1e-5)


def test_sampled_meridian_lies_on_the_surface():
    for p_c, c in ((1.0, 0.0), (100.0, 2.11)):
        s = SurfaceState(p_c, c)
        mer, _ = sample_sections(s, SHAPE, 41)
        for p, q in mer:
            sig = stress_from_invariants(p, q, math.pi / 3)
            assert yield_value(sig, s, SHAPE) == pytest.approx(0.0, abs=1e-9 * p_c)


def test_sections_through_origin_without_cohesion():
    mer, _ = sample_sections(SurfaceState(2.0, 0.0), SHAPE, 16)
    assert tuple(mer[0]) == (0.0, 0.0)
    mer, _ = sample_sections(SurfaceState(100.0, 2.1143498), SHAPE, 16)
    assert mer[0, 0] == pytest.approx(-2.1143498)


def test_sample_sections_requires_eight_points():
    with pytest.raises(ValueError):
        sample_sections(SurfaceState(1.0), SHAPE, 7)


def test_deviatoric_section_radius_matches_surface():
    s = SurfaceState(10.0, 0.0)
    _, dev = sample_sections(s, SHAPE, 24)
    p_star, _ = critical_state_point(s, SHAPE, 0.0)
    for omega, radius in dev:
        theta = math.acos(math.cos(3.0 * omega)) / 3.0
        q = math.sqrt(1.5) * radius
        assert yield_value(stress_from_invariants(p_star, q, theta), s, SHAPE) == pytest.approx(0.0, abs=1e-10)


def test_critical_state_root_general_m():
    for m, alpha in ((1.5, 0.0), (2.0, 0.1), (3.0, 0.5), (2.5, 1.5)):
        ph = critical_state_phi(m, alpha)
        assert 0 < ph < 1
        assert abs(critical_state_residual(ph, m, alpha)) < 1e-12


def test_zero_volumetric_gradient_at_critical_state():
    s = SurfaceState(50.0, 1.5)
    for theta in (0.0, 0.5, math.pi / 3):
        p, q = critical_state_point(s, SHAPE, theta)
        Q = yield_gradient(stress_from_invariants(p, q, theta), s, SHAPE)
        assert abs(tensor.trace(Q)) < 1e-10 * np.linalg.norm(Q)


def test_csl_slope_in_compression_near_friction_line():
    target = 6 * math.sin(math.radians(32)) / (3 - math.sin(math.radians(32)))
    assert csl_slope(SHAPE, math.pi / 3) == pytest.approx(target, abs=5e-3)


def test_hardening_derivatives_finite_differences(rng):
    params = MaterialParams()
    for sig, s in random_admissible_states(params, 100, rng):
        a = np.array(hardening_derivatives(sig, s, SHAPE))
        n = central_gradient(lambda v: yield_value(sig, SurfaceState(v[0], v[1]), SHAPE), [s.p_c, s.c], nonneg=True)
        np.testing.assert_allclose(a, n, rtol=1e-6, atol=1e-9 * abs(a).max())


def test_regularized_residual_has_the_sign_of_F(rng):
    params = MaterialParams()
    for sig, s in random_admissible_states(params, 200, rng):
        f_in = yield_value(sig, s, SHAPE)
        inv = tensor.invariants(sig)
        # push the same state outward along q
        out = stress_from_invariants(inv.p, inv.q * 3.0 + 1.0, inv.theta if not inv.degenerate else 0.0)
        for state in (sig, out):
            f = yield_value(state, s, SHAPE)
            fh = fhat_of(state, s.p_c, s.c)[0]
            assert np.sign(f) == np.sign(fh)
        assert f_in < 0


def test_regularized_gradient_and_hardening_derivatives(rng):
    params = MaterialParams()
    for sig, s in random_admissible_states(params, 100, rng):
        fh, qh, d_pc, d_c, _, _ = fhat_of(sig, s.p_c, s.c)
        n_sig = central_gradient(lambda x: fhat_of(x, s.p_c, s.c)[0], sig)
        np.testing.assert_allclose(qh, n_sig, rtol=1e-6, atol=1e-8 * np.abs(qh).max())
        n_h = central_gradient(lambda v: fhat_of(sig, v[0], v[1])[0], [s.p_c, s.c], nonneg=True)
        np.testing.assert_allclose([d_pc, d_c], n_h, rtol=1e-6, atol=1e-8 * max(abs(d_pc), abs(d_c)))


def test_regularized_gradient_is_scaled_Q_on_the_surface():
    s = SurfaceState(20.0, 0.5)
    for ph in (0.2, 0.66, 0.95):
        p = ph * (s.p_c + s.c) - s.c
        base = yield_value(stress_from_invariants(p, 0.0, 0.0), s, SHAPE)
        unit = yield_value(stress_from_invariants(p, 1.0, 0.4), s, SHAPE) - base
        sig = stress_from_invariants(p, -base / unit, 0.4)
        fh, qh, *_ = fhat_of(sig, s.p_c, s.c)
        Q = yield_gradient(sig, s, SHAPE)
        root = -meridian_f(p, s, SHAPE) / (SHAPE.M * s.p_c)
        assert abs(fh) < 1e-9
        np.testing.assert_allclose(qh, 2.0 * root * Q, rtol=1e-8, atol=1e-10)


def test_regularized_residual_is_smooth_through_the_apex():
    s = SurfaceState(5.0, 0.0)
    values = [fhat_of(-p * tensor.IDENTITY, s.p_c, s.c) for p in (4.999, 5.0, 5.001)]
    slopes = [v[1][0] for v in values]
    assert all(np.isfinite(slopes))
    assert values[0][0] < 0 < values[2][0]
    # no kink: the slope at the apex is the mean of its neighbours
    assert slopes[1] == pytest.approx(0.5 * (slopes[0] + slopes[2]), rel=1e-5)
