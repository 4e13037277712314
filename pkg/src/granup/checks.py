"""Self-check suite run by ``granup check`` on a configured material."""
import math
from typing import NamedTuple

import numpy as np

from granup import tensor
from granup.elasticity import CouplingState, coupling_G, elastic_strain_from_stress, stress_from_strain
from granup.hardening import cohesion, invert_cooper_eaton, plastic_volstrain, xi_coefficients
from granup.integrator import (
    LoadProgram,
    LoadStep,
    StepControls,
    elastoplastic_tangent,
    initial_state,
    run_path,
)
from granup.params import MaterialParams
from granup.yield_surface import (
    SurfaceState,
    critical_state_phi,
    hardening_derivatives,
    sample_sections,
    yield_gradient,
    yield_value,
)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def stress_from_invariants(p, q, theta):
    """Principal stress state (tension positive) with given p, q and Lode angle."""
    k = np.arange(3)
    s = -p + 2.0 / 3.0 * q * np.cos(theta + 2.0 * np.pi * k / 3.0)
    return tensor.from_principal(*s)


def random_admissible_states(params: MaterialParams, n, rng):
    """Stress states inside the closed elastic domain, away from the apexes.

    Yields (sigma, SurfaceState). Phi, Lode angle and the fraction of the
    limiting q are drawn uniformly, p_c log-uniformly over [0.1, 200] MPa.
    """
    shape, hp = params.shape, params.hardening
    out = []
    for _ in range(n):
        p_c = math.exp(rng.uniform(math.log(0.1), math.log(200.0)))
        s = SurfaceState(p_c, cohesion(p_c, hp))
        ph = rng.uniform(0.02, 0.98)
        theta = rng.uniform(0.02, math.pi / 3 - 0.02)
        p = ph * (s.p_c + s.c) - s.c
        q = rng.uniform(0.1, 1.0) * _q_limit(p, theta, s, shape)
        out.append((stress_from_invariants(p, q, theta), s))
    return out


def _q_limit(p, theta, s, shape):
    # F is affine in q at fixed p and theta
    base = yield_value(stress_from_invariants(p, 0.0, 0.0), s, shape)
    unit = yield_value(stress_from_invariants(p, 1.0, theta), s, shape) - base
    return -base / unit


def central_gradient(f, x, rel=1e-6, nonneg=False):
    """Second-order differences; one-sided where a step would cross zero and ``nonneg``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel * max(1.0, abs(x[i]))
        step = np.zeros_like(x)
        step[i] = h
        if nonneg and x[i] - h < 0:
            g[i] = (-3.0 * f(x) + 4.0 * f(x + step) - f(x + 2 * step)) / (2.0 * h)
        else:
            g[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return g


def gradient_error(params, n=200, seed=0):
    """Largest relative difference between analytic and differenced yield gradients."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for sig, s in random_admissible_states(params, n, rng):
        q_a = yield_gradient(sig, s, params.shape)
        q_n = central_gradient(lambda x: yield_value(x, s, params.shape), sig)
        worst = max(worst, float(np.linalg.norm(q_a - q_n) / np.linalg.norm(q_a)))
    return worst


def _check_gradient(params):
    err = gradient_error(params)
    return CheckResult("yield gradient vs central differences", err < 1e-6, f"max rel err {err:.2e}")


def _check_hardening_derivatives(params):
    rng = np.random.default_rng(1)
    worst = 0.0
    for sig, s in random_admissible_states(params, 50, rng):
        a = np.array(hardening_derivatives(sig, s, params.shape))
        n = central_gradient(
            lambda v: yield_value(sig, SurfaceState(v[0], v[1]), params.shape), [s.p_c, s.c], nonneg=True
        )
        worst = max(worst, float(np.linalg.norm(a - n) / np.linalg.norm(a)))
    return CheckResult("dF/dp_c, dF/dc vs central differences", worst < 1e-6, f"max rel err {worst:.2e}")


def _check_convexity(params):
    shape = params.shape
    bad = []
    for p_c in (1.0, 10.0, 100.0):
        s = SurfaceState(p_c, cohesion(p_c, params.hardening))
        mer, dev = sample_sections(s, shape, 181)
        # meridian q(p) concave: non-positive second differences on the uniform-in-angle samples
        p, q = mer[:, 0], mer[:, 1]
        slopes = np.diff(q) / np.diff(p)
        if np.any(np.diff(slopes) > 1e-9 * np.abs(slopes[:-1]).max()):
            bad.append(f"meridian p_c={p_c}")
        x = dev[:, 1] * np.cos(dev[:, 0])
        y = dev[:, 1] * np.sin(dev[:, 0])
        ex, ey = np.roll(x, -1) - x, np.roll(y, -1) - y
        cross = ex * np.roll(ey, -1) - ey * np.roll(ex, -1)
        if np.any(cross <= 0):
            bad.append(f"deviatoric p_c={p_c}")
    return CheckResult("convexity of sampled sections", not bad, ", ".join(bad) or "meridian and deviatoric convex")


def _check_inverses(params):
    hp, ep = params.hardening, params.elastic
    worst_ce = 0.0
    for p_c in np.geomspace(hp.pc0, 1000.0, 60):
        back = invert_cooper_eaton(plastic_volstrain(p_c, hp), hp)
        worst_ce = max(worst_ce, abs(back - p_c) / p_c)
    rng = np.random.default_rng(2)
    worst_el = 0.0
    for p_c in (0.063, 2.0, 20.0, 120.0):
        c = cohesion(p_c, hp)
        cs = CouplingState.make(c, 1.0 + ep.B * max(p_c - hp.pcb, 0.0), ep)
        for _ in range(10):
            e = rng.normal(scale=1e-3, size=6)
            back = elastic_strain_from_stress(stress_from_strain(e, cs, ep), cs, ep)
            worst_el = max(worst_el, float(np.max(np.abs(back - e))))
    ok = worst_ce < 1e-10 and worst_el < 1e-10
    return CheckResult("inverse pairs", ok, f"densification {worst_ce:.1e}, elasticity {worst_el:.1e}")


def _check_coupling(params):
    worst = 0.0
    rng = np.random.default_rng(3)
    for p_c in (1.0, 10.0, 60.0, 120.0):
        xi = xi_coefficients(p_c, params)
        c = cohesion(p_c, params.hardening)
        cs = CouplingState.make(c, 1.0 + params.B * max(p_c - params.pcb, 0.0), params.elastic)
        eps_e = rng.normal(scale=1e-3, size=6) - 0.05 * tensor.IDENTITY
        G, Ginv = coupling_G(eps_e, cs, params.elastic, xi)
        worst = max(worst, float(np.max(np.abs(G @ Ginv - np.eye(6)))))
    return CheckResult("coupling operator inverse", worst < 1e-12, f"max |G G^-1 - I| {worst:.1e}")


def _oedometric_states(params, controls, target=-20.0, increments=40):
    prog = LoadProgram((LoadStep(("stress", "strain", "strain"), (target, 0.0, 0.0), increments),))
    return [r.state for r in run_path(initial_state(params), prog, params, controls)[1:]]


def _check_consistency(params, controls):
    states = _oedometric_states(params, controls)
    worst = 0.0
    for st in states:
        if st.plastic:
            worst = max(worst, abs(st.F) / controls.tolerance(params.M, st.p_c))
    return CheckResult("yield consistency on a compaction path", worst <= 1.0, f"max |F|/tol_F {worst:.2f}")


def _check_tangent_symmetry(params, controls):
    st = _oedometric_states(params.replace(eps_flow=0.0), controls)[-1]
    C = elastoplastic_tangent(st, params.replace(eps_flow=0.0), controls)
    asym = float(np.max(np.abs(C - C.T)) / np.max(np.abs(C)))
    return CheckResult("associative tangent symmetry", asym < 1e-10, f"relative asymmetry {asym:.1e}")


def _check_critical_state(params):
    ph = critical_state_phi(params.m, params.alpha)
    s = SurfaceState(10.0, 0.0)
    p = ph * s.p_c
    q = _q_limit(p, math.pi / 3, s, params.shape)
    Q = yield_gradient(stress_from_invariants(p, q, math.pi / 3), s, params.shape)
    tr = abs(tensor.trace(Q)) / np.linalg.norm(Q)
    return CheckResult("zero volumetric flow at critical state", bool(tr < 1e-9), f"|tr Q|/|Q| {tr:.1e}")


def run_checks(params: MaterialParams, controls=None):
    controls = controls or StepControls()
    return [
        _check_gradient(params),
        _check_hardening_derivatives(params),
        _check_convexity(params),
        _check_inverses(params),
        _check_coupling(params),
        _check_critical_state(params),
        _check_consistency(params, controls),
        _check_tangent_symmetry(params, controls),
    ]
