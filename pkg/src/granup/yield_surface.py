"""Deformable cap yield function, its gradient and critical-state geometry.

    F(sigma, p_c, c) = f(p, p_c, c) + q / g(theta)

with the meridian function ``f`` defined on Phi = (p + c)/(p_c + c) in [0, 1]
and the Lode-angle function ``g``. Outside [0, 1] the yield function is
infinite; the public functions return the :data:`OUTSIDE` sentinel there.

The integrator does not use ``F`` directly near the cap apexes, where it has
a square-root singularity. It works with the equivalent residual

    Fhat = ((q/g)^2 - M^2 p_c^2 S(Phi)) / (M p_c),   S = (Phi - Phi^m)[2(1-alpha)Phi + alpha]

which has the same zero set and sign as ``F`` on the closed domain, is smooth
through Phi = 0 and Phi = 1, and extends continuously outside it.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from granup import tensor
from granup._jit import jit
from granup.errors import CalibrationError, GradientSingularError, InvalidStateError
from granup.params import YieldShape

log = logging.getLogger(__name__)

EPS_PHI = 1e-8
# rounding slack on the meridian domain [0, 1]
PHI_SLACK = 1e-12
SQRT3_2 = math.sqrt(1.5)
SQRT6 = math.sqrt(6.0)


class _Outside:
    """Marker for stress states outside the meridian domain (F = +inf)."""

    __slots__ = ()

    def __repr__(self):
        return "OUTSIDE"

    def __reduce__(self):
        return "OUTSIDE"


OUTSIDE = _Outside()


@dataclass(frozen=True)
class SurfaceState:
    p_c: float
    c: float = 0.0

    def __post_init__(self):
        if not self.p_c > 0:
            raise InvalidStateError(f"forming pressure must be positive, got {self.p_c}")
        if not self.c >= 0:
            raise InvalidStateError(f"cohesion must be non-negative, got {self.c}")


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@jit
def meridian_S(phi, m, alpha):
    if phi < 0.0:
        # linear continuation with the slope S'(0) = alpha
        return alpha * phi
    return (phi - phi**m) * (2.0 * (1.0 - alpha) * phi + alpha)


@jit
def meridian_dS(phi, m, alpha):
    if phi < 0.0:
        return alpha
    return (1.0 - m * phi ** (m - 1.0)) * (2.0 * (1.0 - alpha) * phi + alpha) + 2.0 * (1.0 - alpha) * (
        phi - phi**m
    )


@jit
def lode_angle_arg(cos3t, beta, gamma):
    """The cosine argument beta pi/6 - arccos(gamma cos 3theta)/3."""
    return beta * np.pi / 6.0 - np.arccos(gamma * cos3t) / 3.0


@jit
def lode_g_kernel(cos3t, beta, gamma):
    return 1.0 / np.cos(lode_angle_arg(cos3t, beta, gamma))


@jit
def deviatoric_gradient(sig, q, cos3t, degenerate, beta, gamma):
    """Gradient of q/g(theta): b(theta) S~ + c(theta) S~perp.

    The 1/sin 3theta in S~perp is cancelled against the sin 3theta factor of
    c(theta), so both Lode-angle extremes are regular points.
    """
    out = np.zeros(6)
    if degenerate:
        return out
    s_t = SQRT3_2 * tensor.deviator(sig) / q
    arg = lode_angle_arg(cos3t, beta, gamma)
    b = SQRT3_2 * np.cos(arg)
    root = np.sqrt(1.0 - gamma * gamma * cos3t * cos3t)
    c_red = -np.sqrt(3.0) * gamma * np.sin(arg) / (np.sqrt(2.0) * root)
    s2 = tensor.square(s_t)
    for i in range(6):
        bracket = SQRT6 * s2[i] - cos3t * s_t[i]
        if i < 3:
            bracket -= SQRT6 / 3.0
        out[i] = b * s_t[i] + c_red * bracket
    return out


@jit
def phi_kernel(p, p_c, c):
    return (p + c) / (p_c + c)


@jit
def yield_value_kernel(sig, p_c, c, M, m, alpha, beta, gamma):
    """F with +inf outside the meridian domain (rounding slack clamped)."""
    p, q, cos3t, degenerate = tensor.invariant_kernel(sig)
    phi = phi_kernel(p, p_c, c)
    if phi < -PHI_SLACK or phi > 1.0 + PHI_SLACK:
        return np.inf
    phi = min(max(phi, 0.0), 1.0)
    f = -M * p_c * np.sqrt(max(meridian_S(phi, m, alpha), 0.0))
    return f + q / lode_g_kernel(cos3t, beta, gamma)


@jit
def pressure_coefficient(phi, p_c, c, M, m, alpha):
    """a(p) = -(1/3) df/dp."""
    s = meridian_S(phi, m, alpha)
    return M * p_c * meridian_dS(phi, m, alpha) / (6.0 * (p_c + c) * np.sqrt(s))


@jit
def yield_gradient_kernel(sig, p_c, c, M, m, alpha, beta, gamma, eps_phi):
    """Q = dF/dsigma with Phi clamped to [eps_phi, 1 - eps_phi]; returns (Q, phi)."""
    p, q, cos3t, degenerate = tensor.invariant_kernel(sig)
    phi = phi_kernel(p, p_c, c)
    phi_c = min(max(phi, eps_phi), 1.0 - eps_phi)
    a = pressure_coefficient(phi_c, p_c, c, M, m, alpha)
    grad = deviatoric_gradient(sig, q, cos3t, degenerate, beta, gamma)
    for i in range(3):
        grad[i] += a
    return grad, phi


@jit
def hardening_derivatives_kernel(p, p_c, c, M, m, alpha, eps_phi):
    """(dF/dp_c, dF/dc) of the original yield function."""
    phi = min(max(phi_kernel(p, p_c, c), eps_phi), 1.0 - eps_phi)
    s = meridian_S(phi, m, alpha)
    root = np.sqrt(s)
    ratio = meridian_dS(phi, m, alpha) / (2.0 * root)
    denom = (p_c + c) ** 2
    dfdpc = -M * root + M * p_c * (p + c) / denom * ratio
    dfdc = -M * p_c * (p_c - p) / denom * ratio
    return dfdpc, dfdc


@jit
def consistency_kernel(sig, p_c, c, M, m, alpha, beta, gamma):
    """Regularized residual used by the return mapping.

    Returns (Fhat, Qhat, dFhat/dp_c, dFhat/dc, Phi, q).
    """
    p, q, cos3t, degenerate = tensor.invariant_kernel(sig)
    phi = phi_kernel(p, p_c, c)
    g = lode_g_kernel(cos3t, beta, gamma)
    qg = q / g
    s = meridian_S(phi, m, alpha)
    ds = meridian_dS(phi, m, alpha)
    scale = M * p_c
    fhat = (qg * qg - scale * scale * s) / scale
    qhat = deviatoric_gradient(sig, q, cos3t, degenerate, beta, gamma) * (2.0 * qg / scale)
    vol = scale * ds / (3.0 * (p_c + c))
    for i in range(3):
        qhat[i] += vol
    dphi_dpc = -phi / (p_c + c)
    dphi_dc = (1.0 - phi) / (p_c + c)
    d_pc = -qg * qg / (M * p_c * p_c) - M * s - scale * ds * dphi_dpc
    d_c = -scale * ds * dphi_dc
    return fhat, qhat, d_pc, d_c, phi, q


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _finite_or_outside(x):
    return OUTSIDE if math.isinf(x) else float(x)


def phi(p, s: SurfaceState):
    denom = s.p_c + s.c
    if not denom > 0:
        raise InvalidStateError("p_c + c must be positive")
    return (p + s.c) / denom


def meridian_f(p, s: SurfaceState, shape: YieldShape):
    ph = phi(p, s)
    if ph < -PHI_SLACK or ph > 1.0 + PHI_SLACK:
        return OUTSIDE
    ph = min(max(ph, 0.0), 1.0)
    return -shape.M * s.p_c * math.sqrt(max(meridian_S(ph, shape.m, shape.alpha), 0.0))


def lode_g(theta, shape: YieldShape):
    return float(lode_g_kernel(math.cos(3.0 * theta), shape.beta, shape.gamma))


def yield_value(sigma, s: SurfaceState, shape: YieldShape):
    """F(sigma, p_c, c), or :data:`OUTSIDE` when Phi is not in [0, 1]."""
    value = yield_value_kernel(
        np.asarray(sigma, dtype=float), s.p_c, s.c, shape.M, shape.m, shape.alpha, shape.beta, shape.gamma
    )
    return _finite_or_outside(value)


def yield_gradient(sigma, s: SurfaceState, shape: YieldShape, eps_phi=EPS_PHI):
    """Analytic gradient Q = dF/dsigma (Mandel vector).

    Near the apexes Phi is clamped into [eps_phi, 1 - eps_phi]; outside the
    closed domain the gradient does not exist.
    """
    sig = np.asarray(sigma, dtype=float)
    grad, ph = yield_gradient_kernel(
        sig, s.p_c, s.c, shape.M, shape.m, shape.alpha, shape.beta, shape.gamma, eps_phi
    )
    if ph < -PHI_SLACK or ph > 1.0 + PHI_SLACK:
        raise GradientSingularError(f"Phi = {ph:.6g} lies outside [0, 1]")
    if ph < eps_phi or ph > 1.0 - eps_phi:
        log.debug("yield gradient evaluated at clamped Phi (Phi = %.3g)", ph)
    return grad


def hardening_derivatives(sigma, s: SurfaceState, shape: YieldShape, eps_phi=EPS_PHI):
    """Partial derivatives of F with respect to p_c and c."""
    p = -tensor.trace(np.asarray(sigma, dtype=float)) / 3.0
    dpc, dc = hardening_derivatives_kernel(p, s.p_c, s.c, shape.M, shape.m, shape.alpha, eps_phi)
    return float(dpc), float(dc)


def critical_state_residual(ph, m, alpha):
    return (
        2.0 * (m + 1.0) * (1.0 - alpha) * ph**m
        + m * alpha * ph ** (m - 1.0)
        - 4.0 * (1.0 - alpha) * ph
        - alpha
    )


def critical_state_phi(m, alpha, tol=1e-12):
    """Root Phi* in (0, 1) of the zero-volumetric-flow condition tr Q = 0."""
    lo, hi = 1e-6, 1.0 - 1e-6
    r_lo = critical_state_residual(lo, m, alpha)
    r_hi = critical_state_residual(hi, m, alpha)
    if r_lo * r_hi > 0:
        raise CalibrationError(f"no critical state in (0, 1) for m={m}, alpha={alpha}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r_mid = critical_state_residual(mid, m, alpha)
        if (r_mid < 0) == (r_lo < 0):
            lo, r_lo = mid, r_mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    x = 0.5 * (lo + hi)
    for _ in range(20):
        r = critical_state_residual(x, m, alpha)
        dr = (
            2.0 * m * (m + 1.0) * (1.0 - alpha) * x ** (m - 1.0)
            + m * (m - 1.0) * alpha * x ** (m - 2.0)
            - 4.0 * (1.0 - alpha)
        )
        step = r / dr
        x -= step
        if abs(step) < 1e-16:
            break
    if not (0 < x < 1) or abs(critical_state_residual(x, m, alpha)) >= tol:
        raise CalibrationError("critical state root did not converge")
    return x


def _meridian_height(ph, shape):
    return math.sqrt(meridian_S(ph, shape.m, shape.alpha))


def critical_state_point(s: SurfaceState, shape: YieldShape, theta):
    """(p*, q*) of the critical state line at forming pressure p_c."""
    ph = critical_state_phi(shape.m, shape.alpha)
    p_star = (s.p_c + s.c) * ph - s.c
    q_star = lode_g(theta, shape) * shape.M * s.p_c * _meridian_height(ph, shape)
    return p_star, q_star


def csl_slope(shape: YieldShape, theta):
    """Final inclination dq/dp of the critical state line."""
    ph = critical_state_phi(shape.m, shape.alpha)
    return lode_g(theta, shape) * shape.M * _meridian_height(ph, shape) / ph


def _fold_lode(omega):
    """Lode angle in [0, pi/3] of a deviatoric-plane polar angle."""
    w = math.fmod(omega, 2.0 * math.pi / 3.0)
    return w if w <= math.pi / 3.0 else 2.0 * math.pi / 3.0 - w


def sample_sections(s: SurfaceState, shape: YieldShape, n, theta=math.pi / 3.0, phi_dev=None):
    """Meridian and deviatoric polylines of the yield surface.

    Returns ``(meridian, deviatoric)``: an (n, 2) array of (p, q) at fixed
    Lode angle ``theta`` and an (n, 2) array of (polar angle, deviatoric
    radius |dev sigma|) over a full turn, at the pressure where Phi equals
    ``phi_dev`` (critical state by default).
    """
    if n < 8:
        raise ValueError("at least 8 samples per section are required")
    # cosine spacing resolves the square-root ends
    ph = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n)))
    ph[0], ph[-1] = 0.0, 1.0
    g = lode_g(theta, shape)
    height = np.array([_meridian_height(x, shape) for x in ph])
    p = (s.p_c + s.c) * ph - s.c
    q = g * shape.M * s.p_c * height
    meridian = np.column_stack([p, q])

    if phi_dev is None:
        phi_dev = critical_state_phi(shape.m, shape.alpha)
    radius0 = shape.M * s.p_c * _meridian_height(phi_dev, shape)
    omega = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    radius = np.array([math.sqrt(2.0 / 3.0) * lode_g(_fold_lode(w), shape) * radius0 for w in omega])
    deviatoric = np.column_stack([omega, radius])
    return meridian, deviatoric
