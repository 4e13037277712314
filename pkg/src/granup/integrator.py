"""Flow rule, elastoplastic tangent and cutting-plane stress integration.

The return mapping runs at frozen total strain. Each iteration linearizes the
regularized yield residual (see :mod:`granup.yield_surface`) along the
plastic flow, takes the multiplier increment

    dlam = Fhat / (h + Q . E[P])

and updates the plastic strain by ``dlam G^-1[P]``. The forming pressure is
then recovered exactly from the accumulated plastic volumetric strain, and
cohesion, transition parameter, shear modulus, elastic strain and stress are
refreshed from it in that order.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from granup import tensor
from granup._jit import jit
from granup.elasticity import (
    G_DENOM_TOL,
    coupling_G_kernel,
    shear_modulus_kernel,
    stress_kernel,
    tangent_bulk_kernel,
    tangent_kernel,
    xi5_kernel,
)
from granup.errors import (
    ConvergenceError,
    CouplingDegeneracyError,
    LossOfStabilityError,
    SaturationError,
)
from granup.hardening import invert_kernel, xi_kernel
from granup.params import (
    I_A1,
    I_A2,
    I_ALPHA,
    I_BETA,
    I_EPSF,
    I_GAMMA,
    I_KAPPA,
    I_E0,
    I_LAM1,
    I_LAM2,
    I_M,
    I_MEXP,
    I_MU0,
    I_MU1,
    I_N,
    I_P0,
    I_PC0,
    MaterialParams,
)
from granup.yield_surface import (
    EPS_PHI,
    OUTSIDE,
    SurfaceState,
    consistency_kernel,
    hardening_derivatives,
    yield_value_kernel,
)

log = logging.getLogger(__name__)

# cutting-plane exit codes
ELASTIC, PLASTIC = 0, 1
NO_CONVERGENCE, NEGATIVE_MULTIPLIER, LOSS_OF_STABILITY, COUPLING_DEGENERATE, SATURATED = -1, -2, -3, -4, -5

STRAIN, STRESS = "strain", "stress"


@dataclass(frozen=True)
class StepControls:
    """Return-mapping controls.

    ``tol_F`` is an absolute yield tolerance in MPa; when left as None the
    tolerance follows the current surface size, ``tol_F_rel * M * p_c``.
    """

    tol_F: float | None = None
    max_iter: int = 50
    max_substeps: int = 20
    tol_F_rel: float = 1e-8

    def __post_init__(self):
        if self.tol_F is not None and not self.tol_F > 0:
            raise ValueError("tol_F must be positive")
        if not self.tol_F_rel > 0:
            raise ValueError("tol_F_rel must be positive")
        if self.max_iter < 1 or self.max_substeps < 0:
            raise ValueError("max_iter must be >= 1 and max_substeps >= 0")

    def tolerance(self, M, p_c):
        return self.tol_F if self.tol_F is not None else self.tol_F_rel * M * p_c

    @property
    def tol_abs(self):
        return -1.0 if self.tol_F is None else self.tol_F


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@jit
def _shape(prm):
    return prm[I_M], prm[I_MEXP], prm[I_ALPHA], prm[I_BETA], prm[I_GAMMA]


@jit
def _kappa_t(prm):
    return prm[I_KAPPA] / (1.0 + prm[I_E0])


@jit
def _tolerance(tol_abs, tol_rel, M, p_c):
    return tol_abs if tol_abs > 0.0 else tol_rel * M * p_c


@jit
def state_kernel(eps, eps_p, p_c, prm):
    """Derived quantities (sigma, c, d, mu, K_t, F) of a primary state."""
    M, m, alpha, beta, gamma = _shape(prm)
    kt = _kappa_t(prm)
    _, _, _, _, c, d = xi_kernel(p_c, prm)
    mu = shear_modulus_kernel(d, c, prm[I_MU0], prm[I_MU1])
    eps_e = eps - eps_p
    sig = stress_kernel(eps_e, c, d, mu, prm[I_P0], kt, prm[I_N])
    k_bulk = tangent_bulk_kernel(eps_e[0] + eps_e[1] + eps_e[2], c, d, prm[I_P0], kt, prm[I_N])
    f = yield_value_kernel(sig, p_c, c, M, m, alpha, beta, gamma)
    return sig, c, d, mu, k_bulk, f


@jit
def flow_kernel(qvec, phi, eps_flow):
    """P = Q - eps_flow (1 - Phi) tr(Q)/3 I, with Phi limited to [0, 1]."""
    ph = min(max(phi, 0.0), 1.0)
    shift = eps_flow * (1.0 - ph) * (qvec[0] + qvec[1] + qvec[2]) / 3.0
    pvec = qvec.copy()
    for i in range(3):
        pvec[i] -= shift
    return pvec


@jit
def plastic_operators(eps_e, p_c, prm):
    """Quantities needed for one consistency linearization.

    Returns (sigma, Fhat, Qhat, P, Ginv P, h, E, Phi, c, G-denominator).
    """
    M, m, alpha, beta, gamma = _shape(prm)
    kt = _kappa_t(prm)
    p0, n = prm[I_P0], prm[I_N]
    xi1, xi2, xi3, xi4, c, d = xi_kernel(p_c, prm)
    mu = shear_modulus_kernel(d, c, prm[I_MU0], prm[I_MU1])
    sig = stress_kernel(eps_e, c, d, mu, p0, kt, n)
    fhat, qhat, d_pc, d_c, phi, q = consistency_kernel(sig, p_c, c, M, m, alpha, beta, gamma)
    t = eps_e[0] + eps_e[1] + eps_e[2]
    k_bulk = tangent_bulk_kernel(t, c, d, p0, kt, n)
    E, _ = tangent_kernel(mu, k_bulk)
    xi5 = xi5_kernel(t, c, d, p0, kt, n, xi2, xi3, xi4)
    _, Ginv, gden = coupling_G_kernel(eps_e, mu, k_bulk, xi5, xi4)
    pvec = flow_kernel(qhat, phi, prm[I_EPSF])
    gp = Ginv @ pvec
    h = -(d_pc * xi1 + d_c * xi2) * (gp[0] + gp[1] + gp[2])
    return sig, fhat, qhat, pvec, gp, h, E, phi, c, gden


@jit
def _converged(sig, fhat, phi, p_c, c, prm, tol, first):
    """Consistency test: |F| on the regular part of the surface, |Fhat| near the apexes."""
    if fhat <= 0.0 and first:
        return True
    if phi >= EPS_PHI and phi <= 1.0 - EPS_PHI:
        M, m, alpha, beta, gamma = _shape(prm)
        f = yield_value_kernel(sig, p_c, c, M, m, alpha, beta, gamma)
        return f <= tol if first else abs(f) <= tol
    return fhat <= tol if first else abs(fhat) <= tol


@jit
def cutting_plane_kernel(eps, eps_p_start, p_c_start, prm, tol_abs, tol_rel, max_iter):
    """Return mapping at frozen total strain ``eps``.

    Returns (eps_p, p_c, status, iterations, total multiplier).
    """
    eps_p = eps_p_start.copy()
    p_c = p_c_start
    lam = 0.0
    M = prm[I_M]
    for it in range(max_iter + 1):
        eps_e = eps - eps_p
        sig, fhat, qhat, pvec, gp, h, E, phi, c, gden = plastic_operators(eps_e, p_c, prm)
        tol = _tolerance(tol_abs, tol_rel, M, p_c)
        if _converged(sig, fhat, phi, p_c, c, prm, tol, it == 0):
            return eps_p, p_c, ELASTIC if it == 0 else PLASTIC, it, lam
        if it == max_iter:
            break
        if not gden > G_DENOM_TOL:
            return eps_p, p_c, COUPLING_DEGENERATE, it, lam
        denom = h + qhat @ (E @ pvec)
        if not denom > 0.0:
            return eps_p, p_c, LOSS_OF_STABILITY, it, lam
        dlam = fhat / denom
        if dlam < 0.0:
            return eps_p, p_c, NEGATIVE_MULTIPLIER, it, lam
        lam += dlam
        eps_p = eps_p + dlam * gp
        p_c = invert_kernel(
            eps_p[0] + eps_p[1] + eps_p[2], prm[I_A1], prm[I_A2], prm[I_LAM1], prm[I_LAM2], prm[I_PC0]
        )
        if p_c < 0.0:
            return eps_p_start, p_c_start, SATURATED, it, lam
    return eps_p, p_c, NO_CONVERGENCE, max_iter, lam


@jit
def tangent_operator_kernel(eps, eps_p, p_c, prm, tol_abs, tol_rel):
    """Continuum tangent: elastic inside, elastoplastic on the surface."""
    eps_e = eps - eps_p
    sig, fhat, qhat, pvec, gp, h, E, phi, c, gden = plastic_operators(eps_e, p_c, prm)
    tol = _tolerance(tol_abs, tol_rel, prm[I_M], p_c)
    inside = _converged(sig, fhat, phi, p_c, c, prm, -tol, True)
    if inside:
        return E, False, 1.0
    ep = E @ pvec
    eq = E @ qhat
    denom = h + qhat @ ep
    if not denom > 0.0:
        return E, True, denom
    return E - np.outer(ep, eq) / denom, True, denom


# ---------------------------------------------------------------------------
# state and public operations
# ---------------------------------------------------------------------------


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MaterialState:
    """Converged material-point state.

    ``eps``, ``eps_p`` and ``p_c`` are primary; everything else is derived
    from them when the state is built with :meth:`create`.
    """

    eps: np.ndarray
    eps_p: np.ndarray
    p_c: float
    sigma: np.ndarray
    c: float
    d: float
    mu: float
    K_t: float
    F: object
    plastic: bool = False
    multiplier: float = 0.0

    @classmethod
    def create(cls, eps, eps_p, p_c, params: MaterialParams, plastic=False, multiplier=0.0):
        eps = _frozen(eps)
        eps_p = _frozen(eps_p)
        sig, c, d, mu, k_bulk, f = state_kernel(eps, eps_p, float(p_c), params.as_array())
        return cls(
            eps,
            eps_p,
            float(p_c),
            _frozen(sig),
            float(c),
            float(d),
            float(mu),
            float(k_bulk),
            OUTSIDE if math.isinf(f) else float(f),
            plastic,
            float(multiplier),
        )

    @property
    def eps_e(self):
        return self.eps - self.eps_p

    @property
    def surface(self):
        return SurfaceState(self.p_c, self.c)

    def invariants(self):
        return tensor.invariants(self.sigma)


def initial_state(params: MaterialParams):
    """Unstrained powder at confining pressure p0 with forming pressure pc0."""
    return MaterialState.create(np.zeros(6), np.zeros(6), params.pc0, params)


def flow_direction(Q, phi, eps_flow):
    """Deviatoric-associative flow direction."""
    return flow_kernel(np.asarray(Q, dtype=float), float(phi), float(eps_flow))


def hardening_modulus(state: MaterialState, P, params: MaterialParams):
    """h = -(dF/dp_c xi1 + dF/dc xi2) tr(G^-1[P]).

    Positive for hardening, zero for ideal plasticity, negative for softening.
    """
    from granup.elasticity import CouplingState, coupling_G
    from granup.hardening import xi_coefficients

    xi = xi_coefficients(state.p_c, params)
    cs = CouplingState(state.c, state.d, state.mu)
    _, Ginv = coupling_G(state.eps_e, cs, params.elastic, xi)
    dpc, dc = hardening_derivatives(state.sigma, state.surface, params.shape)
    return -(dpc * xi.xi1 + dc * xi.xi2) * tensor.trace(Ginv @ np.asarray(P, dtype=float))


def elastoplastic_tangent(state: MaterialState, params: MaterialParams, controls=None):
    """Continuum tangent dsigma/deps for a converged state (6x6 Mandel)."""
    controls = controls or StepControls()
    C, on_surface, denom = tangent_operator_kernel(
        state.eps, state.eps_p, state.p_c, params.as_array(), controls.tol_abs, controls.tol_F_rel
    )
    if on_surface and not denom > 0:
        raise LossOfStabilityError(f"h + Q.E[P] = {denom:.6g} is not positive")
    return C


_FAILURES = {
    NO_CONVERGENCE: (ConvergenceError, "return mapping did not converge"),
    NEGATIVE_MULTIPLIER: (ConvergenceError, "negative plastic multiplier increment"),
    LOSS_OF_STABILITY: (LossOfStabilityError, "non-positive consistency denominator h + Q.E[P]"),
    COUPLING_DEGENERATE: (CouplingDegeneracyError, "coupling operator G lost invertibility"),
    SATURATED: (SaturationError, "densification capacity exhausted"),
}


def _advance(eps0, eps_p, p_c, d_eps, prm, controls, depth):
    eps_p1, p_c1, status, _, lam = cutting_plane_kernel(
        eps0 + d_eps, eps_p, p_c, prm, controls.tol_abs, controls.tol_F_rel, controls.max_iter
    )
    if status >= 0:
        return eps_p1, p_c1, status == PLASTIC, lam
    if depth >= controls.max_substeps:
        exc, msg = _FAILURES[status]
        raise exc(f"{msg} after {depth} bisections")
    log.debug("cutting plane status %d, bisecting (depth %d)", status, depth + 1)
    half = 0.5 * d_eps
    eps_p_m, p_c_m, pl_a, lam_a = _advance(eps0, eps_p, p_c, half, prm, controls, depth + 1)
    eps_p_e, p_c_e, pl_b, lam_b = _advance(eps0 + half, eps_p_m, p_c_m, half, prm, controls, depth + 1)
    return eps_p_e, p_c_e, pl_a or pl_b, lam_a + lam_b


def integrate_strain_step(state: MaterialState, d_eps, params: MaterialParams, controls=None):
    """Advance ``state`` by the total strain increment ``d_eps``."""
    controls = controls or StepControls()
    d_eps = np.asarray(d_eps, dtype=float)
    eps_p, p_c, plastic, lam = _advance(
        np.asarray(state.eps), np.asarray(state.eps_p), state.p_c, d_eps, params.as_array(), controls, 0
    )
    return MaterialState.create(state.eps + d_eps, eps_p, p_c, params, plastic, lam)


# ---------------------------------------------------------------------------
# mixed strain/stress control along principal axes
# ---------------------------------------------------------------------------


def _fd_jacobian(state, eps_trial, axes, params, controls):
    base = integrate_strain_step(state, eps_trial - state.eps, params, controls).sigma
    J = np.empty((len(axes), len(axes)))
    for k, j in enumerate(axes):
        h = 1e-7 * max(1.0, abs(eps_trial[j]))
        e = eps_trial.copy()
        e[j] += h
        s = integrate_strain_step(state, e - state.eps, params, controls).sigma
        J[:, k] = (s[axes] - base[axes]) / h
    return J


def _solve_mixed(state, kinds, targets, params, controls):
    axes = [i for i in range(3) if kinds[i] == STRESS]
    eps_trial = np.array(state.eps, dtype=float)
    for i in range(3):
        if kinds[i] == STRAIN:
            eps_trial[i] = targets[i]
    if not axes:
        return integrate_strain_step(state, eps_trial - state.eps, params, controls)
    target = np.array([targets[i] for i in axes])

    # tangent predictor from the converged state
    C = elastoplastic_tangent(state, params, controls)
    d_known = eps_trial - state.eps
    rhs = target - state.sigma[axes] - C[np.ix_(axes, range(6))] @ d_known
    try:
        eps_trial[axes] += np.linalg.solve(C[np.ix_(axes, axes)], rhs)
    except np.linalg.LinAlgError:
        pass

    use_fd = False
    best = math.inf
    for _ in range(controls.max_iter):
        trial = integrate_strain_step(state, eps_trial - state.eps, params, controls)
        r = trial.sigma[axes] - target
        tol = controls.tolerance(params.M, trial.p_c)
        rn = float(np.max(np.abs(r)))
        if rn <= tol:
            return trial
        if rn > best and not use_fd:
            # continuum tangent is not the algorithmic one; switch to differences
            use_fd = True
        best = min(best, rn)
        if use_fd:
            J = _fd_jacobian(state, eps_trial, axes, params, controls)
        else:
            J = elastoplastic_tangent(trial, params, controls)[np.ix_(axes, axes)]
        if not np.all(np.isfinite(J)) or abs(np.linalg.det(J)) < 1e-300:
            J = _fd_jacobian(state, eps_trial, axes, params, controls)
            use_fd = True
        eps_trial[axes] -= np.linalg.solve(J, r)
    raise ConvergenceError("mixed-control Newton did not meet the stress targets")


def mixed_control_step(state: MaterialState, kinds, targets, params: MaterialParams, controls=None, _depth=0):
    """One increment with each principal axis under strain or stress control.

    ``kinds`` holds ``"strain"`` or ``"stress"`` per axis and ``targets`` the
    end-of-increment values (strain, or stress in MPa, tension positive).
    Shear strains are held fixed.
    """
    controls = controls or StepControls()
    try:
        return _solve_mixed(state, kinds, targets, params, controls)
    except ConvergenceError:
        if _depth >= controls.max_substeps:
            raise
    log.debug("mixed-control increment bisected (depth %d)", _depth + 1)
    current = [state.eps[i] if kinds[i] == STRAIN else state.sigma[i] for i in range(3)]
    middle = [0.5 * (current[i] + targets[i]) for i in range(3)]
    half = mixed_control_step(state, kinds, middle, params, controls, _depth + 1)
    return mixed_control_step(half, kinds, targets, params, controls, _depth + 1)


# ---------------------------------------------------------------------------
# load programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoadStep:
    kinds: tuple
    targets: tuple
    increments: int = 1

    def __post_init__(self):
        if len(self.kinds) != 3 or len(self.targets) != 3:
            raise ValueError("a load step controls exactly three principal axes")
        if any(k not in (STRAIN, STRESS) for k in self.kinds):
            raise ValueError("axis control must be 'strain' or 'stress'")
        if not all(math.isfinite(t) for t in self.targets):
            raise ValueError("load targets must be finite")
        if self.increments < 1:
            raise ValueError("increment count must be at least 1")


@dataclass(frozen=True)
class LoadProgram:
    steps: tuple = field(default_factory=tuple)


class TrajectoryRow(NamedTuple):
    step: int
    inc: int
    state: MaterialState


class PathError(Exception):
    """Integration failure with the position in the load program."""

    def __init__(self, step, inc, cause, trajectory):
        super().__init__(f"step {step}, increment {inc}: {cause}")
        self.step = step
        self.inc = inc
        self.cause = cause
        self.trajectory = trajectory


def run_path(state: MaterialState, program: LoadProgram, params: MaterialParams, controls=None):
    """Drive a material point through ``program``.

    Returns the list of :class:`TrajectoryRow` starting with the initial
    state as (0, 0). Failures raise :class:`PathError` carrying the partial
    trajectory.
    """
    controls = controls or StepControls()
    rows = [TrajectoryRow(0, 0, state)]
    for s, step in enumerate(program.steps, start=1):
        start = [state.eps[i] if step.kinds[i] == STRAIN else state.sigma[i] for i in range(3)]
        for k in range(1, step.increments + 1):
            frac = k / step.increments
            targets = [start[i] + frac * (step.targets[i] - start[i]) for i in range(3)]
            try:
                state = mixed_control_step(state, step.kinds, targets, params, controls)
            except Exception as exc:
                if not isinstance(exc, (ArithmeticError, ValueError)):
                    raise
                raise PathError(s, k, exc, rows) from exc
            rows.append(TrajectoryRow(s, k, state))
    return rows
