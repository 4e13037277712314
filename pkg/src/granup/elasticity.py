"""Nonlinear elasticity coupled to plastic densification.

The potential interpolates between the logarithmic (Cam-clay type) law at
d = 1 and a linear law with stiffness growing with d. Cohesion c, transition
parameter d and shear modulus mu all depend on the forming pressure only and
are passed in through :class:`CouplingState`.

Note that zero elastic strain corresponds to the confined reference state
sigma = -p0 I, not to a stress-free body.
"""
from dataclasses import dataclass

import numpy as np

from granup import tensor
from granup._jit import jit
from granup.errors import CouplingDegeneracyError, NumericalError
from granup.params import ElasticParams

G_DENOM_TOL = 1e-12


@dataclass(frozen=True)
class CouplingState:
    c: float
    d: float
    mu: float

    @classmethod
    def make(cls, c, d, ep: ElasticParams):
        return cls(float(c), float(d), shear_modulus(d, c, ep))


@jit
def _root_d(d, n):
    return np.exp(np.log(d) / n)


@jit
def shear_modulus_kernel(d, c, mu0, mu1):
    return mu0 + c * (d - 1.0 / d) * mu1


@jit
def mean_stress_kernel(t, c, d, p0, kt, n):
    """tr(sigma)/3 as a function of tr(eps_e); mu cancels from the trace."""
    r = _root_d(d, n)
    return c + (p0 + c) * ((d - 1.0 / d) * t / kt - np.exp(-t / (r * kt)))


@jit
def stress_kernel(eps_e, c, d, mu, p0, kt, n):
    t = eps_e[0] + eps_e[1] + eps_e[2]
    vol = -2.0 / 3.0 * mu * t + mean_stress_kernel(t, c, d, p0, kt, n)
    sig = 2.0 * mu * eps_e
    for i in range(3):
        sig[i] += vol
    return sig


@jit
def tangent_bulk_kernel(t, c, d, p0, kt, n):
    r = _root_d(d, n)
    return (p0 + c) / kt * (d - 1.0 / d + np.exp(-t / (r * kt)) / r)


@jit
def volumetric_strain_kernel(y, c, d, p0, kt, n):
    """tr(eps_e) with mean stress y = tr(sigma)/3; NaN if no root in [-1, 1]."""
    lo, hi = -1.0, 1.0
    if mean_stress_kernel(lo, c, d, p0, kt, n) > y or mean_stress_kernel(hi, c, d, p0, kt, n) < y:
        return np.nan
    # Newton from the logarithmic-law guess, bisection when it leaves the bracket
    t = 0.0
    if y < 0.0 and d == 1.0:
        t = -kt * np.log((c - y) / (p0 + c))
        t = min(max(t, lo), hi)
    for _ in range(200):
        r = mean_stress_kernel(t, c, d, p0, kt, n) - y
        if r > 0.0:
            hi = t
        elif r < 0.0:
            lo = t
        else:
            return t
        dr = tangent_bulk_kernel(t, c, d, p0, kt, n)
        tn = t - r / dr
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= 1e-16 + 1e-15 * abs(t):
            return tn
        t = tn
    return t


@jit
def tangent_kernel(mu, kt_bulk):
    """E and E^-1 as 6x6 Mandel matrices."""
    E = np.zeros((6, 6))
    Einv = np.zeros((6, 6))
    lam = -2.0 / 3.0 * mu + kt_bulk
    lam_inv = (2.0 * mu - 3.0 * kt_bulk) / (18.0 * mu * kt_bulk)
    for i in range(6):
        E[i, i] = 2.0 * mu
        Einv[i, i] = 1.0 / (2.0 * mu)
    for i in range(3):
        for j in range(3):
            E[i, j] += lam
            Einv[i, j] += lam_inv
    return E, Einv


@jit
def xi5_kernel(t, c, d, p0, kt, n, xi2, xi3, xi4):
    r = _root_d(d, n)
    ex = np.exp(-t / (r * kt))
    return (
        -2.0 / 3.0 * xi4 * t
        + xi2 * (1.0 + (d - 1.0 / d) * t / kt - ex)
        + xi3 * (p0 + c) / kt * t * (1.0 + 1.0 / (d * d) - ex / (n * d * r))
    )


@jit
def coupling_P_kernel(eps_e, xi5, xi4):
    P = np.zeros((6, 6))
    for i in range(6):
        for j in range(3):
            P[i, j] = 2.0 * xi4 * eps_e[i]
    for i in range(3):
        for j in range(3):
            P[i, j] += xi5
    return P


@jit
def coupling_G_kernel(eps_e, mu, kt_bulk, xi5, xi4):
    """G, G^-1 and the Sherman-Morrison denominator 1 + 3 xi6 + xi7 tr(eps_e)."""
    t = eps_e[0] + eps_e[1] + eps_e[2]
    xi6 = -xi5 / (3.0 * kt_bulk) - (2.0 * mu - 3.0 * kt_bulk) / (9.0 * mu * kt_bulk) * xi4 * t
    xi7 = -xi4 / mu
    denom = 1.0 + 3.0 * xi6 + xi7 * t
    xi8 = -xi6 / denom
    xi9 = -xi7 / denom
    G = np.eye(6)
    Ginv = np.eye(6)
    for i in range(6):
        iden = 1.0 if i < 3 else 0.0
        for j in range(3):
            G[i, j] += xi6 * iden + xi7 * eps_e[i]
            Ginv[i, j] += xi8 * iden + xi9 * eps_e[i]
    return G, Ginv, denom


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def shear_modulus(d, c, ep: ElasticParams):
    return float(shear_modulus_kernel(d, c, ep.mu0, ep.mu1))


def transition_d(p_c, p_cb, ep: ElasticParams):
    return 1.0 + ep.B * float(tensor.macaulay(p_c - p_cb))


def elastic_potential(eps_e, cs: CouplingState, ep: ElasticParams):
    eps_e = np.asarray(eps_e, dtype=float)
    kt = ep.kappa_t
    t = tensor.trace(eps_e)
    r = float(_root_d(cs.d, ep.n))
    return float(
        -cs.mu / 3.0 * t * t
        + cs.c * t
        + (ep.p0 + cs.c) * ((cs.d - 1.0 / cs.d) * t * t / (2.0 * kt) + r * kt * np.exp(-t / (r * kt)))
        + cs.mu * eps_e @ eps_e
    )


def stress_from_strain(eps_e, cs: CouplingState, ep: ElasticParams):
    return stress_kernel(np.asarray(eps_e, dtype=float), cs.c, cs.d, cs.mu, ep.p0, ep.kappa_t, ep.n)


def elastic_strain_from_stress(sigma, cs: CouplingState, ep: ElasticParams):
    """Inverse of :func:`stress_from_strain`.

    The deviatoric part is closed form; the trace solves the scalar
    volumetric law, in which the shear modulus does not appear.
    """
    sigma = np.asarray(sigma, dtype=float)
    y = tensor.trace(sigma) / 3.0
    t = volumetric_strain_kernel(y, cs.c, cs.d, ep.p0, ep.kappa_t, ep.n)
    if np.isnan(t):
        raise NumericalError(f"no elastic volumetric strain produces mean stress {y:.6g} MPa")
    eps = tensor.deviator(sigma) / (2.0 * cs.mu)
    eps[:3] += t / 3.0
    return eps


def tangent_bulk(tr_eps_e, cs: CouplingState, ep: ElasticParams):
    return float(tangent_bulk_kernel(tr_eps_e, cs.c, cs.d, ep.p0, ep.kappa_t, ep.n))


def elastic_tangent(tr_eps_e, cs: CouplingState, ep: ElasticParams):
    """Tangent stiffness E and its inverse on symmetric tensors."""
    return tangent_kernel(cs.mu, tangent_bulk(tr_eps_e, cs, ep))


def xi5(eps_e, cs: CouplingState, ep: ElasticParams, xi):
    t = tensor.trace(np.asarray(eps_e, dtype=float))
    return float(xi5_kernel(t, cs.c, cs.d, ep.p0, ep.kappa_t, ep.n, xi.xi2, xi.xi3, xi.xi4))


def coupling_P(eps_e, cs: CouplingState, ep: ElasticParams, xi):
    """Stress rate per unit plastic strain rate due to evolving elasticity."""
    eps_e = np.asarray(eps_e, dtype=float)
    return coupling_P_kernel(eps_e, xi5(eps_e, cs, ep, xi), xi.xi4)


def coupling_G(eps_e, cs: CouplingState, ep: ElasticParams, xi):
    """Map G from plastic to irreversible strain rate, with its inverse."""
    eps_e = np.asarray(eps_e, dtype=float)
    kb = tangent_bulk(tensor.trace(eps_e), cs, ep)
    G, Ginv, denom = coupling_G_kernel(eps_e, cs.mu, kb, xi5(eps_e, cs, ep, xi), xi.xi4)
    if not denom > G_DENOM_TOL:
        raise CouplingDegeneracyError(f"coupling operator not invertible (denominator {denom:.3g})")
    return G, Ginv
