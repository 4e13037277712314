"""Densification (Cooper-Eaton) and cohesion hardening laws.

The forming pressure p_c is the single internal variable. Plastic volumetric
strain is measured from the reference forming pressure ``pc0``:

    tr eps_p(p_c) = CE(p_c) - CE(pc0),  CE(x) = -a1 exp(-L1/x) - a2 exp(-L2/x)

and the xi coefficients convert a plastic volumetric strain rate into rates
of p_c, c, d and mu.
"""
from typing import NamedTuple

import numpy as np

from granup._jit import jit
from granup.errors import SaturationError
from granup.params import (
    I_A1,
    I_A2,
    I_B,
    I_CINF,
    I_GAMC,
    I_LAM1,
    I_LAM2,
    I_MU1,
    I_PCB,
    HardeningParams,
)
from granup.tensor import heaviside, macaulay


class Xi(NamedTuple):
    """Rates per unit tr(d eps_p) of p_c, c, d and mu."""

    xi1: float
    xi2: float
    xi3: float
    xi4: float


@jit
def cooper_eaton_kernel(p_c, a1, a2, lam1, lam2):
    return -a1 * np.exp(-lam1 / p_c) - a2 * np.exp(-lam2 / p_c)


@jit
def ce_denominator(p_c, a1, a2, lam1, lam2):
    return a1 * lam1 * np.exp(-lam1 / p_c) + a2 * lam2 * np.exp(-lam2 / p_c)


@jit
def invert_kernel(target, a1, a2, lam1, lam2, pc0):
    """Forming pressure for a plastic volumetric strain ``target``.

    Safeguarded Newton in x = ln p_c. Returns -1.0 when ``target`` is at or
    beyond the saturation strain. Non-negative targets map to ``pc0``.
    """
    if target >= 0.0:
        return pc0
    base = cooper_eaton_kernel(pc0, a1, a2, lam1, lam2)
    if target <= -(a1 + a2) - base:
        return -1.0
    lo = np.log(pc0)
    hi = lo + 1.0
    # residual r(x) = CE(e^x) - base - target decreases with x
    while cooper_eaton_kernel(np.exp(hi), a1, a2, lam1, lam2) - base - target > 0.0:
        lo = hi
        hi += 2.0
        if hi > 60.0:
            return -1.0
    x = 0.5 * (lo + hi)
    for _ in range(200):
        pc = np.exp(x)
        r = cooper_eaton_kernel(pc, a1, a2, lam1, lam2) - base - target
        if r > 0.0:
            lo = x
        elif r < 0.0:
            hi = x
        else:
            return pc
        dr = -ce_denominator(pc, a1, a2, lam1, lam2) / pc
        xn = x - r / dr if dr != 0.0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * max(1.0, abs(x)):
            return np.exp(xn)
        x = xn
    return np.exp(x)


@jit
def cohesion_kernel(p_c, cinf, gam, pcb):
    return cinf * (1.0 - np.exp(-gam * macaulay(p_c - pcb)))


@jit
def xi_kernel(p_c, prm):
    """(xi1, xi2, xi3, xi4, c, d) at forming pressure p_c."""
    a1, a2, lam1, lam2 = prm[I_A1], prm[I_A2], prm[I_LAM1], prm[I_LAM2]
    cinf, gam, pcb, B, mu1 = prm[I_CINF], prm[I_GAMC], prm[I_PCB], prm[I_B], prm[I_MU1]
    denom = ce_denominator(p_c, a1, a2, lam1, lam2)
    xi1 = -p_c * p_c / denom
    active = heaviside(p_c - pcb)
    xi2 = cinf * gam * active * np.exp(-gam * (p_c - pcb)) * xi1
    xi3 = B * active * xi1
    c = cohesion_kernel(p_c, cinf, gam, pcb)
    d = 1.0 + B * macaulay(p_c - pcb)
    xi4 = (d - 1.0 / d) * mu1 * xi2 + c * (1.0 + 1.0 / (d * d)) * mu1 * xi3
    return xi1, xi2, xi3, xi4, c, d


def plastic_volstrain(p_c, hp: HardeningParams):
    """Plastic volumetric strain accumulated from ``pc0`` up to ``p_c``."""
    args = (hp.a1t, hp.a2t, hp.Lambda1, hp.Lambda2)
    return float(cooper_eaton_kernel(p_c, *args) - cooper_eaton_kernel(hp.pc0, *args))


def invert_cooper_eaton(tr_eps_p, hp: HardeningParams):
    """Forming pressure reached at plastic volumetric strain ``tr_eps_p``.

    Dilatant (positive) strains are floored at ``pc0``.
    """
    pc = invert_kernel(float(tr_eps_p), hp.a1t, hp.a2t, hp.Lambda1, hp.Lambda2, hp.pc0)
    if pc < 0:
        raise SaturationError(
            f"tr eps_p = {tr_eps_p:.6g} exhausts the densification capacity {-(hp.a1t + hp.a2t):.6g}"
        )
    return float(pc)


def xi1(p_c, hp: HardeningParams):
    return -p_c * p_c / float(ce_denominator(p_c, hp.a1t, hp.a2t, hp.Lambda1, hp.Lambda2))


def cohesion(p_c, hp: HardeningParams):
    return float(cohesion_kernel(p_c, hp.cinf, hp.Gamma, hp.pcb))


def cohesion_bowden_tabor(p, k):
    """Hertzian-contact adhesion c = k p^(2/3); grows without bound."""
    if p < 0:
        raise ValueError("contact pressure must be non-negative")
    return k * p ** (2.0 / 3.0)


def xi2(p_c, hp: HardeningParams):
    active = float(heaviside(p_c - hp.pcb))
    return hp.cinf * hp.Gamma * active * np.exp(-hp.Gamma * (p_c - hp.pcb)) * xi1(p_c, hp)


def xi3(p_c, hp: HardeningParams, B):
    return B * float(heaviside(p_c - hp.pcb)) * xi1(p_c, hp)


def xi4(d, c, xi2_value, xi3_value, mu1):
    return (d - 1.0 / d) * mu1 * xi2_value + c * (1.0 + 1.0 / d**2) * mu1 * xi3_value


def xi_coefficients(p_c, params) -> Xi:
    """All four rate coefficients for a :class:`~granup.params.MaterialParams`."""
    x1, x2, x3, x4, _, _ = xi_kernel(float(p_c), params.as_array())
    return Xi(float(x1), float(x2), float(x3), float(x4))


def hardening_state(p_c, params):
    """Derived (c, d, mu) at forming pressure p_c."""
    hp = params.hardening
    c = cohesion(p_c, hp)
    d = 1.0 + params.B * float(macaulay(p_c - hp.pcb))
    mu = params.mu0 + c * (d - 1.0 / d) * params.mu1
    return c, d, mu

