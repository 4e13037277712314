"""Material constants and their packed form for compiled kernels."""
from dataclasses import asdict, dataclass, fields

import numpy as np

from granup.errors import ConfigError

# Slots of the packed parameter vector consumed by the integrator kernels.
I_M, I_MEXP, I_ALPHA, I_BETA, I_GAMMA = 0, 1, 2, 3, 4
I_KAPPA, I_E0, I_P0, I_PC0 = 5, 6, 7, 8
I_LAM1, I_LAM2, I_A1, I_A2 = 9, 10, 11, 12
I_GAMC, I_CINF, I_PCB = 13, 14, 15
I_B, I_N, I_MU0, I_MU1, I_EPSF = 16, 17, 18, 19, 20
N_SLOTS = 21


@dataclass(frozen=True)
class YieldShape:
    M: float = 1.1
    m: float = 2.0
    alpha: float = 0.1
    beta: float = 0.19
    gamma: float = 0.9

    def __post_init__(self):
        if not self.M > 0:
            raise ConfigError("M must be positive")
        if not self.m > 1:
            raise ConfigError("m must exceed 1")
        if not 0 <= self.alpha <= 2:
            raise ConfigError("alpha must lie in [0, 2]")
        if not 0 <= self.beta <= 2:
            raise ConfigError("beta must lie in [0, 2]")
        if not 0 <= self.gamma < 1:
            raise ConfigError("gamma must lie in [0, 1)")


@dataclass(frozen=True)
class ElasticParams:
    kappa: float = 0.04
    e0: float = 2.129
    p0: float = 0.063
    mu0: float = 1.0
    mu1: float = 64.0
    n: float = 6.0
    B: float = 0.18

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        if not self.e0 > -1:
            raise ConfigError("e0 must exceed -1")
        if not self.p0 > 0:
            raise ConfigError("p0 must be positive")
        if not self.mu0 > 0:
            raise ConfigError("mu0 must be positive")
        if not self.mu1 >= 0:
            raise ConfigError("mu1 must be non-negative")
        if not self.n >= 1:
            raise ConfigError("n must be at least 1")
        if not self.B >= 0:
            raise ConfigError("B must be non-negative")

    @property
    def kappa_t(self):
        return self.kappa / (1.0 + self.e0)


@dataclass(frozen=True)
class HardeningParams:
    Lambda1: float = 1.8
    Lambda2: float = 40.0
    a1t: float = 0.37
    a2t: float = 0.12
    Gamma: float = 0.026
    cinf: float = 2.3
    pcb: float = 3.2
    pc0: float = 0.063

    def __post_init__(self):
        for name in ("Lambda1", "Lambda2", "a1t", "a2t", "Gamma", "cinf", "pc0"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.pcb >= 0:
            raise ConfigError("pcb must be non-negative")
        if not self.a1t + self.a2t <= 1:
            raise ConfigError("a1t + a2t must not exceed 1")
        if not self.Lambda1 < self.Lambda2:
            raise ConfigError("Lambda1 must be smaller than Lambda2")


@dataclass(frozen=True)
class MaterialParams:
    """All model constants; defaults are the alumina powder values."""

    M: float = 1.1
    m: float = 2.0
    alpha: float = 0.1
    beta: float = 0.19
    gamma: float = 0.9
    kappa: float = 0.04
    e0: float = 2.129
    p0: float = 0.063
    pc0: float = 0.063
    Lambda1: float = 1.8
    Lambda2: float = 40.0
    a1t: float = 0.37
    a2t: float = 0.12
    Gamma: float = 0.026
    cinf: float = 2.3
    pcb: float = 3.2
    B: float = 0.18
    n: float = 6.0
    mu0: float = 1.0
    mu1: float = 64.0
    eps_flow: float = 0.0

    def __post_init__(self):
        # sub-blocks validate their own ranges
        self.shape, self.elastic, self.hardening  # noqa: B018
        if not 0 <= self.eps_flow <= 1:
            raise ConfigError("eps_flow must lie in [0, 1]")
        if self.p0 > self.pc0 * (1 + 1e-12):
            raise ConfigError("initial pressure p0 lies outside the initial cap (p0 > pc0)")

    @property
    def shape(self):
        return YieldShape(self.M, self.m, self.alpha, self.beta, self.gamma)

    @property
    def elastic(self):
        return ElasticParams(self.kappa, self.e0, self.p0, self.mu0, self.mu1, self.n, self.B)

    @property
    def hardening(self):
        return HardeningParams(
            self.Lambda1, self.Lambda2, self.a1t, self.a2t, self.Gamma, self.cinf, self.pcb, self.pc0
        )

    @property
    def kappa_t(self):
        return self.kappa / (1.0 + self.e0)

    def replace(self, **changes):
        return MaterialParams(**{**asdict(self), **changes})

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)


FIELD_NAMES = tuple(f.name for f in fields(MaterialParams))
assert len(FIELD_NAMES) == N_SLOTS
