"""Elastoplastic coupling model for cold compaction of ceramic powders.

A material-point implementation: tensor utilities in Mandel notation, the
yield surface, densification and cohesion hardening, coupled nonlinear
elasticity, a cutting-plane stress integrator with mixed strain/stress
control, calibration helpers and a command-line driver.
"""
from granup.errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    CouplingDegeneracyError,
    FitError,
    GranupError,
    LossOfStabilityError,
    SaturationError,
)
from granup.integrator import (
    LoadProgram,
    LoadStep,
    MaterialState,
    StepControls,
    elastoplastic_tangent,
    initial_state,
    integrate_strain_step,
    mixed_control_step,
    run_path,
)
from granup.params import MaterialParams, YieldShape

__version__ = "0.1.0"
