"""Front speed selection for monostable reaction-diffusion and nonlocal dispersal equations."""

from ._frontlab import (
    AssumptionViolation,
    ConfigError,
    CurvePoint,
    DecayFit,
    DomainError,
    Error,
    FamilySpec,
    InadmissibleProfile,
    KernelSpec,
    NonconvergenceError,
    PreconditionError,
    SpectralData,
    ThresholdResult,
    Unclassified,
    WaveProfile,
    certify_supersolution,
    classify,
    estimate_spreading_speed,
    find_threshold,
    kpp_holds,
    lambda_roots,
    linear_speed,
    mgf,
    minimal_speed,
    minimal_wave,
    mu_root,
    solve_wave,
    speed_curve,
    transition_certificate,
)

__version__ = "0.1.0"


def hr_speed(s):
    """Closed-form minimal speed of the Hadeler-Rothe family with local diffusion."""
    return 2.0 if s <= 2.0 else (2.0 / s) ** 0.5 + (s / 2.0) ** 0.5
