"""Bath spectral density models.

The cavities couple to structured reservoirs described by one of five
spectral density families: a flat (memoryless) background, single and
double Lorentzian peaks, a band-gap profile built as the difference of a
broad and a narrow Lorentzian, and the ohmic family with an exponential
cutoff.  All frequencies are in units of the cavity frequency.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Flat:
    """Frequency-independent coupling, J(omega) = kappa / (2 pi)."""

    kappa: float = 1.0


@dataclass(frozen=True)
class SingleLorentzian:
    alpha_L: float
    Gamma: float
    omega_bc: float = 20.0


@dataclass(frozen=True)
class DoubleLorentzian:
    alpha_L1: float
    alpha_L2: float
    Gamma1: float
    Gamma2: float
    W_D1: float = 0.5
    W_D2: float = 0.5
    omega_bc: float = 20.0


@dataclass(frozen=True)
class BandGapLorentzian:
    """Broad peak minus a narrow notch at the same centre frequency."""

    alpha_L1: float
    alpha_L2: float
    Gamma1: float
    Gamma2: float
    W_B1: float = 2.0
    W_B2: float = 1.0
    omega_bc: float = 20.0


@dataclass(frozen=True)
class OhmicFamily:
    """J(omega) = alpha * omega_cut**(1-s) * omega**s * exp(-omega/omega_cut).

    s < 1 sub-ohmic, s = 1 ohmic, s > 1 super-ohmic.
    """

    s: float
    alpha: float
    omega_cut: float


def _lorentzian(omega, alpha_L, Gamma, omega_bc):
    return alpha_L * Gamma**2 / (2.0 * np.pi * ((omega - omega_bc) ** 2 + (Gamma / 2.0) ** 2))


def evaluate(model, omega):
    """Spectral density J(omega) for scalar or array omega >= 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise ValueError("spectral densities are defined for omega >= 0")
    if isinstance(model, Flat):
        out = np.full_like(omega, model.kappa / (2.0 * np.pi))
    elif isinstance(model, SingleLorentzian):
        out = _lorentzian(omega, model.alpha_L, model.Gamma, model.omega_bc)
    elif isinstance(model, DoubleLorentzian):
        out = model.W_D1 * _lorentzian(omega, model.alpha_L1, model.Gamma1, model.omega_bc)
        out = out + model.W_D2 * _lorentzian(omega, model.alpha_L2, model.Gamma2, model.omega_bc)
    elif isinstance(model, BandGapLorentzian):
        out = model.W_B1 * _lorentzian(omega, model.alpha_L1, model.Gamma1, model.omega_bc)
        out = out - model.W_B2 * _lorentzian(omega, model.alpha_L2, model.Gamma2, model.omega_bc)
    elif isinstance(model, OhmicFamily):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = model.alpha * model.omega_cut ** (1.0 - model.s) * omega**model.s
        out = np.where(omega == 0.0, 0.0 if model.s > 0 else np.inf, out)
        out = out * np.exp(-omega / model.omega_cut)
    else:
        raise TypeError(f"unknown spectral density model: {type(model).__name__}")
    if out.ndim == 0:
        return float(out)
    return out


def validate(model):
    """Check model parameters, returning a list of violation messages.

    An empty list means the model is usable.  The band-gap check samples
    J on a dense grid because the difference of two Lorentzians can dip
    negative for unfortunate weight choices.
    """
    problems = []
    if isinstance(model, Flat):
        if model.kappa <= 0.0:
            problems.append("kappa must be positive")
    elif isinstance(model, SingleLorentzian):
        if model.alpha_L <= 0.0:
            problems.append("alpha_L must be positive")
        if model.Gamma <= 0.0:
            problems.append("Gamma must be positive")
    elif isinstance(model, (DoubleLorentzian, BandGapLorentzian)):
        for name in ("alpha_L1", "alpha_L2", "Gamma1", "Gamma2"):
            if getattr(model, name) <= 0.0:
                problems.append(f"{name} must be positive")
        if model.Gamma2 >= model.Gamma1:
            problems.append("Gamma2 must be smaller than Gamma1 (narrow second peak)")
        if isinstance(model, DoubleLorentzian):
            if model.W_D1 < 0.0 or model.W_D2 < 0.0:
                problems.append("double-Lorentzian weights must be non-negative")
            if abs(model.W_D1 + model.W_D2 - 1.0) > 1e-12:
                problems.append("double-Lorentzian weights must sum to 1")
        else:
            if model.W_B1 <= 0.0 or model.W_B2 <= 0.0:
                problems.append("band-gap weights must be positive")
            if not problems:
                grid = np.linspace(0.0, 5.0 * model.omega_bc, 10_000)
                if np.any(evaluate(model, grid) < 0.0):
                    problems.append("band-gap spectral density goes negative")
    elif isinstance(model, OhmicFamily):
        if model.s <= 0.0:
            problems.append("s must be positive")
        if model.alpha <= 0.0:
            problems.append("alpha must be positive")
        if model.omega_cut <= 0.0:
            problems.append("omega_cut must be positive")
    else:
        problems.append(f"unknown spectral density model: {type(model).__name__}")
    return problems
