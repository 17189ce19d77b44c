"""Time-dependent decay coefficients alpha(t) and beta(t) for each bath.

The exact master equation for three identical cavities needs two complex
coefficient functions.  beta(t) multiplies the de-excitation terms,
alpha(t) the thermal excitation terms, and the decay rate that shows up in
all the plots is kappa(t) = 2 Re beta(t); a negative stretch of kappa is
the signature of non-Markovian backflow.

Closed forms are implemented for every bath family.  A deliberately slow
frequency-domain quadrature of J(omega) against the accumulated phase
kernel provides an independent cross-check, with two documented
exceptions: the ohmic-family rate formula is used as given even though it
does not agree with the quadrature away from t = 0, and thermal weighting
in the quadrature uses a constant occupation number (the full
Bose-Einstein factor diverges logarithmically at omega = 0 against any
spectral density that is finite there).
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _si
from scipy import special as _sp

from . import spectral

# the 1/x part of the imaginary kernel is log-divergent against a flat
# spectral density, so the quadrature cuts it off at this frequency
FLAT_IMAG_CUTOFF = 200.0


@dataclass(frozen=True)
class BathContext:
    """A spectral model plus the couplings that are not part of its shape.

    delta is the detuning of the cavity from the structured-bath centre
    (omega_c minus the effective centre), nbar the thermal occupation at
    the cavity frequency, omega_c the cavity frequency (1 in our units,
    kept explicit because the thermal phase depends on it).
    """

    model: object
    delta: float = 0.0
    nbar: float = 0.0
    omega_c: float = 1.0


@dataclass(frozen=True)
class RateCoefficients:
    alpha_fn: Callable
    beta_fn: Callable
    kappa_fn: Callable


def _beta0_single(alpha_L, Gamma, delta, t):
    """Zero-temperature beta(t) for one Lorentzian term.

    This is the time integral of the bath correlation function
    (alpha_L Gamma / 2) exp(-(Gamma + i delta) tau), so
    2 Re beta reproduces kappa_single_lorentzian exactly.
    """
    t = np.asarray(t, dtype=float)
    g = Gamma + 1j * delta
    return (0.5 * alpha_L * Gamma) * (1.0 - np.exp(-g * t)) / g


def kappa_single_lorentzian(alpha_L, Gamma, delta, t):
    """kappa(t) for a single Lorentzian bath at zero temperature."""
    t = np.asarray(t, dtype=float)
    a = alpha_L * Gamma**2 / (delta**2 + Gamma**2)
    out = a * (1.0 - np.exp(-Gamma * t) * (np.cos(delta * t) - (delta / Gamma) * np.sin(delta * t)))
    return float(out) if out.ndim == 0 else out


def kappa_double_lorentzian(alpha_L1, alpha_L2, Gamma1, Gamma2, W_D1, W_D2, delta, t):
    return W_D1 * kappa_single_lorentzian(alpha_L1, Gamma1, delta, t) + \
        W_D2 * kappa_single_lorentzian(alpha_L2, Gamma2, delta, t)


def kappa_bandgap_lorentzian(alpha_L1, alpha_L2, Gamma1, Gamma2, W_B1, W_B2, delta, t):
    return W_B1 * kappa_single_lorentzian(alpha_L1, Gamma1, delta, t) - \
        W_B2 * kappa_single_lorentzian(alpha_L2, Gamma2, delta, t)


def _kappa_ohmic_sm1(sm1, alpha, omega_cut, t):
    # parametrised by s - 1 so the s -> 1 average can use exactly +/- h;
    # forming s - 1.0 from s = 1 +/- h leaves the poles slightly asymmetric
    # and their imperfect cancellation costs five decades of accuracy
    wt = omega_cut * np.asarray(t, dtype=float)
    shape = np.cos(sm1 * np.arctan(wt)) * (1.0 + wt**2) ** (-sm1 / 2.0)
    return 0.5 * alpha * (1.0 - _sp.gamma(sm1) * shape)


def kappa_ohmic(s, alpha, omega_cut, t):
    """kappa(t) for the ohmic family at zero temperature.

    Gamma(s - 1) has a pole at s = 1; the pole cancels between the two
    sides, so the s = 1 rate is taken as the average of the formula at
    s = 1 +/- 1e-6.  The t -> 0 value (alpha/2)(1 - Gamma(s-1)) is kept at
    face value; it vanishes for s = 2 and s = 3 but not in general.
    """
    if s <= 0.0:
        raise ValueError("s must be positive")
    if abs(s - 1.0) < 1e-6:
        h = 1e-6
        out = 0.5 * (_kappa_ohmic_sm1(-h, alpha, omega_cut, t)
                     + _kappa_ohmic_sm1(h, alpha, omega_cut, t))
    else:
        out = _kappa_ohmic_sm1(s - 1.0, alpha, omega_cut, t)
    return float(out) if np.ndim(out) == 0 else out


def alpha_beta_finite_T_lorentzian(alpha_L, Gamma, delta, nbar, omega_c, t):
    """Thermal (alpha, beta) for one Lorentzian term.

    The thermal phase exp(-i beta_T Gamma) comes from evaluating the
    occupation factor at the complex pole of the Lorentzian; beta_T is the
    inverse temperature fixed by nbar at the cavity frequency.  At
    delta = 0 this reduces to
    kappa(t) = alpha_L (1 - exp(-Gamma t)) (nbar cos(beta_T Gamma) + 1).
    """
    t = np.asarray(t, dtype=float)
    beta0 = _beta0_single(alpha_L, Gamma, delta, t)
    if nbar == 0.0:
        return 0.0 * beta0, beta0
    beta_T = math.log1p(1.0 / nbar) / omega_c
    denom = delta**2 + Gamma**2
    term1 = (alpha_L * Gamma**2 * nbar / (2.0 * denom)) * (np.exp(1j * delta * t) - 1.0)
    term2 = (alpha_L * Gamma**2 * nbar * 1j * np.exp(-1j * beta_T * Gamma)
             / (2.0 * Gamma * (delta + 1j * Gamma))) * (1.0 - np.exp(-(Gamma + 1j * delta) * t))
    alpha = term1 + term2
    return alpha, alpha + beta0


def _lorentzian_terms(model):
    """Signed (amplitude, width) pairs entering every Lorentzian formula."""
    if isinstance(model, spectral.SingleLorentzian):
        return [(model.alpha_L, model.Gamma)]
    if isinstance(model, spectral.DoubleLorentzian):
        return [(model.W_D1 * model.alpha_L1, model.Gamma1),
                (model.W_D2 * model.alpha_L2, model.Gamma2)]
    if isinstance(model, spectral.BandGapLorentzian):
        return [(model.W_B1 * model.alpha_L1, model.Gamma1),
                (-model.W_B2 * model.alpha_L2, model.Gamma2)]
    raise TypeError(f"not a Lorentzian model: {type(model).__name__}")


def _constant(value):
    def fn(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, value, dtype=complex)
        return complex(out) if out.ndim == 0 else out
    return fn


def _bundle(alpha_fn, beta_fn):
    def kappa_fn(t):
        out = 2.0 * np.real(beta_fn(t))
        return float(out) if np.ndim(out) == 0 else out
    return RateCoefficients(alpha_fn=alpha_fn, beta_fn=beta_fn, kappa_fn=kappa_fn)


def coefficients_for(ctx):
    """Build the coefficient functions for a bath context.

    Raises ValueError for invalid models and for parameter combinations
    the closed forms do not cover (ohmic baths are zero temperature and
    zero detuning only; a flat bath has no centre to detune from).
    """
    model = ctx.model
    known = (spectral.Flat, spectral.SingleLorentzian, spectral.DoubleLorentzian,
             spectral.BandGapLorentzian, spectral.OhmicFamily)
    if not isinstance(model, known):
        raise TypeError(f"unknown spectral density model: {type(model).__name__}")
    problems = spectral.validate(model)
    if problems:
        raise ValueError("invalid spectral model: " + "; ".join(problems))
    if ctx.nbar < 0.0:
        raise ValueError("nbar must be non-negative")

    if isinstance(model, spectral.Flat):
        if ctx.delta != 0.0:
            raise ValueError("flat baths have no centre frequency to detune from")
        return _bundle(_constant(0.5 * model.kappa * ctx.nbar),
                       _constant(0.5 * model.kappa * (ctx.nbar + 1.0)))

    if isinstance(model, (spectral.SingleLorentzian, spectral.DoubleLorentzian,
                          spectral.BandGapLorentzian)):
        terms = _lorentzian_terms(model)
        if ctx.nbar == 0.0:
            def beta_fn(t, _terms=terms, _d=ctx.delta):
                return sum(_beta0_single(a, g, _d, t) for a, g in _terms)
            return _bundle(_constant(0j), beta_fn)

        def alpha_fn(t, _terms=terms, _ctx=ctx):
            return sum(alpha_beta_finite_T_lorentzian(a, g, _ctx.delta, _ctx.nbar,
                                                      _ctx.omega_c, t)[0]
                       for a, g in _terms)

        def beta_fn(t, _terms=terms, _ctx=ctx):
            return sum(alpha_beta_finite_T_lorentzian(a, g, _ctx.delta, _ctx.nbar,
                                                      _ctx.omega_c, t)[1]
                       for a, g in _terms)

        return _bundle(alpha_fn, beta_fn)

    if isinstance(model, spectral.OhmicFamily):
        if ctx.nbar != 0.0:
            raise ValueError("ohmic baths are implemented at zero temperature only")
        if ctx.delta != 0.0:
            raise ValueError("the ohmic rate formula has no detuning parameter")

        def beta_fn(t, _m=model):
            # no closed form for Im beta here; the rate formula fixes only
            # the real part, so the imaginary part is set to zero
            return kappa_ohmic(_m.s, _m.alpha, _m.omega_cut, t) * (0.5 + 0j)

        return _bundle(_constant(0j), beta_fn)

    raise TypeError(f"unknown spectral density model: {type(model).__name__}")


def alpha_beta_quadrature(ctx, t, abs_tol=1e-8):
    """(alpha, beta) by direct quadrature of J(omega) against the kernel
    (exp(i(omega - omega_c)t) - 1) / (i(omega - omega_c)).

    Lorentzian shapes use the rate-normalised profile
    amp * Gamma^2 / (2 pi ((omega - centre)^2 + Gamma^2)) extended over the
    whole real line, which is the profile whose correlation function the
    closed forms integrate; ohmic and flat baths integrate over
    omega >= 0.  An adaptive pass covers the core region and
    Fourier-weighted integrals handle the oscillatory tails.  Thermal
    weighting multiplies by the constant nbar.
    """
    model = ctx.model
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0j, 0j
    tol = abs_tol / 8.0
    wc = ctx.omega_c
    t = float(t)

    def re_kernel(x):
        z = x * t
        if abs(z) < 1e-6:
            return t * (1.0 - z * z / 6.0)
        return math.sin(z) / x

    def im_kernel(x):
        z = x * t
        if abs(z) < 1e-6:
            return x * t * t * (0.5 - z * z / 24.0)
        return (1.0 - math.cos(z)) / x

    if isinstance(model, (spectral.SingleLorentzian, spectral.DoubleLorentzian,
                          spectral.BandGapLorentzian)):
        terms = _lorentzian_terms(model)
        x0 = -ctx.delta  # bath centre in the frame rotating at omega_c

        def jx(x):
            out = 0.0
            for amp, gam in terms:
                out += amp * gam * gam / (2.0 * math.pi * ((x - x0) ** 2 + gam * gam))
            return out

        cut = 1.0 + abs(x0) + 20.0 * max(g for _, g in terms)
        inner = sorted({x0, 0.0})
        re_core, _ = _si.quad(lambda x: jx(x) * re_kernel(x), -cut, cut,
                              epsabs=tol, epsrel=1e-10, limit=800, points=inner)
        im_core, _ = _si.quad(lambda x: jx(x) * im_kernel(x), -cut, cut,
                              epsabs=tol, epsrel=1e-10, limit=800, points=inner)
        re_tail, _ = _si.quad(lambda u: (jx(u) + jx(-u)) / u, cut, np.inf,
                              weight="sin", wvar=t, epsabs=tol, limit=200, limlst=300)
        im_flat, _ = _si.quad(lambda u: (jx(u) - jx(-u)) / u, cut, np.inf,
                              epsabs=tol, epsrel=1e-10, limit=400)
        im_osc, _ = _si.quad(lambda u: (jx(u) - jx(-u)) / u, cut, np.inf,
                             weight="cos", wvar=t, epsabs=tol, limit=200, limlst=300)
        beta0 = complex(re_core + re_tail, im_core + im_flat - im_osc)

    elif isinstance(model, spectral.OhmicFamily):
        def jx(x):
            return float(spectral.evaluate(model, x + wc))

        cut = 1.0
        re_core, _ = _si.quad(lambda x: jx(x) * re_kernel(x), -wc, cut,
                              epsabs=tol, epsrel=1e-10, limit=800)
        im_core, _ = _si.quad(lambda x: jx(x) * im_kernel(x), -wc, cut,
                              epsabs=tol, epsrel=1e-10, limit=800)
        re_tail, _ = _si.quad(lambda u: jx(u) / u, cut, np.inf,
                              weight="sin", wvar=t, epsabs=tol, limit=200, limlst=300)
        im_flat, _ = _si.quad(lambda u: jx(u) / u, cut, np.inf,
                              epsabs=tol, epsrel=1e-10, limit=400)
        im_osc, _ = _si.quad(lambda u: jx(u) / u, cut, np.inf,
                             weight="cos", wvar=t, epsabs=tol, limit=200, limlst=300)
        beta0 = complex(re_core + re_tail, im_core + im_flat - im_osc)

    elif isinstance(model, spectral.Flat):
        level = model.kappa / (2.0 * math.pi)
        cut = 1.0
        re_core, _ = _si.quad(lambda x: level * re_kernel(x), -wc, cut,
                              epsabs=tol, epsrel=1e-10, limit=400)
        im_core, _ = _si.quad(lambda x: level * im_kernel(x), -wc, cut,
                              epsabs=tol, epsrel=1e-10, limit=400)
        re_tail, _ = _si.quad(lambda u: level / u, cut, np.inf,
                              weight="sin", wvar=t, epsabs=tol, limit=200, limlst=300)
        im_flat = level * math.log(FLAT_IMAG_CUTOFF / cut)
        im_osc, _ = _si.quad(lambda u: level / u, cut, FLAT_IMAG_CUTOFF,
                             weight="cos", wvar=t, epsabs=tol, limit=800)
        beta0 = complex(re_core + re_tail, im_core + im_flat - im_osc)

    else:
        raise TypeError(f"unknown spectral density model: {type(model).__name__}")

    return ctx.nbar * beta0, (1.0 + ctx.nbar) * beta0


def average_rate(kappa_fn, t_end, num=2001):
    """Time average of kappa over [0, t_end] by Simpson's rule."""
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    num = max(int(num), 1001)
    if num % 2 == 0:
        num += 1
    ts = np.linspace(0.0, t_end, num)
    try:
        vals = np.asarray(kappa_fn(ts), dtype=float)
        if vals.shape != ts.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(kappa_fn(x)) for x in ts])
    return float(_si.simpson(vals, x=ts) / t_end)


class RateTable:
    """alpha, beta, kappa tabulated on a half-step grid.

    The integrator takes Runge-Kutta substeps at t, t + dt/2 and t + dt, so
    tabulating at dt/2 spacing makes every substep land on a node; off-node
    queries fall back to linear interpolation.
    """

    def __init__(self, coeffs, t_end, dt):
        if t_end <= 0.0 or dt <= 0.0:
            raise ValueError("t_end and dt must be positive")
        self.node_step = 0.5 * dt
        n = int(math.ceil(t_end / self.node_step - 1e-9))
        self.times = self.node_step * np.arange(n + 1)
        self.alpha_values = np.asarray(coeffs.alpha_fn(self.times), dtype=complex)
        self.beta_values = np.asarray(coeffs.beta_fn(self.times), dtype=complex)
        self.kappa_values = 2.0 * self.beta_values.real

    def alpha(self, t):
        return np.interp(t, self.times, self.alpha_values)

    def beta(self, t):
        return np.interp(t, self.times, self.beta_values)

    def kappa(self, t):
        out = np.interp(t, self.times, self.kappa_values)
        return float(out) if np.ndim(out) == 0 else out
