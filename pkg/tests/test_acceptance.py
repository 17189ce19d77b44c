"""End-to-end acceptance gate.

One test per criterion, split into lettered parts where a criterion
bundles independent claims.  Each test prints the measured values next
to its stated window so failures are self-explanatory.

Three parts assert stated windows that the stated parameters do not
reach; they are implemented faithfully and left failing rather than
loosened (analysis in the decisions ledger):

  - test_c03b: flat-bath death lands at 1.97, window [2.4, 3.6]
  - test_c06b: band-gap far-detuned survival 0.746, floor 0.80
  - test_c07b: ohmic survival 1.78 vs flat-bath survival 1.88, ordering
    requires the opposite
"""

import numpy as np
import pytest

from cavneg import dynamics, hilbert, nmqj, rates, spectral
from _oracles import (
    FIG3_SINGLE, FIG3_DOUBLE, FIG3_BANDGAP, FIG4_SINGLE, FIG4_DOUBLE,
    FIG6_DELTA, FIG7_SUB, FIG7_OHMIC, FIG7_SUPER, FIG8_NBAR, MARKOV_KAPPA,
    markovian_w_negativity,
)

THRESHOLD = 1e-2


def _strip(params):
    return {k: v for k, v in params.items() if k != "delta"}


def flat_model():
    return spectral.Flat(kappa=MARKOV_KAPPA)


def single_model(params):
    return spectral.SingleLorentzian(**_strip(params))


def double_model(params):
    return spectral.DoubleLorentzian(**_strip(params))


def bandgap_model(params):
    return spectral.BandGapLorentzian(**_strip(params))


def ohmic_model(params):
    return spectral.OhmicFamily(**params)


def coeffs_for(model, delta=0.0, nbar=0.0):
    return rates.coefficients_for(rates.BathContext(model, delta=delta, nbar=nbar))


def run(model, *, delta=0.0, nbar=0.0, initial="W", t_end=10.0, **kw):
    config = dynamics.EvolutionConfig(
        initial=initial, rates=coeffs_for(model, delta, nbar), t_end=t_end, **kw)
    return dynamics.negativity_series(config)


@pytest.fixture(scope="module")
def fig3_deaths():
    return {
        "markovian": run(flat_model()).death_time,
        "single": run(single_model(FIG3_SINGLE)).death_time,
        "double": run(double_model(FIG3_DOUBLE)).death_time,
        "band-gap": run(bandgap_model(FIG3_BANDGAP)).death_time,
    }


@pytest.fixture(scope="module")
def fig4_series():
    return {
        "single": run(single_model(FIG4_SINGLE), delta=FIG4_SINGLE["delta"],
                      t_end=20.0),
        "double": run(double_model(FIG4_DOUBLE), delta=FIG4_DOUBLE["delta"],
                      t_end=20.0),
    }


@pytest.fixture(scope="module")
def fig6_survival():
    out = {}
    fig6_bandgap = {k: v for k, v in FIG4_DOUBLE.items()
                    if not k.startswith("W_D")} | {"W_B1": 2.0, "W_B2": 1.0}
    for name, model in (("single", single_model(FIG4_SINGLE)),
                        ("double", double_model(FIG4_DOUBLE)),
                        ("band-gap", bandgap_model(fig6_bandgap))):
        series = run(model, delta=FIG6_DELTA, t_end=20.0)
        out[name] = series.negativity[-1] / series.negativity[0]
    return out


@pytest.fixture(scope="module")
def fig7_runs():
    return {
        "sub": run(ohmic_model(FIG7_SUB), initial="GHZ"),
        "ohmic": run(ohmic_model(FIG7_OHMIC), initial="GHZ"),
        "super": run(ohmic_model(FIG7_SUPER), initial="GHZ"),
        "markovian": run(flat_model(), initial="GHZ"),
    }


def test_c01_initial_negativities():
    n_w = hilbert.negativity(hilbert.initial_state("W"))
    n_ghz = hilbert.negativity(hilbert.initial_state("GHZ"))
    print(f"C1: N(W)={n_w:.6f} (0.9428 +- 1e-4)  N(GHZ)={n_ghz:.8f} (1 +- 1e-6)")
    assert abs(n_w - 0.9428) < 1e-4
    assert abs(n_ghz - 1.0) < 1e-6


def test_c02_average_decay_rates():
    measured = {
        "double": rates.average_rate(coeffs_for(double_model(FIG3_DOUBLE)).kappa_fn, 10.0),
        "single": rates.average_rate(coeffs_for(single_model(FIG3_SINGLE)).kappa_fn, 10.0),
        "band-gap": rates.average_rate(coeffs_for(bandgap_model(FIG3_BANDGAP)).kappa_fn, 10.0),
    }
    expected = {"double": 0.42, "single": 0.74, "band-gap": 1.37}
    print(f"C2: averages={ {k: round(v, 5) for k, v in measured.items()} } "
          f"targets={expected} (+-2%)")
    for name, target in expected.items():
        assert abs(measured[name] - target) <= 0.02 * target, name


def test_c03a_fig3_lorentzian_death_windows_and_ordering(fig3_deaths):
    d = fig3_deaths
    print(f"C3a: deaths={ {k: v for k, v in d.items()} } "
          "windows: double 8+-20%, single 5+-20%, band-gap 4+-20%; "
          "ordering double > single > band-gap > markovian")
    assert 0.8 * 8.0 <= d["double"] <= 1.2 * 8.0
    assert 0.8 * 5.0 <= d["single"] <= 1.2 * 5.0
    assert 0.8 * 4.0 <= d["band-gap"] <= 1.2 * 4.0
    assert d["double"] > d["single"] > d["band-gap"] > d["markovian"]


def test_c03b_fig3_markovian_death_window(fig3_deaths):
    death = fig3_deaths["markovian"]
    print(f"C3b: markovian death={death} window [2.4, 3.6]; the flat-bath "
          "threshold crossing sits at kappa*t = 1.9693 for this initial "
          "state and threshold, outside the stated window")
    assert 0.8 * 3.0 <= death <= 1.2 * 3.0


def test_c04_fig4_rate_extrema():
    times = np.linspace(0.0, 20.0, 40001)
    k_single = coeffs_for(single_model(FIG4_SINGLE),
                          delta=FIG4_SINGLE["delta"]).kappa_fn(times)
    k_double = coeffs_for(double_model(FIG4_DOUBLE),
                          delta=FIG4_DOUBLE["delta"]).kappa_fn(times)
    print(f"C4: single max={k_single.max():.4f} in [0.52, 0.64], "
          f"min={k_single.min():.4f} in [-0.34, -0.22]; "
          f"double max={k_double.max():.4f} in [0.25, 0.35], "
          f"min={k_double.min():.4f} in [-0.25, -0.15]")
    assert 0.52 <= k_single.max() <= 0.64
    assert -0.34 <= k_single.min() <= -0.22
    assert 0.25 <= k_double.max() <= 0.35
    assert -0.25 <= k_double.min() <= -0.15


def test_c05_revivals_lie_in_negative_rate_windows(fig4_series):
    for name, series in fig4_series.items():
        neg = series.negativity
        kappa = series.kappa
        rising = [k for k in range(len(neg) - 1) if neg[k + 1] > neg[k] + 1e-12]
        print(f"C5: {name}: {len(rising)} rising samples")
        assert rising, f"{name}: no revival found"
        for k in rising:
            window = kappa[max(0, k - 1):k + 3]
            assert window.min() < 0.0, \
                f"{name}: rise at t={series.times[k]:.3f} outside kappa<0"


def test_c06a_far_detuned_survival_single_double(fig6_survival):
    s = fig6_survival
    print(f"C6a: N(20)/N(0) single={s['single']:.4f} double={s['double']:.4f} "
          "(floors 0.80, and 0.90 for double)")
    assert s["single"] >= 0.80
    assert s["double"] >= 0.80
    assert s["double"] >= 0.90


def test_c06b_far_detuned_survival_band_gap(fig6_survival):
    ratio = fig6_survival["band-gap"]
    print(f"C6b: N(20)/N(0) band-gap={ratio:.4f} floor 0.80; the band-gap "
          "weights amplify the fast Lorentzian (2 J1 - J2), so its "
          "average rate exceeds the others and the state loses ~25%")
    assert ratio >= 0.80


def test_c07a_ohmic_death_windows(fig7_runs):
    sub = fig7_runs["sub"].death_time
    ohmic = fig7_runs["ohmic"].death_time
    super_final = fig7_runs["super"].negativity[-1]
    print(f"C7a: sub death={sub} in 0.5+-50%; ohmic death={ohmic} in 2+-30%; "
          f"super N(10)={super_final:.4f} > 1e-2")
    assert 0.25 <= sub <= 0.75
    assert 1.4 <= ohmic <= 2.6
    assert super_final > 1e-2


def test_c07b_ohmic_survival_ordering(fig7_runs):
    def survival(series):
        return np.inf if series.death_time is None else series.death_time

    s = {name: survival(series) for name, series in fig7_runs.items()}
    print(f"C7b: survivals={s} ordering super > ohmic > markovian > sub; "
          "measured ohmic entanglement dies ~5% before the flat-bath one, "
          "so the middle comparison fails as stated")
    assert s["super"] > s["ohmic"], "super vs ohmic"
    assert s["ohmic"] > s["markovian"], "ohmic vs markovian"
    assert s["markovian"] > s["sub"], "markovian vs sub"


def test_c08_finite_temperature_deaths(fig3_deaths):
    warm = {
        "single": run(single_model(FIG3_SINGLE), nbar=FIG8_NBAR).death_time,
        "double": run(double_model(FIG3_DOUBLE), nbar=FIG8_NBAR).death_time,
        "band-gap": run(bandgap_model(FIG3_BANDGAP), nbar=FIG8_NBAR).death_time,
    }
    cold_double = fig3_deaths["double"]
    print(f"C8: warm deaths={warm}; double target 5+-20% vs cold double="
          f"{cold_double} in [6, 8]; warm < cold for every model")
    assert 0.8 * 5.0 <= warm["double"] <= 1.2 * 5.0
    assert 6.0 <= cold_double <= 8.0
    for name in warm:
        assert warm[name] < fig3_deaths[name], name


def test_c09_markovian_closed_form_negativity():
    series = run(flat_model(), t_end=5.0)
    picks = np.round(np.linspace(10, len(series.times) - 1, 50)).astype(int)
    worst = float(np.max(np.abs(
        series.negativity[picks]
        - markovian_w_negativity(MARKOV_KAPPA * series.times[picks]))))
    at_two = series.negativity[np.argmin(np.abs(series.times - 2.0))]
    print(f"C9: worst |N - closed form| over 50 samples = {worst:.3e} "
          f"(<= 1e-6); N(2)={at_two:.6f} (~0.0094)")
    assert worst <= 1e-6
    assert abs(at_two - 0.0094) < 5e-5


def test_c10_oracle_equivalences():
    rng = np.random.default_rng(2468)
    worst_rhs = 0.0
    for _ in range(200):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = 0.5 * (m + m.conj().T)
        alpha = complex(*rng.standard_normal(2))
        beta = complex(*rng.standard_normal(2))
        xi12, xi23 = rng.standard_normal(2)
        a = dynamics.rhs_superoperator(rho, alpha, beta, xi12, xi23)
        b = dynamics.rhs_elementwise(rho, alpha, beta, xi12, xi23)
        worst_rhs = max(worst_rhs, float(np.max(np.abs(a - b))))

    # Lorentzian family only: the flat bath's constant rate is the
    # white-noise idealization (its half-line integral has a documented
    # finite-time transient) and the ohmic normalization mismatch is the
    # other logged exception; both get their own dual-route tests in
    # test_rates.
    worst_quad = 0.0
    cases = [
        (rates.BathContext(single_model(FIG3_SINGLE)), (0.5, 2.0, 10.0)),
        (rates.BathContext(double_model(FIG3_DOUBLE)), (0.5, 2.0, 10.0)),
        (rates.BathContext(single_model(FIG4_SINGLE), delta=1.0), (0.5, 2.0, 10.0)),
        (rates.BathContext(double_model(FIG4_DOUBLE), delta=1.0), (0.5, 10.0)),
        (rates.BathContext(bandgap_model(FIG3_BANDGAP)), (0.5, 10.0)),
        (rates.BathContext(single_model(FIG4_SINGLE), delta=5.0), (2.0,)),
    ]
    for ctx, ts in cases:
        closed = rates.coefficients_for(ctx)
        for t in ts:
            _, beta_q = rates.alpha_beta_quadrature(ctx, t)
            worst_quad = max(worst_quad,
                             abs(2.0 * beta_q.real - closed.kappa_fn(t)))

    worst_lind = 0.0
    kappa, nbar = 0.8, 0.35
    const = rates.coefficients_for(
        rates.BathContext(spectral.Flat(kappa=kappa), nbar=nbar))
    for _ in range(25):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = 0.5 * (m + m.conj().T)
        a = dynamics.rhs_superoperator(rho, const.alpha_fn(0.3), const.beta_fn(0.3))
        b = dynamics.lindblad_markovian_rhs(rho, kappa, nbar)
        worst_lind = max(worst_lind, float(np.max(np.abs(a - b))))

    print(f"C10: rhs pair {worst_rhs:.3e} (<=1e-12); "
          f"kappa vs quadrature {worst_quad:.3e} (<=1e-4, flat/ohmic are "
          f"the logged exceptions); "
          f"lindblad reduction {worst_lind:.3e} (<=1e-12)")
    assert worst_rhs <= 1e-12
    assert worst_quad <= 1e-4
    assert worst_lind <= 1e-12


def test_c11_nmqj_trace_distance():
    n_traj = 10000
    bound = 3.0 / np.sqrt(n_traj)
    runs = [
        ("markovian W", flat_model(), 0.0, "W", 5.0),
        ("fig4 W", single_model(FIG4_SINGLE), FIG4_SINGLE["delta"], "W", 20.0),
        ("fig4 GHZ", single_model(FIG4_SINGLE), FIG4_SINGLE["delta"], "GHZ", 20.0),
    ]
    for label, model, delta, initial, t_end in runs:
        config = dynamics.EvolutionConfig(
            initial=initial, rates=coeffs_for(model, delta), t_end=t_end)
        result = nmqj.run_ensemble(config, n_traj=n_traj, seed=20260814)
        reference = dynamics.integrate(config)
        worst = max(nmqj.trace_distance(a, b)
                    for (_, a), (_, b) in zip(result, reference))
        neg_jumps = int(result.negative_jumps[-1])
        print(f"C11: {label}: max distance={worst:.4f} (< {bound}); "
              f"jumps +{int(result.positive_jumps[-1])} -{neg_jumps}")
        assert worst < bound, label
        if delta == 0.0:
            # flat bath: the rate never turns negative
            assert neg_jumps == 0, label
        else:
            assert neg_jumps > 0, label


def test_c12_hopping_oscillations():
    series = run(flat_model(), xi12=5.0, xi23=5.0, t_end=5.0)
    neg = series.negativity
    times = series.times
    early = times < 2.0
    diffs = np.diff(neg[early])
    extrema = int(np.sum(diffs[:-1] * diffs[1:] < 0.0))
    late_peak = float(np.max(neg[times > 2.0]))
    print(f"C12: {extrema} local extrema before t=2 (>=3); "
          f"max N after t=2 is {late_peak:.4e} (> 0)")
    assert extrema >= 3
    assert late_peak > 0.0
