"""Command line runner for the cavity-negativity simulations.

Subcommands
-----------
simulate       integrate one scenario from a JSON config, write negativity CSV
rates          tabulate alpha/beta/kappa for the scenario's bath
figure         expand a named preset into its per-curve scenarios and run them
compare-nmqj   run the jump unraveling against the master equation

Config documents are strict JSON: unknown keys are rejected and reported
with their JSON path (e.g. "$.bath.gama").  Scenario schema, with defaults:

    {
      "name": "scenario",
      "initial_state": "W",                     # or "GHZ"
      "bath": {"model": "flat", "kappa": 1.0,   # model-specific parameters
               "delta": 0.0, "nbar": 0.0},
      "solver": {"kind": "eme",                 # eme | nmqj | lindblad
                 "n_traj": 10000, "seed": 0},
      "hopping": {"xi12": 0.0, "xi23": 0.0},
      "grid": {"t_end": 10.0, "dt": 0.001, "sample_every": 10},
      "outputs": {"csv_path": "", "svg_path": "", "threshold": 0.01}
    }

Bath models and their parameters: flat (kappa); single_lorentzian
(alpha_L, Gamma, omega_bc); double_lorentzian (alpha_L1, alpha_L2,
Gamma1, Gamma2, W_D1, W_D2, omega_bc); band_gap_lorentzian (alpha_L1,
alpha_L2, Gamma1, Gamma2, W_B1, W_B2, omega_bc); ohmic (s, alpha,
omega_cut).  The nmqj solver needs nbar = 0.  The lindblad solver is the
constant-rate reference and only accepts the flat bath (where it is
exact).

CSV columns (12 significant digits, LF endings, written atomically):
  simulate:     t,negativity,kappa,rho_11,...,rho_88
  rates:        t,kappa,alpha_re,alpha_im,beta_re,beta_im
  compare-nmqj: t,trace_distance_to_eme,negativity_nmqj,negativity_eme,
                n_negative_jumps,n_positive_jumps

Relative output paths land in CAVNEG_OUT_DIR when that is set.  Exit
codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

import argparse
import importlib.resources
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dynamics, hilbert, nmqj, rates, spectral

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_MODEL_PARAMS = {
    "flat": ("kappa",),
    "single_lorentzian": ("alpha_L", "Gamma", "omega_bc"),
    "double_lorentzian": ("alpha_L1", "alpha_L2", "Gamma1", "Gamma2",
                          "W_D1", "W_D2", "omega_bc"),
    "band_gap_lorentzian": ("alpha_L1", "alpha_L2", "Gamma1", "Gamma2",
                            "W_B1", "W_B2", "omega_bc"),
    "ohmic": ("s", "alpha", "omega_cut"),
}

_MODEL_TYPES = {
    "flat": spectral.Flat,
    "single_lorentzian": spectral.SingleLorentzian,
    "double_lorentzian": spectral.DoubleLorentzian,
    "band_gap_lorentzian": spectral.BandGapLorentzian,
    "ohmic": spectral.OhmicFamily,
}


class ConfigError(ValueError):
    """A config document (or cross-field constraint) is invalid."""


@dataclass
class BathSpec:
    model: str
    params: dict
    delta: float = 0.0
    nbar: float = 0.0


@dataclass
class SolverSpec:
    kind: str = "eme"
    n_traj: int = 10000
    seed: int = 0


@dataclass
class HoppingSpec:
    xi12: float = 0.0
    xi23: float = 0.0


@dataclass
class GridSpec:
    t_end: float = 10.0
    dt: float = 1e-3
    sample_every: int = 10


@dataclass
class OutputSpec:
    csv_path: str = ""
    svg_path: str = ""
    threshold: float = 1e-2


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    initial_state: str = "W"
    bath: BathSpec = None
    solver: SolverSpec = field(default_factory=SolverSpec)
    hopping: HoppingSpec = field(default_factory=HoppingSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)


# ---------------------------------------------------------------------------
# config parsing

def _expect_object(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return dict(value)


def _take_number(obj, key, path, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}: required key is missing")
        return default
    value = obj.pop(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(value)


def _take_int(obj, key, path, default=None):
    if key not in obj:
        return default
    value = obj.pop(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    return value


def _take_str(obj, key, path, default=None, required=False, choices=None):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}: required key is missing")
        return default
    value = obj.pop(key)
    if not isinstance(value, str):
        raise ConfigError(f"{path}.{key}: expected a string")
    if choices is not None and value not in choices:
        raise ConfigError(f"{path}.{key}: must be one of {', '.join(choices)}")
    return value


def _reject_unknown(obj, path):
    if obj:
        key = sorted(obj)[0]
        raise ConfigError(f"{path}.{key}: unknown key")


def _parse_bath(doc, path):
    obj = _expect_object(doc, path)
    model = _take_str(obj, "model", path, required=True,
                      choices=tuple(_MODEL_PARAMS))
    delta = _take_number(obj, "delta", path, default=0.0)
    nbar = _take_number(obj, "nbar", path, default=0.0)
    if nbar < 0.0:
        raise ConfigError(f"{path}.nbar: must be non-negative")
    params = {}
    for key in _MODEL_PARAMS[model]:
        if key in obj:
            params[key] = _take_number(obj, key, path)
    _reject_unknown(obj, path)
    return BathSpec(model=model, params=params, delta=delta, nbar=nbar)


def parse_config_dict(doc, path="$"):
    """Validate one scenario document; raises ConfigError with JSON paths."""
    obj = _expect_object(doc, path)
    name = _take_str(obj, "name", path, default="scenario")
    initial = _take_str(obj, "initial_state", path, default="W",
                        choices=("W", "GHZ"))
    if "bath" not in obj:
        raise ConfigError(f"{path}.bath: required key is missing")
    bath = _parse_bath(obj.pop("bath"), f"{path}.bath")

    solver = SolverSpec()
    if "solver" in obj:
        sub = _expect_object(obj.pop("solver"), f"{path}.solver")
        solver.kind = _take_str(sub, "kind", f"{path}.solver", default="eme",
                                choices=("eme", "nmqj", "lindblad"))
        solver.n_traj = _take_int(sub, "n_traj", f"{path}.solver", default=10000)
        solver.seed = _take_int(sub, "seed", f"{path}.solver", default=0)
        _reject_unknown(sub, f"{path}.solver")
        if solver.n_traj < 1:
            raise ConfigError(f"{path}.solver.n_traj: must be at least 1")

    hopping = HoppingSpec()
    if "hopping" in obj:
        sub = _expect_object(obj.pop("hopping"), f"{path}.hopping")
        hopping.xi12 = _take_number(sub, "xi12", f"{path}.hopping", default=0.0)
        hopping.xi23 = _take_number(sub, "xi23", f"{path}.hopping", default=0.0)
        _reject_unknown(sub, f"{path}.hopping")

    if "grid" not in obj:
        raise ConfigError(f"{path}.grid: required key is missing")
    sub = _expect_object(obj.pop("grid"), f"{path}.grid")
    grid = GridSpec()
    grid.t_end = _take_number(sub, "t_end", f"{path}.grid", default=10.0)
    grid.dt = _take_number(sub, "dt", f"{path}.grid", default=1e-3)
    grid.sample_every = _take_int(sub, "sample_every", f"{path}.grid", default=10)
    _reject_unknown(sub, f"{path}.grid")
    if grid.t_end <= 0.0:
        raise ConfigError(f"{path}.grid.t_end: must be positive")
    if grid.dt <= 0.0:
        raise ConfigError(f"{path}.grid.dt: must be positive")
    if grid.sample_every < 1:
        raise ConfigError(f"{path}.grid.sample_every: must be at least 1")

    outputs = OutputSpec()
    if "outputs" in obj:
        sub = _expect_object(obj.pop("outputs"), f"{path}.outputs")
        outputs.csv_path = _take_str(sub, "csv_path", f"{path}.outputs", default="")
        outputs.svg_path = _take_str(sub, "svg_path", f"{path}.outputs", default="")
        outputs.threshold = _take_number(sub, "threshold", f"{path}.outputs",
                                         default=1e-2)
        _reject_unknown(sub, f"{path}.outputs")
        if outputs.threshold <= 0.0:
            raise ConfigError(f"{path}.outputs.threshold: must be positive")

    _reject_unknown(obj, path)

    if solver.kind == "nmqj" and bath.nbar != 0.0:
        raise ConfigError(f"{path}.solver.kind: the nmqj solver requires a "
                          f"zero-temperature bath, but {path}.bath.nbar = {bath.nbar}")
    if solver.kind == "lindblad" and bath.model != "flat":
        raise ConfigError(f"{path}.solver.kind: the lindblad solver only "
                          "accepts the flat bath (where it is exact)")
    return ScenarioConfig(name=name, initial_state=initial, bath=bath,
                          solver=solver, hopping=hopping, grid=grid,
                          outputs=outputs)


def parse_config(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})")
    return parse_config_dict(doc)


# ---------------------------------------------------------------------------
# scenario -> engine objects

def _spectral_model(bath):
    try:
        return _MODEL_TYPES[bath.model](**bath.params)
    except TypeError as exc:
        raise ConfigError(f"$.bath: {exc}")


def _coefficients(bath):
    model = _spectral_model(bath)
    try:
        ctx = rates.BathContext(model, delta=bath.delta, nbar=bath.nbar)
        return rates.coefficients_for(ctx)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"$.bath: {exc}")


def _evolution_config(scenario, coeffs):
    return dynamics.EvolutionConfig(
        initial=scenario.initial_state,
        rates=coeffs,
        xi12=scenario.hopping.xi12,
        xi23=scenario.hopping.xi23,
        t_end=scenario.grid.t_end,
        dt=scenario.grid.dt,
        sample_every=scenario.grid.sample_every,
        negativity_threshold=scenario.outputs.threshold,
    )


# ---------------------------------------------------------------------------
# output writing

def _resolve_path(path):
    base = os.environ.get("CAVNEG_OUT_DIR", "")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cavneg-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value):
    return f"{value:.11e}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _svg_plot(path, title, times, values, ylabel):
    width, height = 800, 500
    left, right, top, bottom = 70.0, 770.0, 45.0, 450.0
    t_lo, t_hi = float(times[0]), float(times[-1])
    if t_hi <= t_lo:
        t_hi = t_lo + 1.0
    v_lo = min(0.0, float(np.min(values)))
    v_hi = max(float(np.max(values)), 1e-12)
    v_hi *= 1.05

    def sx(t):
        return left + (t - t_lo) / (t_hi - t_lo) * (right - left)

    def sy(v):
        return bottom - (v - v_lo) / (v_hi - v_lo) * (bottom - top)

    points = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(times, values))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="25" font-family="sans-serif" font-size="16">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{left}" y="{bottom + 20}" font-family="sans-serif" font-size="12">{t_lo:g}</text>',
        f'<text x="{right - 20}" y="{bottom + 20}" font-family="sans-serif" font-size="12">{t_hi:g}</text>',
        f'<text x="{left - 60}" y="{sy(v_hi / 1.05):.2f}" font-family="sans-serif" font-size="12">{v_hi / 1.05:.3g}</text>',
        f'<text x="{left - 60}" y="{bottom}" font-family="sans-serif" font-size="12">{v_lo:g}</text>',
        f'<text x="{(left + right) / 2:.0f}" y="{bottom + 35}" font-family="sans-serif" font-size="13">t</text>',
        f'<text x="15" y="{(top + bottom) / 2:.0f}" font-family="sans-serif" font-size="13">{ylabel}</text>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>',
        "</svg>",
    ]
    _atomic_write(path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# scenario running

def _death_time(times, negativity, threshold):
    for t, value in zip(times, negativity):
        if value < threshold:
            return float(t)
    return None


def run_scenario(scenario, jobs=1):
    """Run one scenario end to end; returns a printable summary dict."""
    coeffs = _coefficients(scenario.bath)
    config = _evolution_config(scenario, coeffs)
    if scenario.solver.kind in ("eme", "lindblad"):
        series = dynamics.negativity_series(config)
        times = series.times
        negativity = series.negativity
        kappa = series.kappa
        populations = series.populations
        death = series.death_time
    else:
        result = nmqj.run_ensemble(config, scenario.solver.n_traj,
                                   scenario.solver.seed, jobs=jobs)
        times = np.array([t for t, _ in result])
        negativity = np.array([hilbert.negativity(rho) for _, rho in result])
        kappa = np.real(np.asarray(coeffs.kappa_fn(times), dtype=complex))
        populations = np.array([np.diag(rho).real for _, rho in result])
        death = _death_time(times, negativity, scenario.outputs.threshold)

    csv_path = _resolve_path(scenario.outputs.csv_path or f"{scenario.name}.csv")
    header = (["t", "negativity", "kappa"]
              + [f"rho_{j}{j}" for j in range(1, 9)])
    rows = []
    for k in range(len(times)):
        row = [_fmt(times[k]), _fmt(negativity[k]), _fmt(kappa[k])]
        row += [_fmt(populations[k][j]) for j in range(8)]
        rows.append(row)
    _write_csv(csv_path, header, rows)

    if scenario.outputs.svg_path:
        _svg_plot(_resolve_path(scenario.outputs.svg_path), scenario.name,
                  times, negativity, "negativity")

    average_kappa = rates.average_rate(coeffs.kappa_fn, scenario.grid.t_end)
    return {
        "name": scenario.name,
        "csv_path": csv_path,
        "death_time": death,
        "average_kappa": float(average_kappa),
    }


def _run_scenario_worker(scenario):
    return run_scenario(scenario, jobs=1)


def _print_summary(summary):
    death = "none" if summary["death_time"] is None else f"{summary['death_time']:.6f}"
    print(f"{summary['name']}: death_time={death} "
          f"average_kappa={summary['average_kappa']:.6f} "
          f"csv={summary['csv_path']}")


# ---------------------------------------------------------------------------
# presets

def _preset_scenario(name, initial, model, params, *, delta=0.0, nbar=0.0,
                     xi12=0.0, xi23=0.0, t_end=10.0):
    return ScenarioConfig(
        name=name,
        initial_state=initial,
        bath=BathSpec(model=model, params=dict(params), delta=delta, nbar=nbar),
        solver=SolverSpec(),
        hopping=HoppingSpec(xi12=xi12, xi23=xi23),
        grid=GridSpec(t_end=t_end, dt=1e-3, sample_every=10),
        outputs=OutputSpec(csv_path=f"{name}.csv", svg_path=f"{name}.svg",
                           threshold=1e-2),
    )


_FLAT = ("flat", {"kappa": 1.0})
_L3_SINGLE = ("single_lorentzian", {"alpha_L": 2.0, "Gamma": 0.1})
_L3_DOUBLE = ("double_lorentzian", {"alpha_L1": 2.0, "alpha_L2": 2.0,
                                    "Gamma1": 0.1, "Gamma2": 0.01,
                                    "W_D1": 0.5, "W_D2": 0.5})
_L3_BANDGAP = ("band_gap_lorentzian", {"alpha_L1": 2.0, "alpha_L2": 2.0,
                                       "Gamma1": 0.1, "Gamma2": 0.01,
                                       "W_B1": 2.0, "W_B2": 1.0})
_L4_SINGLE = ("single_lorentzian", {"alpha_L": 6.0, "Gamma": 0.1})
_L4_DOUBLE = ("double_lorentzian", {"alpha_L1": 6.0, "alpha_L2": 6.0,
                                    "Gamma1": 0.1, "Gamma2": 0.01,
                                    "W_D1": 0.5, "W_D2": 0.5})
_L4_BANDGAP = ("band_gap_lorentzian", {"alpha_L1": 6.0, "alpha_L2": 6.0,
                                       "Gamma1": 0.1, "Gamma2": 0.01,
                                       "W_B1": 2.0, "W_B2": 1.0})
_L5_SINGLE = ("single_lorentzian", {"alpha_L": 2.0, "Gamma": 0.1})
_L5_DOUBLE = ("double_lorentzian", {"alpha_L1": 2.0, "alpha_L2": 2.0,
                                    "Gamma1": 0.1, "Gamma2": 0.01,
                                    "W_D1": 0.5, "W_D2": 0.5})
_OHMIC_SUB = ("ohmic", {"s": 0.5, "alpha": 1.0, "omega_cut": 15.0})
_OHMIC_PLAIN = ("ohmic", {"s": 1.0, "alpha": 0.6, "omega_cut": 10.0})
_OHMIC_SUPER = ("ohmic", {"s": 3.0, "alpha": 0.1, "omega_cut": 2.0})


def expand_preset(preset):
    """Expand a preset id into its per-curve scenarios."""
    S = _preset_scenario
    if preset == "fig2a":
        return [S(f"fig2a-nbar-{n:g}", "W", *_FLAT, nbar=n, t_end=5.0)
                for n in (0.0, 0.1, 0.5)]
    if preset == "fig2b":
        return [S(f"fig2b-nbar-{n:g}", "GHZ", *_FLAT, nbar=n, t_end=5.0)
                for n in (0.0, 0.1, 0.5)]
    if preset == "fig2c":
        return [S("fig2c-hopping", "W", *_FLAT, xi12=5.0, xi23=5.0, t_end=5.0)]
    if preset == "fig3":
        return [
            S("fig3-markovian", "W", *_FLAT),
            S("fig3-single", "W", *_L3_SINGLE),
            S("fig3-double", "W", *_L3_DOUBLE),
            S("fig3-band-gap", "W", *_L3_BANDGAP),
        ]
    if preset == "fig4":
        return [
            S("fig4-single", "W", *_L4_SINGLE, delta=1.0, t_end=20.0),
            S("fig4-double", "W", *_L4_DOUBLE, delta=1.0, t_end=20.0),
        ]
    if preset == "fig5":
        return [
            S("fig5-single", "W", *_L5_SINGLE, delta=1.0, t_end=20.0),
            S("fig5-double", "W", *_L5_DOUBLE, delta=1.0, t_end=20.0),
        ]
    if preset == "fig6":
        return [
            S("fig6-single", "W", *_L4_SINGLE, delta=5.0, t_end=20.0),
            S("fig6-double", "W", *_L4_DOUBLE, delta=5.0, t_end=20.0),
            S("fig6-band-gap", "W", *_L4_BANDGAP, delta=5.0, t_end=20.0),
        ]
    if preset == "fig7":
        return [
            S("fig7-sub-ohmic", "GHZ", *_OHMIC_SUB),
            S("fig7-ohmic", "GHZ", *_OHMIC_PLAIN),
            S("fig7-super-ohmic", "GHZ", *_OHMIC_SUPER),
            S("fig7-markovian", "GHZ", *_FLAT),
        ]
    if preset == "fig8":
        return [
            S("fig8-single", "W", *_L3_SINGLE, nbar=0.1),
            S("fig8-double", "W", *_L3_DOUBLE, nbar=0.1),
            S("fig8-band-gap", "W", *_L3_BANDGAP, nbar=0.1),
        ]
    raise ConfigError(f"unknown preset: {preset}")


PRESET_IDS = ("fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5", "fig6",
              "fig7", "fig8")


def load_manifest():
    """The checked-in preset manifest (guards expand_preset against edits)."""
    data = importlib.resources.files("cavneg").joinpath("figure_manifest.json")
    return json.loads(data.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# subcommands

def _apply_overrides(scenario, args):
    if getattr(args, "state", None):
        scenario.initial_state = args.state
    if getattr(args, "seed", None) is not None:
        scenario.solver.seed = args.seed
    if getattr(args, "threshold", None) is not None:
        if args.threshold <= 0.0:
            raise ConfigError("--threshold: must be positive")
        scenario.outputs.threshold = args.threshold
    return scenario


def cmd_simulate(args):
    scenario = _apply_overrides(parse_config(args.config), args)
    _print_summary(run_scenario(scenario, jobs=args.jobs))
    return EXIT_OK


def cmd_rates(args):
    scenario = parse_config(args.config)
    coeffs = _coefficients(scenario.bath)
    step = scenario.grid.dt * scenario.grid.sample_every
    n = int(round(scenario.grid.t_end / step))
    times = step * np.arange(n + 1)
    alpha = np.asarray(coeffs.alpha_fn(times), dtype=complex)
    beta = np.asarray(coeffs.beta_fn(times), dtype=complex)
    kappa = 2.0 * beta.real
    csv_path = _resolve_path(scenario.outputs.csv_path
                             or f"{scenario.name}-rates.csv")
    header = ["t", "kappa", "alpha_re", "alpha_im", "beta_re", "beta_im"]
    rows = [[_fmt(times[k]), _fmt(kappa[k]),
             _fmt(alpha[k].real), _fmt(alpha[k].imag),
             _fmt(beta[k].real), _fmt(beta[k].imag)]
            for k in range(len(times))]
    _write_csv(csv_path, header, rows)
    average = rates.average_rate(coeffs.kappa_fn, scenario.grid.t_end)
    print(f"{scenario.name}: kappa average={average:.6f} "
          f"max={kappa.max():.6f} min={kappa.min():.6f} csv={csv_path}")
    return EXIT_OK


def cmd_figure(args):
    scenarios = [_apply_overrides(s, args) for s in expand_preset(args.preset)]
    if args.jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(scenarios))) as pool:
            summaries = list(pool.map(_run_scenario_worker, scenarios))
    else:
        summaries = [run_scenario(s, jobs=args.jobs) for s in scenarios]
    for summary in summaries:
        _print_summary(summary)
    return EXIT_OK


def cmd_compare_nmqj(args):
    scenario = _apply_overrides(parse_config(args.config), args)
    coeffs = _coefficients(scenario.bath)
    config = _evolution_config(scenario, coeffs)
    result = nmqj.run_ensemble(config, scenario.solver.n_traj,
                               scenario.solver.seed, jobs=args.jobs)
    reference = dynamics.integrate(config)
    rows = []
    distances = []
    for k, ((t, rho_mc), (_, rho_ex)) in enumerate(zip(result, reference)):
        dist = nmqj.trace_distance(rho_mc, rho_ex)
        distances.append(dist)
        rows.append([_fmt(t), _fmt(dist),
                     _fmt(hilbert.negativity(rho_mc)),
                     _fmt(hilbert.negativity(rho_ex)),
                     str(int(result.negative_jumps[k])),
                     str(int(result.positive_jumps[k]))])
    header = ["t", "trace_distance_to_eme", "negativity_nmqj",
              "negativity_eme", "n_negative_jumps", "n_positive_jumps"]
    csv_path = _resolve_path(scenario.outputs.csv_path
                             or f"{scenario.name}-compare.csv")
    _write_csv(csv_path, header, rows)
    print(f"{scenario.name}: max_trace_distance={max(distances):.6f} "
          f"n_traj={scenario.solver.n_traj} csv={csv_path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cavneg",
        description="Tripartite cavity negativity simulations "
                    "(see module docstring for the config schema)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--state", choices=("W", "GHZ"),
                       help="override the initial state")
        p.add_argument("--seed", type=int, help="override the solver seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for trajectories/preset curves")
        p.add_argument("--threshold", type=float,
                       help="override the negativity death threshold")

    p = sub.add_parser("simulate", help="integrate one scenario, write CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rates", help="tabulate bath rate coefficients")
    p.add_argument("--config", required=True, help="JSON scenario file")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("figure", help="run every curve of a named preset")
    p.add_argument("--preset", required=True, choices=PRESET_IDS)
    common(p, config_required=False)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("compare-nmqj",
                       help="jump unraveling vs master equation")
    common(p)
    p.set_defaults(func=cmd_compare_nmqj)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (dynamics.IntegrationError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
