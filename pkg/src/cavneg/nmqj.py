"""Quantum-jump unraveling of the master equation at zero temperature.

Between jumps every trajectory drifts as dpsi/dt = -beta(t) sum_j n_j psi:
the real part of beta is half the decay rate and damps the excited
amplitudes, the imaginary part is the bath-induced level shift that
rotates coherences between different total-excitation sectors (dropping
it would desynchronize the GHZ |000><111| phase from the master
equation).  With a positive rate a trajectory may lose an excitation
through one of the three cavity channels, while during negative-rate
windows a jumped trajectory can be restored to its deterministically
evolved pre-jump ancestor with probability weighted by the ensemble
counts N_target / N_source.  Averaging |psi><psi| over the ensemble
reproduces the density matrix of `dynamics` up to Monte Carlo noise
(about 1/sqrt(n_traj)).

Trajectories that share the same ordered sequence of jump channels also
share their pure state here (all jump targets are basis states and the
drift is diagonal), so the engine propagates one representative per
fingerprint and integer counts instead of 10^4 separate states.  The
invariant backing this is re-checked at every sample time.
"""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from . import hilbert
from .rates import RateTable

# occupation of each cavity per basis state, and the total
_OCC = np.array([[hilbert.occupation_number(k, cav) for k in range(8)]
                 for cav in (1, 2, 3)], dtype=float)
_NTOT = _OCC.sum(axis=0)

_PROB_WARN = 0.1


@dataclass(frozen=True)
class JumpChannel:
    """One decay channel: a cavity's annihilation operator plus the shared
    signed rate function."""

    cavity: int
    rate_fn: Callable

    @property
    def operator(self):
        return hilbert.annihilation(self.cavity)


def channels_for(kappa_fn):
    return tuple(JumpChannel(cavity, kappa_fn) for cavity in (1, 2, 3))


@dataclass
class Trajectory:
    state: np.ndarray
    history: Tuple = ()          # ((jump time, cavity), ...)
    alive: bool = True

    def fingerprint(self):
        return tuple(cavity for _, cavity in self.history)


@dataclass
class EnsembleSnapshot:
    """Start-of-step bookkeeping: fingerprint -> (representative state, count)."""

    groups: dict
    total: int

    def count(self, fingerprint):
        if fingerprint not in self.groups:
            raise ValueError(f"unknown trajectory group {fingerprint!r}")
        return self.groups[fingerprint][1]

    def state(self, fingerprint):
        return self.groups[fingerprint][0]


def nonhermitian_step(state, channels, t, dt, shift_fn=None):
    """One RK4 step of the no-jump drift; returns the unnormalized state.

    shift_fn, when given, is the bath-induced level shift (the imaginary
    part of beta) applied as -i * shift * n_j per mode on top of the decay.
    """
    state = np.asarray(state, dtype=complex)

    def drift(time):
        total = np.zeros(8, dtype=complex)
        for ch in channels:
            total = total + ch.rate_fn(time) * _OCC[ch.cavity - 1]
        total = -0.5 * total
        if shift_fn is not None:
            total = total - 1j * shift_fn(time) * _NTOT
        return total

    d1 = drift(t)
    d2 = drift(t + 0.5 * dt)
    d4 = drift(t + dt)
    k1 = d1 * state
    k2 = d2 * (state + 0.5 * dt * k1)
    k3 = d2 * (state + 0.5 * dt * k2)
    k4 = d4 * (state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if np.vdot(out, out).real < 1e-12:
        raise RuntimeError("trajectory norm collapsed below 1e-12")
    return out


def _mean_occupation(state, cavity):
    abs2 = np.abs(state) ** 2
    total = abs2.sum()
    return float((_OCC[cavity - 1] * abs2).sum() / total)


def positive_jump_probability(traj, channel, t, dt):
    """gamma(t) <n_j> dt for one candidate decay, valid while gamma > 0."""
    gamma = channel.rate_fn(t)
    if gamma <= 0.0:
        raise ValueError("positive jump queried outside a positive rate cycle")
    p = gamma * _mean_occupation(traj.state, channel.cavity) * dt
    if p > _PROB_WARN:
        warnings.warn("per-step jump probability above 0.1; reduce dt",
                      RuntimeWarning, stacklevel=2)
    return min(p, 1.0)


def apply_positive_jump(traj, channel, t):
    post = channel.operator @ traj.state
    norm = np.linalg.norm(post)
    if norm < 1e-12:
        raise ValueError(f"channel {channel.cavity} annihilates this state")
    return Trajectory(state=post / norm,
                      history=traj.history + ((t, channel.cavity),),
                      alive=traj.alive)


def negative_jump_probability(source, target, channel, t, dt, counts):
    """(N_target / N_source) |gamma(t)| <n_j>_target dt during gamma < 0.

    The reversal is defined only between a group and the ancestor obtained
    by undoing its most recent jump, and that jump must have used this
    channel; anything else is a bookkeeping violation.
    """
    gamma = channel.rate_fn(t)
    if gamma >= 0.0:
        raise ValueError("negative jump queried outside a negative rate cycle")
    if not source.history:
        raise ValueError("source group has no jump to reverse")
    if source.history[-1][1] != channel.cavity:
        raise ValueError("source group's last jump used a different channel")
    if tuple(target.history) != tuple(source.history[:-1]):
        raise ValueError("target is not the single-jump ancestor of the source")
    n_source = counts.count(source.fingerprint())
    n_target = counts.count(target.fingerprint())
    if n_source == 0 or n_target == 0:
        return 0.0
    p = (n_target / n_source) * abs(gamma) \
        * _mean_occupation(target.state, channel.cavity) * dt
    if p > _PROB_WARN:
        warnings.warn("per-step jump probability above 0.1; reduce dt",
                      RuntimeWarning, stacklevel=2)
    return min(p, 1.0)


def apply_negative_jump(traj, ancestor_state):
    if not traj.history:
        raise ValueError("trajectory has no jump to reverse")
    return Trajectory(state=np.array(ancestor_state, copy=True),
                      history=traj.history[:-1], alive=traj.alive)


def trace_distance(rho_a, rho_b):
    """(1/2) sum |eigenvalues| of the (Hermitian) difference."""
    return 0.5 * float(np.sum(np.abs(hilbert.hermitian_eigenvalues(rho_a - rho_b))))


class EnsembleResult(list):
    """List of (t, averaged rho) samples, with cumulative jump counters."""

    def __init__(self, samples, positive_jumps, negative_jumps):
        super().__init__(samples)
        self.positive_jumps = np.asarray(positive_jumps, dtype=int)
        self.negative_jumps = np.asarray(negative_jumps, dtype=int)


def _rk4_drift_factors(states, d1, d2, d4, dt):
    k1 = d1 * states
    k2 = d2 * (states + 0.5 * dt * k1)
    k3 = d2 * (states + 0.5 * dt * k2)
    k4 = d4 * (states + dt * k3)
    return states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _engine(initial_label, beta_nodes, dt, n_steps, sample_every, n_traj, rng):
    """Grouped-trajectory propagation for one shard.

    beta_nodes holds beta on the half-step grid, so nodes 2i, 2i+1 and
    2i+2 are the RK4 stage times of step i; kappa = 2 Re beta drives the
    jump bookkeeping while the full complex beta drives the drift.
    """
    kappa_nodes = 2.0 * np.real(beta_nodes)
    root = hilbert.state_vector(initial_label)
    fingerprints = [()]
    rows = {(): 0}
    states = np.array([root], dtype=complex)
    counts = [n_traj]
    annihilators = [hilbert.annihilation(cav) for cav in (1, 2, 3)]

    pos_total = 0
    neg_total = 0
    warned = False
    samples = []
    pos_series = []
    neg_series = []

    def take_sample(t):
        rho = np.zeros((8, 8), dtype=complex)
        for r, c in enumerate(counts):
            if c:
                rho += (c / n_traj) * np.outer(states[r], states[r].conj())
        # fingerprint-determinism invariant: every group equals its parent
        # pushed through the jump channel, up to the global phase picked up
        # at the (group-specific) jump time
        for fp, r in rows.items():
            if not fp:
                continue
            parent = states[rows[fp[:-1]]]
            expected = annihilators[fp[-1] - 1] @ parent
            expected = expected / np.linalg.norm(expected)
            if 1.0 - abs(np.vdot(expected, states[r])) > 1e-8:
                raise RuntimeError(f"group {fp} drifted from its ancestor chain")
        samples.append((t, rho))
        pos_series.append(pos_total)
        neg_series.append(neg_total)

    take_sample(0.0)
    for i in range(n_steps):
        t = i * dt
        k_now = kappa_nodes[2 * i]
        snapshot = list(counts)
        moves = []
        for fp in sorted(rows):
            r = rows[fp]
            cnt = snapshot[r]
            u = rng.random(cnt)
            if cnt == 0 or k_now == 0.0:
                continue
            if k_now > 0.0:
                abs2 = np.abs(states[r]) ** 2
                probs = k_now * dt * (_OCC @ abs2)
                if not warned and probs.max() > _PROB_WARN:
                    warnings.warn("per-step jump probability above 0.1; reduce dt",
                                  RuntimeWarning)
                    warned = True
                edges = np.cumsum(probs)
                channel_of = np.searchsorted(edges, u)
                for j in (0, 1, 2):
                    moved = int(np.count_nonzero(channel_of == j))
                    if moved:
                        moves.append((r, fp + (j + 1,), moved, 1))
            elif fp:
                cavity = fp[-1]
                parent_fp = fp[:-1]
                parent_row = rows[parent_fp]
                if snapshot[parent_row] == 0:
                    continue
                n_exp = float((_OCC[cavity - 1] * np.abs(states[parent_row]) ** 2).sum())
                p = (snapshot[parent_row] / cnt) * (-k_now) * n_exp * dt
                if not warned and p > _PROB_WARN:
                    warnings.warn("per-step jump probability above 0.1; reduce dt",
                                  RuntimeWarning)
                    warned = True
                moved = int(np.count_nonzero(u < p))
                if moved:
                    moves.append((r, parent_fp, moved, -1))
        for src_row, dst_fp, moved, direction in moves:
            if direction > 0 and not k_now > 0.0:
                raise RuntimeError("positive jump outside a positive rate window")
            if direction < 0 and not k_now < 0.0:
                raise RuntimeError("negative jump outside a negative rate window")
            if dst_fp not in rows:
                post = annihilators[dst_fp[-1] - 1] @ states[src_row]
                norm = np.linalg.norm(post)
                if norm < 1e-12:
                    raise RuntimeError("jump into a vanishing branch")
                rows[dst_fp] = len(fingerprints)
                fingerprints.append(dst_fp)
                states = np.vstack([states, (post / norm)[None, :]])
                counts.append(0)
            counts[src_row] -= moved
            counts[rows[dst_fp]] += moved
            if direction > 0:
                pos_total += moved
            else:
                neg_total += moved
        if sum(counts) != n_traj:
            raise RuntimeError("trajectory count not conserved")
        d1 = -beta_nodes[2 * i] * _NTOT
        d2 = -beta_nodes[2 * i + 1] * _NTOT
        d4 = -beta_nodes[2 * i + 2] * _NTOT
        states = _rk4_drift_factors(states, d1, d2, d4, dt)
        norms = np.sqrt(np.sum(np.abs(states) ** 2, axis=1))
        if np.any(norms**2 < 1e-12):
            raise RuntimeError("trajectory norm collapsed below 1e-12")
        states = states / norms[:, None]
        if (i + 1) % sample_every == 0 or i + 1 == n_steps:
            take_sample((i + 1) * dt)
    return samples, pos_series, neg_series


def _run_shard(payload):
    initial_label, beta_nodes, dt, n_steps, sample_every, n_traj, seed_seq = payload
    rng = np.random.default_rng(seed_seq)
    return _engine(initial_label, beta_nodes, dt, n_steps, sample_every, n_traj, rng)


def run_ensemble(config, n_traj, seed, jobs=1):
    """Propagate n_traj jump trajectories; returns [(t, averaged rho)].

    The result also carries cumulative positive/negative jump counters per
    sample.  Bitwise reproducible for fixed (seed, n_traj, dt, jobs); the
    trajectory-to-worker assignment makes different jobs values draw
    different random streams.
    """
    config.validate()
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if not isinstance(config.initial, str):
        raise ValueError("the unraveling needs a pure initial state, 'W' or 'GHZ'")
    if config.xi12 != 0.0 or config.xi23 != 0.0:
        raise ValueError("hopping is not supported by the jump unraveling")
    probe = np.linspace(0.0, config.t_end, 7)
    if np.max(np.abs(np.asarray(config.rates.alpha_fn(probe)))) > 1e-12:
        raise ValueError("the unraveling requires a zero-temperature bath (alpha = 0)")

    table = RateTable(config.rates, config.t_end, config.dt)
    n_steps = int(round(config.t_end / config.dt))
    base = (config.initial, table.beta_values, config.dt, n_steps,
            config.sample_every)

    if jobs <= 1:
        samples, pos, neg = _engine(*base[:5], n_traj, np.random.default_rng(seed))
        return EnsembleResult(samples, pos, neg)

    share, extra = divmod(n_traj, jobs)
    shard_sizes = [share + (1 if k < extra else 0) for k in range(jobs)]
    shard_sizes = [s for s in shard_sizes if s > 0]
    seeds = np.random.SeedSequence(seed).spawn(len(shard_sizes))
    payloads = [base + (size, child) for size, child in zip(shard_sizes, seeds)]
    with ProcessPoolExecutor(max_workers=len(shard_sizes)) as pool:
        parts = list(pool.map(_run_shard, payloads))
    times = [t for t, _ in parts[0][0]]
    rho_sum = np.zeros((len(times), 8, 8), dtype=complex)
    pos = np.zeros(len(times), dtype=int)
    neg = np.zeros(len(times), dtype=int)
    for size, (samples, p, n) in zip(shard_sizes, parts):
        rho_sum += size * np.array([rho for _, rho in samples])
        pos += np.asarray(p, dtype=int)
        neg += np.asarray(n, dtype=int)
    samples = [(t, rho_sum[k] / n_traj) for k, t in enumerate(times)]
    return EnsembleResult(samples, pos, neg)
