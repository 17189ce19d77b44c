"""Deterministic integration of the exact master equation.

The three cavities couple to identical, independent baths, so the equation
of motion needs one alpha(t) and one beta(t) shared by all three modes,
plus optional nearest-neighbour photon hopping.  Everything here works on
the fixed eight-state single-excitation-per-cavity basis from `hilbert`.

Two independent right-hand sides are kept side by side: the operator
(superoperator) assembly used by the integrator, and a hand-expanded
element-wise version used purely as a cross-check of the former.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import hilbert
from .rates import RateCoefficients, RateTable


class IntegrationError(RuntimeError):
    """Raised when trace or Hermiticity drift exceeds its budget."""


_A = [hilbert.annihilation(i) for i in (1, 2, 3)]
_AD = [a.conj().T for a in _A]
_NUM = [ad @ a for a, ad in zip(_A, _AD)]
_ANTI = [a @ ad for a, ad in zip(_A, _AD)]
_EYE = np.eye(8, dtype=complex)


def hopping_hamiltonian(xi12, xi23):
    return xi12 * (_AD[0] @ _A[1] + _AD[1] @ _A[0]) + \
        xi23 * (_AD[1] @ _A[2] + _AD[2] @ _A[1])


@dataclass
class EvolutionConfig:
    initial: Union[str, np.ndarray]     # "W", "GHZ" or an explicit 8x8 matrix
    rates: RateCoefficients
    xi12: float = 0.0
    xi23: float = 0.0
    t_end: float = 10.0
    dt: float = 1e-3
    sample_every: int = 10
    negativity_threshold: float = 1e-2

    def initial_matrix(self):
        if isinstance(self.initial, str):
            return hilbert.initial_state(self.initial)
        rho = np.array(self.initial, dtype=complex)
        if rho.shape != (8, 8):
            raise ValueError("explicit initial state must be an 8x8 matrix")
        return rho

    def validate(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one step")
        if not (math.isfinite(self.xi12) and math.isfinite(self.xi23)):
            raise ValueError("hopping strengths must be finite")
        if self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")
        self.initial_matrix()


@dataclass
class NegativitySeries:
    times: np.ndarray
    negativity: np.ndarray
    kappa: np.ndarray
    populations: np.ndarray        # diagonal of rho at each sample, shape (n, 8)
    death_time: Optional[float]


def rhs_superoperator(rho, alpha, beta, xi12=0.0, xi23=0.0):
    """dres/dt of the master equation for one density matrix.

    alpha weights the thermal excitation terms, beta the decay terms; the
    hopping commutator couples cavities 1-2 and 2-3.
    """
    rho = np.asarray(rho, dtype=complex)
    ac, bc = np.conjugate(alpha), np.conjugate(beta)
    out = np.zeros((8, 8), dtype=complex)
    for a, ad, num, anti in zip(_A, _AD, _NUM, _ANTI):
        up = ad @ rho @ a
        down = a @ rho @ ad
        out += alpha * (up - rho @ anti) + ac * (up - anti @ rho)
        out += beta * (down - num @ rho) + bc * (down - rho @ num)
    if xi12 != 0.0 or xi23 != 0.0:
        h = hopping_hamiltonian(xi12, xi23)
        out += -1j * (h @ rho - rho @ h)
    return out


def rhs_elementwise(rho, alpha, beta, xi12=0.0, xi23=0.0):
    """The same derivative written out one matrix element at a time.

    Mechanically expanded from the per-element action of the master
    equation: lowering pairs collect 2 Re alpha, raising pairs 2 Re beta,
    the damping coefficient counts excited and empty modes on either index
    and the hopping commutator couples nearest-neighbour basis states.
    Kept free of matrix products on purpose, as an independent check of
    rhs_superoperator.  Indices here are zero-based; the one-based element
    labels used in logs and CSV headers are shifted by one.
    """
    r = np.asarray(rho, dtype=complex)
    a = complex(alpha)
    b = complex(beta)
    ac = a.conjugate()
    bc = b.conjugate()
    ra = a.real
    rb = b.real
    x12 = float(xi12)
    x23 = float(xi23)
    d = np.empty((8, 8), dtype=complex)
    d[0, 0] = 2.0 * rb * (r[1, 1] + r[2, 2] + r[3, 3]) - 6.0 * ra * r[0, 0]
    d[0, 1] = (2.0 * rb * (r[2, 4] + r[3, 5]) - (2.0 * a + 3.0 * ac + 1.0 * bc) * r[0, 1]
             + 1j * x12 * r[0, 2])
    d[0, 2] = (2.0 * rb * (r[1, 4] + r[3, 6]) - (2.0 * a + 3.0 * ac + 1.0 * bc) * r[0, 2]
             + 1j * x12 * r[0, 1] + 1j * x23 * r[0, 3])
    d[0, 3] = (2.0 * rb * (r[1, 5] + r[2, 6]) - (2.0 * a + 3.0 * ac + 1.0 * bc) * r[0, 3]
             + 1j * x23 * r[0, 2])
    d[0, 4] = (2.0 * rb * r[3, 7] - (1.0 * a + 3.0 * ac + 2.0 * bc) * r[0, 4]
             + 1j * x23 * r[0, 5])
    d[0, 5] = (2.0 * rb * r[2, 7] - (1.0 * a + 3.0 * ac + 2.0 * bc) * r[0, 5]
             + 1j * x23 * r[0, 4] + 1j * x12 * r[0, 6])
    d[0, 6] = (2.0 * rb * r[1, 7] - (1.0 * a + 3.0 * ac + 2.0 * bc) * r[0, 6]
             + 1j * x12 * r[0, 5])
    d[0, 7] = -(3.0 * ac + 3.0 * bc) * r[0, 7]
    d[1, 0] = (2.0 * rb * (r[4, 2] + r[5, 3]) - (3.0 * a + 2.0 * ac + 1.0 * b) * r[1, 0]
             - 1j * x12 * r[2, 0])
    d[1, 1] = (2.0 * ra * r[0, 0] + 2.0 * rb * (r[4, 4] + r[5, 5])
             - (4.0 * ra + 2.0 * rb) * r[1, 1] + 1j * x12 * r[1, 2]
             - 1j * x12 * r[2, 1])
    d[1, 2] = (2.0 * rb * r[5, 6] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[1, 2]
             + 1j * x12 * r[1, 1] + 1j * x23 * r[1, 3] - 1j * x12 * r[2, 2])
    d[1, 3] = (2.0 * rb * r[4, 6] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[1, 3]
             + 1j * x23 * r[1, 2] - 1j * x12 * r[2, 3])
    d[1, 4] = (2.0 * ra * r[0, 2] + 2.0 * rb * r[5, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[1, 4] + 1j * x23 * r[1, 5]
             - 1j * x12 * r[2, 4])
    d[1, 5] = (2.0 * ra * r[0, 3] + 2.0 * rb * r[4, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[1, 5] + 1j * x23 * r[1, 4]
             + 1j * x12 * r[1, 6] - 1j * x12 * r[2, 5])
    d[1, 6] = (-(1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[1, 6] + 1j * x12 * r[1, 5]
             - 1j * x12 * r[2, 6])
    d[1, 7] = (2.0 * ra * r[0, 6] - (2.0 * ac + 1.0 * b + 3.0 * bc) * r[1, 7]
             - 1j * x12 * r[2, 7])
    d[2, 0] = (2.0 * rb * (r[4, 1] + r[6, 3]) - (3.0 * a + 2.0 * ac + 1.0 * b) * r[2, 0]
             - 1j * x12 * r[1, 0] - 1j * x23 * r[3, 0])
    d[2, 1] = (2.0 * rb * r[6, 5] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[2, 1]
             + 1j * x12 * r[2, 2] - 1j * x12 * r[1, 1] - 1j * x23 * r[3, 1])
    d[2, 2] = (2.0 * ra * r[0, 0] + 2.0 * rb * (r[4, 4] + r[6, 6])
             - (4.0 * ra + 2.0 * rb) * r[2, 2] + 1j * x12 * r[2, 1]
             + 1j * x23 * r[2, 3] - 1j * x12 * r[1, 2] - 1j * x23 * r[3, 2])
    d[2, 3] = (2.0 * rb * r[4, 5] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[2, 3]
             + 1j * x23 * r[2, 2] - 1j * x12 * r[1, 3] - 1j * x23 * r[3, 3])
    d[2, 4] = (2.0 * ra * r[0, 1] + 2.0 * rb * r[6, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[2, 4] + 1j * x23 * r[2, 5]
             - 1j * x12 * r[1, 4] - 1j * x23 * r[3, 4])
    d[2, 5] = (-(1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[2, 5] + 1j * x23 * r[2, 4]
             + 1j * x12 * r[2, 6] - 1j * x12 * r[1, 5] - 1j * x23 * r[3, 5])
    d[2, 6] = (2.0 * ra * r[0, 3] + 2.0 * rb * r[4, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[2, 6] + 1j * x12 * r[2, 5]
             - 1j * x12 * r[1, 6] - 1j * x23 * r[3, 6])
    d[2, 7] = (2.0 * ra * r[0, 5] - (2.0 * ac + 1.0 * b + 3.0 * bc) * r[2, 7]
             - 1j * x12 * r[1, 7] - 1j * x23 * r[3, 7])
    d[3, 0] = (2.0 * rb * (r[5, 1] + r[6, 2]) - (3.0 * a + 2.0 * ac + 1.0 * b) * r[3, 0]
             - 1j * x23 * r[2, 0])
    d[3, 1] = (2.0 * rb * r[6, 4] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[3, 1]
             + 1j * x12 * r[3, 2] - 1j * x23 * r[2, 1])
    d[3, 2] = (2.0 * rb * r[5, 4] - (2.0 * a + 2.0 * ac + 1.0 * b + 1.0 * bc) * r[3, 2]
             + 1j * x12 * r[3, 1] + 1j * x23 * r[3, 3] - 1j * x23 * r[2, 2])
    d[3, 3] = (2.0 * ra * r[0, 0] + 2.0 * rb * (r[5, 5] + r[6, 6])
             - (4.0 * ra + 2.0 * rb) * r[3, 3] + 1j * x23 * r[3, 2]
             - 1j * x23 * r[2, 3])
    d[3, 4] = (-(1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[3, 4] + 1j * x23 * r[3, 5]
             - 1j * x23 * r[2, 4])
    d[3, 5] = (2.0 * ra * r[0, 1] + 2.0 * rb * r[6, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[3, 5] + 1j * x23 * r[3, 4]
             + 1j * x12 * r[3, 6] - 1j * x23 * r[2, 5])
    d[3, 6] = (2.0 * ra * r[0, 2] + 2.0 * rb * r[5, 7]
             - (1.0 * a + 2.0 * ac + 1.0 * b + 2.0 * bc) * r[3, 6] + 1j * x12 * r[3, 5]
             - 1j * x23 * r[2, 6])
    d[3, 7] = (2.0 * ra * r[0, 4] - (2.0 * ac + 1.0 * b + 3.0 * bc) * r[3, 7]
             - 1j * x23 * r[2, 7])
    d[4, 0] = 2.0 * rb * r[7, 3] - (3.0 * a + 1.0 * ac + 2.0 * b) * r[4, 0] - 1j * x23 * r[5, 0]
    d[4, 1] = (2.0 * ra * r[2, 0] + 2.0 * rb * r[7, 5]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[4, 1] + 1j * x12 * r[4, 2]
             - 1j * x23 * r[5, 1])
    d[4, 2] = (2.0 * ra * r[1, 0] + 2.0 * rb * r[7, 6]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[4, 2] + 1j * x12 * r[4, 1]
             + 1j * x23 * r[4, 3] - 1j * x23 * r[5, 2])
    d[4, 3] = (-(2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[4, 3] + 1j * x23 * r[4, 2]
             - 1j * x23 * r[5, 3])
    d[4, 4] = (2.0 * ra * (r[2, 2] + r[1, 1]) + 2.0 * rb * r[7, 7]
             - (2.0 * ra + 4.0 * rb) * r[4, 4] + 1j * x23 * r[4, 5]
             - 1j * x23 * r[5, 4])
    d[4, 5] = (2.0 * ra * r[2, 3] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[4, 5]
             + 1j * x23 * r[4, 4] + 1j * x12 * r[4, 6] - 1j * x23 * r[5, 5])
    d[4, 6] = (2.0 * ra * r[1, 3] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[4, 6]
             + 1j * x12 * r[4, 5] - 1j * x23 * r[5, 6])
    d[4, 7] = (2.0 * ra * (r[2, 6] + r[1, 5]) - (1.0 * ac + 2.0 * b + 3.0 * bc) * r[4, 7]
             - 1j * x23 * r[5, 7])
    d[5, 0] = (2.0 * rb * r[7, 2] - (3.0 * a + 1.0 * ac + 2.0 * b) * r[5, 0]
             - 1j * x23 * r[4, 0] - 1j * x12 * r[6, 0])
    d[5, 1] = (2.0 * ra * r[3, 0] + 2.0 * rb * r[7, 4]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[5, 1] + 1j * x12 * r[5, 2]
             - 1j * x23 * r[4, 1] - 1j * x12 * r[6, 1])
    d[5, 2] = (-(2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[5, 2] + 1j * x12 * r[5, 1]
             + 1j * x23 * r[5, 3] - 1j * x23 * r[4, 2] - 1j * x12 * r[6, 2])
    d[5, 3] = (2.0 * ra * r[1, 0] + 2.0 * rb * r[7, 6]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[5, 3] + 1j * x23 * r[5, 2]
             - 1j * x23 * r[4, 3] - 1j * x12 * r[6, 3])
    d[5, 4] = (2.0 * ra * r[3, 2] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[5, 4]
             + 1j * x23 * r[5, 5] - 1j * x23 * r[4, 4] - 1j * x12 * r[6, 4])
    d[5, 5] = (2.0 * ra * (r[3, 3] + r[1, 1]) + 2.0 * rb * r[7, 7]
             - (2.0 * ra + 4.0 * rb) * r[5, 5] + 1j * x23 * r[5, 4]
             + 1j * x12 * r[5, 6] - 1j * x23 * r[4, 5] - 1j * x12 * r[6, 5])
    d[5, 6] = (2.0 * ra * r[1, 2] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[5, 6]
             + 1j * x12 * r[5, 5] - 1j * x23 * r[4, 6] - 1j * x12 * r[6, 6])
    d[5, 7] = (2.0 * ra * (r[3, 6] + r[1, 4]) - (1.0 * ac + 2.0 * b + 3.0 * bc) * r[5, 7]
             - 1j * x23 * r[4, 7] - 1j * x12 * r[6, 7])
    d[6, 0] = 2.0 * rb * r[7, 1] - (3.0 * a + 1.0 * ac + 2.0 * b) * r[6, 0] - 1j * x12 * r[5, 0]
    d[6, 1] = (-(2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[6, 1] + 1j * x12 * r[6, 2]
             - 1j * x12 * r[5, 1])
    d[6, 2] = (2.0 * ra * r[3, 0] + 2.0 * rb * r[7, 4]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[6, 2] + 1j * x12 * r[6, 1]
             + 1j * x23 * r[6, 3] - 1j * x12 * r[5, 2])
    d[6, 3] = (2.0 * ra * r[2, 0] + 2.0 * rb * r[7, 5]
             - (2.0 * a + 1.0 * ac + 2.0 * b + 1.0 * bc) * r[6, 3] + 1j * x23 * r[6, 2]
             - 1j * x12 * r[5, 3])
    d[6, 4] = (2.0 * ra * r[3, 1] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[6, 4]
             + 1j * x23 * r[6, 5] - 1j * x12 * r[5, 4])
    d[6, 5] = (2.0 * ra * r[2, 1] - (1.0 * a + 1.0 * ac + 2.0 * b + 2.0 * bc) * r[6, 5]
             + 1j * x23 * r[6, 4] + 1j * x12 * r[6, 6] - 1j * x12 * r[5, 5])
    d[6, 6] = (2.0 * ra * (r[3, 3] + r[2, 2]) + 2.0 * rb * r[7, 7]
             - (2.0 * ra + 4.0 * rb) * r[6, 6] + 1j * x12 * r[6, 5]
             - 1j * x12 * r[5, 6])
    d[6, 7] = (2.0 * ra * (r[3, 5] + r[2, 4]) - (1.0 * ac + 2.0 * b + 3.0 * bc) * r[6, 7]
             - 1j * x12 * r[5, 7])
    d[7, 0] = -(3.0 * a + 3.0 * b) * r[7, 0]
    d[7, 1] = 2.0 * ra * r[6, 0] - (2.0 * a + 3.0 * b + 1.0 * bc) * r[7, 1] + 1j * x12 * r[7, 2]
    d[7, 2] = (2.0 * ra * r[5, 0] - (2.0 * a + 3.0 * b + 1.0 * bc) * r[7, 2]
             + 1j * x12 * r[7, 1] + 1j * x23 * r[7, 3])
    d[7, 3] = 2.0 * ra * r[4, 0] - (2.0 * a + 3.0 * b + 1.0 * bc) * r[7, 3] + 1j * x23 * r[7, 2]
    d[7, 4] = (2.0 * ra * (r[6, 2] + r[5, 1]) - (1.0 * a + 3.0 * b + 2.0 * bc) * r[7, 4]
             + 1j * x23 * r[7, 5])
    d[7, 5] = (2.0 * ra * (r[6, 3] + r[4, 1]) - (1.0 * a + 3.0 * b + 2.0 * bc) * r[7, 5]
             + 1j * x23 * r[7, 4] + 1j * x12 * r[7, 6])
    d[7, 6] = (2.0 * ra * (r[5, 3] + r[4, 2]) - (1.0 * a + 3.0 * b + 2.0 * bc) * r[7, 6]
             + 1j * x12 * r[7, 5])
    d[7, 7] = 2.0 * ra * (r[6, 6] + r[5, 5] + r[4, 4]) - 6.0 * rb * r[7, 7]
    return d


def lindblad_markovian_rhs(rho, kappa, nbar=0.0):
    """Constant-rate Lindblad right-hand side (the memoryless limit).

    Equals rhs_superoperator with alpha = kappa nbar / 2 and
    beta = kappa (nbar + 1) / 2, both real and constant.
    """
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((8, 8), dtype=complex)
    down_rate = kappa * (nbar + 1.0)
    up_rate = kappa * nbar
    for a, ad, num, anti in zip(_A, _AD, _NUM, _ANTI):
        out += down_rate * (a @ rho @ ad - 0.5 * (num @ rho + rho @ num))
        if up_rate != 0.0:
            out += up_rate * (ad @ rho @ a - 0.5 * (anti @ rho + rho @ anti))
    return out


def _liouvillian_parts(xi12, xi23):
    """Constant matrices whose alpha/beta-weighted sum is the vectorized
    generator: row-major vec(A rho B) = (A kron B^T) vec(rho)."""
    m1 = sum(np.kron(_AD[i], _A[i].T) - np.kron(_EYE, _ANTI[i].T) for i in range(3))
    m2 = sum(np.kron(_AD[i], _A[i].T) - np.kron(_ANTI[i], _EYE) for i in range(3))
    m3 = sum(np.kron(_A[i], _AD[i].T) - np.kron(_NUM[i], _EYE) for i in range(3))
    m4 = sum(np.kron(_A[i], _AD[i].T) - np.kron(_EYE, _NUM[i].T) for i in range(3))
    h = hopping_hamiltonian(xi12, xi23)
    mh = -1j * (np.kron(h, _EYE) - np.kron(_EYE, h.T))
    return m1, m2, m3, m4, mh


def integrate(config):
    """Fixed-step RK4 integration; returns [(t, rho)] at the sample times.

    Output states are renormalized in trace; drift beyond 1e-6 in trace or
    1e-8 in Hermiticity raises IntegrationError (try a smaller dt).
    """
    config.validate()
    rho0 = config.initial_matrix()
    dt = config.dt
    n_steps = int(round(config.t_end / dt))
    m1, m2, m3, m4, mh = _liouvillian_parts(config.xi12, config.xi23)
    table = RateTable(config.rates, config.t_end, dt)
    al, be = table.alpha_values, table.beta_values

    def generator(node):
        a, b = al[node], be[node]
        return a * m1 + np.conj(a) * m2 + b * m3 + np.conj(b) * m4 + mh

    v = rho0.reshape(64).astype(complex)
    samples = [(0.0, _checked(rho0.copy(), 0.0))]
    l_here = generator(0)
    for i in range(n_steps):
        l_mid = generator(2 * i + 1)
        l_next = generator(2 * i + 2)
        k1 = l_here @ v
        k2 = l_mid @ (v + 0.5 * dt * k1)
        k3 = l_mid @ (v + 0.5 * dt * k2)
        k4 = l_next @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        l_here = l_next
        if (i + 1) % config.sample_every == 0 or i + 1 == n_steps:
            t = (i + 1) * dt
            rho = _checked(v.reshape(8, 8).copy(), t)
            samples.append((t, rho))
            v = rho.reshape(64).copy()
    return samples


def _checked(rho, t):
    trace = np.trace(rho)
    if abs(trace - 1.0) > 1e-6:
        raise IntegrationError(
            f"trace drifted to {trace:.9f} at t={t:g}; reduce dt")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise IntegrationError(
            f"Hermiticity drift above 1e-8 at t={t:g}; reduce dt")
    return rho / trace.real


def negativity_series(config):
    """Negativity, decay rate and populations along an integrate() run."""
    samples = integrate(config)
    times = np.array([t for t, _ in samples])
    neg = np.array([hilbert.negativity(rho) for _, rho in samples])
    kappa = np.asarray(config.rates.kappa_fn(times), dtype=float)
    pops = np.array([np.real(np.diag(rho)) for _, rho in samples])
    below = np.nonzero(neg < config.negativity_threshold)[0]
    death = float(times[below[0]]) if below.size else None
    return NegativitySeries(times=times, negativity=neg, kappa=kappa,
                            populations=pops, death_time=death)
