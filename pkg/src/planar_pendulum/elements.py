"""Matrix elements of cos(theta) and cos(theta)**2 between pendular states,
by grid quadrature and by closed Bessel-sum formulas, plus the
Hellmann-Feynman and kinetic-energy consistency identities.

Bessel machinery
----------------
Every closed-form integral here reduces to

    integral over a period of exp(a*cos(theta)) * cos(q*theta)  =  2*pi*I_q(a)

after expanding even powers of cos(theta/2) binomially. The recurring
bracket is

    B(L, q; a) = binom(2L, L)*I_q(a)
               + sum_{m=0}^{L-1} binom(2L, m) * (I_{L-m+q}(a) + I_{L-m-q}(a))

which is the exact expansion of cos(theta/2)**(2L) against a cos(q*theta)
test function under the exp(a*cos(theta)) weight:

    integral exp(a*cos) * cos(q*theta) * cos(theta/2)**(2L)
        = (2*pi / 2**(2L)) * B(L, q; a).

The eigenfunction ansatz used downstream lives in the frame where the
potential minimum is at theta = pi, i.e. carries exp(-sqrt(zeta)*cos) and
sin(theta/2) powers; shifting theta by pi maps it onto the form above and
multiplies each cos(q*theta) Fourier component by (-1)**q. Public
exp_cos_integral stays in the unshifted frame; the private lab-frame helper
applies the alternating signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .core import (
    DEFAULT_J_MAX,
    AngularGrid,
    InteractionParams,
    SymmetryLabel,
    Wavefunction,
    make_grid,
)
from .spectrum import PendularSpectrum, solve_spectrum

BESSEL_X_MAX = 700.0        # exp overflow guard for the Miller normalization
_SERIES_CUTOFF = 2.0

MAX_KERNEL_POWER = 40       # largest supported L in exp_cos_integral

QUAD_GRID_POINTS = 1024     # oracle quadratures run denser than the default


def modified_bessel_i(order: int, x: float) -> float:
    """I_order(x) to ~1e-12 relative accuracy for 0 <= x <= 700.

    Power series below x = 2, otherwise Miller's downward recurrence
    normalized with exp(x) = I_0 + 2*sum_{k>=1} I_k. Negative orders are
    accepted (I_{-n} = I_n).
    """
    order = abs(int(order))
    if x < 0:
        raise ValueError("argument must be >= 0")
    if x > BESSEL_X_MAX:
        raise OverflowError(
            f"x={x} exceeds {BESSEL_X_MAX}; rescale the problem or use an "
            "exponentially scaled representation")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x < _SERIES_CUTOFF:
        half = 0.5 * x
        term = half ** order / math.factorial(order)
        total = term
        for k in range(1, 60):
            term *= half * half / (k * (k + order))
            total += term
            if term < 1e-18 * total:
                break
        return total
    return _miller_column(order, x)[order]


def _miller_start(order: int, x: float) -> int:
    m = max(order, int(x)) + 40
    m += int(10.0 * math.sqrt(max(order, x)))
    return m + (m % 2)


def _miller_column(order: int, x: float) -> np.ndarray:
    """I_0..I_order by downward recurrence, all normalized at once."""
    m = _miller_start(order, x)
    vals = np.zeros(m + 2)
    vals[m + 1] = 0.0
    vals[m] = 1e-300
    for k in range(m, 0, -1):
        vals[k - 1] = vals[k + 1] + (2.0 * k / x) * vals[k]
        if vals[k - 1] > 1e250:       # rescale to dodge overflow
            vals /= 1e250
    norm = vals[0] + 2.0 * np.sum(vals[1:])
    # divide first: vals/norm <= 1, so the exp(x) product cannot overflow
    # for x <= BESSEL_X_MAX even when norm itself is far from 1
    return vals[:order + 1] / norm * math.exp(x)


@dataclass(frozen=True)
class BesselTable:
    """Cached I_rho(argument) for rho = 0..rho_max, symmetric in rho."""

    argument: float
    values: np.ndarray

    @classmethod
    def build(cls, argument: float, rho_max: int) -> "BesselTable":
        if argument < 0:
            raise ValueError("argument must be >= 0")
        if argument == 0.0:
            vals = np.zeros(rho_max + 1)
            vals[0] = 1.0
        elif argument < _SERIES_CUTOFF:
            vals = np.array([modified_bessel_i(r, argument)
                             for r in range(rho_max + 1)])
        else:
            vals = _miller_column(rho_max, argument)
        return cls(argument=argument, values=vals)

    def __getitem__(self, rho: int) -> float:
        r = abs(int(rho))
        if r >= len(self.values):
            raise IndexError(f"order {rho} beyond table ({len(self.values) - 1})")
        return float(self.values[r])


def _bracket(table: BesselTable, big_l: int, q: int) -> float:
    """B(L, q) against the table's argument. See module docstring."""
    s = math.comb(2 * big_l, big_l) * table[q]
    for m in range(big_l):
        p = big_l - m
        s += math.comb(2 * big_l, m) * (table[p + q] + table[p - q])
    return s


# Fourier content {q: coefficient} of the admitted kernels f(theta).
_FOURIER: Dict[str, Dict[int, float]] = {
    "one":  {0: 1.0},
    "cos":  {1: 1.0},
    "cos2": {0: 0.5, 2: 0.5},
    "sin":  {0: 0.5, 2: -0.5},        # squared sine: the odd-sector norm kernel
}
_FOURIER["sin2"] = _FOURIER["sin"]

# Kernels times sin(theta)**2, needed by odd-sector matrix elements.
_FOURIER_ODD = {
    "one":  _FOURIER["sin"],
    "cos":  {1: 0.25, 3: -0.25},      # sin^2 * cos
    "cos2": {0: 0.125, 4: -0.125},    # sin^2 * cos^2
}


def _kernel_table(zeta: float, l_sum_max: int, q_max: int) -> BesselTable:
    return BesselTable.build(2.0 * math.sqrt(zeta), l_sum_max + q_max + 1)


def exp_cos_integral(L: int, zeta: float, f_kind: str) -> float:
    """integral over [0, 2*pi] of exp(2*sqrt(zeta)*cos) * f * cos(theta/2)**(2L).

    f_kind selects f(theta) from {'one', 'cos', 'cos2', 'sin'}; 'sin' is the
    squared sine kernel sin(theta)**2 that enters the odd-sector
    normalization (a plain sine integrates to zero by symmetry).
    """
    if L < 0 or L > MAX_KERNEL_POWER:
        raise ValueError(f"L must be in [0, {MAX_KERNEL_POWER}]")
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    if f_kind not in _FOURIER:
        raise ValueError(f"unknown f_kind {f_kind!r}")
    fourier = _FOURIER[f_kind]
    table = _kernel_table(zeta, L, max(fourier))
    scale = 2.0 * np.pi / 4.0 ** L
    return scale * sum(c * _bracket(table, L, q) for q, c in fourier.items())


def _lab_sum(table: BesselTable, big_l: int, fourier: Dict[int, float]) -> float:
    # pi-shifted frame: each cos(q*theta) component picks up (-1)**q.
    scale = 2.0 * np.pi / 4.0 ** big_l
    return scale * sum(c * (-1.0) ** q * _bracket(table, big_l, q)
                       for q, c in fourier.items())


def _pair_sum(v_row: np.ndarray, v_col: np.ndarray, table: BesselTable,
              fourier: Dict[int, float]) -> float:
    s = 0.0
    for l, vl in enumerate(v_row):
        if vl == 0.0:
            continue
        for lp, vlp in enumerate(v_col):
            if vlp == 0.0:
                continue
            s += vl * vlp * _lab_sum(table, l + lp, fourier)
    return s


def ansatz_norm_integral(gamma: SymmetryLabel, v: np.ndarray,
                         zeta: float) -> float:
    """Norm of the exponential-polynomial ansatz with coefficients v.

    Even sector: weight exp(-2*sqrt(zeta)*cos) over sin(theta/2) powers.
    Odd sector: the same with an extra sin(theta)**2.
    """
    l_max = len(v) - 1
    table = _kernel_table(zeta, 2 * l_max, 4)
    kernel = "one" if gamma is SymmetryLabel.A1 else "sin"
    return _pair_sum(v, v, table, _FOURIER[kernel])


def _analytic_element(a, b, fourier_even: Dict[int, float],
                      fourier_odd: Dict[int, float]) -> float:
    if a.zeta != b.zeta:
        raise ValueError("ansatz pair built at different zeta")
    if a.gamma is not b.gamma:
        return 0.0                      # selection rule, exact
    l_max = len(a.v) + len(b.v) - 2
    table = _kernel_table(a.zeta, 2 * l_max, 4)
    fourier = fourier_even if a.gamma is SymmetryLabel.A1 else fourier_odd
    raw = _pair_sum(a.v, b.v, table, fourier)
    return raw / math.sqrt(a.normalization * b.normalization)


def analytic_cos_element(a, b) -> float:
    """<phi_a|cos(theta)|phi_b> from the Bessel sums.

    Inputs are AnsatzCoefficients; cross-symmetry pairs return exactly 0.
    """
    return _analytic_element(a, b, _FOURIER["cos"], _FOURIER_ODD["cos"])


def analytic_cos2_element(a, b) -> float:
    """<phi_a|cos(theta)**2|phi_b> from the Bessel sums."""
    return _analytic_element(a, b, _FOURIER["cos2"], _FOURIER_ODD["cos2"])


@dataclass(frozen=True)
class TransitionElement:
    n: int
    n_prime: int
    gamma: Optional[SymmetryLabel]     # None for a cross-symmetry pair
    operator: str                      # 'cos' | 'cos2'
    value: float


_OPERATOR_FN = {
    "cos": np.cos,
    "cos2": lambda t: np.cos(t) ** 2,
}


def transition_element(spec: PendularSpectrum, n: int, n_prime: int,
                       operator: str,
                       grid: Optional[AngularGrid] = None) -> TransitionElement:
    """Grid-quadrature matrix element between spectrum states.

    Cross-symmetry pairs are exact zeros by the selection rules; the
    quadrature is skipped for them.
    """
    if operator not in _OPERATOR_FN:
        raise ValueError(f"unknown operator {operator!r}")
    if spec.labels[n] is not spec.labels[n_prime]:
        return TransitionElement(n, n_prime, None, operator, 0.0)
    if grid is None:
        grid = make_grid(QUAD_GRID_POINTS)
    fa = spec.wavefunction(n, grid).amplitudes.real
    fb = spec.wavefunction(n_prime, grid).amplitudes.real
    w = _OPERATOR_FN[operator](grid.theta)
    val = float(np.sum(fa * w * fb) * grid.dtheta)
    return TransitionElement(n, n_prime, spec.labels[n], operator, val)


def sector_element_matrix(spec: PendularSpectrum, operator: str,
                          grid: Optional[AngularGrid] = None) -> np.ndarray:
    """Dense (n_states x n_states) element matrix with selection-rule zeros."""
    if grid is None:
        grid = make_grid(QUAD_GRID_POINTS)
    n = spec.n_states
    funcs = np.stack([spec.wavefunction(i, grid).amplitudes.real
                      for i in range(n)])
    w = _OPERATOR_FN[operator](grid.theta)
    mat = (funcs * w) @ funcs.T * grid.dtheta
    same = np.array([[spec.labels[i] is spec.labels[j] for j in range(n)]
                     for i in range(n)])
    return np.where(same, mat, 0.0)


def hellmann_feynman_residual(params: InteractionParams, n: int,
                              step: float = 1e-4,
                              j_max: int = DEFAULT_J_MAX) -> Tuple[float, float]:
    """|<cos> + d(eps_n)/d(eta)| and |<cos^2> + d(eps_n)/d(zeta)|.

    Central finite differences against quadrature expectations. Refuses
    states closer than 10*step (in energy) to a neighbor, where the
    differentiated branch is ill-defined.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    spec = solve_spectrum(params, n + 2, j_max)
    gap_up = spec.energies[n + 1] - spec.energies[n]
    gap_dn = spec.energies[n] - spec.energies[n - 1] if n > 0 else math.inf
    if min(gap_up, gap_dn) <= 10.0 * step:
        raise ValueError(
            f"state {n} is within 10*step of a neighbor "
            f"(gap {min(gap_up, gap_dn):.3e}); derivative branch ill-defined")

    def energy(eta: float, zeta: float) -> float:
        # energies are even in eta (theta -> pi - theta maps +eta to -eta),
        # so a stencil point that strays positive folds back
        return float(solve_spectrum(InteractionParams(-abs(eta), zeta),
                                    n + 1, j_max).energies[n])

    eta, zeta = params.eta, params.zeta
    d_eta = (energy(eta + step, zeta) - energy(eta - step, zeta)) / (2 * step)
    if zeta - step >= 0:
        d_zeta = (energy(eta, zeta + step) - energy(eta, zeta - step)) / (2 * step)
    else:
        # one-sided second-order stencil keeps zeta >= 0
        d_zeta = (-3 * energy(eta, zeta) + 4 * energy(eta, zeta + step)
                  - energy(eta, zeta + 2 * step)) / (2 * step)

    grid = make_grid(QUAD_GRID_POINTS)
    psi = spec.wavefunction(n, grid)
    return (abs(psi.expectation_cos() + d_eta),
            abs(psi.expectation_cos2() + d_zeta))


def kinetic_identity_residual(params: InteractionParams, n: int,
                              j_max: int = DEFAULT_J_MAX) -> float:
    """|<J^2> - eps_n - eta*<cos> - zeta*<cos^2>|, all from quadrature."""
    spec = solve_spectrum(params, n + 1, j_max)
    grid = make_grid(QUAD_GRID_POINTS)
    psi = spec.wavefunction(n, grid)
    return abs(psi.expectation_kinetic() - float(spec.energies[n])
               - params.eta * psi.expectation_cos()
               - params.zeta * psi.expectation_cos2())
