"""Pendular spectrum: parity-adapted Hamiltonian, eigensolve, symmetry
labels, and crossing-locus scans over the orienting strength.

The Hamiltonian H = J^2 - eta*cos(theta) - zeta*cos(theta)**2 block-
diagonalizes in the parity-adapted free-rotor basis. The even (A1) sector
uses {1/sqrt(2*pi), cos(J*theta)/sqrt(pi)} and the odd (A2) sector
{sin(J*theta)/sqrt(pi)}. Within a sector, cos(theta) couples |dJ| = 1 with
strength 1/2 and cos(theta)**2 couples |dJ| = 2 with strength 1/4 plus a
1/2 diagonal shift; rows touching J = 0 pick up sqrt(2) factors, and the
J = 1 diagonal folds over (cos: 3/4 in the even sector, 1/4 in the odd).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    DEFAULT_J_MAX,
    AngularGrid,
    InteractionParams,
    SymmetryLabel,
    Wavefunction,
    make_grid,
)

# Gap below which a refined crossing counts as a genuine degeneracy.
DEGENERACY_GAP_TOL = 1e-6


@lru_cache(maxsize=8)
def _basis_tables(n_points: int, j_max: int) -> Tuple[np.ndarray, np.ndarray]:
    # Rows j-1 hold cos(j*theta)/sqrt(pi) and sin(j*theta)/sqrt(pi).
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    j = np.arange(1, j_max + 1)[:, None]
    return (np.cos(j * theta[None, :]) / math.sqrt(np.pi),
            np.sin(j * theta[None, :]) / math.sqrt(np.pi))

# Parity-classification tolerance on the wrong-parity part's L2 norm.
PARITY_NORM_TOL = 1e-10


def build_hamiltonian(params: InteractionParams,
                      j_max: int = DEFAULT_J_MAX) -> Tuple[np.ndarray, np.ndarray]:
    """Real symmetric matrices (even sector, odd sector).

    Even sector is (j_max+1) x (j_max+1) with row 0 the J=0 constant;
    odd sector is j_max x j_max with row i the J=i+1 sine state.
    """
    if j_max < 8:
        raise ValueError(f"need j_max >= 8, got {j_max}")
    eta, zeta = params.eta, params.zeta

    n1 = j_max + 1
    h1 = np.zeros((n1, n1))
    for j in range(n1):
        h1[j, j] = j * j - 0.5 * zeta
    h1[1, 1] -= 0.25 * zeta            # <cos J=1|cos^2|cos J=1> = 3/4
    h1[0, 1] = h1[1, 0] = -eta / math.sqrt(2.0)
    for j in range(1, n1 - 1):
        h1[j, j + 1] = h1[j + 1, j] = -0.5 * eta
    if n1 > 2:
        h1[0, 2] = h1[2, 0] = -zeta * math.sqrt(2.0) / 4.0
    for j in range(1, n1 - 2):
        h1[j, j + 2] = h1[j + 2, j] = -0.25 * zeta

    n2 = j_max
    h2 = np.zeros((n2, n2))
    for i in range(n2):
        j = i + 1
        h2[i, i] = j * j - 0.5 * zeta
    h2[0, 0] += 0.25 * zeta            # <sin J=1|cos^2|sin J=1> = 1/4
    for i in range(n2 - 1):
        h2[i, i + 1] = h2[i + 1, i] = -0.5 * eta
    for i in range(n2 - 2):
        h2[i, i + 2] = h2[i + 2, i] = -0.25 * zeta

    return h1, h2


@dataclass(frozen=True)
class PendularSpectrum:
    """Lowest eigenpairs of the pendular Hamiltonian, energy-ordered.

    coefficients[i] holds the sector basis vector of state i padded to
    length j_max + 1: even-sector rows are (c_0, c_1, ..., c_jmax) over
    {1/sqrt(2*pi), cos(J*theta)/sqrt(pi)}, odd-sector rows store their
    sine coefficients in slots 1..j_max with slot 0 zero.
    """

    params: InteractionParams
    energies: np.ndarray
    coefficients: np.ndarray
    labels: Tuple[SymmetryLabel, ...]
    j_max: int

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def sector_indices(self, label: SymmetryLabel) -> List[int]:
        return [i for i, lab in enumerate(self.labels) if lab is label]

    def wavefunction(self, n: int, grid: Optional[AngularGrid] = None) -> Wavefunction:
        """Materialize state n on a grid. Real-valued by construction."""
        if grid is None:
            grid = make_grid()
        if grid.max_band_limit < self.j_max:
            raise ValueError("grid too coarse for this basis size")
        cos_t, sin_t = _basis_tables(grid.n_points, self.j_max)
        c = self.coefficients[n]
        if self.labels[n] is SymmetryLabel.A1:
            f = c[0] / math.sqrt(2.0 * np.pi) + c[1:] @ cos_t
        else:
            f = c[1:] @ sin_t
        return Wavefunction(grid, f.astype(complex), normalize=False)

    def free_rotor_coefficients(self, n: int, j_max: Optional[int] = None) -> np.ndarray:
        """Signed-J expansion <j|phi_n> for j in [-j_max, j_max].

        Even sector: c_0 at j=0 and c_J/sqrt(2) at +-J. Odd sector:
        -i*c_J/sqrt(2) at +J and +i*c_J/sqrt(2) at -J.
        """
        if j_max is None:
            j_max = self.j_max
        jm = min(j_max, self.j_max)
        out = np.zeros(2 * j_max + 1, dtype=complex)
        c = self.coefficients[n]
        if self.labels[n] is SymmetryLabel.A1:
            out[j_max] = c[0]
            for j in range(1, jm + 1):
                out[j_max + j] = c[j] / math.sqrt(2.0)
                out[j_max - j] = c[j] / math.sqrt(2.0)
        else:
            for j in range(1, jm + 1):
                out[j_max + j] = -1j * c[j] / math.sqrt(2.0)
                out[j_max - j] = 1j * c[j] / math.sqrt(2.0)
        return out


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    # Deterministic phase: largest-magnitude coefficient made positive.
    k = int(np.argmax(np.abs(vec)))
    return -vec if vec[k] < 0 else vec


def solve_spectrum(params: InteractionParams, n_states: int,
                   j_max: int = DEFAULT_J_MAX) -> PendularSpectrum:
    """Diagonalize both parity sectors and merge the lowest n_states."""
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if n_states > 2 * j_max:
        raise ValueError(f"n_states={n_states} exceeds 2*j_max={2 * j_max}")
    h1, h2 = build_hamiltonian(params, j_max)
    try:
        w1, v1 = np.linalg.eigh(h1)
        w2, v2 = np.linalg.eigh(h2)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"sector eigensolve failed: {exc}") from exc

    energies = np.concatenate([w1, w2])
    sector = np.concatenate([np.zeros(len(w1), dtype=int),
                             np.ones(len(w2), dtype=int)])
    within = np.concatenate([np.arange(len(w1)), np.arange(len(w2))])
    # Stable order: energy, then even sector first at exact degeneracies.
    order = np.lexsort((within, sector, energies))[:n_states]

    coeffs = np.zeros((n_states, j_max + 1))
    labels = []
    for row, idx in enumerate(order):
        if sector[idx] == 0:
            coeffs[row] = _fix_sign(v1[:, within[idx]])
            labels.append(SymmetryLabel.A1)
        else:
            coeffs[row, 1:] = _fix_sign(v2[:, within[idx]])
            labels.append(SymmetryLabel.A2)
    return PendularSpectrum(params=params, energies=energies[order],
                            coefficients=coeffs, labels=tuple(labels),
                            j_max=j_max)


def classify_symmetry(psi: Wavefunction) -> SymmetryLabel:
    """Label a grid wavefunction by parity under theta -> -theta.

    The wrong-parity part must be below tolerance; a state with both parts
    large indicates basis contamination and raises.
    """
    amps = psi.amplitudes
    rev = np.roll(amps[::-1], 1)       # amplitude at -theta_k
    dth = psi.grid.dtheta
    odd_norm = math.sqrt(float(np.sum(np.abs(amps - rev) ** 2)) * dth) / 2.0
    even_norm = math.sqrt(float(np.sum(np.abs(amps + rev) ** 2)) * dth) / 2.0
    if odd_norm < PARITY_NORM_TOL and even_norm >= PARITY_NORM_TOL:
        return SymmetryLabel.A1
    if even_norm < PARITY_NORM_TOL and odd_norm >= PARITY_NORM_TOL:
        return SymmetryLabel.A2
    raise ValueError(
        f"mixed parity: even-part norm {even_norm:.3e}, "
        f"odd-part norm {odd_norm:.3e}")


@dataclass(frozen=True)
class CrossingRecord:
    state_pair: Tuple[int, int]
    eta_at_crossing: float
    zeta: float
    kappa: int
    kind: str          # 'genuine' | 'avoided'
    min_gap: float


def _gap(eta: float, zeta: float, pair: Tuple[int, int], j_max: int) -> float:
    sp = solve_spectrum(InteractionParams(eta, zeta), pair[1] + 1, j_max)
    return float(sp.energies[pair[1]] - sp.energies[pair[0]])


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def crossing_scan(zeta: float, eta_range: Tuple[float, float],
                  pair: Tuple[int, int], resolution: int = 200,
                  j_max: int = DEFAULT_J_MAX,
                  eta_tol: float = 1e-9) -> List[CrossingRecord]:
    """Locate gap minima of the pair over an eta window.

    Coarse scan, then golden-section refinement of each interior bracket.
    Genuine vs avoided follows the symmetry labels at the refined minimum;
    an empty list means no interior minimum, not an error.
    """
    if pair[1] != pair[0] + 1:
        raise ValueError("pair must be adjacent states (n, n+1)")
    lo, hi = min(eta_range), max(eta_range)
    if resolution < 8:
        raise ValueError("resolution too small")
    etas = np.linspace(lo, hi, resolution)
    gaps = np.array([_gap(e, zeta, pair, j_max) for e in etas])

    records = []
    for k in range(1, resolution - 1):
        if not (gaps[k] < gaps[k - 1] and gaps[k] <= gaps[k + 1]):
            continue
        eta_c = _golden_min(lambda e: _gap(e, zeta, pair, j_max),
                            etas[k - 1], etas[k + 1], eta_tol)
        sp = solve_spectrum(InteractionParams(eta_c, zeta), pair[1] + 1, j_max)
        gap_c = float(sp.energies[pair[1]] - sp.energies[pair[0]])
        genuine = sp.labels[pair[0]] is not sp.labels[pair[1]]
        records.append(CrossingRecord(
            state_pair=pair, eta_at_crossing=eta_c, zeta=zeta,
            kappa=int(round(abs(eta_c) / math.sqrt(zeta))),
            kind="genuine" if genuine else "avoided",
            min_gap=gap_c))
    return records
