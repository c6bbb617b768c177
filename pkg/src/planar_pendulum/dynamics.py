"""Observable dynamics after a sudden field switch.

Switch-off: the pendular state is frozen while the field vanishes, so the
free-rotor coefficients evolve with phases exp(-i*j^2*tau) and the
orientation / alignment signals are short Fourier sums over delta-j = +-1
and 0, +-2 pairs. Switch-on: a free-rotor state is frozen while the field
appears, the pendular populations are constant, and every observable
splits into a static population term plus coherence oscillations at the
level-gap frequencies within each symmetry sector.

All coefficient/element products here are built from one consistent sign
convention (the pi-aligned grid states), which keeps the cross terms
meaningful; the stored eigenvector signs never enter alone.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    DEFAULT_J_MAX,
    AngularGrid,
    InteractionParams,
    SymmetryLabel,
    make_grid,
)
from .cqes import (
    SwitchCoefficients,
    aligned_grid_state,
    quadrature_switch_off_coefficients,
    quadrature_switch_on_coefficients,
)
from .spectrum import PendularSpectrum, solve_spectrum

SAMPLES_PER_PERIOD = 512
POPULATED_FLOOR = 1e-4      # |C|^2 above this counts as populated
IMAG_RESIDUE_TOL = 1e-10
_BOUNDS_SLACK = 1e-8

_OBSERVABLES = ("cos", "cos2", "J2", "energy")


def make_tau_grid(tau_max: float, samples_per_period: int = SAMPLES_PER_PERIOD
                  ) -> np.ndarray:
    """Uniform [0, tau_max] grid at the default sampling density."""
    if tau_max <= 0:
        raise ValueError("tau_max must be > 0")
    n = max(2, round(samples_per_period * tau_max / (2.0 * math.pi)))
    return np.linspace(0.0, tau_max, n + 1)


@dataclass(frozen=True)
class ExpectationSeries:
    tau_grid: np.ndarray
    values: np.ndarray
    observable: str

    def __post_init__(self):
        if self.observable not in _OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}")
        v = self.values
        if self.observable == "cos":
            lo, hi = -1.0, 1.0
        elif self.observable == "cos2":
            lo, hi = 0.0, 1.0
        elif self.observable == "J2":
            lo, hi = 0.0, math.inf
        else:
            return
        if v.min() < lo - _BOUNDS_SLACK or v.max() > hi + _BOUNDS_SLACK:
            raise RuntimeError(
                f"{self.observable} series leaves [{lo}, {hi}]: "
                f"range [{v.min():.3e}, {v.max():.3e}]")


def _realize(tau_grid: np.ndarray, values: np.ndarray,
             observable: str) -> ExpectationSeries:
    # Hermitian expectations: imaginary residue must be numerical noise
    resid = float(np.max(np.abs(values.imag))) if np.iscomplexobj(values) else 0.0
    if resid > IMAG_RESIDUE_TOL:
        raise RuntimeError(
            f"imaginary residue {resid:.3e} in {observable} series")
    return ExpectationSeries(tau_grid=tau_grid,
                             values=np.asarray(values.real, dtype=float),
                             observable=observable)


@dataclass(frozen=True)
class PopulationRecord:
    index: Union[int, Tuple[SymmetryLabel, int]]
    probability: float


def total_population(records: Sequence[PopulationRecord]) -> float:
    return float(sum(r.probability for r in records))


# ---------------------------------------------------------------------------
# switch-off: pendular state released into free rotation


def switch_off_populations(spectrum: PendularSpectrum, n0: int,
                           j_max: int = DEFAULT_J_MAX,
                           grid: Optional[AngularGrid] = None
                           ) -> List[PopulationRecord]:
    """|<j|phi_n0>|^2 by quadrature, folded to j >= 0 rows.

    The underlying signed-j weights satisfy P(-j) = P(j); each reported
    row carries the combined +-j probability so the list sums to one.
    """
    coeffs = quadrature_switch_off_coefficients(spectrum, n0, j_max, grid)
    p = np.abs(coeffs.c) ** 2
    records = [PopulationRecord(index=0, probability=float(p[j_max]))]
    for j in range(1, j_max + 1):
        records.append(PopulationRecord(
            index=j, probability=float(p[j_max + j] + p[j_max - j])))
    return records


def switch_off_evolution(coeffs: SwitchCoefficients,
                         tau_grid: np.ndarray) -> Dict[str, ExpectationSeries]:
    """Orientation, alignment, and kinetic-energy series after switch-off.

    cos couples j to j+-1 (phase 2j+1), cos^2 couples j to j, j+-2
    (phase 4j+4); <J^2> carries no cross terms and stays constant.
    """
    if coeffs.kind != "switch_off":
        raise ValueError("needs switch_off coefficients")
    tau_grid = np.asarray(tau_grid, dtype=float)
    jm = coeffs.j_max
    c = coeffs.c
    j = np.arange(-jm, jm + 1)

    def band_sum(offset: int) -> np.ndarray:
        # <exp(i*offset*theta)> plus its Hermitian mirror, kept complex so
        # the realness of the total is a checked property, not an assumption
        w_up = np.conj(c[offset:]) * c[:-offset]
        freq = (j[:-offset] + offset) ** 2 - j[:-offset] ** 2
        up = np.exp(1j * np.outer(tau_grid, freq)) @ w_up
        dn = np.exp(-1j * np.outer(tau_grid, freq)) @ np.conj(w_up)
        return up + dn

    cos_vals = 0.5 * band_sum(1)
    static = 0.5 * float(np.sum(np.abs(c) ** 2))
    cos2_vals = static + 0.25 * band_sum(2)

    j2_const = float(np.sum(j ** 2 * np.abs(c) ** 2))
    j2_vals = np.full_like(tau_grid, j2_const)

    return {
        "cos": _realize(tau_grid, cos_vals, "cos"),
        "cos2": _realize(tau_grid, cos2_vals, "cos2"),
        "J2": ExpectationSeries(tau_grid, j2_vals, "J2"),
    }


# ---------------------------------------------------------------------------
# switch-on: free-rotor state released into the pendular spectrum


def switch_on_populations(spectrum: PendularSpectrum, j0: int,
                          grid: Optional[AngularGrid] = None
                          ) -> List[PopulationRecord]:
    """|<phi_{Gamma,n}|j0>|^2 for every solved state."""
    coeffs = quadrature_switch_on_coefficients(spectrum, j0, grid)
    return [
        PopulationRecord(index=(spectrum.labels[n], n),
                         probability=float(np.abs(coeffs.c[n]) ** 2))
        for n in range(spectrum.n_states)
    ]


def required_state_count(coeffs: SwitchCoefficients, tol: float = 1e-8) -> int:
    """Smallest n_states whose cumulative population exceeds 1 - tol."""
    cum = np.cumsum(np.abs(coeffs.c) ** 2)
    hit = np.nonzero(cum > 1.0 - tol)[0]
    if len(hit) == 0:
        raise ValueError(
            f"cumulative population reaches only {cum[-1]:.12f}; "
            "solve more states")
    return int(hit[0]) + 1


def _aligned_state_matrix(spec: PendularSpectrum,
                          grid: AngularGrid) -> np.ndarray:
    return np.stack([aligned_grid_state(spec, n, grid)
                     for n in range(spec.n_states)])


def _element_matrices(spec: PendularSpectrum, grid: AngularGrid,
                      enforce_selection_rules: bool = True
                      ) -> Tuple[np.ndarray, np.ndarray]:
    """cos and cos^2 element matrices in the pi-aligned sign convention."""
    f = _aligned_state_matrix(spec, grid)
    w = np.cos(grid.theta)
    m_cos = (f * w) @ f.T * grid.dtheta
    m_cos2 = (f * w ** 2) @ f.T * grid.dtheta
    if enforce_selection_rules:
        n = spec.n_states
        same = np.array([[spec.labels[i] is spec.labels[j] for j in range(n)]
                         for i in range(n)])
        m_cos = np.where(same, m_cos, 0.0)
        m_cos2 = np.where(same, m_cos2, 0.0)
    return m_cos, m_cos2


@dataclass(frozen=True)
class CoherenceDecomposition:
    """Static population term and per-sector coherence parts of one
    observable's switch-on signal. The coherence parts oscillate around
    zero and are not bounded observables themselves, so they are plain
    arrays on the parent tau grid."""

    observable: str
    tau_grid: np.ndarray
    population: float
    coherence_a1: np.ndarray
    coherence_a2: np.ndarray

    def recombined(self) -> np.ndarray:
        return self.population + self.coherence_a1 + self.coherence_a2


def _coherence_split(spec: PendularSpectrum, c: np.ndarray, mat: np.ndarray,
                     tau_grid: np.ndarray, observable: str
                     ) -> Tuple[np.ndarray, CoherenceDecomposition]:
    pop = float(np.sum(np.abs(c) ** 2 * np.diag(mat).real))
    parts = {SymmetryLabel.A1: np.zeros(len(tau_grid)),
             SymmetryLabel.A2: np.zeros(len(tau_grid))}
    n = spec.n_states
    for a in range(n):
        for b in range(a + 1, n):
            if spec.labels[a] is not spec.labels[b]:
                continue
            z = np.conj(c[a]) * c[b] * mat[a, b]
            if z == 0:
                continue
            delta = spec.energies[a] - spec.energies[b]
            parts[spec.labels[a]] += 2.0 * np.real(
                z * np.exp(1j * delta * tau_grid))
    decomp = CoherenceDecomposition(observable=observable, tau_grid=tau_grid,
                                    population=pop,
                                    coherence_a1=parts[SymmetryLabel.A1],
                                    coherence_a2=parts[SymmetryLabel.A2])
    return decomp.recombined(), decomp


def switch_on_evolution(spectrum: PendularSpectrum,
                        coeffs: SwitchCoefficients,
                        tau_grid: np.ndarray,
                        grid: Optional[AngularGrid] = None,
                        enforce_selection_rules: bool = True
                        ) -> Tuple[Dict[str, ExpectationSeries],
                                   Dict[str, CoherenceDecomposition]]:
    """Series plus population/coherence decompositions after switch-on.

    Returns ({cos, cos2, J2, energy} series, {cos, cos2} decompositions).
    <J^2>(tau) follows from energy conservation: <H> + eta<cos> + zeta<cos2>.
    """
    if coeffs.kind != "switch_on":
        raise ValueError("needs switch_on coefficients")
    if len(coeffs.c) != spectrum.n_states:
        raise ValueError("coefficient vector does not match spectrum size")
    tau_grid = np.asarray(tau_grid, dtype=float)
    if grid is None:
        grid = make_grid()
    m_cos, m_cos2 = _element_matrices(spectrum, grid, enforce_selection_rules)
    c = coeffs.c

    cos_total, cos_dec = _coherence_split(spectrum, c, m_cos, tau_grid, "cos")
    cos2_total, cos2_dec = _coherence_split(spectrum, c, m_cos2, tau_grid, "cos2")

    energy = float(np.sum(np.abs(c) ** 2 * spectrum.energies))
    eta, zeta = spectrum.params.eta, spectrum.params.zeta
    j2_vals = energy + eta * cos_total + zeta * cos2_total

    series = {
        "cos": ExpectationSeries(tau_grid, cos_total, "cos"),
        "cos2": ExpectationSeries(tau_grid, cos2_total, "cos2"),
        "J2": ExpectationSeries(tau_grid, j2_vals, "J2"),
        "energy": ExpectationSeries(tau_grid, np.full_like(tau_grid, energy),
                                    "energy"),
    }
    return series, {"cos": cos_dec, "cos2": cos2_dec}


def dominant_coherence_period(spectrum: PendularSpectrum,
                              coeffs: SwitchCoefficients,
                              floor: float = POPULATED_FLOOR) -> float:
    """2*pi over the smallest gap between populated same-symmetry states."""
    if coeffs.kind != "switch_on":
        raise ValueError("needs switch_on coefficients")
    p = np.abs(coeffs.c) ** 2
    populated = [n for n in range(spectrum.n_states) if p[n] > floor]
    gaps = [abs(spectrum.energies[a] - spectrum.energies[b])
            for i, a in enumerate(populated) for b in populated[i + 1:]
            if spectrum.labels[a] is spectrum.labels[b]]
    gaps = [g for g in gaps if g > 0]
    if not gaps:
        return math.inf
    return 2.0 * math.pi / min(gaps)


def time_averaged_orientation(spectrum: PendularSpectrum,
                              coeffs: SwitchCoefficients,
                              tau_tilde: float,
                              grid: Optional[AngularGrid] = None) -> float:
    """(1/tau_tilde) * integral of <cos>(tau) over [0, tau_tilde], closed form.

    Population term plus coherence terms filtered by the window transform
    (e^{i*delta*T} - 1)/(i*delta*T), which reduces to sinc for the real
    cross weights that arise here.
    """
    if tau_tilde <= 0:
        raise ValueError("tau_tilde must be > 0")
    if coeffs.kind != "switch_on":
        raise ValueError("needs switch_on coefficients")
    if len(coeffs.c) != spectrum.n_states:
        raise ValueError("coefficient vector does not match spectrum size")
    if grid is None:
        grid = make_grid()
    m_cos, _ = _element_matrices(spectrum, grid)
    c = coeffs.c
    avg = float(np.sum(np.abs(c) ** 2 * np.diag(m_cos).real))
    n = spectrum.n_states
    for a in range(n):
        for b in range(a + 1, n):
            if spectrum.labels[a] is not spectrum.labels[b]:
                continue
            z = np.conj(c[a]) * c[b] * m_cos[a, b]
            if z == 0:
                continue
            delta = float(spectrum.energies[a] - spectrum.energies[b])
            if delta == 0.0:
                avg += 2.0 * z.real
                continue
            x = delta * tau_tilde
            window = (np.exp(1j * x) - 1.0) / (1j * x)
            avg += 2.0 * (z * window).real
    return avg


# ---------------------------------------------------------------------------
# topology map over the interaction plane


@dataclass(frozen=True)
class TopologyMap:
    """Time-averaged orientation field over the (eta, zeta) plane.

    values[i, j] belongs to (eta_values[i], zeta_values[j]). kappa_loci
    holds {kappa: eta(zeta) curve samples} for the integer-index curves
    eta = -kappa*sqrt(zeta); well_boundary is |eta| = 2*zeta, above which
    (in |eta|) the potential has a single well.
    """

    eta_values: np.ndarray
    zeta_values: np.ndarray
    values: np.ndarray
    j0: int
    tau_tilde: float
    kappa_loci: Dict[int, np.ndarray] = field(default_factory=dict)
    well_boundary: Optional[np.ndarray] = None


def _default_thread_count() -> int:
    env = os.environ.get("PLANAR_PENDULUM_THREADS")
    if env:
        try:
            v = int(env)
            if v >= 1:
                return v
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def topology_map(zeta_range: Tuple[float, float], eta_range: Tuple[float, float],
                 j0: int, tau_tilde: float, resolution: Tuple[int, int],
                 n_states: int = 20, j_max: int = DEFAULT_J_MAX,
                 threads: Optional[int] = None) -> TopologyMap:
    """Map of the time-averaged orientation, with crossing-loci overlays.

    resolution = (n_eta, n_zeta), both >= 16. Points are independent; the
    map parallelizes over them and merges by index.
    """
    n_eta, n_zeta = resolution
    if n_eta < 16 or n_zeta < 16:
        raise ValueError("resolution must be >= 16 per axis")
    eta_values = np.linspace(eta_range[0], eta_range[1], n_eta)
    zeta_values = np.linspace(zeta_range[0], zeta_range[1], n_zeta)
    if np.any(eta_values > 0):
        raise ValueError("eta grid must stay <= 0")
    if np.any(zeta_values < 0):
        raise ValueError("zeta grid must stay >= 0")
    grid = make_grid()

    def one(point: Tuple[int, int]) -> Tuple[int, int, float]:
        i, k = point
        params = InteractionParams(float(eta_values[i]), float(zeta_values[k]))
        spec = solve_spectrum(params, n_states, j_max)
        coeffs = quadrature_switch_on_coefficients(spec, j0, grid)
        return i, k, time_averaged_orientation(spec, coeffs, tau_tilde, grid)

    points = [(i, k) for i in range(n_eta) for k in range(n_zeta)]
    values = np.empty((n_eta, n_zeta))
    workers = threads if threads else _default_thread_count()
    if workers == 1:
        results = map(one, points)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(one, points)
    for i, k, v in results:
        values[i, k] = v
    if workers != 1:
        pool.shutdown()

    zq = np.sqrt(np.maximum(zeta_values, 0.0))
    eta_lo = min(abs(eta_range[0]), abs(eta_range[1]))
    eta_hi = max(abs(eta_range[0]), abs(eta_range[1]))
    loci: Dict[int, np.ndarray] = {}
    kappa_max = int(eta_hi / math.sqrt(max(zeta_values.min(), 1e-12))) if \
        zeta_values.min() > 0 else int(eta_hi)
    for kappa in range(1, max(kappa_max, 1) + 1):
        curve = -kappa * zq
        if np.any((np.abs(curve) >= eta_lo - 1e-12)
                  & (np.abs(curve) <= eta_hi + 1e-12)):
            loci[kappa] = curve
    boundary = -2.0 * zeta_values
    return TopologyMap(eta_values=eta_values, zeta_values=zeta_values,
                       values=values, j0=j0, tau_tilde=tau_tilde,
                       kappa_loci=loci, well_boundary=boundary)
