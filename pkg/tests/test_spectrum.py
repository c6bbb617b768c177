"""Eigenproblem tests: frozen spectra, algebraic levels, crossing scans."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planar_pendulum import (
    InteractionParams,
    SymmetryLabel,
    classify_symmetry,
    crossing_scan,
    make_grid,
    solve_spectrum,
)

# Full 9-state reference at (eta, zeta) = (-10, 25), checked against a
# j_max=128 solve (agreement 7e-14) before freezing.
STRONG_FIELD_ENERGIES = [
    -29.75000000033656,
    -19.749999516280777,
    -10.899673878438623,
    -10.811828637111228,
    -3.8734535039111764,
    -2.866678935017752,
    0.9115895281574578,
    4.858199081343724,
    5.91781369435089,
]
STRONG_FIELD_LABELS = ["A1", "A2", "A1", "A1", "A2", "A2", "A1", "A1", "A2"]


def test_free_rotor_levels():
    spec = solve_spectrum(InteractionParams(0.0, 0.0), 9)
    assert np.abs(spec.energies - np.array(
        [0, 1, 1, 4, 4, 9, 9, 16, 16], dtype=float)).max() < 1e-10


def test_strong_field_spectrum_frozen():
    spec = solve_spectrum(InteractionParams(-10.0, 25.0), 9)
    assert np.abs(spec.energies - np.array(STRONG_FIELD_ENERGIES)).max() < 1e-9
    assert [str(l) for l in spec.labels] == STRONG_FIELD_LABELS


@pytest.mark.parametrize("zeta", [9.0, 16.0, 25.0, 36.0])
def test_unit_index_ground_energy(zeta):
    # at |eta| = sqrt(zeta) the ground level sits exactly at -zeta
    spec = solve_spectrum(InteractionParams(-math.sqrt(zeta), zeta), 1)
    assert spec.energies[0] == pytest.approx(-zeta, abs=1e-9)


def test_index_three_algebraic_levels():
    # at |eta| = 3*sqrt(zeta), zeta=25: closed-form triple
    r = math.sqrt(401.0)
    expected = [-25.0 - (r - 1.0) / 2.0, -24.0, -25.0 + (1.0 + r) / 2.0]
    spec = solve_spectrum(InteractionParams(-15.0, 25.0), 5)
    found = spec.energies[[0, 1, 2]]
    assert np.abs(found - np.array(expected)).max() < 1e-9


def test_genuine_crossing_unit_index():
    recs = crossing_scan(16.0, (-6.0, -2.0), (1, 2), resolution=41)
    assert len(recs) == 1
    r = recs[0]
    assert r.kind == "genuine"
    assert r.eta_at_crossing == pytest.approx(-4.0, abs=1e-6)
    assert r.min_gap < 1e-9
    assert r.kappa == pytest.approx(1.0, abs=1e-6)


def test_avoided_crossing_frozen_gaps():
    r16 = crossing_scan(16.0, (-10.0, -6.0), (2, 3), resolution=41)[0]
    assert r16.kind == "avoided"
    assert r16.eta_at_crossing == pytest.approx(-8.00347439924505, abs=1e-6)
    assert r16.min_gap == pytest.approx(0.32255524090619225, abs=1e-9)

    r25 = crossing_scan(25.0, (-12.0, -8.0), (2, 3), resolution=41)[0]
    assert r25.eta_at_crossing == pytest.approx(-10.0, abs=0.05)
    assert r25.min_gap == pytest.approx(0.08784468228869890, abs=1e-9)

    r36 = crossing_scan(36.0, (-14.0, -10.0), (2, 3), resolution=41)[0]
    assert r36.min_gap == pytest.approx(0.02032028522071272, abs=1e-9)


def test_sector_bookkeeping():
    spec = solve_spectrum(InteractionParams(-7.0, 25.0), 10)
    a1, a2 = spec.sector_indices(SymmetryLabel.A1), spec.sector_indices(SymmetryLabel.A2)
    assert sorted(list(a1) + list(a2)) == list(range(10))
    grid = make_grid()
    for n in range(10):
        wf = spec.wavefunction(n, grid)
        assert classify_symmetry(wf) is spec.labels[n]


def test_variational_monotonicity():
    # enlarging the basis can only lower (or keep) each level
    p = InteractionParams(-10.0, 25.0)
    e48 = solve_spectrum(p, 9, j_max=48).energies
    e64 = solve_spectrum(p, 9, j_max=64).energies
    assert np.all(e64 <= e48 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(eta=st.floats(-20.0, -0.1), zeta=st.floats(0.5, 30.0))
def test_spectrum_properties(eta, zeta):
    spec = solve_spectrum(InteractionParams(eta, zeta), 6)
    assert np.all(np.diff(spec.energies) >= -1e-12)
    assert spec.labels[0] is SymmetryLabel.A1
    # Rayleigh quotient of the stored eigenvector reproduces the eigenvalue
    grid = make_grid()
    params = InteractionParams(eta, zeta)
    for n in (0, 3):
        wf = spec.wavefunction(n, grid)
        assert wf.expectation_energy(params) == pytest.approx(
            float(spec.energies[n]), abs=1e-8)
