import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import unitary_boson_config
from trihalo.errors import ConfigurationError, DomainError
from trihalo.model import (
    ChannelLabel,
    PairChannel,
    PoleKind,
    SystemConfig,
    default_c20_config,
    resolve_config,
)
from trihalo.quadrature import build_grid
from trihalo.spectrum import (
    NO_EFIMOV_REGIME,
    ResonantPairs,
    _ordered_eigenvalues,
    boron19_config,
    build_kernel,
    calibrate_range_parameter,
    efimov_scale_factor,
    find_trimers,
    threshold_scan,
    trimer_determinant,
)


# --- kernel ----------------------------------------------------------------


def test_kernel_real_and_subcritical_far_below(grid):
    cfg = default_c20_config()  # beta_nc = 1.0 default
    K = build_kernel(cfg, grid, -100.0)
    assert K.matrix.dtype == np.float64
    radius = np.max(np.abs(np.linalg.eigvals(K.matrix)))
    assert radius < 1.0


def test_kernel_on_cut_error(grid):
    cfg = default_c20_config()
    with pytest.raises(DomainError, match="scattering"):
        build_kernel(cfg, grid, -0.1)  # above the dimer threshold at -0.25 MeV


def test_kernel_schwarz_reflection(grid):
    cfg = default_c20_config()
    z = complex(-1.0, 0.5)
    up = build_kernel(cfg, grid, z).matrix
    dn = build_kernel(cfg, grid, z.conjugate()).matrix
    assert np.allclose(dn, up.conjugate(), rtol=1e-12, atol=1e-300)


def test_kernel_identical_boson_reduction():
    cfg = unitary_boson_config(a_fm=-500.0, beta_inv_fm=1.0)
    g = build_grid(48, 0.5)
    K = build_kernel(cfg, g, -2.0)
    n = g.count
    # with all three pairs identical the two exchange blocks coincide ...
    assert np.allclose(K.nn, K.nc, rtol=1e-10)
    # ... and the coupled system reduces to the single-amplitude kernel 2*K_nn
    lam_full = np.max(np.linalg.eigvals(K.matrix).real)
    lam_single = np.max(np.linalg.eigvals(2.0 * K.nn).real)
    assert lam_full == pytest.approx(lam_single, rel=1e-9)


# --- determinant surrogate -------------------------------------------------


def test_determinant_far_detuning_limit(grid):
    cfg = default_c20_config()
    assert trimer_determinant(cfg, grid, -1e6) == pytest.approx(1.0, abs=1e-3)


def test_determinant_domain_error(grid):
    cfg = default_c20_config()
    with pytest.raises(DomainError):
        trimer_determinant(cfg, grid, -0.1)


def test_determinant_bracket_and_bisection(grid, calibrated_c20):
    cfg = calibrated_c20
    lo, hi = -20.0, -0.25  # ground state near -4.16 MeV
    d_lo = trimer_determinant(cfg, grid, lo)
    d_hi = trimer_determinant(cfg, grid, hi)
    assert d_lo > 0 > d_hi
    root = brentq(lambda E: trimer_determinant(cfg, grid, E), lo, hi, rtol=1e-12)
    spec = find_trimers(cfg, grid, search_window=(1e-3, 2e4), max_states=1)
    assert -root * 1000.0 == pytest.approx(spec.levels[0].epsilon3_keV, rel=1e-8)


def test_determinant_continuity(grid, calibrated_c20):
    E = np.linspace(-8.0, -0.3, 25)
    vals = [trimer_determinant(calibrated_c20, grid, e) for e in E]
    assert all(np.isfinite(vals))
    assert max(abs(np.diff(vals))) < 0.6  # no jumps on a modest mesh


# --- spectra ---------------------------------------------------------------


def test_find_trimers_max_states(grid, calibrated_c20):
    cfg = replace(
        calibrated_c20,
        nc_channel=replace(
            calibrated_c20.nc_channel, epsilon2_keV=100.0, scattering_length_fm=None
        ),
    )
    spec = find_trimers(cfg, grid, search_window=(1e-3, 2e4), max_states=1)
    assert len(spec.levels) == 1 and spec.levels[0].index == 0
    full = find_trimers(cfg, grid, search_window=(1e-3, 2e4), max_states=8)
    assert len(full.levels) >= 2  # ground + first excited below the n+dimer threshold
    energies = [lv.epsilon3_keV for lv in full.levels]
    assert all(a > b for a, b in zip(energies, energies[1:]))


def test_find_trimers_window_keeps_absolute_indices(unitary_boson_spectrum):
    all_levels = {lv.index: lv.epsilon3_keV for lv in unitary_boson_spectrum.levels}
    g = build_grid(160, 0.03)
    windowed = find_trimers(
        unitary_boson_spectrum.config_snapshot, g,
        search_window=(1.0, 1e4), max_states=6,
    )
    got = {lv.index: lv.epsilon3_keV for lv in windowed.levels}
    assert set(got) == {1, 2}
    for idx, e in got.items():
        assert e == pytest.approx(all_levels[idx], rel=1e-9)


def test_find_trimers_empty_spectrum_is_valid(grid):
    weak = resolve_config(
        SystemConfig(
            core_mass_number=17,
            nc_channel=PairChannel(
                ChannelLabel.neutron_core, PoleKind.virtual, 1.0,
                scattering_length_fm=-3.0,
            ),
            nn_channel=PairChannel(
                ChannelLabel.neutron_neutron, PoleKind.virtual, 1.0,
                scattering_length_fm=-3.0,
            ),
        )
    )
    spec = find_trimers(weak, grid, search_window=(1e-3, 1e6), max_states=4)
    assert spec.levels == ()


def test_grid_refinement_stability(calibrated_c20):
    fine = build_grid(192, 0.1)
    coarse = build_grid(96, 0.1)
    e_coarse = find_trimers(
        calibrated_c20, coarse, (1e-3, 2e4), max_states=1
    ).levels[0].epsilon3_keV
    e_fine = find_trimers(
        calibrated_c20, fine, (1e-3, 2e4), max_states=1
    ).levels[0].epsilon3_keV
    assert abs(e_fine / e_coarse - 1.0) < 1e-3


def test_root_refinement_tolerance(grid, calibrated_c20):
    spec = find_trimers(calibrated_c20, grid, (1e-3, 2e4), max_states=1)
    E_root = -spec.levels[0].epsilon3_keV / 1000.0
    ev = _ordered_eigenvalues(calibrated_c20, grid, E_root)
    assert abs(ev[0] - 1.0) < 1e-8


# --- scale factor ----------------------------------------------------------


def test_scale_factor_identical_bosons():
    sf = efimov_scale_factor(1.0, ResonantPairs.all_three)
    assert sf.s0 == pytest.approx(1.00624, abs=2e-5)
    assert sf.energy_ratio == pytest.approx(math.exp(2 * math.pi / sf.s0), rel=0)
    assert abs(sf.energy_ratio - 515.0) < 0.1


def test_scale_factor_matches_classic_boson_equation():
    # independent anchor: s cosh(pi s/2) = (8/sqrt(3)) sinh(pi s/6)
    f = lambda s: s * math.cosh(math.pi * s / 2) - (8 / math.sqrt(3)) * math.sinh(
        math.pi * s / 6
    )
    s_ref = brentq(f, 0.5, 2.0, xtol=1e-14)
    sf = efimov_scale_factor(1.0, ResonantPairs.all_three)
    assert sf.s0 == pytest.approx(s_ref, abs=1e-10)


def test_scale_factor_root_residual():
    from trihalo.spectrum import _scale_equation

    for A in (1.0, 18.0, 17.0):
        for mode in ResonantPairs:
            sf = efimov_scale_factor(A, mode)
            assert abs(_scale_equation(A, mode)(sf.s0)) < 1e-12


def test_scale_factor_nc_only_known_value():
    sf = efimov_scale_factor(1.0, ResonantPairs.nc_only)
    assert sf.s0 == pytest.approx(0.4137, abs=2e-4)


def test_scale_factor_continuity_in_mass_ratio():
    # s0(A) is steep near A = 1 in the single-pair mode, so check
    # continuity by step refinement instead of a hard jump cap: halving
    # the mesh step should roughly halve the largest relative jump
    for mode in ResonantPairs:
        jumps = {}
        for step in (0.5, 0.25):
            A = np.arange(1.0, 30.0 + step / 2, step)
            s = np.array([efimov_scale_factor(float(a), mode).s0 for a in A])
            assert np.all(np.diff(s) > 0) or np.all(np.diff(s) < 0)
            jumps[step] = np.max(np.abs(np.diff(s)) / s[:-1])
        ratio = jumps[0.25] / jumps[0.5]
        assert 0.3 < ratio < 0.7


def test_scale_factor_validation():
    with pytest.raises(ConfigurationError):
        efimov_scale_factor(-1.0)


# --- threshold scan and calibration ---------------------------------------


def test_threshold_scan_counts_and_first_crossing(grid, calibrated_c20):
    scan = threshold_scan(calibrated_c20, np.array([50.0, 150.0, 230.0, 300.0]), grid)
    counts = [p.bound_excited_count for p in scan.points]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] >= 1 and counts[-1] == 0
    stars = {c.state_index: c.epsilon2_star_keV for c in scan.crossings}
    assert stars[1] == pytest.approx(220.0, abs=0.1)


def test_threshold_scan_validation(grid, calibrated_c20):
    with pytest.raises(ConfigurationError):
        threshold_scan(calibrated_c20, np.array([300.0, 100.0]), grid)
    with pytest.raises(ConfigurationError):
        threshold_scan(calibrated_c20, np.array([-5.0, 100.0]), grid)


def test_calibration_hits_target_within_band(calibrated_c20):
    # sanity band around the nominal 220 keV target
    assert 110.0 <= 220.0 <= 330.0
    assert 0.5 < calibrated_c20.nc_channel.beta_inv_fm < 3.0


# --- 19B -------------------------------------------------------------------


def test_boron19_three_states(grid):
    g = build_grid(160, 0.05)
    ev = _ordered_eigenvalues(boron19_config(), g, -1e-12)
    assert int(np.sum(ev > 1.0)) == 3


def test_boron19_fewer_states_at_small_a(grid):
    g = build_grid(160, 0.05)
    small = boron19_config(a_nc_fm=-10.0)
    ev = _ordered_eigenvalues(small, g, -1e-12)
    assert int(np.sum(ev > 1.0)) < 3


def test_boron19_count_monotone_in_a(grid):
    g = build_grid(160, 0.05)
    base = int(np.sum(_ordered_eigenvalues(boron19_config(), g, -1e-12) > 1.0))
    doubled = int(
        np.sum(_ordered_eigenvalues(boron19_config(a_nc_fm=-358.0), g, -1e-12) > 1.0)
    )
    assert doubled >= base
