"""Cheap scenario-layer checks: windows, phase calibration, spec geometry."""

import numpy as np
import pytest

from guidewave.scenarios import (
    DeviceRunSpec,
    SingleYSpec,
    _smooth_window,
    calibrate_arm_potential,
    station_spectrum,
    xgrid_of,
)


def test_smooth_window_shape():
    z = np.linspace(0.0, 100.0, 2001)
    w = _smooth_window(z, 20.0, 80.0, 10.0)
    assert np.all((w >= 0.0) & (w <= 1.0))
    assert np.all(w[z <= 20.0] == 0.0)
    assert np.all(w[z >= 80.0] == 0.0)
    assert np.all(w[(z >= 30.0) & (z <= 70.0)] == 1.0)
    assert w[np.searchsorted(z, 25.0)] == pytest.approx(0.5, abs=1e-3)


def test_phase_calibration_matches_weak_limit():
    z = np.linspace(0.0, 100.0, 4096)
    dz = z[1] - z[0]
    window = _smooth_window(z, 10.0, 90.0, 5.0)
    k_arm = 2.3
    dphi = 0.01
    u0 = calibrate_arm_potential(dphi, k_arm, window, dz)
    weak = dphi * k_arm / (np.sum(window) * dz)
    assert u0 == pytest.approx(weak, rel=1e-3)


def test_phase_calibration_reproduces_wkb_integral():
    z = np.linspace(0.0, 100.0, 4096)
    dz = z[1] - z[0]
    window = _smooth_window(z, 10.0, 90.0, 5.0)
    k_arm = 2.3
    u0 = calibrate_arm_potential(np.pi, k_arm, window, dz)
    acc = np.sum(k_arm - np.sqrt(k_arm**2 - 2.0 * u0 * window)) * dz
    assert acc == pytest.approx(np.pi, abs=1e-9)


def test_phase_calibration_zero_is_exact():
    assert calibrate_arm_potential(0.0, 2.0, np.ones(10), 0.1) == 0.0


def test_phase_calibration_rejects_impossible_phase():
    z = np.linspace(0.0, 10.0, 256)
    window = _smooth_window(z, 2.0, 8.0, 1.0)
    with pytest.raises(ValueError, match="window too short"):
        calibrate_arm_potential(100.0, 1.5, window, z[1] - z[0])


def test_device_spec_station_layout():
    spec = DeviceRunSpec()
    assert spec.z_split_end == spec.z_split_start + spec.ramp_length
    assert spec.z_merge_start == spec.z_split_end + spec.plateau_length
    assert spec.z_merge_end == spec.z_merge_start + spec.ramp_length
    assert spec.z_detect < spec.z_max
    assert spec.e_kin == pytest.approx(0.5 * spec.k0**2)
    # arm momentum accounts for the transverse zero-point rise
    gain = 0.5 * (spec.omega_arm - 1.0)
    assert spec.k_arm == pytest.approx(np.sqrt(spec.k0**2 - 2.0 * gain))


def test_station_spectrum_matches_guide_input():
    grid = DeviceRunSpec().grid()
    profile = DeviceRunSpec().profile()
    spec = station_spectrum(profile, 0.0, grid, 3)
    # the 64-point dynamics grid is coarser than the eigensolver default, so
    # the ladder only holds to the stencil bias
    assert np.allclose(spec.energies, np.arange(4) + 0.5, atol=5e-2)
    xg = xgrid_of(grid)
    assert np.allclose(xg.x, grid.x)


def test_single_y_profile_never_merges_in_window():
    spec = SingleYSpec()
    profile = spec.profile()
    assert profile.z_merge_start > spec.z_max
