"""Split-operator propagator: grids, packets, free dispersion, conservation."""

import numpy as np
import pytest

from guidewave.eigensolver import XGrid, solve_transverse
from guidewave.scenarios import xgrid_of
from guidewave.tdse import (
    Grid2D,
    GridError,
    PacketPlacementError,
    PropagationConfig,
    SplitOperatorPropagator,
    init_packet,
    kinetic_energy,
    mean_momentum_z,
    mode_populations,
    packet_centroid_z,
    phase_imprint,
    project_modes,
    propagate,
    total_energy,
)


def make_grid(n_x=32, n_z=512, x_half=8.0, z_max=128.0):
    return Grid2D(x_min=-x_half, x_max=x_half, n_x=n_x,
                  z_min=0.0, z_max=z_max, n_z=n_z)


def ground_chi(grid):
    x = grid.x
    chi = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    return chi / np.sqrt(np.sum(np.abs(chi) ** 2) * grid.dx)


# ---------------------------------------------------------------- grids

def test_grid_requires_power_of_two():
    with pytest.raises(GridError):
        make_grid(n_x=48)
    with pytest.raises(GridError):
        make_grid(n_z=100)


def test_grid_spacings_and_axes():
    g = make_grid()
    assert g.dx == pytest.approx(16.0 / 32)
    assert g.dz == pytest.approx(0.25)
    assert g.x[0] == pytest.approx(-8.0)
    assert len(g.z) == 512
    assert g.cell == pytest.approx(g.dx * g.dz)
    # spectral cutoffs: max |k| = pi / spacing
    assert np.max(np.abs(g.kx)) == pytest.approx(np.pi / g.dx)


def test_timestep_guard_rejects_wrapping_phase():
    g = make_grid()
    with pytest.raises(GridError, match="kinetic"):
        PropagationConfig(dt=10.0, n_steps=1).validate(g)


# ---------------------------------------------------------------- packets

def test_packet_is_normalized_with_requested_momentum():
    g = make_grid()
    psi = init_packet(g, ground_chi(g), z0=40.0, sigma_z=5.0, k0=2.0)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert mean_momentum_z(psi) == pytest.approx(2.0, abs=1e-9)
    assert packet_centroid_z(psi) == pytest.approx(40.0, abs=1e-9)


def test_packet_needs_edge_margin():
    g = make_grid()
    with pytest.raises(PacketPlacementError, match="margin"):
        init_packet(g, ground_chi(g), z0=10.0, sigma_z=5.0, k0=2.0)


def test_packet_needs_momentum_headroom():
    g = make_grid()
    with pytest.raises(PacketPlacementError, match="momentum"):
        init_packet(g, ground_chi(g), z0=60.0, sigma_z=5.0, k0=5.0)


# ---------------------------------------------------------------- free motion

def test_free_packet_dispersion_matches_analytic_width():
    # sigma(t) = sigma0 sqrt(1 + (t / (2 sigma0^2))^2); at sigma0 = 1, t = 2
    # the oracle value is sqrt(2).
    g = Grid2D(x_min=-2.0, x_max=2.0, n_x=4, z_min=0.0, z_max=64.0, n_z=512)
    chi = np.zeros(4)
    chi[1] = 1.0 / np.sqrt(g.dx)
    psi = init_packet(g, chi, z0=24.0, sigma_z=1.0, k0=3.0)
    cfg = PropagationConfig(dt=1e-3, n_steps=2000)
    propagate(psi, np.zeros((4, 512)), cfg)
    dens = psi.z_density()
    dens /= np.sum(dens) * g.dz
    mean = np.sum(g.z * dens) * g.dz
    sigma = np.sqrt(np.sum((g.z - mean) ** 2 * dens) * g.dz)
    assert mean == pytest.approx(24.0 + 3.0 * 2.0, abs=1e-6)
    assert sigma / np.sqrt(2.0) - 1.0 == pytest.approx(0.0, abs=1e-3)


def test_free_flight_conserves_norm_and_energy():
    g = make_grid()
    psi = init_packet(g, ground_chi(g), z0=40.0, sigma_z=5.0, k0=2.0)
    v = np.zeros((g.n_x, g.n_z))
    e0 = total_energy(psi, v)
    propagate(psi, v, PropagationConfig(dt=2e-3, n_steps=2000))
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert total_energy(psi, v) == pytest.approx(e0, rel=1e-10)


# ---------------------------------------------------------------- bound motion

def test_transverse_ground_state_is_stationary():
    g = make_grid(n_x=64, n_z=64, x_half=6.4, z_max=32.0)
    spectrum = solve_transverse(0.5 * xgrid_of(g).x ** 2, xgrid_of(g), n_max=6)
    psi = init_packet(g, spectrum.states[0], z0=16.0, sigma_z=3.0, k0=0.0)
    v = 0.5 * g.x[:, None] ** 2 + np.zeros((1, g.n_z))
    d0 = psi.x_density().copy()
    propagate(psi, v, PropagationConfig(dt=2e-3, n_steps=3000))
    # the finite-difference eigenstate is stationary up to the O(dx^2)
    # mismatch with the spectral kinetic operator
    assert np.max(np.abs(psi.x_density() - d0)) < 5e-3
    pops = mode_populations(psi, spectrum, 4)
    assert pops[0] == pytest.approx(1.0, abs=1e-4)
    assert np.all(pops[1:] < 1e-4)


def test_coherent_state_oscillates_at_unit_frequency():
    # displaced transverse ground state: <x>(t) = x0 cos(t)
    g = make_grid(n_x=64, n_z=64, x_half=6.4, z_max=32.0)
    chi = np.pi ** (-0.25) * np.exp(-0.5 * (g.x - 1.0) ** 2)
    chi /= np.sqrt(np.sum(chi**2) * g.dx)
    psi = init_packet(g, chi, z0=16.0, sigma_z=3.0, k0=0.0)
    v = 0.5 * g.x[:, None] ** 2 + np.zeros((1, g.n_z))
    cfg = PropagationConfig(dt=np.pi / 2000.0, n_steps=2000)   # half period
    propagate(psi, v, cfg)
    dens = psi.x_density()
    mean_x = np.sum(g.x * dens) / np.sum(dens)
    assert mean_x == pytest.approx(-1.0, abs=1e-4)


def test_snapshots_report_consistent_density():
    g = make_grid()
    psi = init_packet(g, ground_chi(g), z0=40.0, sigma_z=5.0, k0=2.0)
    v = np.zeros((g.n_x, g.n_z))
    cfg = PropagationConfig(dt=2e-3, n_steps=1000, snapshot_stride=250)
    traj = propagate(psi, v, cfg)
    assert len(traj.snapshots) == 4
    last = traj.snapshots[-1]
    assert last.time == pytest.approx(2.0)
    assert np.allclose(last.z_density, psi.z_density(), atol=1e-12)


def test_absorber_ledger_accounts_for_lost_norm():
    g = make_grid()
    psi = init_packet(g, ground_chi(g), z0=40.0, sigma_z=5.0, k0=2.5)
    v = np.zeros((g.n_x, g.n_z))
    cfg = PropagationConfig(dt=2e-3, n_steps=20000, absorber_width=48)
    traj = propagate(psi, v, cfg)
    assert traj.absorbed_norm > 0.9
    assert psi.norm() + traj.absorbed_norm == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------- imprinting

def test_phase_imprint_requires_split_packet():
    g = make_grid()
    psi = init_packet(g, ground_chi(g), z0=40.0, sigma_z=5.0, k0=0.0)
    with pytest.raises(PacketPlacementError, match="split"):
        phase_imprint(psi, np.pi)


def test_phase_imprint_rotates_half_plane():
    g = make_grid()
    chi = np.exp(-0.5 * (np.abs(g.x) - 4.0) ** 2)
    chi /= np.sqrt(np.sum(chi**2) * g.dx)
    psi = init_packet(g, chi, z0=40.0, sigma_z=5.0, k0=0.0)
    before = psi.values.copy()
    phase_imprint(psi, np.pi / 2)
    right = g.x > 0
    assert np.allclose(psi.values[right], 1j * before[right])
    assert np.allclose(psi.values[~right], before[~right])
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
