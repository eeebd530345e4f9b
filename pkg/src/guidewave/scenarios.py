"""Standard TDSE device runs: splitter traversals, interference, thresholds.

These are desk-scale reference experiments on the device: a
single Y traversal (mode conservation), the full double-Y device with a
dispersive arm phase (mode swapping), the slow-packet reflection threshold,
and a plain traversal for conservation diagnostics.  The CLI and the
acceptance tests share these entry points.

The geometry values are calibration choices (the source text gives none);
they are chosen so the reference runs are adiabatic where required and all
knobs are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .geometry import GeometryProfile, potential_on_grid, adiabaticity_ratio
from .eigensolver import XGrid, solve_transverse
from .tdse import (
    Grid2D,
    PropagationConfig,
    SplitOperatorPropagator,
    init_packet,
    mode_populations,
    project_modes,
    total_energy,
)


def xgrid_of(grid: Grid2D) -> XGrid:
    """XGrid matching the transverse axis of a periodic 2D grid."""
    return XGrid(float(grid.x[0]), float(grid.x[-1]), grid.n_x)


def station_spectrum(profile: GeometryProfile, z: float, grid: Grid2D, n_max: int):
    xg = xgrid_of(grid)
    v = potential_on_grid(profile, grid.x, np.array([z]))[:, 0]
    return solve_transverse(v, xg, n_max, z=z)


def _smooth_window(z: np.ndarray, z_on: float, z_off: float, ramp: float) -> np.ndarray:
    """0 -> 1 -> 0 window with smoothstep edges of the given ramp length."""
    s_up = np.clip((z - z_on) / ramp, 0.0, 1.0)
    s_dn = np.clip((z_off - z) / ramp, 0.0, 1.0)
    return (s_up**2 * (3 - 2 * s_up)) * (s_dn**2 * (3 - 2 * s_dn))


def calibrate_arm_potential(delta_phi: float, k_arm: float, window: np.ndarray,
                            dz: float) -> float:
    """Height u0 of the arm potential patch producing the WKB phase delta_phi.

    delta_phi = integral [k_arm - sqrt(k_arm^2 - 2 u0 w(z))] dz for a packet
    of arm momentum k_arm; reduces to (u0 / k_arm) * integral w dz when weak.
    """
    if delta_phi == 0.0:
        return 0.0

    def accumulated(u0):
        ksq = k_arm**2 - 2.0 * u0 * window
        if np.any(ksq <= 0):
            return np.inf
        return float(np.sum(k_arm - np.sqrt(ksq)) * dz)

    u_hi = 0.49 * k_arm**2 / max(window.max(), 1e-12)
    if accumulated(u_hi) < delta_phi:
        raise ValueError("window too short to imprint this phase adiabatically")
    return brentq(lambda u: accumulated(u) - delta_phi, 0.0, u_hi, xtol=1e-12)


@dataclass(frozen=True)
class DeviceRunSpec:
    """A full double-Y run: geometry, grid, packet and stepping in one place."""

    # geometry (natural units)
    z_split_start: float = 45.0
    ramp_length: float = 70.0
    plateau_length: float = 40.0
    d_max: float = 4.5
    omega_arm: float = 2.0
    # imprint window inside the plateau
    window_margin: float = 3.0
    window_ramp: float = 6.0
    # packet
    k0: float = 2.5
    sigma_z: float = 5.0
    z0: float = 26.0
    n_mode: int = 0
    # grid
    n_x: int = 64
    x_half: float = 6.4
    n_z: int = 1024
    z_max: float = 280.0
    # stepping
    dt: float = 2.5e-3
    z_detect: float = 245.0
    n_project: int = 4

    @property
    def z_split_end(self) -> float:
        return self.z_split_start + self.ramp_length

    @property
    def z_merge_start(self) -> float:
        return self.z_split_end + self.plateau_length

    @property
    def z_merge_end(self) -> float:
        return self.z_merge_start + self.ramp_length

    def profile(self) -> GeometryProfile:
        return GeometryProfile(
            z_split_start=self.z_split_start, z_split_end=self.z_split_end,
            z_merge_start=self.z_merge_start, z_merge_end=self.z_merge_end,
            d_max=self.d_max, ramp="smoothstep", omega_arm=self.omega_arm,
            z_domain_end=self.z_max)

    def grid(self) -> Grid2D:
        return Grid2D(-self.x_half, self.x_half, self.n_x, 0.0, self.z_max, self.n_z)

    @property
    def e_kin(self) -> float:
        return 0.5 * self.k0**2

    @property
    def k_arm(self) -> float:
        # plateau longitudinal momentum of a ground-pair packet: the transverse
        # zero point rises from omega/2 to omega_arm/2
        gain = 0.5 * (self.omega_arm - 1.0)
        return float(np.sqrt(self.k0**2 - 2.0 * gain))


@dataclass
class DeviceRunResult:
    populations: np.ndarray       # P_n at the output station
    norm: float
    absorbed: float
    energy_initial: float
    energy_final: float
    time_final: float
    adiabaticity: float
    delta_phi: float
    u0: float
    psi: object                   # final WaveFunction2D
    spec: DeviceRunSpec
    profile: GeometryProfile
    v: np.ndarray
    output_spectrum: object


def run_interference(delta_phi: float, spec: DeviceRunSpec = DeviceRunSpec(),
                     keep_psi: bool = False) -> DeviceRunResult:
    """Propagate one packet through the full device with an arm phase patch.

    The phase is realized as a weak static potential on the x > 0 arm inside
    the plateau, so its momentum dispersion (phase ~ 1/k) appears naturally.
    """
    profile = spec.profile()
    grid = spec.grid()
    v = potential_on_grid(profile, grid.x, grid.z)

    z_on = spec.z_split_end + spec.window_margin
    z_off = spec.z_merge_start - spec.window_margin
    window = _smooth_window(grid.z, z_on, z_off, spec.window_ramp)
    u0 = calibrate_arm_potential(delta_phi, spec.k_arm, window, grid.dz)
    if u0:
        v = v + (u0 * window)[None, :] * (grid.x > 0)[:, None]

    input_spec = station_spectrum(profile, 0.0, grid, max(spec.n_mode + 1, 3))
    psi = init_packet(grid, input_spec.states[spec.n_mode], spec.z0,
                      spec.sigma_z, spec.k0)
    e0 = total_energy(psi, v)

    # slowest surviving branch sets the arrival time at the detection station
    v_guide = min(spec.k0, np.sqrt(max(spec.k0**2 - 2.0, 1e-6)))
    v_arm = np.sqrt(max(spec.k_arm**2 - 2.0 * u0, 1e-6))
    t_est = (spec.z_merge_end - spec.z0) / min(spec.k_arm, v_guide) \
        + (z_off - z_on) * (1.0 / v_arm - 1.0 / spec.k_arm) \
        + (spec.z_detect - spec.z_merge_end) / v_guide
    n_steps = int(np.ceil(t_est / spec.dt))

    cfg = PropagationConfig(dt=spec.dt, n_steps=n_steps)
    prop = SplitOperatorPropagator(grid, v, cfg)
    traj = prop.run(psi)

    out_spec = station_spectrum(profile, spec.z_max, grid, spec.n_project + 1)
    pops = mode_populations(psi, out_spec, spec.n_project)
    return DeviceRunResult(
        populations=pops, norm=psi.norm(), absorbed=traj.absorbed_norm,
        energy_initial=e0, energy_final=total_energy(psi, v),
        time_final=psi.time,
        adiabaticity=adiabaticity_ratio(profile, spec.e_kin),
        delta_phi=delta_phi, u0=u0,
        psi=psi if keep_psi else None, spec=spec, profile=profile,
        v=v if keep_psi else None, output_spectrum=out_spec)


def measure_velocity_split(result: DeviceRunResult, settle: float = 4.0,
                           interval: float = 12.0) -> float:
    """Centroid velocity of the n=1 output component minus the n=0 one.

    Continues the finished interference run in the straight output guide and
    differentiates the per-mode centroids over a short interval.
    """
    if result.psi is None:
        raise ValueError("run with keep_psi=True to measure velocities")
    spec, grid = result.spec, result.psi.grid
    prop = SplitOperatorPropagator(grid, result.v,
                                   PropagationConfig(dt=spec.dt, n_steps=1))

    def centroids():
        c = project_modes(result.psi, result.output_spectrum, 2)
        dens = np.abs(c) ** 2
        return np.array([np.sum(grid.z * d) / np.sum(d) for d in dens])

    prop.run(result.psi, n_steps=int(round(settle / spec.dt)))
    c1 = centroids()
    prop.run(result.psi, n_steps=int(round(interval / spec.dt)))
    c2 = centroids()
    dt_eff = int(round(interval / spec.dt)) * spec.dt
    v_modes = (c2 - c1) / dt_eff
    return float(v_modes[1] - v_modes[0])


@dataclass(frozen=True)
class SingleYSpec:
    """One splitter only: straight guide -> ramp -> split plateau."""

    z_split_start: float = 41.0
    ramp_length: float = 180.0
    d_max: float = 4.5
    omega_arm: float = 2.0
    k0: float = 2.2
    sigma_z: float = 6.0
    z0: float = 31.0
    n_x: int = 64
    x_half: float = 6.4
    n_z: int = 1024
    z_max: float = 288.0
    dt: float = 2.5e-3
    z_detect: float = 250.0

    def profile(self) -> GeometryProfile:
        # the merge ramp is pushed past the simulated window: never traversed
        far = self.z_max + 64.0
        return GeometryProfile(
            z_split_start=self.z_split_start,
            z_split_end=self.z_split_start + self.ramp_length,
            z_merge_start=far, z_merge_end=far + self.ramp_length,
            d_max=self.d_max, ramp="smoothstep", omega_arm=self.omega_arm,
            z_domain_end=far + self.ramp_length)

    def grid(self) -> Grid2D:
        return Grid2D(-self.x_half, self.x_half, self.n_x, 0.0, self.z_max, self.n_z)


def run_single_y(n_mode: int, spec: SingleYSpec = SingleYSpec()) -> dict:
    """Send transverse mode n through one Y; report plateau-mode populations."""
    profile = spec.profile()
    grid = spec.grid()
    v = potential_on_grid(profile, grid.x, grid.z)
    n_levels = max(2 * n_mode + 3, 9)
    input_spec = station_spectrum(profile, 0.0, grid, n_levels)
    psi = init_packet(grid, input_spec.states[n_mode], spec.z0, spec.sigma_z, spec.k0)

    e_kin = 0.5 * spec.k0**2
    # plateau longitudinal speed for this mode: the transverse zero-point
    # moves from (n + 1/2) omega to (n//2 + 1/2) omega_arm; odd modes speed up
    gain = spec.omega_arm * (n_mode // 2 + 0.5) - (n_mode + 0.5)
    v_plateau = np.sqrt(max(spec.k0**2 - 2.0 * gain, 0.25))
    z_end = profile.z_split_end
    t_est = (profile.z_split_start - spec.z0) / spec.k0 \
        + (min(z_end, spec.z_detect) - profile.z_split_start) \
        / (0.5 * (spec.k0 + v_plateau)) \
        + max(spec.z_detect - z_end, 0.0) / v_plateau
    n_steps = int(np.ceil(t_est / spec.dt))
    prop = SplitOperatorPropagator(grid, v, PropagationConfig(dt=spec.dt, n_steps=n_steps))
    traj = prop.run(psi)

    plateau_spec = station_spectrum(profile, spec.z_max, grid, n_levels)
    pops = mode_populations(psi, plateau_spec, n_levels + 1)
    return {
        "populations": pops,
        "retention": float(pops[n_mode]),
        "norm": psi.norm(),
        "adiabaticity": adiabaticity_ratio(profile, e_kin),
        "time_final": psi.time,
    }


@dataclass(frozen=True)
class ReflectionSpec:
    """Slow packet against the first splitter."""

    z_split_start: float = 130.0
    ramp_length: float = 30.0
    d_max: float = 4.5
    omega_arm: float = 2.0
    e_kin: float = 0.25          # in units of hbar omega
    sigma_z: float = 6.0
    z0: float = 100.0
    n_x: int = 64
    x_half: float = 6.4
    n_z: int = 2048
    z_max: float = 512.0
    dt: float = 4.0e-3
    t_total: float = 160.0


def run_reflection(spec: ReflectionSpec = ReflectionSpec()) -> dict:
    """Measure the norm transmitted past the first splitter for a slow packet."""
    far = spec.z_max + 64.0
    profile = GeometryProfile(
        z_split_start=spec.z_split_start,
        z_split_end=spec.z_split_start + spec.ramp_length,
        z_merge_start=far, z_merge_end=far + spec.ramp_length,
        d_max=spec.d_max, ramp="smoothstep", omega_arm=spec.omega_arm,
        z_domain_end=far + spec.ramp_length)
    grid = Grid2D(-spec.x_half, spec.x_half, spec.n_x, 0.0, spec.z_max, spec.n_z)
    v = potential_on_grid(profile, grid.x, grid.z)
    input_spec = station_spectrum(profile, 0.0, grid, 3)
    k0 = float(np.sqrt(2.0 * spec.e_kin))
    psi = init_packet(grid, input_spec.states[0], spec.z0, spec.sigma_z, k0)
    n_steps = int(np.ceil(spec.t_total / spec.dt))
    prop = SplitOperatorPropagator(grid, v, PropagationConfig(dt=spec.dt, n_steps=n_steps))
    prop.run(psi)
    past = grid.z > profile.z_split_end
    transmitted = float(np.sum(np.abs(psi.values[:, past]) ** 2) * grid.cell)
    return {"transmitted": transmitted, "norm": psi.norm(), "k0": k0}


@dataclass(frozen=True)
class TraversalSpec:
    """Compact device on the 512 x 4096 diagnostics grid."""

    n_x: int = 512
    x_half: float = 81.92
    n_z: int = 4096
    z_max: float = 819.2
    z_split_start: float = 48.0
    ramp_length: float = 16.0
    plateau_length: float = 8.0
    d_max: float = 4.5
    k0: float = 3.5
    sigma_z: float = 8.0
    z0: float = 40.0
    dt: float = 5.0e-3
    z_detect: float = 100.0


def run_traversal_diagnostics(spec: TraversalSpec = TraversalSpec()) -> dict:
    """Full traversal; report norm and mean-energy drift (both purely numerical)."""
    profile = GeometryProfile(
        z_split_start=spec.z_split_start,
        z_split_end=spec.z_split_start + spec.ramp_length,
        z_merge_start=spec.z_split_start + spec.ramp_length + spec.plateau_length,
        z_merge_end=spec.z_split_start + 2 * spec.ramp_length + spec.plateau_length,
        d_max=spec.d_max, ramp="smoothstep", z_domain_end=spec.z_max)
    grid = Grid2D(-spec.x_half, spec.x_half, spec.n_x, 0.0, spec.z_max, spec.n_z)
    v = potential_on_grid(profile, grid.x, grid.z)
    input_spec = station_spectrum(profile, 0.0, grid, 3)
    psi = init_packet(grid, input_spec.states[0], spec.z0, spec.sigma_z, spec.k0)
    norm0 = psi.norm()
    e0 = total_energy(psi, v)
    v_arm = np.sqrt(spec.k0**2 - 1.0)
    t_est = (spec.z_detect - spec.z0) / min(spec.k0, v_arm)
    n_steps = int(np.ceil(t_est / spec.dt))
    prop = SplitOperatorPropagator(grid, v, PropagationConfig(dt=spec.dt, n_steps=n_steps))
    prop.run(psi)
    e1 = total_energy(psi, v)
    return {
        "norm_drift": abs(psi.norm() - norm0),
        "energy_drift_rel": abs(e1 - e0) / abs(e0),
        "n_steps": n_steps,
        "grid": (spec.n_x, spec.n_z),
        "energy_initial": e0,
        "energy_final": e1,
    }
