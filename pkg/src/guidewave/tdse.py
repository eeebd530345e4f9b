"""2D split-operator Schroedinger propagation through the device.

Strang splitting with a spectral kinetic step: half potential phase, full
kinetic phase applied in Fourier space along both axes, half potential
phase.  The potential is static, so the two half phases of consecutive
steps are fused.  Optional cosine absorbing masks at the z edges feed an
absorbed-norm ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import os

import numpy as np
import scipy.fft as sfft

from .eigensolver import TransverseSpectrum


class GridError(ValueError):
    pass


class PacketPlacementError(ValueError):
    pass


class PropagationError(RuntimeError):
    pass


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("GUIDEWAVE_THREADS", "") or 0)) \
            if os.environ.get("GUIDEWAVE_THREADS") else (os.cpu_count() or 1)
    except ValueError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid; x is transverse (axis 0), z longitudinal (axis 1)."""

    x_min: float
    x_max: float
    n_x: int
    z_min: float
    z_max: float
    n_z: int

    def __post_init__(self):
        if not (_is_pow2(self.n_x) and _is_pow2(self.n_z)):
            raise GridError("grid counts must be powers of two")
        if not (self.x_max > self.x_min and self.z_max > self.z_min):
            raise GridError("grid extents are empty")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / self.n_z

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_x)

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.dz * np.arange(self.n_z)

    @property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n_x, d=self.dx)

    @property
    def kz(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n_z, d=self.dz)

    @property
    def cell(self) -> float:
        return self.dx * self.dz

    def kinetic_max(self) -> float:
        return 0.5 * (np.max(self.kx**2) + np.max(self.kz**2))


@dataclass
class WaveFunction2D:
    grid: Grid2D
    values: np.ndarray          # complex, shape (n_x, n_z)
    time: float = 0.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell)

    def z_density(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=0) * self.grid.dx

    def x_density(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=1) * self.grid.dz


@dataclass(frozen=True)
class PropagationConfig:
    dt: float
    n_steps: int
    absorber_width: int = 0        # z-edge cosine mask, in grid cells; 0 = off
    snapshot_stride: int = 0       # 0 = no intermediate snapshots
    nan_check_stride: int = 512

    def validate(self, grid: Grid2D) -> None:
        if self.dt <= 0 or self.n_steps <= 0:
            raise GridError("dt and n_steps must be positive")
        guard = self.dt * grid.kinetic_max()
        if guard >= 1.0:
            raise GridError(
                f"dt * max kinetic eigenvalue = {guard:.3f} >= 1 "
                "(kinetic phase would wrap); shrink dt or coarsen the grid")
        if self.absorber_width and self.absorber_width < 8:
            raise GridError("absorber width must be >= 8 cells when enabled")


def init_packet(grid: Grid2D, chi: np.ndarray, z0: float, sigma_z: float,
                k0: float) -> WaveFunction2D:
    """Transverse mode times a Gaussian longitudinal packet exp(i k0 z).

    chi must be sampled on grid.x (L2-normalized with grid.dx); the packet
    needs a 5 sigma margin to both z edges and its momentum content must be
    covered by the grid (cutoff pi/dz at least 4x the packet max momentum).
    """
    chi = np.asarray(chi)
    if chi.shape != (grid.n_x,):
        raise PacketPlacementError("transverse mode not sampled on grid.x")
    if z0 - 5.0 * sigma_z < grid.z_min or z0 + 5.0 * sigma_z > grid.z_max:
        raise PacketPlacementError(
            f"packet at z0={z0} with sigma_z={sigma_z} lacks a 5 sigma margin")
    sigma_k = 0.5 / sigma_z
    k_max_packet = abs(k0) + 3.0 * sigma_k
    if np.pi / grid.dz < 4.0 * k_max_packet:
        raise PacketPlacementError(
            f"momentum cutoff pi/dz = {np.pi/grid.dz:.2f} below 4x the packet "
            f"max momentum {k_max_packet:.2f}")
    z = grid.z
    envelope = (2.0 * np.pi * sigma_z**2) ** (-0.25) * \
        np.exp(-((z - z0) ** 2) / (4.0 * sigma_z**2))
    psi = chi[:, None] * (envelope * np.exp(1j * k0 * z))[None, :]
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell)
    return WaveFunction2D(grid=grid, values=psi.astype(np.complex128), time=0.0)


def _absorber_mask(grid: Grid2D, width: int) -> np.ndarray:
    mask = np.ones(grid.n_z)
    ramp = np.sin(0.5 * np.pi * np.arange(width) / width) ** 2
    mask[:width] = ramp
    mask[grid.n_z - width:] = ramp[::-1]
    return mask


@dataclass
class Snapshot:
    time: float
    z_density: np.ndarray
    mode_densities: np.ndarray | None = None   # |c_n|^2(z), shape (n_modes, n_z)
    values: np.ndarray | None = None           # full field, only if requested


@dataclass
class Trajectory:
    snapshots: list
    absorbed_norm: float


class SplitOperatorPropagator:
    """Precomputed phase factors for one static potential and time step."""

    def __init__(self, grid: Grid2D, v: np.ndarray, config: PropagationConfig):
        config.validate(grid)
        if v.shape != (grid.n_x, grid.n_z):
            raise GridError("potential not sampled on the grid")
        self.grid = grid
        self.config = config
        self.v = v
        dt = config.dt
        self._half_v = np.exp(-0.5j * dt * v)
        self._full_v = self._half_v * self._half_v
        k2 = grid.kx[:, None] ** 2 + grid.kz[None, :] ** 2
        self._kinetic = np.exp(-0.5j * dt * k2)
        self._workers = fft_workers()
        self._mask = _absorber_mask(grid, config.absorber_width) \
            if config.absorber_width else None

    def _kin(self, psi: np.ndarray) -> np.ndarray:
        w = self._workers
        return sfft.ifft2(self._kinetic * sfft.fft2(psi, workers=w), workers=w)

    def run(self, psi: WaveFunction2D, n_steps: int | None = None,
            keep_fields: bool = False,
            spectrum: TransverseSpectrum | None = None,
            n_modes: int = 2) -> Trajectory:
        """Advance psi in place for n_steps; returns snapshots and absorbed norm.

        Fuses the potential half-phases of consecutive steps, closing the
        Strang bracket before every snapshot and at the end, so psi is always
        consistent at observation times.
        """
        cfg = self.config
        steps = cfg.n_steps if n_steps is None else n_steps
        stride = cfg.snapshot_stride
        cell = self.grid.cell
        absorbed = 0.0
        snapshots = []

        values = psi.values
        values = self._half_v * values
        open_bracket = True
        for i in range(1, steps + 1):
            values = self._kin(values)
            at_obs = (stride and i % stride == 0) or i == steps
            if at_obs:
                values = self._half_v * values
                open_bracket = False
            else:
                values = self._full_v * values
            if self._mask is not None:
                before = np.sum(np.abs(values) ** 2) * cell
                values = values * self._mask[None, :]
                absorbed += before - np.sum(np.abs(values) ** 2) * cell
            if i % cfg.nan_check_stride == 0 and not np.all(np.isfinite(values.view(float))):
                raise PropagationError(f"non-finite amplitudes after step {i}")
            if at_obs:
                t = psi.time + i * cfg.dt
                snap = Snapshot(time=t,
                                z_density=np.sum(np.abs(values) ** 2, axis=0) * self.grid.dx)
                if spectrum is not None:
                    c = project_modes_array(values, self.grid, spectrum, n_modes)
                    snap.mode_densities = np.abs(c) ** 2
                if keep_fields:
                    snap.values = values.copy()
                snapshots.append(snap)
                if i < steps:
                    values = self._half_v * values
                    open_bracket = True
        if open_bracket:
            # steps ended exactly on an observation, bracket already closed
            pass
        if not np.all(np.isfinite(values.view(float))):
            raise PropagationError("non-finite amplitudes at end of run")
        psi.values = values
        psi.time += steps * cfg.dt
        return Trajectory(snapshots=snapshots, absorbed_norm=float(absorbed))


def propagate(psi: WaveFunction2D, v: np.ndarray, config: PropagationConfig,
              **kwargs) -> Trajectory:
    return SplitOperatorPropagator(psi.grid, v, config).run(psi, **kwargs)


def project_modes_array(values: np.ndarray, grid: Grid2D,
                        spectrum: TransverseSpectrum, n_modes: int) -> np.ndarray:
    """c_n(z) = integral chi_n(x) psi(x, z) dx for n = 0 .. n_modes-1."""
    if spectrum.grid.n_points != grid.n_x:
        raise ValueError("station spectrum grid does not match the 2D grid")
    if not np.allclose(spectrum.grid.x, grid.x, atol=1e-9):
        raise ValueError("station spectrum x-axis does not match the 2D grid")
    chi = spectrum.states[:n_modes]
    return (chi @ values) * grid.dx


def project_modes(psi: WaveFunction2D, spectrum: TransverseSpectrum,
                  n_modes: int) -> np.ndarray:
    return project_modes_array(psi.values, psi.grid, spectrum, n_modes)


def mode_populations(psi: WaveFunction2D, spectrum: TransverseSpectrum,
                     n_modes: int) -> np.ndarray:
    """P_n = integral |c_n(z)|^2 dz."""
    c = project_modes(psi, spectrum, n_modes)
    return np.sum(np.abs(c) ** 2, axis=1) * psi.grid.dz


def phase_imprint(psi: WaveFunction2D, delta_phi, split_tolerance: float = 1e-4) -> None:
    """Multiply the x > 0 half-plane by exp(i delta_phi), in place.

    delta_phi may be a scalar or a profile sampled on grid.z.  Requires the
    packet to be fully split: negligible density within one cell of x = 0.
    """
    grid = psi.grid
    on_axis = np.abs(grid.x) <= 1.5 * grid.dx
    axis_mass = float(np.sum(np.abs(psi.values[on_axis, :]) ** 2) * grid.cell)
    if axis_mass > split_tolerance:
        raise PacketPlacementError(
            f"packet not fully split: {axis_mass:.2e} of the norm sits at x ~ 0")
    phase = np.exp(1j * (np.zeros(grid.n_z) + np.asarray(delta_phi)))
    psi.values[grid.x > 0, :] *= phase[None, :]


def kinetic_energy(psi: WaveFunction2D) -> float:
    grid = psi.grid
    w = fft_workers()
    ft = sfft.fft2(psi.values, workers=w)
    k2 = grid.kx[:, None] ** 2 + grid.kz[None, :] ** 2
    dens = np.abs(ft) ** 2
    return float(0.5 * np.sum(k2 * dens) / np.sum(dens) * psi.norm())


def total_energy(psi: WaveFunction2D, v: np.ndarray) -> float:
    pot = float(np.sum(v * np.abs(psi.values) ** 2) * psi.grid.cell)
    return kinetic_energy(psi) + pot


def packet_centroid_z(psi: WaveFunction2D) -> float:
    dens = psi.z_density()
    return float(np.sum(psi.grid.z * dens) / np.sum(dens))


def mean_momentum_z(psi: WaveFunction2D) -> float:
    grid = psi.grid
    w = fft_workers()
    ft = sfft.fft(psi.values, axis=1, workers=w)
    dens = np.sum(np.abs(ft) ** 2, axis=0)
    return float(np.sum(grid.kz * dens) / np.sum(dens))
