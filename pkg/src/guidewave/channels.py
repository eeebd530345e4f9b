"""Analytic mode-channel model of the interferometer.

Each longitudinal momentum component acquires a dispersive phase difference
between the arms, mixes within its even/odd transverse pair through the
unitary 2x2 transfer matrix, and exits with a momentum shifted to conserve
total energy.  Components that are energetically blocked are booked on a
reflection ledger instead of being propagated.  All quantities are in
natural units (hbar = m = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PacketError(ValueError):
    """Invalid longitudinal packet."""


class PhaseError(ValueError):
    """Invalid phase-shift request."""


BLOCKED = None  # sentinel returned by exit_momentum for forbidden transitions


@dataclass(frozen=True)
class LongitudinalPacket:
    """Complex k-space amplitude on an ascending positive momentum grid."""

    k: np.ndarray              # strictly positive, ascending, uniform
    amps: np.ndarray           # complex, sum |A|^2 dk = 1
    truncated_mass: float = 0.0  # norm removed when clipping to k > 0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 1 or len(k) < 2:
            raise PacketError("k grid must be a 1D array with >= 2 points")
        if np.any(k <= 0):
            raise PacketError("k grid must be strictly positive (right-movers)")
        if np.any(np.diff(k) <= 0):
            raise PacketError("k grid must be ascending")
        norm = np.sum(np.abs(self.amps) ** 2) * self.dk
        if abs(norm - 1.0) > 1e-8:
            raise PacketError(f"packet norm {norm!r} != 1")

    @property
    def dk(self) -> float:
        return float(self.k[1] - self.k[0])

    @property
    def mean_k(self) -> float:
        w = np.abs(self.amps) ** 2
        return float(np.sum(self.k * w) / np.sum(w))

    @property
    def spread_k(self) -> float:
        w = np.abs(self.amps) ** 2
        kbar = np.sum(self.k * w) / np.sum(w)
        return float(np.sqrt(np.sum((self.k - kbar) ** 2 * w) / np.sum(w)))


def gaussian_packet(k_mean: float, k_spread: float, n_points: int = 4096,
                    span: float = 6.0, z0: float = 0.0) -> LongitudinalPacket:
    """Gaussian |A(k)|^2 with the given mean and rms spread, clipped to k > 0.

    The amplitude carries exp(-i k z0) so the packet is centered at z0 at t=0.
    """
    if k_mean <= 0 or k_spread <= 0:
        raise PacketError("k_mean and k_spread must be positive")
    lo = k_mean - span * k_spread
    hi = k_mean + span * k_spread
    eps = k_spread * 1e-6
    lo_clipped = max(lo, eps)
    k = np.linspace(lo_clipped, hi, n_points)
    a = np.exp(-((k - k_mean) ** 2) / (4.0 * k_spread**2)).astype(complex)
    a *= np.exp(-1j * k * z0)
    dk = k[1] - k[0]
    norm = np.sum(np.abs(a) ** 2) * dk
    # mass lost to the k <= 0 clip, relative to the untruncated Gaussian
    from scipy.special import erf
    truncated = 0.5 * (1.0 + erf((lo_clipped - k_mean) / (np.sqrt(2.0) * k_spread))) \
        if lo < eps else 0.0
    return LongitudinalPacket(k=k, amps=a / np.sqrt(norm), truncated_mass=truncated)


@dataclass(frozen=True)
class TransferSettings:
    """Which phase mechanism the interferometer applies, and to which input mode."""

    phase_kind: str              # "path_length" | "potential"
    delta_l: float = 0.0         # natural length, path_length kind
    u_integral: float = 0.0      # natural energy*length, potential kind
    omega: float = 1.0
    n_in: int = 0

    def __post_init__(self):
        if self.phase_kind not in ("path_length", "potential"):
            raise PhaseError(f"unknown phase kind {self.phase_kind!r}")
        if self.phase_kind == "path_length" and self.u_integral != 0.0:
            raise PhaseError("path_length kind must not set u_integral")
        if self.phase_kind == "potential" and self.delta_l != 0.0:
            raise PhaseError("potential kind must not set delta_l")
        if self.omega <= 0:
            raise PhaseError("omega must be positive")
        if self.n_in < 0:
            raise PhaseError("n_in must be >= 0")


def phase_shift(k, settings: TransferSettings):
    """Dispersive arm phase difference: k*delta_l, or (1/k) * integral(U dz)."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise PhaseError("k must be positive")
    if settings.phase_kind == "path_length":
        out = k * settings.delta_l
    else:
        out = settings.u_integral / k
    return float(out) if out.ndim == 0 else out


def transfer_matrix(delta_phi: float) -> np.ndarray:
    """Unitary 2x2 pair-mixing matrix [[cos, i sin], [i sin, cos]](dphi/2)."""
    c = np.cos(0.5 * delta_phi)
    s = np.sin(0.5 * delta_phi)
    return np.array([[c, 1j * s], [1j * s, c]])


def exit_momentum(k, transition: str, omega: float = 1.0):
    """Energy-conserving exit momentum.

    "none" keeps k; "up" (|2n> -> |2n+1>) costs transverse energy omega, so
    k' = sqrt(k^2 - 2 omega) when allowed and BLOCKED otherwise; "down" gains,
    k' = sqrt(k^2 + 2 omega).
    """
    if transition == "none":
        return k
    if transition == "up":
        ksq = k**2 - 2.0 * omega
        if np.isscalar(k):
            return float(np.sqrt(ksq)) if ksq > 0 else BLOCKED
        out = np.full_like(np.asarray(k, dtype=float), np.nan)
        ok = ksq > 0
        out[ok] = np.sqrt(ksq[ok])
        return out
    if transition == "down":
        return np.sqrt(k**2 + 2.0 * omega)
    raise ValueError(f"unknown transition {transition!r}")


@dataclass(frozen=True)
class ChannelState:
    """One transverse-mode-resolved output channel."""

    index: int                 # absolute transverse index in the output guide
    k_in: np.ndarray
    k_out: np.ndarray          # same length; blocked entries removed upstream
    amps: np.ndarray
    dk: float

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.dk)


@dataclass(frozen=True)
class InterferometerOutput:
    channels: tuple            # (stay channel, transfer channel)
    reflected_entrance: float  # E_kin < omega/2: turned back at the first Y
    reflected_blocked: float   # raising branch with k^2 < 2 omega at the exit Y

    def total_norm(self) -> float:
        return sum(ch.norm() for ch in self.channels) \
            + self.reflected_entrance + self.reflected_blocked


def apply_interferometer(packet: LongitudinalPacket,
                         settings: TransferSettings) -> InterferometerOutput:
    """Route every momentum component through the two-splitter device.

    Per component, in order: entrance-reflection check, dispersive phase and
    pair mixing, exit-blocking check on the raising branch, energy-conserving
    exit momenta.  The norm ledger balances to 1.
    """
    k = packet.k
    a = packet.amps
    dk = packet.dk
    omega = settings.omega
    n_in = settings.n_in

    passes = 0.5 * k**2 >= 0.5 * omega      # E_kin >= omega/2
    refl_entrance = float(np.sum(np.abs(a[~passes]) ** 2) * dk)

    dphi = np.zeros_like(k)
    dphi[passes] = phase_shift(k[passes], settings)
    amp_stay = np.where(passes, np.cos(0.5 * dphi) * a, 0.0)
    amp_trans = np.where(passes, 1j * np.sin(0.5 * dphi) * a, 0.0)

    if n_in % 2 == 0:
        trans_index, trans_kind = n_in + 1, "up"
    else:
        trans_index, trans_kind = n_in - 1, "down"

    if trans_kind == "up":
        allowed = k**2 > 2.0 * omega
        blocked_amp = np.where(passes & ~allowed, amp_trans, 0.0)
        refl_blocked = float(np.sum(np.abs(blocked_amp) ** 2) * dk)
        amp_trans = np.where(allowed, amp_trans, 0.0)
        k_out_trans = np.where(allowed, np.sqrt(np.maximum(k**2 - 2.0 * omega, 0.0)), np.nan)
    else:
        refl_blocked = 0.0
        k_out_trans = np.sqrt(k**2 + 2.0 * omega)

    stay = ChannelState(index=n_in, k_in=k, k_out=k.copy(), amps=amp_stay, dk=dk)
    trans = ChannelState(index=trans_index, k_in=k, k_out=k_out_trans,
                         amps=amp_trans, dk=dk)
    return InterferometerOutput(channels=(stay, trans),
                                reflected_entrance=refl_entrance,
                                reflected_blocked=refl_blocked)


def _plane_wave_synthesis(k: np.ndarray, amps: np.ndarray,
                          z: np.ndarray) -> np.ndarray:
    """psi(z_j) = sum_k amps_k exp(i k z_j), exact to rounding.

    On a uniform z grid, z_j = z_0 + (B j1 + j0) dz factorizes the phase into
    exp(i k z_0) exp(i k dz j0) exp(i k B dz j1), which needs O(sqrt(n_z))
    exponentials per k instead of n_z; non-uniform grids fall back to the
    dense outer product.
    """
    n = len(z)
    steps = np.diff(z)
    if n >= 64 and steps.size and np.allclose(steps, steps[0], rtol=1e-12):
        dz = (z[-1] - z[0]) / (n - 1)
        block = 32
        n_blocks = -(-n // block)
        c = amps * np.exp(1j * z[0] * k)
        inner = np.exp(1j * np.outer(k, dz * np.arange(block)))
        outer_ph = np.exp(1j * np.outer(k, dz * block * np.arange(n_blocks)))
        return ((c[:, None] * outer_ph).T @ inner).reshape(-1)[:n]
    return np.exp(1j * np.outer(z, k)) @ amps


def evolve_channel(channel: ChannelState, t: float, z: np.ndarray) -> np.ndarray:
    """Position-space density of one channel after free flight for time t.

    psi(z) = (2 pi)^{-1/2} sum_k A(k) sqrt(k_in/k_out) exp(i [k_out z - (k^2/2) t]) dk;
    the channel-constant transverse energy drops out of the density.  The
    sqrt(k_in/k_out) factor is the measure change of the energy-conserving
    momentum map q = k_out(k): |A_q|^2 dq = |A_k|^2 dk requires it, and
    without it the z-integrated density of a transferred channel would
    differ from its norm by a factor <k_out/k_in>.
    """
    with np.errstate(invalid="ignore"):
        jacobian = np.sqrt(channel.k_in / channel.k_out)
    amps = channel.amps * jacobian * np.exp(-0.5j * channel.k_in**2 * t) * \
        (channel.dk / np.sqrt(2.0 * np.pi))
    k_out = np.where(np.isnan(channel.k_out), 0.0, channel.k_out)
    amps = np.where(np.isnan(channel.k_out), 0.0, amps)
    psi = _plane_wave_synthesis(k_out, amps, np.asarray(z, dtype=float))
    return np.abs(psi) ** 2


def evolve_channels(output: InterferometerOutput, t: float, z: np.ndarray):
    """Densities of all channels; channels add incoherently."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return tuple(evolve_channel(ch, t, z) for ch in output.channels)


def channel_centroid(density: np.ndarray, z: np.ndarray) -> float:
    w = np.sum(density)
    if w <= 0:
        raise ValueError("empty channel has no centroid")
    return float(np.sum(z * density) / w)


def measured_velocity_split(output: InterferometerOutput, t1: float, t2: float,
                            z: np.ndarray) -> float:
    """Centroid-velocity difference (transfer minus stay channel) from two times."""
    d0a, d1a = evolve_channels(output, t1, z)
    d0b, d1b = evolve_channels(output, t2, z)
    v0 = (channel_centroid(d0b, z) - channel_centroid(d0a, z)) / (t2 - t1)
    v1 = (channel_centroid(d1b, z) - channel_centroid(d1a, z)) / (t2 - t1)
    return v1 - v0


@dataclass(frozen=True)
class RephaseResult:
    t_best: float
    times: np.ndarray
    contrasts: np.ndarray


def rephase_time(output: InterferometerOutput, t_window, n_times: int = 61,
                 n_z: int = 2048) -> RephaseResult:
    """Scan detection times for maximal total-density fringe contrast.

    The analysis window co-moves with the packet: it is centered on the
    norm-weighted mean exit momentum times t and spans the dispersed envelope.
    """
    from .thermal import fringe_analysis

    t_lo, t_hi = t_window
    if not t_hi > t_lo >= 0:
        raise ValueError("t window must satisfy 0 <= t_lo < t_hi")
    for ch in output.channels:
        if ch.norm() <= 1e-12:
            raise ValueError("rephase_time needs both channels populated")
    kbar = [float(np.sum(np.nan_to_num(ch.k_out) * np.abs(ch.amps) ** 2)
                  / max(np.sum(np.abs(ch.amps) ** 2), 1e-300))
            for ch in output.channels]
    k_center = 0.5 * (kbar[0] + kbar[1])
    spread = max(ch.k_in.max() - ch.k_in.min() for ch in output.channels)

    times = np.linspace(t_lo, t_hi, n_times)
    contrasts = np.empty(n_times)
    for i, t in enumerate(times):
        half = 20.0 / spread + 0.75 * spread * max(t, 1.0)
        z = np.linspace(k_center * t - half, k_center * t + half, n_z)
        total = sum(evolve_channels(output, t, z))
        contrasts[i] = fringe_analysis(total, z).contrast
    return RephaseResult(t_best=float(times[np.argmax(contrasts)]),
                         times=times, contrasts=contrasts)
