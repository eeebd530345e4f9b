"""Thermal multi-mode source, incoherent pattern synthesis, fringe extraction.

The source is a thermal cloud in a trap whose longitudinal part is an
infinitely high box of width L; each box eigenstate is replaced by its
Gaussian wave-packet surrogate with mean momentum (n+1) pi / L and momentum
spread 2 sqrt(pi) / L.  Members are Boltzmann-weighted in both degrees of
freedom and their channel densities add incoherently.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channels import (
    LongitudinalPacket,
    TransferSettings,
    apply_interferometer,
    evolve_channels,
    gaussian_packet,
)


class EnsembleError(ValueError):
    """Truncation bounds too tight for the requested tail mass."""


@dataclass(frozen=True)
class SourceSpec:
    """Box-source description in natural units (temperature as k_B T / hbar omega)."""

    box_length: float
    temperature: float
    n_long_max: int = 6000
    n_trans_max: int = 9          # highest transverse level kept (renormalized)
    weight_epsilon: float = 1e-3  # allowed longitudinal tail mass
    packet_points: int = 192      # k-grid points per surrogate packet
    packet_span: float = 4.0      # packet k-grid half-width in spread units

    def __post_init__(self):
        if self.box_length <= 0 or self.temperature <= 0:
            raise EnsembleError("box_length and temperature must be positive")
        if self.n_long_max < 0 or self.n_trans_max < 0:
            raise EnsembleError("truncation bounds must be non-negative")
        if not 0 < self.weight_epsilon <= 1:
            raise EnsembleError("weight_epsilon must be in (0, 1]")


@dataclass(frozen=True)
class EnsembleMember:
    weight: float
    n_trans: int
    n_long: int
    packet: LongitudinalPacket


def box_momentum(n_long: int, box_length: float) -> float:
    return (n_long + 1) * np.pi / box_length


def box_momentum_spread(box_length: float) -> float:
    return 2.0 * np.sqrt(np.pi) / box_length


def _longitudinal_weights(spec: SourceSpec) -> np.ndarray:
    n = np.arange(spec.n_long_max + 1)
    k = box_momentum(n, spec.box_length)
    e = 0.5 * k**2
    w = np.exp(-(e - e[0]) / spec.temperature)
    # retained fraction vs the (numerically converged) infinite sum
    n_probe = spec.n_long_max + 1
    total = w.sum()
    tail = 0.0
    while True:
        n_ext = np.arange(n_probe, n_probe + 2048)
        k_ext = box_momentum(n_ext, spec.box_length)
        w_ext = np.exp(-(0.5 * k_ext**2 - e[0]) / spec.temperature)
        tail += w_ext.sum()
        n_probe += 2048
        if w_ext[-1] < 1e-18 * total or n_probe > 10_000_000:
            break
    retained = total / (total + tail)
    if retained < 1.0 - spec.weight_epsilon:
        raise EnsembleError(
            f"longitudinal truncation keeps only {retained:.6f} of the thermal "
            f"mass; raise n_long_max above {spec.n_long_max}")
    return w / (total + tail)


def _transverse_weights(spec: SourceSpec, omega: float = 1.0) -> np.ndarray:
    # Renormalized truncation: the longitudinal pattern is exactly the same for
    # every transverse pair, so the transverse tail only rescales the total
    # intensity and can be folded into the kept levels.
    n = np.arange(spec.n_trans_max + 1)
    w = np.exp(-omega * n / spec.temperature)
    return w / w.sum()


def build_ensemble(spec: SourceSpec) -> list[EnsembleMember]:
    """Boltzmann-weighted members for every (n_trans, n_long) kept.

    Weights sum to 1 after the transverse renormalization; the longitudinal
    truncation must retain >= 1 - weight_epsilon of the thermal mass.
    """
    w_long = _longitudinal_weights(spec)
    w_long = w_long / w_long.sum()
    w_trans = _transverse_weights(spec)
    dk = box_momentum_spread(spec.box_length)
    # The k-grid spacing matters beyond integration accuracy: a discretized
    # spectrum evolves into a train of position-space replicas with period
    # 2 pi / dk_grid, which must stay outside the detection span or the
    # replicas pile up into a flat background that buries the fringes.
    packets = [
        gaussian_packet(box_momentum(nl, spec.box_length), dk,
                        n_points=spec.packet_points, span=spec.packet_span)
        for nl in range(spec.n_long_max + 1)
    ]
    members = []
    for nt in range(spec.n_trans_max + 1):
        for nl in range(spec.n_long_max + 1):
            members.append(EnsembleMember(
                weight=float(w_trans[nt] * w_long[nl]),
                n_trans=nt, n_long=nl, packet=packets[nl]))
    return members


@dataclass(frozen=True)
class PatternResult:
    z: np.ndarray
    total: np.ndarray
    even: np.ndarray       # output channels with even transverse index
    odd: np.ndarray
    reflected: float       # weighted norm on the reflection ledgers


def interference_pattern(ensemble, settings: TransferSettings, t: float,
                         z: np.ndarray) -> PatternResult:
    """Weighted incoherent sum of all member channel densities at time t.

    Members are grouped by (n_long, parity of n_trans): the device acts
    identically on every even/odd pair, so each distinct longitudinal packet
    needs at most two channel evaluations.  Members whose packets cannot
    reach the requested z window are skipped (a weight-independent rule, so
    intensities stay exactly linear in the source weights).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    z = np.asarray(z, dtype=float)

    groups = {}
    for m in ensemble:
        key = (m.n_long, m.n_trans % 2)
        if key in groups:
            groups[key] = (groups[key][0] + m.weight, m.packet)
        else:
            groups[key] = (m.weight, m.packet)

    total = np.zeros_like(z)
    even = np.zeros_like(z)
    odd = np.zeros_like(z)
    reflected = 0.0
    for (n_long, parity) in sorted(groups):
        weight, packet = groups[(n_long, parity)]
        dk = packet.spread_k
        k_lo = max(packet.k[0], 1e-12)
        k_lo_out = np.sqrt(max(k_lo**2 - 2.0 * settings.omega, 0.0))
        pad = 10.0 / dk
        if k_lo_out * t - pad > z[-1] or packet.k[-1] * t + pad < z[0]:
            # still account for its reflected mass
            out = apply_interferometer(packet, replace(settings, n_in=parity))
            reflected += weight * (out.reflected_entrance + out.reflected_blocked)
            continue
        out = apply_interferometer(packet, replace(settings, n_in=parity))
        d_stay, d_trans = evolve_channels(out, t, z)
        reflected += weight * (out.reflected_entrance + out.reflected_blocked)
        total += weight * (d_stay + d_trans)
        if parity == 0:
            even += weight * d_stay
            odd += weight * d_trans
        else:
            odd += weight * d_stay
            even += weight * d_trans
    return PatternResult(z=z, total=total, even=even, odd=odd, reflected=reflected)


@dataclass(frozen=True)
class FringeReport:
    period: float | None          # natural length; None if no significant peak
    period_fit: float | None      # least-squares cosine cross-check
    contrast: float
    window: tuple
    method: str

    def period_si(self, length_unit: float) -> float | None:
        return None if self.period is None else self.period * length_unit


def _moving_average(y: np.ndarray, n: int) -> np.ndarray:
    n = max(3, int(n) | 1)
    kernel = np.ones(n) / n
    pad = n // 2
    ypad = np.concatenate([y[pad:0:-1], y, y[-2:-pad - 2:-1]])
    return np.convolve(ypad, kernel, mode="valid")


def fringe_analysis(intensity: np.ndarray, z: np.ndarray,
                    window: tuple | None = None) -> FringeReport:
    """Fringe period from the dominant spectral peak, contrast from detrended extrema."""
    intensity = np.asarray(intensity, dtype=float)
    z = np.asarray(z, dtype=float)
    if window is not None:
        sel = (z >= window[0]) & (z <= window[1])
        z, intensity = z[sel], intensity[sel]
    else:
        window = (float(z[0]), float(z[-1]))
    if len(z) < 32:
        raise ValueError("analysis window too small")
    dz = z[1] - z[0]
    span = z[-1] - z[0]

    # cubic detrend kills the slow source envelope, whose spectral leakage
    # otherwise competes with a fringe comb only a few cycles long
    trend = np.polyval(np.polyfit(z, intensity, 3), z)
    y = (intensity - trend) * np.hanning(len(z))
    n_pad = 16 * len(z)
    spec = np.abs(np.fft.rfft(y, n=n_pad))
    freqs = np.fft.rfftfreq(n_pad, d=dz)
    df = freqs[1] - freqs[0]
    # exclude residual envelope structure slower than ~1.8 cycles per window
    lo_bin = max(int(np.ceil(1.8 / span / df)), 1)
    body = spec[lo_bin:]
    if len(body) < 4:
        raise ValueError("analysis window too small for spectral analysis")
    p = int(np.argmax(body)) + lo_bin
    significant = spec[p] > 5.0 * np.median(body)

    period = None
    period_fit = None
    if significant and 0 < p < len(spec) - 1:
        # parabolic refinement of the (already zero-padded) peak
        s0, s1, s2 = spec[p - 1], spec[p], spec[p + 1]
        denom = s0 - 2.0 * s1 + s2
        shift = 0.5 * (s0 - s2) / denom if denom != 0 else 0.0
        period = float(1.0 / ((p + shift) * df))
        period_fit = _cosine_fit_period(z, intensity - trend, period)

    # contrast from extrema after envelope detrending
    if period is not None:
        n_avg = int(round(period / dz))
    else:
        n_avg = len(z) // 8
    env = _moving_average(intensity, n_avg)
    keep = slice(n_avg // 2, len(z) - n_avg // 2)
    env_safe = np.maximum(env[keep], 1e-300)
    ratio = intensity[keep] / env_safe
    # percentiles rather than raw extrema: robust against edge artifacts
    r_hi, r_lo = np.percentile(ratio, [98.0, 2.0])
    contrast = float((r_hi - r_lo) / (r_hi + r_lo)) if r_hi + r_lo > 0 else 0.0

    return FringeReport(period=period, period_fit=period_fit,
                        contrast=contrast, window=window,
                        method="spectral_peak+cos2_fit" if period else "no_peak")


def _cosine_fit_period(z, intensity, period_seed):
    """Least-squares refinement of I ~ a + b cos(2 pi z / P + phi)."""
    from scipy.optimize import least_squares

    mean = intensity.mean()
    amp0 = 0.5 * (intensity.max() - intensity.min())

    def residual(params):
        a, b, period, phi = params
        return a + b * np.cos(2.0 * np.pi * z / period + phi) - intensity

    # seed the phase by scanning coarsely
    best = None
    for phi0 in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        r = residual([mean, amp0, period_seed, phi0])
        c = float(r @ r)
        if best is None or c < best[0]:
            best = (c, phi0)
    sol = least_squares(residual, x0=[mean, amp0, period_seed, best[1]],
                        method="lm", max_nfev=2000)
    return float(abs(sol.x[2]))
