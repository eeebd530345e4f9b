"""Interferometer geometry: arm separation d(z), well frequency, 2D potential.

Everything here is in natural units.  The potential is the piecewise-quadratic
double well V = 0.5 * w(z)^2 * (|x| - d(z)/2)^2, which reduces exactly to a
single harmonic well of frequency omega_in where d = 0 and to two wells of
frequency omega_arm on the split plateau.  A quartic double well is available
as a robustness-check alternative.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np


class OutsideDeviceError(ValueError):
    """Longitudinal coordinate outside the device domain."""


class GeometryError(ValueError):
    """Inconsistent geometry profile."""


def _smoothstep(s):
    return s * s * (3.0 - 2.0 * s)


def _smoothstep_deriv(s):
    return 6.0 * s * (1.0 - s)


@dataclass(frozen=True)
class GeometryProfile:
    """Stations and shape of the double-Y device (natural units)."""

    z_split_start: float
    z_split_end: float
    z_merge_start: float
    z_merge_end: float
    d_max: float
    ramp: str = "smoothstep"            # "linear" | "smoothstep"
    omega_in: float = 1.0
    omega_arm: float = 2.0
    arm_delta_l: float = 0.0            # modeled in mode space, not geometrically
    z_domain_end: float = 0.0           # 0 means "ends at z_merge_end"
    well_form: str = "abs_quadratic"    # "abs_quadratic" | "quartic"

    def __post_init__(self):
        if not (0.0 <= self.z_split_start < self.z_split_end
                <= self.z_merge_start < self.z_merge_end):
            raise GeometryError(
                "stations must satisfy 0 <= split_start < split_end "
                "<= merge_start < merge_end")
        if self.d_max < 0:
            raise GeometryError("d_max must be non-negative (0 = straight guide)")
        if self.ramp not in ("linear", "smoothstep"):
            raise GeometryError(f"unknown ramp kind {self.ramp!r}")
        if self.well_form not in ("abs_quadratic", "quartic"):
            raise GeometryError(f"unknown well form {self.well_form!r}")
        if self.z_domain_end == 0.0:
            object.__setattr__(self, "z_domain_end", self.z_merge_end)
        if self.z_domain_end < self.z_merge_end:
            raise GeometryError("z_domain_end must not cut the device short")

    @property
    def z_domain(self) -> tuple[float, float]:
        return (0.0, self.z_domain_end)


def _ramp_fraction(profile: GeometryProfile, z):
    """Shape factor s in [0, 1] with d(z) = s * d_max; array-friendly."""
    z = np.asarray(z, dtype=float)
    s = np.zeros_like(z)
    up = (z >= profile.z_split_start) & (z < profile.z_split_end)
    if np.any(up):
        f = (z[up] - profile.z_split_start) / (profile.z_split_end - profile.z_split_start)
        s[up] = f if profile.ramp == "linear" else _smoothstep(f)
    plateau = (z >= profile.z_split_end) & (z <= profile.z_merge_start)
    s[plateau] = 1.0
    down = (z > profile.z_merge_start) & (z <= profile.z_merge_end)
    if np.any(down):
        f = (profile.z_merge_end - z[down]) / (profile.z_merge_end - profile.z_merge_start)
        s[down] = f if profile.ramp == "linear" else _smoothstep(f)
    return s


def _check_domain(profile: GeometryProfile, z) -> None:
    lo, hi = profile.z_domain
    z = np.asarray(z, dtype=float)
    if np.any(z < lo) or np.any(z > hi):
        raise OutsideDeviceError(
            f"z outside device domain [{lo}, {hi}]")


def separation(profile: GeometryProfile, z):
    """Arm separation d(z); zero outside the split section."""
    _check_domain(profile, z)
    out = profile.d_max * _ramp_fraction(profile, z)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(out)
    return out


def separation_slope(profile: GeometryProfile, z):
    """d'(z), analytic."""
    _check_domain(profile, z)
    z = np.asarray(z, dtype=float)
    g = np.zeros_like(z)
    up_len = profile.z_split_end - profile.z_split_start
    down_len = profile.z_merge_end - profile.z_merge_start
    up = (z >= profile.z_split_start) & (z < profile.z_split_end)
    down = (z > profile.z_merge_start) & (z <= profile.z_merge_end)
    if np.any(up):
        f = (z[up] - profile.z_split_start) / up_len
        df = 1.0 if profile.ramp == "linear" else _smoothstep_deriv(f)
        g[up] = profile.d_max * df / up_len
    if np.any(down):
        f = (profile.z_merge_end - z[down]) / down_len
        df = 1.0 if profile.ramp == "linear" else _smoothstep_deriv(f)
        g[down] = -profile.d_max * df / down_len
    if np.asarray(z).ndim == 0:
        return float(g)
    return g


def well_frequency(profile: GeometryProfile, z):
    """Transverse well frequency, interpolated with the same shape as d(z)."""
    _check_domain(profile, z)
    s = _ramp_fraction(profile, z)
    out = profile.omega_in + (profile.omega_arm - profile.omega_in) * s
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(out)
    return out


def _well_frequency_unchecked(profile: GeometryProfile, z):
    z = np.asarray(z, dtype=float)
    zc = np.clip(z, 0.0, profile.z_merge_end)
    s = _ramp_fraction(profile, zc)
    return profile.omega_in + (profile.omega_arm - profile.omega_in) * s


def potential(profile: GeometryProfile, x, z):
    """V(x, z).  z outside the device is treated as a straight guide."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    zc = np.clip(z, 0.0, profile.z_merge_end)
    d = profile.d_max * _ramp_fraction(profile, zc)
    w = _well_frequency_unchecked(profile, z)
    if profile.well_form == "abs_quadratic":
        v = 0.5 * w**2 * (np.abs(x) - 0.5 * d) ** 2
    else:
        v = _quartic_potential(profile, x, d, w)
    if v.ndim == 0:
        return float(v)
    return v


def _quartic_potential(profile, x, d, w):
    # Quartic double well with curvature w^2 at the minima +-d/2; crossfaded
    # into the harmonic single well where the arms are nearly merged, since
    # the pure quartic has no harmonic d -> 0 limit.
    d_c = 0.25 * profile.d_max if profile.d_max > 0 else 1.0
    f = np.clip(np.asarray(d) / d_c, 0.0, 1.0)
    blend = _smoothstep(f)
    d_safe = np.maximum(d, 1e-12)
    quart = (w**2 / (2.0 * d_safe**2)) * (x**2 - 0.25 * d_safe**2) ** 2
    harm = 0.5 * w**2 * x**2
    return blend * quart + (1.0 - blend) * harm


def potential_on_grid(profile: GeometryProfile, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """V sampled on the outer product of x (axis 0) and z (axis 1)."""
    return potential(profile, x[:, None], z[None, :])


def max_separation_slope(profile: GeometryProfile) -> float:
    up_len = profile.z_split_end - profile.z_split_start
    down_len = profile.z_merge_end - profile.z_merge_start
    peak = 1.0 if profile.ramp == "linear" else 1.5
    return peak * profile.d_max / min(up_len, down_len)


def adiabaticity_ratio(profile: GeometryProfile, e_kin: float) -> float:
    """max_z  E_kin * d'(z)^2 / omega_in.  Values << 1 mean adiabatic operation."""
    if e_kin <= 0:
        raise ValueError(f"E_kin must be positive, got {e_kin!r}")
    return e_kin * max_separation_slope(profile) ** 2 / profile.omega_in
