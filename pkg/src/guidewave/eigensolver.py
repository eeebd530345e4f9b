"""Transverse stationary states at fixed z.

Second-order finite differences on a uniform grid give a symmetric
tridiagonal Hamiltonian; the lowest eigenpairs come from
scipy.linalg.eigh_tridiagonal.  This also produces the level correlation
diagram along the device and the symmetric/antisymmetric -> left/right
decomposition of nearly degenerate pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .geometry import GeometryProfile, potential


class GridTooSmallError(ValueError):
    """Requested levels are not bound by the potential on this grid."""


class NotSplitError(ValueError):
    """Pair is not degenerate enough for a left/right decomposition."""


DEGENERACY_THRESHOLD = 1e-4  # natural energy; far below omega, far above solver noise


@dataclass(frozen=True)
class XGrid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("XGrid needs at least 64 points")
        if not self.x_max > self.x_min:
            raise ValueError("XGrid extent is empty")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)


@dataclass(frozen=True)
class TransverseSpectrum:
    """Lowest eigenpairs of -1/2 d^2/dx^2 + V(x) at one station."""

    z: float
    grid: XGrid
    energies: np.ndarray      # shape (n_max+1,), ascending
    states: np.ndarray        # shape (n_max+1, n_points), rows L2-normalized

    @property
    def n_max(self) -> int:
        return len(self.energies) - 1


def _fix_signs(states: np.ndarray, dx: float) -> np.ndarray:
    # Sign convention: value at the leftmost antinode is positive.
    out = states.copy()
    for row in out:
        peak = np.max(np.abs(row))
        idx = np.argmax(np.abs(row) > 0.1 * peak)
        if row[idx] < 0:
            row *= -1.0
    return out


def _stencil_energies(v: np.ndarray, dx: float, n_max: int):
    diag = 1.0 / dx**2 + v
    off = np.full(len(v) - 1, -0.5 / dx**2)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, n_max))


def _parity_purify(states: np.ndarray, energies: np.ndarray, dx: float,
                   gap_tol: float = 1e-9) -> np.ndarray:
    # Within numerically degenerate pairs the tridiagonal solver returns an
    # arbitrary rotation; diagonalize the parity operator (index reversal on a
    # symmetric grid) in each such 2D subspace to recover even/odd members.
    out = states.copy()
    i = 0
    while i + 1 < len(energies):
        if energies[i + 1] - energies[i] < gap_tol:
            a, b = out[i], out[i + 1]
            pa, pb = a[::-1], b[::-1]
            p = np.array([[a @ pa, a @ pb], [b @ pa, b @ pb]]) * dx
            if abs(p[0, 0]) < 0.999:   # mixed pair, rotate to parity eigenbasis
                w, vec = np.linalg.eigh(0.5 * (p + p.T))
                even_first = np.argsort(-w)
                rot = vec[:, even_first]
                out[i], out[i + 1] = rot[0, 0] * a + rot[1, 0] * b, \
                    rot[0, 1] * a + rot[1, 1] * b
            i += 2
        else:
            i += 1
    return out


def solve_transverse(v: np.ndarray, grid: XGrid, n_max: int, z: float = 0.0) -> TransverseSpectrum:
    """Lowest n_max+1 eigenpairs for the potential samples v on grid.

    Three-point stencil plus symmetric tridiagonal eigensolve; the O(dx^2)
    discretization bias of the energies is removed by one Richardson step
    against a half-resolution solve on the same extent.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.n_points,):
        raise ValueError("potential samples do not match the grid")
    dx = grid.dx
    energies, vecs = _stencil_energies(v, dx, n_max)
    # bound-state sanity: requested levels must sit below the edge potential
    edge = min(v[0], v[-1])
    if energies[-1] > 0.9 * edge:
        raise GridTooSmallError(
            f"level {n_max} at E={energies[-1]:.3g} approaches the grid-edge "
            f"potential {edge:.3g}; widen the grid or request fewer levels")
    if grid.n_points // 2 >= 64:
        # coarse companion solve on every other sample: exact nesting, 2x spacing
        e_coarse, _ = _stencil_energies(v[::2], 2.0 * dx, n_max)
        energies = (4.0 * energies - e_coarse) / 3.0
    states = (vecs / np.sqrt(dx)).T    # rows, sum |chi|^2 dx = 1
    states = _parity_purify(states, energies, dx)
    states = _fix_signs(states, dx)
    return TransverseSpectrum(z=z, grid=grid, energies=energies, states=states)


def solve_at_station(profile: GeometryProfile, z: float, grid: XGrid, n_max: int) -> TransverseSpectrum:
    v = potential(profile, grid.x, np.full(grid.n_points, z))
    return solve_transverse(v, grid, n_max, z=z)


def correlation_diagram(profile: GeometryProfile, z_samples, grid: XGrid, n_max: int) -> np.ndarray:
    """Rows (z, E_0 .. E_nmax) at each station, in station order."""
    rows = []
    for z in z_samples:
        spec = solve_at_station(profile, float(z), grid, n_max)
        rows.append(np.concatenate([[z], spec.energies]))
    return np.asarray(rows)


def splitting_gap(spectrum: TransverseSpectrum, n: int) -> float:
    """E_{2n+1} - E_{2n} of the n-th even/odd pair."""
    if 2 * n + 1 > spectrum.n_max:
        raise IndexError(f"pair {n} needs level {2*n+1}, have {spectrum.n_max}")
    return float(spectrum.energies[2 * n + 1] - spectrum.energies[2 * n])


@dataclass(frozen=True)
class SplitPair:
    left: np.ndarray
    right: np.ndarray
    parity_phase: int       # +1: even member below odd member (normal ordering)
    left_fraction: float    # norm fraction of `left` in the x < 0 half-plane
    right_fraction: float


def symmetry_decompose(spectrum: TransverseSpectrum, n: int,
                       gap_threshold: float = DEGENERACY_THRESHOLD) -> SplitPair:
    """Left/right arm states from the nearly degenerate pair (2n, 2n+1).

    Returns (chi_2n + chi_2n+1)/sqrt(2) and (chi_2n - chi_2n+1)/sqrt(2) and
    checks each is localized in one half-plane.
    """
    gap = splitting_gap(spectrum, n)
    if gap >= gap_threshold:
        raise NotSplitError(
            f"pair {n} gap {gap:.3g} >= threshold {gap_threshold:.3g}; "
            "the guide is not split at this station")
    even = spectrum.states[2 * n]
    odd = spectrum.states[2 * n + 1]
    a = (even + odd) / np.sqrt(2.0)
    b = (even - odd) / np.sqrt(2.0)
    x = spectrum.grid.x
    dx = spectrum.grid.dx
    left_mask = x < 0.0

    def frac_left(state):
        return float(np.sum(state[left_mask] ** 2) * dx / (np.sum(state**2) * dx))

    fa, fb = frac_left(a), frac_left(b)
    if fa >= fb:
        left, right, f_left, f_right = a, b, fa, 1.0 - fb
    else:
        left, right, f_left, f_right = b, a, fb, 1.0 - fa
    return SplitPair(left=left, right=right, parity_phase=+1,
                     left_fraction=f_left, right_fraction=f_right)
