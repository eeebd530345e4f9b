import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from guidewave.channels import (
    BLOCKED,
    PacketError,
    PhaseError,
    TransferSettings,
    apply_interferometer,
    evolve_channels,
    exit_momentum,
    gaussian_packet,
    measured_velocity_split,
    phase_shift,
    transfer_matrix,
)


def test_transfer_matrix_identity():
    m = transfer_matrix(0.0)
    assert np.allclose(m, np.eye(2))


def test_transfer_matrix_pi_is_full_swap():
    m = transfer_matrix(np.pi)
    assert abs(m[0, 0]) < 1e-15
    assert abs(m[0, 1]) == pytest.approx(1.0)


def test_transfer_matrix_3pi2_balanced():
    m = transfer_matrix(1.5 * np.pi)
    assert abs(m[0, 0]) ** 2 == pytest.approx(0.5)
    assert abs(m[1, 0]) ** 2 == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(phi=st.floats(-50, 50, allow_nan=False))
def test_transfer_matrix_unitary(phi):
    m = transfer_matrix(phi)
    assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-12)


def test_phase_shift_kinds():
    s_len = TransferSettings(phase_kind="path_length", delta_l=0.3)
    assert phase_shift(10.0, s_len) == pytest.approx(3.0)
    s_pot = TransferSettings(phase_kind="potential", u_integral=5.0)
    assert phase_shift(10.0, s_pot) == pytest.approx(0.5)
    # dispersion: path-length phase grows with k, potential phase shrinks
    assert phase_shift(20.0, s_len) > phase_shift(10.0, s_len)
    assert phase_shift(20.0, s_pot) < phase_shift(10.0, s_pot)


def test_phase_shift_rejects_nonpositive_k():
    s = TransferSettings(phase_kind="path_length", delta_l=0.3)
    with pytest.raises(PhaseError):
        phase_shift(0.0, s)


def test_settings_reject_mixed_kinds():
    with pytest.raises(PhaseError):
        TransferSettings(phase_kind="path_length", delta_l=1.0, u_integral=1.0)
    with pytest.raises(PhaseError):
        TransferSettings(phase_kind="potential", delta_l=1.0)
    with pytest.raises(PhaseError):
        TransferSettings(phase_kind="both", delta_l=1.0)


def test_exit_momentum_energy_conservation():
    # raising the transverse state by one arm quantum costs omega
    assert exit_momentum(10.0, "up", 1.0) == pytest.approx(np.sqrt(98.0))
    assert exit_momentum(10.0, "down", 1.0) == pytest.approx(np.sqrt(102.0))
    assert exit_momentum(10.0, "none", 1.0) == pytest.approx(10.0)


def test_exit_momentum_blocked_below_threshold():
    assert exit_momentum(1.2, "up", 1.0) is BLOCKED
    assert exit_momentum(np.sqrt(2.0) + 1e-9, "up", 1.0) is not BLOCKED


def test_gaussian_packet_normalized():
    p = gaussian_packet(10.0, 0.2)
    assert np.sum(np.abs(p.amps) ** 2) * p.dk == pytest.approx(1.0, abs=1e-8)
    assert p.mean_k == pytest.approx(10.0, rel=1e-6)
    assert p.spread_k == pytest.approx(0.2, rel=1e-2)
    assert p.truncated_mass < 1e-8


def test_gaussian_packet_clipping_records_mass():
    p = gaussian_packet(0.5, 0.5)
    assert p.truncated_mass > 1e-3
    assert np.all(p.k > 0)


def test_gaussian_packet_rejects_bad_args():
    with pytest.raises(PacketError):
        gaussian_packet(-1.0, 0.1)
    with pytest.raises(PacketError):
        gaussian_packet(1.0, 0.0)


def test_interferometer_unitarity():
    pkt = gaussian_packet(10.0, 0.2)
    s = TransferSettings(phase_kind="path_length", delta_l=0.4)
    out = apply_interferometer(pkt, s)
    assert out.total_norm() == pytest.approx(1.0, abs=1e-9)


def test_interferometer_swap_at_pi():
    k = np.pi / 0.4  # delta_phi = k delta_l = pi at the carrier
    pkt = gaussian_packet(k, 0.01)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=0.4))
    stay, transfer = out.channels
    assert transfer.norm() > 0.999
    assert stay.norm() < 1e-3


def test_entrance_reflection_below_half_omega():
    pkt = gaussian_packet(0.7, 0.01)  # E_kin = 0.245 < omega / 2
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=0.4))
    assert out.reflected_entrance > 0.99


def test_blocked_ledger_between_thresholds():
    # passes the entrance (E_kin > omega/2) but cannot raise a quantum
    pkt = gaussian_packet(1.2, 0.01)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=0.4))
    assert out.reflected_blocked > 0.0
    assert out.total_norm() == pytest.approx(1.0, abs=1e-9)


def test_blocked_activates_exactly_at_k_squared_2omega():
    s = TransferSettings(phase_kind="path_length", delta_l=0.4)
    below = apply_interferometer(gaussian_packet(1.35, 1e-4, span=3.0), s)
    above = apply_interferometer(gaussian_packet(1.48, 1e-4, span=3.0), s)
    assert below.reflected_blocked > 0.0
    assert above.reflected_blocked == 0.0


def test_odd_input_transfers_down():
    pkt = gaussian_packet(1.2, 0.01)  # too slow to raise, fine to lower
    s = TransferSettings(phase_kind="path_length", delta_l=0.4, n_in=1)
    out = apply_interferometer(pkt, s)
    assert out.reflected_blocked == 0.0
    _, transfer = out.channels
    valid = np.isfinite(transfer.k_out)
    assert np.all(transfer.k_out[valid] > transfer.k_in[valid])


def test_evolution_conserves_channel_norm():
    pkt = gaussian_packet(10.0, 0.2, z0=0.0)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=0.4))
    z = np.linspace(-400, 600, 4000)
    d0, d1 = evolve_channels(out, 20.0, z)
    total = np.trapezoid(d0 + d1, z)
    assert total == pytest.approx(out.total_norm(), abs=1e-4)


def test_evolution_t0_centroid_at_z0():
    pkt = gaussian_packet(10.0, 0.2, z0=5.0)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=0.4))
    z = np.linspace(-100, 110, 2000)
    d0, _ = evolve_channels(out, 0.0, z)
    centroid = np.trapezoid(z * d0, z) / np.trapezoid(d0, z)
    assert centroid == pytest.approx(5.0, abs=0.2)


def test_velocity_split_narrow_packet():
    pkt = gaussian_packet(10.0, 0.05)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=1.5 * np.pi / 10.0))
    z = np.linspace(0, 600, 3000)
    dv = measured_velocity_split(out, 10.0, 40.0, z)
    exact = np.sqrt(98.0) - 10.0
    assert dv == pytest.approx(exact, rel=0.05)


@settings(max_examples=30, deadline=None)
@given(k=st.floats(2.0, 20.0), dl=st.floats(0.05, 1.0))
def test_unitarity_property(k, dl):
    pkt = gaussian_packet(k, 0.05)
    out = apply_interferometer(pkt, TransferSettings(
        phase_kind="path_length", delta_l=dl))
    assert out.total_norm() == pytest.approx(1.0, abs=1e-8)
