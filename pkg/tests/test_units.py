import math

import pytest

from guidewave.units import (
    ATOMIC_MASS,
    HBAR,
    K_B,
    LI7_MASS,
    NaturalUnits,
    ParameterError,
    PhysicalParams,
    convert,
    natural_units,
    thermal_energy_natural,
    units_for,
)


def li7_params(**overrides):
    kw = dict(mass=LI7_MASS, omega_in=1e5, temperature=200e-6,
              source_length=100e-6, delta_l=2e-6, device_length=1e-3,
              detection_time=20e-3)
    kw.update(overrides)
    return PhysicalParams(**kw)


def test_constants():
    assert HBAR == 1.054571817e-34
    assert K_B == 1.380649e-23
    assert ATOMIC_MASS == 1.660539067e-27
    assert LI7_MASS == pytest.approx(7.016003437 * ATOMIC_MASS, rel=1e-12)


def test_oscillator_length_li7():
    # sqrt(hbar / (m omega)) evaluated by hand for the default trap
    u = natural_units(LI7_MASS, 1e5)
    assert u.length_unit == pytest.approx(3.008628984310482e-07, rel=1e-12)
    assert u.time_unit == pytest.approx(1e-5, rel=1e-12)
    assert u.energy_unit == pytest.approx(1.054571817e-29, rel=1e-12)


def test_momentum_is_inverse_length():
    # natural momentum equals wavenumber (hbar = 1), so its SI scale is 1/a0
    u = natural_units(LI7_MASS, 1e5)
    assert u.momentum_unit * u.length_unit == pytest.approx(1.0, rel=1e-12)


def test_unit_mass_frequency_product():
    # when m * omega = hbar the oscillator length is exactly 1 m
    u = natural_units(HBAR / 2.0, 2.0)
    assert u.length_unit == pytest.approx(1.0, rel=1e-12)


def test_convert_round_trip():
    u = units_for(li7_params())
    for dim, value in [("length", 1e-4), ("time", 2e-2), ("energy", 3e-29),
                       ("momentum", 5e-28), ("frequency", 1e4)]:
        nat = convert(value, dim, "to", u)
        back = convert(nat, dim, "from", u)
        assert back == pytest.approx(value, rel=1e-12)


def test_convert_known_values():
    u = units_for(li7_params())
    assert convert(100e-6, "length", "to", u) == pytest.approx(
        332.37730714383184, rel=1e-10)
    assert convert(20e-3, "time", "to", u) == pytest.approx(2000.0, rel=1e-10)


def test_thermal_energy():
    u = units_for(li7_params())
    # k_B * 200 uK / (hbar * 1e5 / s)
    assert thermal_energy_natural(200e-6, u) == pytest.approx(
        261.8406784144128, rel=1e-10)


def test_convert_rejects_unknown_dimension():
    u = units_for(li7_params())
    with pytest.raises((KeyError, ValueError)):
        convert(1.0, "voltage", "to", u)


@pytest.mark.parametrize("field", ["mass", "omega_in", "temperature",
                                   "source_length", "delta_l",
                                   "device_length", "detection_time"])
def test_positivity_enforced(field):
    with pytest.raises(ParameterError):
        li7_params(**{field: 0.0})
    with pytest.raises(ParameterError):
        li7_params(**{field: -1.0})


def test_natural_units_is_frozen_dataclass():
    u = natural_units(LI7_MASS, 1e5)
    assert isinstance(u, NaturalUnits)
    with pytest.raises(AttributeError):
        u.length_unit = 2.0


def test_omega_arm_defaults_to_twice_input():
    assert li7_params().omega_arm == pytest.approx(2e5)
    assert li7_params(omega_arm=3e5).omega_arm == pytest.approx(3e5)


def test_convert_rejects_bad_direction():
    u = units_for(li7_params())
    with pytest.raises(ParameterError):
        convert(1.0, "length", "sideways", u)
